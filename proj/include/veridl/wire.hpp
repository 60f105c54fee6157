#pragma once

#include "veridl/artifacts.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace veridl::wire {

/**
 * Demo wire protocol: frame = 4-byte big-endian payload length, 1-byte
 * type, payload bytes. One request/response pair per connection.
 */
enum class FrameType : std::uint8_t {
    Hello = 0x01,
    Signature = 0x02,
    Task = 0x03,
    Result = 0x04,
    Verdict = 0x05,
    Error = 0x7F,
};

struct Frame {
    FrameType type;
    std::vector<std::uint8_t> payload;
};

void write_frame(int fd, FrameType type, std::span<const std::uint8_t> payload);
Frame read_frame(int fd);

/** TASK payload: length-prefixed config text, public key, w0, dataset. */
struct TaskPayload {
    std::string config_text;
    std::vector<std::uint8_t> public_key;
    std::vector<std::uint8_t> w0;
    std::vector<std::uint8_t> dataset;
};

/** RESULT payload: length-prefixed updates and proof artifacts. */
struct ResultPayload {
    std::vector<std::uint8_t> updates;
    std::vector<std::uint8_t> proof;
};

std::vector<std::uint8_t> encode_task(const TaskPayload& t);
TaskPayload decode_task(std::span<const std::uint8_t> in);
std::vector<std::uint8_t> encode_result(const ResultPayload& r);
ResultPayload decode_result(std::span<const std::uint8_t> in);

/**
 * Training server: sequential accept loop answering HELLO, SIGNATURE (ack),
 * TASK (train + certify, reply RESULT) and VERDICT frames. Returns 0, or
 * nonzero on socket setup failure. With once=true it exits after a VERDICT
 * or an ERROR exchange.
 */
int serve(std::uint16_t port, bool once, std::ostream& log);

/**
 * Data-owner plus verifier driver: generates keys and data, signs, ships
 * the task, verifies the result, reports the verdict to the server.
 * Returns 0 on accept, 2 on reject, nonzero codes on transport errors.
 */
int run_client(const std::string& host, std::uint16_t port, const io::RunConfig& cfg,
               std::ostream& log);

}  // namespace veridl::wire
