#include "veridl/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <ostream>
#include <sstream>

namespace veridl::wire {

namespace {

constexpr std::size_t kMaxFrame = 64u << 20;

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
    while (len > 0) {
        ssize_t n = ::write(fd, data, len);
        if (n <= 0) throw io::IoError("socket write failed");
        data += n;
        len -= (std::size_t)n;
    }
}

void read_all(int fd, std::uint8_t* data, std::size_t len) {
    while (len > 0) {
        ssize_t n = ::read(fd, data, len);
        if (n <= 0) throw io::IoError("socket read failed (peer closed?)");
        data += n;
        len -= (std::size_t)n;
    }
}

void put_blob(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> blob) {
    for (int b = 3; b >= 0; --b) out.push_back((std::uint8_t)(blob.size() >> (8 * b)));
    out.insert(out.end(), blob.begin(), blob.end());
}

std::vector<std::uint8_t> take_blob(std::span<const std::uint8_t> in, std::size_t& pos) {
    if (pos + 4 > in.size()) throw io::IoError("wire payload truncated");
    std::size_t len = 0;
    for (int b = 0; b < 4; ++b) len = (len << 8) | in[pos + b];
    pos += 4;
    if (pos + len > in.size()) throw io::IoError("wire payload truncated");
    std::vector<std::uint8_t> out(in.begin() + pos, in.begin() + pos + len);
    pos += len;
    return out;
}

struct Fd {
    int fd = -1;
    ~Fd() {
        if (fd >= 0) ::close(fd);
    }
};

}  // namespace

void write_frame(int fd, FrameType type, std::span<const std::uint8_t> payload) {
    if (payload.size() > kMaxFrame) throw io::IoError("frame too large");
    std::uint8_t head[5];
    for (int b = 0; b < 4; ++b) head[b] = (std::uint8_t)(payload.size() >> (8 * (3 - b)));
    head[4] = (std::uint8_t)type;
    write_all(fd, head, 5);
    if (!payload.empty()) write_all(fd, payload.data(), payload.size());
}

Frame read_frame(int fd) {
    std::uint8_t head[5];
    read_all(fd, head, 5);
    std::size_t len = 0;
    for (int b = 0; b < 4; ++b) len = (len << 8) | head[b];
    if (len > kMaxFrame) throw io::IoError("frame too large");
    Frame f;
    f.type = (FrameType)head[4];
    switch (f.type) {
        case FrameType::Hello:
        case FrameType::Signature:
        case FrameType::Task:
        case FrameType::Result:
        case FrameType::Verdict:
        case FrameType::Error: break;
        default: throw io::IoError("unknown frame type");
    }
    f.payload.resize(len);
    if (len) read_all(fd, f.payload.data(), len);
    return f;
}

std::vector<std::uint8_t> encode_task(const TaskPayload& t) {
    std::vector<std::uint8_t> out;
    put_blob(out, std::span((const std::uint8_t*)t.config_text.data(), t.config_text.size()));
    put_blob(out, t.public_key);
    put_blob(out, t.w0);
    put_blob(out, t.dataset);
    return out;
}

TaskPayload decode_task(std::span<const std::uint8_t> in) {
    TaskPayload t;
    std::size_t pos = 0;
    auto cfg = take_blob(in, pos);
    t.config_text.assign(cfg.begin(), cfg.end());
    t.public_key = take_blob(in, pos);
    t.w0 = take_blob(in, pos);
    t.dataset = take_blob(in, pos);
    if (pos != in.size()) throw io::IoError("trailing bytes in task payload");
    return t;
}

std::vector<std::uint8_t> encode_result(const ResultPayload& r) {
    std::vector<std::uint8_t> out;
    put_blob(out, r.updates);
    put_blob(out, r.proof);
    return out;
}

ResultPayload decode_result(std::span<const std::uint8_t> in) {
    ResultPayload r;
    std::size_t pos = 0;
    r.updates = take_blob(in, pos);
    r.proof = take_blob(in, pos);
    if (pos != in.size()) throw io::IoError("trailing bytes in result payload");
    return r;
}

namespace {

void handle_task(int fd, const Frame& frame, std::ostream& log) {
    TaskPayload task = decode_task(frame.payload);
    io::RunConfig cfg = io::parse_run_config(task.config_text);
    codec::CodecParams params = cfg.make_codec();
    auto pk = io::public_key_from_bytes(task.public_key);
    (void)pk;  // the honest server does not need v, but a task must carry it
    proto::WeightSet w0 = io::weights_from_bytes(task.w0);
    data::QuantizedDataset ds =
        data::cap_to(io::dataset_from_bytes(task.dataset, params), cfg.network.batch_size);
    cfg.network.input_dim = (std::uint32_t)ds.feature_dim;
    cfg.network.validate();

    log << "[serve] training task: n=" << ds.samples.size() << " m=" << ds.feature_dim << "\n";
    dnn::ModelState init = proto::model_from_weights(w0);
    dnn::TrainingResult tr = dnn::train_to_convergence(init, cfg.network, params, ds);
    proto::Proof proof = proto::certify(ds, tr.commitment, cfg.network, params, cfg.mode);

    ResultPayload result;
    result.updates = io::weights_bytes(proto::WeightSet{tr.delta_layers, tr.delta_output});
    result.proof = io::proof_bytes(proof);
    write_frame(fd, FrameType::Result, encode_result(result));
    log << "[serve] result sent (" << result.proof.size() << " proof bytes)\n";
}

}  // namespace

int serve(std::uint16_t port, bool once, std::ostream& log) {
    Fd listener;
    listener.fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener.fd < 0) return 3;
    int opt = 1;
    ::setsockopt(listener.fd, SOL_SOCKET, SO_REUSEADDR, &opt, sizeof(opt));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listener.fd, (sockaddr*)&addr, sizeof(addr)) != 0) return 3;
    if (::listen(listener.fd, 4) != 0) return 3;
    log << "[serve] listening on 127.0.0.1:" << port << "\n";

    bool done = false;
    while (!done) {
        Fd conn;
        conn.fd = ::accept(listener.fd, nullptr, nullptr);
        if (conn.fd < 0) return 3;
        try {
            Frame frame = read_frame(conn.fd);
            switch (frame.type) {
                case FrameType::Hello:
                    write_frame(conn.fd, FrameType::Hello, {});
                    break;
                case FrameType::Signature:
                    // the trainer has no use for gamma; acknowledge receipt
                    write_frame(conn.fd, FrameType::Hello, {});
                    break;
                case FrameType::Task:
                    handle_task(conn.fd, frame, log);
                    break;
                case FrameType::Verdict: {
                    std::string verdict(frame.payload.begin(), frame.payload.end());
                    log << "[serve] verdict received: " << verdict << "\n";
                    write_frame(conn.fd, FrameType::Hello, {});
                    if (once) done = true;
                    break;
                }
                default:
                    write_frame(conn.fd, FrameType::Error, {});
                    break;
            }
        } catch (const std::exception& e) {
            log << "[serve] error: " << e.what() << "\n";
            try {
                std::string msg = e.what();
                write_frame(conn.fd, FrameType::Error,
                            std::span((const std::uint8_t*)msg.data(), msg.size()));
                if (once) done = true;
            } catch (...) {
            }
        }
    }
    return 0;
}

namespace {

Fd connect_to(const std::string& host, std::uint16_t port) {
    Fd fd;
    fd.fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd.fd < 0) throw io::IoError("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw io::IoError("bad host address: " + host);
    if (::connect(fd.fd, (sockaddr*)&addr, sizeof(addr)) != 0)
        throw io::IoError("connect failed");
    return fd;
}

Frame roundtrip(const std::string& host, std::uint16_t port, FrameType type,
                std::span<const std::uint8_t> payload) {
    Fd fd = connect_to(host, port);
    write_frame(fd.fd, type, payload);
    Frame reply = read_frame(fd.fd);
    if (reply.type == FrameType::Error)
        throw io::IoError("peer error: " +
                          std::string(reply.payload.begin(), reply.payload.end()));
    return reply;
}

}  // namespace

int run_client(const std::string& host, std::uint16_t port, const io::RunConfig& cfg,
               std::ostream& log) {
    codec::CodecParams params = cfg.make_codec();

    // data owner: keys, data, initial weights, signature
    group::KeyPair keys = group::genkey(128, cfg.seed);
    data::QuantizedDataset ds = data::cap_to(
        cfg.dataset_path.empty()
            ? data::make_synthetic(cfg.seed, 24, 3, params,
                                   cfg.network.activation == dnn::Activation::Relu)
            : data::load_csv(cfg.dataset_path, params),
        cfg.network.batch_size);
    dnn::NetworkConfig net = cfg.network;
    net.input_dim = (std::uint32_t)ds.feature_dim;
    net.validate();
    dnn::ModelState w0_model = dnn::init_model(net, cfg.seed ^ 0x17);
    proto::WeightSet w0{w0_model.layers, w0_model.output};
    proto::DatasetSignature sig = proto::setup(ds, keys, params);

    Frame hello = roundtrip(host, port, FrameType::Hello, {});
    if (hello.type != FrameType::Hello) throw io::IoError("unexpected hello reply");
    log << "[demo] hello acknowledged\n";

    auto sig_bytes = io::signature_bytes(sig);
    (void)roundtrip(host, port, FrameType::Signature, sig_bytes);
    log << "[demo] signature published\n";

    TaskPayload task;
    {
        std::ostringstream t;
        t << "eta = " << net.learning_rate << "\n"
          << "theta = " << net.threshold << "\n"
          << "batch_size = " << net.batch_size << "\n"
          << "max_epochs = " << net.max_epochs << "\n"
          << "activation = " << dnn::activation_name(net.activation) << "\n"
          << "frac_bits = " << cfg.frac_bits << "\n"
          << "mode = " << proto::mode_name(cfg.mode) << "\n"
          << "hidden = ";
        for (std::size_t i = 0; i < net.hidden.size(); ++i)
            t << (i ? "," : "") << net.hidden[i];
        t << "\n";
        task.config_text = t.str();
    }
    task.public_key = io::public_key_bytes(io::PublicKeyFile{128, keys.public_v});
    task.w0 = io::weights_bytes(w0);
    task.dataset = io::dataset_bytes(ds);

    Frame result_frame = roundtrip(host, port, FrameType::Task, encode_task(task));
    if (result_frame.type != FrameType::Result) throw io::IoError("expected RESULT frame");
    ResultPayload result = decode_result(result_frame.payload);
    log << "[demo] result received (" << result.proof.size() << " proof bytes)\n";

    proto::WeightSet delta = io::weights_from_bytes(result.updates);
    proto::Proof proof = io::proof_from_bytes(result.proof);
    proto::VerificationReport rep =
        proto::verify(w0, delta, proof, sig, keys.public_v, net, params);

    std::string verdict = rep.accepted ? "accept"
                                       : std::string("reject ") +
                                             proto::failed_step_name(rep.failed_step);
    log << "[demo] verdict: " << verdict << "\n";
    (void)roundtrip(host, port, FrameType::Verdict,
                    std::span((const std::uint8_t*)verdict.data(), verdict.size()));
    return rep.accepted ? 0 : 2;
}

}  // namespace veridl::wire
