#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rlab/bytes.hpp"
#include "rlab/rng.hpp"

namespace rlab {

inline constexpr std::size_t kSymKeySize = 32;
/// Largest plaintext a single asymmetric block carries. Moduli are always
/// above 2^60 so any 7-octet value is in range.
inline constexpr std::size_t kAsymBlockOctets = 7;

struct SymKey {
    std::string key_id;
    Bytes bytes;

    bool operator==(const SymKey&) const = default;
};

/// Public and private halves share the pair id as their key_id.
struct PublicKey {
    std::string key_id;
    std::uint64_t modulus = 0;
    std::uint64_t exponent = 0;

    bool operator==(const PublicKey&) const = default;
};

struct PrivateKey {
    std::string key_id;
    std::uint64_t modulus = 0;
    std::uint64_t exponent = 0;

    bool operator==(const PrivateKey&) const = default;
};

struct AsymKeyPair {
    std::string pair_id;
    PublicKey pub;
    PrivateKey priv;
};

using KeyMaterial = std::variant<SymKey, PublicKey, PrivateKey>;

const std::string& key_id_of(const KeyMaterial& key);

enum class BlobProducer : std::uint8_t { PerFileEncryption = 0, KeyWrap = 1 };

std::string_view to_string(BlobProducer p);
BlobProducer blob_producer_from_string(std::string_view s);

/// C_i (PerFileEncryption) or C_j (KeyWrap). key_id names the key that
/// produced the ciphertext; blob_id is derived from the content.
struct CipherBlob {
    std::string blob_id;
    std::string key_id;
    BlobProducer producer = BlobProducer::PerFileEncryption;
    Bytes bytes;

    bool operator==(const CipherBlob&) const = default;
};

SymKey keygen_symmetric(Rng& rng);
AsymKeyPair keygen_asymmetric(Rng& rng);

CipherBlob encrypt_sym(ByteView plaintext, const SymKey& key);
Bytes decrypt_sym(const CipherBlob& blob, const SymKey& key);

/// Single-block textbook RSA. Messages longer than kAsymBlockOctets throw
/// MessageTooLarge.
CipherBlob encrypt_asym(ByteView message, const PublicKey& pub);
Bytes decrypt_asym(const CipherBlob& blob, const PrivateKey& priv);

/// Chunked variant used for whole files under a single public key.
CipherBlob encrypt_asym_stream(ByteView data, const PublicKey& pub,
                               BlobProducer producer = BlobProducer::PerFileEncryption);
Bytes decrypt_asym_stream(const CipherBlob& blob, const PrivateKey& priv);

CipherBlob wrap_key(const KeyMaterial& key, const PublicKey& pub);
/// Throws InvalidKey when the result does not deserialize, which is what a
/// wrong private key produces.
KeyMaterial unwrap_key(const CipherBlob& blob, const PrivateKey& priv);

/// "RKEY" | u8 kind | u16 id_len | id | u16 len | material
Bytes serialize_key(const KeyMaterial& key);
KeyMaterial deserialize_key(ByteView data);
/// Parses one serialized key at the front of `data`; returns the number of
/// octets consumed through `consumed`.
KeyMaterial deserialize_key_prefix(ByteView data, std::size_t& consumed);

inline constexpr std::uint8_t kKeyMagic[4] = {'R', 'K', 'E', 'Y'};

/// "RCB1" | u8 producer | u16 blob_id | u16 key_id | u32 len | bytes
Bytes encode_blob(const CipherBlob& blob);
CipherBlob decode_blob(ByteView data);

/// Modular helpers, exposed for tests.
std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);
bool is_prime(std::uint64_t n);

/// Key material indexed by id, plus whatever decrypts with it.
class Keyring {
public:
    void add(const KeyMaterial& key);

    const SymKey* sym(const std::string& id) const;
    const PrivateKey* priv(const std::string& id) const;

    bool empty() const noexcept { return sym_.empty() && priv_.empty() && pub_.empty(); }
    std::size_t size() const noexcept { return sym_.size() + priv_.size() + pub_.size(); }
    std::vector<KeyMaterial> all() const;

    /// Decrypts a PerFileEncryption blob if the matching key is known.
    std::optional<Bytes> try_decrypt(const CipherBlob& blob) const;
    /// Unwraps a KeyWrap blob if the matching private key is known.
    std::optional<KeyMaterial> try_unwrap(const CipherBlob& blob) const;

private:
    std::map<std::string, SymKey> sym_;
    std::map<std::string, PrivateKey> priv_;
    std::map<std::string, PublicKey> pub_;
};

}  // namespace rlab
