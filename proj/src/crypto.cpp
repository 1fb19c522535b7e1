#include "rlab/crypto.hpp"

#include <algorithm>
#include <cstdio>

#include "rlab/error.hpp"

namespace rlab {

namespace {

constexpr std::uint8_t kBlobMagic[4] = {'R', 'C', 'B', '1'};
constexpr std::uint64_t kPublicExponent = 65537;
constexpr std::uint64_t kKeystreamInit = 0x243f6a8885a308d3ULL;

enum class KeyTag : std::uint8_t { Symmetric = 1, Public = 2, Private = 3 };

std::string derive_blob_id(BlobProducer producer, std::string_view key_id, ByteView bytes) {
    // FNV-1a over (producer, key_id, bytes), finalized with mix64.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint8_t b) {
        h ^= b;
        h *= 0x100000001b3ULL;
    };
    feed(static_cast<std::uint8_t>(producer));
    for (char c : key_id) feed(static_cast<std::uint8_t>(c));
    feed(0);
    for (auto b : bytes) feed(b);
    char buf[24];
    std::snprintf(buf, sizeof buf, "b%016llx", static_cast<unsigned long long>(mix64(h)));
    return buf;
}

CipherBlob make_blob(BlobProducer producer, std::string key_id, Bytes bytes) {
    CipherBlob blob;
    blob.blob_id = derive_blob_id(producer, key_id, bytes);
    blob.key_id = std::move(key_id);
    blob.producer = producer;
    blob.bytes = std::move(bytes);
    return blob;
}

void check_sym_key(const SymKey& key) {
    if (key.bytes.size() != kSymKeySize)
        throw Error(ErrorKind::InvalidKey, "symmetric key '" + key.key_id + "' has " +
                                               std::to_string(key.bytes.size()) + " octets, expected " +
                                               std::to_string(kSymKeySize));
}

/// XOR with the keystream derived from the key octets.
Bytes apply_keystream(ByteView data, const SymKey& key) {
    std::uint64_t state = kKeystreamInit;
    for (std::size_t i = 0; i < key.bytes.size(); i += 8) {
        std::uint64_t w = 0;
        for (std::size_t j = 0; j < 8 && i + j < key.bytes.size(); ++j)
            w |= std::uint64_t{key.bytes[i + j]} << (8 * j);
        state = mix64(state ^ w);
    }
    Bytes out(data.begin(), data.end());
    std::uint64_t block = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i % 8 == 0) {
            state += kGoldenGamma;
            block = mix64(state);
        }
        out[i] ^= static_cast<std::uint8_t>(block >> (8 * (i % 8)));
    }
    return out;
}

std::uint64_t be_value(ByteView chunk) {
    std::uint64_t v = 0;
    for (auto b : chunk) v = v << 8 | b;
    return v;
}

void append_be(Bytes& out, std::uint64_t v, std::size_t octets) {
    for (std::size_t i = octets; i-- > 0;) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t decrypt_block(std::uint64_t c, const PrivateKey& priv, std::size_t octets) {
    if (c >= priv.modulus)
        throw Error(ErrorKind::InvalidKey, "ciphertext block exceeds modulus of '" + priv.key_id + "'");
    std::uint64_t m = powmod(c, priv.exponent, priv.modulus);
    if (octets < 8 && (m >> (8 * octets)) != 0)
        throw Error(ErrorKind::InvalidKey, "decrypted block out of range under '" + priv.key_id + "'");
    return m;
}

std::uint64_t modinv(std::uint64_t a, std::uint64_t m) {
    __int128 t = 0, new_t = 1;
    __int128 r = m, new_r = a;
    while (new_r != 0) {
        __int128 q = r / new_r;
        __int128 tmp = t - q * new_t;
        t = new_t;
        new_t = tmp;
        tmp = r - q * new_r;
        r = new_r;
        new_r = tmp;
    }
    if (r != 1) return 0;
    if (t < 0) t += m;
    return static_cast<std::uint64_t>(t);
}

std::uint64_t random_prime(Rng& rng) {
    for (;;) {
        std::uint64_t candidate = (rng.next() & 0x3fffffffULL) | 0x40000001ULL;  // 31-bit, odd
        if (is_prime(candidate)) return candidate;
    }
}

}  // namespace

const std::string& key_id_of(const KeyMaterial& key) {
    return std::visit([](const auto& k) -> const std::string& { return k.key_id; }, key);
}

std::string_view to_string(BlobProducer p) {
    return p == BlobProducer::KeyWrap ? "KeyWrap" : "PerFileEncryption";
}

BlobProducer blob_producer_from_string(std::string_view s) {
    if (s == "KeyWrap") return BlobProducer::KeyWrap;
    if (s == "PerFileEncryption") return BlobProducer::PerFileEncryption;
    throw Error(ErrorKind::ParseError, "unknown blob producer '" + std::string(s) + "'");
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t result = 1 % m;
    base %= m;
    while (exp != 0) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    static constexpr std::uint64_t kBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (auto p : kBases) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // Deterministic Miller-Rabin for all 64-bit n with these bases.
    for (auto a : kBases) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

SymKey keygen_symmetric(Rng& rng) {
    SymKey key;
    key.key_id = rng.next_id("sk");
    key.bytes = rng.bytes(kSymKeySize);
    return key;
}

AsymKeyPair keygen_asymmetric(Rng& rng) {
    AsymKeyPair pair;
    pair.pair_id = rng.next_id("kp");
    for (;;) {
        std::uint64_t p = random_prime(rng);
        std::uint64_t q = random_prime(rng);
        if (p == q) continue;
        std::uint64_t phi = (p - 1) * (q - 1);
        std::uint64_t d = modinv(kPublicExponent % phi, phi);
        if (d == 0) continue;
        std::uint64_t n = p * q;
        pair.pub = PublicKey{pair.pair_id, n, kPublicExponent};
        pair.priv = PrivateKey{pair.pair_id, n, d};
        return pair;
    }
}

CipherBlob encrypt_sym(ByteView plaintext, const SymKey& key) {
    check_sym_key(key);
    return make_blob(BlobProducer::PerFileEncryption, key.key_id, apply_keystream(plaintext, key));
}

Bytes decrypt_sym(const CipherBlob& blob, const SymKey& key) {
    check_sym_key(key);
    return apply_keystream(blob.bytes, key);
}

CipherBlob encrypt_asym(ByteView message, const PublicKey& pub) {
    if (message.size() > kAsymBlockOctets)
        throw Error(ErrorKind::MessageTooLarge, std::to_string(message.size()) +
                                                    " octets exceed the single-block bound of " +
                                                    std::to_string(kAsymBlockOctets));
    if (pub.modulus == 0) throw Error(ErrorKind::InvalidKey, "public key has zero modulus");
    Bytes out;
    put_u8(out, static_cast<std::uint8_t>(message.size()));
    put_u64(out, powmod(be_value(message), pub.exponent, pub.modulus));
    return make_blob(BlobProducer::PerFileEncryption, pub.key_id, std::move(out));
}

Bytes decrypt_asym(const CipherBlob& blob, const PrivateKey& priv) {
    if (priv.modulus == 0) throw Error(ErrorKind::InvalidKey, "private key has zero modulus");
    ByteReader in(blob.bytes, ErrorKind::InvalidKey);
    std::size_t octets = in.u8();
    if (octets > kAsymBlockOctets) throw Error(ErrorKind::InvalidKey, "block length out of range");
    std::uint64_t m = decrypt_block(in.u64(), priv, octets);
    if (!in.done()) throw Error(ErrorKind::InvalidKey, "trailing octets in asymmetric blob");
    Bytes out;
    append_be(out, m, octets);
    return out;
}

CipherBlob encrypt_asym_stream(ByteView data, const PublicKey& pub, BlobProducer producer) {
    if (pub.modulus == 0) throw Error(ErrorKind::InvalidKey, "public key has zero modulus");
    if (data.size() > 0xffffffffULL) throw Error(ErrorKind::MessageTooLarge, "stream exceeds 2^32-1 octets");
    Bytes out;
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    for (std::size_t i = 0; i < data.size(); i += kAsymBlockOctets) {
        auto chunk = data.subspan(i, std::min(kAsymBlockOctets, data.size() - i));
        put_u64(out, powmod(be_value(chunk), pub.exponent, pub.modulus));
    }
    return make_blob(producer, pub.key_id, std::move(out));
}

Bytes decrypt_asym_stream(const CipherBlob& blob, const PrivateKey& priv) {
    if (priv.modulus == 0) throw Error(ErrorKind::InvalidKey, "private key has zero modulus");
    ByteReader in(blob.bytes, ErrorKind::InvalidKey);
    std::size_t total = in.u32();
    std::size_t chunks = (total + kAsymBlockOctets - 1) / kAsymBlockOctets;
    if (in.remaining() != chunks * 8) throw Error(ErrorKind::InvalidKey, "chunk count mismatch");
    Bytes out;
    out.reserve(total);
    for (std::size_t i = 0; i < chunks; ++i) {
        std::size_t octets = std::min(kAsymBlockOctets, total - i * kAsymBlockOctets);
        append_be(out, decrypt_block(in.u64(), priv, octets), octets);
    }
    return out;
}

CipherBlob wrap_key(const KeyMaterial& key, const PublicKey& pub) {
    return encrypt_asym_stream(serialize_key(key), pub, BlobProducer::KeyWrap);
}

KeyMaterial unwrap_key(const CipherBlob& blob, const PrivateKey& priv) {
    if (blob.producer != BlobProducer::KeyWrap)
        throw Error(ErrorKind::InvalidKey, "blob " + blob.blob_id + " is not a key wrap");
    return deserialize_key(decrypt_asym_stream(blob, priv));
}

Bytes serialize_key(const KeyMaterial& key) {
    Bytes out(std::begin(kKeyMagic), std::end(kKeyMagic));
    std::visit(
        [&out](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            Bytes material;
            KeyTag tag;
            if constexpr (std::is_same_v<K, SymKey>) {
                tag = KeyTag::Symmetric;
                material = k.bytes;
            } else {
                tag = std::is_same_v<K, PublicKey> ? KeyTag::Public : KeyTag::Private;
                put_u64(material, k.modulus);
                put_u64(material, k.exponent);
            }
            put_u8(out, static_cast<std::uint8_t>(tag));
            put_str16(out, k.key_id);
            put_u16(out, static_cast<std::uint16_t>(material.size()));
            put_bytes(out, material);
        },
        key);
    return out;
}

KeyMaterial deserialize_key_prefix(ByteView data, std::size_t& consumed) {
    ByteReader in(data, ErrorKind::InvalidKey);
    auto magic = in.bytes(4);
    if (!std::equal(magic.begin(), magic.end(), std::begin(kKeyMagic)))
        throw Error(ErrorKind::InvalidKey, "missing key magic");
    auto tag = in.u8();
    auto id = in.str16();
    auto len = in.u16();
    auto material = in.bytes(len);
    consumed = in.position();
    switch (static_cast<KeyTag>(tag)) {
    case KeyTag::Symmetric: {
        SymKey key{id, material};
        check_sym_key(key);
        return key;
    }
    case KeyTag::Public:
    case KeyTag::Private: {
        if (len != 16) throw Error(ErrorKind::InvalidKey, "asymmetric key material must be 16 octets");
        ByteReader m(material, ErrorKind::InvalidKey);
        std::uint64_t modulus = m.u64();
        std::uint64_t exponent = m.u64();
        if (modulus < 2) throw Error(ErrorKind::InvalidKey, "degenerate modulus");
        if (static_cast<KeyTag>(tag) == KeyTag::Public) return PublicKey{id, modulus, exponent};
        return PrivateKey{id, modulus, exponent};
    }
    }
    throw Error(ErrorKind::InvalidKey, "unknown key tag " + std::to_string(tag));
}

KeyMaterial deserialize_key(ByteView data) {
    std::size_t consumed = 0;
    auto key = deserialize_key_prefix(data, consumed);
    if (consumed != data.size()) throw Error(ErrorKind::InvalidKey, "trailing octets after serialized key");
    return key;
}

Bytes encode_blob(const CipherBlob& blob) {
    Bytes out(std::begin(kBlobMagic), std::end(kBlobMagic));
    put_u8(out, static_cast<std::uint8_t>(blob.producer));
    put_str16(out, blob.blob_id);
    put_str16(out, blob.key_id);
    put_u32(out, static_cast<std::uint32_t>(blob.bytes.size()));
    put_bytes(out, blob.bytes);
    return out;
}

CipherBlob decode_blob(ByteView data) {
    ByteReader in(data, ErrorKind::ProtocolError);
    auto magic = in.bytes(4);
    if (!std::equal(magic.begin(), magic.end(), std::begin(kBlobMagic)))
        throw Error(ErrorKind::ProtocolError, "missing cipher blob magic");
    CipherBlob blob;
    auto producer = in.u8();
    if (producer > 1) throw Error(ErrorKind::ProtocolError, "unknown blob producer " + std::to_string(producer));
    blob.producer = static_cast<BlobProducer>(producer);
    blob.blob_id = in.str16();
    blob.key_id = in.str16();
    blob.bytes = in.bytes(in.u32());
    if (!in.done()) throw Error(ErrorKind::ProtocolError, "trailing octets after cipher blob");
    return blob;
}

void Keyring::add(const KeyMaterial& key) {
    std::visit(
        [this](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, SymKey>)
                sym_.insert_or_assign(k.key_id, k);
            else if constexpr (std::is_same_v<K, PrivateKey>)
                priv_.insert_or_assign(k.key_id, k);
            else
                pub_.insert_or_assign(k.key_id, k);
        },
        key);
}

const SymKey* Keyring::sym(const std::string& id) const {
    auto it = sym_.find(id);
    return it == sym_.end() ? nullptr : &it->second;
}

const PrivateKey* Keyring::priv(const std::string& id) const {
    auto it = priv_.find(id);
    return it == priv_.end() ? nullptr : &it->second;
}

std::vector<KeyMaterial> Keyring::all() const {
    std::vector<KeyMaterial> out;
    for (const auto& [id, k] : sym_) out.emplace_back(k);
    for (const auto& [id, k] : pub_) out.emplace_back(k);
    for (const auto& [id, k] : priv_) out.emplace_back(k);
    return out;
}

std::optional<Bytes> Keyring::try_decrypt(const CipherBlob& blob) const {
    if (blob.producer != BlobProducer::PerFileEncryption) return std::nullopt;
    try {
        if (const auto* k = sym(blob.key_id)) return decrypt_sym(blob, *k);
        if (const auto* k = priv(blob.key_id)) return decrypt_asym_stream(blob, *k);
    } catch (const Error&) {
    }
    return std::nullopt;
}

std::optional<KeyMaterial> Keyring::try_unwrap(const CipherBlob& blob) const {
    if (blob.producer != BlobProducer::KeyWrap) return std::nullopt;
    const auto* k = priv(blob.key_id);
    if (k == nullptr) return std::nullopt;
    try {
        return unwrap_key(blob, *k);
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace rlab
