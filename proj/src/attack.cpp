#include "rlab/attack.hpp"

#include <algorithm>
#include <cstring>

#include "rlab/error.hpp"

namespace rlab {

namespace {

constexpr std::uint8_t kContainerMagic[4] = {'R', 'L', 'K', '1'};
constexpr std::uint8_t kWrappedKeyMagic[4] = {'R', 'E', 'K', '1'};
constexpr const char* kWrappedKeyPath = "/ProgramData/00000000.eky";
constexpr std::size_t kMaxVictimFiles = 10000;
constexpr std::size_t kMaxSnapshots = 64;
constexpr std::size_t kPayloadHead = 256;
constexpr std::size_t kPayloadTail = 128;

[[noreturn]] void config_error(const std::string& what) {
    throw Error(ErrorKind::ConfigError, what);
}

[[noreturn]] void aborted(const std::string& what) {
    throw Error(ErrorKind::AttackAborted, what);
}

bool has_magic(ByteView bytes, const std::uint8_t (&magic)[4]) {
    return bytes.size() >= 4 && std::memcmp(bytes.data(), magic, 4) == 0;
}

std::string key_kind_attr(const KeyMaterial& key) {
    if (std::holds_alternative<SymKey>(key)) return "sym";
    return "pub";
}

/// Wraps the victim-side C2 conversation so every failure surfaces as
/// AttackAborted.
class C2Session {
public:
    C2Session(C2Endpoint* endpoint, std::string sample_id)
        : endpoint_(endpoint), sample_id_(std::move(sample_id)) {}

    void beacon() {
        auto reply = exchange(C2Message{C2MessageType::BEACON, {}});
        if (reply.type != C2MessageType::ACK) aborted("C2 did not acknowledge the beacon");
    }

    KeyMaterial request_key(KeyScheme scheme) {
        auto reply = exchange(C2Message{C2MessageType::KEY_REQUEST, encode_key_request(sample_id_, scheme)});
        if (reply.type != C2MessageType::KEY_RESPONSE) aborted("C2 answered a key request with " +
                                                               std::string(to_string(reply.type)));
        try {
            auto key = deserialize_key(reply.payload);
            bool ok = scheme == KeyScheme::Symmetric ? std::holds_alternative<SymKey>(key)
                                                     : std::holds_alternative<PublicKey>(key);
            if (!ok) aborted("C2 returned the wrong kind of key");
            return key;
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::AttackAborted) throw;
            aborted(std::string("C2 key response unreadable: ") + e.what());
        }
    }

    void exfiltrate(const CipherBlob& blob) {
        auto reply = exchange(C2Message{C2MessageType::EXFIL, encode_blob(blob)});
        if (reply.type != C2MessageType::ACK || to_string(reply.payload) != blob.blob_id)
            aborted("C2 did not acknowledge blob " + blob.blob_id);
    }

private:
    C2Message exchange(const C2Message& msg) {
        try {
            return endpoint_->exchange(msg);
        } catch (const Error& e) {
            aborted(std::string("C2 unreachable: ") + e.what());
        }
    }

    C2Endpoint* endpoint_;
    std::string sample_id_;
};

Bytes payload_filler(Rng& rng, std::size_t n) {
    Bytes out = rng.bytes(n);
    // Keep the scanner's magic out of the filler so the only keys found are
    // the planted ones.
    for (std::size_t i = 0; i + 4 <= out.size(); ++i)
        if (std::memcmp(out.data() + i, kKeyMagic, 4) == 0) out[i] ^= 0x80;
    return out;
}

}  // namespace

std::string_view to_string(KeySource s) {
    switch (s) {
    case KeySource::C2Download: return "C2Download";
    case KeySource::PayloadEmbedded: return "PayloadEmbedded";
    case KeySource::LocalGeneration: return "LocalGeneration";
    }
    return "LocalGeneration";
}

KeySource key_source_from_string(std::string_view s) {
    if (s == "C2Download") return KeySource::C2Download;
    if (s == "PayloadEmbedded") return KeySource::PayloadEmbedded;
    if (s == "LocalGeneration") return KeySource::LocalGeneration;
    config_error("unknown key source '" + std::string(s) + "'");
}

std::string_view to_string(StructureVariant v) {
    switch (v) {
    case StructureVariant::NoEncryption: return "NoEncryption";
    case StructureVariant::SingleKey: return "SingleKey";
    case StructureVariant::HybridPerFile: return "HybridPerFile";
    case StructureVariant::HybridThreeTier: return "HybridThreeTier";
    }
    return "NoEncryption";
}

StructureVariant structure_variant_from_string(std::string_view s) {
    if (s == "NoEncryption") return StructureVariant::NoEncryption;
    if (s == "SingleKey") return StructureVariant::SingleKey;
    if (s == "HybridPerFile") return StructureVariant::HybridPerFile;
    if (s == "HybridThreeTier") return StructureVariant::HybridThreeTier;
    config_error("unknown encryption variant '" + std::string(s) + "'");
}

std::string_view to_string(SingleKeyKind k) {
    return k == SingleKeyKind::Symmetric ? "Symmetric" : "Asymmetric";
}

SingleKeyKind single_key_kind_from_string(std::string_view s) {
    if (s == "Symmetric") return SingleKeyKind::Symmetric;
    if (s == "Asymmetric") return SingleKeyKind::Asymmetric;
    config_error("unknown single-key kind '" + std::string(s) + "'");
}

std::string_view to_string(RemnantDeletion r) {
    switch (r) {
    case RemnantDeletion::None: return "None";
    case RemnantDeletion::MetadataOnly: return "MetadataOnly";
    case RemnantDeletion::OverwriteRandom: return "OverwriteRandom";
    }
    return "None";
}

RemnantDeletion remnant_deletion_from_string(std::string_view s) {
    if (s == "None") return RemnantDeletion::None;
    if (s == "MetadataOnly") return RemnantDeletion::MetadataOnly;
    if (s == "OverwriteRandom") return RemnantDeletion::OverwriteRandom;
    config_error("unknown remnant deletion '" + std::string(s) + "'");
}

void to_json(nlohmann::json& j, const AttackScenario& s) {
    nlohmann::json enc{{"variant", std::string(to_string(s.encryption.variant))}};
    if (s.encryption.variant == StructureVariant::SingleKey)
        enc["kind"] = std::string(to_string(s.encryption.kind));
    if (s.encryption.variant != StructureVariant::NoEncryption)
        enc["provenance"] = {{"source", std::string(to_string(s.encryption.provenance.source))},
                             {"residue_left_on_victim", s.encryption.provenance.residue_left_on_victim}};
    j = nlohmann::json{
        {"scenario_id", s.scenario_id},
        {"encryption", enc},
        {"delete_shadow_copies", s.delete_shadow_copies},
        {"remnant_deletion", std::string(to_string(s.remnant_deletion))},
        {"target_glob", s.target_glob},
        {"rng_seed", s.rng_seed},
    };
}

void from_json(const nlohmann::json& j, AttackScenario& s) {
    try {
        s = AttackScenario{};
        s.scenario_id = j.at("scenario_id").get<std::string>();
        const auto& enc = j.at("encryption");
        s.encryption.variant = structure_variant_from_string(enc.at("variant").get<std::string>());
        if (enc.contains("kind")) s.encryption.kind = single_key_kind_from_string(enc.at("kind").get<std::string>());
        if (enc.contains("provenance")) {
            const auto& p = enc.at("provenance");
            s.encryption.provenance.source = key_source_from_string(p.at("source").get<std::string>());
            s.encryption.provenance.residue_left_on_victim = p.value("residue_left_on_victim", false);
        } else if (s.encryption.variant != StructureVariant::NoEncryption) {
            config_error("encryption.provenance is required for " +
                         std::string(to_string(s.encryption.variant)));
        }
        s.delete_shadow_copies = j.value("delete_shadow_copies", false);
        s.remnant_deletion = remnant_deletion_from_string(j.value("remnant_deletion", std::string("None")));
        s.target_glob = j.value("target_glob", std::string("/**"));
        s.rng_seed = j.value("rng_seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        config_error(std::string("malformed scenario: ") + e.what());
    }
}

void validate_scenario(const AttackScenario& s) {
    if (s.scenario_id.empty()) config_error("scenario_id must not be empty");
    validate_glob(s.target_glob);
    const auto& enc = s.encryption;
    if (enc.variant == StructureVariant::NoEncryption) {
        if (s.remnant_deletion != RemnantDeletion::None)
            config_error("remnant deletion needs encrypted remnants; NoEncryption has none");
        return;
    }
    if (enc.provenance.residue_left_on_victim) {
        bool allowed = enc.variant != StructureVariant::SingleKey ||
                       (enc.kind == SingleKeyKind::Symmetric && enc.provenance.source == KeySource::LocalGeneration);
        if (!allowed)
            config_error("residue_left_on_victim is only meaningful for locally generated symmetric single keys "
                         "and hybrid structures");
    }
}

bool requires_c2(const AttackScenario& s) {
    return s.encryption.variant != StructureVariant::NoEncryption &&
           s.encryption.provenance.source == KeySource::C2Download;
}

std::vector<std::pair<std::string, Bytes>> default_victim_files(std::uint64_t seed, std::size_t count) {
    static constexpr const char* kDirs[] = {"Documents", "Pictures", "Desktop", "Projects"};
    static constexpr const char* kExts[] = {".docx", ".jpg", ".xlsx", ".pdf", ".txt"};
    Rng rng(mix64(seed ^ 0x766963746d696dULL));
    std::vector<std::pair<std::string, Bytes>> out;
    for (std::size_t i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "file_%02zu", i);
        std::string path = std::string("/Users/victim/") + kDirs[rng.uniform(4)] + "/" + name + kExts[rng.uniform(5)];
        Bytes content = to_bytes("document " + std::to_string(i) + "\n");
        auto extra = rng.bytes(32 + rng.uniform(480));
        content.insert(content.end(), extra.begin(), extra.end());
        out.emplace_back(std::move(path), std::move(content));
    }
    return out;
}

VirtualFS build_victim(const ScenarioFile& f) {
    auto fs = VirtualFS::create(f.files);
    for (std::size_t i = 0; i < f.snapshots; ++i) fs.take_shadow_snapshot();
    return fs;
}

ScenarioFile parse_scenario_file(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        config_error(std::string("scenario file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("schema", "") != "v1")
        config_error("scenario file must carry \"schema\": \"v1\"");
    ScenarioFile out;
    try {
        out.scenario = doc.at("scenario").get<AttackScenario>();
        const auto victim = doc.value("victim", nlohmann::json::object());
        out.snapshots = victim.value("snapshots", std::size_t{1});
        if (out.snapshots > kMaxSnapshots) config_error("victim.snapshots exceeds " + std::to_string(kMaxSnapshots));
        if (victim.contains("files")) {
            for (const auto& f : victim.at("files")) {
                Bytes content;
                if (f.contains("hex")) content = from_hex(f.at("hex").get<std::string>());
                else content = to_bytes(f.value("text", std::string{}));
                out.files.emplace_back(f.at("path").get<std::string>(), std::move(content));
            }
        } else {
            auto count = victim.value("count", std::size_t{10});
            if (count > kMaxVictimFiles) config_error("victim.count exceeds " + std::to_string(kMaxVictimFiles));
            out.files = default_victim_files(out.scenario.rng_seed, count);
        }
        if (doc.contains("expected_category")) {
            Category c;
            c.value = category_value_from_string(doc.at("expected_category").get<std::string>());
            if (doc.contains("expected_sublabel"))
                c.sublabel = sublabel_from_string(doc.at("expected_sublabel").get<std::string>());
            out.expected_category = c;
        }
    } catch (const nlohmann::json::exception& e) {
        config_error(std::string("malformed scenario file: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigError) throw;
        config_error(e.what());
    }
    validate_scenario(out.scenario);
    return out;
}

std::string scenario_file_to_json(const ScenarioFile& f) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [path, content] : f.files) files.push_back({{"path", path}, {"hex", to_hex(content)}});
    nlohmann::json doc{
        {"schema", "v1"},
        {"scenario", f.scenario},
        {"victim", {{"files", files}, {"snapshots", f.snapshots}}},
    };
    if (f.expected_category) {
        doc["expected_category"] = std::string(to_string(f.expected_category->value));
        if (f.expected_category->sublabel != Sublabel::None)
            doc["expected_sublabel"] = std::string(to_string(f.expected_category->sublabel));
    }
    return doc.dump(2) + "\n";
}

std::vector<std::string> select_targets(const AttackScenario& scenario, const VirtualFS& fs) {
    validate_glob(scenario.target_glob);
    std::vector<std::string> out;
    const std::string suffix = kLockedSuffix;
    for (const auto& path : fs.live_paths()) {
        if (path == kRansomNotePath || path == kWrappedKeyPath) continue;
        if (path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
            continue;
        if (glob_match(scenario.target_glob, path)) out.push_back(path);
    }
    return out;
}

FeatureVector implied_features(const AttackScenario& scenario, std::size_t encrypted_count) {
    FeatureVector fv;
    fv.del_shadow_copies = scenario.delete_shadow_copies;
    const auto& enc = scenario.encryption;
    if (enc.variant == StructureVariant::NoEncryption) return fv;
    fv.overwrite_delete = scenario.remnant_deletion == RemnantDeletion::OverwriteRandom && encrypted_count > 0;

    const auto src = enc.provenance.source;
    const bool residue = enc.provenance.residue_left_on_victim;
    switch (enc.variant) {
    case StructureVariant::SingleKey:
        fv.key_residue_on_victim = residue;
        if (encrypted_count == 0) break;
        fv.sk_c2 = src == KeySource::C2Download;
        fv.sk_pemb = src == KeySource::PayloadEmbedded;
        fv.sk_localgen = src == KeySource::LocalGeneration;
        fv.sk_kind = enc.kind == SingleKeyKind::Symmetric ? SkKind::Symmetric : SkKind::Asymmetric;
        break;
    case StructureVariant::HybridPerFile:
        if (encrypted_count == 0) break;
        fv.key_residue_on_victim = residue;
        fv.hk_c2 = src == KeySource::C2Download;
        fv.hk_pemb = src == KeySource::PayloadEmbedded;
        fv.hk_localgen = src == KeySource::LocalGeneration;
        break;
    case StructureVariant::HybridThreeTier:
        // The sub pair is wrapped even when no file matched.
        fv.key_residue_on_victim = residue;
        fv.hk_c2 = src == KeySource::C2Download;
        fv.hk_pemb = src == KeySource::PayloadEmbedded;
        fv.hk_localgen = src == KeySource::LocalGeneration;
        break;
    case StructureVariant::NoEncryption:
        break;
    }
    return fv;
}

Bytes encode_container(const LockedContainer& c) {
    Bytes out(std::begin(kContainerMagic), std::end(kContainerMagic));
    put_str16(out, c.src);
    put_u8(out, c.wrap ? 1 : 0);
    if (c.wrap) {
        auto w = encode_blob(*c.wrap);
        put_u32(out, static_cast<std::uint32_t>(w.size()));
        put_bytes(out, w);
    }
    auto d = encode_blob(c.data);
    put_u32(out, static_cast<std::uint32_t>(d.size()));
    put_bytes(out, d);
    return out;
}

LockedContainer decode_container(ByteView bytes) {
    if (!has_magic(bytes, kContainerMagic)) throw Error(ErrorKind::ImageError, "not a locked container");
    try {
        ByteReader in(bytes.subspan(4), ErrorKind::ImageError);
        LockedContainer c;
        c.src = in.str16();
        auto has_wrap = in.u8();
        if (has_wrap > 1) throw Error(ErrorKind::ImageError, "bad wrap flag in container");
        if (has_wrap == 1) {
            auto w = in.bytes(in.u32());
            c.wrap = decode_blob(w);
        }
        auto d = in.bytes(in.u32());
        c.data = decode_blob(d);
        if (!in.done()) throw Error(ErrorKind::ImageError, "trailing octets in container");
        return c;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ImageError) throw;
        throw Error(ErrorKind::ImageError, std::string("corrupt container: ") + e.what());
    }
}

bool looks_like_container(ByteView bytes) { return has_magic(bytes, kContainerMagic); }

Bytes encode_wrapped_key_file(const CipherBlob& blob) {
    Bytes out(std::begin(kWrappedKeyMagic), std::end(kWrappedKeyMagic));
    auto b = encode_blob(blob);
    put_u32(out, static_cast<std::uint32_t>(b.size()));
    put_bytes(out, b);
    return out;
}

CipherBlob decode_wrapped_key_file(ByteView bytes) {
    if (!has_magic(bytes, kWrappedKeyMagic)) throw Error(ErrorKind::ImageError, "not a wrapped key file");
    try {
        ByteReader in(bytes.subspan(4), ErrorKind::ImageError);
        auto b = in.bytes(in.u32());
        if (!in.done()) throw Error(ErrorKind::ImageError, "trailing octets in wrapped key file");
        return decode_blob(b);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ImageError) throw;
        throw Error(ErrorKind::ImageError, std::string("corrupt wrapped key file: ") + e.what());
    }
}

bool looks_like_wrapped_key_file(ByteView bytes) { return has_magic(bytes, kWrappedKeyMagic); }

AttackOutcome execute_attack(const AttackScenario& scenario, VirtualFS& fs, C2Endpoint* c2) {
    validate_scenario(scenario);
    const auto& enc = scenario.encryption;
    const bool encrypting = enc.variant != StructureVariant::NoEncryption;
    const bool residue = enc.provenance.residue_left_on_victim;

    AttackOutcome out;
    out.trace.scenario_id = scenario.scenario_id;
    out.targets = select_targets(scenario, fs);
    if (requires_c2(scenario) && c2 == nullptr) aborted("scenario needs a C2 endpoint and none is configured");

    // All work happens on a copy so an abort leaves the caller's fs alone.
    VirtualFS work = fs;
    TraceRecorder rec(out.trace);
    work.attach_trace(&rec);
    Rng rng(scenario.rng_seed);
    auto& art = out.artifacts;

    std::optional<C2Session> session;
    if (requires_c2(scenario)) {
        session.emplace(c2, scenario.scenario_id);
        session->beacon();
    }

    // Governing key acquisition.
    std::optional<SymKey> sym;
    std::optional<PublicKey> pub;
    std::optional<KeyMaterial> embedded;
    if (encrypting) {
        const bool want_sym = enc.variant == StructureVariant::SingleKey && enc.kind == SingleKeyKind::Symmetric;
        switch (enc.provenance.source) {
        case KeySource::C2Download: {
            auto key = session->request_key(want_sym ? KeyScheme::Symmetric : KeyScheme::AsymmetricPublic);
            if (want_sym) sym = std::get<SymKey>(key);
            else pub = std::get<PublicKey>(key);
            rec.record(EventKind::NET_FETCH_KEY, {{"key_id", key_id_of(key)}, {"key_kind", key_kind_attr(key)}});
            break;
        }
        case KeySource::PayloadEmbedded:
            // Generated at build time by the attacker; only the victim-usable half ships.
            if (want_sym) {
                sym = keygen_symmetric(rng);
                embedded = *sym;
                out.local_attacker_keys.add(*sym);
            } else {
                auto pair = keygen_asymmetric(rng);
                pub = pair.pub;
                embedded = pair.pub;
                out.local_attacker_keys.add(pair.priv);
            }
            break;
        case KeySource::LocalGeneration:
            if (want_sym) {
                sym = keygen_symmetric(rng);
                out.local_attacker_keys.add(*sym);
                rec.record(EventKind::KEYGEN,
                           {{"key_id", sym->key_id}, {"key_kind", "sym"}, {"residue", residue ? "1" : "0"}});
                if (residue) art.victim_residue.push_back(*sym);
            } else {
                auto pair = keygen_asymmetric(rng);
                pub = pair.pub;
                out.local_attacker_keys.add(pair.priv);
                rec.record(EventKind::KEYGEN, {{"key_id", pair.pair_id}, {"key_kind", "asym"}, {"residue", "0"}});
            }
            break;
        }
    }

    // Payload image, with the embedded key (if any) at a fixed offset.
    art.payload_image = {'M', 'Z'};
    auto head = payload_filler(rng, kPayloadHead - 2);
    put_bytes(art.payload_image, head);
    if (embedded) {
        auto ser = serialize_key(*embedded);
        EmbeddedKeyRecord r{art.payload_image.size(), ser.size(), key_id_of(*embedded), key_kind_attr(*embedded)};
        put_bytes(art.payload_image, ser);
        art.payload_index.push_back(r);
        rec.record(EventKind::EMBEDDED_KEY_READ,
                   {{"key_id", r.key_id}, {"key_kind", r.kind}, {"offset", std::to_string(r.offset)}});
    }
    put_bytes(art.payload_image, payload_filler(rng, kPayloadTail));

    std::vector<std::pair<CipherBlob, std::string>> wraps;  // C_j and the key it wraps

    // Three-tier: sub pair generated here, its private half wrapped by the master.
    std::optional<PublicKey> file_wrapper;
    if (enc.variant == StructureVariant::HybridPerFile) file_wrapper = pub;
    if (enc.variant == StructureVariant::HybridThreeTier) {
        auto sub = keygen_asymmetric(rng);
        rec.record(EventKind::KEYGEN, {{"key_id", sub.pair_id}, {"key_kind", "asym"}, {"residue", residue ? "1" : "0"}});
        auto cj = wrap_key(sub.priv, *pub);
        work.write_file(kWrappedKeyPath, encode_wrapped_key_file(cj),
                        {{"blob_id", cj.blob_id},
                         {"producer", "KeyWrap"},
                         {"key_id", cj.key_id},
                         {"wrapped", sub.pair_id}});
        wraps.emplace_back(cj, sub.pair_id);
        if (residue) art.victim_residue.push_back(sub.priv);
        file_wrapper = sub.pub;
    }

    // Per-file encryption.
    if (encrypting) {
        const bool in_place = scenario.remnant_deletion == RemnantDeletion::None;
        for (const auto& path : out.targets) {
            Bytes plain = work.read_file(path);
            LockedContainer c;
            c.src = path;
            if (enc.variant == StructureVariant::SingleKey) {
                c.data = sym ? encrypt_sym(plain, *sym) : encrypt_asym_stream(plain, *pub);
            } else {
                auto k = keygen_symmetric(rng);
                const bool keep = enc.variant == StructureVariant::HybridPerFile && residue;
                rec.record(EventKind::KEYGEN, {{"key_id", k.key_id}, {"key_kind", "sym"}, {"residue", keep ? "1" : "0"}});
                c.data = encrypt_sym(plain, k);
                c.wrap = wrap_key(k, *file_wrapper);
                wraps.emplace_back(*c.wrap, k.key_id);
                if (keep) art.victim_residue.push_back(k);
            }
            TraceAttrs attrs{{"blob_id", c.data.blob_id},
                             {"producer", "PerFileEncryption"},
                             {"key_id", c.data.key_id},
                             {"src", path}};
            if (c.wrap) {
                attrs["wrap_key"] = c.wrap->key_id;
                attrs["wrap_blob"] = c.wrap->blob_id;
            }
            art.ciphertext_map.emplace(path, c.data);
            work.write_file(in_place ? path : path + kLockedSuffix, encode_container(c), std::move(attrs));
            ++out.encrypted_count;
        }
    }

    if (session) {
        for (const auto& [cj, wrapped] : wraps) {
            session->exfiltrate(cj);
            art.exfiltrated_blobs.push_back(cj);
            rec.record(EventKind::NET_EXFIL,
                       {{"blob_id", cj.blob_id}, {"producer", "KeyWrap"}, {"key_id", cj.key_id}, {"wrapped", wrapped}});
        }
    }

    if (scenario.remnant_deletion != RemnantDeletion::None) {
        auto mode = scenario.remnant_deletion == RemnantDeletion::MetadataOnly ? DeleteMode::MetadataOnly
                                                                               : DeleteMode::OverwriteRandom;
        for (const auto& path : out.targets) work.delete_file(path, mode, rng);
    }

    if (scenario.delete_shadow_copies) {
        rec.record(EventKind::PROC_EXEC, {{"cmd", kShadowDeleteCmd}});
        work.delete_shadow_copies();
    }

    art.note_path = kRansomNotePath;
    art.ransom_note = "All of your files have been encrypted.\n"
                      "Reference: " + scenario.scenario_id + "\n"
                      "Files affected: " + std::to_string(out.targets.size()) + "\n"
                      "Do not rename or modify the locked files.\n";
    work.write_file(kRansomNotePath, to_bytes(art.ransom_note), {}, EventKind::NOTE_WRITE);

    work.attach_trace(nullptr);
    fs = std::move(work);
    return out;
}

}  // namespace rlab
