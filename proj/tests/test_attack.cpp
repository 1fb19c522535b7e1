#include <doctest.h>

#include <filesystem>
#include <set>

#include "rlab/attack.hpp"
#include "rlab/error.hpp"
#include "rlab/image.hpp"
#include "support.hpp"

using namespace rlab;
using rlab::testing::image_contains;
using rlab::testing::run_scenario;

namespace {

ScenarioFile ten_files(AttackScenario s) {
    ScenarioFile f;
    f.scenario = std::move(s);
    f.files = default_victim_files(5, 10);
    return f;
}

AttackScenario make(StructureVariant v, SingleKeyKind kind, KeySource src, bool shadow, RemnantDeletion rem,
                    bool residue = false) {
    AttackScenario s;
    s.scenario_id = "unit";
    s.encryption = {v, kind, {src, residue}};
    s.delete_shadow_copies = shadow;
    s.remnant_deletion = rem;
    s.rng_seed = 77;
    return s;
}

std::size_t count_kind(const TraceLog& log, EventKind k) {
    return static_cast<std::size_t>(
        std::count_if(log.events.begin(), log.events.end(), [k](const TraceEvent& e) { return e.kind == k; }));
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::ConfigError;
}

/// Fails every exchange after `ok` successful ones.
class FlakyEndpoint final : public C2Endpoint {
public:
    FlakyEndpoint(C2State& s, int ok) : inner_(s), ok_(ok) {}
    C2Message exchange(const C2Message& r) override {
        if (ok_-- <= 0) throw Error(ErrorKind::FrameError, "connection reset");
        return inner_.exchange(r);
    }

private:
    InProcEndpoint inner_;
    int ok_;
};

}  // namespace

TEST_SUITE("attack") {

TEST_CASE("scareware leaves everything but the note") {
    auto f = ten_files(make(StructureVariant::NoEncryption, {}, {}, false, RemnantDeletion::None));
    auto r = run_scenario(f);
    CHECK(r.outcome.encrypted_count == 0);
    CHECK(r.outcome.targets.size() == 10);
    for (const auto& [p, e] : r.before.entries()) CHECK(r.after.entry(p).content == e.content);
    CHECK(r.after.entries().size() == r.before.entries().size() + 1);
    CHECK(r.after.contains(kRansomNotePath));
    CHECK(r.after.snapshots() == r.before.snapshots());
    CHECK(count_kind(r.outcome.trace, EventKind::KEYGEN) == 0);
    CHECK(count_kind(r.outcome.trace, EventKind::NET_FETCH_KEY) == 0);
    CHECK(count_kind(r.outcome.trace, EventKind::NOTE_WRITE) == 1);
}

TEST_CASE("CAT3 row: embedded symmetric key with full deletion") {
    auto f = ten_files(make(StructureVariant::SingleKey, SingleKeyKind::Symmetric, KeySource::PayloadEmbedded, true,
                            RemnantDeletion::OverwriteRandom));
    auto r = run_scenario(f);
    CHECK(r.outcome.encrypted_count == 10);
    CHECK(r.after.snapshots().empty());
    for (const auto& p : r.outcome.targets) {
        CHECK(r.after.entry(p).state == FileState::Overwritten);
        auto c = decode_container(r.after.peek(p + kLockedSuffix));
        CHECK(c.src == p);
        CHECK_FALSE(c.wrap);
        CHECK(c.data == r.outcome.artifacts.ciphertext_map.at(p));
    }
    REQUIRE(r.outcome.artifacts.payload_index.size() == 1);
    const auto& rec = r.outcome.artifacts.payload_index[0];
    const auto& payload = r.outcome.artifacts.payload_image;
    auto key = deserialize_key(ByteView(payload).subspan(rec.offset, rec.length));
    REQUIRE(std::holds_alternative<SymKey>(key));
    const auto& sym = std::get<SymKey>(key);
    CHECK(find_bytes(payload, sym.bytes) < payload.size());
    CHECK(r.outcome.artifacts.exfiltrated_blobs.empty());
    auto fv = extract_features(r.outcome.trace);
    CHECK(fv.sk_pemb);
    CHECK(fv.sk_kind == SkKind::Symmetric);
    CHECK(fv.del_shadow_copies);
    CHECK(fv.overwrite_delete);
    CHECK_FALSE(fv.any_hybrid());
}

TEST_CASE("three-tier with embedded master") {
    auto f = ten_files(make(StructureVariant::HybridThreeTier, {}, KeySource::PayloadEmbedded, true,
                            RemnantDeletion::OverwriteRandom));
    auto r = run_scenario(f);
    std::set<std::string> per_file;
    for (const auto& [p, blob] : r.outcome.artifacts.ciphertext_map) per_file.insert(blob.key_id);
    CHECK(per_file.size() == r.outcome.encrypted_count);
    CHECK(r.outcome.encrypted_count == 10);

    // Exactly one stored wrap under the master, wrapping a private key.
    const auto& master_id = r.outcome.artifacts.payload_index.at(0).key_id;
    std::size_t under_master = 0;
    for (const auto& [p, e] : r.after.entries()) {
        if (e.state != FileState::Live) continue;
        if (looks_like_wrapped_key_file(e.content)) {
            auto cj = decode_wrapped_key_file(e.content);
            if (cj.key_id != master_id) continue;
            ++under_master;
            auto sub = r.attacker_keys.try_unwrap(cj);
            REQUIRE(sub);
            CHECK(std::holds_alternative<PrivateKey>(*sub));
        } else if (looks_like_container(e.content)) {
            CHECK(decode_container(e.content).wrap->key_id != master_id);
        }
    }
    CHECK(under_master == 1);
    // No C2, so nothing leaves the victim.
    CHECK(r.outcome.artifacts.exfiltrated_blobs.empty());
}

TEST_CASE("exfiltration happens iff wrapped key material is shipped to a C2") {
    for (auto v : {StructureVariant::SingleKey, StructureVariant::HybridPerFile, StructureVariant::HybridThreeTier})
        for (auto src : {KeySource::C2Download, KeySource::PayloadEmbedded, KeySource::LocalGeneration}) {
            auto f = ten_files(make(v, SingleKeyKind::Asymmetric, src, true, RemnantDeletion::OverwriteRandom));
            auto r = run_scenario(f);
            bool wraps = v != StructureVariant::SingleKey;
            bool ships = wraps && src == KeySource::C2Download;
            CHECK(!r.outcome.artifacts.exfiltrated_blobs.empty() == ships);
            CHECK(r.c2.received_blobs() == r.outcome.artifacts.exfiltrated_blobs);
            std::size_t expected = !ships ? 0 : r.outcome.encrypted_count + (v == StructureVariant::HybridThreeTier);
            CHECK(r.outcome.artifacts.exfiltrated_blobs.size() == expected);
        }
}

TEST_CASE("single asymmetric key leaves only the public half on the victim") {
    for (auto src : {KeySource::C2Download, KeySource::PayloadEmbedded, KeySource::LocalGeneration}) {
        auto f = ten_files(make(StructureVariant::SingleKey, SingleKeyKind::Asymmetric, src, true,
                                RemnantDeletion::OverwriteRandom));
        auto r = run_scenario(f);
        for (const auto& k : r.attacker_keys.all()) {
            if (!std::holds_alternative<PrivateKey>(k)) continue;
            CHECK_FALSE(image_contains(r, serialize_key(k)));
        }
        CHECK(r.outcome.artifacts.victim_residue.empty());
    }
}

TEST_CASE("off-victim symmetric keys never reach the image") {
    for (auto src : {KeySource::C2Download, KeySource::LocalGeneration}) {
        auto f = ten_files(make(StructureVariant::SingleKey, SingleKeyKind::Symmetric, src, true,
                                RemnantDeletion::OverwriteRandom));
        auto r = run_scenario(f);
        auto keys = r.attacker_keys.all();
        REQUIRE(keys.size() == 1);
        CHECK_FALSE(image_contains(r, std::get<SymKey>(keys[0]).bytes));
        CHECK(r.outcome.artifacts.victim_residue.empty());
    }
}

TEST_CASE("three-tier always generates the sub pair locally") {
    for (auto src : {KeySource::C2Download, KeySource::PayloadEmbedded, KeySource::LocalGeneration}) {
        auto f = ten_files(make(StructureVariant::HybridThreeTier, {}, src, true, RemnantDeletion::OverwriteRandom));
        auto r = run_scenario(f);
        std::size_t asym_keygen = 0;
        for (const auto& e : r.outcome.trace.events)
            if (e.kind == EventKind::KEYGEN && e.attr("key_kind") == "asym") ++asym_keygen;
        CHECK(asym_keygen == (src == KeySource::LocalGeneration ? 2 : 1));
    }
}

TEST_CASE("local generation emits a keygen event") {
    auto f = ten_files(make(StructureVariant::SingleKey, SingleKeyKind::Symmetric, KeySource::LocalGeneration, false,
                            RemnantDeletion::None, true));
    auto r = run_scenario(f);
    REQUIRE(count_kind(r.outcome.trace, EventKind::KEYGEN) == 1);
    CHECK(r.outcome.artifacts.victim_residue.size() == 1);
}

TEST_CASE("in-place encryption when remnants are kept") {
    auto f = ten_files(make(StructureVariant::HybridPerFile, {}, KeySource::LocalGeneration, false,
                            RemnantDeletion::None));
    auto r = run_scenario(f);
    for (const auto& p : r.outcome.targets) {
        CHECK(looks_like_container(r.after.peek(p)));
        CHECK_FALSE(r.after.contains(p + kLockedSuffix));
    }
    CHECK(count_kind(r.outcome.trace, EventKind::FILE_DELETE) == 0);
}

TEST_CASE("metadata-only remnant deletion") {
    auto f = ten_files(make(StructureVariant::SingleKey, SingleKeyKind::Symmetric, KeySource::C2Download, false,
                            RemnantDeletion::MetadataOnly));
    auto r = run_scenario(f);
    for (const auto& p : r.outcome.targets) CHECK(r.after.entry(p).state == FileState::MetadataDeleted);
    CHECK_FALSE(extract_features(r.outcome.trace).overwrite_delete);
}

TEST_CASE("runs are deterministic in the seed") {
    auto f = ten_files(make(StructureVariant::HybridThreeTier, {}, KeySource::C2Download, true,
                            RemnantDeletion::OverwriteRandom));
    auto a = run_scenario(f);
    auto b = run_scenario(f);
    CHECK(a.after == b.after);
    CHECK(a.outcome.trace == b.outcome.trace);
    CHECK(a.outcome.artifacts == b.outcome.artifacts);
    f.scenario.rng_seed += 1;
    auto c = run_scenario(f);
    CHECK_FALSE(a.outcome.artifacts == c.outcome.artifacts);
}

TEST_CASE("empty target set is legal") {
    auto s = make(StructureVariant::SingleKey, SingleKeyKind::Symmetric, KeySource::PayloadEmbedded, true,
                  RemnantDeletion::OverwriteRandom);
    s.target_glob = "/Nowhere/**";
    auto r = run_scenario(ten_files(s));
    CHECK(r.outcome.targets.empty());
    CHECK(r.outcome.encrypted_count == 0);
    CHECK(extract_features(r.outcome.trace) == implied_features(s, 0));
}

TEST_CASE("missing C2 aborts and leaves the fs untouched") {
    auto s = make(StructureVariant::SingleKey, SingleKeyKind::Asymmetric, KeySource::C2Download, true,
                  RemnantDeletion::OverwriteRandom);
    auto fs = build_victim(ten_files(s));
    auto before = fs;
    CHECK(kind_of([&] { execute_attack(s, fs, nullptr); }) == ErrorKind::AttackAborted);
    CHECK(fs == before);
}

TEST_CASE("C2 failure part way through aborts and leaves the fs untouched") {
    auto s = make(StructureVariant::HybridPerFile, {}, KeySource::C2Download, true, RemnantDeletion::OverwriteRandom);
    for (int ok = 0; ok < 5; ++ok) {
        auto fs = build_victim(ten_files(s));
        auto before = fs;
        C2State c2(1);
        FlakyEndpoint ep(c2, ok);
        CHECK(kind_of([&] { execute_attack(s, fs, &ep); }) == ErrorKind::AttackAborted);
        CHECK(fs == before);
    }
}

TEST_CASE("invalid scenarios are rejected") {
    auto base = make(StructureVariant::SingleKey, SingleKeyKind::Symmetric, KeySource::LocalGeneration, true,
                     RemnantDeletion::OverwriteRandom);
    auto s = base;
    s.scenario_id.clear();
    CHECK(kind_of([&] { validate_scenario(s); }) == ErrorKind::ConfigError);
    s = base;
    s.target_glob = "Users/[x]";
    CHECK(kind_of([&] { validate_scenario(s); }) == ErrorKind::ConfigError);
    s = make(StructureVariant::NoEncryption, {}, {}, false, RemnantDeletion::MetadataOnly);
    CHECK(kind_of([&] { validate_scenario(s); }) == ErrorKind::ConfigError);
    s = make(StructureVariant::SingleKey, SingleKeyKind::Asymmetric, KeySource::LocalGeneration, true,
             RemnantDeletion::OverwriteRandom, true);
    CHECK(kind_of([&] { validate_scenario(s); }) == ErrorKind::ConfigError);
    s = make(StructureVariant::SingleKey, SingleKeyKind::Symmetric, KeySource::C2Download, true,
             RemnantDeletion::OverwriteRandom, true);
    CHECK(kind_of([&] { validate_scenario(s); }) == ErrorKind::ConfigError);
    auto fs = build_victim(ten_files(base));
    auto before = fs;
    CHECK(kind_of([&] { execute_attack(s, fs); }) == ErrorKind::ConfigError);
    CHECK(fs == before);
}

TEST_CASE("target selection skips attack artifacts") {
    auto s = make(StructureVariant::SingleKey, SingleKeyKind::Symmetric, KeySource::PayloadEmbedded, false,
                  RemnantDeletion::None);
    auto fs = VirtualFS::create({{"/a.txt", to_bytes("a")},
                                 {"/b.txt.locked", to_bytes("b")},
                                 {kRansomNotePath, to_bytes("pay")},
                                 {"/c.txt", to_bytes("c")}});
    CHECK(select_targets(s, fs) == std::vector<std::string>{"/a.txt", "/c.txt"});
}

TEST_CASE("scenario json round trip and enum strings") {
    auto s = make(StructureVariant::HybridThreeTier, {}, KeySource::C2Download, true, RemnantDeletion::MetadataOnly,
                  true);
    s.target_glob = "/Users/**/*.docx";
    nlohmann::json j = s;
    CHECK(j.get<AttackScenario>() == s);
    CHECK(to_string(key_source_from_string("PayloadEmbedded")) == "PayloadEmbedded");
    CHECK(kind_of([] { structure_variant_from_string("Quadruple"); }) == ErrorKind::ConfigError);
}

TEST_CASE("scenario file parsing") {
    auto f = parse_scenario_file(R"({
        "schema": "v1",
        "scenario": {"scenario_id": "x", "encryption": {"variant": "NoEncryption"}},
        "victim": {"files": [{"path": "/a", "text": "hi"}, {"path": "/b", "hex": "00ff"}], "snapshots": 2},
        "expected_category": "CAT1", "expected_sublabel": "Scareware"})");
    CHECK(f.scenario.scenario_id == "x");
    REQUIRE(f.files.size() == 2);
    CHECK(f.files[1].second == Bytes{0x00, 0xff});
    CHECK(f.snapshots == 2);
    CHECK(f.expected_category == Category{CategoryValue::CAT1, Sublabel::Scareware});
    CHECK(parse_scenario_file(scenario_file_to_json(f)).files == f.files);
    CHECK(build_victim(f).snapshots().size() == 2);

    CHECK(kind_of([] { parse_scenario_file("{"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] {
              parse_scenario_file(R"({"schema":"v1","scenario":{"scenario_id":"x","encryption":{"variant":"NoEncryption"}},"victim":{"count":100000000}})");
          }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { parse_scenario_file(R"({"schema":"v1"})"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] {
              parse_scenario_file(R"({"schema":"v1","scenario":{"scenario_id":"x"},"victim":{"files":[{"text":"no path"}]}})");
          }) == ErrorKind::ConfigError);
}

TEST_CASE("bundled scenarios classify as labelled") {
    for (const auto& entry : std::filesystem::directory_iterator(rlab::testing::source_dir() + "/data/scenarios")) {
        auto f = parse_scenario_file(read_text_file(entry.path()));
        REQUIRE(f.expected_category);
        auto r = run_scenario(f);
        CHECK_MESSAGE(classify(extract_features(r.outcome.trace)).category == *f.expected_category,
                      entry.path().filename().string());
    }
}

TEST_CASE("container and wrapped-key encodings") {
    Rng rng(1);
    auto k = keygen_symmetric(rng);
    auto kp = keygen_asymmetric(rng);
    LockedContainer c{"/a", wrap_key(k, kp.pub), encrypt_sym(to_bytes("data"), k)};
    auto enc = encode_container(c);
    CHECK(looks_like_container(enc));
    auto back = decode_container(enc);
    CHECK(back.src == c.src);
    CHECK(back.wrap == c.wrap);
    CHECK(back.data == c.data);
    for (std::size_t cut = 0; cut < enc.size(); cut += 5)
        CHECK(kind_of([&] { decode_container(ByteView(enc).first(cut)); }) == ErrorKind::ImageError);
    auto w = encode_wrapped_key_file(*c.wrap);
    CHECK(looks_like_wrapped_key_file(w));
    CHECK_FALSE(looks_like_container(w));
    CHECK(decode_wrapped_key_file(w) == *c.wrap);
    w.push_back(1);
    CHECK(kind_of([&] { decode_wrapped_key_file(w); }) == ErrorKind::ImageError);
}

}  // TEST_SUITE
