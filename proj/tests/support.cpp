#include "support.hpp"

#include <cstdio>

namespace rlab::testing {

namespace {

KeySource pick_source(Rng& rng) {
    static constexpr KeySource kAll[] = {KeySource::C2Download, KeySource::PayloadEmbedded,
                                         KeySource::LocalGeneration};
    return kAll[rng.uniform(3)];
}

EncryptionStructure single(SingleKeyKind kind, KeySource src, bool residue) {
    return {StructureVariant::SingleKey, kind, {src, residue}};
}

EncryptionStructure hybrid(Rng& rng, bool residue) {
    auto v = rng.coin() ? StructureVariant::HybridPerFile : StructureVariant::HybridThreeTier;
    return {v, SingleKeyKind::Symmetric, {pick_source(rng), residue}};
}

/// Any valid encrypting structure.
EncryptionStructure any_encryption(Rng& rng) {
    switch (rng.uniform(3)) {
    case 0: {
        auto src = pick_source(rng);
        bool residue = src == KeySource::LocalGeneration && rng.coin();
        return single(SingleKeyKind::Symmetric, src, residue);
    }
    case 1:
        return single(SingleKeyKind::Asymmetric, pick_source(rng), false);
    default:
        return hybrid(rng, rng.coin());
    }
}

std::string random_name(Rng& rng) {
    static constexpr const char* kStems[] = {"report", "photo", "budget", "thesis", "notes", "invoice", "draft"};
    static constexpr const char* kExts[] = {".docx", ".jpg", ".xlsx", ".pdf", ".txt"};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03u%s", kStems[rng.uniform(7)], static_cast<unsigned>(rng.uniform(1000)),
                  kExts[rng.uniform(5)]);
    return buf;
}

}  // namespace

const char* shape_name(Shape s) {
    switch (s) {
    case Shape::Cat1: return "CAT1";
    case Shape::Cat2: return "CAT2";
    case Shape::Cat3: return "CAT3";
    case Shape::Cat4: return "CAT4";
    case Shape::Cat5: return "CAT5";
    case Shape::Cat5Residue: return "CAT5+residue";
    case Shape::Any: return "any";
    }
    return "?";
}

std::optional<CategoryValue> shape_category(Shape s) {
    switch (s) {
    case Shape::Cat1: return CategoryValue::CAT1;
    case Shape::Cat2: return CategoryValue::CAT2;
    case Shape::Cat3: return CategoryValue::CAT3;
    case Shape::Cat4: return CategoryValue::CAT4;
    case Shape::Cat5:
    case Shape::Cat5Residue: return CategoryValue::CAT5;
    case Shape::Any: return std::nullopt;
    }
    return std::nullopt;
}

AttackScenario random_scenario(Rng& rng, Shape shape) {
    AttackScenario s;
    s.rng_seed = rng.next();
    char id[32];
    std::snprintf(id, sizeof id, "prop-%016llx", static_cast<unsigned long long>(s.rng_seed));
    s.scenario_id = id;
    s.target_glob = "/Users/**";
    s.delete_shadow_copies = true;
    s.remnant_deletion = RemnantDeletion::OverwriteRandom;

    switch (shape) {
    case Shape::Cat1:
        s.encryption = {};
        s.delete_shadow_copies = rng.coin();
        s.remnant_deletion = RemnantDeletion::None;
        break;
    case Shape::Cat2:
        s.encryption = any_encryption(rng);
        s.delete_shadow_copies = false;
        s.remnant_deletion = rng.coin() ? RemnantDeletion::None : RemnantDeletion::MetadataOnly;
        break;
    case Shape::Cat3:
        s.encryption = rng.coin() ? single(SingleKeyKind::Symmetric, KeySource::PayloadEmbedded, false)
                                  : single(SingleKeyKind::Symmetric, KeySource::LocalGeneration, true);
        break;
    case Shape::Cat4:
        switch (rng.uniform(3)) {
        case 0: s.encryption = single(SingleKeyKind::Asymmetric, pick_source(rng), false); break;
        case 1: s.encryption = single(SingleKeyKind::Symmetric, KeySource::C2Download, false); break;
        default: s.encryption = single(SingleKeyKind::Symmetric, KeySource::LocalGeneration, false); break;
        }
        break;
    case Shape::Cat5:
        s.encryption = hybrid(rng, false);
        break;
    case Shape::Cat5Residue:
        s.encryption = hybrid(rng, true);
        break;
    case Shape::Any: {
        static constexpr const char* kGlobs[] = {"/Users/**", "/Users/victim/Documents/*", "/**/*.docx",
                                                 "/Nothing/**", "/**"};
        s.target_glob = kGlobs[rng.uniform(5)];
        s.delete_shadow_copies = rng.coin();
        if (rng.uniform(5) == 0) {
            s.encryption = {};
            s.remnant_deletion = RemnantDeletion::None;
        } else {
            s.encryption = any_encryption(rng);
            s.remnant_deletion = static_cast<RemnantDeletion>(rng.uniform(3));
        }
        break;
    }
    }
    return s;
}

ScenarioFile random_scenario_file(Rng& rng, Shape shape) {
    static constexpr const char* kDirs[] = {"/Users/victim/Documents/", "/Users/victim/Pictures/",
                                            "/Users/victim/Desktop/"};
    ScenarioFile f;
    f.scenario = random_scenario(rng, shape);
    std::size_t n = 1 + rng.uniform(10);
    for (std::size_t i = 0; i < n; ++i) {
        std::string path = std::string(kDirs[rng.uniform(3)]) + std::to_string(i) + "_" + random_name(rng);
        f.files.emplace_back(path, rng.bytes(rng.uniform(700)));
    }
    // Something outside /Users that a narrow glob leaves alone.
    f.files.emplace_back("/Windows/System32/kernel32.dll", rng.bytes(64));
    f.snapshots = shape == Shape::Any ? rng.uniform(3) : 1 + rng.uniform(2);
    return f;
}

Run run_scenario(const ScenarioFile& file, std::uint64_t c2_seed) {
    Run r;
    r.file = file;
    r.c2 = C2State(c2_seed);
    r.before = build_victim(file);
    r.after = r.before;
    auto targets = select_targets(file.scenario, r.before);
    InProcEndpoint endpoint(r.c2);
    r.outcome = execute_attack(file.scenario, r.after, requires_c2(file.scenario) ? &endpoint : nullptr);
    r.image.fs = r.after;
    r.image.artifacts = r.outcome.artifacts;
    r.image.oracle = capture_oracle(r.before, targets);
    for (const auto& k : r.outcome.local_attacker_keys.all()) r.attacker_keys.add(k);
    for (const auto& k : r.c2.attacker_keys().all()) r.attacker_keys.add(k);
    return r;
}

bool image_contains(const Run& run, ByteView needle) {
    auto in = [&needle](ByteView hay) { return find_bytes(hay, needle) < hay.size(); };
    for (const auto& [path, e] : run.after.entries())
        if (in(e.content)) return true;
    for (const auto& snap : run.after.snapshots())
        for (const auto& [path, content] : snap.files)
            if (in(content)) return true;
    return in(run.outcome.artifacts.payload_image);
}

std::string source_dir() { return RLAB_SOURCE_DIR; }

}  // namespace rlab::testing
