#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rlab/c2.hpp"
#include "rlab/classifier.hpp"
#include "rlab/crypto.hpp"
#include "rlab/features.hpp"
#include "rlab/trace.hpp"
#include "rlab/vfs.hpp"

namespace rlab {

enum class KeySource { C2Download, PayloadEmbedded, LocalGeneration };

struct KeyProvenance {
    KeySource source = KeySource::LocalGeneration;
    bool residue_left_on_victim = false;

    bool operator==(const KeyProvenance&) const = default;
};

enum class StructureVariant { NoEncryption, SingleKey, HybridPerFile, HybridThreeTier };
enum class SingleKeyKind { Symmetric, Asymmetric };

/// `kind` is meaningful for SingleKey only. For the hybrid variants
/// `provenance` describes the master public key.
struct EncryptionStructure {
    StructureVariant variant = StructureVariant::NoEncryption;
    SingleKeyKind kind = SingleKeyKind::Symmetric;
    KeyProvenance provenance;

    bool operator==(const EncryptionStructure&) const = default;
};

enum class RemnantDeletion { None, MetadataOnly, OverwriteRandom };

struct AttackScenario {
    std::string scenario_id = "scenario";
    EncryptionStructure encryption;
    bool delete_shadow_copies = false;
    RemnantDeletion remnant_deletion = RemnantDeletion::None;
    std::string target_glob = "/**";
    std::uint64_t rng_seed = 0;

    bool operator==(const AttackScenario&) const = default;
};

std::string_view to_string(KeySource s);
KeySource key_source_from_string(std::string_view s);
std::string_view to_string(StructureVariant v);
StructureVariant structure_variant_from_string(std::string_view s);
std::string_view to_string(SingleKeyKind k);
SingleKeyKind single_key_kind_from_string(std::string_view s);
std::string_view to_string(RemnantDeletion r);
RemnantDeletion remnant_deletion_from_string(std::string_view s);

void to_json(nlohmann::json& j, const AttackScenario& s);
void from_json(const nlohmann::json& j, AttackScenario& s);

/// Throws ConfigError. Rejected combinations:
///  - bad glob syntax or empty scenario id
///  - NoEncryption with remnant deletion (there is nothing to delete)
///  - residue on a structure that leaves no victim-side secret to capture
///    (anything but SingleKey Symmetric LocalGeneration and the hybrids)
void validate_scenario(const AttackScenario& s);
bool requires_c2(const AttackScenario& s);

/// A scenario file: the attack plus the victim it runs against.
struct ScenarioFile {
    AttackScenario scenario;
    std::vector<std::pair<std::string, Bytes>> files;
    /// Shadow snapshots taken before the attack.
    std::size_t snapshots = 1;
    std::optional<Category> expected_category;
};

/// {"schema": "v1", "scenario": {...}, "victim": {"files": [...], "snapshots": n},
///  "expected_category": "CAT5"}. Without a file list a seeded default
/// victim is generated. Throws ConfigError.
ScenarioFile parse_scenario_file(std::string_view json_text);
std::string scenario_file_to_json(const ScenarioFile& f);

/// Ten small documents under /Users/victim, derived from `seed`.
std::vector<std::pair<std::string, Bytes>> default_victim_files(std::uint64_t seed, std::size_t count = 10);
VirtualFS build_victim(const ScenarioFile& f);

/// Declared location of a key planted in the payload image.
struct EmbeddedKeyRecord {
    std::size_t offset = 0;
    std::size_t length = 0;
    std::string key_id;
    std::string kind;  // sym or pub

    bool operator==(const EmbeddedKeyRecord&) const = default;
};

struct AttackArtifacts {
    Bytes payload_image;
    std::vector<EmbeddedKeyRecord> payload_index;
    std::string ransom_note;
    std::string note_path;
    std::vector<CipherBlob> exfiltrated_blobs;
    std::vector<KeyMaterial> victim_residue;
    std::map<std::string, CipherBlob> ciphertext_map;  // original path -> C_i

    bool operator==(const AttackArtifacts&) const = default;
};

struct AttackOutcome {
    TraceLog trace;
    AttackArtifacts artifacts;
    /// Secrets generated on the victim that the attacker keeps. Keys issued
    /// by the C2 live in its C2State instead.
    Keyring local_attacker_keys;
    std::vector<std::string> targets;
    std::size_t encrypted_count = 0;
};

inline constexpr const char* kRansomNotePath = "/README_RESTORE_FILES.txt";
inline constexpr const char* kLockedSuffix = ".locked";
inline constexpr const char* kShadowDeleteCmd = "vssadmin.exe Delete Shadows /All /Quiet";

/// Runs the scenario against `fs`. Throws ConfigError for an invalid
/// scenario and AttackAborted when a required C2 is missing or fails;
/// in both cases `fs` is left untouched.
AttackOutcome execute_attack(const AttackScenario& scenario, VirtualFS& fs, C2Endpoint* c2 = nullptr);

/// Live paths the scenario would target, in order.
std::vector<std::string> select_targets(const AttackScenario& scenario, const VirtualFS& fs);

/// The feature vector a trace of this scenario must yield.
FeatureVector implied_features(const AttackScenario& scenario, std::size_t encrypted_count);

/// Locked container written for every encrypted file:
///   "RLK1" | str16 src | u8 has_wrap | [u32 len | blob(C_j)] | u32 len | blob(C_i)
struct LockedContainer {
    std::string src;
    std::optional<CipherBlob> wrap;
    CipherBlob data;
};

Bytes encode_container(const LockedContainer& c);
/// Throws ImageError.
LockedContainer decode_container(ByteView bytes);
bool looks_like_container(ByteView bytes);

/// Stored key-wrap file: "REK1" | u32 len | blob(C_j)
Bytes encode_wrapped_key_file(const CipherBlob& blob);
CipherBlob decode_wrapped_key_file(ByteView bytes);
bool looks_like_wrapped_key_file(ByteView bytes);

}  // namespace rlab
