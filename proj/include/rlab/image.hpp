#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlab/attack.hpp"
#include "rlab/crypto.hpp"
#include "rlab/recovery.hpp"
#include "rlab/trace.hpp"
#include "rlab/vfs.hpp"

namespace rlab {

/// Directory dump of a VirtualFS:
///   index.json                 entries (state, metadata), snapshots, clock
///   tree/<path>                content of every entry, deleted ones included
///   snapshots/<id>/<path>      content captured by each shadow snapshot
void save_fs_image(const std::filesystem::path& dir, const VirtualFS& fs);
/// Throws ImageError on a missing, inconsistent or malformed dump.
VirtualFS load_fs_image(const std::filesystem::path& dir);

/// Keys as a JSON array of hex-encoded serialized keys.
nlohmann::json keys_to_json(const std::vector<KeyMaterial>& keys);
std::vector<KeyMaterial> keys_from_json(const nlohmann::json& j);

/// Everything `simulate --out` writes:
///   scenario.json, trace.trace, oracle.json, attacker_keys.json, image/,
///   artifacts/{payload.bin, payload.idx.json, ransom_note.txt, artifacts.json}
struct SimulationBundle {
    AttackScenario scenario;
    VirtualFS fs;
    AttackArtifacts artifacts;
    TraceLog trace;
    std::map<std::string, Bytes> oracle;
    std::vector<KeyMaterial> attacker_keys;
};

void save_bundle(const std::filesystem::path& dir, const SimulationBundle& b);
/// Reads the parts needed by recovery. Throws ImageError.
RecoveryImage load_recovery_image(const std::filesystem::path& dir);
Keyring load_attacker_keys(const std::filesystem::path& file);

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, std::string_view text);
Bytes read_binary_file(const std::filesystem::path& file);
void write_binary_file(const std::filesystem::path& file, ByteView bytes);

}  // namespace rlab
