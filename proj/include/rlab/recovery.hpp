#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rlab/attack.hpp"
#include "rlab/classifier.hpp"
#include "rlab/crypto.hpp"
#include "rlab/vfs.hpp"

namespace rlab {

/// Declared in the order attempt_recovery applies them.
enum class RecoveryStrategy {
    ShadowRestore,
    Undelete,
    PayloadKeyExtraction,
    ResidueKeyRecovery,
    AttackerKeyDecryption,
};

using StrategySet = std::set<RecoveryStrategy>;

std::string_view to_string(RecoveryStrategy s);
RecoveryStrategy recovery_strategy_from_string(std::string_view s);
/// Comma-separated names; "all" and "none" are accepted. Throws ValidationError.
StrategySet parse_strategy_list(std::string_view list);
std::string format_strategy_list(const StrategySet& set);
StrategySet all_strategies();
StrategySet non_ransom_strategies();

enum class FileOutcome { RecoveredExact, RecoveredStale, Unrecovered };

std::string_view to_string(FileOutcome o);

struct FileRecovery {
    FileOutcome outcome = FileOutcome::Unrecovered;
    /// Strategy that produced the outcome; empty for files never touched.
    std::optional<RecoveryStrategy> by;
    std::uint64_t size = 0;
};

/// What the victim is left with after an attack, plus the pre-attack
/// contents of every target file.
struct RecoveryImage {
    VirtualFS fs;
    AttackArtifacts artifacts;
    std::map<std::string, Bytes> oracle;
};

/// Pre-attack contents of `paths` in `fs`.
std::map<std::string, Bytes> capture_oracle(const VirtualFS& fs, const std::vector<std::string>& paths);

struct RecoveryReport {
    std::map<std::string, FileRecovery> files;
    std::uint64_t recovered_bytes = 0;
    std::uint64_t total_bytes = 0;
    std::size_t recovered_files = 0;
    StrategySet strategies_attempted;
    StrategySet strategies_succeeded;
    /// The non-ransom strategies in the request left some file unrecovered.
    bool ransom_required = false;

    /// recovered / total over target bytes, falling back to file counts
    /// when every target is empty. 1 when there are no targets.
    double fraction() const noexcept;
    bool complete() const noexcept;
};

/// Applies the requested strategies in declaration order. Never modifies
/// `image`. AttackerKeyDecryption is skipped when `attacker_keys` is null.
/// A recovered file counts as exact only when it equals the oracle bit for
/// bit; a snapshot copy that differs is RecoveredStale.
RecoveryReport attempt_recovery(const RecoveryImage& image, const StrategySet& strategies,
                                const Keyring* attacker_keys = nullptr);

/// Every serialized key found in the payload image.
std::vector<KeyMaterial> scan_payload_keys(ByteView payload);

struct RecoverabilityPrediction {
    StrategySet strategies;
    bool ransom_required = false;
};

/// Strategies a category should need for full recovery without the
/// attacker's help. `residue` is the vector's key_residue_on_victim.
RecoverabilityPrediction predict_recoverability(const Category& category, bool residue);

nlohmann::json to_json(const RecoveryReport& r);

}  // namespace rlab
