#include "rlab/recovery.hpp"

#include <array>

#include "rlab/error.hpp"

namespace rlab {

namespace {

constexpr std::array<RecoveryStrategy, 5> kOrder = {
    RecoveryStrategy::ShadowRestore,        RecoveryStrategy::Undelete,
    RecoveryStrategy::PayloadKeyExtraction, RecoveryStrategy::ResidueKeyRecovery,
    RecoveryStrategy::AttackerKeyDecryption,
};

struct VictimMaterial {
    std::vector<LockedContainer> containers;
    std::vector<CipherBlob> stored_wraps;
};

VictimMaterial collect(const VirtualFS& fs) {
    VictimMaterial out;
    for (const auto& [path, e] : fs.entries()) {
        if (e.state != FileState::Live) continue;
        try {
            if (looks_like_container(e.content)) {
                out.containers.push_back(decode_container(e.content));
                if (out.containers.back().wrap) out.stored_wraps.push_back(*out.containers.back().wrap);
            } else if (looks_like_wrapped_key_file(e.content)) {
                out.stored_wraps.push_back(decode_wrapped_key_file(e.content));
            }
        } catch (const Error&) {
            // A damaged container is simply not recoverable.
        }
    }
    return out;
}

class Attempt {
public:
    Attempt(const RecoveryImage& image, RecoveryReport& report) : image_(image), report_(report) {
        for (const auto& [path, bytes] : image.oracle) {
            auto& f = report_.files[path];
            f.size = bytes.size();
            if (image.fs.contains(path)) {
                const auto& e = image.fs.entry(path);
                if (e.state == FileState::Live && e.content == bytes) f.outcome = FileOutcome::RecoveredExact;
            }
        }
    }

    bool pending(const std::string& path) const {
        auto it = report_.files.find(path);
        return it != report_.files.end() && it->second.outcome != FileOutcome::RecoveredExact;
    }

    /// Offers candidate bytes for a target. Returns true on an exact hit.
    bool offer(const std::string& path, const Bytes& bytes, RecoveryStrategy by, bool may_be_stale) {
        if (!pending(path)) return false;
        auto& f = report_.files[path];
        if (bytes == image_.oracle.at(path)) {
            f.outcome = FileOutcome::RecoveredExact;
            f.by = by;
            report_.strategies_succeeded.insert(by);
            return true;
        }
        if (may_be_stale && f.outcome == FileOutcome::Unrecovered) {
            f.outcome = FileOutcome::RecoveredStale;
            f.by = by;
        }
        return false;
    }

    void shadow_restore() {
        const auto& snaps = image_.fs.snapshots();
        if (snaps.empty()) return;
        const auto& latest = snaps.back();
        for (const auto& [path, bytes] : latest.files) offer(path, bytes, RecoveryStrategy::ShadowRestore, true);
    }

    void undelete() {
        for (const auto& [path, oracle] : image_.oracle) {
            if (!pending(path) || !image_.fs.contains(path)) continue;
            const auto& e = image_.fs.entry(path);
            if (e.state == FileState::MetadataDeleted) offer(path, e.content, RecoveryStrategy::Undelete, false);
        }
    }

    void decrypt_with(Keyring ring, const std::vector<CipherBlob>& extra_wraps, RecoveryStrategy by) {
        std::vector<const CipherBlob*> wraps;
        for (const auto& w : victim_.stored_wraps) wraps.push_back(&w);
        for (const auto& w : extra_wraps) wraps.push_back(&w);
        // Unwrap until no new key appears; chains are at most a few links deep.
        for (bool grew = true; grew;) {
            grew = false;
            for (const auto* w : wraps) {
                if (ring.priv(w->key_id) == nullptr) continue;
                std::optional<KeyMaterial> k;
                try {
                    k = ring.try_unwrap(*w);
                } catch (const Error&) {
                    continue;
                }
                if (!k) continue;
                auto before = ring.size();
                ring.add(*k);
                if (ring.size() != before) grew = true;
            }
        }
        for (const auto& c : victim_.containers) {
            if (!pending(c.src)) continue;
            try {
                if (auto plain = ring.try_decrypt(c.data)) offer(c.src, *plain, by, false);
            } catch (const Error&) {
            }
        }
    }

private:
    const RecoveryImage& image_;
    RecoveryReport& report_;
    VictimMaterial victim_ = collect(image_.fs);
};

void tally(RecoveryReport& r) {
    r.recovered_bytes = r.total_bytes = 0;
    r.recovered_files = 0;
    for (const auto& [path, f] : r.files) {
        r.total_bytes += f.size;
        if (f.outcome == FileOutcome::RecoveredExact) {
            r.recovered_bytes += f.size;
            ++r.recovered_files;
        }
    }
}

}  // namespace

std::string_view to_string(RecoveryStrategy s) {
    switch (s) {
    case RecoveryStrategy::ShadowRestore: return "ShadowRestore";
    case RecoveryStrategy::Undelete: return "Undelete";
    case RecoveryStrategy::PayloadKeyExtraction: return "PayloadKeyExtraction";
    case RecoveryStrategy::ResidueKeyRecovery: return "ResidueKeyRecovery";
    case RecoveryStrategy::AttackerKeyDecryption: return "AttackerKeyDecryption";
    }
    return "Undelete";
}

RecoveryStrategy recovery_strategy_from_string(std::string_view s) {
    for (auto k : kOrder)
        if (to_string(k) == s) return k;
    throw Error(ErrorKind::ValidationError, "unknown recovery strategy '" + std::string(s) + "'");
}

StrategySet parse_strategy_list(std::string_view list) {
    if (list == "all") return all_strategies();
    StrategySet out;
    if (list == "none" || list.empty()) return out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        auto next = list.find(',', pos);
        auto item = list.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        out.insert(recovery_strategy_from_string(item));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

std::string format_strategy_list(const StrategySet& set) {
    std::string out;
    for (auto s : set) {
        if (!out.empty()) out += ',';
        out += to_string(s);
    }
    return out;
}

StrategySet all_strategies() { return StrategySet(kOrder.begin(), kOrder.end()); }

StrategySet non_ransom_strategies() {
    auto s = all_strategies();
    s.erase(RecoveryStrategy::AttackerKeyDecryption);
    return s;
}

std::string_view to_string(FileOutcome o) {
    switch (o) {
    case FileOutcome::RecoveredExact: return "RecoveredExact";
    case FileOutcome::RecoveredStale: return "RecoveredStale";
    case FileOutcome::Unrecovered: return "Unrecovered";
    }
    return "Unrecovered";
}

std::map<std::string, Bytes> capture_oracle(const VirtualFS& fs, const std::vector<std::string>& paths) {
    std::map<std::string, Bytes> out;
    for (const auto& p : paths) out.emplace(p, fs.peek(p));
    return out;
}

double RecoveryReport::fraction() const noexcept {
    if (files.empty()) return 1.0;
    if (total_bytes == 0) return static_cast<double>(recovered_files) / static_cast<double>(files.size());
    return static_cast<double>(recovered_bytes) / static_cast<double>(total_bytes);
}

bool RecoveryReport::complete() const noexcept { return recovered_files == files.size(); }

std::vector<KeyMaterial> scan_payload_keys(ByteView payload) {
    std::vector<KeyMaterial> out;
    const ByteView magic(kKeyMagic, 4);
    for (std::size_t at = find_bytes(payload, magic); at < payload.size(); at = find_bytes(payload, magic, at + 1)) {
        try {
            std::size_t used = 0;
            out.push_back(deserialize_key_prefix(payload.subspan(at), used));
        } catch (const Error&) {
        }
    }
    return out;
}

RecoveryReport attempt_recovery(const RecoveryImage& image, const StrategySet& strategies,
                                const Keyring* attacker_keys) {
    RecoveryReport report;
    Attempt attempt(image, report);
    bool ransom_checked = false;
    for (auto s : kOrder) {
        if (s == RecoveryStrategy::AttackerKeyDecryption) {
            tally(report);
            report.ransom_required = !report.complete();
            ransom_checked = true;
        }
        if (strategies.count(s) == 0) continue;
        switch (s) {
        case RecoveryStrategy::ShadowRestore:
            attempt.shadow_restore();
            break;
        case RecoveryStrategy::Undelete:
            attempt.undelete();
            break;
        case RecoveryStrategy::PayloadKeyExtraction: {
            Keyring ring;
            for (const auto& k : scan_payload_keys(image.artifacts.payload_image)) ring.add(k);
            attempt.decrypt_with(std::move(ring), {}, s);
            break;
        }
        case RecoveryStrategy::ResidueKeyRecovery: {
            Keyring ring;
            for (const auto& k : image.artifacts.victim_residue) ring.add(k);
            attempt.decrypt_with(std::move(ring), {}, s);
            break;
        }
        case RecoveryStrategy::AttackerKeyDecryption:
            if (attacker_keys == nullptr) continue;
            attempt.decrypt_with(*attacker_keys, image.artifacts.exfiltrated_blobs, s);
            break;
        }
        report.strategies_attempted.insert(s);
    }
    if (!ransom_checked) report.ransom_required = !report.complete();
    tally(report);
    return report;
}

RecoverabilityPrediction predict_recoverability(const Category& category, bool residue) {
    using RS = RecoveryStrategy;
    switch (category.value) {
    case CategoryValue::CAT1:
        if (category.sublabel == Sublabel::OverwriteOnly || category.sublabel == Sublabel::FullDeleteNoEncryption)
            return {{RS::Undelete}, false};
        return {{}, false};
    case CategoryValue::CAT2:
        return {{RS::ShadowRestore, RS::Undelete}, false};
    case CategoryValue::CAT3:
        if (residue) return {{RS::PayloadKeyExtraction, RS::ResidueKeyRecovery}, false};
        return {{RS::PayloadKeyExtraction}, false};
    case CategoryValue::CAT4:
        return {{}, true};
    case CategoryValue::CAT5:
        if (residue) return {{RS::ResidueKeyRecovery}, false};
        return {{}, true};
    }
    return {{}, true};
}

nlohmann::json to_json(const RecoveryReport& r) {
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [path, f] : r.files) {
        nlohmann::json row{{"outcome", std::string(to_string(f.outcome))}, {"size", f.size}};
        row["by"] = f.by ? nlohmann::json(std::string(to_string(*f.by))) : nlohmann::json(nullptr);
        files[path] = row;
    }
    auto names = [](const StrategySet& s) {
        nlohmann::json a = nlohmann::json::array();
        for (auto x : s) a.push_back(std::string(to_string(x)));
        return a;
    };
    return nlohmann::json{
        {"fraction_recovered", r.fraction()},
        {"recovered_bytes", r.recovered_bytes},
        {"total_bytes", r.total_bytes},
        {"recovered_files", r.recovered_files},
        {"total_files", r.files.size()},
        {"strategies_attempted", names(r.strategies_attempted)},
        {"strategies_succeeded", names(r.strategies_succeeded)},
        {"ransom_required", r.ransom_required},
        {"files", files},
    };
}

}  // namespace rlab
