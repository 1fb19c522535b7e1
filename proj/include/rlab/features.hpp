#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "rlab/trace.hpp"

namespace rlab {

enum class SkKind { Symmetric, Asymmetric, NotApplicable };

std::string_view to_string(SkKind k);
SkKind sk_kind_from_string(std::string_view s);

/// The eight attack-structure flags consumed by the classifier, plus the
/// key-kind qualifier of a single-key structure and the residue flag.
///
///   hk_*  hybrid structure whose controlling public key came from the C2,
///         was embedded in the payload, or was generated locally
///   sk_*  single-key structure, same three provenances
struct FeatureVector {
    bool hk_c2 = false;
    bool hk_pemb = false;
    bool hk_localgen = false;
    bool sk_c2 = false;
    bool sk_pemb = false;
    bool sk_localgen = false;
    SkKind sk_kind = SkKind::NotApplicable;
    bool del_shadow_copies = false;
    bool overwrite_delete = false;
    bool key_residue_on_victim = false;

    bool any_hybrid() const noexcept { return hk_c2 || hk_pemb || hk_localgen; }
    bool any_single() const noexcept { return sk_c2 || sk_pemb || sk_localgen; }

    bool operator==(const FeatureVector&) const = default;
};

std::string describe(const FeatureVector& fv);

void to_json(nlohmann::json& j, const FeatureVector& fv);
/// Missing boolean fields default to false; a bad sk_kind throws ValidationError.
void from_json(const nlohmann::json& j, FeatureVector& fv);

/// Rules:
///  - per-file keys are the key_ids of FILE_WRITE events with
///    producer=PerFileEncryption; a wrap is any KeyWrap write/exfil or a
///    write carrying wrap_key
///  - hybrid iff (two or more per-file keys or a KeyWrap) and a wrap occurs;
///    the governing key is the wrapping key that is never itself wrapped
///  - single-key iff exactly one per-file key and no wrap; it governs
///  - the governing key's acquisition event fixes provenance
///    (NET_FETCH_KEY, EMBEDDED_KEY_READ, KEYGEN) and sk_kind
///  - del_shadow_copies iff SHADOW_DELETE or a PROC_EXEC mentioning vssadmin
///  - overwrite_delete iff an OverwriteRandom FILE_DELETE hits a path that
///    had already been encrypted
///  - key_residue_on_victim iff some KEYGEN has residue=1
/// Throws InconsistentTrace on contradictory evidence.
FeatureVector extract_features(const TraceLog& log);

}  // namespace rlab
