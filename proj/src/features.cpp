#include "rlab/features.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "rlab/error.hpp"

namespace rlab {

namespace {

enum class Source { C2, Embedded, Local };

struct Acquisition {
    Source source;
    std::string key_kind;  // sym, asym or pub
};

[[noreturn]] void inconsistent(const std::string& what) {
    throw Error(ErrorKind::InconsistentTrace, what);
}

bool mentions_vssadmin(std::string cmd) {
    std::transform(cmd.begin(), cmd.end(), cmd.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return cmd.find("vssadmin") != std::string::npos;
}

}  // namespace

std::string_view to_string(SkKind k) {
    switch (k) {
    case SkKind::Symmetric: return "Symmetric";
    case SkKind::Asymmetric: return "Asymmetric";
    case SkKind::NotApplicable: return "NotApplicable";
    }
    return "NotApplicable";
}

SkKind sk_kind_from_string(std::string_view s) {
    if (s == "Symmetric") return SkKind::Symmetric;
    if (s == "Asymmetric") return SkKind::Asymmetric;
    if (s == "NotApplicable") return SkKind::NotApplicable;
    throw Error(ErrorKind::ValidationError, "unknown sk_kind '" + std::string(s) + "'");
}

std::string describe(const FeatureVector& fv) {
    std::ostringstream os;
    auto flag = [&os](const char* name, bool v) { os << name << '=' << (v ? "yes" : "no") << ' '; };
    flag("HKc2emb", fv.hk_c2);
    flag("HKPemb", fv.hk_pemb);
    flag("HKlocalgen", fv.hk_localgen);
    flag("SKc2emb", fv.sk_c2);
    flag("SKPemb", fv.sk_pemb);
    flag("SKlocalgen", fv.sk_localgen);
    os << "sk_kind=" << to_string(fv.sk_kind) << ' ';
    flag("delShdCpy", fv.del_shadow_copies);
    flag("ovrFile", fv.overwrite_delete);
    os << "residue=" << (fv.key_residue_on_victim ? "yes" : "no");
    return os.str();
}

void to_json(nlohmann::json& j, const FeatureVector& fv) {
    j = nlohmann::json{
        {"hk_c2", fv.hk_c2},
        {"hk_pemb", fv.hk_pemb},
        {"hk_localgen", fv.hk_localgen},
        {"sk_c2", fv.sk_c2},
        {"sk_pemb", fv.sk_pemb},
        {"sk_localgen", fv.sk_localgen},
        {"sk_kind", std::string(to_string(fv.sk_kind))},
        {"del_shadow_copies", fv.del_shadow_copies},
        {"overwrite_delete", fv.overwrite_delete},
        {"key_residue_on_victim", fv.key_residue_on_victim},
    };
}

void from_json(const nlohmann::json& j, FeatureVector& fv) {
    if (!j.is_object()) throw Error(ErrorKind::ValidationError, "feature vector must be a JSON object");
    auto flag = [&j](const char* key) {
        if (!j.contains(key)) return false;
        if (!j.at(key).is_boolean())
            throw Error(ErrorKind::ValidationError, std::string("feature '") + key + "' must be a boolean");
        return j.at(key).get<bool>();
    };
    fv.hk_c2 = flag("hk_c2");
    fv.hk_pemb = flag("hk_pemb");
    fv.hk_localgen = flag("hk_localgen");
    fv.sk_c2 = flag("sk_c2");
    fv.sk_pemb = flag("sk_pemb");
    fv.sk_localgen = flag("sk_localgen");
    fv.del_shadow_copies = flag("del_shadow_copies");
    fv.overwrite_delete = flag("overwrite_delete");
    fv.key_residue_on_victim = flag("key_residue_on_victim");
    fv.sk_kind = SkKind::NotApplicable;
    if (j.contains("sk_kind")) {
        if (!j.at("sk_kind").is_string()) throw Error(ErrorKind::ValidationError, "sk_kind must be a string");
        fv.sk_kind = sk_kind_from_string(j.at("sk_kind").get<std::string>());
    }
}

FeatureVector extract_features(const TraceLog& log) {
    FeatureVector fv;
    std::map<std::string, Acquisition> acquired;
    std::set<std::string> per_file_keys;
    std::set<std::string> wrapping_keys;
    std::set<std::string> wrapped_keys;
    std::set<std::string> encrypted_sources;
    bool keywrap_event = false;

    for (const auto& e : log.events) {
        switch (e.kind) {
        case EventKind::KEYGEN:
            acquired.emplace(e.attr("key_id"), Acquisition{Source::Local, e.attr("key_kind")});
            if (e.attr("residue") == "1") fv.key_residue_on_victim = true;
            break;
        case EventKind::EMBEDDED_KEY_READ:
            acquired.emplace(e.attr("key_id"), Acquisition{Source::Embedded, e.attr("key_kind")});
            break;
        case EventKind::NET_FETCH_KEY:
            acquired.emplace(e.attr("key_id"), Acquisition{Source::C2, e.attr("key_kind")});
            break;
        case EventKind::FILE_WRITE:
            if (e.attr("producer") == "PerFileEncryption") {
                per_file_keys.insert(e.attr("key_id"));
                encrypted_sources.insert(e.has("src") ? e.attr("src") : e.attr("path"));
            } else if (e.attr("producer") == "KeyWrap") {
                keywrap_event = true;
                wrapping_keys.insert(e.attr("key_id"));
                if (e.has("wrapped")) wrapped_keys.insert(e.attr("wrapped"));
            }
            if (e.has("wrap_key")) {
                keywrap_event = true;
                wrapping_keys.insert(e.attr("wrap_key"));
                if (e.has("key_id")) wrapped_keys.insert(e.attr("key_id"));
            }
            break;
        case EventKind::NET_EXFIL:
            if (e.attr("producer") == "KeyWrap") {
                keywrap_event = true;
                wrapping_keys.insert(e.attr("key_id"));
                if (e.has("wrapped")) wrapped_keys.insert(e.attr("wrapped"));
            }
            break;
        case EventKind::FILE_DELETE:
            if (e.attr("mode") == "OverwriteRandom" && encrypted_sources.count(e.attr("path")) != 0)
                fv.overwrite_delete = true;
            break;
        case EventKind::SHADOW_DELETE:
            fv.del_shadow_copies = true;
            break;
        case EventKind::PROC_EXEC:
            if (mentions_vssadmin(e.attr("cmd"))) fv.del_shadow_copies = true;
            break;
        case EventKind::FILE_READ:
        case EventKind::NOTE_WRITE:
            break;
        }
    }

    if (keywrap_event && acquired.empty()) inconsistent("key wrap observed but no key was ever acquired");

    const bool hybrid = (per_file_keys.size() >= 2 || keywrap_event) && !wrapping_keys.empty();
    std::string governing;
    if (hybrid) {
        std::vector<std::string> roots;
        std::set_difference(wrapping_keys.begin(), wrapping_keys.end(), wrapped_keys.begin(), wrapped_keys.end(),
                            std::back_inserter(roots));
        if (roots.size() != 1)
            inconsistent("expected one controlling wrapping key, found " + std::to_string(roots.size()));
        governing = roots.front();
    } else if (per_file_keys.size() == 1) {
        governing = *per_file_keys.begin();
    } else if (per_file_keys.size() > 1) {
        inconsistent("several per-file keys but no key wrapping");
    } else {
        return fv;
    }

    auto it = acquired.find(governing);
    if (it == acquired.end()) inconsistent("governing key '" + governing + "' was never acquired");
    const auto& acq = it->second;
    if (hybrid) {
        if (acq.key_kind == "sym") inconsistent("hybrid wrapping key '" + governing + "' is not a public key");
        fv.hk_c2 = acq.source == Source::C2;
        fv.hk_pemb = acq.source == Source::Embedded;
        fv.hk_localgen = acq.source == Source::Local;
    } else {
        fv.sk_c2 = acq.source == Source::C2;
        fv.sk_pemb = acq.source == Source::Embedded;
        fv.sk_localgen = acq.source == Source::Local;
        fv.sk_kind = acq.key_kind == "sym" ? SkKind::Symmetric : SkKind::Asymmetric;
    }
    return fv;
}

}  // namespace rlab
