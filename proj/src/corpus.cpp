#include "rlab/corpus.hpp"

#include "rlab/error.hpp"

namespace rlab {

namespace detail {
// Generated from data/corpus.json at configure time.
extern const char* const kBundledCorpusJson;
}  // namespace detail

std::string_view to_string(Platform p) {
    switch (p) {
    case Platform::Windows: return "Windows";
    case Platform::Linux: return "Linux";
    case Platform::MacOS: return "MacOS";
    }
    return "Windows";
}

Platform platform_from_string(std::string_view s) {
    if (s == "Windows") return Platform::Windows;
    if (s == "Linux") return Platform::Linux;
    if (s == "MacOS" || s == "Mac OS") return Platform::MacOS;
    throw Error(ErrorKind::ValidationError, "unknown platform '" + std::string(s) + "'");
}

void to_json(nlohmann::json& j, const SampleProfile& p) {
    j = nlohmann::json{
        {"name", p.name},
        {"year", p.year},
        {"platform", std::string(to_string(p.platform))},
        {"features", p.features},
        {"expected_category", std::string(to_string(p.expected_category.value))},
    };
    j["paid_ransom"] = p.paid_ransom ? nlohmann::json(*p.paid_ransom) : nlohmann::json(nullptr);
    if (p.expected_category.sublabel != Sublabel::None)
        j["expected_sublabel"] = std::string(to_string(p.expected_category.sublabel));
    if (!p.justification.empty()) j["justification"] = p.justification;
}

void from_json(const nlohmann::json& j, SampleProfile& p) {
    try {
        p.name = j.at("name").get<std::string>();
        p.year = j.at("year").get<int>();
        p.platform = platform_from_string(j.at("platform").get<std::string>());
        p.paid_ransom.reset();
        if (j.contains("paid_ransom") && !j.at("paid_ransom").is_null())
            p.paid_ransom = j.at("paid_ransom").get<std::string>();
        p.features = j.at("features").get<FeatureVector>();
        p.expected_category.value = category_value_from_string(j.at("expected_category").get<std::string>());
        p.expected_category.sublabel = j.contains("expected_sublabel")
                                           ? sublabel_from_string(j.at("expected_sublabel").get<std::string>())
                                           : Sublabel::None;
        p.justification = j.value("justification", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ValidationError, std::string("malformed sample profile: ") + e.what());
    }
}

std::vector<SampleProfile> parse_corpus(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ValidationError, std::string("corpus is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("schema", "") != "v1" || !doc.contains("profiles") ||
        !doc.at("profiles").is_array())
        throw Error(ErrorKind::ValidationError, "corpus must be {\"schema\": \"v1\", \"profiles\": [...]}");
    std::vector<SampleProfile> out;
    for (const auto& item : doc.at("profiles")) out.push_back(item.get<SampleProfile>());
    return out;
}

std::string_view bundled_corpus_json() { return detail::kBundledCorpusJson; }

const std::vector<SampleProfile>& bundled_corpus() {
    static const std::vector<SampleProfile> corpus = parse_corpus(bundled_corpus_json());
    return corpus;
}

CorpusReport classify_corpus(const std::vector<SampleProfile>& corpus, ClassifierMode mode) {
    CorpusReport report;
    report.mode = mode;
    for (const auto& p : corpus) {
        CorpusRow row;
        row.profile = &p;
        row.predicted = classify(p.features, mode);
        row.matched = row.predicted.category == p.expected_category;
        if (row.matched) ++report.matched;
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::size_t CorpusStats::year_total(int year) const {
    auto it = per_year.find(year);
    if (it == per_year.end()) return 0;
    std::size_t n = 0;
    for (const auto& [cat, count] : it->second) n += count;
    return n;
}

CorpusStats corpus_stats(const std::vector<SampleProfile>& corpus) {
    CorpusStats stats;
    stats.total = corpus.size();
    for (auto v : {CategoryValue::CAT1, CategoryValue::CAT2, CategoryValue::CAT3, CategoryValue::CAT4,
                   CategoryValue::CAT5})
        stats.category_share[v] = Share{0, corpus.size()};
    for (auto p : {Platform::Windows, Platform::Linux, Platform::MacOS})
        stats.platform_share[p] = Share{0, corpus.size()};
    for (const auto& p : corpus) {
        ++stats.category_share[p.expected_category.value].count;
        ++stats.platform_share[p.platform].count;
        ++stats.per_year[p.year][p.expected_category.value];
    }
    return stats;
}

}  // namespace rlab
