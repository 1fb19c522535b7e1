#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rlab/classifier.hpp"

namespace rlab {

enum class Platform { Windows, Linux, MacOS };

std::string_view to_string(Platform p);
Platform platform_from_string(std::string_view s);

struct SampleProfile {
    std::string name;
    int year = 0;
    Platform platform = Platform::Windows;
    std::optional<std::string> paid_ransom;  // metadata only
    FeatureVector features;
    Category expected_category;
    std::string justification;
};

void to_json(nlohmann::json& j, const SampleProfile& p);
void from_json(const nlohmann::json& j, SampleProfile& p);

/// {"schema": "v1", "profiles": [...]}. Throws ValidationError.
std::vector<SampleProfile> parse_corpus(std::string_view json_text);
/// The twenty reference incidents compiled into the library.
const std::vector<SampleProfile>& bundled_corpus();
std::string_view bundled_corpus_json();

struct CorpusRow {
    const SampleProfile* profile = nullptr;
    Classification predicted;
    bool matched = false;
};

struct CorpusReport {
    ClassifierMode mode = ClassifierMode::KeyLocality;
    std::vector<CorpusRow> rows;
    std::size_t matched = 0;

    bool all_matched() const noexcept { return matched == rows.size(); }
};

/// Rows point into `corpus`, which must outlive the report.
CorpusReport classify_corpus(const std::vector<SampleProfile>& corpus,
                             ClassifierMode mode = ClassifierMode::KeyLocality);

/// An exact count out of a total.
struct Share {
    std::size_t count = 0;
    std::size_t total = 0;

    double value() const noexcept { return total == 0 ? 0.0 : static_cast<double>(count) / total; }
    /// True iff count/total == percent/100 exactly.
    bool equals_percent(std::size_t percent) const noexcept { return count * 100 == percent * total; }
};

/// Shares use the labelled categories, not predictions.
struct CorpusStats {
    std::size_t total = 0;
    std::map<CategoryValue, Share> category_share;
    std::map<Platform, Share> platform_share;
    std::map<int, std::map<CategoryValue, std::size_t>> per_year;

    std::size_t year_total(int year) const;
};

CorpusStats corpus_stats(const std::vector<SampleProfile>& corpus);

}  // namespace rlab
