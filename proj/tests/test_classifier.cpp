#include <doctest.h>

#include "rlab/classifier.hpp"
#include "rlab/corpus.hpp"
#include "rlab/error.hpp"

using namespace rlab;

namespace {

constexpr ClassifierMode kModes[] = {ClassifierMode::Literal, ClassifierMode::KeyLocality};

FeatureVector full_delete(FeatureVector fv) {
    fv.del_shadow_copies = true;
    fv.overwrite_delete = true;
    return fv;
}

FeatureVector single(bool c2, bool pemb, bool local, SkKind kind) {
    FeatureVector fv;
    fv.sk_c2 = c2;
    fv.sk_pemb = pemb;
    fv.sk_localgen = local;
    fv.sk_kind = kind;
    return fv;
}

int rank(const Category& c) { return c.index(); }

}  // namespace

TEST_SUITE("classifier") {

TEST_CASE("all-false vector is scareware") {
    for (auto m : kModes) CHECK(label(classify({}, m).category) == "CAT1/Scareware");
}

TEST_CASE("four CAT1 sublabels") {
    FeatureVector fv;
    fv.del_shadow_copies = true;
    CHECK(classify(fv).category.sublabel == Sublabel::ShadowDeleteOnly);
    fv.overwrite_delete = true;
    CHECK(classify(fv).category.sublabel == Sublabel::FullDeleteNoEncryption);
    fv.del_shadow_copies = false;
    CHECK(classify(fv).category.sublabel == Sublabel::OverwriteOnly);
}

TEST_CASE("hybrid without deletion is CAT2") {
    FeatureVector fv;
    fv.hk_pemb = true;
    for (auto m : kModes) CHECK(classify(fv, m).category == Category{CategoryValue::CAT2});
}

TEST_CASE("embedded symmetric single key with deletion is CAT3 in both modes") {
    auto fv = full_delete(single(false, true, false, SkKind::Symmetric));
    for (auto m : kModes) CHECK(classify(fv, m).category.value == CategoryValue::CAT3);
}

TEST_CASE("embedded asymmetric single key is CAT4") {
    auto fv = full_delete(single(false, true, false, SkKind::Asymmetric));
    for (auto m : kModes) CHECK(classify(fv, m).category.value == CategoryValue::CAT4);
}

TEST_CASE("C2 symmetric key splits the modes") {
    auto fv = full_delete(single(true, false, false, SkKind::Symmetric));
    CHECK(classify(fv, ClassifierMode::KeyLocality).category.value == CategoryValue::CAT4);
    CHECK(classify(fv, ClassifierMode::Literal).category.value == CategoryValue::CAT3);
}

TEST_CASE("local symmetric key is CAT3 only with residue under key locality") {
    auto fv = full_delete(single(false, false, true, SkKind::Symmetric));
    CHECK(classify(fv).category.value == CategoryValue::CAT4);
    fv.key_residue_on_victim = true;
    CHECK(classify(fv).category.value == CategoryValue::CAT3);
}

TEST_CASE("embedded master plus local sub keys is CAT5") {
    FeatureVector fv;
    fv.hk_pemb = fv.hk_localgen = true;
    fv = full_delete(fv);
    for (auto m : kModes) CHECK(classify(fv, m).category.value == CategoryValue::CAT5);
}

TEST_CASE("partial deletion routes like full deletion") {
    auto fv = single(false, true, false, SkKind::Symmetric);
    fv.overwrite_delete = true;
    CHECK(classify(fv).category.value == CategoryValue::CAT3);
    FeatureVector h;
    h.hk_c2 = true;
    h.del_shadow_copies = true;
    CHECK(classify(h).category.value == CategoryValue::CAT5);
}

TEST_CASE("sk_kind consistency") {
    FeatureVector fv;
    fv.sk_kind = SkKind::Symmetric;
    CHECK_THROWS_AS(validate_features(fv), Error);
    CHECK_THROWS_AS(classify(fv), Error);
    fv = single(true, false, false, SkKind::NotApplicable);
    CHECK_THROWS_AS(classify(fv), Error);
    FeatureVector pure;
    pure.hk_c2 = pure.hk_localgen = true;
    auto v = validate_features(pure);
    CHECK_FALSE(v.mixed_structure);
    CHECK(v.warnings.empty());
}

TEST_CASE("mixed vectors warn and take the single-key branch") {
    int mixed = 0;
    for (const auto& fv : enumerate_feature_space()) {
        if (!(fv.any_hybrid() && fv.any_single())) continue;
        ++mixed;
        for (auto m : kModes) {
            auto c = classify(fv, m);
            REQUIRE(c.warnings.size() == 1);
            CHECK(c.warnings[0].rfind("MixedStructure", 0) == 0);
            auto single_only = fv;
            single_only.hk_c2 = single_only.hk_pemb = single_only.hk_localgen = false;
            CHECK(c.category == classify(single_only, m).category);
        }
    }
    CHECK(mixed == 7 * 7 * 2 * 8);
}

TEST_CASE("feature space size") {
    auto space = enumerate_feature_space();
    CHECK(space.size() == 960);
    for (const auto& fv : space) CHECK_NOTHROW(validate_features(fv));
}

TEST_CASE("oracle agrees with classify everywhere") {
    for (auto m : kModes)
        for (const auto& fv : enumerate_feature_space()) REQUIRE(classify(fv, m).category == table2_oracle(fv, m));
}

TEST_CASE("oracle reproduces the table rows") {
    CHECK(table2_oracle({}) == Category{CategoryValue::CAT1, Sublabel::Scareware});
    FeatureVector h;
    h.hk_localgen = true;
    CHECK(table2_oracle(h).value == CategoryValue::CAT2);
    CHECK(table2_oracle(full_delete(h)).value == CategoryValue::CAT5);
    CHECK(table2_oracle(full_delete(single(false, true, false, SkKind::Symmetric))).value == CategoryValue::CAT3);
    CHECK(table2_oracle(full_delete(single(true, false, false, SkKind::Asymmetric))).value == CategoryValue::CAT4);
}

TEST_CASE("sublabel only on CAT1") {
    for (auto m : kModes)
        for (const auto& fv : enumerate_feature_space()) {
            auto c = classify(fv, m).category;
            CHECK((c.sublabel != Sublabel::None) == (c.value == CategoryValue::CAT1));
        }
}

TEST_CASE("adding deletion never lowers the category of an encrypting vector") {
    for (auto m : kModes)
        for (const auto& fv : enumerate_feature_space()) {
            if (!fv.any_hybrid() && !fv.any_single()) continue;
            auto more = fv;
            more.del_shadow_copies = true;
            CHECK(rank(classify(more, m).category) >= rank(classify(fv, m).category));
            more = fv;
            more.overwrite_delete = true;
            CHECK(rank(classify(more, m).category) >= rank(classify(fv, m).category));
        }
}

TEST_CASE("rationale cites the decision lines") {
    auto c = classify(full_delete(single(false, true, false, SkKind::Symmetric)));
    REQUIRE_FALSE(c.rationale.empty());
    CHECK(c.rationale.back() == "line 11: malware <- CAT3");
}

TEST_CASE("label and mode strings") {
    CHECK(label({CategoryValue::CAT4}) == "CAT4");
    CHECK(category_value_from_string("CAT5") == CategoryValue::CAT5);
    CHECK(sublabel_from_string("OverwriteOnly") == Sublabel::OverwriteOnly);
    CHECK_THROWS_AS(category_value_from_string("CAT6"), Error);
    CHECK(classifier_mode_from_string("literal") == ClassifierMode::Literal);
    CHECK(classifier_mode_from_string("key-locality") == ClassifierMode::KeyLocality);
    CHECK_THROWS_AS(classifier_mode_from_string("fuzzy"), Error);
}

}  // TEST_SUITE

TEST_SUITE("corpus") {

const SampleProfile& find(const char* name) {
    for (const auto& p : bundled_corpus())
        if (p.name == name) return p;
    FAIL("missing profile " << name);
    throw 0;
}

TEST_CASE("bundled corpus has twenty profiles and matches") {
    const auto& corpus = bundled_corpus();
    CHECK(corpus.size() == 20);
    auto report = classify_corpus(corpus);
    for (const auto& row : report.rows)
        CHECK_MESSAGE(row.matched, row.profile->name << " predicted " << label(row.predicted.category));
    CHECK(report.matched == 20);
    CHECK(report.all_matched());
}

TEST_CASE("named profiles") {
    CHECK(classify(find("WannaCry").features).category.value == CategoryValue::CAT5);
    CHECK(classify(find("AnonPop").features).category.value == CategoryValue::CAT1);
    const auto& dma = find("DMA-Locker");
    CHECK(dma.year == 2015);
    CHECK(dma.features.sk_c2);
    CHECK(dma.features.sk_kind == SkKind::Symmetric);
    CHECK(classify(dma.features, ClassifierMode::KeyLocality).category.value == CategoryValue::CAT4);
    CHECK(classify(dma.features, ClassifierMode::Literal).category.value == CategoryValue::CAT3);
}

TEST_CASE("literal mode misses exactly the off-victim symmetric profiles") {
    auto report = classify_corpus(bundled_corpus(), ClassifierMode::Literal);
    for (const auto& row : report.rows) {
        const auto& fv = row.profile->features;
        bool off_victim_sym = fv.any_single() && fv.sk_kind == SkKind::Symmetric &&
                              !(fv.sk_pemb || (fv.sk_localgen && fv.key_residue_on_victim)) &&
                              (fv.del_shadow_copies || fv.overwrite_delete);
        CHECK(row.matched != off_victim_sym);
    }
    CHECK(report.matched == 19);
}

TEST_CASE("statistics") {
    auto stats = corpus_stats(bundled_corpus());
    CHECK(stats.total == 20);
    CHECK(stats.category_share.at(CategoryValue::CAT4).equals_percent(35));
    CHECK(stats.category_share.at(CategoryValue::CAT5).equals_percent(35));
    CHECK(stats.platform_share.at(Platform::Windows).equals_percent(85));
    CHECK(stats.category_share.at(CategoryValue::CAT4).value() == doctest::Approx(0.35));
    std::map<int, std::size_t> years;
    for (const auto& [y, _] : stats.per_year) years[y] = stats.year_total(y);
    CHECK(years == std::map<int, std::size_t>{{1989, 1}, {2014, 2}, {2015, 4}, {2016, 8}, {2017, 4}, {2018, 1}});
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_corpus("{"), Error);
    CHECK_THROWS_AS(parse_corpus(R"({"schema":"v2","profiles":[]})"), Error);
    CHECK_THROWS_AS(parse_corpus(R"({"schema":"v1","profiles":[{"name":"x"}]})"), Error);
    CHECK(parse_corpus(R"({"schema":"v1","profiles":[]})").empty());
}

TEST_CASE("profile json round trip") {
    for (const auto& p : bundled_corpus()) {
        nlohmann::json j = p;
        auto back = j.get<SampleProfile>();
        CHECK(back.name == p.name);
        CHECK(back.features == p.features);
        CHECK(back.expected_category == p.expected_category);
        CHECK(back.paid_ransom == p.paid_ransom);
    }
}

}  // TEST_SUITE
