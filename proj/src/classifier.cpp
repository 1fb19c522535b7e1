#include "rlab/classifier.hpp"

#include <array>
#include <optional>

#include "rlab/error.hpp"

namespace rlab {

std::string_view to_string(CategoryValue v) {
    switch (v) {
    case CategoryValue::CAT1: return "CAT1";
    case CategoryValue::CAT2: return "CAT2";
    case CategoryValue::CAT3: return "CAT3";
    case CategoryValue::CAT4: return "CAT4";
    case CategoryValue::CAT5: return "CAT5";
    }
    return "CAT1";
}

std::string_view to_string(Sublabel s) {
    switch (s) {
    case Sublabel::None: return "None";
    case Sublabel::Scareware: return "Scareware";
    case Sublabel::ShadowDeleteOnly: return "ShadowDeleteOnly";
    case Sublabel::OverwriteOnly: return "OverwriteOnly";
    case Sublabel::FullDeleteNoEncryption: return "FullDeleteNoEncryption";
    }
    return "None";
}

CategoryValue category_value_from_string(std::string_view s) {
    static constexpr std::array<CategoryValue, 5> kAll = {CategoryValue::CAT1, CategoryValue::CAT2,
                                                          CategoryValue::CAT3, CategoryValue::CAT4,
                                                          CategoryValue::CAT5};
    for (auto v : kAll)
        if (to_string(v) == s) return v;
    throw Error(ErrorKind::ValidationError, "unknown category '" + std::string(s) + "'");
}

Sublabel sublabel_from_string(std::string_view s) {
    static constexpr std::array<Sublabel, 5> kAll = {Sublabel::None, Sublabel::Scareware,
                                                     Sublabel::ShadowDeleteOnly, Sublabel::OverwriteOnly,
                                                     Sublabel::FullDeleteNoEncryption};
    for (auto v : kAll)
        if (to_string(v) == s) return v;
    throw Error(ErrorKind::ValidationError, "unknown sublabel '" + std::string(s) + "'");
}

std::string label(const Category& c) {
    std::string out(to_string(c.value));
    if (c.sublabel != Sublabel::None) {
        out += '/';
        out += to_string(c.sublabel);
    }
    return out;
}

std::string_view to_string(ClassifierMode m) {
    return m == ClassifierMode::Literal ? "literal" : "key-locality";
}

ClassifierMode classifier_mode_from_string(std::string_view s) {
    if (s == "literal" || s == "Literal") return ClassifierMode::Literal;
    if (s == "key-locality" || s == "KeyLocality") return ClassifierMode::KeyLocality;
    throw Error(ErrorKind::ValidationError, "unknown classifier mode '" + std::string(s) + "'");
}

Validation validate_features(const FeatureVector& fv) {
    if (fv.any_single() && fv.sk_kind == SkKind::NotApplicable)
        throw Error(ErrorKind::ValidationError, "single-key flags set but sk_kind is NotApplicable");
    if (!fv.any_single() && fv.sk_kind != SkKind::NotApplicable)
        throw Error(ErrorKind::ValidationError,
                    "sk_kind is " + std::string(to_string(fv.sk_kind)) + " but no single-key flag is set");
    Validation v;
    if (fv.any_single() && fv.any_hybrid()) {
        v.mixed_structure = true;
        v.warnings.emplace_back("MixedStructure: both hybrid and single-key flags set; single-key flags are tested first");
    }
    return v;
}

namespace {

Sublabel cat1_sublabel(bool shadow, bool overwrite) {
    if (shadow && overwrite) return Sublabel::FullDeleteNoEncryption;
    if (shadow) return Sublabel::ShadowDeleteOnly;
    if (overwrite) return Sublabel::OverwriteOnly;
    return Sublabel::Scareware;
}

}  // namespace

Classification classify(const FeatureVector& fv, ClassifierMode mode) {
    auto validation = validate_features(fv);
    Classification out;
    out.warnings = validation.warnings;
    auto& why = out.rationale;

    if (!fv.any_single() && !fv.any_hybrid()) {
        why.emplace_back("line 1: SKc2emb=SKPemb=SKlocalgen=HKc2emb=HKPemb=HKlocalgen=no holds");
        out.category = {CategoryValue::CAT1, cat1_sublabel(fv.del_shadow_copies, fv.overwrite_delete)};
        why.emplace_back("line 2: malware <- CAT1 (" + std::string(to_string(out.category.sublabel)) + ")");
        return out;
    }
    why.emplace_back("line 1: an encryption key structure is present");

    if (!fv.del_shadow_copies && !fv.overwrite_delete) {
        why.emplace_back("line 4: delShdCpy=ovrFile=no holds");
        why.emplace_back("line 5: malware <- CAT2");
        out.category = {CategoryValue::CAT2, Sublabel::None};
        return out;
    }
    why.emplace_back("line 4: at least one deletion structure is present");

    if (!fv.any_single()) {
        why.emplace_back("line 7: SKc2emb=SKPemb=SKlocalgen=no holds");
        why.emplace_back("line 8: malware <- CAT5");
        out.category = {CategoryValue::CAT5, Sublabel::None};
        return out;
    }
    why.emplace_back("line 7: a single-key structure is present");

    bool cat3 = false;
    if (mode == ClassifierMode::Literal) {
        cat3 = fv.sk_kind == SkKind::Symmetric;
        why.emplace_back(std::string("line 10 (literal): single key is ") + std::string(to_string(fv.sk_kind)));
    } else {
        bool on_victim = fv.sk_pemb || (fv.sk_localgen && fv.key_residue_on_victim);
        cat3 = fv.sk_kind == SkKind::Symmetric && on_victim;
        why.emplace_back(std::string("line 10 (key-locality): single key is ") +
                         std::string(to_string(fv.sk_kind)) + ", " +
                         (on_victim ? "recoverable on the victim" : "not present on the victim"));
    }
    out.category = {cat3 ? CategoryValue::CAT3 : CategoryValue::CAT4, Sublabel::None};
    why.emplace_back(cat3 ? "line 11: malware <- CAT3" : "line 13: malware <- CAT4");
    return out;
}

namespace {

/// One table cell pattern: X (absent), check (present), or don't care.
enum class Cell { X, Check, Any };
enum class YesNo { No, Yes };
enum class KeyCondition { None, EncKeyIsSym, EncKeyNotSym };

struct Table2Row {
    CategoryValue category;
    Sublabel sublabel;
    Cell hybrid;
    Cell single;
    KeyCondition condition;
    YesNo shadow;
    YesNo overwrite;
};

constexpr std::array<Table2Row, 9> kTable2 = {{
    {CategoryValue::CAT1, Sublabel::Scareware, Cell::X, Cell::X, KeyCondition::None, YesNo::No, YesNo::No},
    {CategoryValue::CAT1, Sublabel::ShadowDeleteOnly, Cell::X, Cell::X, KeyCondition::None, YesNo::Yes, YesNo::No},
    {CategoryValue::CAT1, Sublabel::OverwriteOnly, Cell::X, Cell::X, KeyCondition::None, YesNo::No, YesNo::Yes},
    {CategoryValue::CAT1, Sublabel::FullDeleteNoEncryption, Cell::X, Cell::X, KeyCondition::None, YesNo::Yes, YesNo::Yes},
    {CategoryValue::CAT2, Sublabel::None, Cell::Check, Cell::X, KeyCondition::None, YesNo::No, YesNo::No},
    {CategoryValue::CAT2, Sublabel::None, Cell::X, Cell::Check, KeyCondition::None, YesNo::No, YesNo::No},
    {CategoryValue::CAT3, Sublabel::None, Cell::X, Cell::Check, KeyCondition::EncKeyIsSym, YesNo::Yes, YesNo::Yes},
    {CategoryValue::CAT4, Sublabel::None, Cell::X, Cell::Check, KeyCondition::EncKeyNotSym, YesNo::Yes, YesNo::Yes},
    {CategoryValue::CAT5, Sublabel::None, Cell::Check, Cell::X, KeyCondition::None, YesNo::Yes, YesNo::Yes},
}};

bool cell_matches(Cell cell, bool present) {
    return cell == Cell::Any || (cell == Cell::Check) == present;
}

/// K_enc = K_sym, under the mode's reading.
bool enc_key_is_sym(const FeatureVector& fv, ClassifierMode mode) {
    if (fv.sk_kind != SkKind::Symmetric) return false;
    if (mode == ClassifierMode::Literal) return true;
    return fv.sk_pemb || (fv.sk_localgen && fv.key_residue_on_victim);
}

}  // namespace

Category table2_oracle(const FeatureVector& fv, ClassifierMode mode) {
    validate_features(fv);
    bool hybrid = fv.hk_c2 || fv.hk_pemb || fv.hk_localgen;
    bool single = fv.sk_c2 || fv.sk_pemb || fv.sk_localgen;
    bool shadow = fv.del_shadow_copies;
    bool overwrite = fv.overwrite_delete;

    if (hybrid && single) hybrid = false;
    if ((hybrid || single) && (shadow || overwrite)) shadow = overwrite = true;

    std::optional<Category> found;
    for (const auto& row : kTable2) {
        if (!cell_matches(row.hybrid, hybrid) || !cell_matches(row.single, single)) continue;
        if ((row.shadow == YesNo::Yes) != shadow || (row.overwrite == YesNo::Yes) != overwrite) continue;
        if (row.condition == KeyCondition::EncKeyIsSym && !enc_key_is_sym(fv, mode)) continue;
        if (row.condition == KeyCondition::EncKeyNotSym && enc_key_is_sym(fv, mode)) continue;
        if (found) throw Error(ErrorKind::ValidationError, "table lookup matched more than one row");
        found = Category{row.category, row.sublabel};
    }
    if (!found) throw Error(ErrorKind::ValidationError, "table lookup matched no row: " + describe(fv));
    return *found;
}

std::vector<FeatureVector> enumerate_feature_space() {
    std::vector<FeatureVector> out;
    for (unsigned flags = 0; flags < 64; ++flags) {
        for (unsigned deletion = 0; deletion < 4; ++deletion) {
            for (unsigned residue = 0; residue < 2; ++residue) {
                FeatureVector fv;
                fv.hk_c2 = flags & 1;
                fv.hk_pemb = flags & 2;
                fv.hk_localgen = flags & 4;
                fv.sk_c2 = flags & 8;
                fv.sk_pemb = flags & 16;
                fv.sk_localgen = flags & 32;
                fv.del_shadow_copies = deletion & 1;
                fv.overwrite_delete = deletion & 2;
                fv.key_residue_on_victim = residue;
                if (!fv.any_single()) {
                    out.push_back(fv);
                    continue;
                }
                for (auto kind : {SkKind::Symmetric, SkKind::Asymmetric}) {
                    fv.sk_kind = kind;
                    out.push_back(fv);
                }
            }
        }
    }
    return out;
}

}  // namespace rlab
