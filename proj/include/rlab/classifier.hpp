#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rlab/features.hpp"

namespace rlab {

enum class CategoryValue { CAT1 = 1, CAT2 = 2, CAT3 = 3, CAT4 = 4, CAT5 = 5 };

/// Only CAT1 carries a sublabel; its four variants are the four deletion
/// combinations of a structure without any encryption key.
enum class Sublabel { None, Scareware, ShadowDeleteOnly, OverwriteOnly, FullDeleteNoEncryption };

struct Category {
    CategoryValue value = CategoryValue::CAT1;
    Sublabel sublabel = Sublabel::None;

    int index() const noexcept { return static_cast<int>(value); }
    bool operator==(const Category&) const = default;
};

std::string_view to_string(CategoryValue v);
std::string_view to_string(Sublabel s);
CategoryValue category_value_from_string(std::string_view s);
Sublabel sublabel_from_string(std::string_view s);
/// "CAT3", or "CAT1/Scareware" when a sublabel is present.
std::string label(const Category& c);

/// Literal reads the symmetric test of the single-key branch as written
/// (any symmetric single key is CAT3). KeyLocality additionally requires
/// the key to be recoverable on the victim: embedded in the payload, or
/// generated locally and left behind.
enum class ClassifierMode { Literal, KeyLocality };

std::string_view to_string(ClassifierMode m);
ClassifierMode classifier_mode_from_string(std::string_view s);

struct Validation {
    bool mixed_structure = false;
    std::vector<std::string> warnings;
};

/// Throws ValidationError when sk_kind disagrees with the sk_* flags.
/// Vectors with both hk_* and sk_* flags pass with a MixedStructure warning.
Validation validate_features(const FeatureVector& fv);

struct Classification {
    Category category;
    std::vector<std::string> rationale;
    std::vector<std::string> warnings;
};

Classification classify(const FeatureVector& fv, ClassifierMode mode = ClassifierMode::KeyLocality);

/// Row lookup against the classification framework table, written
/// independently of classify(). Cells the table leaves open are normalized
/// first: partial deletion counts as deletion present, and a vector with
/// both hybrid and single-key flags is looked up by its single-key columns.
Category table2_oracle(const FeatureVector& fv, ClassifierMode mode = ClassifierMode::KeyLocality);

/// Every valid vector: 6 provenance flags x sk_kind (NotApplicable when no
/// sk flag, otherwise Symmetric or Asymmetric) x 2 deletion flags x residue.
std::vector<FeatureVector> enumerate_feature_space();

}  // namespace rlab
