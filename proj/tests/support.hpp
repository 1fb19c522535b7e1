#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rlab/attack.hpp"
#include "rlab/c2.hpp"
#include "rlab/recovery.hpp"

namespace rlab::testing {

/// Scenario families used by the property suites. The CATn shapes carry
/// both deletion structures in full (shadow copies deleted, remnants
/// overwritten) except CAT2, which has neither, and CAT1, which has no
/// encryption at all.
enum class Shape { Cat1, Cat2, Cat3, Cat4, Cat5, Cat5Residue, Any };

const char* shape_name(Shape s);
/// The category every scenario of the shape must classify to (Any has none).
std::optional<CategoryValue> shape_category(Shape s);

AttackScenario random_scenario(Rng& rng, Shape shape);
/// Scenario plus a random victim with at least one target (except for Any,
/// whose glob may match nothing) and enough snapshots for CAT2.
ScenarioFile random_scenario_file(Rng& rng, Shape shape);

/// One attack run with everything needed to check it afterwards.
struct Run {
    ScenarioFile file;
    VirtualFS before;
    VirtualFS after;
    AttackOutcome outcome;
    C2State c2{0};
    RecoveryImage image;
    Keyring attacker_keys;
};

/// Executes against a fresh victim with an in-process C2 when needed.
Run run_scenario(const ScenarioFile& file, std::uint64_t c2_seed = 7);

/// True when `needle` occurs anywhere in the post-attack image: file
/// contents (any state), snapshots or the payload.
bool image_contains(const Run& run, ByteView needle);

std::string source_dir();

}  // namespace rlab::testing
