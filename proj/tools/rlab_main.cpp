#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlab/attack.hpp"
#include "rlab/c2.hpp"
#include "rlab/classifier.hpp"
#include "rlab/corpus.hpp"
#include "rlab/error.hpp"
#include "rlab/features.hpp"
#include "rlab/image.hpp"
#include "rlab/recovery.hpp"
#include "rlab/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitIncomplete = 3;
constexpr int kExitAborted = 4;

struct Options {
    std::string format = "text";
    std::string mode = "key-locality";

    std::string profile, trace_file, features_file;
    bool explain = false;

    std::string scenario, out_dir, c2;
    std::optional<std::uint64_t> seed;
    std::uint64_t c2_seed = 0;

    std::string image, strategies = "all", attacker_keys;

    bool verify = false, stats = false, by_year = false;
    std::string corpus_file, plot_data;

    std::uint16_t port = 0;
    std::size_t max_connections = 0;
};

bool want_json(const Options& o) { return o.format == "json"; }

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

std::string percent(const rlab::Share& s) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(0) << s.value() * 100.0 << "%";
    return os.str();
}

int cmd_classify(const Options& o) {
    auto mode = rlab::classifier_mode_from_string(o.mode);
    int sources = !o.profile.empty() + !o.trace_file.empty() + !o.features_file.empty();
    if (sources != 1) throw rlab::Error(rlab::ErrorKind::ValidationError,
                                        "give exactly one of --profile, --trace, --features");
    rlab::FeatureVector fv;
    std::optional<rlab::SampleProfile> profile;
    if (!o.profile.empty()) {
        json j;
        try {
            j = json::parse(rlab::read_text_file(o.profile));
        } catch (const json::exception& e) {
            throw rlab::Error(rlab::ErrorKind::ValidationError, o.profile + ": " + e.what());
        }
        profile = j.get<rlab::SampleProfile>();
        fv = profile->features;
    } else if (!o.trace_file.empty()) {
        fv = rlab::extract_features(rlab::parse_trace(rlab::read_text_file(o.trace_file)));
    } else {
        try {
            fv = json::parse(rlab::read_text_file(o.features_file)).get<rlab::FeatureVector>();
        } catch (const json::exception& e) {
            throw rlab::Error(rlab::ErrorKind::ValidationError, o.features_file + ": " + e.what());
        }
    }
    auto result = rlab::classify(fv, mode);
    if (want_json(o)) {
        json j{{"category", std::string(rlab::to_string(result.category.value))},
               {"sublabel", std::string(rlab::to_string(result.category.sublabel))},
               {"label", rlab::label(result.category)},
               {"mode", std::string(rlab::to_string(mode))},
               {"features", fv},
               {"rationale", result.rationale},
               {"warnings", result.warnings}};
        if (profile) j["name"] = profile->name;
        print_json(j);
    } else {
        std::cout << rlab::label(result.category) << "\n";
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        if (o.explain)
            for (const auto& r : result.rationale) std::cout << "  " << r << "\n";
    }
    return kExitOk;
}

std::vector<rlab::KeyMaterial> c2_secrets(const rlab::AttackScenario& s, std::uint64_t c2_seed) {
    if (!rlab::requires_c2(s)) return {};
    bool sym = s.encryption.variant == rlab::StructureVariant::SingleKey &&
               s.encryption.kind == rlab::SingleKeyKind::Symmetric;
    if (sym) return {rlab::C2State::derive_symmetric(c2_seed, s.scenario_id)};
    return {rlab::C2State::derive_pair(c2_seed, s.scenario_id).priv};
}

int cmd_simulate(const Options& o) {
    auto file = rlab::parse_scenario_file(rlab::read_text_file(o.scenario));
    if (o.seed) file.scenario.rng_seed = *o.seed;
    auto fs_state = rlab::build_victim(file);
    auto targets = rlab::select_targets(file.scenario, fs_state);
    auto oracle = rlab::capture_oracle(fs_state, targets);

    std::optional<rlab::C2State> state;
    std::unique_ptr<rlab::C2Endpoint> endpoint;
    if (o.c2 == "inproc") {
        state.emplace(o.c2_seed);
        endpoint = std::make_unique<rlab::InProcEndpoint>(*state);
    } else if (!o.c2.empty()) {
        auto [host, port] = rlab::parse_c2_address(o.c2);
        endpoint = std::make_unique<rlab::TcpEndpoint>(host, port);
    }

    auto outcome = rlab::execute_attack(file.scenario, fs_state, endpoint.get());

    rlab::SimulationBundle b;
    b.scenario = file.scenario;
    b.fs = fs_state;
    b.artifacts = outcome.artifacts;
    b.trace = outcome.trace;
    b.oracle = std::move(oracle);
    b.attacker_keys = outcome.local_attacker_keys.all();
    for (auto& k : c2_secrets(file.scenario, o.c2_seed)) b.attacker_keys.push_back(std::move(k));
    rlab::save_bundle(o.out_dir, b);

    auto implied = rlab::implied_features(file.scenario, outcome.encrypted_count);
    auto category = rlab::classify(implied).category;
    if (want_json(o)) {
        print_json({{"scenario_id", file.scenario.scenario_id},
                    {"out", o.out_dir},
                    {"targets", outcome.targets.size()},
                    {"encrypted", outcome.encrypted_count},
                    {"trace_events", outcome.trace.events.size()},
                    {"exfiltrated_blobs", outcome.artifacts.exfiltrated_blobs.size()},
                    {"implied_category", rlab::label(category)}});
    } else {
        std::cout << "scenario " << file.scenario.scenario_id << ": " << outcome.encrypted_count << "/"
                  << outcome.targets.size() << " targets encrypted, " << outcome.trace.events.size()
                  << " trace events, " << outcome.artifacts.exfiltrated_blobs.size() << " blobs exfiltrated\n"
                  << "implied category " << rlab::label(category) << "\n"
                  << "written to " << o.out_dir << "\n";
    }
    return kExitOk;
}

int cmd_extract(const Options& o) {
    auto fv = rlab::extract_features(rlab::parse_trace(rlab::read_text_file(o.trace_file)));
    auto text = json(fv).dump(2) + "\n";
    if (o.out_dir.empty()) {
        if (want_json(o)) std::cout << text;
        else std::cout << rlab::describe(fv) << "\n";
    } else {
        rlab::write_text_file(o.out_dir, text);
        if (!want_json(o)) std::cout << rlab::describe(fv) << "\n";
        else std::cout << text;
    }
    return kExitOk;
}

int cmd_recover(const Options& o) {
    auto strategies = rlab::parse_strategy_list(o.strategies);
    auto image = rlab::load_recovery_image(o.image);
    std::optional<rlab::Keyring> keys;
    if (!o.attacker_keys.empty()) keys = rlab::load_attacker_keys(o.attacker_keys);
    auto report = rlab::attempt_recovery(image, strategies, keys ? &*keys : nullptr);
    if (want_json(o)) {
        print_json(rlab::to_json(report));
    } else {
        for (const auto& [path, f] : report.files)
            std::cout << std::left << std::setw(16) << rlab::to_string(f.outcome) << " "
                      << std::setw(22) << (f.by ? std::string(rlab::to_string(*f.by)) : std::string("-")) << " "
                      << path << "\n";
        std::cout << "fraction_recovered " << report.recovered_bytes << "/" << report.total_bytes << " = "
                  << std::setprecision(4) << report.fraction() << "\n"
                  << "strategies_succeeded "
                  << (report.strategies_succeeded.empty() ? "-" : rlab::format_strategy_list(report.strategies_succeeded))
                  << "\n"
                  << "ransom_required " << (report.ransom_required ? "yes" : "no") << "\n";
    }
    return report.complete() ? kExitOk : kExitIncomplete;
}

int cmd_corpus(const Options& o) {
    auto mode = rlab::classifier_mode_from_string(o.mode);
    std::vector<rlab::SampleProfile> owned;
    if (!o.corpus_file.empty()) owned = rlab::parse_corpus(rlab::read_text_file(o.corpus_file));
    const auto& corpus = o.corpus_file.empty() ? rlab::bundled_corpus() : owned;
    bool verify = o.verify || (!o.stats && !o.by_year && o.plot_data.empty());
    int rc = kExitOk;
    json out = json::object();

    if (verify) {
        auto report = rlab::classify_corpus(corpus, mode);
        if (!report.all_matched()) rc = kExitMismatch;
        if (want_json(o)) {
            json rows = json::array();
            for (const auto& r : report.rows)
                rows.push_back({{"name", r.profile->name},
                                {"year", r.profile->year},
                                {"expected", rlab::label(r.profile->expected_category)},
                                {"predicted", rlab::label(r.predicted.category)},
                                {"matched", r.matched}});
            out["verify"] = {{"mode", std::string(rlab::to_string(mode))},
                             {"matched", report.matched},
                             {"total", report.rows.size()},
                             {"rows", rows}};
        } else {
            for (const auto& r : report.rows)
                std::cout << std::left << std::setw(16) << r.profile->name << std::setw(6) << r.profile->year
                          << std::setw(24) << rlab::label(r.profile->expected_category) << std::setw(24)
                          << rlab::label(r.predicted.category) << (r.matched ? "ok" : "MISMATCH") << "\n";
            std::cout << report.matched << "/" << report.rows.size() << " matched (" << rlab::to_string(mode)
                      << ")\n";
        }
    }

    auto stats = rlab::corpus_stats(corpus);
    if (o.stats) {
        if (want_json(o)) {
            json cats = json::object(), plats = json::object();
            for (const auto& [c, s] : stats.category_share)
                cats[std::string(rlab::to_string(c))] = {{"count", s.count}, {"share", s.value()}};
            for (const auto& [p, s] : stats.platform_share)
                plats[std::string(rlab::to_string(p))] = {{"count", s.count}, {"share", s.value()}};
            out["stats"] = {{"total", stats.total}, {"categories", cats}, {"platforms", plats}};
        } else {
            for (const auto& [c, s] : stats.category_share)
                std::cout << rlab::to_string(c) << "  " << s.count << "/" << s.total << "  " << percent(s) << "\n";
            for (const auto& [p, s] : stats.platform_share)
                std::cout << rlab::to_string(p) << "  " << s.count << "/" << s.total << "  " << percent(s) << "\n";
        }
    }

    if (o.by_year) {
        if (want_json(o)) {
            json years = json::object();
            for (const auto& [year, cats] : stats.per_year) {
                json row{{"total", stats.year_total(year)}};
                for (const auto& [c, n] : cats) row[std::string(rlab::to_string(c))] = n;
                years[std::to_string(year)] = row;
            }
            out["by_year"] = years;
        } else {
            for (const auto& [year, cats] : stats.per_year) {
                std::cout << year << "  " << stats.year_total(year) << " ";
                for (const auto& [c, n] : cats) std::cout << " " << rlab::to_string(c) << ":" << n;
                std::cout << "\n";
            }
        }
    }

    if (!o.plot_data.empty()) {
        std::ostringstream csv;
        csv << "year,CAT1,CAT2,CAT3,CAT4,CAT5\n";
        for (const auto& [year, cats] : stats.per_year) {
            csv << year;
            for (int c = 1; c <= 5; ++c) {
                auto it = cats.find(static_cast<rlab::CategoryValue>(c));
                csv << "," << (it == cats.end() ? 0 : it->second);
            }
            csv << "\n";
        }
        rlab::write_text_file(o.plot_data, csv.str());
    }

    if (want_json(o)) print_json(out);
    return rc;
}

int cmd_c2_serve(const Options& o) {
    rlab::C2State state(o.c2_seed);
    rlab::serve_tcp(state, o.port, o.max_connections, [](std::uint16_t port) {
        std::cout << "listening on 127.0.0.1:" << port << std::endl;
    });
    std::cout << "served: " << state.beacon_count() << " beacons, " << state.issued_keys().size()
              << " samples keyed, " << state.received_blobs().size() << " blobs received\n";
    return kExitOk;
}

int exit_code_for(const rlab::Error& e) {
    return e.kind() == rlab::ErrorKind::AttackAborted ? kExitAborted : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ransomware attack-structure lab: simulate, extract, classify, recover"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    };
    auto add_mode = [&o](CLI::App* sub) {
        sub->add_option("--mode", o.mode, "Classifier mode")
            ->check(CLI::IsMember({"key-locality", "literal", "KeyLocality", "Literal"}));
    };

    auto* classify = app.add_subcommand("classify", "Classify a profile, trace or feature vector");
    classify->add_option("--profile", o.profile, "Sample profile JSON");
    classify->add_option("--trace", o.trace_file, "Execution trace");
    classify->add_option("--features", o.features_file, "Feature vector JSON");
    classify->add_flag("--explain", o.explain, "Print the decision trail");
    add_mode(classify);
    add_common(classify);

    auto* simulate = app.add_subcommand("simulate", "Run an attack scenario against a virtual victim");
    simulate->add_option("--scenario", o.scenario, "Scenario JSON")->required();
    simulate->add_option("--out", o.out_dir, "Output directory")->required();
    simulate->add_option("--seed", o.seed, "Override the scenario's rng_seed");
    simulate->add_option("--c2", o.c2, "C2 endpoint: inproc or host:port");
    simulate->add_option("--c2-seed", o.c2_seed, "Seed of the C2 key issuer");
    add_common(simulate);

    auto* extract = app.add_subcommand("extract", "Extract the feature vector from a trace");
    extract->add_option("--trace", o.trace_file, "Execution trace")->required();
    extract->add_option("--out", o.out_dir, "Write the features JSON here");
    add_common(extract);

    auto* recover = app.add_subcommand("recover", "Attempt recovery on a simulated image");
    recover->add_option("--image", o.image, "Directory written by simulate")->required();
    recover->add_option("--strategies", o.strategies, "Comma-separated strategies, 'all' or 'none'");
    recover->add_option("--attacker-keys", o.attacker_keys, "Attacker key file (simulates paying)");
    add_common(recover);

    auto* corpus = app.add_subcommand("corpus", "Reference corpus regression and statistics");
    corpus->add_flag("--verify", o.verify, "Check every profile's label");
    corpus->add_flag("--stats", o.stats, "Category and platform shares");
    corpus->add_flag("--by-year", o.by_year, "Per-year category counts");
    corpus->add_option("--plot-data", o.plot_data, "Write per-year counts as CSV");
    corpus->add_option("--corpus", o.corpus_file, "Use this corpus instead of the bundled one");
    add_mode(corpus);
    add_common(corpus);

    auto* serve = app.add_subcommand("c2-serve", "Serve the C2 protocol on 127.0.0.1");
    serve->add_option("--port", o.port, "TCP port (0 picks one)");
    serve->add_option("--seed", o.c2_seed, "Seed of the C2 key issuer");
    serve->add_option("--max-connections", o.max_connections, "Stop after this many connections (0: never)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        if (*classify) return cmd_classify(o);
        if (*simulate) return cmd_simulate(o);
        if (*extract) return cmd_extract(o);
        if (*recover) return cmd_recover(o);
        if (*corpus) return cmd_corpus(o);
        if (*serve) return cmd_c2_serve(o);
    } catch (const rlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitInvalid;
}
