#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "orbitset/experiment.hpp"

using namespace orbitset;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("orbitset_test_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("config parsing applies defaults and rejects junk") {
    ExperimentConfig cfg = parse_config(json::object());
    CHECK(cfg.experiment == "entropy");
    CHECK(cfg.candidates == "witness"); // example41 default family picks the witness estimator
    CHECK(cfg.seed == 1);

    CHECK_THROWS_AS(parse_config(json{{"no_such_key", 1}}), config_error);
    CHECK_THROWS_AS(parse_config(json{{"n_max", "many"}}), config_error);
    CHECK_THROWS_AS(parse_config(json{{"experiment", "dance"}}), config_error);
    CHECK_THROWS_AS(parse_config(json{{"family", "unknown_preset"}}), config_error);
    CHECK_THROWS_AS(parse_config(json{{"eps_list", json::array()}}), config_error);
    CHECK_THROWS_AS(parse_config(json{{"family", "doubling"}, {"grid_resolution", 0.4}}),
                    config_error);
    CHECK_THROWS_AS(parse_config(json{{"experiment", "product"}, {"family", "doubling"}}),
                    config_error);
    CHECK_THROWS_AS(parse_config(json{{"experiment", "chaos"},
                                      {"family", "rotation_id"},
                                      {"series_length", 10}}),
                    config_error);

    // explicit candidate choice wins over the preset default
    ExperimentConfig explicit_grid =
        parse_config(json{{"family", "example41"}, {"candidates", "grid"},
                          {"grid_resolution", 0.005}});
    CHECK(explicit_grid.candidates == "grid");
}

TEST_CASE("map specs round-trip through json") {
    std::vector<json> specs = {
        {{"type", "pwl"}, {"x", {0.0, 0.5, 1.0}}, {"y", {0.0, 1.0, 0.0}}},
        {{"type", "rotation"}, {"alpha", 0.25}},
        {{"type", "affine_mod1"}, {"a", 2}, {"c", 0.0}},
        {{"type", "identity"}},
        {{"type", "product"},
         {"factors", {json{{"type", "identity"}}, json{{"type", "rotation"}, {"alpha", 0.1}}}}},
    };
    for (const json& spec : specs) {
        Map m = map_from_json(spec);
        Map back = map_from_json(map_to_json(m));
        CHECK(back.kind() == m.kind());
    }
    CHECK_THROWS_AS(map_from_json(json{{"type", "mystery"}}), config_error);
    CHECK_THROWS_AS(map_from_json(json{{"type", "pwl"}, {"x", {0.0, 1.0}}}), config_error);
}

TEST_CASE("inline families validate against the configured space") {
    json cfg_json = {{"family", json::array({json{{"type", "rotation"}, {"alpha", 0.2}}})},
                     {"space", {"circle"}},
                     {"family_name", "spin"}};
    ExperimentConfig cfg = parse_config(cfg_json);
    Family fam = family_from_spec(cfg.family_spec, cfg.space_factors, cfg.family_name);
    CHECK(fam.arity() == 1);
    CHECK(fam.name() == "spin");

    json bad = cfg_json;
    bad["space"] = {"interval"};
    CHECK_THROWS_AS(parse_config(bad), config_error);
}

TEST_CASE("entropy runs are reproducible byte for byte") {
    json j = {{"family", "doubling"}, {"n_max", 5},          {"eps_list", {0.11}},
              {"grid_resolution", 1.0 / 64.0}, {"spanning", "separated"}, {"seed", 9}};
    ExperimentConfig cfg = parse_config(j);

    TempDir d1("entropy1"), d2("entropy2"), d3("entropy3");
    cfg.out_dir = d1.path.string();
    cfg.workers = 1;
    run_experiment(cfg);
    cfg.out_dir = d2.path.string();
    run_experiment(cfg);
    CHECK(slurp(d1.path / "growth.csv") == slurp(d2.path / "growth.csv"));

    cfg.out_dir = d3.path.string();
    cfg.workers = 3; // worker count must never change the numbers
    run_experiment(cfg);
    CHECK(slurp(d1.path / "growth.csv") == slurp(d3.path / "growth.csv"));

    std::string csv = slurp(d1.path / "growth.csv");
    CHECK(csv.rfind("family,kind,method,n,epsilon,count_r,count_s\n", 0) == 0);

    json summary = json::parse(slurp(d1.path / "summary.json"));
    CHECK(summary["experiment"] == "entropy");
    CHECK(summary["result"]["estimate"].contains("headline"));
    CHECK(summary["config"]["seed"] == 9);
}

TEST_CASE("witness41 emits the witness table and an exact minimum separation") {
    json j = {{"family", "example41"}, {"experiment", "witness41"}, {"n_max", 4}};
    ExperimentConfig cfg = parse_config(j);
    TempDir dir("witness");
    cfg.out_dir = dir.path.string();
    run_experiment(cfg);

    std::string csv = slurp(dir.path / "witnesses.csv");
    std::size_t lines = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
    CHECK(lines == 1 + 2 + 4 + 8 + 16); // header plus 2^n rows per depth

    json summary = json::parse(slurp(dir.path / "summary.json"));
    double min_sep = summary["result"]["min_separation"].get<double>();
    CHECK(min_sep >= 1.0 / 15.0 - 1e-9);
    // every reported value is a certified lower bound at or above the 1/15 scale
    for (const json& row : summary["result"]["per_n"])
        CHECK(row["min_pair_metric"].get<double>() >= 1.0 / 15.0 - 1e-9);
}

TEST_CASE("witness41 reruns are byte-identical") {
    json j = {{"family", "example41"}, {"experiment", "witness41"}, {"n_max", 5}};
    ExperimentConfig cfg = parse_config(j);
    TempDir d1("wit1"), d2("wit2");
    cfg.out_dir = d1.path.string();
    run_experiment(cfg);
    cfg.out_dir = d2.path.string();
    run_experiment(cfg);
    CHECK(slurp(d1.path / "witnesses.csv") == slurp(d2.path / "witnesses.csv"));
    // summaries agree apart from the configured output paths
    json s1 = json::parse(slurp(d1.path / "summary.json"));
    json s2 = json::parse(slurp(d2.path / "summary.json"));
    CHECK(s1["result"] == s2["result"]);
}

TEST_CASE("inline pwl families run through the entropy experiment") {
    json j = {{"family", json::array({json{{"type", "pwl"},
                                           {"x", {0.0, 0.5, 1.0}},
                                           {"y", {0.0, 1.0, 0.0}}}})},
              {"space", {"interval"}},
              {"family_name", "tent_inline"},
              {"n_max", 5},
              {"eps_list", {0.11}},
              {"grid_resolution", 0.0025},
              {"kind", "wordmax"},
              {"spanning", "separated"}};
    ExperimentConfig cfg = parse_config(j);
    TempDir dir("inline");
    cfg.out_dir = dir.path.string();
    run_experiment(cfg);
    json summary = json::parse(slurp(dir.path / "summary.json"));
    CHECK(summary["result"]["family"] == "tent_inline");
    // the tent map stretches by 2, so the growth rate sits near log 2
    CHECK(summary["result"]["estimate"]["headline"].get<double>() > 0.4);
}

TEST_CASE("conjugacy accepts explicit map specs for T and its inverse") {
    json flip = {{"type", "pwl"}, {"x", {0.0, 1.0}}, {"y", {1.0, 0.0}}};
    json j = {{"family", "example41"},
              {"experiment", "conjugacy"},
              {"conjugacy_t", {{"t", flip}, {"t_inv", flip}}},
              {"n_max", 5},
              {"eps_list", {0.01}}};
    ExperimentConfig cfg = parse_config(j);
    TempDir dir("conjt");
    cfg.out_dir = dir.path.string();
    run_experiment(cfg);
    json summary = json::parse(slurp(dir.path / "summary.json"));
    CHECK(std::fabs(summary["result"]["headline_gap"].get<double>()) <= 1e-9);
}

TEST_CASE("chaos scan is deterministic across worker counts") {
    json j = {{"family", "rotation_id"}, {"experiment", "chaos"},   {"series_length", 150},
              {"pair_count", 6},         {"grid_resolution", 0.02}, {"seed", 4}};
    ExperimentConfig cfg = parse_config(j);

    TempDir d1("chaos1"), d2("chaos2");
    cfg.out_dir = d1.path.string();
    cfg.workers = 1;
    run_experiment(cfg);
    cfg.out_dir = d2.path.string();
    cfg.workers = 4;
    run_experiment(cfg);
    CHECK(slurp(d1.path / "pairs.csv") == slurp(d2.path / "pairs.csv"));

    std::string csv = slurp(d1.path / "pairs.csv");
    CHECK(csv.rfind("x,y,liyorke,dc_class,tail_max,tail_min,max_phi_gap\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);

    json summary = json::parse(slurp(d1.path / "summary.json"));
    CHECK(summary["result"]["liyorke_fraction"].get<double>() == 0.0);
}

TEST_CASE("oracle experiment reports zero violations") {
    json j = {{"family", "example41"}, {"experiment", "oracle"}, {"oracle_instances", 60},
              {"oracle_max_candidates", 9}, {"seed", 12}};
    ExperimentConfig cfg = parse_config(j);
    TempDir dir("oracle");
    cfg.out_dir = dir.path.string();
    run_experiment(cfg);
    json summary = json::parse(slurp(dir.path / "summary.json"));
    CHECK(summary["result"]["instances"].get<int>() > 40);
    CHECK(summary["result"]["violations_sandwich"].get<int>() == 0);
    CHECK(summary["result"]["violations_greedy_bracketing"].get<int>() == 0);
    CHECK(summary["result"]["violations_kind_ordering"].get<int>() == 0);
}

TEST_CASE("product, power and conjugacy experiments produce their summaries") {
    TempDir dir("combo");

    SUBCASE("product of doubling and a rotation") {
        json j = {{"family", "doubling"},
                  {"experiment", "product"},
                  {"family2", json::array({json{{"type", "rotation"},
                                                {"alpha", golden_rotation_angle()}}})},
                  {"space", {"circle"}},
                  {"n_max", 4},
                  {"eps_list", {0.13}},
                  {"grid_resolution", 1.0 / 32.0},
                  {"spanning", "separated"}};
        ExperimentConfig cfg = parse_config(j);
        cfg.out_dir = dir.path.string();
        run_experiment(cfg);
        json summary = json::parse(slurp(dir.path / "summary.json"));
        CHECK(summary["result"].contains("additivity_gap"));
    }

    SUBCASE("power of doubling") {
        json j = {{"family", "doubling"},  {"experiment", "power"}, {"power_exponent", 2},
                  {"n_max", 4},            {"eps_list", {0.11}},
                  {"grid_resolution", 1.0 / 1024.0}, {"spanning", "separated"}};
        ExperimentConfig cfg = parse_config(j);
        cfg.out_dir = dir.path.string();
        run_experiment(cfg);
        json summary = json::parse(slurp(dir.path / "summary.json"));
        CHECK(summary["result"]["headline_power"].get<double>() >=
              summary["result"]["headline_base"].get<double>() - 1e-9);
    }

    SUBCASE("conjugacy by the reflection") {
        json j = {{"family", "example41"}, {"experiment", "conjugacy"},
                  {"conjugacy_map", "reflect"}, {"n_max", 6}, {"eps_list", {0.01}}};
        ExperimentConfig cfg = parse_config(j);
        cfg.out_dir = dir.path.string();
        run_experiment(cfg);
        json summary = json::parse(slurp(dir.path / "summary.json"));
        double gap = summary["result"]["headline_gap"].get<double>();
        CHECK(std::fabs(gap) <= 1e-9); // witness counts double on both sides
    }
}
