#ifndef ORBITSET_EXPERIMENT_HPP
#define ORBITSET_EXPERIMENT_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "orbitset/chaos.hpp"
#include "orbitset/entropy.hpp"

namespace orbitset {

using nlohmann::json;

/// Invalid or inconsistent experiment configuration (exit code 2).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// One experiment, one config file. Every field has an explicit default so
/// `--print-config` shows the fully resolved run.
struct ExperimentConfig {
    std::string experiment = "entropy";
    std::vector<std::string> space_factors = {"interval"};
    json family_spec = "example41";
    std::string family_name = "custom";
    json family2_spec; // product experiment only

    int n_max = 8;
    std::vector<double> eps_list = {0.05, 0.02};
    double grid_resolution = 0.005;
    double coalesce_delta = 0.0;
    std::string kind = "hausdorff";    // hausdorff | wordmax
    std::string method = "greedy";     // greedy | exact
    std::string candidates = "grid";   // grid | witness
    std::string spanning = "cover";    // cover | separated

    std::vector<double> witness_target = {1.0 / 3.0, 2.0 / 3.0};
    double witness_prune = 0.07; // pair scans stop above this separation

    int power_exponent = 2;

    std::string conjugacy_map = "reflect"; // reflect | square, unless conjugacy_t given
    json conjugacy_t;                      // {"t": <map>, "t_inv": <map>}

    int series_length = 1000;
    int pair_count = 40;
    std::vector<double> t_grid = {0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.45};
    double theta_sep = 0.05;
    double eta_prox = 0.005;
    double dc_gap_tol = 0.1;
    double dc_zero_tol = 0.02;

    int oracle_instances = 200;
    int oracle_max_candidates = 12;

    std::uint64_t orbit_cap = kDefaultOrbitCap;
    std::uint64_t word_cap = kDefaultWordCap;
    std::uint64_t grid_cap = 2'000'000;
    std::uint64_t pair_matrix_cap = 6000;

    std::string out_dir = "out";
    unsigned workers = 1;
    std::uint64_t seed = 1;
};

// -------------------------------------------------------------------------
// map / family (de)serialization
// -------------------------------------------------------------------------

inline Map map_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw config_error("map spec must be an object with a \"type\" field");
    std::string type = j.at("type").get<std::string>();
    try {
        if (type == "pwl")
            return Map::pwl(j.at("x").get<std::vector<double>>(),
                            j.at("y").get<std::vector<double>>());
        if (type == "rotation")
            return Map::rotation(j.at("alpha").get<double>());
        if (type == "affine_mod1")
            return Map::affine_mod1(j.at("a").get<int>(), j.at("c").get<double>());
        if (type == "identity")
            return Map::identity();
        if (type == "product") {
            std::vector<Map> factors;
            for (const json& f : j.at("factors"))
                factors.push_back(map_from_json(f));
            return Map::product(std::move(factors));
        }
    } catch (const contract_violation& e) {
        throw config_error(std::string("invalid map spec: ") + e.what());
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed map spec: ") + e.what());
    }
    throw config_error("unknown map type: " + type);
}

inline json map_to_json(const Map& m) {
    switch (m.kind()) {
    case Map::Kind::pwl:
        return {{"type", "pwl"}, {"x", m.pwl_x()}, {"y", m.pwl_y()}};
    case Map::Kind::rotation:
        return {{"type", "rotation"}, {"alpha", m.rotation_angle()}};
    case Map::Kind::affine_mod1:
        return {{"type", "affine_mod1"}, {"a", m.affine_slope()}, {"c", m.affine_offset()}};
    case Map::Kind::identity:
        return {{"type", "identity"}};
    case Map::Kind::product: {
        json factors = json::array();
        for (const Map& ch : m.children())
            factors.push_back(map_to_json(ch));
        return {{"type", "product"}, {"factors", factors}};
    }
    default:
        return {{"type", "composite"}};
    }
}

inline SpaceSpec space_from_tags(const std::vector<std::string>& tags) {
    std::vector<Factor> factors;
    for (const std::string& t : tags) {
        if (t == "interval")
            factors.push_back(Factor::interval);
        else if (t == "circle")
            factors.push_back(Factor::circle);
        else
            throw config_error("unknown space factor tag: " + t);
    }
    if (factors.empty())
        throw config_error("space must have at least one factor");
    return SpaceSpec(std::move(factors));
}

inline Family family_from_spec(const json& spec, const std::vector<std::string>& space_tags,
                               const std::string& name) {
    if (spec.is_string()) {
        try {
            return make_preset(spec.get<std::string>());
        } catch (const contract_violation& e) {
            throw config_error(e.what());
        }
    }
    if (spec.is_array()) {
        std::vector<Map> maps;
        for (const json& m : spec)
            maps.push_back(map_from_json(m));
        try {
            return Family(space_from_tags(space_tags), std::move(maps), name);
        } catch (const contract_violation& e) {
            throw config_error(std::string("invalid family: ") + e.what());
        }
    }
    throw config_error("family must be a preset name or an array of map specs");
}

// -------------------------------------------------------------------------
// config parsing
// -------------------------------------------------------------------------

namespace detail {

inline const std::set<std::string>& config_keys() {
    static const std::set<std::string> keys = {
        "experiment",     "space",          "family",          "family_name",
        "family2",        "n_max",          "eps_list",        "grid_resolution",
        "coalesce_delta", "kind",           "method",          "candidates",
        "spanning",       "witness_target", "witness_prune",   "power_exponent",
        "conjugacy_map",  "conjugacy_t",    "series_length",   "pair_count",
        "t_grid",         "theta_sep",      "eta_prox",        "dc_gap_tol",
        "dc_zero_tol",    "oracle_instances", "oracle_max_candidates",
        "orbit_cap",      "word_cap",       "grid_cap",        "pair_matrix_cap",
        "out",            "workers",        "seed"};
    return keys;
}

template <typename T>
void read_field(const json& j, const char* key, T& dst) {
    if (!j.contains(key))
        return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error(std::string("config field \"") + key + "\" has the wrong type");
    }
}

} // namespace detail

inline void validate_config(const ExperimentConfig& cfg) {
    static const std::set<std::string> experiments = {"entropy", "compare", "witness41",
                                                      "product", "power",   "conjugacy",
                                                      "chaos",   "oracle"};
    if (!experiments.count(cfg.experiment))
        throw config_error("unknown experiment: " + cfg.experiment);
    if (cfg.kind != "hausdorff" && cfg.kind != "wordmax")
        throw config_error("kind must be \"hausdorff\" or \"wordmax\"");
    if (cfg.method != "greedy" && cfg.method != "exact")
        throw config_error("method must be \"greedy\" or \"exact\"");
    if (cfg.candidates != "grid" && cfg.candidates != "witness")
        throw config_error("candidates must be \"grid\" or \"witness\"");
    if (cfg.spanning != "cover" && cfg.spanning != "separated")
        throw config_error("spanning must be \"cover\" or \"separated\"");
    if (cfg.workers < 1)
        throw config_error("workers must be at least 1");
    if (cfg.n_max < 1)
        throw config_error("n_max must be positive");
    if (cfg.eps_list.empty())
        throw config_error("eps_list must be nonempty");
    double min_eps = cfg.eps_list.front();
    for (double e : cfg.eps_list) {
        if (e <= 0.0)
            throw config_error("eps_list entries must be positive");
        min_eps = std::min(min_eps, e);
    }
    if (cfg.grid_resolution <= 0.0 || cfg.grid_resolution > 1.0)
        throw config_error("grid_resolution must lie in (0,1]");

    const bool estimating = cfg.experiment == "entropy" || cfg.experiment == "compare" ||
                            cfg.experiment == "product" || cfg.experiment == "power" ||
                            cfg.experiment == "conjugacy";
    if (estimating) {
        if (cfg.n_max < 4)
            throw config_error("growth experiments need n_max >= 4 for slope fitting");
        // compare always runs grid tables for the singletons; product forces grid candidates
        if ((cfg.candidates == "grid" || cfg.experiment == "compare" ||
             cfg.experiment == "product") &&
            cfg.grid_resolution > min_eps / 4.0 + 1e-15)
            throw config_error("grid_resolution must be at most min(eps_list)/4");
    }
    if (cfg.experiment == "witness41" && cfg.witness_prune <= 0.0)
        throw config_error("witness_prune must be positive");
    if (cfg.experiment == "product" && cfg.family2_spec.is_null())
        throw config_error("product experiment needs a \"family2\" spec");
    if (cfg.experiment == "power" && cfg.power_exponent < 1)
        throw config_error("power_exponent must be positive");
    if (cfg.experiment == "chaos") {
        if (cfg.series_length < static_cast<int>(kProfileFloor))
            throw config_error("series_length must be at least " +
                               std::to_string(kProfileFloor));
        if (cfg.pair_count < 1)
            throw config_error("pair_count must be positive");
        if (cfg.t_grid.empty())
            throw config_error("t_grid must be nonempty");
        for (std::size_t k = 0; k < cfg.t_grid.size(); ++k) {
            if (cfg.t_grid[k] <= 0.0)
                throw config_error("t_grid entries must be positive");
            if (k > 0 && cfg.t_grid[k] <= cfg.t_grid[k - 1])
                throw config_error("t_grid must be strictly increasing");
        }
        if (!(cfg.theta_sep > cfg.eta_prox && cfg.eta_prox > 0.0))
            throw config_error("need theta_sep > eta_prox > 0");
    }
    if (cfg.witness_target.size() != 2 || !(cfg.witness_target[0] < cfg.witness_target[1]) ||
        cfg.witness_target[0] < 0.0 || cfg.witness_target[1] > 1.0)
        throw config_error("witness_target must be [lo, hi] inside [0,1]");
    if (cfg.experiment == "oracle" &&
        (cfg.oracle_instances < 1 || cfg.oracle_max_candidates < 2 ||
         cfg.oracle_max_candidates > static_cast<int>(kExactSearchLimit)))
        throw config_error("oracle settings out of range");
    if (cfg.experiment == "conjugacy" && cfg.conjugacy_t.is_null() &&
        cfg.conjugacy_map != "reflect" && cfg.conjugacy_map != "square")
        throw config_error("conjugacy_map must be \"reflect\" or \"square\" (or give conjugacy_t)");

    // presets must build; inline families must validate against the space
    family_from_spec(cfg.family_spec, cfg.space_factors, cfg.family_name);
    if (!cfg.family2_spec.is_null())
        family_from_spec(cfg.family2_spec, cfg.space_factors, cfg.family_name + "2");
}

inline ExperimentConfig parse_config(const json& j) {
    if (!j.is_object())
        throw config_error("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!detail::config_keys().count(key))
            throw config_error("unknown config key: " + key);
    }
    ExperimentConfig cfg;
    detail::read_field(j, "experiment", cfg.experiment);
    detail::read_field(j, "space", cfg.space_factors);
    if (j.contains("family"))
        cfg.family_spec = j.at("family");
    detail::read_field(j, "family_name", cfg.family_name);
    if (j.contains("family2"))
        cfg.family2_spec = j.at("family2");
    detail::read_field(j, "n_max", cfg.n_max);
    detail::read_field(j, "eps_list", cfg.eps_list);
    detail::read_field(j, "grid_resolution", cfg.grid_resolution);
    detail::read_field(j, "coalesce_delta", cfg.coalesce_delta);
    detail::read_field(j, "kind", cfg.kind);
    detail::read_field(j, "method", cfg.method);
    detail::read_field(j, "candidates", cfg.candidates);
    detail::read_field(j, "spanning", cfg.spanning);
    detail::read_field(j, "witness_target", cfg.witness_target);
    detail::read_field(j, "witness_prune", cfg.witness_prune);
    detail::read_field(j, "power_exponent", cfg.power_exponent);
    detail::read_field(j, "conjugacy_map", cfg.conjugacy_map);
    if (j.contains("conjugacy_t"))
        cfg.conjugacy_t = j.at("conjugacy_t");
    detail::read_field(j, "series_length", cfg.series_length);
    detail::read_field(j, "pair_count", cfg.pair_count);
    detail::read_field(j, "t_grid", cfg.t_grid);
    detail::read_field(j, "theta_sep", cfg.theta_sep);
    detail::read_field(j, "eta_prox", cfg.eta_prox);
    detail::read_field(j, "dc_gap_tol", cfg.dc_gap_tol);
    detail::read_field(j, "dc_zero_tol", cfg.dc_zero_tol);
    detail::read_field(j, "oracle_instances", cfg.oracle_instances);
    detail::read_field(j, "oracle_max_candidates", cfg.oracle_max_candidates);
    detail::read_field(j, "orbit_cap", cfg.orbit_cap);
    detail::read_field(j, "word_cap", cfg.word_cap);
    detail::read_field(j, "grid_cap", cfg.grid_cap);
    detail::read_field(j, "pair_matrix_cap", cfg.pair_matrix_cap);
    detail::read_field(j, "out", cfg.out_dir);
    detail::read_field(j, "workers", cfg.workers);
    detail::read_field(j, "seed", cfg.seed);

    // the canonical example family defaults to the witness estimator
    if (cfg.family_spec.is_string() && cfg.family_spec.get<std::string>() == "example41" &&
        !j.contains("candidates"))
        cfg.candidates = "witness";

    validate_config(cfg);
    return cfg;
}

inline json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = cfg.experiment;
    j["space"] = cfg.space_factors;
    j["family"] = cfg.family_spec;
    j["family_name"] = cfg.family_name;
    if (!cfg.family2_spec.is_null())
        j["family2"] = cfg.family2_spec;
    j["n_max"] = cfg.n_max;
    j["eps_list"] = cfg.eps_list;
    j["grid_resolution"] = cfg.grid_resolution;
    j["coalesce_delta"] = cfg.coalesce_delta;
    j["kind"] = cfg.kind;
    j["method"] = cfg.method;
    j["candidates"] = cfg.candidates;
    j["spanning"] = cfg.spanning;
    j["witness_target"] = cfg.witness_target;
    j["witness_prune"] = cfg.witness_prune;
    j["power_exponent"] = cfg.power_exponent;
    j["conjugacy_map"] = cfg.conjugacy_map;
    if (!cfg.conjugacy_t.is_null())
        j["conjugacy_t"] = cfg.conjugacy_t;
    j["series_length"] = cfg.series_length;
    j["pair_count"] = cfg.pair_count;
    j["t_grid"] = cfg.t_grid;
    j["theta_sep"] = cfg.theta_sep;
    j["eta_prox"] = cfg.eta_prox;
    j["dc_gap_tol"] = cfg.dc_gap_tol;
    j["dc_zero_tol"] = cfg.dc_zero_tol;
    j["oracle_instances"] = cfg.oracle_instances;
    j["oracle_max_candidates"] = cfg.oracle_max_candidates;
    j["orbit_cap"] = cfg.orbit_cap;
    j["word_cap"] = cfg.word_cap;
    j["grid_cap"] = cfg.grid_cap;
    j["pair_matrix_cap"] = cfg.pair_matrix_cap;
    j["out"] = cfg.out_dir;
    j["workers"] = cfg.workers;
    j["seed"] = cfg.seed;
    return j;
}

inline ExperimentConfig preset_config(const std::string& name) {
    json j;
    j["family"] = name; // validates the preset name
    if (name == "doubling" || name == "tent") {
        // expanding one-map presets need a grid fine enough that the counts
        // can keep doubling through the fit window
        j["eps_list"] = {0.0625};
        j["grid_resolution"] = 1.0 / 4096.0;
        j["spanning"] = "separated";
    }
    return parse_config(j);
}

// -------------------------------------------------------------------------
// output formatting
// -------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string fmt_point(const Point& p) {
    std::string s;
    for (std::size_t i = 0; i < p.dim(); ++i) {
        if (i)
            s += ';';
        s += fmt(p.coords[i]);
    }
    return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

inline std::string growth_csv(std::vector<GrowthRecord> records) {
    struct Row {
        std::string family, kind, method;
        double epsilon;
        int n;
        std::size_t r, s;
    };
    std::vector<Row> rows;
    for (const GrowthRecord& rec : records)
        for (const CountResult& c : rec.counts)
            rows.push_back({rec.family_label, kind_label(c.kind), method_label(c.method),
                            c.epsilon, c.n, c.spanning_count, c.separated_count});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.family, a.kind, a.method, a.epsilon, a.n) <
               std::tie(b.family, b.kind, b.method, b.epsilon, b.n);
    });
    std::string out = "family,kind,method,n,epsilon,count_r,count_s\n";
    for (const Row& r : rows)
        out += r.family + "," + r.kind + "," + r.method + "," + std::to_string(r.n) + "," +
               fmt(r.epsilon) + "," + std::to_string(r.r) + "," + std::to_string(r.s) + "\n";
    return out;
}

inline json estimate_to_json(const EntropyEstimate& est) {
    json per = json::array();
    for (const SeriesEstimate& se : est.per_eps)
        per.push_back({{"epsilon", se.epsilon},
                       {"slope_separated", se.slope_separated},
                       {"slope_spanning", se.slope_spanning},
                       {"residual", se.residual},
                       {"window", {se.window_lo, se.window_hi}},
                       {"saturated", se.saturated}});
    return {{"headline", est.headline},
            {"headline_epsilon", est.headline_epsilon},
            {"per_epsilon", per},
            {"monotone_across_eps", est.monotone_across_eps}};
}

} // namespace detail

// -------------------------------------------------------------------------
// experiment runners
// -------------------------------------------------------------------------

namespace detail {

inline GrowthOptions growth_options(const ExperimentConfig& cfg) {
    GrowthOptions opt;
    opt.n_max = cfg.n_max;
    opt.eps_list = cfg.eps_list;
    opt.kind = cfg.kind == "hausdorff" ? MetricKind::orbit_set : MetricKind::word_max;
    opt.method = cfg.method == "greedy" ? CountMethod::greedy : CountMethod::exact;
    opt.candidates = cfg.candidates == "grid" ? CandidateMode::grid : CandidateMode::witness;
    opt.spanning = cfg.spanning == "cover" ? SpanningMode::greedy_cover
                                           : SpanningMode::from_separated;
    opt.grid_resolution = cfg.grid_resolution;
    opt.witness_target = Interval{cfg.witness_target[0], cfg.witness_target[1]};
    opt.coalesce_delta = cfg.coalesce_delta;
    opt.orbit_cap = cfg.orbit_cap;
    opt.word_cap = cfg.word_cap;
    opt.grid_cap = cfg.grid_cap;
    opt.pair_matrix_cap = cfg.pair_matrix_cap;
    opt.workers = cfg.workers;
    return opt;
}

inline json run_entropy(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    Family fam = family_from_spec(cfg.family_spec, cfg.space_factors, cfg.family_name);
    GrowthRecord rec = growth_table(fam, growth_options(cfg));
    EntropyEstimate est = estimate_entropy(rec);
    write_text(dir / "growth.csv", growth_csv({rec}));
    json summary;
    summary["family"] = rec.family_label;
    summary["estimate"] = estimate_to_json(est);
    summary["coalesce_error"] = rec.coalesce_error;
    return summary;
}

inline json run_compare(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    Family fam = family_from_spec(cfg.family_spec, cfg.space_factors, cfg.family_name);
    CompareOptions copt;
    copt.growth = growth_options(cfg);
    copt.single_growth = copt.growth;
    copt.single_growth.candidates = CandidateMode::grid;
    copt.single_growth.kind = MetricKind::orbit_set;
    CompareReport rep = compare_entropies(fam, copt);
    write_text(dir / "growth.csv", growth_csv(rep.records));
    json singles = json::array();
    for (double h : rep.single_headlines)
        singles.push_back(h);
    json summary;
    summary["family"] = fam.name().empty() ? cfg.family_name : fam.name();
    summary["hausdorff"] = estimate_to_json(rep.hausdorff_estimate);
    summary["wordmax"] = estimate_to_json(rep.wordmax_estimate);
    summary["single_headlines"] = singles;
    summary["hausdorff_le_wordmax"] = rep.hausdorff_le_wordmax;
    summary["wordmax_ge_max_single"] = rep.wordmax_ge_max_single;
    return summary;
}

inline json run_witness41(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    Family fam = family_from_spec(cfg.family_spec, cfg.space_factors, cfg.family_name);
    GrowthOptions opt = growth_options(cfg);
    Interval target{cfg.witness_target[0], cfg.witness_target[1]};

    std::string csv = "n,word,point\n";
    json per_n = json::array();
    double overall_min = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= cfg.n_max; ++n) {
        WitnessSeparationRow row = witness_separation(fam, n, target, cfg.witness_prune, opt);
        for (const auto& [word, z] : row.witnesses)
            csv += std::to_string(n) + "," + word.label() + "," + fmt_point(z) + "\n";
        per_n.push_back({{"n", n},
                         {"count", row.witnesses.size()},
                         {"min_pair_metric", row.min_pair_metric},
                         {"exact", row.exact}});
        overall_min = std::min(overall_min, row.min_pair_metric);
    }
    write_text(dir / "witnesses.csv", csv);
    json summary;
    summary["family"] = fam.name();
    summary["per_n"] = per_n;
    summary["min_separation"] = overall_min;
    summary["prune_threshold"] = cfg.witness_prune;
    return summary;
}

inline json run_product(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    Family a = family_from_spec(cfg.family_spec, cfg.space_factors, cfg.family_name);
    Family b = family_from_spec(cfg.family2_spec, cfg.space_factors, cfg.family_name + "2");
    Family p = product_family(a, b);

    GrowthOptions opt = growth_options(cfg);
    opt.candidates = CandidateMode::grid;
    GrowthRecord ra = growth_table(a, opt);
    GrowthRecord rb = growth_table(b, opt);
    GrowthRecord rp = growth_table(p, opt);
    EntropyEstimate ea = estimate_entropy(ra);
    EntropyEstimate eb = estimate_entropy(rb);
    EntropyEstimate ep = estimate_entropy(rp);
    write_text(dir / "growth.csv", growth_csv({ra, rb, rp}));

    json summary;
    summary["factor1"] = {{"family", ra.family_label}, {"headline", ea.headline}};
    summary["factor2"] = {{"family", rb.family_label}, {"headline", eb.headline}};
    summary["product"] = {{"family", rp.family_label}, {"headline", ep.headline}};
    summary["additivity_gap"] = ep.headline - (ea.headline + eb.headline);
    return summary;
}

inline json run_power(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    Family fam = family_from_spec(cfg.family_spec, cfg.space_factors, cfg.family_name);
    Family powered = power_family(fam, cfg.power_exponent, cfg.word_cap);
    GrowthOptions opt = growth_options(cfg);
    GrowthRecord rf = growth_table(fam, opt);
    GrowthRecord rp = growth_table(powered, opt);
    EntropyEstimate ef = estimate_entropy(rf);
    EntropyEstimate ep = estimate_entropy(rp);
    write_text(dir / "growth.csv", growth_csv({rf, rp}));
    json summary;
    summary["family"] = rf.family_label;
    summary["exponent"] = cfg.power_exponent;
    summary["headline_base"] = ef.headline;
    summary["headline_power"] = ep.headline;
    summary["scaling_gap"] =
        ep.headline - static_cast<double>(cfg.power_exponent) * ef.headline;
    return summary;
}

inline std::pair<Map, Map> conjugacy_pair(const ExperimentConfig& cfg) {
    if (!cfg.conjugacy_t.is_null()) {
        if (!cfg.conjugacy_t.contains("t") || !cfg.conjugacy_t.contains("t_inv"))
            throw config_error("conjugacy_t needs \"t\" and \"t_inv\" map specs");
        return {map_from_json(cfg.conjugacy_t.at("t")),
                map_from_json(cfg.conjugacy_t.at("t_inv"))};
    }
    if (cfg.conjugacy_map == "reflect") {
        Map flip = Map::pwl({0.0, 1.0}, {1.0, 0.0});
        return {flip, flip};
    }
    Map square = pwl_approx([](double x) { return x * x; }, 512);
    Map root = Map::pwl(square.pwl_y(), square.pwl_x());
    return {square, root};
}

inline json run_conjugacy(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    Family fam = family_from_spec(cfg.family_spec, cfg.space_factors, cfg.family_name);
    auto [T, Tinv] = conjugacy_pair(cfg);
    Family conj = conjugate_family(fam, T, Tinv);

    GrowthOptions opt = growth_options(cfg);
    GrowthOptions conj_opt = opt;
    if (opt.candidates == CandidateMode::witness) {
        double lo = T.eval_pwl(opt.witness_target.lo);
        double hi = T.eval_pwl(opt.witness_target.hi);
        conj_opt.witness_target = Interval{std::min(lo, hi), std::max(lo, hi)};
    }
    GrowthRecord rf = growth_table(fam, opt);
    GrowthRecord rc = growth_table(conj, conj_opt);
    EntropyEstimate ef = estimate_entropy(rf);
    EntropyEstimate ec = estimate_entropy(rc);
    write_text(dir / "growth.csv", growth_csv({rf, rc}));
    json summary;
    summary["family"] = rf.family_label;
    summary["conjugacy_map"] = cfg.conjugacy_t.is_null() ? json(cfg.conjugacy_map)
                                                         : cfg.conjugacy_t;
    summary["headline_original"] = ef.headline;
    summary["headline_conjugated"] = ec.headline;
    summary["headline_gap"] = ec.headline - ef.headline;
    return summary;
}

inline json run_chaos(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    Family fam = family_from_spec(cfg.family_spec, cfg.space_factors, cfg.family_name);
    std::vector<Point> pts = grid(fam.space(), cfg.grid_resolution, cfg.grid_cap);
    if (pts.size() < 2)
        throw config_error("chaos experiment: grid too coarse to sample pairs");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    std::vector<std::pair<Point, Point>> pairs;
    pairs.reserve(static_cast<std::size_t>(cfg.pair_count));
    while (pairs.size() < static_cast<std::size_t>(cfg.pair_count)) {
        std::size_t i = pick(rng), j = pick(rng);
        if (i == j)
            continue;
        pairs.emplace_back(pts[std::min(i, j)], pts[std::max(i, j)]);
    }

    ChaosThresholds thresholds;
    thresholds.theta_sep = cfg.theta_sep;
    thresholds.eta_prox = cfg.eta_prox;
    thresholds.dc_gap_tol = cfg.dc_gap_tol;
    thresholds.dc_zero_tol = cfg.dc_zero_tol;

    std::vector<PairClassification> cls(pairs.size());
    parallel_for(pairs.size(), cfg.workers, [&](std::size_t k) {
        PairSeries series = pair_series(fam, pairs[k].first, pairs[k].second,
                                        cfg.series_length, cfg.orbit_cap);
        DistributionalProfile prof = distributional_profile(series, cfg.t_grid);
        cls[k] = classify_pair(series, prof, cfg.t_grid, thresholds);
    });

    struct Row {
        std::string x, y, line;
    };
    std::vector<Row> rows;
    std::size_t n_liyorke = 0, n_dc = 0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const PairClassification& c = cls[k];
        n_liyorke += c.li_yorke ? 1 : 0;
        n_dc += c.dc_class != DcClass::none ? 1 : 0;
        Row row;
        row.x = fmt_point(pairs[k].first);
        row.y = fmt_point(pairs[k].second);
        row.line = row.x + "," + row.y + "," + (c.li_yorke ? "1" : "0") + "," +
                   dc_label(c.dc_class) + "," + fmt(c.tail_max) + "," + fmt(c.tail_min) +
                   "," + fmt(c.max_phi_gap);
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.x, a.y, a.line) < std::tie(b.x, b.y, b.line);
    });
    std::string csv = "x,y,liyorke,dc_class,tail_max,tail_min,max_phi_gap\n";
    for (const Row& r : rows)
        csv += r.line + "\n";
    write_text(dir / "pairs.csv", csv);

    json summary;
    summary["family"] = fam.name().empty() ? cfg.family_name : fam.name();
    summary["pairs"] = pairs.size();
    summary["liyorke_fraction"] =
        static_cast<double>(n_liyorke) / static_cast<double>(pairs.size());
    summary["dc_fraction"] = static_cast<double>(n_dc) / static_cast<double>(pairs.size());
    summary["note"] = "finite-horizon numerical evidence, not proof";
    return summary;
}

inline json run_oracle(const ExperimentConfig& cfg, const std::filesystem::path&) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::size_t violations_sandwich = 0, violations_greedy = 0, violations_kind = 0;
    int instances = 0;
    for (int k = 0; k < cfg.oracle_instances; ++k) {
        Family fam = make_preset(k % 2 == 0 ? "example41" : "rotation_id");
        std::uniform_int_distribution<int> count_dist(4, cfg.oracle_max_candidates);
        std::uniform_int_distribution<int> depth_dist(0, 3);
        int n_cand = count_dist(rng);
        int n = depth_dist(rng);
        std::vector<Point> cands;
        for (int i = 0; i < n_cand; ++i)
            cands.push_back(Point{u(rng)});
        double eps = 0.03 + 0.25 * u(rng);

        CandidateMetrics h(fam, cands, n, MetricKind::orbit_set);
        CandidateMetrics w(fam, cands, n, MetricKind::word_max);
        // skip instances with a pair distance on the decision boundary
        bool tie = false;
        for (std::size_t i = 0; i < cands.size() && !tie; ++i)
            for (std::size_t j = i + 1; j < cands.size(); ++j) {
                double d = h.metric(i, j, n);
                double dw = w.metric(i, j, n);
                if (std::fabs(d - eps) < 1e-9 || std::fabs(d - eps / 2) < 1e-9 ||
                    std::fabs(dw - eps) < 1e-9 || std::fabs(dw - eps / 2) < 1e-9) {
                    tie = true;
                    break;
                }
            }
        if (tie)
            continue;
        ++instances;

        CountResult eh = exact_counts(h, n, eps);
        CountResult eh_half = exact_counts(h, n, eps / 2.0);
        CountResult ew = exact_counts(w, n, eps);
        if (!(eh.spanning_count <= eh.separated_count &&
              eh.separated_count <= eh_half.spanning_count))
            ++violations_sandwich;
        auto sep = greedy_separated_indices(h, n, eps);
        auto span = greedy_spanning_indices(h, n, eps);
        if (!(sep.size() <= eh.separated_count && span.size() >= eh.spanning_count &&
              eh.spanning_count <= sep.size()))
            ++violations_greedy;
        if (!(eh.separated_count <= ew.separated_count &&
              eh.spanning_count <= ew.spanning_count))
            ++violations_kind;
    }

    json summary;
    summary["instances"] = instances;
    summary["violations_sandwich"] = violations_sandwich;
    summary["violations_greedy_bracketing"] = violations_greedy;
    summary["violations_kind_ordering"] = violations_kind;
    return summary;
}

} // namespace detail

/// Run one experiment; writes growth.csv / summary.json / pairs.csv /
/// witnesses.csv under cfg.out_dir as applicable.
inline void run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);

    json summary;
    if (cfg.experiment == "entropy")
        summary = detail::run_entropy(cfg, dir);
    else if (cfg.experiment == "compare")
        summary = detail::run_compare(cfg, dir);
    else if (cfg.experiment == "witness41")
        summary = detail::run_witness41(cfg, dir);
    else if (cfg.experiment == "product")
        summary = detail::run_product(cfg, dir);
    else if (cfg.experiment == "power")
        summary = detail::run_power(cfg, dir);
    else if (cfg.experiment == "conjugacy")
        summary = detail::run_conjugacy(cfg, dir);
    else if (cfg.experiment == "chaos")
        summary = detail::run_chaos(cfg, dir);
    else if (cfg.experiment == "oracle")
        summary = detail::run_oracle(cfg, dir);
    else
        throw config_error("unknown experiment: " + cfg.experiment);

    json envelope;
    envelope["experiment"] = cfg.experiment;
    envelope["result"] = summary;
    envelope["config"] = config_to_json(cfg);
    detail::write_text(dir / "summary.json", envelope.dump(2) + "\n");
}

} // namespace orbitset

#endif
