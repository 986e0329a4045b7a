#ifndef ORBITSET_ENTROPY_HPP
#define ORBITSET_ENTROPY_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbitset/bowen.hpp"

namespace orbitset {

/// Where the candidate points for counting come from: a uniform grid over the
/// space, or the per-depth witness points of an increasing-homeomorphism
/// family (the latter reproduces the word-counting lower bound).
enum class CandidateMode { grid, witness };

inline std::string candidate_label(CandidateMode m) {
    return m == CandidateMode::grid ? "grid" : "witness";
}

/// How the spanning count r is produced: a greedy set cover, or the greedy
/// maximal separated set itself (a maximal separated set is spanning, so its
/// cardinality is a valid r estimate and costs nothing extra).
enum class SpanningMode { greedy_cover, from_separated };

struct GrowthOptions {
    int n_min = 0;
    int n_max = 10;
    std::vector<double> eps_list = {0.05, 0.02};
    MetricKind kind = MetricKind::orbit_set;
    CountMethod method = CountMethod::greedy;
    CandidateMode candidates = CandidateMode::grid;
    SpanningMode spanning = SpanningMode::greedy_cover;
    double grid_resolution = 0.0125;
    Interval witness_target = example41_target();
    double coalesce_delta = 0.0;
    std::size_t orbit_cap = kDefaultOrbitCap;
    std::size_t word_cap = kDefaultWordCap;
    std::size_t grid_cap = 2'000'000;
    std::size_t pair_matrix_cap = 6000; // max candidates for the streaming pair matrix
    unsigned workers = 1;
};

struct GrowthRecord {
    std::string family_label;
    MetricKind kind = MetricKind::orbit_set;
    CountMethod method = CountMethod::greedy;
    CandidateMode candidates = CandidateMode::grid;
    double grid_resolution = 0.0;
    double coalesce_error = 0.0;
    std::vector<CountResult> counts; // epsilon-major, n ascending within each epsilon
};

namespace detail {

inline std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) {
    // i < j
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

/// Streams orbit levels over a fixed candidate list, maintaining the running
/// pairwise n-metric matrix. Pairs freeze once their value reaches the
/// largest epsilon of interest; frozen entries stay valid lower bounds for
/// every threshold test at or below that epsilon.
class PairMatrixEngine {
public:
    PairMatrixEngine(const Family& family, std::vector<Point> candidates,
                     const GrowthOptions& opt)
        : family_(family), opt_(opt), candidates_(std::move(candidates)),
          n_(candidates_.size()) {
        detail::require(!candidates_.empty(), "growth engine: no candidates");
        if (n_ > opt_.pair_matrix_cap)
            throw size_limit_error("growth engine: " + std::to_string(n_) +
                                   " candidates exceed the pair-matrix cap of " +
                                   std::to_string(opt_.pair_matrix_cap));
        freeze_at_ = 0.0;
        for (double e : opt_.eps_list)
            freeze_at_ = std::max(freeze_at_, e);
        matrix_.assign(n_ * (n_ - 1) / 2, 0.0);
        frozen_.assign(matrix_.size(), 0);
        if (opt_.kind == MetricKind::orbit_set) {
            sets_.reserve(n_);
            for (const Point& p : candidates_)
                sets_.push_back(FiniteSet::singleton(family_.space(), p));
        } else {
            words_.resize(n_);
            for (std::size_t i = 0; i < n_; ++i)
                words_[i].assign(candidates_[i].coords.begin(), candidates_[i].coords.end());
        }
        level_ = 0;
        update_pairs();
    }

    int level() const { return level_; }
    std::size_t candidate_count() const { return n_; }
    double coalesce_error() const { return coalesce_error_; }

    void advance() {
        if (opt_.kind == MetricKind::orbit_set) {
            std::vector<FiniteSet> next(n_, sets_.front());
            parallel_for(n_, opt_.workers, [&](std::size_t i) {
                next[i] = image_of_set(family_, sets_[i], opt_.coalesce_delta, opt_.orbit_cap);
            });
            sets_ = std::move(next);
            coalesce_error_ =
                family_.max_lipschitz() * coalesce_error_ + opt_.coalesce_delta;
        } else {
            const std::size_t d = family_.space().dim();
            const std::size_t p = family_.arity();
            if (static_cast<double>(words_.front().size() / d) * static_cast<double>(p) >
                static_cast<double>(opt_.word_cap))
                throw size_limit_error("growth engine: word trajectories exceed the cap");
            std::vector<std::vector<double>> next(n_);
            parallel_for(n_, opt_.workers, [&](std::size_t i) {
                const auto& cur = words_[i];
                const std::size_t rows = cur.size() / d;
                std::vector<double> out(d), buf(rows * p * d);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t j = 0; j < p; ++j) {
                        family_.maps()[j].apply_span(
                            family_.space().factors(),
                            std::span<const double>(cur.data() + r * d, d), out);
                        std::copy(out.begin(), out.end(), buf.begin() + (r * p + j) * d);
                    }
                next[i] = std::move(buf);
            });
            words_ = std::move(next);
        }
        ++level_;
        update_pairs();
    }

    /// Greedy separated count at the current level for the given epsilon.
    std::vector<std::size_t> separated_indices(double eps) const {
        return greedy_separated_core(
            n_,
            [&](std::size_t a, std::size_t b, double) { return pair_value(a, b); }, eps);
    }

    std::vector<std::size_t> spanning_indices(double eps) const {
        return greedy_spanning_core(
            n_,
            [&](std::size_t a, std::size_t b, double) { return pair_value(a, b); }, eps);
    }

    CountResult counts_at(double eps) const {
        CountResult res;
        res.n = level_;
        res.epsilon = eps;
        res.kind = opt_.kind;
        res.method = CountMethod::greedy;
        res.candidate_count = n_;
        auto sep = separated_indices(eps);
        res.separated_count = sep.size();
        res.spanning_count = opt_.spanning == SpanningMode::greedy_cover
                                 ? spanning_indices(eps).size()
                                 : sep.size();
        return res;
    }

    double pair_value(std::size_t a, std::size_t b) const {
        if (a == b)
            return 0.0;
        if (a > b)
            std::swap(a, b);
        return matrix_[pair_index(a, b, n_)];
    }

    /// Smallest pairwise value in the running matrix. `exact` reports whether
    /// that entry is an exact metric value (true) or a frozen lower bound.
    double min_pair_value(bool& exact) const {
        double best = std::numeric_limits<double>::infinity();
        exact = true;
        for (std::size_t q = 0; q < matrix_.size(); ++q)
            if (matrix_[q] < best) {
                best = matrix_[q];
                exact = frozen_[q] == 0;
            }
        return best;
    }

private:
    void update_pairs() {
        parallel_for(n_, opt_.workers, [&](std::size_t i) {
            for (std::size_t j = i + 1; j < n_; ++j) {
                std::size_t q = pair_index(i, j, n_);
                if (frozen_[q])
                    continue;
                double d = opt_.kind == MetricKind::orbit_set
                               ? hausdorff(sets_[i], sets_[j], freeze_at_)
                               : word_level_distance(i, j);
                if (d > matrix_[q])
                    matrix_[q] = d;
                if (matrix_[q] >= freeze_at_)
                    frozen_[q] = 1;
            }
        });
    }

    double word_level_distance(std::size_t i, std::size_t j) const {
        const std::size_t d = family_.space().dim();
        const auto& va = words_[i];
        const auto& vb = words_[j];
        const std::size_t rows = va.size() / d;
        double worst = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            double dr = distance(family_.space(),
                                 std::span<const double>(va.data() + r * d, d),
                                 std::span<const double>(vb.data() + r * d, d));
            if (dr > worst) {
                worst = dr;
                if (worst >= freeze_at_)
                    return worst;
            }
        }
        return worst;
    }

    const Family& family_;
    GrowthOptions opt_;
    std::vector<Point> candidates_;
    std::size_t n_;
    double freeze_at_;
    int level_ = 0;
    double coalesce_error_ = 0.0;
    std::vector<double> matrix_;
    std::vector<std::uint8_t> frozen_;
    std::vector<FiniteSet> sets_;                // orbit_set kind
    std::vector<std::vector<double>> words_;     // word_max kind
};

/// Matrix-free engine for one-map families: orbit sets are singletons, so the
/// whole table reduces to per-candidate trajectories and on-demand pair
/// metrics with early abort. Scales to candidate counts far beyond what the
/// pair matrix allows.
class SingletonTrajectoryEngine {
public:
    SingletonTrajectoryEngine(const Family& family, std::vector<Point> candidates,
                              const GrowthOptions& opt)
        : family_(family), opt_(opt), candidates_(std::move(candidates)),
          n_(candidates_.size()), d_(family.space().dim()) {
        detail::require(family_.arity() == 1, "trajectory engine: single-map families only");
        detail::require(!candidates_.empty(), "trajectory engine: no candidates");
        levels_.resize(static_cast<std::size_t>(opt_.n_max) + 1);
        levels_[0].resize(n_ * d_);
        for (std::size_t i = 0; i < n_; ++i)
            std::copy(candidates_[i].coords.begin(), candidates_[i].coords.end(),
                      levels_[0].begin() + i * d_);
        const Map& f = family_.maps()[0];
        for (int k = 1; k <= opt_.n_max; ++k) {
            auto& prev = levels_[static_cast<std::size_t>(k) - 1];
            auto& cur = levels_[static_cast<std::size_t>(k)];
            cur.resize(n_ * d_);
            parallel_for(n_, opt_.workers, [&](std::size_t i) {
                std::vector<double> out(d_);
                f.apply_span(family_.space().factors(),
                             std::span<const double>(prev.data() + i * d_, d_), out);
                canonicalize(family_.space(), out);
                std::copy(out.begin(), out.end(), cur.begin() + i * d_);
            });
        }
    }

    std::size_t candidate_count() const { return n_; }

    double metric(std::size_t i, std::size_t j, int n, double abort_at) const {
        double worst = 0.0;
        for (int k = 0; k <= n; ++k) {
            const auto& lv = levels_[static_cast<std::size_t>(k)];
            double dk = distance(family_.space(),
                                 std::span<const double>(lv.data() + i * d_, d_),
                                 std::span<const double>(lv.data() + j * d_, d_));
            if (dk > worst) {
                worst = dk;
                if (worst >= abort_at)
                    return worst;
            }
        }
        return worst;
    }

    CountResult counts_at(int n, double eps) const {
        CountResult res;
        res.n = n;
        res.epsilon = eps;
        res.kind = opt_.kind;
        res.method = CountMethod::greedy;
        res.candidate_count = n_;
        auto sep = greedy_separated_core(
            n_, [&](std::size_t a, std::size_t b, double abort) { return metric(a, b, n, abort); },
            eps);
        res.separated_count = sep.size();
        if (opt_.spanning == SpanningMode::from_separated) {
            res.spanning_count = sep.size();
        } else {
            detail::require(n_ <= opt_.pair_matrix_cap,
                            "trajectory engine: greedy cover needs at most pair_matrix_cap "
                            "candidates; use spanning = from_separated");
            auto span = greedy_spanning_core(
                n_,
                [&](std::size_t a, std::size_t b, double abort) { return metric(a, b, n, abort); },
                eps);
            res.spanning_count = span.size();
        }
        return res;
    }

private:
    const Family& family_;
    GrowthOptions opt_;
    std::vector<Point> candidates_;
    std::size_t n_, d_;
    std::vector<std::vector<double>> levels_;
};

inline std::vector<Point> witness_candidates(const Family& family, int n,
                                             const Interval& target, std::size_t word_cap) {
    std::vector<Point> pts;
    for (auto& [word, z] : witness_points(family, n, target, word_cap))
        pts.push_back(z);
    return pts;
}

} // namespace detail

/// Assemble the (n, epsilon) count table for one family and metric kind.
inline GrowthRecord growth_table(const Family& family, const GrowthOptions& opt) {
    detail::require(!opt.eps_list.empty(), "growth_table: eps_list must be nonempty");
    detail::require(opt.n_min >= 0 && opt.n_max >= opt.n_min, "growth_table: bad n range");
    double min_eps = opt.eps_list.front();
    for (double e : opt.eps_list) {
        detail::require(e > 0.0, "growth_table: epsilons must be positive");
        min_eps = std::min(min_eps, e);
    }

    GrowthRecord record;
    record.family_label = family.name().empty() ? "family" : family.name();
    record.kind = opt.kind;
    record.method = opt.method;
    record.candidates = opt.candidates;
    record.grid_resolution = opt.candidates == CandidateMode::grid ? opt.grid_resolution : 0.0;

    // n-major scratch, reordered to epsilon-major at the end
    std::vector<CountResult> rows;

    if (opt.candidates == CandidateMode::grid) {
        detail::require(opt.grid_resolution <= min_eps / 4.0 + 1e-15,
                        "growth_table: grid resolution must be at most min(eps)/4");
        std::vector<Point> cands = grid(family.space(), opt.grid_resolution, opt.grid_cap);
        if (opt.method == CountMethod::exact) {
            CandidateMetrics cm(family, cands, opt.n_max, opt.kind, opt.orbit_cap,
                                opt.word_cap, opt.workers);
            for (int n = opt.n_min; n <= opt.n_max; ++n)
                for (double eps : opt.eps_list)
                    rows.push_back(exact_counts(cm, n, eps));
        } else if (family.arity() == 1 && opt.kind == MetricKind::orbit_set) {
            detail::SingletonTrajectoryEngine engine(family, cands, opt);
            for (int n = opt.n_min; n <= opt.n_max; ++n)
                for (double eps : opt.eps_list)
                    rows.push_back(engine.counts_at(n, eps));
        } else {
            detail::PairMatrixEngine engine(family, cands, opt);
            while (engine.level() < opt.n_min)
                engine.advance();
            for (int n = opt.n_min; n <= opt.n_max; ++n) {
                for (double eps : opt.eps_list)
                    rows.push_back(engine.counts_at(eps));
                if (n < opt.n_max)
                    engine.advance();
            }
            record.coalesce_error = engine.coalesce_error();
        }
    } else {
        detail::require(opt.method == CountMethod::greedy,
                        "growth_table: witness candidates support the greedy method only");
        int first = std::max(opt.n_min, 1);
        for (int n = first; n <= opt.n_max; ++n) {
            std::vector<Point> cands =
                detail::witness_candidates(family, n, opt.witness_target, opt.word_cap);
            detail::PairMatrixEngine engine(family, cands, opt);
            while (engine.level() < n)
                engine.advance();
            for (double eps : opt.eps_list)
                rows.push_back(engine.counts_at(eps));
        }
    }

    // epsilon-major, n ascending: group by the eps_list order
    for (double eps : opt.eps_list)
        for (const CountResult& r : rows)
            if (r.epsilon == eps)
                record.counts.push_back(r);
    return record;
}

/// Per-depth witness report: all p^n witness points together with the
/// smallest pairwise n-metric among them. Pairs are pruned once they reach
/// freeze_threshold, so min_pair_metric is exact whenever it lies below that value
/// and a certified lower bound otherwise.
struct WitnessSeparationRow {
    int n = 0;
    std::vector<std::pair<Word, Point>> witnesses;
    double min_pair_metric = 0.0;
    bool exact = true;
};

inline WitnessSeparationRow witness_separation(const Family& family, int n, Interval target,
                                               double freeze_threshold,
                                               const GrowthOptions& opt = {}) {
    WitnessSeparationRow row;
    row.n = n;
    row.witnesses = witness_points(family, n, target, opt.word_cap);
    std::vector<Point> pts;
    pts.reserve(row.witnesses.size());
    for (const auto& [w, z] : row.witnesses)
        pts.push_back(z);
    if (pts.size() < 2) {
        row.min_pair_metric = std::numeric_limits<double>::infinity();
        return row;
    }
    GrowthOptions scan = opt;
    scan.kind = MetricKind::orbit_set;
    scan.eps_list = {freeze_threshold};
    detail::PairMatrixEngine engine(family, std::move(pts), scan);
    while (engine.level() < n)
        engine.advance();
    row.min_pair_metric = engine.min_pair_value(row.exact);
    return row;
}

struct SeriesEstimate {
    double epsilon = 0.0;
    double slope_separated = 0.0;
    double slope_spanning = 0.0;
    double residual = 0.0; // max |log s - fit| over the window
    int window_lo = 0, window_hi = 0;
    bool saturated = false; // separated counts constant across the window
};

/// Per-epsilon growth rates fitted from a count table, plus the headline
/// estimate at the smallest epsilon.
struct EntropyEstimate {
    std::vector<SeriesEstimate> per_eps;
    double headline = 0.0;
    double headline_epsilon = 0.0;
    bool monotone_across_eps = true;
};

namespace detail {

inline std::pair<double, double> least_squares_slope(const std::vector<double>& xs,
                                                     const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return {slope, my - slope * mx};
}

} // namespace detail

/// Fit per-epsilon log-count growth slopes over a tail window of the n-range
/// (the final half by default). Separated counts are the headline estimator;
/// spanning counts are the cross-check.
inline EntropyEstimate estimate_entropy(const GrowthRecord& record,
                                        std::optional<std::pair<int, int>> window = {}) {
    // group rows by epsilon, preserving first-seen epsilon order
    std::vector<double> eps_order;
    for (const CountResult& r : record.counts)
        if (std::find(eps_order.begin(), eps_order.end(), r.epsilon) == eps_order.end())
            eps_order.push_back(r.epsilon);
    detail::require(!eps_order.empty(), "estimate_entropy: empty record");

    EntropyEstimate est;
    double smallest = eps_order.front();
    for (double eps : eps_order) {
        smallest = std::min(smallest, eps);
        std::vector<const CountResult*> series;
        for (const CountResult& r : record.counts)
            if (r.epsilon == eps)
                series.push_back(&r);
        std::sort(series.begin(), series.end(),
                  [](const CountResult* a, const CountResult* b) { return a->n < b->n; });
        detail::require(series.size() >= 4,
                        "estimate_entropy: need at least 4 depth values per epsilon");

        int n_lo = series.front()->n, n_hi = series.back()->n;
        int w_lo = window ? window->first : n_lo + (n_hi - n_lo + 1) / 2;
        int w_hi = window ? window->second : n_hi;
        detail::require(w_lo >= n_lo && w_hi <= n_hi && w_lo < w_hi,
                        "estimate_entropy: fit window outside the n-range");

        std::vector<double> xs, ys, yr;
        for (const CountResult* r : series)
            if (r->n >= w_lo && r->n <= w_hi) {
                xs.push_back(static_cast<double>(r->n));
                ys.push_back(std::log(static_cast<double>(r->separated_count)));
                yr.push_back(std::log(static_cast<double>(r->spanning_count)));
            }
        detail::require(xs.size() >= 2, "estimate_entropy: window too narrow");

        SeriesEstimate se;
        se.epsilon = eps;
        se.window_lo = w_lo;
        se.window_hi = w_hi;
        auto [slope_s, icept_s] = detail::least_squares_slope(xs, ys);
        auto [slope_r, icept_r] = detail::least_squares_slope(xs, yr);
        (void)icept_r;
        se.slope_separated = slope_s;
        se.slope_spanning = slope_r;
        for (std::size_t i = 0; i < xs.size(); ++i)
            se.residual = std::max(se.residual, std::fabs(ys[i] - (icept_s + slope_s * xs[i])));
        se.saturated = std::all_of(ys.begin(), ys.end(),
                                   [&](double v) { return v == ys.front(); });
        est.per_eps.push_back(se);
    }

    for (const SeriesEstimate& se : est.per_eps)
        if (se.epsilon == smallest) {
            est.headline = se.slope_separated;
            est.headline_epsilon = se.epsilon;
        }

    // diagnostic: slopes should not drop as epsilon shrinks
    std::vector<SeriesEstimate> by_eps = est.per_eps;
    std::sort(by_eps.begin(), by_eps.end(),
              [](const SeriesEstimate& a, const SeriesEstimate& b) {
                  return a.epsilon > b.epsilon;
              });
    for (std::size_t i = 1; i < by_eps.size(); ++i)
        if (by_eps[i].slope_separated < by_eps[i - 1].slope_separated - 1e-9)
            est.monotone_across_eps = false;
    return est;
}

struct CompareOptions {
    GrowthOptions growth;          // family-level tables (both metric kinds)
    GrowthOptions single_growth;   // grid-based tables for each singleton subfamily
    double tolerance = 0.05;
    std::optional<std::pair<int, int>> window;
};

struct CompareReport {
    EntropyEstimate hausdorff_estimate;
    EntropyEstimate wordmax_estimate;
    std::vector<double> single_headlines;
    std::vector<GrowthRecord> records;
    bool hausdorff_le_wordmax = true;
    bool wordmax_ge_max_single = true;
};

/// Estimate the family entropy under both metric kinds and each singleton
/// subfamily, and flag violations of the expected orderings.
inline CompareReport compare_entropies(const Family& family, const CompareOptions& opt) {
    CompareReport report;

    GrowthOptions gh = opt.growth;
    gh.kind = MetricKind::orbit_set;
    GrowthRecord rh = growth_table(family, gh);
    report.hausdorff_estimate = estimate_entropy(rh, opt.window);

    GrowthOptions gw = opt.growth;
    gw.kind = MetricKind::word_max;
    GrowthRecord rw = growth_table(family, gw);
    report.wordmax_estimate = estimate_entropy(rw, opt.window);

    report.records.push_back(std::move(rh));
    report.records.push_back(std::move(rw));

    double max_single = 0.0;
    for (std::size_t j = 0; j < family.arity(); ++j) {
        Family single(family.space(), {family.maps()[j]},
                      (family.name().empty() ? "f" : family.name() + "_f") +
                          std::to_string(j + 1));
        GrowthOptions gs = opt.single_growth;
        gs.kind = MetricKind::orbit_set; // metrics coincide for one map
        GrowthRecord rs = growth_table(single, gs);
        EntropyEstimate es = estimate_entropy(rs, opt.window);
        report.single_headlines.push_back(es.headline);
        max_single = std::max(max_single, es.headline);
        report.records.push_back(std::move(rs));
    }

    report.hausdorff_le_wordmax =
        report.hausdorff_estimate.headline <=
        report.wordmax_estimate.headline + opt.tolerance;
    report.wordmax_ge_max_single =
        report.wordmax_estimate.headline >= max_single - opt.tolerance;
    return report;
}

} // namespace orbitset

#endif
