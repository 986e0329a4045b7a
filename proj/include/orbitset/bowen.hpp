#ifndef ORBITSET_BOWEN_HPP
#define ORBITSET_BOWEN_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "orbitset/dynamics.hpp"
#include "orbitset/parallel.hpp"

namespace orbitset {

/// Which pairwise dynamical metric drives the spanning/separated counts:
/// orbit_set compares whole orbit sets in the Hausdorff metric,
/// word_max takes the worst single word image (always >= orbit_set).
/// For a one-map family the two coincide.
enum class MetricKind { orbit_set, word_max };

inline std::string kind_label(MetricKind k) {
    return k == MetricKind::orbit_set ? "hausdorff" : "wordmax";
}

enum class CountMethod { greedy, exact };

inline std::string method_label(CountMethod m) {
    return m == CountMethod::greedy ? "greedy" : "exact";
}

/// One row of a growth table: counts at a fixed depth and scale.
struct CountResult {
    int n = 0;
    double epsilon = 0.0;
    MetricKind kind = MetricKind::orbit_set;
    CountMethod method = CountMethod::greedy;
    std::size_t spanning_count = 0;  // r
    std::size_t separated_count = 0; // s
    std::size_t candidate_count = 0;
};

/// Orbit-set Bowen metric: max over 0 <= i <= n of the Hausdorff distance
/// between the i-th orbit sets. Tables must reach depth n.
inline double orbit_metric(const OrbitTable& a, const OrbitTable& b, int n,
                           double abort_at = kNoAbort) {
    detail::require(a.depth() >= n && b.depth() >= n, "orbit_metric: tables too shallow");
    double worst = 0.0;
    for (int i = 0; i <= n; ++i) {
        double di = hausdorff(a.sets[i], b.sets[i], abort_at);
        if (di > worst) {
            worst = di;
            if (worst >= abort_at)
                return worst;
        }
    }
    return worst;
}

inline double orbit_metric(const Family& family, const Point& x, const Point& y, int n,
                           std::size_t orbit_cap = kDefaultOrbitCap) {
    OrbitTable tx = orbit_set(family, x, n, 0.0, orbit_cap);
    OrbitTable ty = orbit_set(family, y, n, 0.0, orbit_cap);
    return orbit_metric(tx, ty, n);
}

/// Word-max Bowen metric: max over all words of length <= n of the distance
/// between the two word images, by exact enumeration with joint
/// deduplication of image pairs.
inline double word_metric(const Family& family, const Point& x, const Point& y, int n,
                          std::size_t word_cap = kDefaultWordCap) {
    detail::require(n >= 0, "word_metric: n must be nonnegative");
    const SpaceSpec& space = family.space();
    const std::size_t d = space.dim();
    SpaceSpec pair_space = SpaceSpec::product(space, space);

    auto level_max = [&](const FiniteSet& J) {
        double worst = 0.0;
        for (std::size_t r = 0; r < J.size(); ++r) {
            auto row = J.row(r);
            worst = std::max(worst, distance(space, row.subspan(0, d), row.subspan(d, d)));
        }
        return worst;
    };

    std::vector<double> first(x.coords);
    first.insert(first.end(), y.coords.begin(), y.coords.end());
    FiniteSet J(pair_space, std::move(first));
    double worst = level_max(J);
    std::vector<double> out(d);
    for (int k = 1; k <= n; ++k) {
        std::vector<double> flat;
        flat.reserve(J.size() * family.arity() * 2 * d);
        for (const Map& m : family.maps()) {
            for (std::size_t r = 0; r < J.size(); ++r) {
                auto row = J.row(r);
                m.apply_span(space.factors(), row.subspan(0, d), out);
                flat.insert(flat.end(), out.begin(), out.end());
                m.apply_span(space.factors(), row.subspan(d, d), out);
                flat.insert(flat.end(), out.begin(), out.end());
            }
        }
        if (flat.size() / (2 * d) > word_cap)
            throw size_limit_error("word_metric: word image count exceeds the cap");
        J = FiniteSet(pair_space, std::move(flat));
        worst = std::max(worst, level_max(J));
    }
    return worst;
}

/// Pairwise n-metric cache over a fixed candidate list: per-candidate orbit
/// tables (orbit_set kind) or aligned word-image trajectories (word_max kind),
/// built once to depth n_max.
class CandidateMetrics {
public:
    CandidateMetrics(const Family& family, std::vector<Point> candidates, int n_max,
                     MetricKind kind, std::size_t orbit_cap = kDefaultOrbitCap,
                     std::size_t word_cap = kDefaultWordCap, unsigned workers = 1)
        : family_(family), candidates_(std::move(candidates)), n_max_(n_max), kind_(kind) {
        detail::require(!candidates_.empty(), "CandidateMetrics: need candidates");
        detail::require(n_max_ >= 0, "CandidateMetrics: n_max must be nonnegative");
        const std::size_t N = candidates_.size();
        if (kind_ == MetricKind::orbit_set) {
            tables_.resize(N);
            parallel_for(N, workers, [&](std::size_t i) {
                tables_[i] = orbit_set(family_, candidates_[i], n_max_, 0.0, orbit_cap);
            });
        } else {
            double words = std::pow(static_cast<double>(family.arity()),
                                    static_cast<double>(n_max_));
            if (words > static_cast<double>(word_cap))
                throw size_limit_error("CandidateMetrics: word count exceeds the cap");
            word_levels_.resize(N);
            parallel_for(N, workers, [&](std::size_t i) {
                word_levels_[i] = build_word_levels(candidates_[i]);
            });
        }
    }

    std::size_t count() const { return candidates_.size(); }
    int depth() const { return n_max_; }
    const std::vector<Point>& candidates() const { return candidates_; }
    MetricKind kind() const { return kind_; }

    /// d^n between candidates i and j; with a finite abort_at the result may
    /// be an early lower bound >= abort_at.
    double metric(std::size_t i, std::size_t j, int n, double abort_at = kNoAbort) const {
        detail::require(n <= n_max_, "CandidateMetrics: depth exceeds n_max");
        if (i == j)
            return 0.0;
        if (kind_ == MetricKind::orbit_set)
            return orbit_metric(tables_[i], tables_[j], n, abort_at);
        const std::size_t d = family_.space().dim();
        double worst = 0.0;
        for (int k = 0; k <= n; ++k) {
            const auto& va = word_levels_[i][static_cast<std::size_t>(k)];
            const auto& vb = word_levels_[j][static_cast<std::size_t>(k)];
            const std::size_t rows = va.size() / d;
            for (std::size_t r = 0; r < rows; ++r) {
                double dr = distance(family_.space(),
                                     std::span<const double>(va.data() + r * d, d),
                                     std::span<const double>(vb.data() + r * d, d));
                if (dr > worst) {
                    worst = dr;
                    if (worst >= abort_at)
                        return worst;
                }
            }
        }
        return worst;
    }

private:
    // level k holds the p^k word images of x, aligned by lexicographic word
    // index so trajectories of different candidates can be compared word by
    // word
    std::vector<std::vector<double>> build_word_levels(const Point& x) const {
        const std::size_t d = family_.space().dim();
        const std::size_t p = family_.arity();
        std::vector<std::vector<double>> levels;
        levels.reserve(static_cast<std::size_t>(n_max_) + 1);
        levels.push_back(x.coords);
        std::vector<double> out(d);
        for (int k = 1; k <= n_max_; ++k) {
            const auto& cur = levels.back();
            const std::size_t rows = cur.size() / d;
            std::vector<double> next(rows * p * d);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t j = 0; j < p; ++j) {
                    family_.maps()[j].apply_span(family_.space().factors(),
                                                 std::span<const double>(cur.data() + r * d, d),
                                                 out);
                    std::copy(out.begin(), out.end(), next.begin() + (r * p + j) * d);
                }
            }
            levels.push_back(std::move(next));
        }
        return levels;
    }

    const Family& family_;
    std::vector<Point> candidates_;
    int n_max_;
    MetricKind kind_;
    std::vector<OrbitTable> tables_;
    std::vector<std::vector<std::vector<double>>> word_levels_;
};

namespace detail {

/// Greedy maximal separated subset: scan candidates in order, keep each one
/// whose n-distance to every kept candidate is >= eps. The kept set is
/// maximal, hence simultaneously an (n,eps)-spanning set of the candidates.
template <typename Metric>
std::vector<std::size_t> greedy_separated_core(std::size_t count, const Metric& metric,
                                               double eps) {
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < count; ++c) {
        bool ok = true;
        for (std::size_t k : kept) {
            if (metric(c, k, eps) < eps) {
                ok = false;
                break;
            }
        }
        if (ok)
            kept.push_back(c);
    }
    return kept;
}

class Bitset {
public:
    explicit Bitset(std::size_t bits)
        : bits_(bits), blocks_((bits + 63) / 64, std::uint64_t{0}) {}

    void set(std::size_t i) { blocks_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    bool test(std::size_t i) const { return (blocks_[i >> 6] >> (i & 63)) & 1; }

    void set_all() {
        for (auto& b : blocks_)
            b = ~std::uint64_t{0};
        trim();
    }

    std::size_t count_and(const Bitset& o) const {
        std::size_t c = 0;
        for (std::size_t w = 0; w < blocks_.size(); ++w)
            c += static_cast<std::size_t>(std::popcount(blocks_[w] & o.blocks_[w]));
        return c;
    }

    void subtract(const Bitset& o) {
        for (std::size_t w = 0; w < blocks_.size(); ++w)
            blocks_[w] &= ~o.blocks_[w];
    }

    bool any() const {
        for (auto b : blocks_)
            if (b)
                return true;
        return false;
    }

private:
    void trim() {
        if (bits_ & 63)
            blocks_.back() &= (std::uint64_t{1} << (bits_ & 63)) - 1;
    }
    std::size_t bits_;
    std::vector<std::uint64_t> blocks_;
};

/// Greedy set cover: repeatedly pick the candidate whose eps-ball covers the
/// most uncovered candidates, lowest index on ties.
template <typename Metric>
std::vector<std::size_t> greedy_spanning_core(std::size_t count, const Metric& metric,
                                              double eps) {
    std::vector<Bitset> cover(count, Bitset(count));
    for (std::size_t i = 0; i < count; ++i) {
        cover[i].set(i);
        for (std::size_t j = i + 1; j < count; ++j) {
            if (metric(i, j, eps) < eps) {
                cover[i].set(j);
                cover[j].set(i);
            }
        }
    }
    Bitset uncovered(count);
    uncovered.set_all();
    std::vector<std::size_t> chosen;
    while (uncovered.any()) {
        std::size_t best = count, best_gain = 0;
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t gain = uncovered.count_and(cover[i]);
            if (gain > best_gain) {
                best_gain = gain;
                best = i;
            }
        }
        check_internal(best < count, "greedy cover made no progress");
        chosen.push_back(best);
        uncovered.subtract(cover[best]);
    }
    return chosen;
}

} // namespace detail

inline std::vector<std::size_t> greedy_separated_indices(const CandidateMetrics& cm, int n,
                                                         double eps) {
    return detail::greedy_separated_core(
        cm.count(),
        [&](std::size_t i, std::size_t j, double abort) { return cm.metric(i, j, n, abort); },
        eps);
}

inline std::vector<std::size_t> greedy_spanning_indices(const CandidateMetrics& cm, int n,
                                                        double eps) {
    return detail::greedy_spanning_core(
        cm.count(),
        [&](std::size_t i, std::size_t j, double abort) { return cm.metric(i, j, n, abort); },
        eps);
}

/// Spec-level greedy ops returning the selected points.
inline std::vector<Point> greedy_separated(const Family& family,
                                           const std::vector<Point>& candidates, int n,
                                           double eps, MetricKind kind,
                                           unsigned workers = 1) {
    CandidateMetrics cm(family, candidates, n, kind, kDefaultOrbitCap, kDefaultWordCap, workers);
    std::vector<Point> out;
    for (std::size_t i : greedy_separated_indices(cm, n, eps))
        out.push_back(candidates[i]);
    return out;
}

inline std::vector<Point> greedy_spanning(const Family& family,
                                          const std::vector<Point>& candidates, int n,
                                          double eps, MetricKind kind, unsigned workers = 1) {
    CandidateMetrics cm(family, candidates, n, kind, kDefaultOrbitCap, kDefaultWordCap, workers);
    std::vector<Point> out;
    for (std::size_t i : greedy_spanning_indices(cm, n, eps))
        out.push_back(candidates[i]);
    return out;
}

constexpr std::size_t kExactSearchLimit = 20;

/// Exhaustive minimum-spanning / maximum-separated counts over at most 20
/// candidates; the oracle the greedy algorithms are tested against.
inline CountResult exact_counts(const CandidateMetrics& cm, int n, double eps) {
    const std::size_t N = cm.count();
    if (N > kExactSearchLimit)
        throw size_limit_error("exact_counts: candidate count " + std::to_string(N) +
                               " exceeds the exhaustive-search limit of " +
                               std::to_string(kExactSearchLimit));
    std::vector<std::uint32_t> sep(N, 0), cov(N, 0);
    for (std::size_t i = 0; i < N; ++i) {
        cov[i] |= std::uint32_t{1} << i;
        for (std::size_t j = i + 1; j < N; ++j) {
            double d = cm.metric(i, j, n);
            if (d >= eps) {
                sep[i] |= std::uint32_t{1} << j;
                sep[j] |= std::uint32_t{1} << i;
            } else {
                cov[i] |= std::uint32_t{1} << j;
                cov[j] |= std::uint32_t{1} << i;
            }
        }
    }
    const std::uint32_t full = (N == 32) ? ~std::uint32_t{0}
                                         : ((std::uint32_t{1} << N) - 1);
    std::size_t best_sep = 0, best_span = N;
    for (std::uint32_t S = 1; S <= full; ++S) {
        bool separated = true;
        std::uint32_t covered = 0;
        for (std::uint32_t rest = S; rest;) {
            std::uint32_t bit = rest & (~rest + 1);
            std::size_t i = static_cast<std::size_t>(std::countr_zero(bit));
            if ((S & ~bit) & ~sep[i])
                separated = false;
            covered |= cov[i];
            rest ^= bit;
        }
        std::size_t size = static_cast<std::size_t>(std::popcount(S));
        if (separated)
            best_sep = std::max(best_sep, size);
        if (covered == full)
            best_span = std::min(best_span, size);
    }
    CountResult res;
    res.n = n;
    res.epsilon = eps;
    res.kind = cm.kind();
    res.method = CountMethod::exact;
    res.spanning_count = best_span;
    res.separated_count = best_sep;
    res.candidate_count = N;
    return res;
}

inline CountResult exact_counts(const Family& family, const std::vector<Point>& candidates,
                                int n, double eps, MetricKind kind) {
    if (candidates.size() > kExactSearchLimit)
        throw size_limit_error("exact_counts: candidate count exceeds the limit of " +
                               std::to_string(kExactSearchLimit));
    CandidateMetrics cm(family, candidates, n, kind);
    return exact_counts(cm, n, eps);
}

} // namespace orbitset

#endif
