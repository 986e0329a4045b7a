#ifndef ORBITSET_POINTSET_HPP
#define ORBITSET_POINTSET_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "orbitset/geometry.hpp"

namespace orbitset {

constexpr double kDefaultDedupTol = 1e-12;
constexpr double kNoAbort = std::numeric_limits<double>::infinity();

/// A sorted, deduplicated, nonempty finite set of points standing in for an
/// element of the hyperspace K(X). Points are stored as a flat row-major
/// buffer in lexicographic order; no two stored points are within dedup_tol
/// of each other in the space metric.
class FiniteSet {
public:
    FiniteSet(SpaceSpec space, std::vector<double> flat_coords,
              double dedup_tol = kDefaultDedupTol)
        : space_(std::move(space)), dedup_tol_(dedup_tol) {
        detail::require(dedup_tol_ >= 0.0, "FiniteSet: dedup_tol must be nonnegative");
        const std::size_t d = space_.dim();
        detail::require(!flat_coords.empty() && flat_coords.size() % d == 0,
                        "FiniteSet: must be nonempty with dim-aligned coordinates");
        for (std::size_t r = 0; r * d < flat_coords.size(); ++r)
            canonicalize(space_, std::span<double>(flat_coords.data() + r * d, d));
        sort_rows(flat_coords, d);
        data_ = dedup_rows(std::move(flat_coords), d, dedup_tol_);
    }

    FiniteSet(const SpaceSpec& space, const std::vector<Point>& pts,
              double dedup_tol = kDefaultDedupTol)
        : FiniteSet(space, flatten(space, pts), dedup_tol) {}

    static FiniteSet singleton(const SpaceSpec& space, const Point& p,
                               double dedup_tol = kDefaultDedupTol) {
        return FiniteSet(space, p.coords, dedup_tol);
    }

    const SpaceSpec& space() const { return space_; }
    double dedup_tol() const { return dedup_tol_; }
    std::size_t dim() const { return space_.dim(); }
    std::size_t size() const { return data_.size() / space_.dim(); }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * space_.dim(), space_.dim()};
    }
    Point point(std::size_t i) const {
        auto r = row(i);
        return Point(std::vector<double>(r.begin(), r.end()));
    }
    const std::vector<double>& flat() const { return data_; }

    std::vector<Point> points() const {
        std::vector<Point> pts;
        pts.reserve(size());
        for (std::size_t i = 0; i < size(); ++i)
            pts.push_back(point(i));
        return pts;
    }

private:
    static std::vector<double> flatten(const SpaceSpec& space, const std::vector<Point>& pts) {
        std::vector<double> flat;
        flat.reserve(pts.size() * space.dim());
        for (const Point& p : pts) {
            detail::require(p.dim() == space.dim(), "FiniteSet: point dimension mismatch");
            flat.insert(flat.end(), p.coords.begin(), p.coords.end());
        }
        return flat;
    }

    static void sort_rows(std::vector<double>& flat, std::size_t d) {
        const std::size_t n = flat.size() / d;
        if (d == 1) {
            std::sort(flat.begin(), flat.end());
            return;
        }
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
            return std::lexicographical_compare(flat.begin() + a * d, flat.begin() + (a + 1) * d,
                                                flat.begin() + b * d, flat.begin() + (b + 1) * d);
        });
        std::vector<double> sorted(flat.size());
        for (std::size_t i = 0; i < n; ++i)
            std::copy_n(flat.begin() + perm[i] * d, d, sorted.begin() + i * d);
        flat = std::move(sorted);
    }

    // Greedy left-to-right absorption over the sorted rows: a row is dropped
    // when it lies within tol of an already kept row, so the first
    // (lexicographically smallest) representative of each cluster survives.
    std::vector<double> dedup_rows(std::vector<double> flat, std::size_t d, double tol) const {
        if (tol <= 0.0)
            return flat;
        const std::size_t n = flat.size() / d;
        std::vector<double> kept;
        kept.reserve(flat.size());
        auto kept_rows = [&] { return kept.size() / d; };
        for (std::size_t i = 0; i < n; ++i) {
            std::span<const double> p(flat.data() + i * d, d);
            bool absorbed = false;
            for (std::size_t k = kept_rows(); k-- > 0;) {
                std::span<const double> q(kept.data() + k * d, d);
                if (p[0] - q[0] > tol)
                    break; // earlier kept rows only get farther in coord 0; seam handled below
                if (distance(space_, p, q) <= tol) {
                    absorbed = true;
                    break;
                }
            }
            if (!absorbed)
                kept.insert(kept.end(), p.begin(), p.end());
        }
        // circle seam: rows near 1 may duplicate rows near 0
        if (space_.factors()[0] == Factor::circle && kept_rows() > 1) {
            std::vector<double> pruned;
            pruned.reserve(kept.size());
            const std::size_t kn = kept_rows();
            for (std::size_t i = 0; i < kn; ++i) {
                std::span<const double> p(kept.data() + i * d, d);
                bool dup = false;
                if (p[0] >= 1.0 - tol) {
                    for (std::size_t j = 0; j < kn && kept[j * d] <= tol; ++j) {
                        std::span<const double> q(kept.data() + j * d, d);
                        if (distance(space_, p, q) <= tol) {
                            dup = true;
                            break;
                        }
                    }
                }
                if (!dup)
                    pruned.insert(pruned.end(), p.begin(), p.end());
            }
            kept = std::move(pruned);
        }
        return kept;
    }

    SpaceSpec space_;
    std::vector<double> data_;
    double dedup_tol_;
};

namespace detail {

// Directed distance for a 1-D interval factor: both arrays sorted ascending,
// nearest neighbour by a single merge pass. Returns early once the running
// maximum reaches abort_at (the result is then a lower bound >= abort_at).
inline double directed_sorted_interval(std::span<const double> a, std::span<const double> b,
                                       double abort_at) {
    double worst = 0.0;
    std::size_t j = 0;
    for (double x : a) {
        while (j + 1 < b.size() && b[j + 1] <= x)
            ++j;
        double best = std::fabs(x - b[j]);
        if (j + 1 < b.size() && b[j + 1] > x)
            best = std::min(best, b[j + 1] - x);
        if (best > worst) {
            worst = best;
            if (worst >= abort_at)
                return worst;
        }
    }
    return worst;
}

// Same for a circle factor: linear neighbours plus the two seam candidates.
inline double directed_sorted_circle(std::span<const double> a, std::span<const double> b,
                                     double abort_at) {
    double worst = 0.0;
    std::size_t j = 0;
    const double front = b.front(), back = b.back();
    for (double x : a) {
        while (j + 1 < b.size() && b[j + 1] <= x)
            ++j;
        double best = circle_dist(x, b[j]);
        if (j + 1 < b.size())
            best = std::min(best, circle_dist(x, b[j + 1]));
        best = std::min({best, circle_dist(x, front), circle_dist(x, back)});
        if (best > worst) {
            worst = best;
            if (worst >= abort_at)
                return worst;
        }
    }
    return worst;
}

// General-space directed distance, all pairs. The inner loop stops once a
// point's nearest neighbour is already closer than the running maximum,
// which cannot change the result.
inline double directed_all_pairs(const SpaceSpec& space, const FiniteSet& A, const FiniteSet& B,
                                 double abort_at) {
    double worst = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        auto p = A.row(i);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < B.size(); ++j) {
            double dij = distance(space, p, B.row(j));
            if (dij < best) {
                best = dij;
                if (best <= worst)
                    break;
            }
        }
        if (best > worst) {
            worst = best;
            if (worst >= abort_at)
                return worst;
        }
    }
    return worst;
}

// Reference implementation used as the correctness oracle for the sorted
// fast paths: plain quadratic max-min with no shortcuts.
inline double directed_bruteforce(const FiniteSet& A, const FiniteSet& B) {
    double worst = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < B.size(); ++j)
            best = std::min(best, distance(A.space(), A.row(i), B.row(j)));
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace detail

/// Directed Hausdorff distance max_{x in A} min_{y in B} d(x,y).
/// If abort_at is finite the computation may stop early once the result is
/// known to be >= abort_at; the returned value is then a lower bound.
inline double directed_dist(const FiniteSet& A, const FiniteSet& B, double abort_at = kNoAbort) {
    detail::require(A.space() == B.space(), "directed_dist: space mismatch");
    if (A.dim() == 1) {
        if (A.space().factors()[0] == Factor::interval)
            return detail::directed_sorted_interval(A.flat(), B.flat(), abort_at);
        return detail::directed_sorted_circle(A.flat(), B.flat(), abort_at);
    }
    return detail::directed_all_pairs(A.space(), A, B, abort_at);
}

/// Hausdorff distance max{dist(A,B), dist(B,A)}; same abort contract as
/// directed_dist.
inline double hausdorff(const FiniteSet& A, const FiniteSet& B, double abort_at = kNoAbort) {
    double d1 = directed_dist(A, B, abort_at);
    if (d1 >= abort_at)
        return d1;
    return std::max(d1, directed_dist(B, A, abort_at));
}

/// Greedy left-to-right coalescing: returns a subset P of A's support with
/// hausdorff(P, A) <= delta, keeping the lexicographically first
/// representative of each absorbed cluster. delta = 0 returns A unchanged.
inline FiniteSet coalesce(const FiniteSet& A, double delta) {
    detail::require(delta >= 0.0, "coalesce: delta must be nonnegative");
    if (delta == 0.0)
        return A;
    const std::size_t d = A.dim();
    const bool circle0 = A.space().factors()[0] == Factor::circle;
    std::vector<double> kept;
    kept.reserve(A.flat().size());
    auto kept_rows = [&] { return kept.size() / d; };
    for (std::size_t i = 0; i < A.size(); ++i) {
        auto p = A.row(i);
        bool absorbed = false;
        for (std::size_t k = kept_rows(); k-- > 0;) {
            std::span<const double> q(kept.data() + k * d, d);
            double gap0 = p[0] - q[0];
            if (gap0 > delta) {
                if (!circle0 || p[0] < 1.0 - delta)
                    break; // no seam partner possible either
                if (1.0 - gap0 > delta)
                    continue; // between the linear window and the seam window
            }
            if (distance(A.space(), p, q) <= delta) {
                absorbed = true;
                break;
            }
        }
        if (!absorbed)
            kept.insert(kept.end(), p.begin(), p.end());
    }
    return FiniteSet(A.space(), std::move(kept), A.dedup_tol());
}

/// Cartesian product of two finite sets as a set in the product space.
inline FiniteSet product_set(const FiniteSet& A, const FiniteSet& B) {
    SpaceSpec prod = SpaceSpec::product(A.space(), B.space());
    std::vector<double> flat;
    flat.reserve(A.size() * B.size() * prod.dim());
    for (std::size_t i = 0; i < A.size(); ++i) {
        auto ra = A.row(i);
        for (std::size_t j = 0; j < B.size(); ++j) {
            auto rb = B.row(j);
            flat.insert(flat.end(), ra.begin(), ra.end());
            flat.insert(flat.end(), rb.begin(), rb.end());
        }
    }
    return FiniteSet(std::move(prod), std::move(flat),
                     std::max(A.dedup_tol(), B.dedup_tol()));
}

} // namespace orbitset

#endif
