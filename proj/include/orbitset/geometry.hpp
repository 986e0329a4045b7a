#ifndef ORBITSET_GEOMETRY_HPP
#define ORBITSET_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "orbitset/errors.hpp"

namespace orbitset {

/// One factor of a compact product space: the unit interval [0,1] with the
/// Euclidean metric, or the circle R/Z with the arc metric.
enum class Factor : std::uint8_t { interval, circle };

inline std::string factor_name(Factor f) {
    return f == Factor::interval ? "interval" : "circle";
}

/// Wrap a circle coordinate to its canonical representative in [0,1).
inline double wrap_unit(double v) {
    double w = v - std::floor(v);
    if (w >= 1.0) // floor rounding can leave exactly 1.0
        w -= 1.0;
    return w;
}

/// Arc metric on R/Z for canonical coordinates a, b in [0,1).
inline double circle_dist(double a, double b) {
    double d = std::fabs(a - b);
    return std::min(d, 1.0 - d);
}

/// A compact metric space built as a finite product of interval and circle
/// factors, carrying the max-metric over factors.
class SpaceSpec {
public:
    explicit SpaceSpec(std::vector<Factor> factors) : factors_(std::move(factors)) {
        detail::require(!factors_.empty(), "SpaceSpec: at least one factor required");
    }

    static SpaceSpec interval() { return SpaceSpec({Factor::interval}); }
    static SpaceSpec circle() { return SpaceSpec({Factor::circle}); }

    const std::vector<Factor>& factors() const { return factors_; }
    std::size_t dim() const { return factors_.size(); }

    bool operator==(const SpaceSpec& o) const { return factors_ == o.factors_; }
    bool operator!=(const SpaceSpec& o) const { return !(*this == o); }

    /// Max-metric diameter: 1 if any interval factor is present, else 1/2.
    double diameter() const {
        double d = 0.0;
        for (Factor f : factors_)
            d = std::max(d, f == Factor::interval ? 1.0 : 0.5);
        return d;
    }

    /// Product of two spaces (factor lists concatenated).
    static SpaceSpec product(const SpaceSpec& a, const SpaceSpec& b) {
        std::vector<Factor> fs = a.factors_;
        fs.insert(fs.end(), b.factors_.begin(), b.factors_.end());
        return SpaceSpec(std::move(fs));
    }

private:
    std::vector<Factor> factors_;
};

/// A point of a product space; interval coordinates lie in [0,1], circle
/// coordinates are stored canonically in [0,1).
struct Point {
    std::vector<double> coords;

    Point() = default;
    explicit Point(std::vector<double> c) : coords(std::move(c)) {}
    Point(std::initializer_list<double> c) : coords(c) {}

    std::size_t dim() const { return coords.size(); }
    double operator[](std::size_t i) const { return coords[i]; }
};

/// Canonicalize a raw coordinate vector in place for the given space:
/// circle coordinates wrapped to [0,1), interval coordinates validated.
inline void canonicalize(const SpaceSpec& space, std::span<double> coords) {
    detail::require(coords.size() == space.dim(), "point dimension does not match space");
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (space.factors()[i] == Factor::circle) {
            coords[i] = wrap_unit(coords[i]);
        } else {
            // tolerate float dust from map evaluation, reject real escapes
            detail::require(coords[i] >= -1e-9 && coords[i] <= 1.0 + 1e-9,
                            "interval coordinate outside [0,1]");
            coords[i] = std::clamp(coords[i], 0.0, 1.0);
        }
    }
}

inline Point make_point(const SpaceSpec& space, std::vector<double> coords) {
    canonicalize(space, coords);
    return Point(std::move(coords));
}

/// Max-metric distance between two coordinate rows of the same space.
inline double distance(const SpaceSpec& space, std::span<const double> a,
                       std::span<const double> b) {
    detail::require(a.size() == space.dim() && b.size() == space.dim(),
                    "distance: point dimension does not match space");
    double d = 0.0;
    for (std::size_t i = 0; i < space.dim(); ++i) {
        double di = space.factors()[i] == Factor::interval ? std::fabs(a[i] - b[i])
                                                           : circle_dist(a[i], b[i]);
        if (di > d)
            d = di;
    }
    return d;
}

inline double distance(const SpaceSpec& space, const Point& a, const Point& b) {
    return distance(space, std::span<const double>(a.coords), std::span<const double>(b.coords));
}

/// Uniform lattice with spacing <= resolution in every factor, ordered
/// lexicographically by coordinates. Interval factors include both
/// endpoints; circle factors omit the duplicate at 1 == 0.
inline std::vector<Point> grid(const SpaceSpec& space, double resolution,
                               std::size_t cardinality_cap = 2'000'000) {
    detail::require(resolution > 0.0 && resolution <= 1.0, "grid: resolution must be in (0,1]");

    std::vector<std::vector<double>> axes;
    axes.reserve(space.dim());
    double total = 1.0;
    for (Factor f : space.factors()) {
        auto m = static_cast<std::size_t>(std::ceil(1.0 / resolution - 1e-12));
        std::size_t count = (f == Factor::interval) ? m + 1 : m;
        total *= static_cast<double>(count);
        if (total > static_cast<double>(cardinality_cap))
            throw size_limit_error("grid: " + std::to_string(total) +
                                   " points would exceed the cardinality cap of " +
                                   std::to_string(cardinality_cap));
        std::vector<double> axis(count);
        for (std::size_t k = 0; k < count; ++k)
            axis[k] = (f == Factor::interval && k == m) ? 1.0
                                                        : static_cast<double>(k) / static_cast<double>(m);
        axes.push_back(std::move(axis));
    }

    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(total));
    std::vector<std::size_t> idx(space.dim(), 0);
    for (;;) {
        std::vector<double> c(space.dim());
        for (std::size_t i = 0; i < space.dim(); ++i)
            c[i] = axes[i][idx[i]];
        pts.emplace_back(std::move(c));
        // odometer increment, last axis fastest, keeps lexicographic order
        std::size_t i = space.dim();
        while (i > 0) {
            --i;
            if (++idx[i] < axes[i].size())
                break;
            idx[i] = 0;
            if (i == 0)
                return pts;
        }
    }
}

} // namespace orbitset

#endif
