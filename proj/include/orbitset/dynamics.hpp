#ifndef ORBITSET_DYNAMICS_HPP
#define ORBITSET_DYNAMICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbitset/pointset.hpp"

namespace orbitset {

constexpr std::size_t kDefaultOrbitCap = 2'000'000;
constexpr std::size_t kDefaultWordCap = 1'048'576;

/// A continuous self-map of a product space. Piecewise-linear maps act on an
/// interval factor, rotations and affine-mod-1 maps on a circle factor;
/// products, compositions and conjugations combine them.
class Map {
public:
    enum class Kind { pwl, rotation, affine_mod1, identity, product, composed, conjugated };

    /// Piecewise-linear interval map: breakpoints 0 = x0 < ... < xk = 1 with
    /// values in [0,1], linear between. Continuity is automatic.
    static Map pwl(std::vector<double> xs, std::vector<double> ys) {
        detail::require(xs.size() == ys.size() && xs.size() >= 2,
                        "pwl: need matching breakpoint/value lists of length >= 2");
        detail::require(xs.front() == 0.0 && xs.back() == 1.0,
                        "pwl: breakpoints must start at 0 and end at 1");
        for (std::size_t i = 1; i < xs.size(); ++i)
            detail::require(xs[i] > xs[i - 1], "pwl: breakpoints must be strictly increasing");
        for (double y : ys)
            detail::require(y >= 0.0 && y <= 1.0, "pwl: values must stay in [0,1]");
        Map m(Kind::pwl);
        m.px_ = std::move(xs);
        m.py_ = std::move(ys);
        return m;
    }

    static Map rotation(double alpha) {
        Map m(Kind::rotation);
        m.alpha_ = wrap_unit(alpha);
        return m;
    }

    static Map affine_mod1(int a, double c) {
        detail::require(a != 0, "affine_mod1: slope must be a nonzero integer");
        Map m(Kind::affine_mod1);
        m.a_ = a;
        m.c_ = c;
        return m;
    }

    static Map identity() { return Map(Kind::identity); }

    /// One map per factor block; factor widths must add up to the space.
    static Map product(std::vector<Map> factors) {
        detail::require(!factors.empty(), "product map: need at least one factor");
        Map m(Kind::product);
        m.children_ = std::move(factors);
        return m;
    }

    /// Composition applied first-to-last: composed({g, h}) is h after g.
    static Map composed(std::vector<Map> steps) {
        detail::require(!steps.empty(), "composed map: need at least one step");
        Map m(Kind::composed);
        m.children_ = std::move(steps);
        return m;
    }

    /// T o inner o T_inv; the caller supplies the explicit inverse of T.
    static Map conjugated(Map T, Map inner, Map T_inv) {
        Map m(Kind::conjugated);
        m.children_ = {std::move(T), std::move(inner), std::move(T_inv)};
        return m;
    }

    Kind kind() const { return kind_; }
    const std::vector<double>& pwl_x() const { return px_; }
    const std::vector<double>& pwl_y() const { return py_; }
    double rotation_angle() const { return alpha_; }
    int affine_slope() const { return a_; }
    double affine_offset() const { return c_; }
    const std::vector<Map>& children() const { return children_; }

    /// Number of factors the map occupies inside a product; identity
    /// occupies a single factor there (standalone it acts on any space).
    std::size_t width() const {
        switch (kind_) {
        case Kind::pwl:
        case Kind::rotation:
        case Kind::affine_mod1:
        case Kind::identity:
            return 1;
        case Kind::product: {
            std::size_t w = 0;
            for (const Map& ch : children_)
                w += ch.width();
            return w;
        }
        case Kind::composed:
        case Kind::conjugated: {
            std::size_t w = 1;
            for (const Map& ch : children_)
                w = std::max(w, ch.width());
            return w;
        }
        }
        return 1;
    }

    /// Finite Lipschitz bound with respect to the max-metric.
    double lipschitz() const {
        switch (kind_) {
        case Kind::pwl: {
            double L = 0.0;
            for (std::size_t i = 1; i < px_.size(); ++i)
                L = std::max(L, std::fabs((py_[i] - py_[i - 1]) / (px_[i] - px_[i - 1])));
            return L;
        }
        case Kind::rotation:
        case Kind::identity:
            return 1.0;
        case Kind::affine_mod1:
            return std::fabs(static_cast<double>(a_));
        case Kind::product: {
            double L = 0.0;
            for (const Map& ch : children_)
                L = std::max(L, ch.lipschitz());
            return L;
        }
        case Kind::composed:
        case Kind::conjugated: {
            double L = 1.0;
            for (const Map& ch : children_)
                L *= ch.lipschitz();
            return L;
        }
        }
        return 1.0;
    }

    void validate_on(std::span<const Factor> factors) const {
        switch (kind_) {
        case Kind::pwl:
            detail::require(factors.size() == 1 && factors[0] == Factor::interval,
                            "pwl map requires a single interval factor");
            return;
        case Kind::rotation:
        case Kind::affine_mod1:
            detail::require(factors.size() == 1 && factors[0] == Factor::circle,
                            "circle map requires a single circle factor");
            return;
        case Kind::identity:
            return;
        case Kind::product: {
            detail::require(width() == factors.size(),
                            "product map width does not match the space");
            std::size_t off = 0;
            for (const Map& ch : children_) {
                ch.validate_on(factors.subspan(off, ch.width()));
                off += ch.width();
            }
            return;
        }
        case Kind::composed:
        case Kind::conjugated:
            for (const Map& ch : children_)
                ch.validate_on(factors);
            return;
        }
    }

    void apply_span(std::span<const Factor> factors, std::span<const double> in,
                    std::span<double> out) const {
        switch (kind_) {
        case Kind::pwl:
            out[0] = eval_pwl(in[0]);
            return;
        case Kind::rotation:
            out[0] = wrap_unit(in[0] + alpha_);
            return;
        case Kind::affine_mod1:
            out[0] = wrap_unit(static_cast<double>(a_) * in[0] + c_);
            return;
        case Kind::identity:
            std::copy(in.begin(), in.end(), out.begin());
            return;
        case Kind::product: {
            std::size_t off = 0;
            for (const Map& ch : children_) {
                std::size_t w = ch.width();
                ch.apply_span(factors.subspan(off, w), in.subspan(off, w), out.subspan(off, w));
                off += w;
            }
            return;
        }
        case Kind::composed: {
            std::vector<double> tmp(in.begin(), in.end());
            std::vector<double> tmp2(in.size());
            for (const Map& ch : children_) {
                ch.apply_span(factors, tmp, tmp2);
                std::swap(tmp, tmp2);
            }
            std::copy(tmp.begin(), tmp.end(), out.begin());
            return;
        }
        case Kind::conjugated: {
            std::vector<double> tmp(in.size()), tmp2(in.size());
            children_[2].apply_span(factors, in, tmp);   // T_inv
            children_[1].apply_span(factors, tmp, tmp2); // inner
            children_[0].apply_span(factors, tmp2, out); // T
            return;
        }
        }
    }

    double eval_pwl(double x) const {
        auto it = std::upper_bound(px_.begin(), px_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - px_.begin());
        i = std::clamp<std::size_t>(i, 1, px_.size() - 1) - 1;
        double t = (x - px_[i]) / (px_[i + 1] - px_[i]);
        return std::clamp(py_[i] + t * (py_[i + 1] - py_[i]), 0.0, 1.0);
    }

    std::string describe() const {
        switch (kind_) {
        case Kind::pwl:
            return "pwl[" + std::to_string(px_.size()) + " breakpoints]";
        case Kind::rotation:
            return "rotation(" + std::to_string(alpha_) + ")";
        case Kind::affine_mod1:
            return "affine_mod1(" + std::to_string(a_) + "," + std::to_string(c_) + ")";
        case Kind::identity:
            return "identity";
        case Kind::product:
            return "product";
        case Kind::composed:
            return "composed";
        case Kind::conjugated:
            return "conjugated";
        }
        return "?";
    }

private:
    explicit Map(Kind k) : kind_(k) {}

    Kind kind_;
    std::vector<double> px_, py_;
    double alpha_ = 0.0;
    int a_ = 0;
    double c_ = 0.0;
    std::vector<Map> children_;
};

/// An ordered generating set of continuous self-maps of one space.
class Family {
public:
    Family(SpaceSpec space, std::vector<Map> maps, std::string name = "")
        : space_(std::move(space)), maps_(std::move(maps)), name_(std::move(name)) {
        detail::require(!maps_.empty(), "Family: need at least one map");
        for (const Map& m : maps_)
            m.validate_on(space_.factors());
    }

    const SpaceSpec& space() const { return space_; }
    const std::vector<Map>& maps() const { return maps_; }
    std::size_t arity() const { return maps_.size(); }
    const std::string& name() const { return name_; }

    double max_lipschitz() const {
        double L = 0.0;
        for (const Map& m : maps_)
            L = std::max(L, m.lipschitz());
        return L;
    }

private:
    SpaceSpec space_;
    std::vector<Map> maps_;
    std::string name_;
};

/// A composition word: letters index family members, applied first-to-last,
/// so {j0, j1, ..., jn-1} means f_{jn-1} o ... o f_{j0}. The empty word is
/// the identity.
struct Word {
    std::vector<int> letters;

    std::size_t length() const { return letters.size(); }

    std::string label() const { // 1-based digits, matching f1, f2, ...
        std::string s;
        s.reserve(letters.size());
        for (int j : letters)
            s += std::to_string(j + 1);
        return s.empty() ? "-" : s;
    }
};

inline Point apply(const Map& map, const SpaceSpec& space, const Point& x) {
    detail::require(x.dim() == space.dim(), "apply: point dimension mismatch");
    std::vector<double> out(x.dim());
    map.apply_span(space.factors(), x.coords, out);
    canonicalize(space, out);
    return Point(std::move(out));
}

inline Point word_apply(const Family& family, const Word& w, const Point& x) {
    Point p = x;
    for (int j : w.letters) {
        detail::require(j >= 0 && static_cast<std::size_t>(j) < family.arity(),
                        "word letter out of range");
        p = apply(family.maps()[j], family.space(), p);
    }
    return p;
}

/// All words of a given length in lexicographic order of their letters.
inline std::vector<Word> enumerate_words(std::size_t arity, std::size_t length,
                                         std::size_t word_cap = kDefaultWordCap) {
    double total = std::pow(static_cast<double>(arity), static_cast<double>(length));
    if (total > static_cast<double>(word_cap))
        throw size_limit_error("word enumeration: " + std::to_string(arity) + "^" +
                               std::to_string(length) + " exceeds the cap of " +
                               std::to_string(word_cap));
    std::vector<Word> words;
    words.reserve(static_cast<std::size_t>(total));
    Word w;
    w.letters.assign(length, 0);
    for (;;) {
        words.push_back(w);
        std::size_t i = length;
        while (i > 0) {
            --i;
            if (++w.letters[i] < static_cast<int>(arity))
                break;
            w.letters[i] = 0;
            if (i == 0)
                return words;
        }
        if (length == 0)
            return words;
    }
}

/// One-step image of a finite set under the whole family, deduplicated and
/// optionally coalesced with tolerance delta.
inline FiniteSet image_of_set(const Family& family, const FiniteSet& A, double delta = 0.0,
                              std::size_t cap = kDefaultOrbitCap) {
    detail::require(A.space() == family.space(), "image_of_set: set space mismatch");
    const std::size_t d = A.dim();
    const std::size_t raw = A.size() * family.arity();
    if (raw > 4 * cap + 16)
        throw size_limit_error("image_of_set: intermediate image of " + std::to_string(raw) +
                               " points exceeds the working cap");
    std::vector<double> flat;
    flat.reserve(raw * d);
    std::vector<double> out(d);
    for (const Map& m : family.maps()) {
        for (std::size_t i = 0; i < A.size(); ++i) {
            m.apply_span(family.space().factors(), A.row(i), out);
            flat.insert(flat.end(), out.begin(), out.end());
        }
    }
    FiniteSet img(family.space(), std::move(flat), A.dedup_tol());
    if (delta > 0.0)
        img = coalesce(img, delta);
    if (img.size() > cap)
        throw size_limit_error("image_of_set: " + std::to_string(img.size()) +
                               " points exceed the cap of " + std::to_string(cap) +
                               "; raise delta or lower n");
    return img;
}

/// The orbit sets F^0(x), ..., F^n(x) of a base point.
struct OrbitTable {
    Point base;
    std::vector<FiniteSet> sets; // sets[i] approximates F^i(base)
    double coalesce_error = 0.0; // Lipschitz-propagated bound, 0 in exact mode

    int depth() const { return static_cast<int>(sets.size()) - 1; }
};

inline OrbitTable orbit_set(const Family& family, const Point& x, int n, double delta = 0.0,
                            std::size_t cap = kDefaultOrbitCap) {
    detail::require(n >= 0, "orbit_set: n must be nonnegative");
    detail::require(delta >= 0.0, "orbit_set: delta must be nonnegative");
    OrbitTable table;
    table.base = x;
    table.sets.reserve(static_cast<std::size_t>(n) + 1);
    table.sets.push_back(FiniteSet::singleton(family.space(), x));
    const double L = family.max_lipschitz();
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
        table.sets.push_back(image_of_set(family, table.sets.back(), delta, cap));
        err = L * err + delta;
    }
    table.coalesce_error = err;
    return table;
}

/// The family of all arity^m compositions of m letters, in lexicographic
/// word order. m = 1 returns the family unchanged.
inline Family power_family(const Family& family, int m,
                           std::size_t word_cap = kDefaultWordCap) {
    detail::require(m >= 1, "power_family: exponent must be positive");
    if (m == 1)
        return family;
    std::vector<Word> words = enumerate_words(family.arity(), static_cast<std::size_t>(m), word_cap);
    std::vector<Map> maps;
    maps.reserve(words.size());
    for (const Word& w : words) {
        std::vector<Map> steps;
        steps.reserve(w.letters.size());
        for (int j : w.letters)
            steps.push_back(family.maps()[j]);
        maps.push_back(Map::composed(std::move(steps)));
    }
    return Family(family.space(), std::move(maps),
                  family.name().empty() ? "" : family.name() + "^" + std::to_string(m));
}

/// Product family {f x g : f in A, g in B} on the product space, ordered
/// with the first family's index varying slowest.
inline Family product_family(const Family& a, const Family& b) {
    SpaceSpec prod = SpaceSpec::product(a.space(), b.space());
    std::vector<Map> maps;
    maps.reserve(a.arity() * b.arity());
    for (const Map& fa : a.maps())
        for (const Map& fb : b.maps())
            maps.push_back(Map::product({fa, fb}));
    std::string name;
    if (!a.name().empty() || !b.name().empty())
        name = (a.name().empty() ? "f" : a.name()) + "x" + (b.name().empty() ? "g" : b.name());
    return Family(std::move(prod), std::move(maps), std::move(name));
}

namespace detail {

inline std::vector<Point> verification_grid(const SpaceSpec& space, std::size_t target_points) {
    double res = std::pow(1.0 / static_cast<double>(target_points),
                          1.0 / static_cast<double>(space.dim()));
    return grid(space, std::max(res, 1e-6), 4 * target_points + 64);
}

} // namespace detail

/// Conjugated family {T o f o T_inv}. T and T_inv are verified to be mutually
/// inverse on a sample grid to 1e-9, and the returned family satisfies the
/// set-valued intertwining T(F(x)) = F'(T(x)) on the same grid. When T, T_inv
/// and all members are interval piecewise-linear (or identity), the members
/// are composed into explicit piecewise-linear maps.
Family conjugate_family(const Family& family, const Map& T, const Map& T_inv,
                        double tol = 1e-9);

/// Family of inverses {f^-1}; members must be invertible (strictly increasing
/// piecewise-linear with full range, rotations, unit-slope affine maps,
/// identity, or products/compositions/conjugations of those).
Family invert_family(const Family& family);

namespace detail {

inline bool pwl_strictly_increasing(const Map& m) {
    const auto& y = m.pwl_y();
    for (std::size_t i = 1; i < y.size(); ++i)
        if (!(y[i] > y[i - 1]))
            return false;
    return true;
}

inline bool pwl_full_range_increasing(const Map& m) {
    return pwl_strictly_increasing(m) && m.pwl_y().front() == 0.0 && m.pwl_y().back() == 1.0;
}

inline Map invert_map(const Map& m, const std::string& label) {
    switch (m.kind()) {
    case Map::Kind::identity:
        return Map::identity();
    case Map::Kind::rotation:
        return Map::rotation(1.0 - m.rotation_angle());
    case Map::Kind::affine_mod1: {
        if (m.affine_slope() == 1)
            return Map::affine_mod1(1, -m.affine_offset());
        if (m.affine_slope() == -1)
            return Map::affine_mod1(-1, m.affine_offset());
        throw contract_violation(label + " (" + m.describe() + ") is not invertible");
    }
    case Map::Kind::pwl: {
        if (!pwl_full_range_increasing(m))
            throw contract_violation(label + " (" + m.describe() +
                                     ") is not an increasing interval homeomorphism");
        return Map::pwl(m.pwl_y(), m.pwl_x());
    }
    case Map::Kind::product: {
        std::vector<Map> inv;
        inv.reserve(m.children().size());
        for (const Map& ch : m.children())
            inv.push_back(invert_map(ch, label));
        return Map::product(std::move(inv));
    }
    case Map::Kind::composed: {
        std::vector<Map> inv;
        inv.reserve(m.children().size());
        for (auto it = m.children().rbegin(); it != m.children().rend(); ++it)
            inv.push_back(invert_map(*it, label));
        return Map::composed(std::move(inv));
    }
    case Map::Kind::conjugated:
        return Map::conjugated(m.children()[0], invert_map(m.children()[1], label),
                               m.children()[2]);
    }
    throw contract_violation(label + " is not invertible");
}

// Exact composition outer o inner of interval piecewise-linear maps: the
// breakpoints are inner's breakpoints plus the preimages of outer's
// breakpoints under each linear piece of inner.
inline Map pwl_compose(const Map& outer, const Map& inner) {
    const auto& ix = inner.pwl_x();
    const auto& iy = inner.pwl_y();
    std::vector<double> cuts(ix.begin(), ix.end());
    for (std::size_t s = 0; s + 1 < ix.size(); ++s) {
        double x0 = ix[s], x1 = ix[s + 1];
        double y0 = iy[s], y1 = iy[s + 1];
        if (y0 == y1)
            continue;
        for (double b : outer.pwl_x()) {
            double t = (b - y0) / (y1 - y0);
            if (t > 0.0 && t < 1.0)
                cuts.push_back(x0 + t * (x1 - x0));
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::fabs(a - b) < 1e-15; }),
               cuts.end());
    cuts.front() = 0.0;
    cuts.back() = 1.0;
    std::vector<double> vals;
    vals.reserve(cuts.size());
    for (double x : cuts)
        vals.push_back(outer.eval_pwl(inner.eval_pwl(x)));
    return Map::pwl(std::move(cuts), std::move(vals));
}

inline Map as_interval_pwl(const Map& m) {
    if (m.kind() == Map::Kind::pwl)
        return m;
    if (m.kind() == Map::Kind::identity)
        return Map::pwl({0.0, 1.0}, {0.0, 1.0});
    if (m.kind() == Map::Kind::composed) {
        Map acc = as_interval_pwl(m.children().front());
        for (std::size_t i = 1; i < m.children().size(); ++i)
            acc = pwl_compose(as_interval_pwl(m.children()[i]), acc);
        return acc;
    }
    if (m.kind() == Map::Kind::conjugated) {
        Map inner = pwl_compose(as_interval_pwl(m.children()[1]),
                                as_interval_pwl(m.children()[2]));
        return pwl_compose(as_interval_pwl(m.children()[0]), inner);
    }
    throw contract_violation("map cannot be flattened to an interval pwl: " + m.describe());
}

inline bool flattenable_to_pwl(const Map& m) {
    switch (m.kind()) {
    case Map::Kind::pwl:
    case Map::Kind::identity:
        return true;
    case Map::Kind::composed:
    case Map::Kind::conjugated:
        return std::all_of(m.children().begin(), m.children().end(), flattenable_to_pwl);
    default:
        return false;
    }
}

} // namespace detail

inline Family invert_family(const Family& family) {
    std::vector<Map> inv;
    inv.reserve(family.arity());
    for (std::size_t j = 0; j < family.arity(); ++j)
        inv.push_back(detail::invert_map(family.maps()[j], "map #" + std::to_string(j + 1)));
    return Family(family.space(), std::move(inv),
                  family.name().empty() ? "" : family.name() + "_inv");
}

inline Family conjugate_family(const Family& family, const Map& T, const Map& T_inv,
                               double tol) {
    const SpaceSpec& space = family.space();
    T.validate_on(space.factors());
    T_inv.validate_on(space.factors());

    auto sample = detail::verification_grid(space, 1000);
    for (const Point& x : sample) {
        Point back = apply(T, space, apply(T_inv, space, x));
        Point forth = apply(T_inv, space, apply(T, space, x));
        detail::require(distance(space, back, x) <= tol && distance(space, forth, x) <= tol,
                        "conjugate_family: T and T_inv are not mutually inverse on the "
                        "verification grid");
    }

    const bool flatten = space.dim() == 1 && space.factors()[0] == Factor::interval &&
                         detail::flattenable_to_pwl(T) && detail::flattenable_to_pwl(T_inv) &&
                         std::all_of(family.maps().begin(), family.maps().end(),
                                     detail::flattenable_to_pwl);
    std::vector<Map> conj;
    conj.reserve(family.arity());
    for (const Map& f : family.maps()) {
        Map c = Map::conjugated(T, f, T_inv);
        conj.push_back(flatten ? detail::as_interval_pwl(c) : std::move(c));
    }
    Family result(space, std::move(conj),
                  family.name().empty() ? "" : family.name() + "_conj");

    // set-valued intertwining T(F(x)) = F'(T(x)) on the verification grid
    for (const Point& x : sample) {
        std::vector<Point> lhs, rhs;
        Point tx = apply(T, space, x);
        for (std::size_t j = 0; j < family.arity(); ++j) {
            lhs.push_back(apply(T, space, apply(family.maps()[j], space, x)));
            rhs.push_back(apply(result.maps()[j], space, tx));
        }
        double gap = hausdorff(FiniteSet(space, lhs), FiniteSet(space, rhs));
        detail::check_internal(gap <= std::max(tol, 1e-9) * (1.0 + T.lipschitz()),
                               "conjugate_family: intertwining identity failed on grid");
    }
    return result;
}

/// Interval of reals; empty when hi < lo.
struct Interval {
    double lo = 0.0, hi = 0.0;
    bool empty() const { return hi < lo; }
    double mid() const { return 0.5 * (lo + hi); }
    double length() const { return empty() ? 0.0 : hi - lo; }
};

namespace detail {

inline double pwl_inverse_value(const Map& m, double y) {
    const auto& xs = m.pwl_x();
    const auto& ys = m.pwl_y();
    auto it = std::upper_bound(ys.begin(), ys.end(), y);
    std::size_t i = static_cast<std::size_t>(it - ys.begin());
    i = std::clamp<std::size_t>(i, 1, ys.size() - 1) - 1;
    double t = (y - ys[i]) / (ys[i + 1] - ys[i]);
    return std::clamp(xs[i] + t * (xs[i + 1] - xs[i]), 0.0, 1.0);
}

// Preimage of [lo,hi] under a strictly increasing interval homeomorphism
// built from pwl / identity / composed / conjugated pieces.
inline Interval pullback_interval(const Map& m, Interval target) {
    if (target.empty())
        return target;
    switch (m.kind()) {
    case Map::Kind::identity:
        return target;
    case Map::Kind::pwl: {
        detail::require(pwl_strictly_increasing(m),
                        "preimage: map is not strictly increasing piecewise-linear");
        double flo = m.pwl_y().front(), fhi = m.pwl_y().back();
        double lo = std::max(target.lo, flo), hi = std::min(target.hi, fhi);
        if (hi < lo)
            return Interval{1.0, 0.0};
        return Interval{pwl_inverse_value(m, lo), pwl_inverse_value(m, hi)};
    }
    case Map::Kind::composed: {
        // m = c_last o ... o c_first, so pull through the last step first
        Interval cur = target;
        for (auto it = m.children().rbegin(); it != m.children().rend(); ++it) {
            cur = pullback_interval(*it, cur);
            if (cur.empty())
                return cur;
        }
        return cur;
    }
    case Map::Kind::conjugated: {
        Interval cur = pullback_interval(m.children()[0], target);   // through T
        cur = pullback_interval(m.children()[1], cur);               // through inner
        return pullback_interval(m.children()[2], cur);              // through T_inv
    }
    default:
        throw contract_violation("preimage: unsupported map kind " + m.describe());
    }
}

} // namespace detail

/// Preimage g^{-1}([a,b]) of an interval under the composition named by the
/// word, pulled back one letter at a time. All touched family members must be
/// strictly increasing interval homeomorphisms; the result is then a single
/// interval (possibly empty).
inline std::vector<Interval> preimage_intervals(const Word& w, const Family& family,
                                                Interval target) {
    detail::require(family.space().dim() == 1 &&
                        family.space().factors()[0] == Factor::interval,
                    "preimage_intervals: family must act on a single interval");
    Interval cur = target;
    for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) {
        detail::require(*it >= 0 && static_cast<std::size_t>(*it) < family.arity(),
                        "preimage_intervals: word letter out of range");
        cur = detail::pullback_interval(family.maps()[*it], cur);
        if (cur.empty())
            return {};
    }
    if (cur.empty())
        return {};
    return {cur};
}

/// For every word of the given length, the midpoint of the word's preimage of
/// the target interval. Throws if any preimage is empty.
inline std::vector<std::pair<Word, Point>> witness_points(const Family& family, int n,
                                                          Interval target,
                                                          std::size_t word_cap = kDefaultWordCap) {
    detail::require(n >= 1, "witness_points: n must be positive");
    std::vector<std::pair<Word, Point>> out;
    auto words = enumerate_words(family.arity(), static_cast<std::size_t>(n), word_cap);
    out.reserve(words.size());
    for (const Word& w : words) {
        auto pre = preimage_intervals(w, family, target);
        if (pre.empty())
            throw contract_violation("witness_points: empty preimage for word " + w.label());
        out.emplace_back(w, Point{pre.front().mid()});
    }
    return out;
}

/// Build a piecewise-linear approximation of a scalar function on [0,1] by
/// sampling at equally spaced breakpoints (values clamped to [0,1]).
inline Map pwl_approx(const std::function<double(double)>& fn, std::size_t segments) {
    detail::require(segments >= 1, "pwl_approx: need at least one segment");
    std::vector<double> xs(segments + 1), ys(segments + 1);
    for (std::size_t i = 0; i <= segments; ++i) {
        xs[i] = static_cast<double>(i) / static_cast<double>(segments);
        ys[i] = std::clamp(fn(xs[i]), 0.0, 1.0);
    }
    xs.front() = 0.0;
    xs.back() = 1.0;
    return Map::pwl(std::move(xs), std::move(ys));
}

// -------------------------------------------------------------------------
// Built-in named families
// -------------------------------------------------------------------------

inline double golden_rotation_angle() { return (std::sqrt(5.0) - 1.0) / 2.0; }

inline Family make_preset(const std::string& name) {
    if (name == "example41") {
        Map f1 = Map::pwl({0.0, 1.0 / 3.0, 4.0 / 9.0, 1.0}, {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
        Map f2 = Map::pwl({0.0, 5.0 / 9.0, 2.0 / 3.0, 1.0}, {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
        return Family(SpaceSpec::interval(), {f1, f2}, "example41");
    }
    if (name == "rotation_id")
        return Family(SpaceSpec::circle(),
                      {Map::rotation(golden_rotation_angle()), Map::identity()}, "rotation_id");
    if (name == "doubling")
        return Family(SpaceSpec::circle(), {Map::affine_mod1(2, 0.0)}, "doubling");
    if (name == "tent")
        return Family(SpaceSpec::interval(), {Map::pwl({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0})},
                      "tent");
    if (name == "identity")
        return Family(SpaceSpec::interval(), {Map::identity()}, "identity");
    throw contract_violation("unknown preset family: " + name);
}

inline std::vector<std::pair<std::string, std::string>> preset_catalog() {
    return {
        {"example41", "two commuting-free interval homeomorphisms with a separating core"},
        {"rotation_id", "golden-mean circle rotation together with the identity"},
        {"doubling", "angle doubling on the circle"},
        {"tent", "tent map on the interval"},
        {"identity", "identity map on the interval"},
    };
}

/// The canonical witness target for the example41 preset.
inline Interval example41_target() { return Interval{1.0 / 3.0, 2.0 / 3.0}; }

} // namespace orbitset

#endif
