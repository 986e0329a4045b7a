#ifndef ORBITSET_CHAOS_HPP
#define ORBITSET_CHAOS_HPP

#include <string>
#include <vector>

#include "orbitset/dynamics.hpp"

namespace orbitset {

/// Orbit-set distance time series of one pair of base points:
/// d[i] = hausdorff(F^i(x), F^i(y)).
struct PairSeries {
    Point x, y;
    std::vector<double> d;

    std::size_t length() const { return d.size(); }
};

inline PairSeries pair_series(const Family& family, const Point& x, const Point& y, int n,
                              std::size_t orbit_cap = kDefaultOrbitCap) {
    detail::require(n >= 1, "pair_series: need at least one sample");
    PairSeries series;
    series.x = x;
    series.y = y;
    series.d.reserve(static_cast<std::size_t>(n));
    FiniteSet A = FiniteSet::singleton(family.space(), x);
    FiniteSet B = FiniteSet::singleton(family.space(), y);
    for (int i = 0; i < n; ++i) {
        series.d.push_back(hausdorff(A, B));
        if (i + 1 < n) {
            A = image_of_set(family, A, 0.0, orbit_cap);
            B = image_of_set(family, B, 0.0, orbit_cap);
        }
    }
    return series;
}

/// Window estimates of the lower/upper distributional functions on a t-grid:
/// phi^m is evaluated for every prefix length m in the final half of the
/// series and the pointwise extremes are recorded.
struct DistributionalProfile {
    std::vector<double> t_grid;
    std::vector<double> phi_lower, phi_upper;
};

constexpr std::size_t kProfileFloor = 100;

inline DistributionalProfile distributional_profile(const PairSeries& series,
                                                    std::vector<double> t_grid) {
    const std::size_t L = series.length();
    detail::require(L >= kProfileFloor,
                    "distributional_profile: series shorter than the estimation floor of " +
                        std::to_string(kProfileFloor));
    detail::require(!t_grid.empty(), "distributional_profile: empty t grid");
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        detail::require(t_grid[k] > 0.0, "distributional_profile: t values must be positive");
        if (k > 0)
            detail::require(t_grid[k] > t_grid[k - 1],
                            "distributional_profile: t grid must be increasing");
    }

    DistributionalProfile prof;
    prof.t_grid = std::move(t_grid);
    const std::size_t T = prof.t_grid.size();
    prof.phi_lower.assign(T, 1.0);
    prof.phi_upper.assign(T, 0.0);

    const std::size_t first_prefix = (L + 1) / 2;
    std::vector<std::size_t> below(T, 0); // below[k] = #{i < m : d[i] < t_k}
    for (std::size_t i = 0; i < L; ++i) {
        auto pos = std::upper_bound(prof.t_grid.begin(), prof.t_grid.end(), series.d[i]);
        for (std::size_t k = static_cast<std::size_t>(pos - prof.t_grid.begin()); k < T; ++k)
            ++below[k];
        const std::size_t m = i + 1;
        if (m < first_prefix)
            continue;
        for (std::size_t k = 0; k < T; ++k) {
            double phi = static_cast<double>(below[k]) / static_cast<double>(m);
            prof.phi_lower[k] = std::min(prof.phi_lower[k], phi);
            prof.phi_upper[k] = std::max(prof.phi_upper[k], phi);
        }
    }
    return prof;
}

struct ChaosThresholds {
    double theta_sep = 0.05;  // tail-max at or above this witnesses limsup > 0
    double eta_prox = 0.005;  // tail-min at or below this witnesses liminf = 0
    double dc_gap_tol = 0.1;  // phi_upper - phi_lower gap that counts as a DC gap
    double dc_zero_tol = 0.02;
};

enum class DcClass { none, hdc1, hdc2, dc3 };

inline std::string dc_label(DcClass c) {
    switch (c) {
    case DcClass::hdc1:
        return "HDC1";
    case DcClass::hdc2:
        return "HDC2";
    case DcClass::dc3:
        return "DC3";
    case DcClass::none:
        return "none";
    }
    return "none";
}

/// Finite-horizon classification; numerical evidence, not proof.
struct PairClassification {
    bool li_yorke = false;
    DcClass dc_class = DcClass::none;
    double tail_max = 0.0;
    double tail_min = 0.0;
    double max_phi_gap = 0.0;
};

inline PairClassification classify_pair(const PairSeries& series,
                                        const DistributionalProfile& profile,
                                        const std::vector<double>& tau_grid,
                                        const ChaosThresholds& thresholds = {}) {
    detail::require(thresholds.theta_sep > thresholds.eta_prox && thresholds.eta_prox > 0.0,
                    "classify_pair: need theta_sep > eta_prox > 0");
    const std::size_t L = series.length();
    detail::require(L >= 2, "classify_pair: series too short");

    PairClassification out;
    out.tail_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = L / 2; i < L; ++i) {
        out.tail_max = std::max(out.tail_max, series.d[i]);
        out.tail_min = std::min(out.tail_min, series.d[i]);
    }
    out.li_yorke = out.tail_max >= thresholds.theta_sep && out.tail_min <= thresholds.eta_prox;

    bool phi_star_one = true;
    for (std::size_t k = 0; k < profile.t_grid.size(); ++k) {
        out.max_phi_gap = std::max(out.max_phi_gap, profile.phi_upper[k] - profile.phi_lower[k]);
        if (profile.phi_upper[k] < 1.0 - 1e-12)
            phi_star_one = false;
    }

    // phi_lower at tau: step lookup at the largest grid point <= tau
    auto lower_at = [&](double tau) {
        auto it = std::upper_bound(profile.t_grid.begin(), profile.t_grid.end(), tau);
        if (it == profile.t_grid.begin())
            return 1.0; // tau below the grid: no evidence of a zero there
        return profile.phi_lower[static_cast<std::size_t>(it - profile.t_grid.begin()) - 1];
    };
    bool has_zero_tau = false;
    for (double tau : tau_grid)
        if (lower_at(tau) <= thresholds.dc_zero_tol)
            has_zero_tau = true;

    bool gap = out.max_phi_gap > thresholds.dc_gap_tol;
    if (phi_star_one && has_zero_tau)
        out.dc_class = DcClass::hdc1;
    else if (phi_star_one && gap)
        out.dc_class = DcClass::hdc2;
    else if (gap)
        out.dc_class = DcClass::dc3;
    else
        out.dc_class = DcClass::none;
    return out;
}

} // namespace orbitset

#endif
