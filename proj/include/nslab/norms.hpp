#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nslab/grid.hpp"
#include "nslab/trajectory.hpp"

namespace nslab {

/// Regularized homogeneous weight centered at `center`, optionally carried
/// along a straight space-time segment by `galilean_shift`:
///   weight(t, x) = (mu + |x - center - shift*t|^2)^(exponent/2).
/// exponent is the power of |y| in the mu -> 0 limit, so |x|^(-1/2) weights
/// have exponent = -1/2 and sigma_mu itself has exponent = -1.
struct WeightSpec {
    std::array<real, 3> center{0.0, 0.0, 0.0};
    real mu = 0.0;
    std::array<real, 3> galilean_shift{0.0, 0.0, 0.0};
    real exponent = -1.0;

    std::array<real, 3> moving_center(real t) const {
        return {center[0] + galilean_shift[0] * t, center[1] + galilean_shift[1] * t,
                center[2] + galilean_shift[2] * t};
    }
};

namespace detail {

// Exact average of |y|^a over the ball of volume `cell_volume` centered at
// the singularity; replaces the naive sample in the cell that contains it.
inline real singular_cell_average(real a, real cell_volume, int dims) {
    if (dims == 3) {
        const real r = std::cbrt(3.0 * cell_volume / (4.0 * M_PI));
        return 4.0 * M_PI * std::pow(r, 3.0 + a) / ((3.0 + a) * cell_volume);
    }
    const real r = std::sqrt(cell_volume / M_PI);
    return 2.0 * M_PI * std::pow(r, 2.0 + a) / ((2.0 + a) * cell_volume);
}

// Sum over cells of weight^wpower * |u|^upower * cellvol at time t.
inline real weighted_sum(const PhysicalField& u, real upower, const WeightSpec& w, real wpower,
                         real t) {
    const GridSpec& g = u.grid();
    const real eff = w.exponent * wpower; // radial exponent of weight^wpower at mu = 0
    if (w.mu < 0.0) throw std::invalid_argument("WeightSpec: mu must be >= 0");
    if (w.mu == 0.0 && eff <= -static_cast<real>(g.dims))
        throw std::invalid_argument("weighted norm: integral divergent at the singularity");

    const auto c = w.moving_center(t);
    // locate the cell containing the singular point (if inside the box)
    std::ptrdiff_t singular_site = -1;
    if (w.mu == 0.0 && w.exponent != 0.0) {
        bool inside = true;
        std::array<int, 3> idx{0, 0, 0};
        for (int d = 0; d < g.dims; ++d) {
            const real rel = (c[d] + g.box_half_width) / g.spacing();
            const int i = static_cast<int>(std::floor(rel + 0.5)); // nearest sample
            if (i < 0 || i >= g.n) {
                inside = false;
                break;
            }
            idx[d] = i;
        }
        if (inside) singular_site = static_cast<std::ptrdiff_t>(g.encode(idx[0], idx[1], idx[2]));
    }

    std::vector<real> terms;
    terms.reserve(u.sites());
    for (std::size_t s = 0; s < u.sites(); ++s) {
        real um = u.magnitude(s);
        real uval = upower == 2.0 ? um * um : std::pow(um, upower);
        real wval;
        if (static_cast<std::ptrdiff_t>(s) == singular_site) {
            wval = singular_cell_average(eff, g.cell_volume(), g.dims);
        } else {
            auto x = g.point(s);
            real y2 = 0.0;
            for (int d = 0; d < g.dims; ++d) y2 += (x[d] - c[d]) * (x[d] - c[d]);
            wval = std::pow(w.mu + y2, 0.5 * eff);
        }
        terms.push_back(wval * uval);
    }
    return pairwise_sum(terms) * g.cell_volume();
}

} // namespace detail

/// ( sum_cells weight^p |u|^p cellvol )^(1/p)
inline real weighted_lp_norm(const PhysicalField& u, real p, const WeightSpec& w, real t = 0.0) {
    if (p < 1.0) throw std::invalid_argument("weighted_lp_norm: p must be >= 1");
    return std::pow(detail::weighted_sum(u, p, w, p, t), 1.0 / p);
}

/// Plain L^p norm (pointwise Euclidean magnitude across components).
inline real lp_norm(const PhysicalField& u, real p) {
    WeightSpec flat;
    flat.exponent = 0.0;
    flat.mu = 1.0;
    return weighted_lp_norm(u, p, flat);
}

/// a_mu(t) = int sigma_mu(x - center - shift t) |v|^2 dx
inline real a_mu(const PhysicalField& v, const WeightSpec& w, real t = 0.0) {
    WeightSpec s = w;
    s.exponent = -1.0;
    return detail::weighted_sum(v, 2.0, s, 1.0, t);
}

/// Spatial L^q norm of one snapshot; q = inf uses the grid max.
inline real spatial_lq_norm(const PhysicalField& u, real q) {
    if (std::isinf(q)) return linf_norm(u);
    return lp_norm(u, q);
}

struct MixedNormSpec {
    real r = 2.0;                // time exponent, may be inf
    real q = 2.0;                // space exponent, may be inf
};

/// Admissibility per the couple condition 2 <= r < inf, 2/r + 3/q = 1.
inline bool is_admissible(real r, real q) {
    if (!(r >= 2.0) || std::isinf(r) || !(q > 0.0)) return false;
    const real three_over_q = std::isinf(q) ? 0.0 : 3.0 / q;
    return std::abs(2.0 / r + three_over_q - 1.0) <= 1e-12;
}

/// || u ||_{L^r_t L^q_x} by trapezoid in time over the stored snapshots.
inline real mixed_norm(const Trajectory& traj, const MixedNormSpec& spec) {
    if (traj.empty()) throw std::invalid_argument("mixed_norm: empty trajectory");
    std::vector<real> snorm(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i)
        snorm[i] = spatial_lq_norm(traj.snapshot(i), spec.q);
    if (std::isinf(spec.r)) {
        real worst = 0.0;
        for (real v : snorm) worst = std::max(worst, v);
        return worst;
    }
    if (!(spec.r >= 1.0)) throw std::invalid_argument("mixed_norm: r must be >= 1");
    real acc = 0.0;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const real dt = traj.times()[i + 1] - traj.times()[i];
        acc += 0.5 * dt * (std::pow(snorm[i], spec.r) + std::pow(snorm[i + 1], spec.r));
    }
    return std::pow(acc, 1.0 / spec.r);
}

/// int_0^T ||.||^r dt, the "size" associated with a mixed norm.
inline real mixed_norm_power(const Trajectory& traj, const MixedNormSpec& spec) {
    return std::pow(mixed_norm(traj, spec), spec.r);
}

namespace detail {

// sigma_mu-weighted enstrophy of snapshot i with the weight center moved to
// center + shift * t_i.
inline real weighted_enstrophy(const Trajectory& traj, std::size_t i, const WeightSpec& w) {
    PhysicalField grad = traj.gradient(i);
    WeightSpec s = w;
    s.exponent = -1.0;
    return weighted_sum(grad, 2.0, s, 1.0, traj.times()[i]);
}

// Clipped trapezoid of samples f(t_i) over [t0, t1]; endpoint values inside
// a snapshot interval are linearly interpolated.
inline real clipped_trapezoid(const std::vector<real>& times, const std::vector<real>& f, real t0,
                              real t1) {
    real acc = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        const real a = times[i], b = times[i + 1];
        const real lo = std::max(a, t0), hi = std::min(b, t1);
        if (hi <= lo) continue;
        const real fa = f[i] + (f[i + 1] - f[i]) * ((lo - a) / (b - a));
        const real fb = f[i] + (f[i + 1] - f[i]) * ((hi - a) / (b - a));
        acc += 0.5 * (hi - lo) * (fa + fb);
    }
    return acc;
}

} // namespace detail

/// B_mu over [t0, t1]: trapezoid in time of the sigma_mu-weighted enstrophy
/// with moving center.
inline real b_mu(const Trajectory& traj, const WeightSpec& w, real t0, real t1) {
    if (traj.empty()) throw std::invalid_argument("b_mu: empty trajectory");
    if (t0 > t1 || t0 < traj.t_begin() - 1e-12 || t1 > traj.t_end() + 1e-12)
        throw std::invalid_argument("b_mu: interval outside trajectory span");
    if (t0 == t1) return 0.0;
    std::vector<real> f(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i)
        f[i] = detail::weighted_enstrophy(traj, i, w);
    return detail::clipped_trapezoid(traj.times(), f, t0, t1);
}

/// Cumulative B_mu evaluated at every snapshot time (prefix trapezoid).
inline std::vector<real> b_mu_cumulative(const Trajectory& traj, const WeightSpec& w) {
    if (traj.empty()) throw std::invalid_argument("b_mu_cumulative: empty trajectory");
    std::vector<real> f(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i)
        f[i] = detail::weighted_enstrophy(traj, i, w);
    std::vector<real> cum(traj.size(), 0.0);
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const real dt = traj.times()[i] - traj.times()[i - 1];
        cum[i] = cum[i - 1] + 0.5 * dt * (f[i - 1] + f[i]);
    }
    return cum;
}

/// theta_1(p) = ((p-2)/(3-p))^(1-p/3) on 2 < p < 3.
inline real theta1(real p) {
    if (!(p > 2.0 && p < 3.0)) throw std::invalid_argument("theta1: p must be in (2, 3)");
    return std::pow((p - 2.0) / (3.0 - p), 1.0 - p / 3.0);
}

/// theta_2(p) = ((p-2)/(3-p))^(1-p/2) on 2 < p < 3.
inline real theta2(real p) {
    if (!(p > 2.0 && p < 3.0)) throw std::invalid_argument("theta2: p must be in (2, 3)");
    return std::pow((p - 2.0) / (3.0 - p), 1.0 - p / 2.0);
}

/// The exponential smallness gates. The delta constants are configuration
/// values; only the shape of each threshold is fixed.
enum class ThresholdKind {
    Perturbation, // delta e^{-K/delta},                 size = K
    SmallData,    // delta e^{-M^2/delta},               size = M
    Axisym,       // delta e^{-(1 + h^{16/3})/delta},    size = ||w0||_{H^2}
    Beltrami,     // delta e^{-s/delta},                 size = lambda^-2 ||w0||_inf^2
    TwoD          // delta e^{-K2/delta},                size = ||W||^2_{L^2_t L^inf}
};

inline real smallness_threshold(ThresholdKind kind, real delta, real size) {
    if (!(delta > 0.0)) throw std::invalid_argument("smallness_threshold: delta must be positive");
    real g = size;
    switch (kind) {
        case ThresholdKind::Perturbation:
        case ThresholdKind::Beltrami:
        case ThresholdKind::TwoD:
            g = size;
            break;
        case ThresholdKind::SmallData:
            g = size * size;
            break;
        case ThresholdKind::Axisym:
            g = 1.0 + std::pow(size, 16.0 / 3.0);
            break;
    }
    return delta * std::exp(-g / delta);
}

/// H^s (inhomogeneous) or Hdot^s norm via spectral multipliers.
inline real sobolev_norm(const PhysicalField& u, real s, bool homogeneous = false) {
    if (s < 0.0) throw std::invalid_argument("sobolev_norm: s must be >= 0");
    auto F = to_spectral(u);
    const GridSpec& g = u.grid();
    real box = 1.0;
    for (int d = 0; d < g.dims; ++d) box *= 2.0 * g.box_half_width;
    std::vector<real> terms;
    terms.reserve(F.modes() * F.components());
    for (int c = 0; c < F.components(); ++c) {
        auto data = F.data(c);
        detail::for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool) {
            const real k2 = kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2];
            const real mult = homogeneous ? std::pow(k2, s) : std::pow(1.0 + k2, s);
            terms.push_back(mult * std::norm(data[m]));
        });
    }
    return std::sqrt(box * detail::pairwise_sum(terms));
}

} // namespace nslab
