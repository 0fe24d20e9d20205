#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "nslab/grid.hpp"

namespace nslab {

/// ABC-family Beltrami data. On [-L, L)^3 the trigonometric arguments are
/// scaled by pi*harmonic/L so the field stays periodic; that scale is the
/// curl eigenvalue.
struct BeltramiSpec {
    real A = 1.0;
    real B = 1.0;
    real C = 1.0;
    int harmonic = 1;

    real eigenvalue(real box_half_width) const {
        return M_PI * harmonic / box_half_width;
    }
};

inline PhysicalField make_abc_flow(const BeltramiSpec& spec, const GridSpec& grid) {
    if (grid.dims != 3) throw std::invalid_argument("make_abc_flow: dims must be 3");
    if (spec.harmonic < 1) throw std::invalid_argument("make_abc_flow: harmonic must be >= 1");
    const real lam = spec.eigenvalue(grid.box_half_width);
    PhysicalField w(grid, 3);
    for (std::size_t s = 0; s < w.sites(); ++s) {
        auto x = grid.point(s);
        w(0, s) = spec.A * std::sin(lam * x[2]) + spec.C * std::cos(lam * x[1]);
        w(1, s) = spec.B * std::sin(lam * x[0]) + spec.A * std::cos(lam * x[2]);
        w(2, s) = spec.C * std::sin(lam * x[1]) + spec.B * std::cos(lam * x[0]);
    }
    return w;
}

/// Divergence-free bump built as the spectral curl of a Gaussian vector
/// potential translated by shift * direction. The Gaussian tail is below
/// 1e-14 outside support_radius(), which must stay inside the box.
struct BumpSpec {
    std::array<real, 3> base_center{0.0, 0.0, 0.0};
    std::array<real, 3> direction{1.0, 0.0, 0.0};
    real shift = 0.0; // K >= 0
    real amplitude = 1.0;
    real width = 0.5;
    std::array<real, 3> potential_axis{0.0, 0.0, 1.0};

    real support_radius() const { return 8.0 * width; }

    std::array<real, 3> center() const {
        std::array<real, 3> c = base_center;
        const real norm = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] +
                                    direction[2] * direction[2]);
        if (!(norm > 0.0)) throw std::invalid_argument("BumpSpec: zero direction");
        for (int d = 0; d < 3; ++d) c[d] += shift * direction[d] / norm;
        return c;
    }
};

inline PhysicalField make_bump(const BumpSpec& spec, const GridSpec& grid) {
    if (grid.dims != 3) throw std::invalid_argument("make_bump: dims must be 3");
    if (spec.shift < 0.0) throw std::invalid_argument("make_bump: shift must be >= 0");
    if (!(spec.width > 0.0)) throw std::invalid_argument("make_bump: width must be positive");
    const auto c = spec.center();
    const real rs = spec.support_radius();
    for (int d = 0; d < 3; ++d) {
        if (std::abs(c[d]) + rs > grid.box_half_width)
            throw std::invalid_argument("make_bump: translated support overflows the box");
    }
    PhysicalField pot(grid, 3);
    const real s2 = 2.0 * spec.width * spec.width;
    for (std::size_t s = 0; s < pot.sites(); ++s) {
        auto x = grid.point(s);
        const real r2 = (x[0] - c[0]) * (x[0] - c[0]) + (x[1] - c[1]) * (x[1] - c[1]) +
                        (x[2] - c[2]) * (x[2] - c[2]);
        const real a = spec.amplitude * std::exp(-r2 / s2);
        for (int d = 0; d < 3; ++d) pot(d, s) = a * spec.potential_axis[d];
    }
    return to_physical(curl(to_spectral(pot)));
}

/// Axisymmetric zero-swirl data: curl of A_theta(r, x3) e_theta with
/// A_theta = amplitude * r * exp(-(r^2 + x3^2)/width^2). The potential is
/// written as g(r^2, x3) (-x2, x1, 0), smooth across the axis, and tapered
/// to zero (C^2) at radius 0.9 L to avoid wrap-around.
struct AxisymSpec {
    real amplitude = 1.0;
    real width = 1.0;
};

struct AxisymField {
    PhysicalField field;
    bool decay_warning = false;
};

namespace detail {

// Smooth taper: 1 on [0, 0.7 R], 0 on [R, inf). The blend is the standard
// exponential bump, so all derivatives vanish at both junctions and the
// taper adds no spectral kinks.
inline real radial_taper(real rho, real cutoff) {
    const real lo = 0.7 * cutoff;
    if (rho <= lo) return 1.0;
    if (rho >= cutoff) return 0.0;
    const real t = (rho - lo) / (cutoff - lo);
    auto f = [](real s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
    return f(1.0 - t) / (f(1.0 - t) + f(t));
}

} // namespace detail

inline AxisymField make_axisym_zero_swirl(const AxisymSpec& spec, const GridSpec& grid) {
    if (grid.dims != 3) throw std::invalid_argument("make_axisym_zero_swirl: dims must be 3");
    if (!(spec.width > 0.0)) throw std::invalid_argument("make_axisym_zero_swirl: width must be positive");
    const real cutoff = 0.9 * grid.box_half_width;
    const real w2 = spec.width * spec.width;

    PhysicalField pot(grid, 3);
    for (std::size_t s = 0; s < pot.sites(); ++s) {
        auto x = grid.point(s);
        const real r2 = x[0] * x[0] + x[1] * x[1];
        const real rho = std::sqrt(r2 + x[2] * x[2]);
        const real gval =
            spec.amplitude * std::exp(-(r2 + x[2] * x[2]) / w2) * detail::radial_taper(rho, cutoff);
        pot(0, s) = -x[1] * gval;
        pot(1, s) = x[0] * gval;
        pot(2, s) = 0.0;
    }

    AxisymField out{to_physical(curl(to_spectral(pot))), false};
    // flag profiles that have not decayed before the taper begins
    const real at_taper = std::exp(-(0.7 * cutoff) * (0.7 * cutoff) / w2);
    if (at_taper > 1e-8) out.decay_warning = true;
    return out;
}

/// Largest azimuthal (swirl) component magnitude; diagnostics for the
/// axisymmetric generator and for structure-preservation checks.
inline real max_swirl(const PhysicalField& u) {
    if (u.grid().dims != 3 || !u.is_vector())
        throw std::invalid_argument("max_swirl: 3D vector field expected");
    const GridSpec& g = u.grid();
    real worst = 0.0;
    for (std::size_t s = 0; s < u.sites(); ++s) {
        auto x = g.point(s);
        const real r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
        if (r < 0.5 * g.spacing()) continue;
        const real sw = (-x[1] * u(0, s) + x[0] * u(1, s)) / r;
        worst = std::max(worst, std::abs(sw));
    }
    return worst;
}

/// W(x1, x2) -> (W1, W2, 0), constant along x3.
inline PhysicalField extend_2d_to_3d(const PhysicalField& W, const GridSpec& grid3) {
    if (W.grid().dims != 2 || W.components() != 2)
        throw std::invalid_argument("extend_2d_to_3d: 2D two-component field expected");
    if (grid3.dims != 3 || grid3.n != W.grid().n ||
        grid3.box_half_width != W.grid().box_half_width)
        throw std::invalid_argument("extend_2d_to_3d: grid mismatch on axes 1-2");
    PhysicalField out(grid3, 3);
    const int n = grid3.n;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const std::size_t s2 = W.grid().encode(i, j);
            for (int k = 0; k < n; ++k) {
                const std::size_t s3 = grid3.encode(i, j, k);
                out(0, s3) = W(0, s2);
                out(1, s3) = W(1, s2);
            }
        }
    }
    return out;
}

/// Decayed Beltrami snapshot e^{-lambda^2 t} w0.
inline PhysicalField beltrami_reference(const PhysicalField& w0, real lambda, real t) {
    if (lambda == 0.0) throw std::invalid_argument("beltrami_reference: lambda must be nonzero");
    PhysicalField w = w0;
    const real factor = std::exp(-lambda * lambda * t);
    for (real& v : w.raw()) v *= factor;
    return w;
}

/// Size of the Beltrami reference trajectory for the couple (2, inf):
/// 0.5 * lambda^-2 * sup|w0|^2.
inline real beltrami_reference_size(const PhysicalField& w0, real lambda) {
    if (lambda == 0.0) throw std::invalid_argument("beltrami_reference_size: lambda must be nonzero");
    const real sup = linf_norm(w0);
    return 0.5 * sup * sup / (lambda * lambda);
}

/// Relative curl-eigenvalue residual ||curl w - lambda w|| / ||w||.
inline real beltrami_residual(const PhysicalField& w0, real lambda) {
    auto cw = curl(to_spectral(w0));
    auto W = to_spectral(w0);
    real num = 0.0, den = 0.0;
    for (int c = 0; c < 3; ++c) {
        auto a = cw.data(c);
        auto b = W.data(c);
        for (std::size_t m = 0; m < cw.modes(); ++m) {
            num += std::norm(a[m] - lambda * b[m]);
            den += std::norm(b[m]);
        }
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

/// 2D Taylor-Green vortex; closed-form Navier-Stokes solution W0 e^{-2 lambda^2 t}.
inline PhysicalField make_taylor_green_2d(const GridSpec& grid, real amplitude = 1.0,
                                          int harmonic = 1) {
    if (grid.dims != 2) throw std::invalid_argument("make_taylor_green_2d: dims must be 2");
    const real lam = M_PI * harmonic / grid.box_half_width;
    PhysicalField W(grid, 2);
    for (std::size_t s = 0; s < W.sites(); ++s) {
        auto x = grid.point(s);
        W(0, s) = -amplitude * std::cos(lam * x[0]) * std::sin(lam * x[1]);
        W(1, s) = amplitude * std::sin(lam * x[0]) * std::cos(lam * x[1]);
    }
    return W;
}

} // namespace nslab
