#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nslab/detail/fft.hpp"
#include "nslab/detail/reduce.hpp"

namespace nslab {

using real = double;
using complex = std::complex<double>;

/// Uniform periodic box [-L, L)^dims sampled at x_i = -L + i * (2L/N).
/// Spectral coefficients live on integer wavevectors k in (-N/2, N/2]^dims
/// with physical wavenumber kappa = pi k / L.
struct GridSpec {
    int dims = 3;
    int n = 32;
    real box_half_width = M_PI;

    static GridSpec make(int dims, int n, real box_half_width) {
        if (dims != 2 && dims != 3)
            throw std::invalid_argument("GridSpec: dims must be 2 or 3");
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument("GridSpec: n must be even and >= 8");
        if (!(box_half_width > 0.0))
            throw std::invalid_argument("GridSpec: box_half_width must be positive");
        return GridSpec{dims, n, box_half_width};
    }

    real spacing() const { return 2.0 * box_half_width / n; }

    real cell_volume() const {
        real v = 1.0;
        for (int d = 0; d < dims; ++d) v *= spacing();
        return v;
    }

    std::size_t points() const {
        std::size_t p = 1;
        for (int d = 0; d < dims; ++d) p *= static_cast<std::size_t>(n);
        return p;
    }

    real coord(int i) const { return -box_half_width + i * spacing(); }

    // storage index -> signed integer wavenumber in (-N/2, N/2]
    int wavenumber(int m) const { return m <= n / 2 ? m : m - n; }

    // physical wavenumber component kappa_d for storage index m
    real wavevector(int m) const { return M_PI * wavenumber(m) / box_half_width; }

    std::array<int, 3> decode(std::size_t site) const {
        std::array<int, 3> idx{0, 0, 0};
        if (dims == 2) {
            idx[1] = static_cast<int>(site % n);
            idx[0] = static_cast<int>(site / n);
        } else {
            idx[2] = static_cast<int>(site % n);
            site /= n;
            idx[1] = static_cast<int>(site % n);
            idx[0] = static_cast<int>(site / n);
        }
        return idx;
    }

    std::size_t encode(int i, int j, int k = 0) const {
        if (dims == 2) return static_cast<std::size_t>(i) * n + j;
        return (static_cast<std::size_t>(i) * n + j) * n + k;
    }

    std::array<real, 3> point(std::size_t site) const {
        auto idx = decode(site);
        return {coord(idx[0]), coord(idx[1]), dims == 3 ? coord(idx[2]) : 0.0};
    }

    bool operator==(const GridSpec&) const = default;
};

/// Real-valued sampled field with one or more components stored
/// component-major; component c occupies values[c * points() ...].
class PhysicalField {
  public:
    PhysicalField() = default;

    PhysicalField(GridSpec grid, int components)
        : grid_(grid), components_(components),
          values_(static_cast<std::size_t>(components) * grid.points(), 0.0) {
        if (components < 1) throw std::invalid_argument("PhysicalField: components < 1");
    }

    const GridSpec& grid() const { return grid_; }
    int components() const { return components_; }
    std::size_t sites() const { return grid_.points(); }

    real& operator()(int c, std::size_t site) { return values_[offset(c) + site]; }
    real operator()(int c, std::size_t site) const { return values_[offset(c) + site]; }

    std::span<real> data(int c) { return {values_.data() + offset(c), sites()}; }
    std::span<const real> data(int c) const { return {values_.data() + offset(c), sites()}; }

    std::vector<real>& raw() { return values_; }
    const std::vector<real>& raw() const { return values_; }

    bool is_scalar() const { return components_ == 1; }
    bool is_vector() const { return components_ == grid_.dims; }
    bool is_tensor() const { return components_ == grid_.dims * grid_.dims; }

    // pointwise Euclidean magnitude over components
    real magnitude(std::size_t site) const {
        real s = 0.0;
        for (int c = 0; c < components_; ++c) {
            real v = (*this)(c, site);
            s += v * v;
        }
        return std::sqrt(s);
    }

  private:
    std::size_t offset(int c) const { return static_cast<std::size_t>(c) * sites(); }

    GridSpec grid_;
    int components_ = 0;
    std::vector<real> values_;
};

/// Fourier coefficients of a PhysicalField; coeff index m decodes to the
/// wavevector via GridSpec::wavenumber per axis.
class SpectralField {
  public:
    SpectralField() = default;

    SpectralField(GridSpec grid, int components)
        : grid_(grid), components_(components),
          coeffs_(static_cast<std::size_t>(components) * grid.points(), complex(0.0, 0.0)) {
        if (components < 1) throw std::invalid_argument("SpectralField: components < 1");
    }

    const GridSpec& grid() const { return grid_; }
    int components() const { return components_; }
    std::size_t modes() const { return grid_.points(); }

    complex& operator()(int c, std::size_t m) { return coeffs_[offset(c) + m]; }
    complex operator()(int c, std::size_t m) const { return coeffs_[offset(c) + m]; }

    std::span<complex> data(int c) { return {coeffs_.data() + offset(c), modes()}; }
    std::span<const complex> data(int c) const { return {coeffs_.data() + offset(c), modes()}; }

  private:
    std::size_t offset(int c) const { return static_cast<std::size_t>(c) * modes(); }

    GridSpec grid_;
    int components_ = 0;
    std::vector<complex> coeffs_;
};

namespace detail {

// Parity of the storage-index sum; carries the phase between the DFT on
// grid indices and the expansion in e^{i kappa x} on [-L, L).
inline int index_parity(const GridSpec& g, std::size_t m) {
    auto idx = g.decode(m);
    int s = idx[0] + idx[1] + idx[2];
    return (s & 1) ? -1 : 1;
}

template <typename F>
inline void for_each_mode(const GridSpec& g, F&& f) {
    const std::size_t count = g.points();
    for (std::size_t m = 0; m < count; ++m) {
        auto idx = g.decode(m);
        std::array<real, 3> kappa{g.wavevector(idx[0]), g.wavevector(idx[1]),
                                  g.dims == 3 ? g.wavevector(idx[2]) : 0.0};
        bool nyquist = false;
        for (int d = 0; d < g.dims; ++d)
            if (idx[d] == g.n / 2) nyquist = true;
        f(m, kappa, nyquist);
    }
}

} // namespace detail

/// Unitary-in-k forward transform: a constant field maps to coefficient 1 at k=0.
inline SpectralField to_spectral(const PhysicalField& f) {
    const GridSpec& g = f.grid();
    SpectralField out(g, f.components());
    const std::size_t count = g.points();
    const real scale = 1.0 / static_cast<real>(count);
    std::vector<complex> buf(count);
    for (int c = 0; c < f.components(); ++c) {
        auto src = f.data(c);
        for (std::size_t m = 0; m < count; ++m) buf[m] = complex(src[m], 0.0);
        detail::dft(g.dims, g.n, buf.data(), FFTW_FORWARD);
        auto dst = out.data(c);
        for (std::size_t m = 0; m < count; ++m)
            dst[m] = buf[m] * (scale * detail::index_parity(g, m));
    }
    return out;
}

inline PhysicalField to_physical(const SpectralField& F) {
    const GridSpec& g = F.grid();
    PhysicalField out(g, F.components());
    const std::size_t count = g.points();
    std::vector<complex> buf(count);
    for (int c = 0; c < F.components(); ++c) {
        auto src = F.data(c);
        for (std::size_t m = 0; m < count; ++m)
            buf[m] = src[m] * static_cast<real>(detail::index_parity(g, m));
        detail::dft(g.dims, g.n, buf.data(), FFTW_BACKWARD);
        auto dst = out.data(c);
        for (std::size_t m = 0; m < count; ++m) dst[m] = buf[m].real();
    }
    return out;
}

inline void zero_nyquist(SpectralField& F) {
    const GridSpec& g = F.grid();
    for (int c = 0; c < F.components(); ++c) {
        auto data = F.data(c);
        detail::for_each_mode(g, [&](std::size_t m, const std::array<real, 3>&, bool nyq) {
            if (nyq) data[m] = complex(0.0, 0.0);
        });
    }
}

/// Two-thirds rule with a spherical mask: zero every mode with |k| > N/3.
/// The ball is alias-free for quadratic products (any folded image has an
/// axis component of at least N/3) and, unlike the cube, it truncates
/// axisymmetric spectra isotropically.
inline void dealias_two_thirds(SpectralField& F) {
    const GridSpec& g = F.grid();
    const real kmax2 = (g.n / 3.0) * (g.n / 3.0);
    for (int c = 0; c < F.components(); ++c) {
        auto data = F.data(c);
        const std::size_t count = g.points();
        for (std::size_t m = 0; m < count; ++m) {
            auto idx = g.decode(m);
            real k2 = 0.0;
            for (int d = 0; d < g.dims; ++d) {
                const real k = g.wavenumber(idx[d]);
                k2 += k * k;
            }
            if (k2 > kmax2) data[m] = complex(0.0, 0.0);
        }
    }
}

/// gradient: components c -> c*dims, storing d(comp i)/dx_j at index i*dims + j
inline SpectralField gradient(const SpectralField& F) {
    const GridSpec& g = F.grid();
    SpectralField out(g, F.components() * g.dims);
    for (int c = 0; c < F.components(); ++c) {
        auto src = F.data(c);
        for (int d = 0; d < g.dims; ++d) {
            auto dst = out.data(c * g.dims + d);
            detail::for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool nyq) {
                dst[m] = nyq ? complex(0.0, 0.0) : complex(0.0, kappa[d]) * src[m];
            });
        }
    }
    return out;
}

/// divergence contracts the trailing axis index: c*dims components -> c
inline SpectralField divergence(const SpectralField& F) {
    const GridSpec& g = F.grid();
    if (F.components() % g.dims != 0)
        throw std::invalid_argument("divergence: component count not a multiple of dims");
    const int c_out = F.components() / g.dims;
    SpectralField out(g, c_out);
    for (int c = 0; c < c_out; ++c) {
        auto dst = out.data(c);
        for (int d = 0; d < g.dims; ++d) {
            auto src = F.data(c * g.dims + d);
            detail::for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool nyq) {
                if (!nyq) dst[m] += complex(0.0, kappa[d]) * src[m];
            });
        }
    }
    return out;
}

inline SpectralField curl(const SpectralField& F) {
    const GridSpec& g = F.grid();
    if (g.dims != 3 || F.components() != 3)
        throw std::invalid_argument("curl: requires a 3D vector field");
    SpectralField out(g, 3);
    auto u0 = F.data(0), u1 = F.data(1), u2 = F.data(2);
    auto w0 = out.data(0), w1 = out.data(1), w2 = out.data(2);
    detail::for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool nyq) {
        if (nyq) return;
        const complex i1(0.0, kappa[0]), i2(0.0, kappa[1]), i3(0.0, kappa[2]);
        w0[m] = i2 * u2[m] - i3 * u1[m];
        w1[m] = i3 * u0[m] - i1 * u2[m];
        w2[m] = i1 * u1[m] - i2 * u0[m];
    });
    return out;
}

inline SpectralField laplacian(const SpectralField& F) {
    const GridSpec& g = F.grid();
    SpectralField out(g, F.components());
    for (int c = 0; c < F.components(); ++c) {
        auto src = F.data(c);
        auto dst = out.data(c);
        detail::for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool nyq) {
            if (nyq) return;
            const real k2 = kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2];
            dst[m] = -k2 * src[m];
        });
    }
    return out;
}

/// Mean-zero inverse Laplacian; the k=0 mode is annihilated.
inline SpectralField inverse_laplacian(const SpectralField& F) {
    const GridSpec& g = F.grid();
    SpectralField out(g, F.components());
    for (int c = 0; c < F.components(); ++c) {
        auto src = F.data(c);
        auto dst = out.data(c);
        detail::for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool nyq) {
            const real k2 = kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2];
            dst[m] = (nyq || k2 == 0.0) ? complex(0.0, 0.0) : src[m] / (-k2);
        });
    }
    return out;
}

/// Riesz transform along one axis: multiplier -i kappa_j / |kappa|, mean mode -> 0.
inline SpectralField riesz_transform(int axis, const SpectralField& F) {
    const GridSpec& g = F.grid();
    if (axis < 0 || axis >= g.dims) throw std::invalid_argument("riesz_transform: bad axis");
    SpectralField out(g, F.components());
    for (int c = 0; c < F.components(); ++c) {
        auto src = F.data(c);
        auto dst = out.data(c);
        detail::for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool nyq) {
            const real k2 = kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2];
            if (nyq || k2 == 0.0) {
                dst[m] = complex(0.0, 0.0);
            } else {
                dst[m] = complex(0.0, -kappa[axis] / std::sqrt(k2)) * src[m];
            }
        });
    }
    return out;
}

/// Orthogonal projection onto divergence-free fields; the mean mode passes through.
inline SpectralField leray_project(const SpectralField& F) {
    const GridSpec& g = F.grid();
    if (F.components() != g.dims)
        throw std::invalid_argument("leray_project: requires a vector field");
    SpectralField out(g, g.dims);
    detail::for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool nyq) {
        const real k2 = kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2];
        if (nyq) return;
        if (k2 == 0.0) {
            for (int d = 0; d < g.dims; ++d) out(d, m) = F(d, m);
            return;
        }
        complex kdotu(0.0, 0.0);
        for (int d = 0; d < g.dims; ++d) kdotu += kappa[d] * F(d, m);
        kdotu /= k2;
        for (int d = 0; d < g.dims; ++d) out(d, m) = F(d, m) - kappa[d] * kdotu;
    });
    return out;
}

/// Largest modal magnitude of kappa . u_hat(kappa); zero for divergence-free fields.
inline real spectral_divergence_max(const SpectralField& F) {
    const GridSpec& g = F.grid();
    if (F.components() != g.dims)
        throw std::invalid_argument("spectral_divergence_max: requires a vector field");
    real worst = 0.0;
    detail::for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool) {
        complex kdotu(0.0, 0.0);
        for (int d = 0; d < g.dims; ++d) kdotu += kappa[d] * F(d, m);
        worst = std::max(worst, std::abs(kdotu));
    });
    return worst;
}

// ---- physical-space wrappers -------------------------------------------

inline PhysicalField gradient(const PhysicalField& f) {
    return to_physical(gradient(to_spectral(f)));
}

inline PhysicalField divergence(const PhysicalField& f) {
    return to_physical(divergence(to_spectral(f)));
}

inline PhysicalField curl(const PhysicalField& f) {
    return to_physical(curl(to_spectral(f)));
}

inline PhysicalField laplacian(const PhysicalField& f) {
    return to_physical(laplacian(to_spectral(f)));
}

inline PhysicalField riesz_transform(int axis, const PhysicalField& f) {
    if (!f.is_scalar()) throw std::invalid_argument("riesz_transform: scalar input expected");
    return to_physical(riesz_transform(axis, to_spectral(f)));
}

inline PhysicalField leray_project(const PhysicalField& f) {
    if (!f.is_vector()) throw std::invalid_argument("leray_project: vector input expected");
    return to_physical(leray_project(to_spectral(f)));
}

inline real spectral_divergence_max(const PhysicalField& f) {
    return spectral_divergence_max(to_spectral(f));
}

/// Circular shift by whole grid cells (used by translation-commutation checks).
inline PhysicalField shift_cells(const PhysicalField& f, const std::array<int, 3>& cells) {
    const GridSpec& g = f.grid();
    PhysicalField out(g, f.components());
    const std::size_t count = g.points();
    for (int c = 0; c < f.components(); ++c) {
        for (std::size_t m = 0; m < count; ++m) {
            auto idx = g.decode(m);
            std::array<int, 3> to = idx;
            for (int d = 0; d < g.dims; ++d) {
                to[d] = ((idx[d] + cells[d]) % g.n + g.n) % g.n;
            }
            out(c, g.encode(to[0], to[1], to[2])) = f(c, m);
        }
    }
    return out;
}

// ---- elementary reductions ----------------------------------------------

/// Discrete L2 norm: sqrt( sum_x |f(x)|^2 * cellvol ), all components.
inline real l2_norm(const PhysicalField& f) {
    std::vector<real> terms;
    terms.reserve(f.sites());
    for (std::size_t s = 0; s < f.sites(); ++s) {
        real m = 0.0;
        for (int c = 0; c < f.components(); ++c) m += f(c, s) * f(c, s);
        terms.push_back(m);
    }
    return std::sqrt(detail::pairwise_sum(terms) * f.grid().cell_volume());
}

inline real linf_norm(const PhysicalField& f) {
    real worst = 0.0;
    for (std::size_t s = 0; s < f.sites(); ++s)
        worst = std::max(worst, f.magnitude(s));
    return worst;
}

inline real l2_distance(const PhysicalField& a, const PhysicalField& b) {
    if (a.grid() != b.grid() || a.components() != b.components())
        throw std::invalid_argument("l2_distance: mismatched fields");
    std::vector<real> terms;
    terms.reserve(a.sites());
    for (std::size_t s = 0; s < a.sites(); ++s) {
        real m = 0.0;
        for (int c = 0; c < a.components(); ++c) {
            real d = a(c, s) - b(c, s);
            m += d * d;
        }
        terms.push_back(m);
    }
    return std::sqrt(detail::pairwise_sum(terms) * a.grid().cell_volume());
}

/// Plancherel sum: (2L)^dims * sum_k |u_hat(k)|^2 over all components.
inline real spectral_l2_norm_squared(const SpectralField& F) {
    const GridSpec& g = F.grid();
    real box = 1.0;
    for (int d = 0; d < g.dims; ++d) box *= 2.0 * g.box_half_width;
    std::vector<real> terms;
    terms.reserve(F.modes() * F.components());
    for (int c = 0; c < F.components(); ++c) {
        auto data = F.data(c);
        for (std::size_t m = 0; m < F.modes(); ++m) terms.push_back(std::norm(data[m]));
    }
    return box * detail::pairwise_sum(terms);
}

} // namespace nslab
