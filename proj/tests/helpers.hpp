#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "nslab/grid.hpp"

namespace nslab::test {

// Fixed-algorithm uniform in [lo, hi); mt19937_64 output scaled directly so
// sequences are identical across standard libraries.
inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    const double u = (rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

inline PhysicalField random_field(const GridSpec& g, int components, std::uint64_t seed,
                                  double amplitude = 1.0) {
    std::mt19937_64 rng(seed);
    PhysicalField f(g, components);
    for (int c = 0; c < components; ++c)
        for (std::size_t s = 0; s < f.sites(); ++s)
            f(c, s) = uniform(rng, -amplitude, amplitude);
    return f;
}

// Smooth random field: superposition of a few low modes with random phases.
inline PhysicalField random_smooth_field(const GridSpec& g, int components, std::uint64_t seed,
                                         int max_mode = 3, double amplitude = 1.0) {
    std::mt19937_64 rng(seed);
    PhysicalField f(g, components);
    const double pi_over_L = M_PI / g.box_half_width;
    for (int c = 0; c < components; ++c) {
        for (int trial = 0; trial < 8; ++trial) {
            std::array<int, 3> k{};
            for (int d = 0; d < g.dims; ++d)
                k[d] = static_cast<int>(std::floor(uniform(rng, -max_mode, max_mode + 1)));
            const double amp = uniform(rng, -amplitude, amplitude);
            const double phase = uniform(rng, 0.0, 2.0 * M_PI);
            for (std::size_t s = 0; s < f.sites(); ++s) {
                auto x = g.point(s);
                double arg = phase;
                for (int d = 0; d < g.dims; ++d) arg += k[d] * pi_over_L * x[d];
                f(c, s) += amp * std::cos(arg);
            }
        }
    }
    return f;
}

// ABC Beltrami field evaluated pointwise; eigenvalue 1 on [-pi, pi)^3.
inline PhysicalField abc_field(const GridSpec& g, double A, double B, double C) {
    PhysicalField w(g, 3);
    for (std::size_t s = 0; s < w.sites(); ++s) {
        auto x = g.point(s);
        w(0, s) = A * std::sin(x[2]) + C * std::cos(x[1]);
        w(1, s) = B * std::sin(x[0]) + A * std::cos(x[2]);
        w(2, s) = C * std::sin(x[1]) + B * std::cos(x[0]);
    }
    return w;
}

// O(N^6) reference DFT, the independent oracle for transform checks.
inline std::vector<std::complex<double>> naive_dft(const PhysicalField& f, int comp) {
    const GridSpec& g = f.grid();
    const std::size_t count = g.points();
    std::vector<std::complex<double>> out(count);
    for (std::size_t m = 0; m < count; ++m) {
        auto kidx = g.decode(m);
        std::array<double, 3> kappa{g.wavevector(kidx[0]), g.wavevector(kidx[1]),
                                    g.dims == 3 ? g.wavevector(kidx[2]) : 0.0};
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t s = 0; s < count; ++s) {
            auto x = g.point(s);
            double arg = 0.0;
            for (int d = 0; d < g.dims; ++d) arg += kappa[d] * x[d];
            acc += f(comp, s) * std::complex<double>(std::cos(arg), -std::sin(arg));
        }
        out[m] = acc / static_cast<double>(count);
    }
    return out;
}

inline double rel_l2_error(const PhysicalField& got, const PhysicalField& want) {
    const double denom = l2_norm(want);
    if (denom == 0.0) return l2_norm(got);
    return l2_distance(got, want) / denom;
}

} // namespace nslab::test
