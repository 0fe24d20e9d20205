#include <catch2/catch_amalgamated.hpp>

#include "nslab/fields.hpp"
#include "nslab/norms.hpp"
#include "helpers.hpp"

#include <cmath>

using namespace nslab;
using nslab::test::rel_l2_error;

TEST_CASE("single-amplitude ABC flow has the closed form and is a curl eigenfield") {
    auto g = GridSpec::make(3, 16, M_PI);
    auto w = make_abc_flow({1.0, 0.0, 0.0, 1}, g);
    PhysicalField want(g, 3);
    for (std::size_t s = 0; s < want.sites(); ++s) {
        auto x = g.point(s);
        want(0, s) = std::sin(x[2]);
        want(1, s) = std::cos(x[2]);
        want(2, s) = 0.0;
    }
    REQUIRE(l2_distance(w, want) < 1e-12);
    REQUIRE(rel_l2_error(to_physical(curl(to_spectral(w))), w) < 1e-12);
}

TEST_CASE("ABC flows are divergence free and eigenfields for generic amplitudes") {
    auto g = GridSpec::make(3, 16, M_PI);
    for (auto [A, B, C] : {std::array<real, 3>{1, 1, 1}, {0.3, -0.7, 2.0}, {0.0, 1.5, 0.4}}) {
        auto w = make_abc_flow({A, B, C, 1}, g);
        REQUIRE(spectral_divergence_max(w) < 1e-12 * std::max(1.0, linf_norm(w)));
        REQUIRE(beltrami_residual(w, 1.0) < 1e-12);
    }
    // rescaled box: eigenvalue pi*m/L
    auto g2 = GridSpec::make(3, 16, 2.0 * M_PI);
    BeltramiSpec spec{1.0, 1.0, 1.0, 2};
    auto w2 = make_abc_flow(spec, g2);
    REQUIRE(spec.eigenvalue(g2.box_half_width) == Catch::Approx(1.0));
    REQUIRE(beltrami_residual(w2, 1.0) < 1e-12);
    REQUIRE_THROWS_AS(make_abc_flow({1, 1, 1, 1}, GridSpec::make(2, 16, M_PI)),
                      std::invalid_argument);
}

TEST_CASE("ABC(1,1,1) sup norm from dense sampling is refinement stable") {
    // pointwise search, no grid fields involved
    auto sup_at = [](int N) {
        double best = 0.0;
        const double h = 2.0 * M_PI / N;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int k = 0; k < N; ++k) {
                    const double x = -M_PI + i * h, y = -M_PI + j * h, z = -M_PI + k * h;
                    const double w0 = std::sin(z) + std::cos(y);
                    const double w1 = std::sin(x) + std::cos(z);
                    const double w2 = std::sin(y) + std::cos(x);
                    best = std::max(best, w0 * w0 + w1 * w1 + w2 * w2);
                }
        return std::sqrt(best);
    };
    const double coarse = sup_at(256);
    const double fine = sup_at(320);
    REQUIRE(std::abs(coarse - fine) < 5e-4);
    REQUIRE(coarse == Catch::Approx(std::sqrt(6.0)).margin(5e-4)); // frozen: 2.449
}

TEST_CASE("bump generator: identity shift, divergence, support guard") {
    auto g = GridSpec::make(3, 32, M_PI);
    BumpSpec base;
    base.width = 0.25;
    base.amplitude = 2.0;
    auto b0 = make_bump(base, g);

    BumpSpec shifted = base;
    shifted.shift = 0.0;
    REQUIRE(l2_distance(make_bump(shifted, g), b0) == 0.0);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 3; ++trial) {
        BumpSpec s;
        s.width = nslab::test::uniform(rng, 0.15, 0.3);
        s.amplitude = nslab::test::uniform(rng, 0.5, 2.0);
        s.direction = {nslab::test::uniform(rng, -1, 1), nslab::test::uniform(rng, -1, 1),
                       nslab::test::uniform(rng, -1, 1)};
        s.shift = nslab::test::uniform(rng, 0.0, 0.5);
        auto b = make_bump(s, g);
        REQUIRE(spectral_divergence_max(b) < 1e-12 * std::max(1.0, linf_norm(b)));
    }

    BumpSpec overflow = base;
    overflow.shift = 2.5; // support radius 2.0 on top of that exceeds L = pi
    REQUIRE_THROWS_AS(make_bump(overflow, g), std::invalid_argument);
}

TEST_CASE("weighted norm of the shifted bump decays like K^(-1/2)") {
    // fine-grid quadrature; the measured log-log slope should sit near -1/2
    auto g = GridSpec::make(3, 96, M_PI);
    const double L = g.box_half_width;
    WeightSpec w;
    w.exponent = -0.5;
    w.mu = 0.0;

    std::vector<double> ks{L / 8, L / 6, L / 4, L / 3}, xs, ys;
    for (double K : ks) {
        BumpSpec s;
        s.width = 0.12;
        s.shift = K;
        s.direction = {1.0, 0.0, 0.0};
        auto b = make_bump(s, g);
        xs.push_back(std::log(K));
        ys.push_back(std::log(weighted_lp_norm(b, 2.0, w)));
    }
    // least-squares slope
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = num / den;
    REQUIRE(slope > -0.55);
    REQUIRE(slope < -0.45);
}

TEST_CASE("axisymmetric zero-swirl generator") {
    auto g = GridSpec::make(3, 64, M_PI);

    SECTION("zero profile gives the zero field") {
        auto out = make_axisym_zero_swirl({0.0, 0.5}, g);
        REQUIRE(linf_norm(out.field) == 0.0);
    }

    SECTION("gaussian ring: divergence and swirl below 1e-10") {
        auto out = make_axisym_zero_swirl({1.0, 0.4}, g);
        REQUIRE_FALSE(out.decay_warning);
        const double scale = std::max(1.0, linf_norm(out.field));
        REQUIRE(spectral_divergence_max(out.field) < 1e-10 * scale);
        REQUIRE(max_swirl(out.field) < 1e-10 * scale);
    }

    SECTION("quarter-turn rotation symmetry") {
        auto out = make_axisym_zero_swirl({1.0, 0.5}, g);
        const auto& u = out.field;
        // (x1, x2) -> (-x2, x1) maps sample points to sample points
        double worst = 0.0;
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int k = 0; k < g.n; ++k) {
                    // rotated index: x -> R x with R the quarter turn about x3
                    const int ri = (g.n - j) % g.n; // x1' = -x2
                    const int rj = i;               // x2' = x1
                    if (ri == 0 || i == 0) continue; // -L edge has no mirror sample
                    const std::size_t s = g.encode(i, j, k);
                    const std::size_t rs = g.encode(ri, rj, k);
                    // rotated field components at the rotated point
                    const double want0 = -u(1, s);
                    const double want1 = u(0, s);
                    const double want2 = u(2, s);
                    worst = std::max({worst, std::abs(u(0, rs) - want0),
                                      std::abs(u(1, rs) - want1), std::abs(u(2, rs) - want2)});
                }
        REQUIRE(worst < 1e-8 * std::max(1.0, linf_norm(u)));
    }

    SECTION("slowly decaying profile raises the warning flag") {
        auto out = make_axisym_zero_swirl({1.0, 2.0}, g);
        REQUIRE(out.decay_warning);
    }
}

TEST_CASE("2D-to-3D extension") {
    auto g2 = GridSpec::make(2, 16, M_PI);
    auto g3 = GridSpec::make(3, 16, M_PI);

    PhysicalField zero2(g2, 2);
    REQUIRE(linf_norm(extend_2d_to_3d(zero2, g3)) == 0.0);

    auto W = nslab::test::random_smooth_field(g2, 2, 91);
    auto ext = extend_2d_to_3d(W, g3);
    // third component identically zero, all k3 != 0 modes vanish
    for (std::size_t s = 0; s < ext.sites(); ++s) REQUIRE(ext(2, s) == 0.0);
    auto F = to_spectral(ext);
    double worst = 0.0;
    detail::for_each_mode(g3, [&](std::size_t m, const std::array<real, 3>&, bool) {
        auto idx = g3.decode(m);
        if (g3.wavenumber(idx[2]) != 0)
            for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(F(c, m)));
    });
    REQUIRE(worst < 1e-12);

    auto tg = make_taylor_green_2d(g2);
    auto tg3 = extend_2d_to_3d(tg, g3);
    REQUIRE(spectral_divergence_max(tg3) < 1e-12);

    REQUIRE_THROWS_AS(extend_2d_to_3d(W, GridSpec::make(3, 32, M_PI)), std::invalid_argument);
}

TEST_CASE("extension commutes with the Leray projection") {
    auto g2 = GridSpec::make(2, 16, M_PI);
    auto g3 = GridSpec::make(3, 16, M_PI);
    auto W = nslab::test::random_smooth_field(g2, 2, 5);

    auto left = leray_project(extend_2d_to_3d(W, g3));
    // 2D projection, then extension
    auto PW2 = to_physical(leray_project(to_spectral(W)));
    auto right = extend_2d_to_3d(PW2, g3);
    REQUIRE(l2_distance(left, right) < 1e-12 * std::max(1.0, l2_norm(left)));
}

TEST_CASE("Beltrami reference evolution and size") {
    auto g = GridSpec::make(3, 8, M_PI);
    auto w0 = make_abc_flow({1, 1, 1, 1}, g);
    const double lam = 1.0;

    REQUIRE(l2_distance(beltrami_reference(w0, lam, 0.0), w0) == 0.0);

    const double t = 0.37;
    REQUIRE(l2_norm(beltrami_reference(w0, lam, t)) ==
            Catch::Approx(std::exp(-lam * lam * t) * l2_norm(w0)).epsilon(1e-14));

    REQUIRE_THROWS_AS(beltrami_reference(w0, 0.0, 1.0), std::invalid_argument);

    // K = 0.5 lambda^-2 sup|w0|^2; frozen sup = sqrt(6) for unit amplitudes
    REQUIRE(beltrami_reference_size(w0, lam) ==
            Catch::Approx(0.5 * linf_norm(w0) * linf_norm(w0)).epsilon(1e-14));
}

TEST_CASE("mixed L2_t Linf norm of the Beltrami trajectory matches the closed form") {
    auto g = GridSpec::make(3, 8, M_PI);
    auto w0 = make_abc_flow({1, 1, 1, 1}, g);
    const double lam = 1.0, T = 10.0, h = 1e-3;

    Trajectory traj(g);
    const int steps = static_cast<int>(std::round(T / h));
    for (int i = 0; i <= steps; ++i)
        traj.add_snapshot(i * h, beltrami_reference(w0, lam, i * h));

    const double sup = linf_norm(w0);
    const double measured = mixed_norm_power(traj, {2.0, std::numeric_limits<real>::infinity()});
    const double want = 0.5 / (lam * lam) * sup * sup * (1.0 - std::exp(-2 * lam * lam * T));
    REQUIRE(measured == Catch::Approx(want).epsilon(1e-6));
}
