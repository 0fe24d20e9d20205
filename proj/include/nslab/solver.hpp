#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nslab/grid.hpp"
#include "nslab/norms.hpp"
#include "nslab/trajectory.hpp"

namespace nslab {

/// Unit viscosity throughout; the viscous factor is applied exactly via the
/// heat semigroup, so only the advection terms see the RK2 truncation error.
struct SolverConfig {
    real dt = 1e-3;
    real t_end = 0.5;
    int snapshot_stride = 10;
    real blowup_factor = 1e6;
    bool record_step_stats = true;
    std::uint64_t seed = 0;
    std::string summary;
};

class BlowupError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Spectral snapshot of the reference solution at a requested time.
using ReferenceFn = std::function<SpectralField(real)>;

namespace detail {

inline real spectral_enstrophy(const SpectralField& F) {
    const GridSpec& g = F.grid();
    real box = 1.0;
    for (int d = 0; d < g.dims; ++d) box *= 2.0 * g.box_half_width;
    std::vector<real> terms;
    terms.reserve(F.modes() * F.components());
    for (int c = 0; c < F.components(); ++c) {
        auto data = F.data(c);
        for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool) {
            const real k2 = kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2];
            terms.push_back(k2 * std::norm(data[m]));
        });
    }
    return box * pairwise_sum(terms);
}

// smooth transition 1 -> 0 on [1/2, 1]
inline real mollifier_hat(real s) {
    const real a = std::abs(s);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    auto f = [](real t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    const real up = f(2.0 * (1.0 - a));
    const real down = f(2.0 * a - 1.0);
    return up / (up + down);
}

inline void apply_mollifier(SpectralField& F, real eps) {
    const GridSpec& g = F.grid();
    for (int c = 0; c < F.components(); ++c) {
        auto data = F.data(c);
        for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool) {
            const real k = std::sqrt(kappa[0] * kappa[0] + kappa[1] * kappa[1] +
                                     kappa[2] * kappa[2]);
            data[m] *= mollifier_hat(eps * k);
        });
    }
}

// -P div(S) with S_ij = v_i * adv_j + (w_i v_j + v_i w_j when w is present);
// adv is the advecting copy of v (mollified for eps > 0). Products are formed
// pointwise and dealiased by the two-thirds rule before differentiation.
// Reports max|v| on the grid as a byproduct.
inline SpectralField advection_rhs(const SpectralField& v_hat, const SpectralField* w_hat,
                                   real eps, real* max_abs_out) {
    const GridSpec& g = v_hat.grid();
    const int d = g.dims;

    PhysicalField v = to_physical(v_hat);
    PhysicalField adv = v;
    if (eps > 0.0) {
        SpectralField filtered = v_hat;
        apply_mollifier(filtered, eps);
        adv = to_physical(filtered);
    }
    std::optional<PhysicalField> w;
    if (w_hat) w = to_physical(*w_hat);

    if (max_abs_out) *max_abs_out = linf_norm(v);

    PhysicalField tensor(g, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            auto out = tensor.data(i * d + j);
            auto vi = v.data(i);
            auto advj = adv.data(j);
            if (w) {
                auto wi = w->data(i);
                auto wj = w->data(j);
                auto vj = v.data(j);
                for (std::size_t s = 0; s < out.size(); ++s)
                    out[s] = vi[s] * advj[s] + wi[s] * vj[s] + vi[s] * wj[s];
            } else {
                for (std::size_t s = 0; s < out.size(); ++s) out[s] = vi[s] * advj[s];
            }
        }
    }

    SpectralField T = to_spectral(tensor);
    dealias_two_thirds(T);
    SpectralField rhs = divergence(T);
    for (int c = 0; c < d; ++c) {
        auto data = rhs.data(c);
        for (std::size_t m = 0; m < rhs.modes(); ++m) data[m] = -data[m];
    }
    return leray_project(rhs);
}

// one Heun step with integrating factor: the heat semigroup is exact
inline SpectralField if_rk2_step(const SpectralField& u, real dt,
                                 const std::function<SpectralField(const SpectralField&, int)>& rhs) {
    const GridSpec& g = u.grid();
    auto semigroup = [&](SpectralField f) {
        for (int c = 0; c < f.components(); ++c) {
            auto data = f.data(c);
            for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool) {
                const real k2 = kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2];
                data[m] *= std::exp(-k2 * dt);
            });
        }
        return f;
    };

    SpectralField k1 = rhs(u, 0);
    SpectralField pred(g, u.components());
    for (int c = 0; c < u.components(); ++c) {
        auto p = pred.data(c);
        auto uu = u.data(c);
        auto kk = k1.data(c);
        for (std::size_t m = 0; m < u.modes(); ++m) p[m] = uu[m] + dt * kk[m];
    }
    pred = semigroup(std::move(pred));
    SpectralField k2 = rhs(pred, 1);

    SpectralField eu = semigroup(u);
    SpectralField ek1 = semigroup(std::move(k1));
    SpectralField out(g, u.components());
    for (int c = 0; c < u.components(); ++c) {
        auto o = out.data(c);
        auto a = eu.data(c);
        auto b = ek1.data(c);
        auto cdat = k2.data(c);
        for (std::size_t m = 0; m < u.modes(); ++m)
            o[m] = a[m] + 0.5 * dt * (b[m] + cdat[m]);
    }
    return out;
}

struct LoopHooks {
    // stage 0 at time t, stage 1 at time t + dt; null -> plain Navier-Stokes
    ReferenceFn reference;
    real eps = 0.0;
};

inline Trajectory run_solver(const PhysicalField& u0, const SolverConfig& cfg,
                             const LoopHooks& hooks) {
    const GridSpec& g = u0.grid();
    if (!u0.is_vector()) throw std::invalid_argument("solver: vector initial data expected");
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("solver: dt must be positive");
    if (!(cfg.t_end >= cfg.dt)) throw std::invalid_argument("solver: t_end must cover one step");
    if (cfg.snapshot_stride < 1) throw std::invalid_argument("solver: snapshot_stride >= 1");

    for (real v : u0.raw())
        if (!std::isfinite(v))
            throw std::invalid_argument("solver: initial data contains non-finite values");
    const real scale0 = std::max(linf_norm(u0), 1e-300);
    SpectralField u = to_spectral(u0);
    if (spectral_divergence_max(u) > 1e-8 * scale0)
        throw std::invalid_argument("solver: initial data is not divergence free");
    u = leray_project(u);
    dealias_two_thirds(u);

    const int steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
    Trajectory traj(g);
    traj.meta().seed = cfg.seed;
    traj.meta().config_summary = cfg.summary;

    real last_max_abs = linf_norm(to_physical(u));
    const real max_abs0 = std::max(last_max_abs, 1e-300);

    auto record = [&](int i) {
        if (!cfg.record_step_stats) return;
        StepStats st;
        st.t = i * cfg.dt;
        st.energy = spectral_l2_norm_squared(u);
        st.enstrophy = spectral_enstrophy(u);
        st.max_abs = last_max_abs;
        traj.step_stats().push_back(st);
    };

    auto snapshot = [&](int i) { traj.add_snapshot(i * cfg.dt, to_physical(u)); };

    record(0);
    snapshot(0);

    for (int i = 0; i < steps; ++i) {
        const real t = i * cfg.dt;
        auto rhs = [&](const SpectralField& state, int stage) {
            real ma = 0.0;
            SpectralField out;
            if (hooks.reference) {
                SpectralField w = hooks.reference(stage == 0 ? t : t + cfg.dt);
                out = advection_rhs(state, &w, hooks.eps, stage == 0 ? &ma : nullptr);
            } else {
                out = advection_rhs(state, nullptr, hooks.eps, stage == 0 ? &ma : nullptr);
            }
            if (stage == 0) last_max_abs = ma;
            return out;
        };
        u = if_rk2_step(u, cfg.dt, rhs);

        const real energy = spectral_l2_norm_squared(u);
        if (!std::isfinite(energy))
            throw BlowupError("solver: non-finite energy at t = " + std::to_string(t + cfg.dt));
        if (last_max_abs > cfg.blowup_factor * max_abs0)
            throw BlowupError("solver: amplitude grew by more than " +
                              std::to_string(cfg.blowup_factor) + "x at t = " +
                              std::to_string(t + cfg.dt));

        record(i + 1);
        if ((i + 1) % cfg.snapshot_stride == 0 || i + 1 == steps) snapshot(i + 1);
    }
    return traj;
}

} // namespace detail

// ---- single steps (spec-level operations) ---------------------------------

inline PhysicalField step_nse(const PhysicalField& u, real dt) {
    auto rhs = [](const SpectralField& s, int) {
        return detail::advection_rhs(s, nullptr, 0.0, nullptr);
    };
    return to_physical(detail::if_rk2_step(to_spectral(u), dt, rhs));
}

/// One step of the system perturbed around the reference w; w may be given
/// at both RK stages (t and t + dt) or frozen within the step.
inline PhysicalField step_perturbed(const PhysicalField& v, const PhysicalField& w_at_t,
                                    const PhysicalField& w_at_t_dt, real dt) {
    if (v.grid() != w_at_t.grid() || v.grid() != w_at_t_dt.grid())
        throw std::invalid_argument("step_perturbed: grid mismatch");
    SpectralField w0 = to_spectral(w_at_t);
    SpectralField w1 = to_spectral(w_at_t_dt);
    auto rhs = [&](const SpectralField& s, int stage) {
        return detail::advection_rhs(s, stage == 0 ? &w0 : &w1, 0.0, nullptr);
    };
    return to_physical(detail::if_rk2_step(to_spectral(v), dt, rhs));
}

inline PhysicalField step_perturbed(const PhysicalField& v, const PhysicalField& w, real dt) {
    return step_perturbed(v, w, w, dt);
}

/// Mollified variant: only the advecting copy of v is filtered; eps = 0 runs
/// the identical code path as step_perturbed.
inline PhysicalField step_mollified(const PhysicalField& v, const PhysicalField& w_at_t,
                                    const PhysicalField& w_at_t_dt, real eps, real dt) {
    if (eps < 0.0) throw std::invalid_argument("step_mollified: eps must be >= 0");
    if (v.grid() != w_at_t.grid() || v.grid() != w_at_t_dt.grid())
        throw std::invalid_argument("step_mollified: grid mismatch");
    SpectralField w0 = to_spectral(w_at_t);
    SpectralField w1 = to_spectral(w_at_t_dt);
    auto rhs = [&](const SpectralField& s, int stage) {
        return detail::advection_rhs(s, stage == 0 ? &w0 : &w1, eps, nullptr);
    };
    return to_physical(detail::if_rk2_step(to_spectral(v), dt, rhs));
}

inline PhysicalField step_mollified(const PhysicalField& v, const PhysicalField& w, real eps,
                                    real dt) {
    return step_mollified(v, w, w, eps, dt);
}

// ---- full solves -----------------------------------------------------------

inline Trajectory solve_nse(const PhysicalField& u0, const SolverConfig& cfg) {
    return detail::run_solver(u0, cfg, {});
}

inline Trajectory solve_2d_nse(const PhysicalField& W0, const SolverConfig& cfg) {
    if (W0.grid().dims != 2) throw std::invalid_argument("solve_2d_nse: dims must be 2");
    return detail::run_solver(W0, cfg, {});
}

inline Trajectory solve_perturbed(const PhysicalField& v0, ReferenceFn reference,
                                  const SolverConfig& cfg) {
    detail::LoopHooks hooks;
    hooks.reference = std::move(reference);
    return detail::run_solver(v0, cfg, hooks);
}

struct MollifiedRun {
    Trajectory trajectory;
    real energy_bound = std::numeric_limits<real>::infinity(); // A e^K when K given
    real peak_energy = 0.0;
};

/// Mollified solve; when reference_size K is supplied the run carries the
/// a-priori bound int |v|^2 <= ||v0||^2 e^K and records the observed peak.
inline MollifiedRun solve_mollified(const PhysicalField& v0, ReferenceFn reference, real eps,
                                    const SolverConfig& cfg,
                                    std::optional<real> reference_size = std::nullopt) {
    if (eps < 0.0) throw std::invalid_argument("solve_mollified: eps must be >= 0");
    detail::LoopHooks hooks;
    hooks.reference = std::move(reference);
    hooks.eps = eps;
    MollifiedRun run;
    run.trajectory = detail::run_solver(v0, cfg, hooks);
    for (const auto& st : run.trajectory.step_stats())
        run.peak_energy = std::max(run.peak_energy, st.energy);
    if (reference_size) {
        const real A = run.trajectory.step_stats().empty()
                           ? std::pow(l2_norm(v0), 2.0)
                           : run.trajectory.step_stats().front().energy;
        run.energy_bound = A * std::exp(*reference_size);
    }
    return run;
}

// ---- reference providers ---------------------------------------------------

inline ReferenceFn make_beltrami_reference_fn(const PhysicalField& w0, real lambda) {
    if (lambda == 0.0) throw std::invalid_argument("beltrami reference: lambda must be nonzero");
    auto w0_hat = std::make_shared<SpectralField>(to_spectral(w0));
    return [w0_hat, lambda](real t) {
        SpectralField w = *w0_hat;
        const real factor = std::exp(-lambda * lambda * t);
        for (int c = 0; c < w.components(); ++c) {
            auto data = w.data(c);
            for (std::size_t m = 0; m < w.modes(); ++m) data[m] *= factor;
        }
        return w;
    };
}

/// Reference drawn from a stored trajectory; requested times must hit the
/// snapshot lattice exactly.
inline ReferenceFn make_trajectory_reference_fn(std::shared_ptr<const Trajectory> traj) {
    auto cache = std::make_shared<std::vector<std::optional<SpectralField>>>(traj->size());
    return [traj, cache](real t) {
        std::size_t i;
        try {
            i = traj->index_of_time(t, 1e-9);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("reference trajectory: mismatched time lattice at t = " +
                                        std::to_string(t));
        }
        if (!(*cache)[i]) (*cache)[i] = to_spectral(traj->snapshot(i));
        return *(*cache)[i];
    };
}

// ---- pressure --------------------------------------------------------------

/// P = R (x) R . (u (x) u); mean-zero by construction.
inline PhysicalField pressure_from_velocity(const PhysicalField& u) {
    const GridSpec& g = u.grid();
    if (!u.is_vector()) throw std::invalid_argument("pressure_from_velocity: vector input");
    const int d = g.dims;
    PhysicalField tensor(g, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            auto out = tensor.data(i * d + j);
            auto ui = u.data(i);
            auto uj = u.data(j);
            for (std::size_t s = 0; s < out.size(); ++s) out[s] = ui[s] * uj[s];
        }
    SpectralField T = to_spectral(tensor);
    dealias_two_thirds(T);
    SpectralField P(g, 1);
    auto p = P.data(0);
    detail::for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool nyq) {
        if (nyq) return;
        const real k2 = kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2];
        if (k2 == 0.0) return;
        complex acc(0.0, 0.0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) acc += (-kappa[i] * kappa[j] / k2) * T(i * d + j, m);
        p[m] = acc;
    });
    return to_physical(P);
}

/// P_v = T.(v (x) v) + 2 T.(v (x) w) with T = R (x) R.
inline PhysicalField pressure_perturbed(const PhysicalField& v, const PhysicalField& w) {
    const GridSpec& g = v.grid();
    if (v.grid() != w.grid()) throw std::invalid_argument("pressure_perturbed: grid mismatch");
    const int d = g.dims;
    PhysicalField tensor(g, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            auto out = tensor.data(i * d + j);
            auto vi = v.data(i);
            auto vj = v.data(j);
            auto wj = w.data(j);
            for (std::size_t s = 0; s < out.size(); ++s)
                out[s] = vi[s] * vj[s] + 2.0 * vi[s] * wj[s];
        }
    SpectralField T = to_spectral(tensor);
    dealias_two_thirds(T);
    SpectralField P(g, 1);
    auto p = P.data(0);
    detail::for_each_mode(g, [&](std::size_t m, const std::array<real, 3>& kappa, bool nyq) {
        if (nyq) return;
        const real k2 = kappa[0] * kappa[0] + kappa[1] * kappa[1] + kappa[2] * kappa[2];
        if (k2 == 0.0) return;
        complex acc(0.0, 0.0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) acc += (-kappa[i] * kappa[j] / k2) * T(i * d + j, m);
        p[m] = acc;
    });
    return to_physical(P);
}

// ---- energy audits ----------------------------------------------------------

struct EnergyLedgerRow {
    real t = 0.0;
    real energy = 0.0;
    real dissipation = 0.0; // 2 * int_0^t ||grad u||^2
    real residual = 0.0;    // energy + dissipation - energy(0)
};

struct EnergyAudit {
    real max_violation = 0.0; // signed max of residual over time
    std::vector<EnergyLedgerRow> ledger;
};

/// Global energy identity audit. Uses the per-step stats when present
/// (recorded every step), otherwise the stored snapshots.
inline EnergyAudit energy_audit(const Trajectory& traj) {
    EnergyAudit audit;
    std::vector<real> ts, energy, enstrophy;
    if (!traj.step_stats().empty()) {
        for (const auto& st : traj.step_stats()) {
            ts.push_back(st.t);
            energy.push_back(st.energy);
            enstrophy.push_back(st.enstrophy);
        }
    } else {
        for (std::size_t i = 0; i < traj.size(); ++i) {
            auto F = to_spectral(traj.snapshot(i));
            ts.push_back(traj.times()[i]);
            energy.push_back(spectral_l2_norm_squared(F));
            enstrophy.push_back(detail::spectral_enstrophy(F));
        }
    }
    if (ts.empty()) return audit;

    real dis = 0.0;
    audit.max_violation = -std::numeric_limits<real>::infinity();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i > 0) dis += (ts[i] - ts[i - 1]) * (enstrophy[i - 1] + enstrophy[i]); // 2 * trapezoid
        EnergyLedgerRow row;
        row.t = ts[i];
        row.energy = energy[i];
        row.dissipation = dis;
        row.residual = energy[i] + dis - energy[0];
        audit.max_violation = std::max(audit.max_violation, row.residual);
        audit.ledger.push_back(row);
    }
    return audit;
}

/// Separable test function phi(t, x) = psi(t) * amplitude * gaussian(x).
/// psi is either 1 or exp(-k B(t)) with B the cumulative sigma_mu-weighted
/// dissipation of the audited trajectory.
struct TestFunctionSpec {
    std::array<real, 3> center{0.0, 0.0, 0.0};
    real width = 1.0;
    real amplitude = 1.0;
    enum class TimeFactor { One, ExpKB } time_factor = TimeFactor::One;
    real k = 1.0;
    real mu = 1.0;
};

namespace detail {

struct TestFunctionEval {
    std::vector<real> psi;     // per snapshot
    std::vector<real> psi_dot; // per snapshot
    PhysicalField bump;        // phi_1
    PhysicalField grad_bump;   // vector
    PhysicalField lap_bump;    // scalar
};

inline TestFunctionEval eval_test_function(const Trajectory& traj, const TestFunctionSpec& spec) {
    if (spec.amplitude < 0.0)
        throw std::invalid_argument("local_energy_audit: test function must be nonnegative");
    const GridSpec& g = traj.grid();
    TestFunctionEval ev{{}, {}, PhysicalField(g, 1), PhysicalField(g, g.dims), PhysicalField(g, 1)};
    const real w2 = spec.width * spec.width;
    for (std::size_t s = 0; s < g.points(); ++s) {
        auto x = g.point(s);
        real r2 = 0.0;
        std::array<real, 3> y{0, 0, 0};
        for (int d = 0; d < g.dims; ++d) {
            y[d] = x[d] - spec.center[d];
            r2 += y[d] * y[d];
        }
        const real phi = spec.amplitude * std::exp(-r2 / (2.0 * w2));
        ev.bump(0, s) = phi;
        for (int d = 0; d < g.dims; ++d) ev.grad_bump(d, s) = -y[d] / w2 * phi;
        ev.lap_bump(0, s) = (r2 / (w2 * w2) - g.dims / w2) * phi;
    }

    const std::size_t count = traj.size();
    ev.psi.assign(count, 1.0);
    ev.psi_dot.assign(count, 0.0);
    if (spec.time_factor == TestFunctionSpec::TimeFactor::ExpKB) {
        WeightSpec w;
        w.mu = spec.mu;
        w.center = spec.center;
        auto cum = b_mu_cumulative(traj, w);
        for (std::size_t i = 0; i < count; ++i) {
            ev.psi[i] = std::exp(-spec.k * cum[i]);
            ev.psi_dot[i] = -spec.k * weighted_enstrophy(traj, i, w) * ev.psi[i];
        }
    }
    return ev;
}

} // namespace detail

/// Local energy inequality residual (LHS - RHS) over [t0, t1], snapshot
/// times. Pressure defaults to the Riesz reconstruction. The perturbed form
/// adds the reference terms.
inline real local_energy_audit(const Trajectory& traj, const TestFunctionSpec& spec, real t0,
                               real t1,
                               std::function<PhysicalField(std::size_t)> pressure = {},
                               ReferenceFn reference = {}) {
    const GridSpec& g = traj.grid();
    const std::size_t i0 = traj.index_of_time(t0, 1e-9);
    const std::size_t i1 = traj.index_of_time(t1, 1e-9);
    if (i0 > i1) throw std::invalid_argument("local_energy_audit: t0 must precede t1");

    auto ev = detail::eval_test_function(traj, spec);
    const real vol = g.cell_volume();

    if (!pressure) {
        if (reference) {
            pressure = [&](std::size_t i) {
                PhysicalField w = to_physical(reference(traj.times()[i]));
                return pressure_perturbed(traj.snapshot(i), w);
            };
        } else {
            pressure = [&](std::size_t i) { return pressure_from_velocity(traj.snapshot(i)); };
        }
    }

    // endpoint terms int |u|^2 phi
    auto weighted_energy = [&](std::size_t i) {
        const auto& u = traj.snapshot(i);
        std::vector<real> terms(u.sites());
        for (std::size_t s = 0; s < u.sites(); ++s) {
            real m2 = 0.0;
            for (int c = 0; c < u.components(); ++c) m2 += u(c, s) * u(c, s);
            terms[s] = m2 * ev.bump(0, s);
        }
        return detail::pairwise_sum(terms) * vol * ev.psi[i];
    };

    // per-snapshot integrands for the time quadrature
    std::vector<real> dissipation(i1 - i0 + 1), transport(i1 - i0 + 1);
    for (std::size_t i = i0; i <= i1; ++i) {
        const auto& u = traj.snapshot(i);
        PhysicalField grad = traj.gradient(i);
        PhysicalField P = pressure(i);
        std::optional<PhysicalField> wphys;
        if (reference) wphys = to_physical(reference(traj.times()[i]));

        std::vector<real> diss_terms(u.sites()), rhs_terms(u.sites());
        for (std::size_t s = 0; s < u.sites(); ++s) {
            real g2 = 0.0;
            for (int c = 0; c < grad.components(); ++c) g2 += grad(c, s) * grad(c, s);
            diss_terms[s] = g2 * ev.bump(0, s);

            real m2 = 0.0, u_dot_gphi = 0.0;
            for (int c = 0; c < u.components(); ++c) {
                m2 += u(c, s) * u(c, s);
                u_dot_gphi += u(c, s) * ev.grad_bump(c, s);
            }
            // |u|^2 (phi_t + Delta phi) + (|u|^2 + 2P) u . grad phi
            real acc = m2 * (ev.psi_dot[i] / std::max(ev.psi[i], 1e-300) * ev.bump(0, s) +
                             ev.lap_bump(0, s)) +
                       (m2 + 2.0 * P(0, s)) * u_dot_gphi;

            if (wphys) {
                const auto& w = *wphys;
                real w_dot_gphi = 0.0, v_dot_w = 0.0, vgradv_dot_w = 0.0;
                for (int c = 0; c < u.components(); ++c) {
                    w_dot_gphi += w(c, s) * ev.grad_bump(c, s);
                    v_dot_w += u(c, s) * w(c, s);
                }
                for (int i_c = 0; i_c < g.dims; ++i_c) {
                    real conv = 0.0; // (v . grad) v_i
                    for (int j_c = 0; j_c < g.dims; ++j_c)
                        conv += u(j_c, s) * grad(i_c * g.dims + j_c, s);
                    vgradv_dot_w += conv * w(i_c, s);
                }
                acc += m2 * w_dot_gphi + 2.0 * v_dot_w * u_dot_gphi +
                       2.0 * vgradv_dot_w * ev.bump(0, s);
            }
            rhs_terms[s] = acc;
        }
        dissipation[i - i0] = detail::pairwise_sum(diss_terms) * vol * ev.psi[i];
        transport[i - i0] = detail::pairwise_sum(rhs_terms) * vol * ev.psi[i];
    }

    real diss_int = 0.0, rhs_int = 0.0;
    for (std::size_t i = i0; i + 1 <= i1; ++i) {
        const real dt = traj.times()[i + 1] - traj.times()[i];
        diss_int += 0.5 * dt * (dissipation[i - i0] + dissipation[i + 1 - i0]);
        rhs_int += 0.5 * dt * (transport[i - i0] + transport[i + 1 - i0]);
    }

    const real lhs = weighted_energy(i1) + 2.0 * diss_int;
    const real rhs = weighted_energy(i0) + rhs_int;
    return lhs - rhs;
}

} // namespace nslab
