#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nslab/grid.hpp"

namespace nslab {

/// Per-step scalar diagnostics recorded by the solvers at every time step
/// (snapshots are stored less often). energy = int |u|^2, enstrophy = int |grad u|^2.
struct StepStats {
    real t = 0.0;
    real energy = 0.0;
    real enstrophy = 0.0;
    real max_abs = 0.0;
};

struct TrajectoryMeta {
    std::string config_summary;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

/// Time-indexed velocity snapshots from one solver run, plus optional cached
/// gradient/pressure snapshots. Immutable once the run completes.
class Trajectory {
  public:
    Trajectory() = default;
    explicit Trajectory(GridSpec grid) : grid_(grid) {}

    const GridSpec& grid() const { return grid_; }

    void add_snapshot(real t, PhysicalField u) {
        if (!times_.empty() && t <= times_.back())
            throw std::invalid_argument("Trajectory: snapshot times must be strictly increasing");
        if (u.grid() != grid_) throw std::invalid_argument("Trajectory: grid mismatch");
        times_.push_back(t);
        snapshots_.push_back(std::move(u));
    }

    void add_gradient(PhysicalField grad) {
        if (gradients_.size() >= snapshots_.size())
            throw std::invalid_argument("Trajectory: gradient without matching snapshot");
        gradients_.push_back(std::move(grad));
    }

    void add_pressure(PhysicalField p) {
        if (pressures_.size() >= snapshots_.size())
            throw std::invalid_argument("Trajectory: pressure without matching snapshot");
        pressures_.push_back(std::move(p));
    }

    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }

    const std::vector<real>& times() const { return times_; }
    real t_begin() const { return times_.front(); }
    real t_end() const { return times_.back(); }

    const PhysicalField& snapshot(std::size_t i) const { return snapshots_.at(i); }

    bool has_gradients() const { return gradients_.size() == snapshots_.size(); }
    bool has_pressures() const { return pressures_.size() == snapshots_.size(); }

    const PhysicalField& cached_gradient(std::size_t i) const { return gradients_.at(i); }
    const PhysicalField& cached_pressure(std::size_t i) const { return pressures_.at(i); }

    /// Gradient tensor of snapshot i: cached if available, else spectral.
    PhysicalField gradient(std::size_t i) const {
        if (has_gradients()) return gradients_.at(i);
        return to_physical(nslab::gradient(to_spectral(snapshots_.at(i))));
    }

    std::size_t index_of_time(real t, real tol = 1e-12) const {
        for (std::size_t i = 0; i < times_.size(); ++i)
            if (std::abs(times_[i] - t) <= tol) return i;
        throw std::invalid_argument("Trajectory: no snapshot at requested time");
    }

    std::vector<StepStats>& step_stats() { return step_stats_; }
    const std::vector<StepStats>& step_stats() const { return step_stats_; }

    TrajectoryMeta& meta() { return meta_; }
    const TrajectoryMeta& meta() const { return meta_; }

  private:
    GridSpec grid_;
    std::vector<real> times_;
    std::vector<PhysicalField> snapshots_;
    std::vector<PhysicalField> gradients_;
    std::vector<PhysicalField> pressures_;
    std::vector<StepStats> step_stats_;
    TrajectoryMeta meta_;
};

} // namespace nslab
