#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lanecrit/lc_detect.hpp"
#include "lanecrit/traj_core.hpp"

namespace lanecrit {

enum class PerturbationKind { brownian, bias };

[[nodiscard]] const char* to_string(PerturbationKind k);

struct Perturbation {
    PerturbationKind kind = PerturbationKind::bias;
    double magnitude = 0.0;  // m (bias) or m per sqrt(step) (Brownian)
    std::uint64_t seed = 0;  // Brownian only

    void validate() const;
};

/// Shifts the lateral channel by +b (snapped to the lateral lattice).
[[nodiscard]] Trajectory inject_bias(const Trajectory& traj, double b);

/// Adds a random walk W_k = W_{k-1} + N(0, step_std^2), W_0 = 0, to the lateral channel.
[[nodiscard]] Trajectory inject_brownian(const Trajectory& traj, double step_std, std::uint64_t seed);

[[nodiscard]] Trajectory apply(const Trajectory& traj, const Perturbation& p, std::size_t grid_index);

/// Random-stream key for one (seed, trajectory, grid point) triple.
[[nodiscard]] std::uint64_t stream_seed(std::uint64_t seed, VehicleId id, std::size_t grid_index);

struct SweepConfig {
    LaneLayout layout;
    DetectParams detect;
    double rate = 5.0;       // Hz, resampling target
    double cutoff = 1.3;     // Hz
    bool refilter = true;    // low-pass after the perturbation
    double min_extent = 0.5; // m, replaces detect.min_extent during the sweep
};

struct RobustnessRow {
    Criterion criterion = Criterion::peak;
    Perturbation perturbation;
    std::size_t detected = 0;
    std::size_t ground_truth = 0;
    double ratio = 0.0;
};

struct RobustnessReport {
    std::vector<RobustnessRow> rows;
};

[[nodiscard]] std::vector<Perturbation> default_bias_grid();
[[nodiscard]] std::vector<Perturbation> default_brownian_grid(std::uint64_t seed);

/// Resamples every trajectory once; the sweep perturbs these.
[[nodiscard]] std::vector<Trajectory> prepare_corpus(std::span<const Trajectory> corpus, const SweepConfig& cfg);

/// Ground-truth count from the gradient criterion; throws when the corpus
/// carries no lane-marking distances.
[[nodiscard]] std::size_t gradient_ground_truth(std::span<const Trajectory> prepared, const SweepConfig& cfg);

/// Detected event count of one trajectory under one perturbation.
[[nodiscard]] std::size_t count_detections(const Trajectory& prepared, Criterion criterion,
                                           const Perturbation& p, std::size_t grid_index,
                                           const SweepConfig& cfg);

/// Parallel over (grid point, trajectory) cells. `prepared` comes from
/// prepare_corpus. Without `truth_count` the gradient criterion supplies it.
[[nodiscard]] RobustnessReport sweep(std::span<const Trajectory> prepared, Criterion criterion,
                                     std::span<const Perturbation> grid, const SweepConfig& cfg,
                                     std::optional<std::size_t> truth_count = std::nullopt);

/// Serial reference of sweep(); results are identical.
[[nodiscard]] RobustnessReport sweep_serial(std::span<const Trajectory> prepared, Criterion criterion,
                                            std::span<const Perturbation> grid, const SweepConfig& cfg,
                                            std::optional<std::size_t> truth_count = std::nullopt);

}  // namespace lanecrit
