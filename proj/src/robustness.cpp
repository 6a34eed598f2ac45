#include "lanecrit/robustness.hpp"

#include "lanecrit/parallel.hpp"

#include <random>

namespace lanecrit {

const char* to_string(PerturbationKind k) { return k == PerturbationKind::bias ? "bias" : "brownian"; }

void Perturbation::validate() const {
    if (!(magnitude >= 0.0)) throw Error("perturbation magnitude must be >= 0");
}

Trajectory inject_bias(const Trajectory& traj, double b) {
    if (b == 0.0) return traj;
    const double bq = snap_lateral(b);
    Trajectory out = traj;
    for (Sample& s : out.samples) s.lat = snap_lateral(s.lat + bq);
    return out;
}

Trajectory inject_brownian(const Trajectory& traj, double step_std, std::uint64_t seed) {
    if (!(step_std >= 0.0)) throw Error("brownian step_std must be >= 0");
    if (step_std == 0.0) return traj;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> step(0.0, step_std);
    Trajectory out = traj;
    double walk = 0.0;
    for (std::size_t k = 1; k < out.samples.size(); ++k) {
        walk += step(rng);
        out.samples[k].lat = snap_lateral(out.samples[k].lat + snap_lateral(walk));
    }
    return out;
}

std::uint64_t stream_seed(std::uint64_t seed, VehicleId id, std::size_t grid_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(static_cast<std::uint64_t>(id) >> 32),
                      static_cast<std::uint32_t>(grid_index)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Trajectory apply(const Trajectory& traj, const Perturbation& p, std::size_t grid_index) {
    p.validate();
    if (p.kind == PerturbationKind::bias) return inject_bias(traj, p.magnitude);
    return inject_brownian(traj, p.magnitude, stream_seed(p.seed, traj.vehicle_id, grid_index));
}

std::vector<Perturbation> default_bias_grid() {
    std::vector<Perturbation> g;
    for (double b : {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5}) g.push_back({PerturbationKind::bias, b, 0});
    return g;
}

std::vector<Perturbation> default_brownian_grid(std::uint64_t seed) {
    std::vector<Perturbation> g;
    for (double s : {0.0, 0.005, 0.01, 0.02, 0.05}) g.push_back({PerturbationKind::brownian, s, seed});
    return g;
}

std::vector<Trajectory> prepare_corpus(std::span<const Trajectory> corpus, const SweepConfig& cfg) {
    std::vector<Trajectory> out(corpus.size());
    parallel_for(corpus.size(), [&](std::size_t i) { out[i] = resample(corpus[i], cfg.rate); });
    return out;
}

std::size_t gradient_ground_truth(std::span<const Trajectory> prepared, const SweepConfig& cfg) {
    std::size_t total = 0;
    for (const Trajectory& t : prepared) {
        if (!t.has_marking_distances()) throw Error("corpus without ground truth");
        total += detect_gradient(t, cfg.layout, cfg.detect).size();
    }
    return total;
}

std::size_t count_detections(const Trajectory& prepared, Criterion criterion, const Perturbation& p,
                             std::size_t grid_index, const SweepConfig& cfg) {
    Trajectory t = apply(prepared, p, grid_index);
    if (cfg.refilter) t = lowpass(t, cfg.cutoff, cfg.layout);
    DetectParams dp = cfg.detect;
    dp.min_extent = cfg.min_extent;
    return detect(criterion, t, cfg.layout, dp).size();
}

namespace {

RobustnessReport assemble(Criterion criterion, std::span<const Perturbation> grid,
                          const std::vector<std::size_t>& cells, std::size_t n_traj, std::size_t truth) {
    RobustnessReport rep;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        RobustnessRow row;
        row.criterion = criterion;
        row.perturbation = grid[g];
        for (std::size_t i = 0; i < n_traj; ++i) row.detected += cells[g * n_traj + i];
        row.ground_truth = truth;
        row.ratio = truth > 0 ? static_cast<double>(row.detected) / static_cast<double>(truth) : 0.0;
        rep.rows.push_back(row);
    }
    return rep;
}

std::size_t resolve_truth(std::span<const Trajectory> prepared, const SweepConfig& cfg,
                          std::optional<std::size_t> truth_count) {
    if (truth_count) return *truth_count;
    for (const Trajectory& t : prepared)
        if (!t.has_marking_distances()) throw Error("corpus without ground truth");
    return gradient_ground_truth(prepared, cfg);
}

}  // namespace

RobustnessReport sweep(std::span<const Trajectory> prepared, Criterion criterion,
                       std::span<const Perturbation> grid, const SweepConfig& cfg,
                       std::optional<std::size_t> truth_count) {
    const std::size_t truth = resolve_truth(prepared, cfg, truth_count);
    const std::size_t n = prepared.size();
    std::vector<std::size_t> cells(grid.size() * n, 0);
    parallel_for(cells.size(), [&](std::size_t c) {
        const std::size_t g = c / n;
        const std::size_t i = c % n;
        cells[c] = count_detections(prepared[i], criterion, grid[g], g, cfg);
    });
    return assemble(criterion, grid, cells, n, truth);
}

RobustnessReport sweep_serial(std::span<const Trajectory> prepared, Criterion criterion,
                              std::span<const Perturbation> grid, const SweepConfig& cfg,
                              std::optional<std::size_t> truth_count) {
    const std::size_t truth = resolve_truth(prepared, cfg, truth_count);
    const std::size_t n = prepared.size();
    std::vector<std::size_t> cells(grid.size() * n, 0);
    for (std::size_t g = 0; g < grid.size(); ++g)
        for (std::size_t i = 0; i < n; ++i) cells[g * n + i] = count_detections(prepared[i], criterion, grid[g], g, cfg);
    return assemble(criterion, grid, cells, n, truth);
}

}  // namespace lanecrit
