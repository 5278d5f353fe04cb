#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "atomcavity/drive_protocol.hpp"
#include "atomcavity/field_state.hpp"
#include "atomcavity/params.hpp"
#include "atomcavity/trajectory.hpp"

namespace atomcavity {

/// Wigner sample of the initial state: condensate in (0, 0) plus vacuum
/// noise of width 1/2 per complex mode in every atomic and cavity mode.
///
/// Atomic amplitudes are a_{n,m} = sqrt(N_a) delta_{n0} delta_{m0}
/// + (eta_1 + i eta_2) / 2, stored as phi = a / sqrt(N_a), so the sampled
/// norm is 1 + O(1/sqrt N_a). Cavity amplitudes are (eta_1 + i eta_2) / 2,
/// giving <|alpha|^2> = 1/2.
FieldState sample_initial(const SystemParams& params, std::uint64_t seed);

/// Seed of trajectory `index` in an ensemble; a pure function of its inputs.
std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index);

struct EnsembleSpec {
    std::size_t n_traj = 1000;
    std::uint64_t base_seed = 0;
    DriveProtocol protocol;
    SystemParams params;

    // Keep every per-trajectory record (needed for two-time correlations).
    bool retain_trajectories = false;
    // Cavity loss noise along the trajectories.
    bool noise = true;
    // When set, every trajectory starts from this state instead of a Wigner
    // sample (zero-width sampling).
    std::optional<FieldState> initial;
    // Worker threads; 0 means hardware concurrency. 1 runs inline.
    unsigned threads = 1;
};

struct EnsembleResult {
    std::vector<double> time;
    std::vector<double> mean_photons_plus;
    std::vector<double> mean_photons_minus;
    std::vector<double> mean_dw_order;
    std::vector<double> mean_bunching;
    std::vector<Complex> mean_alpha_plus;

    // Index-aligned with the trajectory indices; diverged entries are empty.
    std::vector<TrajectoryRecord> trajectories;

    std::size_t n_traj = 0;
    std::size_t diverged = 0;
    std::uint64_t base_seed = 0;
    std::string params_digest;
    std::string protocol;

    /// The mean series packaged as a TrajectoryRecord, for analysis and I/O.
    TrajectoryRecord mean_record() const;

    friend bool operator==(const EnsembleResult&, const EnsembleResult&) = default;
};

/// Evolves spec.n_traj trajectories and averages their observables pointwise
/// in time. Trajectories are accumulated in index order with compensated
/// summation regardless of the worker count, so the result does not depend
/// on scheduling. Diverged trajectories are excluded and counted; throws
/// DivergenceError if more than 1% diverge.
EnsembleResult run_ensemble(const EnsembleSpec& spec);

}  // namespace atomcavity
