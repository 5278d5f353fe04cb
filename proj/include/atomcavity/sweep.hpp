#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "atomcavity/analysis.hpp"
#include "atomcavity/config.hpp"
#include "atomcavity/params.hpp"
#include "atomcavity/series_io.hpp"
#include "atomcavity/twa.hpp"

namespace atomcavity {

inline constexpr const char* kCodeVersion = "atomcavity 0.1.0";

/// How each cell is simulated and classified.
struct CellOptions {
    Mode mode = Mode::MeanField;
    std::size_t n_traj = 100;                   // TWA only
    ProtocolTemplate protocol = ProtocolTemplate::classification();
    ClassifierThresholds thresholds;
    double mf_seed_amplitude = 1e-3;            // checkerboard admixture of MF runs
    unsigned threads = 1;                       // TWA trajectory workers
    bool retain_trajectories = false;
};

struct CellResult {
    std::size_t i = 0;          // delta_eff index
    std::size_t j = 0;          // eps index
    double delta_eff = 0.0;     // rad/s
    double eps = 0.0;           // E_rec
    std::uint64_t seed = 0;
    PhaseVerdict verdict;
    bool diverged = false;
    std::optional<double> diverged_at;

    friend bool operator==(const CellResult&, const CellResult&) = default;
};

/// A cell together with the series it was classified from.
struct CellRun {
    CellResult result;
    TrajectoryRecord record;                // MF trajectory or TWA ensemble mean
    std::optional<EnsembleResult> ensemble; // TWA only
};

/// Simulates one (delta_eff, eps) point. MF runs start from the homogeneous
/// condensate with a small checkerboard seed; TWA runs average
/// options.n_traj Wigner-sampled trajectories seeded from `seed`.
/// Divergence is reported through the `diverged` flag, not thrown.
CellRun simulate_cell(double delta_eff, double eps, const SystemParams& params,
                      const CellOptions& options, std::uint64_t seed);

/// Verdict-only form of simulate_cell().
CellResult run_cell(double delta_eff, double eps, const SystemParams& params,
                    const CellOptions& options, std::uint64_t seed);

struct SweepSpec {
    Axis delta_axis;  // rad/s
    Axis eps_axis;    // E_rec
    SystemParams params;
    CellOptions cell;
    std::uint64_t base_seed = 1;
    unsigned threads = 1;  // cell workers
};

/// Grid of verdicts, row-major: index = i * eps_count + j.
struct PhaseMap {
    std::size_t delta_count = 0;
    std::size_t eps_count = 0;
    std::vector<CellResult> cells;
    std::string mode;
    std::string params_digest;
    std::string code_version;
    std::uint64_t base_seed = 0;

    const CellResult& at(std::size_t i, std::size_t j) const { return cells.at(i * eps_count + j); }

    friend bool operator==(const PhaseMap&, const PhaseMap&) = default;
};

/// seed(cell) = mix_seed(mix_seed(base_seed, i), j).
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t i, std::size_t j);

/// Runs every cell; cells are independent and may run concurrently. Throws
/// DivergenceError only if every cell diverged.
PhaseMap run_sweep(const SweepSpec& spec);

/// One JSON header line, then one JSON line per cell.
void write_phase_map(std::ostream& os, const PhaseMap& map);
PhaseMap read_phase_map(std::istream& is);

enum class CutAxis {
    FixedDelta,  // varies eps at delta index `index`
    FixedEps     // varies delta_eff at eps index `index`
};

/// Line cut as columns: coordinate (eps or delta_eff in kHz), omega_B_khz
/// (NaN where the cell has no emergent frequency), label (0 NP, 1 DW, 2 LC,
/// 3 CHAOS), diverged.
ColumnarTable extract_cut(const PhaseMap& map, CutAxis axis, std::size_t index);

}  // namespace atomcavity
