#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "atomcavity/analysis.hpp"
#include "atomcavity/trajectory.hpp"
#include "atomcavity/twa.hpp"

namespace atomcavity {

/// Plain-text columnar file:
///
///   # atomcavity-series 1
///   # <key>: <value>          (metadata, any number, in order)
///   # columns: <name> <name> ...
///   <row of %.17g values>
///
/// Values are printed with 17 significant digits, so doubles round-trip
/// exactly.
struct ColumnarTable {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  // one vector per column

    const std::string& meta_value(const std::string& key) const;  // throws InputError
    bool has_meta(const std::string& key) const;
    const std::vector<double>& column(const std::string& name) const;  // throws InputError
};

void write_table(std::ostream& os, const ColumnarTable& table);
ColumnarTable read_table(std::istream& is);

/// Throw IoError on filesystem failures.
void write_table(const std::filesystem::path& path, const ColumnarTable& table);
ColumnarTable read_table(const std::filesystem::path& path);

// Column order of trajectory and ensemble files.
inline const std::vector<std::string> kTrajectoryColumns = {
    "t", "re_alpha_plus", "im_alpha_plus", "n_plus", "n_minus", "phi", "bunching"};

ColumnarTable trajectory_table(const TrajectoryRecord& record);
TrajectoryRecord trajectory_from_table(const ColumnarTable& table);

/// Mean series plus n_traj, base_seed and diverged metadata.
ColumnarTable ensemble_table(const EnsembleResult& result);

/// Columns f_hz, magnitude.
ColumnarTable spectrum_table(const Spectrum& spectrum);

/// Columns t, re_C, im_C; metadata t1, normalization, average_from.
ColumnarTable correlation_table(const CorrelationTrace& trace);
CorrelationTrace correlation_from_table(const ColumnarTable& table);

}  // namespace atomcavity
