#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "atomcavity/analysis.hpp"
#include "atomcavity/drive_protocol.hpp"
#include "atomcavity/params.hpp"

namespace atomcavity {

enum class Mode { MeanField, Twa };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& text);  // "mf" or "twa"

/// How a detuning quoted "in kHz" is turned into rad/s.
enum class DetuningUnit {
    KiloHertz,        // value * 2 pi * 1e3 (default)
    KiloRadPerSecond  // value * 1e3
};

double detuning_to_angular(double value, DetuningUnit unit);
double detuning_from_angular(double omega, DetuningUnit unit);

/// A pump schedule with eps expressed as a fraction of the cell's target
/// pump strength.
struct ProtocolTemplate {
    std::string name;
    std::vector<DriveSegment> shape;

    DriveProtocol instantiate(double eps) const;

    /// 5 ms ramp to eps, then 35 ms hold.
    static ProtocolTemplate classification(double ramp = 5e-3, double hold = 35e-3);
    /// Linear ramp 0 -> eps over 17 ms.
    static ProtocolTemplate ramp(double duration = 17e-3);
    /// eps held for 40 ms from t = 0.
    static ProtocolTemplate constant(double duration = 40e-3);

    /// Preset name ("classification", "ramp", "constant") or literal
    /// "duration:start:end,..." shape.
    static ProtocolTemplate parse(const std::string& text);
};

struct Axis {
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 1;

    double at(std::size_t i) const;
};

/// Everything a CLI invocation can configure. Loaded from a flat
/// `key = value` file (see CONFIG.md); command-line flags override it.
struct RunConfig {
    SystemParams params;
    DetuningUnit detuning_unit = DetuningUnit::KiloHertz;
    std::optional<double> delta_eff_khz;
    std::optional<double> eps;
    Mode mode = Mode::MeanField;
    std::size_t trajectories = 100;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    ProtocolTemplate protocol = ProtocolTemplate::classification();
    double mf_seed_amplitude = 1e-3;
    ClassifierThresholds thresholds;
    Axis delta_axis_khz{-11.5, -11.5, 1};
    Axis eps_axis{0.9, 0.9, 1};
    std::optional<double> correlation_t1;
    bool retain_trajectories = false;
    std::string out_dir = "out";

    /// Applies one key; throws InvalidParameter on unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
};

RunConfig parse_config(std::istream& is, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace atomcavity
