#pragma once

#include <string>
#include <vector>

namespace atomcavity {

/// One linear piece of the pump schedule, eps in units of E_rec.
struct DriveSegment {
    double duration = 0.0;
    double eps_start = 0.0;
    double eps_end = 0.0;

    friend bool operator==(const DriveSegment&, const DriveSegment&) = default;
};

/// Piecewise-linear, continuous pump-strength schedule eps(t).
class DriveProtocol {
public:
    DriveProtocol() = default;

    /// Throws InvalidParameter on non-positive durations, negative eps, or a
    /// jump between consecutive segments.
    explicit DriveProtocol(std::vector<DriveSegment> segments);

    /// Linear ramp 0 -> eps over `ramp`, then constant eps for `hold`.
    static DriveProtocol ramp_and_hold(double eps, double ramp = 5e-3, double hold = 35e-3);

    /// Linear ramp 0 -> eps_end over `duration` (defaults: 2.5 E_rec over 17 ms).
    static DriveProtocol linear_ramp(double eps_end = 2.5, double duration = 17e-3);

    /// Constant eps for `duration`.
    static DriveProtocol constant(double eps, double duration = 40e-3);

    /// eps(t); clamps to the end values outside [0, duration].
    double pump_at(double t) const;

    double duration() const;

    const std::vector<DriveSegment>& segments() const { return segments_; }

    /// Compact textual form "duration:start:end,..." used in file headers
    /// and config files.
    std::string to_string() const;
    static DriveProtocol parse(const std::string& text);

    friend bool operator==(const DriveProtocol&, const DriveProtocol&) = default;

private:
    std::vector<DriveSegment> segments_;
};

}  // namespace atomcavity
