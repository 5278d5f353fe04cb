#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "atomcavity/drive_protocol.hpp"
#include "atomcavity/dynamics.hpp"
#include "atomcavity/errors.hpp"
#include "atomcavity/field_state.hpp"
#include "atomcavity/params.hpp"

namespace atomcavity {

/// Observables sampled every `sample_interval` along one trajectory.
struct TrajectoryRecord {
    std::vector<double> time;
    std::vector<Complex> alpha_plus;
    std::vector<double> photons_plus;   // |alpha_+|^2
    std::vector<double> photons_minus;  // |alpha_-|^2
    std::vector<double> dw_order;       // Phi
    std::vector<double> bunching;       // B

    // Provenance, written to file headers.
    std::string params_digest;
    std::string protocol;
    std::uint64_t seed = 0;

    std::size_t size() const { return time.size(); }
    double sample_interval() const;

    void reserve(std::size_t n);
    void append(const FieldState& state);

    friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// Divergence inside evolve(); carries the samples recorded before failure.
class TrajectoryDiverged : public DivergenceError {
public:
    TrajectoryDiverged(double time, const std::string& what, TrajectoryRecord partial)
        : DivergenceError(time, what), partial_(std::move(partial)) {}

    const TrajectoryRecord& partial() const { return partial_; }

private:
    TrajectoryRecord partial_;
};

/// Integrates `initial` through `protocol`, recording
/// floor(duration / sample_interval) + 1 samples starting at the initial
/// state. With noise enabled the cavity modes receive the loss noise after
/// every step.
TrajectoryRecord evolve(const FieldState& initial, const DriveProtocol& protocol,
                        const SystemParams& params, const NoiseSettings& noise = {});

/// As evolve(), also returning the final state through `final_state`.
TrajectoryRecord evolve(const FieldState& initial, const DriveProtocol& protocol,
                        const SystemParams& params, const NoiseSettings& noise,
                        FieldState& final_state);

}  // namespace atomcavity
