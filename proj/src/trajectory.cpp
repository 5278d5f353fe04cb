#include "atomcavity/trajectory.hpp"

#include <cmath>

#include "atomcavity/observables.hpp"

namespace atomcavity {

double TrajectoryRecord::sample_interval() const
{
    if (time.size() < 2) return 0.0;
    return (time.back() - time.front()) / static_cast<double>(time.size() - 1);
}

void TrajectoryRecord::reserve(std::size_t n)
{
    time.reserve(n);
    alpha_plus.reserve(n);
    photons_plus.reserve(n);
    photons_minus.reserve(n);
    dw_order.reserve(n);
    bunching.reserve(n);
}

void TrajectoryRecord::append(const FieldState& state)
{
    const auto op = order_parameters(state.phi);
    time.push_back(state.time);
    alpha_plus.push_back(state.alpha_plus);
    photons_plus.push_back(std::norm(state.alpha_plus));
    photons_minus.push_back(std::norm(state.alpha_minus));
    dw_order.push_back(op.dw_order);
    bunching.push_back(op.bunching);
}

TrajectoryRecord evolve(const FieldState& initial, const DriveProtocol& protocol,
                        const SystemParams& params, const NoiseSettings& noise)
{
    FieldState final_state;
    return evolve(initial, protocol, params, noise, final_state);
}

TrajectoryRecord evolve(const FieldState& initial, const DriveProtocol& protocol,
                        const SystemParams& params, const NoiseSettings& noise,
                        FieldState& final_state)
{
    params.validate();
    const double duration = protocol.duration();
    if (duration < params.sample_interval * (1.0 - 1e-12))
        throw InvalidParameter("protocol shorter than one sample interval");

    const std::int64_t per_sample = params.steps_per_sample();
    const auto samples =
        static_cast<std::int64_t>(std::floor(duration / params.sample_interval * (1.0 + 1e-12)));

    TrajectoryRecord rec;
    rec.params_digest = params.digest();
    rec.protocol = protocol.to_string();
    rec.seed = noise.rng_seed;
    rec.reserve(static_cast<std::size_t>(samples) + 1);

    Rk4Stepper stepper(params);
    NoiseSource source(noise);
    FieldState state = initial;
    const double t0 = initial.time;
    rec.append(state);

    std::int64_t steps_done = 0;
    try {
        for (std::int64_t s = 0; s < samples; ++s) {
            for (std::int64_t k = 0; k < per_sample; ++k) {
                // Protocol time is measured from the start of the run; step
                // times are rebuilt from the counter to avoid drift.
                const double t = static_cast<double>(steps_done) * params.dt;
                stepper.step(state, protocol.pump_at(t), protocol.pump_at(t + 0.5 * params.dt),
                             protocol.pump_at(t + params.dt));
                source.kick(state, params.cavity_linewidth, params.dt);
                ++steps_done;
                state.time = t0 + static_cast<double>(steps_done) * params.dt;
            }
            rec.append(state);
        }
    } catch (const DivergenceError& e) {
        throw TrajectoryDiverged(e.time(), e.what(), std::move(rec));
    }
    final_state = state;
    return rec;
}

}  // namespace atomcavity
