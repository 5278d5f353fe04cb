#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "atomcavity/field_state.hpp"
#include "atomcavity/params.hpp"

namespace atomcavity {

/// Time derivatives of the atomic amplitudes and both cavity modes.
struct RhsOutput {
    ModeGrid dphi;
    Complex dalpha_plus{};
    Complex dalpha_minus{};
};

/// Right-hand side of the coupled condensate/cavity equations at pump
/// strength `eps_now` (units of E_rec):
///
///   dphi/dt     = -i [omega_rec (n^2 + m^2) phi + U_dip phi]
///   dalpha_pm/dt = i (delta_c - N_a U_pm B) alpha_pm - kappa alpha_pm
///                  - i (alpha_T / sqrt 2) N_a U_pm Phi
///
/// B and Phi are recomputed from the instantaneous atomic state.
RhsOutput rhs(const FieldState& state, double eps_now, const SystemParams& params);

/// Same right-hand side for a given pump amplitude |alpha_T|, evaluated with
/// the straightforward stencil and order-parameter routines.
void rhs_into(const FieldState& state, double pump_amp, const SystemParams& params,
              RhsOutput& out);

/// Fast evaluator of the same right-hand side. Works on a copy of the grid
/// padded by two empty rows/columns on every side so the stencil needs no
/// bounds checks; out-of-grid couplings read zeros, which is the hard
/// truncation.
class RhsEvaluator {
public:
    /// With `kinetic` false the omega_rec (n^2 + m^2) term is left out.
    explicit RhsEvaluator(const SystemParams& params, bool kinetic = true);

    void operator()(const FieldState& state, double pump_amp, RhsOutput& out);

private:
    SystemParams params_;
    int cutoff_;
    int width_;  // padded row length
    std::vector<Complex> padded_;
    std::vector<double> kinetic_;
};

struct NoiseSettings {
    bool enabled = false;
    std::uint64_t rng_seed = 0;
};

/// Cavity-loss noise: two independent Gaussian streams, one per
/// polarization, each derived from the settings' seed.
class NoiseSource {
public:
    explicit NoiseSource(const NoiseSettings& settings);

    bool enabled() const { return enabled_; }

    /// Adds sqrt(kappa dt / 2) (eta_1 + i eta_2) to each cavity amplitude.
    void kick(FieldState& state, double kappa, double dt);

private:
    bool enabled_;
    std::mt19937_64 plus_;
    std::mt19937_64 minus_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// Fixed-step classical RK4 with reusable stage buffers. The pump strength
/// is supplied at the three stage times t, t + dt/2 and t + dt. With
/// params.kinetic_frame the stages run in the interaction picture of the
/// kinetic term, which is then integrated exactly.
class Rk4Stepper {
public:
    explicit Rk4Stepper(const SystemParams& params);

    /// Advances `state` by params.dt. Throws DivergenceError if the result is
    /// not finite.
    void step(FieldState& state, double eps_start, double eps_mid, double eps_end);

    const SystemParams& params() const { return params_; }

private:
    void axpy(const FieldState& base, const RhsOutput& k, double h, FieldState& out) const;
    void step_lab(FieldState& state, double a0, double am, double a1);
    void step_frame(FieldState& state, double a0, double am, double a1);
    void rotate(std::vector<Complex>& v) const;

    SystemParams params_;
    RhsEvaluator rhs_;
    RhsOutput k1_, k2_, k3_, k4_;
    FieldState stage_, base_;
    std::vector<Complex> half_phase_;  // exp(-i omega_rec (n^2 + m^2) dt / 2)
};

/// One RK4 step of size params.dt at constant pump strength.
FieldState step_deterministic(const FieldState& state, double eps_now, const SystemParams& params);

/// Deterministic RK4 step followed by the additive cavity noise increment.
/// With a disabled source this is identical to step_deterministic.
FieldState step_stochastic(const FieldState& state, double eps_now, const SystemParams& params,
                           NoiseSource& noise);

/// Stable 64-bit mixing (splitmix64 finalizer) used for all seed derivation.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace atomcavity
