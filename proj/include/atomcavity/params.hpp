#pragma once

#include <cstdint>
#include <numbers>
#include <string>

namespace atomcavity {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Frequencies quoted as "2pi x f" are stored as angular frequencies.
constexpr double hz_to_angular(double hz) { return kTwoPi * hz; }
constexpr double khz_to_angular(double khz) { return kTwoPi * 1e3 * khz; }
constexpr double angular_to_hz(double omega) { return omega / kTwoPi; }
constexpr double angular_to_khz(double omega) { return omega / (kTwoPi * 1e3); }

/// Physical constants and integration controls.
///
/// All rates are angular frequencies in rad/s and all times in seconds.
/// Energies are expressed as angular frequencies (hbar absorbed), so the
/// recoil energy E_rec is `recoil_freq`.
struct SystemParams {
    // Zero is accepted and means an atom-free cavity (no dispersive shift,
    // no Bragg scattering).
    std::int64_t atom_number = 60'000;
    double recoil_freq = hz_to_angular(3872.0);
    double cavity_linewidth = hz_to_angular(4500.0);
    double light_shift = hz_to_angular(1.14);  // U_0 > 0: blue detuning
    double pol_plus = 0.68;
    double pol_minus = 0.32;
    double detuning_eff = 0.0;
    int mode_cutoff = 6;
    double dt = 1e-7;
    double sample_interval = 1e-6;
    // RK4 in the frame rotating with the kinetic energy (the free phases
    // exp(-i omega_rec (n^2 + m^2) t) are applied exactly); false: plain RK4.
    bool kinetic_frame = true;

    /// Throws InvalidParameter if any invariant is violated.
    void validate() const;

    /// Number of integration steps per recorded sample.
    std::int64_t steps_per_sample() const;

    /// Stable textual digest of every field, for file headers.
    std::string digest() const;
};

/// Empty-cavity detuning delta_c = delta_eff + N_a U_0 / 2.
double detuning_cavity(const SystemParams& params);

/// Inverse of detuning_cavity: the delta_eff that yields a given delta_c.
double detuning_eff_for_cavity(double delta_c, const SystemParams& params);

/// Pump field amplitude |alpha_T| = sqrt(2 omega_rec eps / U_0) for a pump
/// strength eps in units of E_rec.
double pump_amplitude(double eps, const SystemParams& params);

/// eps = |alpha_T|^2 U_0 / (2 omega_rec).
double pump_strength(double amplitude, const SystemParams& params);

/// Dispersive coupling U_+ = U_0 zeta_+^2 and U_- = U_0 zeta_-^2.
inline double coupling_plus(const SystemParams& p) { return p.light_shift * p.pol_plus; }
inline double coupling_minus(const SystemParams& p) { return p.light_shift * p.pol_minus; }

}  // namespace atomcavity
