#pragma once

#include "atomcavity/field_state.hpp"
#include "atomcavity/params.hpp"

namespace atomcavity {

/// Stencil weights of the dipole potential in the plane-wave basis, in rad/s.
///
/// U_dip / hbar = U_0 [cos^2(kz) S + |alpha_T|^2 cos^2(ky) / 2
///                     + (alpha_T / sqrt 2) cos(kz) cos(ky) X]
/// with S = sum_pm zeta_pm^2 |alpha_pm|^2 and X = sum_pm zeta_pm^2 (alpha_pm + alpha_pm^*).
struct PotentialStencil {
    double diagonal = 0.0;    // (n, m)
    double cavity_axis = 0.0; // (n, m +- 2)
    double pump_axis = 0.0;   // (n +- 2, m)
    double cross = 0.0;       // (n +- 1, m +- 1)
};

PotentialStencil potential_stencil(Complex alpha_plus, Complex alpha_minus, double pump_amp,
                                   const SystemParams& params);

/// out += stencil applied to in. Couplings leaving the grid are dropped.
void apply_stencil(const PotentialStencil& stencil, const ModeGrid& in, ModeGrid& out);

/// Momentum-space image of U_dip Psi for the cavity fields carried by
/// `state` and a pump amplitude |alpha_T| = `pump_amp`.
ModeGrid potential_apply(const FieldState& state, double pump_amp, const SystemParams& params);

}  // namespace atomcavity
