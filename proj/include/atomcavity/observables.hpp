#pragma once

#include "atomcavity/field_state.hpp"

namespace atomcavity {

// Expectation values are normalized by the current sum of |phi|^2, so
// Wigner-sampled states need not be renormalized. Both throw DegenerateState
// on a zero-norm grid.

/// Bunching B = <cos^2(kz)> along the cavity axis, in [0, 1].
double bunching(const ModeGrid& phi);

/// Checkerboard order parameter Phi = <cos(kz) cos(ky)>, in [-1, 1].
double dw_order(const ModeGrid& phi);

inline double bunching(const FieldState& s) { return bunching(s.phi); }
inline double dw_order(const FieldState& s) { return dw_order(s.phi); }

struct OrderParameters {
    double bunching;
    double dw_order;
};

/// Both order parameters in one pass over the grid.
OrderParameters order_parameters(const ModeGrid& phi);

}  // namespace atomcavity
