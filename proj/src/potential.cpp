#include "atomcavity/potential.hpp"

#include <cmath>
#include <numbers>

namespace atomcavity {

PotentialStencil potential_stencil(Complex alpha_plus, Complex alpha_minus, double pump_amp,
                                   const SystemParams& params)
{
    const double u0 = params.light_shift;
    const double cavity_photons =
        params.pol_minus * std::norm(alpha_minus) + params.pol_plus * std::norm(alpha_plus);
    const double quadrature =
        2.0 * (params.pol_minus * alpha_minus.real() + params.pol_plus * alpha_plus.real());
    const double pump_sq = pump_amp * pump_amp;

    PotentialStencil st;
    // cos^2 x = 1/2 + (e^{2ix} + e^{-2ix}) / 4
    st.diagonal = u0 * (0.5 * cavity_photons + 0.25 * pump_sq);
    st.cavity_axis = 0.25 * u0 * cavity_photons;
    st.pump_axis = 0.125 * u0 * pump_sq;
    // cos(ky) cos(kz) = sum over the four (+-1, +-1) exponentials / 4
    st.cross = 0.25 * u0 * pump_amp * (1.0 / std::numbers::sqrt2) * quadrature;
    return st;
}

void apply_stencil(const PotentialStencil& st, const ModeGrid& in, ModeGrid& out)
{
    const int c = in.cutoff();
    for (int n = -c; n <= c; ++n) {
        for (int m = -c; m <= c; ++m) {
            Complex acc = st.diagonal * in(n, m);
            Complex axis_z{};
            if (m - 2 >= -c) axis_z += in(n, m - 2);
            if (m + 2 <= c) axis_z += in(n, m + 2);
            Complex axis_y{};
            if (n - 2 >= -c) axis_y += in(n - 2, m);
            if (n + 2 <= c) axis_y += in(n + 2, m);
            Complex corners{};
            if (n - 1 >= -c) {
                if (m - 1 >= -c) corners += in(n - 1, m - 1);
                if (m + 1 <= c) corners += in(n - 1, m + 1);
            }
            if (n + 1 <= c) {
                if (m - 1 >= -c) corners += in(n + 1, m - 1);
                if (m + 1 <= c) corners += in(n + 1, m + 1);
            }
            acc += st.cavity_axis * axis_z + st.pump_axis * axis_y + st.cross * corners;
            out(n, m) += acc;
        }
    }
}

ModeGrid potential_apply(const FieldState& state, double pump_amp, const SystemParams& params)
{
    ModeGrid out(state.phi.cutoff());
    apply_stencil(potential_stencil(state.alpha_plus, state.alpha_minus, pump_amp, params),
                  state.phi, out);
    return out;
}

}  // namespace atomcavity
