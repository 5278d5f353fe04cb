#include "atomcavity/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "atomcavity/errors.hpp"
#include "atomcavity/observables.hpp"
#include "atomcavity/potential.hpp"

namespace atomcavity {

namespace {

constexpr Complex kI{0.0, 1.0};

}  // namespace

void rhs_into(const FieldState& state, double pump_amp, const SystemParams& params,
              RhsOutput& out)
{
    const int c = state.phi.cutoff();
    if (out.dphi.cutoff() != c || out.dphi.size() != state.phi.size()) out.dphi = ModeGrid(c);

    // Atoms: kinetic + dipole potential, then multiply by -i.
    auto& d = out.dphi;
    std::fill(d.data().begin(), d.data().end(), Complex{});
    apply_stencil(potential_stencil(state.alpha_plus, state.alpha_minus, pump_amp, params),
                  state.phi, d);
    for (int n = -c; n <= c; ++n) {
        for (int m = -c; m <= c; ++m) {
            const double kinetic = params.recoil_freq * static_cast<double>(n * n + m * m);
            const Complex h = d(n, m) + kinetic * state.phi(n, m);
            d(n, m) = Complex{h.imag(), -h.real()};  // -i h
        }
    }

    // Cavity modes.
    const double atoms = static_cast<double>(params.atom_number);
    double b = 0.5, phi_dw = 0.0;
    if (atoms > 0) {
        const auto op = order_parameters(state.phi);
        b = op.bunching;
        phi_dw = op.dw_order;
    }
    const double delta_c = detuning_cavity(params);
    const double kappa = params.cavity_linewidth;
    const double drive = pump_amp * (1.0 / std::numbers::sqrt2) * atoms * phi_dw;
    auto cavity = [&](Complex alpha, double u) {
        return (kI * (delta_c - atoms * u * b) - kappa) * alpha - kI * (drive * u);
    };
    out.dalpha_plus = cavity(state.alpha_plus, coupling_plus(params));
    out.dalpha_minus = cavity(state.alpha_minus, coupling_minus(params));
}

RhsEvaluator::RhsEvaluator(const SystemParams& params, bool kinetic)
    : params_(params), cutoff_(params.mode_cutoff), width_(2 * params.mode_cutoff + 5)
{
    padded_.assign(static_cast<std::size_t>(width_) * width_, Complex{});
    const int c = cutoff_;
    kinetic_.reserve(static_cast<std::size_t>(2 * c + 1) * (2 * c + 1));
    for (int n = -c; n <= c; ++n)
        for (int m = -c; m <= c; ++m)
            kinetic_.push_back(kinetic ? params.recoil_freq * static_cast<double>(n * n + m * m)
                                       : 0.0);
}

void RhsEvaluator::operator()(const FieldState& state, double pump_amp, RhsOutput& out)
{
    const int c = cutoff_;
    const int side = 2 * c + 1;
    const std::ptrdiff_t w = width_;
    if (state.phi.cutoff() != c) throw InvalidParameter("state cutoff does not match parameters");
    if (out.dphi.cutoff() != c || out.dphi.size() != state.phi.size()) out.dphi = ModeGrid(c);

    // Interior copy; the border stays zero.
    const Complex* src = state.phi.data().data();
    for (int r = 0; r < side; ++r) {
        Complex* row = padded_.data() + (r + 2) * w + 2;
        std::copy(src + r * side, src + (r + 1) * side, row);
    }

    // Order parameters, written out in real arithmetic.
    double norm = 0.0, shift_z2 = 0.0, diag = 0.0, anti = 0.0;
    for (int r = 0; r < side; ++r) {
        const Complex* p = padded_.data() + (r + 2) * w + 2;
        for (int k = 0; k < side; ++k) {
            const double vr = p[k].real(), vi = p[k].imag();
            norm += vr * vr + vi * vi;
            const Complex z = p[k + 2], d = p[k + w + 1], a = p[k + w - 1];
            shift_z2 += z.real() * vr + z.imag() * vi;
            diag += d.real() * vr + d.imag() * vi;
            anti += a.real() * vr + a.imag() * vi;
        }
    }

    const double atoms = static_cast<double>(params_.atom_number);
    double b = 0.5, phi_dw = 0.0;
    if (atoms > 0) {
        if (norm == 0.0) throw DegenerateState("order parameter of a zero-norm state");
        b = 0.5 + 0.5 * shift_z2 / norm;
        phi_dw = 0.5 * (diag + anti) / norm;
    }

    const PotentialStencil st =
        potential_stencil(state.alpha_plus, state.alpha_minus, pump_amp, params_);
    Complex* dst = out.dphi.data().data();
    for (int r = 0; r < side; ++r) {
        const Complex* p = padded_.data() + (r + 2) * w + 2;
        const double* kin = kinetic_.data() + r * side;
        Complex* o = dst + r * side;
        for (int k = 0; k < side; ++k) {
            const Complex h = (st.diagonal + kin[k]) * p[k] +
                              st.cavity_axis * (p[k - 2] + p[k + 2]) +
                              st.pump_axis * (p[k - 2 * w] + p[k + 2 * w]) +
                              st.cross * ((p[k - w - 1] + p[k - w + 1]) + (p[k + w - 1] + p[k + w + 1]));
            o[k] = Complex{h.imag(), -h.real()};
        }
    }

    const double delta_c = detuning_cavity(params_);
    const double kappa = params_.cavity_linewidth;
    const double drive = pump_amp * (1.0 / std::numbers::sqrt2) * atoms * phi_dw;
    auto cavity = [&](Complex alpha, double u) {
        const double rot = delta_c - atoms * u * b;
        return Complex{-kappa * alpha.real() - rot * alpha.imag(),
                       rot * alpha.real() - kappa * alpha.imag() - drive * u};
    };
    out.dalpha_plus = cavity(state.alpha_plus, coupling_plus(params_));
    out.dalpha_minus = cavity(state.alpha_minus, coupling_minus(params_));
}

RhsOutput rhs(const FieldState& state, double eps_now, const SystemParams& params)
{
    RhsOutput out;
    rhs_into(state, pump_amplitude(eps_now, params), params, out);
    return out;
}

NoiseSource::NoiseSource(const NoiseSettings& settings)
    : enabled_(settings.enabled),
      plus_(mix_seed(settings.rng_seed, 0x2b)),
      minus_(mix_seed(settings.rng_seed, 0x2d))
{
}

void NoiseSource::kick(FieldState& state, double kappa, double dt)
{
    if (!enabled_) return;
    const double scale = std::sqrt(0.5 * kappa * dt);
    const double p1 = gauss_(plus_);
    const double p2 = gauss_(plus_);
    const double m1 = gauss_(minus_);
    const double m2 = gauss_(minus_);
    state.alpha_plus += scale * Complex{p1, p2};
    state.alpha_minus += scale * Complex{m1, m2};
}

Rk4Stepper::Rk4Stepper(const SystemParams& params)
    : params_(params), rhs_(params, !params.kinetic_frame)
{
    params_.validate();
    const int c = params_.mode_cutoff;
    for (auto* k : {&k1_, &k2_, &k3_, &k4_}) k->dphi = ModeGrid(c);
    stage_.phi = ModeGrid(c);
    base_.phi = ModeGrid(c);
    if (params_.kinetic_frame) {
        for (int n = -c; n <= c; ++n)
            for (int m = -c; m <= c; ++m)
                half_phase_.push_back(std::polar(
                    1.0, -0.5 * params_.dt * params_.recoil_freq * static_cast<double>(n * n + m * m)));
    }
}

void Rk4Stepper::axpy(const FieldState& base, const RhsOutput& k, double h, FieldState& out) const
{
    const auto& b = base.phi.data();
    const auto& kd = k.dphi.data();
    auto& o = out.phi.data();
    for (std::size_t i = 0; i < b.size(); ++i) o[i] = b[i] + h * kd[i];
    out.alpha_plus = base.alpha_plus + h * k.dalpha_plus;
    out.alpha_minus = base.alpha_minus + h * k.dalpha_minus;
}

void Rk4Stepper::rotate(std::vector<Complex>& v) const
{
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= half_phase_[i];
}

void Rk4Stepper::step(FieldState& state, double eps_start, double eps_mid, double eps_end)
{
    if (state.phi.cutoff() != params_.mode_cutoff)
        throw InvalidParameter("state cutoff does not match parameters");

    const double a0 = pump_amplitude(eps_start, params_);
    const double am = pump_amplitude(eps_mid, params_);
    const double a1 = pump_amplitude(eps_end, params_);
    if (params_.kinetic_frame)
        step_frame(state, a0, am, a1);
    else
        step_lab(state, a0, am, a1);
    state.time += params_.dt;

    if (!state.finite())
        throw DivergenceError(state.time,
                              "non-finite state at t = " + std::to_string(state.time) + " s");
}

void Rk4Stepper::step_lab(FieldState& state, double a0, double am, double a1)
{
    const double h = params_.dt;
    rhs_(state, a0, k1_);
    axpy(state, k1_, 0.5 * h, stage_);
    rhs_(stage_, am, k2_);
    axpy(state, k2_, 0.5 * h, stage_);
    rhs_(stage_, am, k3_);
    axpy(state, k3_, h, stage_);
    rhs_(stage_, a1, k4_);

    const double w = h / 6.0;
    auto& y = state.phi.data();
    const auto& d1 = k1_.dphi.data();
    const auto& d2 = k2_.dphi.data();
    const auto& d3 = k3_.dphi.data();
    const auto& d4 = k4_.dphi.data();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += w * (d1[i] + 2.0 * (d2[i] + d3[i]) + d4[i]);
    state.alpha_plus +=
        w * (k1_.dalpha_plus + 2.0 * (k2_.dalpha_plus + k3_.dalpha_plus) + k4_.dalpha_plus);
    state.alpha_minus +=
        w * (k1_.dalpha_minus + 2.0 * (k2_.dalpha_minus + k3_.dalpha_minus) + k4_.dalpha_minus);
}

// RK4 in the interaction picture: stages live at the half-step frame, the
// free evolution over each half step is applied exactly.
void Rk4Stepper::step_frame(FieldState& state, double a0, double am, double a1)
{
    const double h = params_.dt;
    base_.phi.data() = state.phi.data();
    rotate(base_.phi.data());
    base_.alpha_plus = state.alpha_plus;
    base_.alpha_minus = state.alpha_minus;

    rhs_(state, a0, k1_);
    rotate(k1_.dphi.data());
    axpy(base_, k1_, 0.5 * h, stage_);
    rhs_(stage_, am, k2_);
    axpy(base_, k2_, 0.5 * h, stage_);
    rhs_(stage_, am, k3_);
    axpy(base_, k3_, h, stage_);
    rotate(stage_.phi.data());
    rhs_(stage_, a1, k4_);

    const double w = h / 6.0;
    auto& y = state.phi.data();
    const auto& b = base_.phi.data();
    const auto& d1 = k1_.dphi.data();
    const auto& d2 = k2_.dphi.data();
    const auto& d3 = k3_.dphi.data();
    const auto& d4 = k4_.dphi.data();
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = (b[i] + w * (d1[i] + 2.0 * (d2[i] + d3[i]))) * half_phase_[i] + w * d4[i];
    state.alpha_plus +=
        w * (k1_.dalpha_plus + 2.0 * (k2_.dalpha_plus + k3_.dalpha_plus) + k4_.dalpha_plus);
    state.alpha_minus +=
        w * (k1_.dalpha_minus + 2.0 * (k2_.dalpha_minus + k3_.dalpha_minus) + k4_.dalpha_minus);
}

FieldState step_deterministic(const FieldState& state, double eps_now, const SystemParams& params)
{
    Rk4Stepper stepper(params);
    FieldState next = state;
    stepper.step(next, eps_now, eps_now, eps_now);
    return next;
}

FieldState step_stochastic(const FieldState& state, double eps_now, const SystemParams& params,
                           NoiseSource& noise)
{
    FieldState next = step_deterministic(state, eps_now, params);
    noise.kick(next, params.cavity_linewidth, params.dt);
    return next;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    return splitmix64(splitmix64(a) ^ b);
}

}  // namespace atomcavity
