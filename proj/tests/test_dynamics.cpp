#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "atomcavity/drive_protocol.hpp"
#include "atomcavity/dynamics.hpp"
#include "atomcavity/errors.hpp"
#include "atomcavity/observables.hpp"
#include "atomcavity/trajectory.hpp"
#include "oracles.hpp"

using namespace atomcavity;

namespace {

SystemParams empty_cavity(double delta_c)
{
    SystemParams p;
    p.atom_number = 0;
    p.mode_cutoff = 1;
    p.detuning_eff = delta_c;  // no atoms: delta_c = delta_eff
    return p;
}

SystemParams at_point(double delta_khz)
{
    SystemParams p;
    p.detuning_eff = khz_to_angular(delta_khz);
    return p;
}

// Independent right-hand side: quadrature potential and order parameters,
// cavity equation written out from its definition.
RhsOutput reference_rhs(const FieldState& s, double eps, const SystemParams& p)
{
    const double at = std::sqrt(2.0 * p.recoil_freq * eps / p.light_shift);
    const ModeGrid u = oracle::quadrature_potential(s.phi, s.alpha_plus, s.alpha_minus, at, p);
    const auto ex = oracle::quadrature_expectations(s.phi);
    const double na = static_cast<double>(p.atom_number);
    const double dc = p.detuning_eff + na * p.light_shift / 2.0;
    const Complex I{0.0, 1.0};
    RhsOutput r;
    r.dphi = ModeGrid(p.mode_cutoff);
    const int c = p.mode_cutoff;
    for (int n = -c; n <= c; ++n)
        for (int m = -c; m <= c; ++m)
            r.dphi(n, m) = -I * (p.recoil_freq * (n * n + m * m) * s.phi(n, m) + u(n, m));
    auto cavity = [&](Complex a, double zeta2) {
        const double U = p.light_shift * zeta2;
        return I * (dc - na * U * ex.bunching) * a - p.cavity_linewidth * a -
               I * (at / std::sqrt(2.0)) * na * U * ex.dw;
    };
    r.dalpha_plus = cavity(s.alpha_plus, p.pol_plus);
    r.dalpha_minus = cavity(s.alpha_minus, p.pol_minus);
    return r;
}

double growth_rate(double eps, const SystemParams& p)
{
    // Log-slope between the mean photon numbers over [1, 3] ms and [4, 6] ms,
    // which averages out the recoil-scale oscillation.
    const TrajectoryRecord r =
        evolve(FieldState::seeded(p.mode_cutoff, 1e-6), DriveProtocol::constant(eps, 6e-3), p);
    double early = 0, late = 0;
    for (std::size_t k = 1000; k < 3000; ++k) early += r.photons_plus[k];
    for (std::size_t k = 4000; k < 6000; ++k) late += r.photons_plus[k];
    return std::log(late / early) / 3e-3;
}

}  // namespace

TEST_CASE("dark empty cavity is stationary")
{
    const RhsOutput r = rhs(FieldState::homogeneous(6), 0.0, SystemParams{});
    CHECK(r.dalpha_plus == Complex{});
    CHECK(r.dalpha_minus == Complex{});
    for (const auto& v : r.dphi.data()) CHECK(v == Complex{});
}

TEST_CASE("homogeneous condensate does not scatter into the cavity")
{
    const RhsOutput r = rhs(FieldState::homogeneous(6), 0.9, at_point(-11.5));
    CHECK(r.dalpha_plus == Complex{});
    CHECK(r.dalpha_minus == Complex{});
}

TEST_CASE("right-hand side matches the independent evaluation")
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 4; ++trial) {
        SystemParams p = at_point(-11.5 - 3.0 * trial);
        p.mode_cutoff = trial % 2 ? 6 : 3;
        FieldState s;
        s.phi = oracle::random_grid(p.mode_cutoff, rng);
        s.alpha_plus = {10.0 * trial - 5.0, 3.0};
        s.alpha_minus = {2.0, -7.0};
        const double eps = 0.3 + 0.4 * trial;
        const RhsOutput ref = reference_rhs(s, eps, p);
        const RhsOutput lib = rhs(s, eps, p);
        RhsOutput fast;
        RhsEvaluator eval(p);
        eval(s, pump_amplitude(eps, p), fast);

        double scale = 0;
        for (const auto& v : ref.dphi.data()) scale = std::max(scale, std::abs(v));
        CHECK(oracle::max_abs_diff(lib.dphi, ref.dphi) < 1e-11 * scale);
        CHECK(oracle::max_abs_diff(fast.dphi, ref.dphi) < 1e-11 * scale);
        const double ascale = std::abs(ref.dalpha_plus) + std::abs(ref.dalpha_minus);
        CHECK(std::abs(lib.dalpha_plus - ref.dalpha_plus) < 1e-10 * ascale);
        CHECK(std::abs(lib.dalpha_minus - ref.dalpha_minus) < 1e-10 * ascale);
        CHECK(std::abs(fast.dalpha_plus - ref.dalpha_plus) < 1e-10 * ascale);
        CHECK(std::abs(fast.dalpha_minus - ref.dalpha_minus) < 1e-10 * ascale);
    }
}

TEST_CASE("empty cavity decays and rotates analytically")
{
    for (double dc_over_kappa : {0.0, 1.0}) {
        SystemParams p = empty_cavity(0.0);
        p.detuning_eff = dc_over_kappa * p.cavity_linewidth;
        const double horizon = 1.0 / p.cavity_linewidth;
        const int steps = 400;
        p.dt = horizon / steps;
        p.sample_interval = p.dt;
        FieldState s = FieldState::homogeneous(1);
        s.alpha_plus = 1.0;
        for (int i = 0; i < steps; ++i) s = step_deterministic(s, 0.0, p);
        CHECK(std::abs(s.alpha_plus) == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
        CHECK(std::arg(s.alpha_plus) == doctest::Approx(dc_over_kappa).epsilon(1e-8));
        CHECK(s.time == doctest::Approx(horizon).epsilon(1e-12));
    }
}

TEST_CASE("RK4 global error scales as dt^4")
{
    SystemParams p = at_point(-11.5);
    p.mode_cutoff = 4;
    SUBCASE("kinetic frame") { p.kinetic_frame = true; }
    SUBCASE("lab frame") { p.kinetic_frame = false; }
    FieldState init = FieldState::seeded(p.mode_cutoff, 0.05);
    init.alpha_plus = {20.0, -5.0};
    init.alpha_minus = {-8.0, 3.0};
    const double horizon = 1e-3;
    auto run = [&](double dt) {
        SystemParams q = p;
        q.dt = dt;
        q.sample_interval = dt;
        FieldState s = init;
        const auto n = static_cast<long>(std::llround(horizon / dt));
        for (long i = 0; i < n; ++i) s = step_deterministic(s, 0.9, q);
        return s;
    };
    auto distance = [](const FieldState& a, const FieldState& b) {
        double d = std::norm(a.alpha_plus - b.alpha_plus) + std::norm(a.alpha_minus - b.alpha_minus);
        for (std::size_t i = 0; i < a.phi.size(); ++i) d += std::norm(a.phi.data()[i] - b.phi.data()[i]);
        return std::sqrt(d);
    };
    const FieldState ref = run(1.25e-8);
    const double e1 = distance(run(4e-7), ref);
    const double e2 = distance(run(2e-7), ref);
    MESSAGE("error ratio " << e1 / e2);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.2));
}

TEST_CASE("kinetic frame integrates free motion exactly")
{
    SystemParams p = at_point(-11.5);
    p.mode_cutoff = 3;
    std::mt19937_64 rng(4);
    const ModeGrid start = oracle::random_grid(3, rng);
    FieldState s;
    s.phi = start;
    const int steps = 2000;
    for (int i = 0; i < steps; ++i) s = step_deterministic(s, 0.0, p);
    // Without pump and photons the potential vanishes.
    ModeGrid exact(3);
    const double t = steps * p.dt;
    for (int n = -3; n <= 3; ++n)
        for (int m = -3; m <= 3; ++m)
            exact(n, m) = start(n, m) * std::polar(1.0, -p.recoil_freq * (n * n + m * m) * t);
    CHECK(oracle::max_abs_diff(s.phi, exact) < 1e-12);
    CHECK(std::abs(s.alpha_plus) == 0.0);
}

TEST_CASE("kinetic and lab frames agree to integration accuracy")
{
    SystemParams p = at_point(-11.5);
    p.mode_cutoff = 4;
    FieldState init = FieldState::seeded(4, 0.05);
    init.alpha_plus = {20.0, -5.0};
    const DriveProtocol proto = DriveProtocol::constant(0.9, 1e-3);
    FieldState a, b;
    evolve(init, proto, p, {}, a);
    p.kinetic_frame = false;
    evolve(init, proto, p, {}, b);
    CHECK(oracle::max_abs_diff(a.phi, b.phi) < 1e-5);
    CHECK(std::abs(a.alpha_plus - b.alpha_plus) < 1e-4 * std::abs(b.alpha_plus));
}

TEST_CASE("disabled noise is bit-identical to the deterministic step")
{
    const SystemParams p = at_point(-11.5);
    FieldState s = FieldState::seeded(6, 0.01);
    s.alpha_plus = {3.0, 1.0};
    NoiseSource off(NoiseSettings{false, 42});
    CHECK(step_stochastic(s, 0.9, p, off) == step_deterministic(s, 0.9, p));

    NoiseSource on(NoiseSettings{true, 42});
    const FieldState noisy = step_stochastic(s, 0.9, p, on);
    CHECK(noisy.phi == step_deterministic(s, 0.9, p).phi);
    CHECK(noisy.alpha_plus != step_deterministic(s, 0.9, p).alpha_plus);
}

TEST_CASE("noise streams are reproducible and independent per polarization")
{
    FieldState a = FieldState::homogeneous(1), b = a;
    NoiseSource na(NoiseSettings{true, 7}), nb(NoiseSettings{true, 7});
    for (int i = 0; i < 100; ++i) {
        na.kick(a, 1.0, 1.0);
        nb.kick(b, 1.0, 1.0);
    }
    CHECK(a == b);
    CHECK(a.alpha_plus != a.alpha_minus);
}

TEST_CASE("noisy empty cavity relaxes to half a photon")
{
    const SystemParams p = empty_cavity(0.0);
    const int n_traj = 10000;
    const int steps = static_cast<int>(10.0 / p.cavity_linewidth / p.dt);
    double sum = 0, sum2 = 0;
    Complex mean{};
    Rk4Stepper stepper(p);
    for (int k = 0; k < n_traj; ++k) {
        NoiseSource noise(NoiseSettings{true, mix_seed(99, static_cast<std::uint64_t>(k))});
        FieldState s = FieldState::homogeneous(1);
        for (int i = 0; i < steps; ++i) {
            stepper.step(s, 0.0, 0.0, 0.0);
            noise.kick(s, p.cavity_linewidth, p.dt);
        }
        const double n = std::norm(s.alpha_plus);
        sum += n;
        sum2 += n * n;
        mean += s.alpha_plus;
    }
    const double avg = sum / n_traj;
    const double se = std::sqrt((sum2 / n_traj - avg * avg) / n_traj);
    CHECK(std::abs(avg - 0.5) < 3.0 * se);
    mean /= static_cast<double>(n_traj);
    // <alpha> has standard error sqrt(0.5 / n_traj) per component.
    CHECK(std::abs(mean.real()) < 3.0 * std::sqrt(0.25 / n_traj));
    CHECK(std::abs(mean.imag()) < 3.0 * std::sqrt(0.25 / n_traj));
}

TEST_CASE("divergence is reported with its time")
{
    SystemParams p = at_point(-11.5);
    p.kinetic_frame = false;
    p.dt = 1e-4;  // far beyond the RK4 stability limit
    p.sample_interval = 1e-4;
    try {
        evolve(FieldState::seeded(6, 0.01), DriveProtocol::constant(0.9, 40e-3), p);
        FAIL("expected divergence");
    } catch (const TrajectoryDiverged& e) {
        CHECK(e.time() > 0.0);
        CHECK(e.time() <= 40e-3);
        CHECK(e.partial().size() >= 1);
    }
}

TEST_CASE("record layout")
{
    const SystemParams p = at_point(-11.5);
    const TrajectoryRecord r =
        evolve(FieldState::homogeneous(6), DriveProtocol::constant(0.0, 1e-3), p);
    CHECK(r.size() == 1001);
    CHECK(r.time.front() == 0.0);
    CHECK(r.time.back() == doctest::Approx(1e-3));
    for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(r.photons_plus[i] == 0.0);
        CHECK(r.dw_order[i] == 0.0);
    }
    CHECK(r.params_digest == p.digest());

    const TrajectoryRecord ramp = evolve(FieldState::homogeneous(6), DriveProtocol::linear_ramp(), p);
    CHECK(ramp.size() == 17001);
    CHECK(ramp.time.back() == doctest::Approx(17e-3));
}

TEST_CASE("deterministic evolution: parity sector, norm, Z2 equivariance")
{
    const SystemParams p = at_point(-11.5);
    const DriveProtocol ramp({{5e-3, 0.0, 0.9}});
    const FieldState init = FieldState::seeded(6, 1e-3);
    FieldState end, end_t;
    const TrajectoryRecord r = evolve(init, ramp, p, {}, end);
    evolve(z2_transform(init), ramp, p, {}, end_t);

    double odd = 0;
    for (int n = -6; n <= 6; ++n)
        for (int m = -6; m <= 6; ++m)
            if ((n + m) % 2) odd = std::max(odd, std::abs(end.phi(n, m)));
    CHECK(odd < 1e-14);
    CHECK(std::abs(end.phi.norm() - 1.0) < 1e-6);
    CHECK(r.photons_plus.back() > 1.0);  // self-organized by the end of the ramp

    const FieldState mapped = z2_transform(end);
    CHECK(oracle::max_abs_diff(mapped.phi, end_t.phi) < 1e-8);
    CHECK(std::abs(mapped.alpha_plus - end_t.alpha_plus) < 1e-8 * std::max(1.0, std::abs(end.alpha_plus)));
    CHECK(std::abs(mapped.alpha_minus - end_t.alpha_minus) < 1e-8 * std::max(1.0, std::abs(end.alpha_minus)));
}

TEST_CASE("density-wave fixed point balances the cavity equation")
{
    // A stationary self-organized point of this model (see the calibration
    // notes in the README).
    const SystemParams p = at_point(-22.0);
    const double eps = 1.8;
    FieldState s;
    evolve(FieldState::seeded(6, 1e-3), DriveProtocol::ramp_and_hold(eps, 5e-3, 95e-3), p, {}, s);
    const RhsOutput r = rhs(s, eps, p);
    CHECK(std::abs(r.dalpha_plus) < 1e-6 * p.cavity_linewidth * std::abs(s.alpha_plus));
    CHECK(std::abs(r.dalpha_minus) < 1e-6 * p.cavity_linewidth * std::abs(s.alpha_minus));

    // Stationary amplitude from setting d alpha / dt = 0.
    const double na = static_cast<double>(p.atom_number);
    const double at = pump_amplitude(eps, p);
    const auto op = order_parameters(s.phi);
    const double U = coupling_plus(p);
    const Complex ss = (at / std::sqrt(2.0)) * na * U * op.dw_order /
                       Complex{detuning_cavity(p) - na * U * op.bunching, p.cavity_linewidth};
    CHECK(std::abs(ss - s.alpha_plus) < 1e-6 * std::abs(s.alpha_plus));
}

TEST_CASE("normal-phase instability threshold located by bisection")
{
    // Both cavity modes are red of their dispersively shifted resonance here,
    // so the normal phase has a finite threshold.
    const SystemParams p = at_point(-28.0);
    double lo = 0.5, hi = 1.5;
    REQUIRE(growth_rate(lo, p) < 0);
    REQUIRE(growth_rate(hi, p) > 0);
    for (int i = 0; i < 8; ++i) {
        const double mid = 0.5 * (lo + hi);
        (growth_rate(mid, p) > 0 ? hi : lo) = mid;
    }
    const double threshold = 0.5 * (lo + hi);
    const double grid_step = 0.02;
    MESSAGE("threshold eps = " << threshold);
    CHECK(growth_rate(threshold - grid_step, p) < 0);
    CHECK(growth_rate(threshold + grid_step, p) > 0);
}
