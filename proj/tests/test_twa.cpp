#include "doctest.h"

#include <cmath>
#include <set>

#include "atomcavity/analysis.hpp"
#include "atomcavity/errors.hpp"
#include "atomcavity/observables.hpp"
#include "atomcavity/trajectory.hpp"
#include "atomcavity/twa.hpp"

using namespace atomcavity;

namespace {

struct Moments {
    double mean = 0, sq = 0;
    int n = 0;
    void add(double x)
    {
        mean += x;
        sq += x * x;
        ++n;
    }
    double avg() const { return mean / n; }
    double se() const { return std::sqrt((sq / n - avg() * avg()) / n); }
};

SystemParams small(int cutoff, double delta_khz = -22.0)
{
    SystemParams p;
    p.mode_cutoff = cutoff;
    p.detuning_eff = khz_to_angular(delta_khz);
    return p;
}

}  // namespace

TEST_CASE("Wigner sampling moments")
{
    SystemParams p = small(2);
    p.atom_number = 200;
    const double modes = 25.0;
    Moments norm, ap, am, re00;
    for (std::uint64_t s = 0; s < 4000; ++s) {
        const FieldState f = sample_initial(p, s);
        norm.add(f.phi.norm());
        ap.add(std::norm(f.alpha_plus));
        am.add(std::norm(f.alpha_minus));
        re00.add(f.phi(0, 0).real());
    }
    const double expect = 1.0 + modes / (2.0 * 200.0);
    CHECK(std::abs(norm.avg() - expect) < 4 * norm.se());
    CHECK(std::abs(ap.avg() - 0.5) < 4 * ap.se());
    CHECK(std::abs(am.avg() - 0.5) < 4 * am.se());
    CHECK(std::abs(re00.avg() - 1.0) < 4 * re00.se());
}

TEST_CASE("Wigner sampling variance per atomic mode")
{
    SystemParams p = small(1);
    p.atom_number = 50;
    Moments side;
    for (std::uint64_t s = 0; s < 4000; ++s) {
        const FieldState f = sample_initial(p, s);
        side.add(std::norm(f.phi(1, -1)) * 50.0);
    }
    CHECK(std::abs(side.avg() - 0.5) < 4 * side.se());
}

TEST_CASE("sampling is a pure function of the seed")
{
    const SystemParams p = small(2);
    CHECK(sample_initial(p, 7) == sample_initial(p, 7));
    CHECK_FALSE(sample_initial(p, 7) == sample_initial(p, 8));

    SystemParams empty = p;
    empty.atom_number = 0;
    CHECK_THROWS_AS(sample_initial(empty, 1), InvalidParameter);
}

TEST_CASE("trajectory seeds are distinct")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(trajectory_seed(42, i));
    CHECK(seen.size() == 10000);
    CHECK(trajectory_seed(1, 0) != trajectory_seed(2, 0));
    CHECK(trajectory_seed(5, 3) == trajectory_seed(5, 3));
}

TEST_CASE("single-trajectory ensemble is that trajectory")
{
    EnsembleSpec spec;
    spec.n_traj = 1;
    spec.base_seed = 11;
    spec.params = small(2);
    spec.protocol = DriveProtocol::ramp_and_hold(1.0, 0.5e-3, 0.5e-3);
    const EnsembleResult e = run_ensemble(spec);

    const std::uint64_t seed = trajectory_seed(11, 0);
    const TrajectoryRecord r =
        evolve(sample_initial(spec.params, seed), spec.protocol, spec.params, {true, seed});
    CHECK(e.time == r.time);
    CHECK(e.mean_photons_plus == r.photons_plus);
    CHECK(e.mean_photons_minus == r.photons_minus);
    CHECK(e.mean_dw_order == r.dw_order);
    CHECK(e.mean_alpha_plus == r.alpha_plus);
}

TEST_CASE("zero-width ensemble reduces to mean field")
{
    EnsembleSpec spec;
    spec.n_traj = 8;
    spec.params = small(2);
    spec.protocol = DriveProtocol::ramp_and_hold(1.8, 1e-3, 1e-3);
    spec.noise = false;
    spec.initial = FieldState::seeded(2, 1e-3);
    spec.retain_trajectories = true;
    spec.threads = 4;
    const EnsembleResult e = run_ensemble(spec);

    const TrajectoryRecord mf = evolve(*spec.initial, spec.protocol, spec.params);
    for (const auto& r : e.trajectories) CHECK(r.photons_plus == mf.photons_plus);
    for (std::size_t i = 0; i < mf.size(); ++i) {
        CHECK(e.mean_photons_plus[i] == doctest::Approx(mf.photons_plus[i]).epsilon(1e-14));
        CHECK(e.mean_dw_order[i] == doctest::Approx(mf.dw_order[i]).epsilon(1e-14));
    }
}

TEST_CASE("ensemble is reproducible and independent of the thread count")
{
    EnsembleSpec spec;
    spec.n_traj = 12;
    spec.base_seed = 2024;
    spec.params = small(2);
    spec.protocol = DriveProtocol::ramp_and_hold(1.5, 1e-3, 1e-3);
    spec.threads = 1;
    const EnsembleResult a = run_ensemble(spec);
    const EnsembleResult b = run_ensemble(spec);
    spec.threads = 5;
    const EnsembleResult c = run_ensemble(spec);
    CHECK(a == b);
    CHECK(a == c);

    spec.base_seed = 2025;
    const EnsembleResult d = run_ensemble(spec);
    CHECK_FALSE(a.mean_photons_plus == d.mean_photons_plus);
}

TEST_CASE("mean photon number bounds the coherent part")
{
    EnsembleSpec spec;
    spec.n_traj = 16;
    spec.base_seed = 3;
    spec.params = small(2);
    spec.protocol = DriveProtocol::ramp_and_hold(1.8, 1e-3, 2e-3);
    spec.threads = 4;
    const EnsembleResult e = run_ensemble(spec);
    for (std::size_t i = 0; i < e.time.size(); ++i)
        CHECK(e.mean_photons_plus[i] >= std::norm(e.mean_alpha_plus[i]) * (1 - 1e-12));
}

TEST_CASE("retained trajectories average to the ensemble mean")
{
    EnsembleSpec spec;
    spec.n_traj = 6;
    spec.base_seed = 9;
    spec.params = small(2);
    spec.protocol = DriveProtocol::constant(0.5, 1e-3);
    spec.retain_trajectories = true;
    const EnsembleResult e = run_ensemble(spec);
    REQUIRE(e.trajectories.size() == 6);
    for (std::size_t i = 0; i < e.time.size(); i += 97) {
        double s = 0;
        for (const auto& r : e.trajectories) s += r.photons_plus[i];
        CHECK(e.mean_photons_plus[i] == doctest::Approx(s / 6).epsilon(1e-13));
    }
    const TrajectoryRecord m = e.mean_record();
    CHECK(m.photons_plus == e.mean_photons_plus);
    CHECK(m.seed == 9);
}

TEST_CASE("ensemble rejects bad input and mass divergence")
{
    EnsembleSpec spec;
    spec.params = small(1);
    spec.protocol = DriveProtocol::constant(1.0, 1e-4);
    spec.n_traj = 0;
    CHECK_THROWS_AS(run_ensemble(spec), InvalidParameter);

    spec.n_traj = 3;
    spec.params.dt = 1e-4;
    spec.params.sample_interval = 1e-4;
    spec.protocol = DriveProtocol::constant(50.0, 5e-2);
    CHECK_THROWS_AS(run_ensemble(spec), DivergenceError);
}

TEST_CASE("quantum noise spreads the self-organization onset")
{
    EnsembleSpec spec;
    spec.n_traj = 12;
    spec.base_seed = 77;
    spec.params = small(2);
    spec.protocol = DriveProtocol::ramp_and_hold(1.8, 2e-3, 6e-3);
    spec.retain_trajectories = true;
    spec.threads = 4;
    const EnsembleResult e = run_ensemble(spec);

    Moments onset;
    for (const auto& r : e.trajectories) {
        const auto t = onset_time(r, 0.5, 2e-3);
        REQUIRE(t);
        onset.add(*t);
    }
    const double spread = std::sqrt(onset.sq / onset.n - onset.avg() * onset.avg());
    CHECK(spread > 1e-5);

    spec.noise = false;
    spec.initial = FieldState::seeded(2, 1e-3);
    const EnsembleResult flat = run_ensemble(spec);
    const auto first = onset_time(flat.trajectories.front(), 0.5, 2e-3);
    REQUIRE(first);
    for (const auto& r : flat.trajectories) CHECK(onset_time(r, 0.5, 2e-3) == first);
}
