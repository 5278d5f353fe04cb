#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "atomcavity/analysis.hpp"
#include "atomcavity/errors.hpp"

using namespace atomcavity;

namespace {

constexpr double kDt = 1e-6;

std::vector<double> axis(std::size_t n, double dt = kDt)
{
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * dt;
    return t;
}

template <class F>
std::vector<double> sampled(const std::vector<double>& t, F f)
{
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = f(t[i]);
    return x;
}

TrajectoryRecord record_of(const std::vector<double>& t, const std::vector<double>& n)
{
    TrajectoryRecord r;
    r.time = t;
    r.photons_plus = n;
    r.photons_minus = n;
    r.dw_order.assign(t.size(), 0.0);
    r.bunching.assign(t.size(), 0.5);
    for (double v : n) r.alpha_plus.emplace_back(std::sqrt(v), 0.0);
    return r;
}

std::size_t nearest_bin(const Spectrum& s, double hz)
{
    return static_cast<std::size_t>(std::llround(hz / s.resolution_hz()));
}

}  // namespace

TEST_CASE("spectrum of a constant is zero")
{
    const std::vector<double> x(1000, 3.25);
    const Spectrum s = power_spectrum(x, kDt);
    CHECK(s.magnitude.size() == 501);
    for (double m : s.magnitude) CHECK(m < 1e-12);
}

TEST_CASE("tone amplitude and frequency")
{
    const auto t = axis(20000);
    const double f = 20e3;
    const auto x = sampled(t, [&](double s) { return 0.7 * std::cos(kTwoPi * f * s + 0.3); });
    const Spectrum s = power_spectrum(t, x);
    CHECK(s.resolution_hz() == doctest::Approx(50.0).epsilon(1e-9));
    const std::size_t k = nearest_bin(s, f);
    CHECK(s.magnitude[k] == doctest::Approx(0.7).epsilon(1e-3));

    const SpectralPeak p = dominant_frequency(s);
    CHECK(p.bin == k);
    CHECK(std::abs(p.frequency_hz - f) < 0.05 * s.resolution_hz());
    CHECK(p.omega == doctest::Approx(kTwoPi * p.frequency_hz));
    CHECK(p.significant);
    CHECK(spectral_flatness(s) < 1e-6);
    CHECK(line_fraction(s) > 0.999);
}

TEST_CASE("two tones keep their ratio and the larger one dominates")
{
    const auto t = axis(20000);
    const auto x = sampled(t, [](double s) {
        return 1.0 * std::cos(kTwoPi * 5e3 * s) + 0.25 * std::sin(kTwoPi * 12e3 * s);
    });
    const Spectrum s = power_spectrum(t, x);
    CHECK(s.magnitude[nearest_bin(s, 5e3)] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(s.magnitude[nearest_bin(s, 12e3)] == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(dominant_frequency(s).bin == nearest_bin(s, 5e3));
    CHECK(dominant_frequency(s, 10.0, 8e3).bin == nearest_bin(s, 5e3));
    CHECK(line_fraction(s, 0.0, 1) == doctest::Approx(1.0 / (1.0 + 0.0625)).epsilon(1e-3));
}

TEST_CASE("band limit restricts the peak search")
{
    const auto t = axis(20000);
    const auto x = sampled(t, [](double s) {
        return std::cos(kTwoPi * 30e3 * s) + 0.1 * std::cos(kTwoPi * 4e3 * s);
    });
    const Spectrum s = power_spectrum(t, x);
    CHECK(dominant_frequency(s).bin == nearest_bin(s, 30e3));
    CHECK(dominant_frequency(s, 10.0, 10e3).bin == nearest_bin(s, 4e3));
}

TEST_CASE("detrending, linearity and offset invariance")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    std::vector<double> x(4096);
    for (auto& v : x) v = g(rng);
    const Spectrum a = power_spectrum(x, kDt);

    std::vector<double> shifted = x, scaled = x;
    for (auto& v : shifted) v += 1234.5;
    for (auto& v : scaled) v *= -3.0;
    const Spectrum b = power_spectrum(shifted, kDt);
    const Spectrum c = power_spectrum(scaled, kDt);
    CHECK(a.magnitude[0] < 1e-10);
    CHECK(b.magnitude[0] < 1e-10);
    for (std::size_t k = 1; k < a.magnitude.size(); ++k) {
        CHECK(b.magnitude[k] == doctest::Approx(a.magnitude[k]).epsilon(1e-8));
        CHECK(c.magnitude[k] == doctest::Approx(3.0 * a.magnitude[k]).epsilon(1e-12));
    }
}

TEST_CASE("white noise statistics")
{
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    std::vector<double> x(1 << 16);
    for (auto& v : x) v = g(rng);
    const Spectrum s = power_spectrum(x, kDt);
    // Exponentially distributed power: geometric / arithmetic mean = exp(-gamma).
    CHECK(spectral_flatness(s) == doctest::Approx(std::exp(-std::numbers::egamma)).epsilon(0.05));
    const SpectralPeak p = dominant_frequency(s);
    CHECK(p.prominence > 1.0);
    CHECK(p.prominence < 6.0);
    CHECK_FALSE(p.significant);
    CHECK(line_fraction(s) < 0.01);
}

TEST_CASE("floor caps the prominence of a clean line")
{
    const auto t = axis(20000);
    const auto x = sampled(t, [](double s) { return std::cos(kTwoPi * 10e3 * s); });
    const SpectralPeak p = dominant_frequency(power_spectrum(t, x));
    CHECK(p.prominence == doctest::Approx(1.0 / kSpectralFloor).epsilon(1e-9));
}

TEST_CASE("spectrum input validation")
{
    CHECK_THROWS_AS(power_spectrum(std::vector<double>(10, 1.0), kDt), InputError);
    CHECK_THROWS_AS(power_spectrum(std::vector<double>(100, 1.0), 0.0), InputError);
    auto t = axis(100);
    t[50] += 0.3e-6;
    CHECK_THROWS_AS(power_spectrum(t, std::vector<double>(100, 1.0)), InputError);
    CHECK_THROWS_AS(power_spectrum(axis(100), std::vector<double>(99, 1.0)), InputError);
}

TEST_CASE("dominant tone refines an off-bin frequency")
{
    const auto t = axis(20000);
    const double f = 10'617.0;
    const auto x = sampled(t, [&](double s) { return 2.0 + 0.4 * std::sin(kTwoPi * f * s); });
    const CosineFit c = dominant_tone(t, x);
    CHECK(c.omega / kTwoPi == doctest::Approx(f).epsilon(1e-5));
    CHECK(c.amplitude == doctest::Approx(0.4).epsilon(1e-4));
    CHECK(c.offset == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(c.rms_residual < 1e-4);
}

TEST_CASE("phase decision tree")
{
    const auto t = axis(40001);
    ClassifierThresholds th;

    SUBCASE("normal")
    {
        const auto n = sampled(t, [](double s) { return 1e-4 * (1 + 0.5 * std::cos(7e4 * s)); });
        const PhaseVerdict v = classify_phase(record_of(t, n), th);
        CHECK(v.label == Phase::Normal);
        CHECK_FALSE(v.omega_b);
    }
    SUBCASE("density wave")
    {
        const auto n = sampled(t, [](double s) { return 800 * (1 + 1e-4 * std::cos(6e4 * s)); });
        const PhaseVerdict v = classify_phase(record_of(t, n), th);
        CHECK(v.label == Phase::DensityWave);
        CHECK(v.mean_photons == doctest::Approx(800).epsilon(1e-6));
        CHECK_FALSE(v.omega_b);
    }
    SUBCASE("limit cycle")
    {
        const double w = kTwoPi * 10.6e3;
        const auto n = sampled(t, [&](double s) { return 900 * (1 + 0.4 * std::cos(w * s)); });
        const PhaseVerdict v = classify_phase(record_of(t, n), th);
        CHECK(v.label == Phase::LimitCycle);
        REQUIRE(v.omega_b);
        CHECK(*v.omega_b == doctest::Approx(w).epsilon(2e-3));
        CHECK(v.relative_std == doctest::Approx(0.4 / std::sqrt(2.0)).epsilon(1e-2));

        th.lc_prominence = 1e6;
        CHECK(classify_phase(record_of(t, n), th).label == Phase::Chaos);
    }
    SUBCASE("chaos")
    {
        std::mt19937_64 rng(1);
        std::normal_distribution<double> g;
        double level = 0;
        const auto n = sampled(t, [&](double) {
            level = 0.99 * level + 0.1 * g(rng);
            return 500 * (1 + 0.5 * std::tanh(level));
        });
        const PhaseVerdict v = classify_phase(record_of(t, n), th);
        CHECK(v.label == Phase::Chaos);
        CHECK(v.omega_b);
        CHECK(v.line_fraction < th.lc_line_fraction);
    }
    SUBCASE("slow drift is not a limit cycle")
    {
        const auto n = sampled(t, [](double s) { return 300 * (1 + 0.5 * std::cos(kTwoPi * 100 * s)); });
        const PhaseVerdict v = classify_phase(record_of(t, n), th);
        CHECK(v.label == Phase::Chaos);
    }
    SUBCASE("window longer than the record")
    {
        th.window = 1.0;
        CHECK_THROWS_AS(classify_phase(record_of(t, std::vector<double>(t.size(), 1.0)), th),
                        InputError);
    }
}

TEST_CASE("limit-cycle fit on a synthetic record")
{
    const auto t = axis(40001);
    const double w = kTwoPi * 10.9e3, delta = 0.3, a0 = 1200;
    const auto clean = sampled(t, [&](double s) { return a0 * (1 + delta * std::cos(w * s + 1.1)); });
    const LimitCycleFit f = fit_limit_cycle(record_of(t, clean));
    CHECK(f.mean_photons == doctest::Approx(a0).epsilon(1e-2));
    CHECK(f.relative_amplitude == doctest::Approx(delta).epsilon(1e-2));
    CHECK(f.omega_b == doctest::Approx(w).epsilon(1e-2));
    CHECK(f.residual < 1e-3);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 0.02 * a0);
    auto noisy = clean;
    for (auto& v : noisy) v += g(rng);
    ClassifierThresholds loose;
    loose.lc_flatness = 1.0;
    loose.lc_line_fraction = 0.5;
    const LimitCycleFit h = fit_limit_cycle(record_of(t, noisy), loose);
    CHECK(h.mean_photons == doctest::Approx(a0).epsilon(5e-2));
    CHECK(h.relative_amplitude == doctest::Approx(delta).epsilon(5e-2));
    CHECK(h.omega_b == doctest::Approx(w).epsilon(5e-2));
}

TEST_CASE("limit-cycle fit refuses a density wave")
{
    const auto t = axis(40001);
    const std::vector<double> n(t.size(), 700.0);
    CHECK_THROWS_AS(fit_limit_cycle(record_of(t, n)), ClassificationMismatch);
}

TEST_CASE("two-time correlation")
{
    const auto t = axis(40001);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);

    SUBCASE("constant field gives C = 1")
    {
        std::vector<TrajectoryRecord> traj;
        for (int k = 0; k < 5; ++k) {
            auto r = record_of(t, std::vector<double>(t.size(), 4.0));
            const Complex a = std::polar(2.0, phase(rng));
            r.alpha_plus.assign(t.size(), a);
            traj.push_back(r);
        }
        const CorrelationTrace c = two_time_correlation(traj, 20e-3);
        for (const auto& v : c.value) {
            CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(v.imag()) < 1e-12);
        }
        CHECK(c.normalization.real() == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(correlation_amplitude(c) == 0.0);
    }
    SUBCASE("oscillating field")
    {
        const double w = kTwoPi * 11e3, b = 0.3;
        std::vector<TrajectoryRecord> traj;
        for (int k = 0; k < 7; ++k) {
            auto r = record_of(t, std::vector<double>(t.size(), 1.0));
            const Complex ph = std::polar(1.0, phase(rng));
            for (std::size_t i = 0; i < t.size(); ++i)
                r.alpha_plus[i] = ph * (1.0 + b * std::cos(w * t[i]));
            traj.push_back(r);
        }
        const double t1 = 20e-3;
        const CorrelationTrace c = two_time_correlation(traj, t1);
        CHECK(c.t1 == doctest::Approx(t1));
        CHECK(c.average_from == doctest::Approx(20e-3));

        // N C(t1) is the ensemble-mean |alpha(t1)|^2.
        const auto i1 = static_cast<std::size_t>(std::llround(t1 / kDt));
        double n1 = 0;
        for (const auto& r : traj) n1 += std::norm(r.alpha_plus[i1]);
        n1 /= 7;
        CHECK(std::abs(c.value[i1] * c.normalization - n1) < 1e-12);

        // C(t) = 1 + b cos(w t) since the window mean of 1 + b cos is 1.
        CHECK(correlation_amplitude(c) == doctest::Approx(b).epsilon(2e-2));
    }
    SUBCASE("input errors")
    {
        CHECK_THROWS_AS(two_time_correlation(std::vector<TrajectoryRecord>{}, 0.0), InputError);
        const std::vector<TrajectoryRecord> one{record_of(t, std::vector<double>(t.size(), 1.0))};
        CHECK_THROWS_AS(two_time_correlation(one, 1.0), InputError);
        EnsembleResult e;
        CHECK_THROWS_AS(two_time_correlation(e, 0.0), InputError);
    }
}

TEST_CASE("onset time and temporal spread")
{
    const auto t = axis(30001);
    const auto n = sampled(t, [](double s) { return s < 10e-3 ? 0.0 : 100.0; });
    const auto r = record_of(t, n);
    const auto on = onset_time(r);
    REQUIRE(on);
    CHECK(*on == doctest::Approx(10e-3).epsilon(1e-9));
    CHECK_FALSE(onset_time(record_of(t, std::vector<double>(t.size(), 0.0))));

    const auto sq = sampled(t, [](double s) { return std::cos(kTwoPi * 1e3 * s); });
    CHECK(temporal_std(t, sq) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("verdict record round trip")
{
    PhaseVerdict v;
    v.label = Phase::LimitCycle;
    v.omega_b = 68'000.123456789;
    v.peak_frequency_hz = 10'822.0000001;
    v.peak_amplitude = 0.1 + 0.2;
    v.peak_prominence = 1e5;
    v.spectral_flatness = 1.234e-7;
    v.line_fraction = 0.99987;
    v.mean_photons = 4321.5;
    v.relative_std = 1.0 / 3.0;
    v.thresholds.lc_prominence = 250;
    v.thresholds.band_hz = 40e3;
    CHECK(PhaseVerdict::from_json(v.to_json()) == v);

    v.label = Phase::DensityWave;
    v.omega_b.reset();
    CHECK(PhaseVerdict::from_json(v.to_json()) == v);

    CHECK_THROWS_AS(PhaseVerdict::from_json("{\"label\":\"LC\"}"), InputError);
    CHECK_THROWS_AS(PhaseVerdict::from_json("not json"), InputError);
    CHECK_THROWS_AS(phase_from_string("XY"), InputError);
    for (Phase p : {Phase::Normal, Phase::DensityWave, Phase::LimitCycle, Phase::Chaos})
        CHECK(phase_from_string(to_string(p)) == p);
}
