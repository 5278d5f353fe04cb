#include "atomcavity/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include "atomcavity/errors.hpp"
#include "atomcavity/params.hpp"

#include "json.hpp"

namespace atomcavity {

namespace {

// FFTW's planner is not thread-safe; execution is.
std::mutex& fftw_planner_mutex()
{
    static std::mutex mu;
    return mu;
}

std::vector<double> hann(std::size_t n)
{
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n - 1));
    return w;
}

double median(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

void check_uniform(std::span<const double> time)
{
    if (time.size() < 2) throw InputError("time axis needs at least two samples");
    const double dt = (time.back() - time.front()) / static_cast<double>(time.size() - 1);
    if (!(dt > 0)) throw InputError("time axis must be increasing");
    for (std::size_t i = 1; i < time.size(); ++i) {
        if (std::abs(time[i] - time[i - 1] - dt) > 1e-6 * dt)
            throw InputError("time axis is not uniformly spaced");
    }
}

}  // namespace

Spectrum power_spectrum(std::span<const double> series, double sample_interval)
{
    const std::size_t n = series.size();
    if (n < 64) throw InputError("spectrum needs at least 64 samples");
    if (!(sample_interval > 0)) throw InputError("sample interval must be positive");

    const auto w = hann(n);
    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
    double weighted_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) weighted_mean += w[i] * series[i];
    weighted_mean /= wsum;

    const std::size_t bins = n / 2 + 1;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(bins);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < n; ++i) in[i] = w[i] * (series[i] - weighted_mean);
    fftw_execute(plan);

    Spectrum s;
    s.frequency_hz.resize(bins);
    s.magnitude.resize(bins);
    const double df = 1.0 / (static_cast<double>(n) * sample_interval);
    for (std::size_t k = 0; k < bins; ++k) {
        s.frequency_hz[k] = static_cast<double>(k) * df;
        s.magnitude[k] = 2.0 * std::hypot(out[k][0], out[k][1]) / wsum;
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return s;
}

Spectrum power_spectrum(std::span<const double> time, std::span<const double> series)
{
    if (time.size() != series.size()) throw InputError("time and series lengths differ");
    check_uniform(time);
    const double dt = (time.back() - time.front()) / static_cast<double>(time.size() - 1);
    return power_spectrum(series, dt);
}

namespace {

// One past the last bin inside [0, band_hz].
std::size_t band_end(const Spectrum& spectrum, double band_hz)
{
    std::size_t end = spectrum.magnitude.size();
    if (band_hz > 0) {
        while (end > 3 && spectrum.frequency_hz[end - 1] > band_hz) --end;
    }
    if (end < 3) throw InputError("empty spectrum");
    return end;
}

double band_peak(const Spectrum& spectrum, std::size_t end)
{
    return *std::max_element(spectrum.magnitude.begin() + 1, spectrum.magnitude.begin() +
                                                                  static_cast<std::ptrdiff_t>(end));
}

}  // namespace

SpectralPeak dominant_frequency(const Spectrum& spectrum, double min_prominence, double band_hz)
{
    const auto& mag = spectrum.magnitude;
    const std::size_t end = band_end(spectrum, band_hz);

    const auto it = std::max_element(mag.begin() + 1, mag.begin() + static_cast<std::ptrdiff_t>(end));
    const auto k = static_cast<std::size_t>(it - mag.begin());

    SpectralPeak peak;
    peak.bin = k;
    peak.amplitude = *it;
    double offset = 0.0;
    if (k + 1 < mag.size()) {
        const double a = mag[k - 1], b = mag[k], c = mag[k + 1];
        const double denom = a - 2.0 * b + c;
        if (denom != 0.0) offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
    }
    peak.frequency_hz = (static_cast<double>(k) + offset) * spectrum.resolution_hz();
    peak.omega = kTwoPi * peak.frequency_hz;

    if (peak.amplitude > 0) {
        const double floor = kSpectralFloor * peak.amplitude;
        std::vector<double> rest;
        rest.reserve(end - 1);
        for (std::size_t i = 1; i < end; ++i) rest.push_back(std::max(mag[i], floor));
        peak.prominence = peak.amplitude / median(std::move(rest));
    }
    peak.significant = peak.prominence >= min_prominence;
    return peak;
}

double spectral_flatness(const Spectrum& spectrum, double band_hz)
{
    const auto& mag = spectrum.magnitude;
    const std::size_t end = band_end(spectrum, band_hz);
    const double top = band_peak(spectrum, end);
    if (top == 0.0) return 1.0;

    const double floor = kSpectralFloor * top;
    double log_sum = 0.0, sum = 0.0;
    for (std::size_t k = 1; k < end; ++k) {
        const double m = std::max(mag[k], floor);
        log_sum += std::log(m * m);
        sum += m * m;
    }
    const auto count = static_cast<double>(end - 1);
    return std::exp(log_sum / count) / (sum / count);
}

double line_fraction(const Spectrum& spectrum, double band_hz, int lines, int half_width)
{
    const auto& mag = spectrum.magnitude;
    const std::size_t end = band_end(spectrum, band_hz);

    double total = 0.0;
    for (std::size_t k = 1; k < end; ++k) total += mag[k] * mag[k];
    if (total == 0.0) return 0.0;

    std::vector<std::size_t> maxima;
    for (std::size_t k = 1; k < end; ++k) {
        const bool left = k == 1 || mag[k] >= mag[k - 1];
        const bool right = k + 1 >= end || mag[k] > mag[k + 1];
        if (left && right) maxima.push_back(k);
    }
    const auto take = std::min(maxima.size(), static_cast<std::size_t>(std::max(lines, 0)));
    std::partial_sort(maxima.begin(), maxima.begin() + static_cast<std::ptrdiff_t>(take),
                      maxima.end(), [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });

    std::vector<bool> used(end, false);
    double captured = 0.0;
    const auto hw = static_cast<std::size_t>(std::max(half_width, 0));
    for (std::size_t n = 0; n < take; ++n) {
        const std::size_t k = maxima[n];
        const std::size_t lo = k > hw + 1 ? k - hw : 1;
        const std::size_t hi = std::min(k + hw, end - 1);
        for (std::size_t i = lo; i <= hi; ++i) {
            if (used[i]) continue;
            used[i] = true;
            captured += mag[i] * mag[i];
        }
    }
    return captured / total;
}

std::string to_string(Phase phase)
{
    switch (phase) {
    case Phase::Normal: return "NP";
    case Phase::DensityWave: return "DW";
    case Phase::LimitCycle: return "LC";
    case Phase::Chaos: return "CHAOS";
    }
    return "?";
}

Phase phase_from_string(const std::string& text)
{
    if (text == "NP") return Phase::Normal;
    if (text == "DW") return Phase::DensityWave;
    if (text == "LC") return Phase::LimitCycle;
    if (text == "CHAOS") return Phase::Chaos;
    throw InputError("unknown phase label '" + text + "'");
}

std::string PhaseVerdict::to_json() const
{
    nlohmann::json j;
    j["label"] = to_string(label);
    j["omega_B"] = omega_b ? nlohmann::json(*omega_b) : nlohmann::json(nullptr);
    j["peak_frequency_hz"] = peak_frequency_hz;
    j["peak_amplitude"] = peak_amplitude;
    j["peak_prominence"] = peak_prominence;
    j["spectral_flatness"] = spectral_flatness;
    j["line_fraction"] = line_fraction;
    j["mean_photons"] = mean_photons;
    j["relative_std"] = relative_std;
    j["thresholds"] = {{"np_photons", thresholds.np_photons},
                       {"dw_relative_std", thresholds.dw_relative_std},
                       {"lc_prominence", thresholds.lc_prominence},
                       {"lc_flatness", thresholds.lc_flatness},
                       {"lc_line_fraction", thresholds.lc_line_fraction},
                       {"lc_min_cycles", thresholds.lc_min_cycles},
                       {"band_hz", thresholds.band_hz},
                       {"window", thresholds.window}};
    return j.dump();
}

PhaseVerdict PhaseVerdict::from_json(const std::string& line)
{
    try {
        const auto j = nlohmann::json::parse(line);
        PhaseVerdict v;
        v.label = phase_from_string(j.at("label").get<std::string>());
        if (!j.at("omega_B").is_null()) v.omega_b = j.at("omega_B").get<double>();
        v.peak_frequency_hz = j.at("peak_frequency_hz").get<double>();
        v.peak_amplitude = j.at("peak_amplitude").get<double>();
        v.peak_prominence = j.at("peak_prominence").get<double>();
        v.spectral_flatness = j.at("spectral_flatness").get<double>();
        v.line_fraction = j.at("line_fraction").get<double>();
        v.mean_photons = j.at("mean_photons").get<double>();
        v.relative_std = j.at("relative_std").get<double>();
        const auto& t = j.at("thresholds");
        v.thresholds.np_photons = t.at("np_photons").get<double>();
        v.thresholds.dw_relative_std = t.at("dw_relative_std").get<double>();
        v.thresholds.lc_prominence = t.at("lc_prominence").get<double>();
        v.thresholds.lc_flatness = t.at("lc_flatness").get<double>();
        v.thresholds.lc_line_fraction = t.at("lc_line_fraction").get<double>();
        v.thresholds.lc_min_cycles = t.at("lc_min_cycles").get<double>();
        v.thresholds.band_hz = t.at("band_hz").get<double>();
        v.thresholds.window = t.at("window").get<double>();
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed verdict record: ") + e.what());
    }
}

std::pair<std::size_t, std::size_t> analysis_window(std::span<const double> time, double window)
{
    if (time.size() < 2) throw InputError("record too short for analysis");
    const double t_end = time.back();
    const double dt = (time.back() - time.front()) / static_cast<double>(time.size() - 1);
    if (time.back() - time.front() < window - 0.5 * dt)
        throw InputError("record shorter than the analysis window");
    const double start = t_end - window - 0.5 * dt;
    const auto first = static_cast<std::size_t>(
        std::lower_bound(time.begin(), time.end(), start) - time.begin());
    return {first, time.size()};
}

PhaseVerdict classify_phase(const TrajectoryRecord& record, const ClassifierThresholds& th)
{
    const auto [first, last] = analysis_window(record.time, th.window);
    const std::span<const double> t(record.time.data() + first, last - first);
    const std::span<const double> x(record.photons_plus.data() + first, last - first);

    PhaseVerdict v;
    v.thresholds = th;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double var = 0.0;
    for (double xi : x) var += (xi - mean) * (xi - mean);
    var /= static_cast<double>(x.size());
    v.mean_photons = mean;
    v.relative_std = mean > 0 ? std::sqrt(var) / mean : 0.0;

    const Spectrum spec = power_spectrum(t, x);
    const SpectralPeak peak = dominant_frequency(spec, th.lc_prominence, th.band_hz);
    v.peak_frequency_hz = peak.frequency_hz;
    v.peak_amplitude = peak.amplitude;
    v.peak_prominence = peak.prominence;
    v.spectral_flatness = spectral_flatness(spec, th.band_hz);
    v.line_fraction = line_fraction(spec, th.band_hz);

    if (mean < th.np_photons) {
        v.label = Phase::Normal;
    } else if (v.relative_std < th.dw_relative_std) {
        v.label = Phase::DensityWave;
    } else {
        const double span = t.back() - t.front();
        const bool periodic = peak.prominence >= th.lc_prominence &&
                              v.spectral_flatness <= th.lc_flatness &&
                              v.line_fraction >= th.lc_line_fraction &&
                              peak.frequency_hz * span >= th.lc_min_cycles;
        v.label = periodic ? Phase::LimitCycle : Phase::Chaos;
        v.omega_b = peak.omega;
    }
    return v;
}

CosineFit fit_cosine(std::span<const double> time, std::span<const double> values, double omega)
{
    if (time.size() != values.size() || time.size() < 3)
        throw InputError("cosine fit needs matching series of at least 3 samples");
    // Normal equations for [1, cos, sin], centred in time for conditioning.
    const double t0 = 0.5 * (time.front() + time.back());
    double s[3][3] = {};
    double r[3] = {};
    for (std::size_t i = 0; i < time.size(); ++i) {
        const double ph = omega * (time[i] - t0);
        const double basis[3] = {1.0, std::cos(ph), std::sin(ph)};
        for (int a = 0; a < 3; ++a) {
            r[a] += basis[a] * values[i];
            for (int b = 0; b < 3; ++b) s[a][b] += basis[a] * basis[b];
        }
    }
    // Gaussian elimination with partial pivoting on the 3x3 system.
    double m[3][4];
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) m[a][b] = s[a][b];
        m[a][3] = r[a];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
        std::swap(m[col], m[piv]);
        if (m[col][col] == 0.0) throw InputError("degenerate cosine fit");
        for (int row = col + 1; row < 3; ++row) {
            const double f = m[row][col] / m[col][col];
            for (int k = col; k < 4; ++k) m[row][k] -= f * m[col][k];
        }
    }
    double coef[3];
    for (int row = 2; row >= 0; --row) {
        double acc = m[row][3];
        for (int k = row + 1; k < 3; ++k) acc -= m[row][k] * coef[k];
        coef[row] = acc / m[row][row];
    }

    CosineFit fit;
    fit.offset = coef[0];
    fit.amplitude = std::hypot(coef[1], coef[2]);
    fit.omega = omega;
    double ss = 0.0;
    for (std::size_t i = 0; i < time.size(); ++i) {
        const double ph = omega * (time[i] - t0);
        const double e = values[i] - (coef[0] + coef[1] * std::cos(ph) + coef[2] * std::sin(ph));
        ss += e * e;
    }
    fit.rms_residual = std::sqrt(ss / static_cast<double>(time.size()));
    return fit;
}

CosineFit dominant_tone(std::span<const double> time, std::span<const double> values)
{
    const Spectrum spec = power_spectrum(time, values);
    const SpectralPeak peak = dominant_frequency(spec);
    const double bin = kTwoPi * spec.resolution_hz();

    // Golden-section search of the fitted amplitude within +-1 bin.
    double lo = std::max(peak.omega - bin, 0.5 * bin);
    double hi = peak.omega + bin;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = fit_cosine(time, values, x1).amplitude;
    double f2 = fit_cosine(time, values, x2).amplitude;
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = fit_cosine(time, values, x2).amplitude;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = fit_cosine(time, values, x1).amplitude;
        }
    }
    return fit_cosine(time, values, 0.5 * (lo + hi));
}

LimitCycleFit fit_limit_cycle(const TrajectoryRecord& record, const ClassifierThresholds& th)
{
    const PhaseVerdict v = classify_phase(record, th);
    if (v.label != Phase::LimitCycle)
        throw ClassificationMismatch("limit-cycle fit on a record classified " + to_string(v.label));

    const auto [first, last] = analysis_window(record.time, th.window);
    const std::span<const double> t(record.time.data() + first, last - first);
    const std::span<const double> x(record.photons_plus.data() + first, last - first);
    const CosineFit tone = dominant_tone(t, x);

    LimitCycleFit fit;
    fit.mean_photons = v.mean_photons;
    fit.omega_b = tone.omega;
    fit.relative_amplitude = tone.amplitude / v.mean_photons;
    fit.residual = tone.rms_residual / v.mean_photons;
    return fit;
}

CorrelationTrace two_time_correlation(const EnsembleResult& ensemble, double t1,
                                      double average_from)
{
    std::vector<TrajectoryRecord> kept;
    for (const auto& r : ensemble.trajectories)
        if (r.size() > 0) kept.push_back(r);
    if (kept.empty()) throw InputError("ensemble carries no per-trajectory series");
    return two_time_correlation(kept, t1, average_from);
}

CorrelationTrace two_time_correlation(std::span<const TrajectoryRecord> trajectories, double t1,
                                      double average_from)
{
    if (trajectories.empty()) throw InputError("no trajectories for the correlation");
    const auto& time = trajectories.front().time;
    if (time.size() < 2 || trajectories.front().alpha_plus.size() != time.size())
        throw InputError("trajectory lacks the complex cavity series");
    const double dt = (time.back() - time.front()) / static_cast<double>(time.size() - 1);
    if (t1 < time.front() - 0.5 * dt || t1 > time.back() + 0.5 * dt)
        throw InputError("t1 outside the record");
    const auto i1 = static_cast<std::size_t>(std::llround((t1 - time.front()) / dt));

    std::vector<Complex> g(time.size(), Complex{});
    for (const auto& r : trajectories) {
        if (r.alpha_plus.size() != time.size())
            throw InputError("trajectories have mismatched lengths");
        const Complex ref = r.alpha_plus[i1];
        for (std::size_t i = 0; i < time.size(); ++i) g[i] += std::conj(r.alpha_plus[i]) * ref;
    }
    const double inv = 1.0 / static_cast<double>(trajectories.size());
    for (auto& v : g) v *= inv;

    CorrelationTrace trace;
    trace.time = time;
    trace.t1 = time[i1];
    trace.average_from = average_from >= 0 ? average_from : time.back() - 20e-3;
    Complex sum{};
    std::size_t count = 0;
    for (std::size_t i = 0; i < time.size(); ++i) {
        if (time[i] >= trace.average_from - 0.5 * dt) {
            sum += g[i];
            ++count;
        }
    }
    if (count == 0) throw InputError("empty normalization window");
    trace.normalization = sum / static_cast<double>(count);
    if (std::abs(trace.normalization) == 0.0) throw InputError("vanishing normalization");
    trace.value.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) trace.value[i] = g[i] / trace.normalization;
    return trace;
}

double correlation_amplitude(const CorrelationTrace& trace)
{
    std::vector<double> t, re;
    const double dt = trace.time.size() > 1 ? trace.time[1] - trace.time[0] : 0.0;
    for (std::size_t i = 0; i < trace.time.size(); ++i) {
        if (trace.time[i] >= trace.average_from - 0.5 * dt) {
            t.push_back(trace.time[i]);
            re.push_back(trace.value[i].real());
        }
    }
    if (re.size() < 64) throw InputError("correlation window too short");
    const auto [lo, hi] = std::minmax_element(re.begin(), re.end());
    if (*hi - *lo == 0.0) return 0.0;
    return dominant_tone(t, re).amplitude;
}

std::optional<double> onset_time(const TrajectoryRecord& record, double fraction, double window)
{
    const auto [first, last] = analysis_window(record.time, window);
    double mean = 0.0;
    for (std::size_t i = first; i < last; ++i) mean += record.photons_plus[i];
    mean /= static_cast<double>(last - first);
    const double level = fraction * mean;
    for (std::size_t i = 0; i < record.size(); ++i)
        if (record.photons_plus[i] > level) return record.time[i];
    return std::nullopt;
}

double temporal_std(std::span<const double> time, std::span<const double> values, double window)
{
    const auto [first, last] = analysis_window(time, window);
    const auto n = static_cast<double>(last - first);
    double mean = 0.0;
    for (std::size_t i = first; i < last; ++i) mean += values[i];
    mean /= n;
    double var = 0.0;
    for (std::size_t i = first; i < last; ++i) var += (values[i] - mean) * (values[i] - mean);
    return std::sqrt(var / n);
}

}  // namespace atomcavity
