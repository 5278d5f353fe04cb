#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atomcavity/field_state.hpp"
#include "atomcavity/trajectory.hpp"
#include "atomcavity/twa.hpp"

namespace atomcavity {

/// One-sided amplitude spectrum of a mean-subtracted, Hann-windowed series.
///
/// Magnitudes are scaled by 2 / sum(window), so a pure tone a cos(2 pi f t)
/// sitting exactly on a bin reads `a` at that bin.
struct Spectrum {
    std::vector<double> frequency_hz;  // 0 .. Nyquist, spacing 1 / duration
    std::vector<double> magnitude;
    std::string detrend = "weighted-mean+hann";

    double resolution_hz() const
    {
        return frequency_hz.size() > 1 ? frequency_hz[1] - frequency_hz[0] : 0.0;
    }
};

/// Requires at least 64 samples.
Spectrum power_spectrum(std::span<const double> series, double sample_interval);

/// As above, checking that `time` is uniformly spaced (InputError otherwise).
Spectrum power_spectrum(std::span<const double> time, std::span<const double> series);

struct SpectralPeak {
    double omega = 0.0;         // rad/s, parabolically interpolated
    double frequency_hz = 0.0;
    std::size_t bin = 0;
    double amplitude = 0.0;     // spectrum magnitude at the peak bin
    double prominence = 0.0;    // peak / median of the floored non-DC magnitudes
    bool significant = false;   // prominence >= the threshold given
};

/// Magnitudes below this fraction of the peak are raised to it before the
/// prominence and flatness statistics are taken.
inline constexpr double kSpectralFloor = 1e-5;

/// Largest non-DC bin inside [0, band_hz] (whole spectrum when band_hz <= 0).
/// Throws InputError on an empty spectrum.
SpectralPeak dominant_frequency(const Spectrum& spectrum, double min_prominence = 10.0,
                                double band_hz = 0.0);

/// Geometric over arithmetic mean of the floored non-DC power |X|^2 inside
/// [0, band_hz].
double spectral_flatness(const Spectrum& spectrum, double band_hz = 0.0);

/// Share of the non-DC power inside [0, band_hz] carried by the `lines`
/// strongest local maxima, each taken with +-`half_width` neighbouring bins.
double line_fraction(const Spectrum& spectrum, double band_hz = 0.0, int lines = 10,
                     int half_width = 2);

enum class Phase { Normal, DensityWave, LimitCycle, Chaos };

std::string to_string(Phase phase);
Phase phase_from_string(const std::string& text);

/// Decision thresholds of classify_phase().
struct ClassifierThresholds {
    double np_photons = 1e-2;        // time-mean |alpha_+|^2 below: NP
    double dw_relative_std = 0.02;   // temporal std / mean below: DW
    double lc_prominence = 100.0;    // LC needs prominence at least this,
    double lc_flatness = 1e-3;       // flatness at most this,
    double lc_line_fraction = 0.9;   // line fraction at least this
    double lc_min_cycles = 10.0;     // and this many periods in the window
    double band_hz = 50e3;           // band of the spectral statistics; <= 0: full
    double window = 20e-3;           // analysed tail of the record, s
};

struct PhaseVerdict {
    Phase label = Phase::Normal;
    std::optional<double> omega_b;   // rad/s; set for LC and chaos
    double peak_frequency_hz = 0.0;
    double peak_amplitude = 0.0;
    double peak_prominence = 0.0;
    double spectral_flatness = 0.0;
    double line_fraction = 0.0;
    double mean_photons = 0.0;
    double relative_std = 0.0;
    ClassifierThresholds thresholds;

    /// Single-line JSON record.
    std::string to_json() const;
    static PhaseVerdict from_json(const std::string& line);

    friend bool operator==(const PhaseVerdict&, const PhaseVerdict&) = default;
};

inline bool operator==(const ClassifierThresholds& a, const ClassifierThresholds& b)
{
    return a.np_photons == b.np_photons && a.dw_relative_std == b.dw_relative_std &&
           a.lc_prominence == b.lc_prominence && a.lc_flatness == b.lc_flatness &&
           a.lc_line_fraction == b.lc_line_fraction && a.lc_min_cycles == b.lc_min_cycles &&
           a.band_hz == b.band_hz && a.window == b.window;
}

/// Indices of the samples with t >= t_end - window. Throws InputError if the
/// record does not span the window.
std::pair<std::size_t, std::size_t> analysis_window(std::span<const double> time, double window);

/// Classifies the final `thresholds.window` seconds of |alpha_+|^2.
PhaseVerdict classify_phase(const TrajectoryRecord& record,
                            const ClassifierThresholds& thresholds = {});

/// Least-squares fit of |alpha|^2 = A (1 + delta_B cos(omega_B t + phase)).
struct LimitCycleFit {
    double mean_photons = 0.0;     // |alpha_0|^2
    double relative_amplitude = 0.0;  // delta_B
    double omega_b = 0.0;          // rad/s
    double residual = 0.0;         // rms residual / mean
};

/// Fit over the classification window. Throws ClassificationMismatch unless
/// the record classifies as LC under `thresholds`.
LimitCycleFit fit_limit_cycle(const TrajectoryRecord& record,
                              const ClassifierThresholds& thresholds = {});

/// Cosine fit at a fixed angular frequency: x ~ c + a cos(omega t) + b sin(omega t).
struct CosineFit {
    double offset = 0.0;
    double amplitude = 0.0;
    double omega = 0.0;
    double rms_residual = 0.0;
};
CosineFit fit_cosine(std::span<const double> time, std::span<const double> values, double omega);

/// Dominant tone of a series: FFT peak, then the frequency refined within one
/// bin by maximizing the least-squares cosine amplitude.
CosineFit dominant_tone(std::span<const double> time, std::span<const double> values);

/// C(t) = <alpha_+^*(t) alpha_+(t1)> / N over an ensemble.
struct CorrelationTrace {
    std::vector<double> time;
    std::vector<Complex> value;  // C(t)
    double t1 = 0.0;
    Complex normalization{};     // N
    double average_from = 0.0;   // start of the window used for N
};

/// Ensemble average of conj(alpha(t)) alpha(t1) over the retained
/// trajectories, normalized by its time average over [average_from, t_end]
/// (finite-T stand-in for the infinite-time limit). A negative
/// `average_from` means the final 20 ms. Throws InputError when no
/// per-trajectory series are retained or t1 lies outside the record.
CorrelationTrace two_time_correlation(const EnsembleResult& ensemble, double t1,
                                      double average_from = -1.0);

/// Same for an explicit set of trajectories.
CorrelationTrace two_time_correlation(std::span<const TrajectoryRecord> trajectories, double t1,
                                      double average_from = -1.0);

/// Amplitude of the dominant oscillation of Re C(t) over the normalization
/// window. Zero for a constant trace.
double correlation_amplitude(const CorrelationTrace& trace);

/// First time |alpha_+|^2 exceeds `fraction` of its mean over the final
/// `window` seconds; empty if it never does.
std::optional<double> onset_time(const TrajectoryRecord& record, double fraction = 0.5,
                                 double window = 20e-3);

/// Population standard deviation of `values` over the final `window` seconds.
double temporal_std(std::span<const double> time, std::span<const double> values,
                    double window = 20e-3);

}  // namespace atomcavity
