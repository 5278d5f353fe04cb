#include "atomcavity/params.hpp"

#include <cmath>
#include <cstdio>

#include "atomcavity/errors.hpp"

namespace atomcavity {

namespace {

void require(bool ok, const char* what)
{
    if (!ok) throw InvalidParameter(what);
}

}  // namespace

void SystemParams::validate() const
{
    require(atom_number >= 0, "atom_number must be non-negative");
    require(std::isfinite(recoil_freq) && recoil_freq > 0, "recoil_freq must be positive");
    require(std::isfinite(cavity_linewidth) && cavity_linewidth > 0,
            "cavity_linewidth must be positive");
    require(std::isfinite(light_shift) && light_shift > 0, "light_shift must be positive");
    require(pol_plus >= 0 && pol_minus >= 0, "polarization weights must be non-negative");
    require(std::abs(pol_plus + pol_minus - 1.0) <= 1e-12,
            "polarization weights must sum to one");
    require(std::isfinite(detuning_eff), "detuning_eff must be finite");
    require(mode_cutoff >= 1, "mode_cutoff must be at least 1");
    require(std::isfinite(dt) && dt > 0, "dt must be positive");
    require(std::isfinite(sample_interval) && sample_interval >= dt,
            "sample_interval must be at least dt");
    const double ratio = sample_interval / dt;
    require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio,
            "sample_interval must be an integer multiple of dt");
}

std::int64_t SystemParams::steps_per_sample() const
{
    return static_cast<std::int64_t>(std::llround(sample_interval / dt));
}

std::string SystemParams::digest() const
{
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "N_a=%lld omega_rec=%.17g kappa=%.17g U0=%.17g zeta2p=%.17g zeta2m=%.17g "
                  "delta_eff=%.17g n_max=%d dt=%.17g sample=%.17g frame=%s",
                  static_cast<long long>(atom_number), recoil_freq, cavity_linewidth,
                  light_shift, pol_plus, pol_minus, detuning_eff, mode_cutoff, dt,
                  sample_interval, kinetic_frame ? "kinetic" : "lab");
    return buf;
}

double detuning_cavity(const SystemParams& params)
{
    return params.detuning_eff + 0.5 * static_cast<double>(params.atom_number) * params.light_shift;
}

double detuning_eff_for_cavity(double delta_c, const SystemParams& params)
{
    return delta_c - 0.5 * static_cast<double>(params.atom_number) * params.light_shift;
}

double pump_amplitude(double eps, const SystemParams& params)
{
    if (!(params.light_shift > 0)) throw InvalidParameter("light_shift must be positive");
    if (!(eps >= 0)) throw InvalidParameter("pump strength must be non-negative");
    return std::sqrt(2.0 * params.recoil_freq * eps / params.light_shift);
}

double pump_strength(double amplitude, const SystemParams& params)
{
    if (!(params.light_shift > 0)) throw InvalidParameter("light_shift must be positive");
    return amplitude * amplitude * params.light_shift / (2.0 * params.recoil_freq);
}

}  // namespace atomcavity
