#include "atomcavity/config.hpp"

#include <fstream>
#include <sstream>

#include "atomcavity/errors.hpp"

namespace atomcavity {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw InvalidParameter("config key '" + key + "': expected a number, got '" + v + "'");
}

std::uint64_t to_uint(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        if (!v.empty() && v[0] != '-') {
            const auto u = std::stoull(v, &pos);
            if (pos == v.size()) return u;
        }
    } catch (const std::exception&) {
    }
    throw InvalidParameter("config key '" + key + "': expected a non-negative integer, got '" + v +
                           "'");
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidParameter("config key '" + key + "': expected true/false, got '" + v + "'");
}

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::MeanField ? "mf" : "twa"; }

Mode mode_from_string(const std::string& text)
{
    if (text == "mf" || text == "MF") return Mode::MeanField;
    if (text == "twa" || text == "TWA") return Mode::Twa;
    throw InvalidParameter("mode must be 'mf' or 'twa', got '" + text + "'");
}

double detuning_to_angular(double value, DetuningUnit unit)
{
    return unit == DetuningUnit::KiloHertz ? khz_to_angular(value) : 1e3 * value;
}

double detuning_from_angular(double omega, DetuningUnit unit)
{
    return unit == DetuningUnit::KiloHertz ? angular_to_khz(omega) : omega / 1e3;
}

DriveProtocol ProtocolTemplate::instantiate(double eps) const
{
    std::vector<DriveSegment> segs = shape;
    for (auto& s : segs) {
        s.eps_start *= eps;
        s.eps_end *= eps;
    }
    return DriveProtocol(std::move(segs));
}

ProtocolTemplate ProtocolTemplate::classification(double ramp, double hold)
{
    return {"classification", {{ramp, 0.0, 1.0}, {hold, 1.0, 1.0}}};
}

ProtocolTemplate ProtocolTemplate::ramp(double duration) { return {"ramp", {{duration, 0.0, 1.0}}}; }

ProtocolTemplate ProtocolTemplate::constant(double duration)
{
    return {"constant", {{duration, 1.0, 1.0}}};
}

ProtocolTemplate ProtocolTemplate::parse(const std::string& text)
{
    if (text == "classification") return classification();
    if (text == "ramp") return ramp();
    if (text == "constant") return constant();
    ProtocolTemplate t{text, DriveProtocol::parse(text).segments()};
    return t;
}

double Axis::at(std::size_t i) const
{
    if (count <= 1) return min;
    return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
}

void RunConfig::set(const std::string& key, const std::string& v)
{
    auto& p = params;
    if (key == "atom_number") p.atom_number = static_cast<std::int64_t>(to_uint(key, v));
    else if (key == "recoil_freq_hz") p.recoil_freq = hz_to_angular(to_double(key, v));
    else if (key == "cavity_linewidth_hz") p.cavity_linewidth = hz_to_angular(to_double(key, v));
    else if (key == "light_shift_hz") p.light_shift = hz_to_angular(to_double(key, v));
    else if (key == "pol_plus") p.pol_plus = to_double(key, v);
    else if (key == "pol_minus") p.pol_minus = to_double(key, v);
    else if (key == "mode_cutoff") p.mode_cutoff = static_cast<int>(to_uint(key, v));
    else if (key == "kinetic_frame") p.kinetic_frame = to_bool(key, v);
    else if (key == "dt") p.dt = to_double(key, v);
    else if (key == "sample_interval") p.sample_interval = to_double(key, v);
    else if (key == "delta_eff_khz") delta_eff_khz = to_double(key, v);
    else if (key == "delta_eff_unit") {
        if (v == "khz") detuning_unit = DetuningUnit::KiloHertz;
        else if (v == "krad_per_s") detuning_unit = DetuningUnit::KiloRadPerSecond;
        else throw InvalidParameter("delta_eff_unit must be 'khz' or 'krad_per_s'");
    }
    else if (key == "eps") eps = to_double(key, v);
    else if (key == "mode") mode = mode_from_string(v);
    else if (key == "trajectories") trajectories = static_cast<std::size_t>(to_uint(key, v));
    else if (key == "seed") seed = to_uint(key, v);
    else if (key == "threads") threads = static_cast<unsigned>(to_uint(key, v));
    else if (key == "protocol") protocol = ProtocolTemplate::parse(v);
    else if (key == "mf_seed_amplitude") mf_seed_amplitude = to_double(key, v);
    else if (key == "theta_np") thresholds.np_photons = to_double(key, v);
    else if (key == "theta_dw") thresholds.dw_relative_std = to_double(key, v);
    else if (key == "theta_lc") thresholds.lc_prominence = to_double(key, v);
    else if (key == "theta_flat") thresholds.lc_flatness = to_double(key, v);
    else if (key == "theta_line") thresholds.lc_line_fraction = to_double(key, v);
    else if (key == "lc_min_cycles") thresholds.lc_min_cycles = to_double(key, v);
    else if (key == "analysis_band_hz") thresholds.band_hz = to_double(key, v);
    else if (key == "analysis_window") thresholds.window = to_double(key, v);
    else if (key == "sweep_delta_min_khz") delta_axis_khz.min = to_double(key, v);
    else if (key == "sweep_delta_max_khz") delta_axis_khz.max = to_double(key, v);
    else if (key == "sweep_delta_count") delta_axis_khz.count = static_cast<std::size_t>(to_uint(key, v));
    else if (key == "sweep_eps_min") eps_axis.min = to_double(key, v);
    else if (key == "sweep_eps_max") eps_axis.max = to_double(key, v);
    else if (key == "sweep_eps_count") eps_axis.count = static_cast<std::size_t>(to_uint(key, v));
    else if (key == "correlation_t1") correlation_t1 = to_double(key, v);
    else if (key == "retain_trajectories") retain_trajectories = to_bool(key, v);
    else if (key == "out") out_dir = v;
    else throw InvalidParameter("unknown config key '" + key + "'");
}

RunConfig parse_config(std::istream& is, RunConfig base)
{
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidParameter("config line " + std::to_string(lineno) + ": expected key = value");
        base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base)
{
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config '" + path.string() + "'");
    return parse_config(is, std::move(base));
}

}  // namespace atomcavity
