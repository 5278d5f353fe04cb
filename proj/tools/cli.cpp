#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "atomcavity/analysis.hpp"
#include "atomcavity/config.hpp"
#include "atomcavity/dynamics.hpp"
#include "atomcavity/errors.hpp"
#include "atomcavity/series_io.hpp"
#include "atomcavity/sweep.hpp"
#include "atomcavity/trajectory.hpp"
#include "atomcavity/twa.hpp"

namespace atomcavity::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<double> delta_eff_khz;
    std::optional<double> eps;
    std::optional<std::size_t> trajectories;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<std::string> protocol;
    std::optional<int> mode_cutoff;

    std::optional<double> theta_np, theta_dw, theta_lc, theta_flat, theta_line;

    std::optional<double> t1;

    std::optional<double> delta_min, delta_max, eps_min, eps_max;
    std::optional<std::size_t> delta_count, eps_count;

    std::string input;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

RunConfig resolve(const Flags& f)
{
    RunConfig cfg = f.config ? load_config(*f.config) : RunConfig{};
    if (f.seed) cfg.seed = *f.seed;
    if (f.mode) cfg.mode = mode_from_string(*f.mode);
    if (f.delta_eff_khz) cfg.delta_eff_khz = *f.delta_eff_khz;
    if (f.eps) cfg.eps = *f.eps;
    if (f.trajectories) cfg.trajectories = *f.trajectories;
    if (f.out) cfg.out_dir = *f.out;
    if (f.threads) cfg.threads = *f.threads;
    if (f.protocol) cfg.protocol = ProtocolTemplate::parse(*f.protocol);
    if (f.mode_cutoff) cfg.params.mode_cutoff = *f.mode_cutoff;
    if (f.theta_np) cfg.thresholds.np_photons = *f.theta_np;
    if (f.theta_dw) cfg.thresholds.dw_relative_std = *f.theta_dw;
    if (f.theta_lc) cfg.thresholds.lc_prominence = *f.theta_lc;
    if (f.theta_flat) cfg.thresholds.lc_flatness = *f.theta_flat;
    if (f.theta_line) cfg.thresholds.lc_line_fraction = *f.theta_line;
    if (f.t1) cfg.correlation_t1 = *f.t1;
    if (f.delta_min) cfg.delta_axis_khz.min = *f.delta_min;
    if (f.delta_max) cfg.delta_axis_khz.max = *f.delta_max;
    if (f.delta_count) cfg.delta_axis_khz.count = *f.delta_count;
    if (f.eps_min) cfg.eps_axis.min = *f.eps_min;
    if (f.eps_max) cfg.eps_axis.max = *f.eps_max;
    if (f.eps_count) cfg.eps_axis.count = *f.eps_count;
    cfg.params.validate();
    return cfg;
}

fs::path prepare_output(const RunConfig& cfg)
{
    const fs::path dir = cfg.out_dir;
    std::error_code ec;
    fs::create_directories(dir / "series", ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << text;
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

std::string meta_text(const std::string& command, const RunConfig& cfg, const SystemParams& params)
{
    std::ostringstream os;
    const auto& th = cfg.thresholds;
    os << "command: " << command << '\n'
       << "code_version: " << kCodeVersion << '\n'
       << "params: " << params.digest() << '\n'
       << "mode: " << to_string(cfg.mode) << '\n'
       << "seed: " << cfg.seed << '\n'
       << "protocol: " << cfg.protocol.name << '\n'
       << "delta_eff_unit: "
       << (cfg.detuning_unit == DetuningUnit::KiloHertz ? "khz" : "krad_per_s") << '\n'
       << "thresholds: np=" << fmt(th.np_photons) << " dw=" << fmt(th.dw_relative_std)
       << " lc=" << fmt(th.lc_prominence) << " flat=" << fmt(th.lc_flatness)
       << " line=" << fmt(th.lc_line_fraction) << " cycles=" << fmt(th.lc_min_cycles)
       << " band_hz=" << fmt(th.band_hz) << " window=" << fmt(th.window) << '\n';
    return os.str();
}

void report(std::ostream& out, const PhaseVerdict& v)
{
    out << "verdict: " << to_string(v.label);
    if (v.omega_b) out << "  omega_B/2pi = " << angular_to_khz(*v.omega_b) << " kHz";
    out << "  <n+> = " << v.mean_photons << "  rel.std = " << v.relative_std
        << "  prominence = " << v.peak_prominence << "  flatness = " << v.spectral_flatness
        << "  lines = " << v.line_fraction
        << '\n';
}

bool point_given(const RunConfig& cfg) { return cfg.delta_eff_khz && cfg.eps; }

SystemParams point_params(const RunConfig& cfg)
{
    SystemParams p = cfg.params;
    p.detuning_eff = detuning_to_angular(*cfg.delta_eff_khz, cfg.detuning_unit);
    p.validate();
    return p;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out)
{
    const SystemParams p = point_params(cfg);
    const DriveProtocol protocol = cfg.protocol.instantiate(*cfg.eps);
    TrajectoryRecord rec;
    if (cfg.mode == Mode::MeanField) {
        rec = evolve(FieldState::seeded(p.mode_cutoff, cfg.mf_seed_amplitude), protocol, p);
    } else {
        // Same draw as trajectory 0 of an ensemble with this base seed.
        const std::uint64_t s = trajectory_seed(cfg.seed, 0);
        rec = evolve(sample_initial(p, s), protocol, p, NoiseSettings{true, s});
    }
    const PhaseVerdict v = classify_phase(rec, cfg.thresholds);

    const fs::path dir = prepare_output(cfg);
    write_text(dir / "meta", meta_text("simulate", cfg, p) + "eps: " + fmt(*cfg.eps) + '\n');
    write_table(dir / "series" / "trajectory.dat", trajectory_table(rec));
    write_table(dir / "series" / "spectrum.dat",
                spectrum_table(power_spectrum(rec.time, rec.photons_plus)));
    write_text(dir / "verdict", v.to_json() + '\n');
    report(out, v);
    return kOk;
}

int cmd_ensemble(const RunConfig& cfg, std::ostream& out)
{
    const SystemParams p = point_params(cfg);
    EnsembleSpec spec;
    spec.n_traj = cfg.trajectories;
    spec.base_seed = cfg.seed;
    spec.protocol = cfg.protocol.instantiate(*cfg.eps);
    spec.params = p;
    spec.threads = cfg.threads;
    spec.retain_trajectories = cfg.retain_trajectories || cfg.correlation_t1.has_value();
    const EnsembleResult ens = run_ensemble(spec);
    const TrajectoryRecord mean = ens.mean_record();
    const PhaseVerdict v = classify_phase(mean, cfg.thresholds);

    const fs::path dir = prepare_output(cfg);
    write_text(dir / "meta", meta_text("ensemble", cfg, p) + "eps: " + fmt(*cfg.eps) + '\n' +
                                 "n_traj: " + std::to_string(ens.n_traj) + '\n' +
                                 "diverged: " + std::to_string(ens.diverged) + '\n');
    write_table(dir / "series" / "ensemble_mean.dat", ensemble_table(ens));
    write_table(dir / "series" / "spectrum.dat",
                spectrum_table(power_spectrum(mean.time, mean.photons_plus)));
    if (cfg.retain_trajectories) {
        for (std::size_t i = 0; i < ens.trajectories.size(); ++i) {
            if (ens.trajectories[i].size() == 0) continue;
            char name[40];
            std::snprintf(name, sizeof name, "trajectory_%05zu.dat", i);
            write_table(dir / "series" / name, trajectory_table(ens.trajectories[i]));
        }
    }
    if (cfg.correlation_t1) {
        const CorrelationTrace c = two_time_correlation(ens, *cfg.correlation_t1);
        write_table(dir / "series" / "correlation.dat", correlation_table(c));
        out << "correlation amplitude: " << correlation_amplitude(c) << '\n';
    }
    write_text(dir / "verdict", v.to_json() + '\n');
    if (ens.diverged) out << ens.diverged << " of " << ens.n_traj << " trajectories diverged\n";
    report(out, v);
    return kOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out)
{
    SweepSpec spec;
    spec.delta_axis = {detuning_to_angular(cfg.delta_axis_khz.min, cfg.detuning_unit),
                       detuning_to_angular(cfg.delta_axis_khz.max, cfg.detuning_unit),
                       cfg.delta_axis_khz.count};
    spec.eps_axis = cfg.eps_axis;
    spec.params = cfg.params;
    spec.cell.mode = cfg.mode;
    spec.cell.n_traj = cfg.trajectories;
    spec.cell.protocol = cfg.protocol;
    spec.cell.thresholds = cfg.thresholds;
    spec.cell.mf_seed_amplitude = cfg.mf_seed_amplitude;
    spec.base_seed = cfg.seed;
    spec.threads = cfg.threads;
    const PhaseMap map = run_sweep(spec);

    const fs::path dir = prepare_output(cfg);
    std::error_code ec;
    fs::create_directories(dir / "cuts", ec);
    if (ec) throw IoError("cannot create '" + (dir / "cuts").string() + "': " + ec.message());
    write_text(dir / "meta", meta_text("sweep", cfg, cfg.params));
    {
        std::ofstream os(dir / "phase_map");
        if (!os) throw IoError("cannot open '" + (dir / "phase_map").string() + "' for writing");
        write_phase_map(os, map);
    }
    for (std::size_t i = 0; i < map.delta_count; ++i)
        write_table(dir / "cuts" / ("fixed_delta_" + std::to_string(i) + ".dat"),
                    extract_cut(map, CutAxis::FixedDelta, i));
    for (std::size_t j = 0; j < map.eps_count; ++j)
        write_table(dir / "cuts" / ("fixed_eps_" + std::to_string(j) + ".dat"),
                    extract_cut(map, CutAxis::FixedEps, j));

    std::size_t diverged = 0;
    for (const auto& c : map.cells) {
        out << detuning_from_angular(c.delta_eff, cfg.detuning_unit) << ' ' << c.eps << ' '
            << (c.diverged ? "DIVERGED" : to_string(c.verdict.label));
        if (!c.diverged && c.verdict.omega_b)
            out << ' ' << angular_to_khz(*c.verdict.omega_b);
        out << '\n';
        diverged += c.diverged;
    }
    if (diverged) out << diverged << " of " << map.cells.size() << " cells diverged\n";
    return kOk;
}

fs::path locate_series(const fs::path& input)
{
    if (!fs::is_directory(input)) return input;
    for (const char* name : {"trajectory.dat", "ensemble_mean.dat"})
        if (fs::exists(input / "series" / name)) return input / "series" / name;
    throw IoError("no stored series under '" + input.string() + "'");
}

int cmd_analyze(const RunConfig& cfg, const Flags& flags, std::ostream& out)
{
    const ColumnarTable table = read_table(locate_series(flags.input));
    const TrajectoryRecord rec = trajectory_from_table(table);
    const PhaseVerdict v = classify_phase(rec, cfg.thresholds);
    if (flags.out) {
        std::error_code ec;
        fs::create_directories(*flags.out, ec);
        if (ec) throw IoError("cannot create '" + *flags.out + "': " + ec.message());
        write_text(fs::path(*flags.out) / "verdict", v.to_json() + '\n');
    }
    report(out, v);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Atom-cavity dynamics: mean-field and truncated Wigner simulations"};
    app.name("atomcavity");
    app.require_subcommand(1);
    app.fallthrough();

    Flags f;
    app.add_option("--config", f.config, "key = value configuration file");
    app.add_option("--seed", f.seed, "base random seed");
    app.add_option("--mode", f.mode, "mf or twa");
    app.add_option("--delta-eff-khz", f.delta_eff_khz, "effective detuning in kHz");
    app.add_option("--eps-rec", f.eps, "pump strength in recoil energies");
    app.add_option("--trajectories", f.trajectories, "TWA trajectories per point");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--threads", f.threads, "worker threads (0: all cores)");
    app.add_option("--protocol", f.protocol, "classification, ramp, constant or dur:start:end,...");
    app.add_option("--n-max", f.mode_cutoff, "momentum cutoff");

    auto* simulate = app.add_subcommand("simulate", "one MF or TWA trajectory and its verdict");
    auto* ensemble = app.add_subcommand("ensemble", "TWA ensemble mean and verdict");
    ensemble->add_option("--t1", f.t1, "reference time of the two-time correlation, s");
    auto* sweep = app.add_subcommand("sweep", "phase map over (delta_eff, eps)");
    sweep->add_option("--delta-min-khz", f.delta_min, "first detuning, kHz");
    sweep->add_option("--delta-max-khz", f.delta_max, "last detuning, kHz");
    sweep->add_option("--delta-count", f.delta_count, "detuning points");
    sweep->add_option("--eps-min", f.eps_min, "first pump strength");
    sweep->add_option("--eps-max", f.eps_max, "last pump strength");
    sweep->add_option("--eps-count", f.eps_count, "pump points");
    auto* analyze = app.add_subcommand("analyze", "re-classify a stored series");
    analyze->add_option("--input", f.input, "series file or run directory")->required();
    for (auto* sub : {analyze, simulate, ensemble, sweep}) {
        sub->add_option("--theta-np", f.theta_np, "NP photon threshold");
        sub->add_option("--theta-dw", f.theta_dw, "DW relative-std threshold");
        sub->add_option("--theta-lc", f.theta_lc, "LC peak prominence threshold");
        sub->add_option("--theta-flat", f.theta_flat, "LC spectral flatness ceiling");
        sub->add_option("--theta-line", f.theta_line, "LC line-fraction floor");
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        err << app.help();
        return kUsage;
    }

    try {
        const RunConfig cfg = resolve(f);
        if (analyze->parsed()) return cmd_analyze(cfg, f, out);
        if (sweep->parsed()) return cmd_sweep(cfg, out);
        CLI::App* sub = simulate->parsed() ? simulate : ensemble;
        if (!point_given(cfg)) {
            err << "a point needs --delta-eff-khz and --eps-rec\n" << sub->help();
            return kUsage;
        }
        if (simulate->parsed()) return cmd_simulate(cfg, out);
        return cmd_ensemble(cfg, out);
    } catch (const DivergenceError& e) {
        err << "diverged: " << e.what() << '\n';
        return kDiverged;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return kIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace atomcavity::cli
