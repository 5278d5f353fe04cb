#include "atomcavity/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "atomcavity/dynamics.hpp"
#include "atomcavity/errors.hpp"

#include "json.hpp"

namespace atomcavity {

using nlohmann::json;

CellRun simulate_cell(double delta_eff, double eps, const SystemParams& params,
                      const CellOptions& options, std::uint64_t seed)
{
    SystemParams p = params;
    p.detuning_eff = delta_eff;
    p.validate();
    const DriveProtocol protocol = options.protocol.instantiate(eps);

    CellRun run;
    run.result.delta_eff = delta_eff;
    run.result.eps = eps;
    run.result.seed = seed;
    try {
        if (options.mode == Mode::MeanField) {
            const FieldState init = FieldState::seeded(p.mode_cutoff, options.mf_seed_amplitude);
            run.record = evolve(init, protocol, p);
        } else {
            EnsembleSpec spec;
            spec.n_traj = options.n_traj;
            spec.base_seed = seed;
            spec.protocol = protocol;
            spec.params = p;
            spec.threads = options.threads;
            spec.retain_trajectories = options.retain_trajectories;
            run.ensemble = run_ensemble(spec);
            run.record = run.ensemble->mean_record();
        }
    } catch (const DivergenceError& e) {
        run.result.diverged = true;
        run.result.diverged_at = e.time();
        run.result.verdict.thresholds = options.thresholds;
        return run;
    }
    run.result.verdict = classify_phase(run.record, options.thresholds);
    return run;
}

CellResult run_cell(double delta_eff, double eps, const SystemParams& params,
                    const CellOptions& options, std::uint64_t seed)
{
    return simulate_cell(delta_eff, eps, params, options, seed).result;
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t i, std::size_t j)
{
    return mix_seed(mix_seed(base_seed, i), j);
}

PhaseMap run_sweep(const SweepSpec& spec)
{
    if (spec.delta_axis.count < 1 || spec.eps_axis.count < 1)
        throw InvalidParameter("sweep axes need at least one point");
    for (double v : {spec.delta_axis.min, spec.delta_axis.max, spec.eps_axis.min, spec.eps_axis.max})
        if (!std::isfinite(v)) throw InvalidParameter("sweep axes must be finite");
    spec.params.validate();

    PhaseMap map;
    map.delta_count = spec.delta_axis.count;
    map.eps_count = spec.eps_axis.count;
    map.cells.resize(map.delta_count * map.eps_count);
    map.mode = to_string(spec.cell.mode);
    map.params_digest = spec.params.digest();
    map.code_version = kCodeVersion;
    map.base_seed = spec.base_seed;

    const std::size_t total = map.cells.size();
    unsigned workers = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                         : spec.threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
    CellOptions options = spec.cell;
    // A single cell gets the whole thread budget for its trajectories.
    options.threads = workers <= 1 ? std::max(1u, spec.threads) : 1;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
            const std::size_t i = k / map.eps_count;
            const std::size_t j = k % map.eps_count;
            CellResult r = run_cell(spec.delta_axis.at(i), spec.eps_axis.at(j), spec.params,
                                    options, cell_seed(spec.base_seed, i, j));
            r.i = i;
            r.j = j;
            map.cells[k] = std::move(r);  // each slot written by one worker only
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    }

    if (std::all_of(map.cells.begin(), map.cells.end(), [](const auto& c) { return c.diverged; }))
        throw DivergenceError(0.0, "every sweep cell diverged");
    return map;
}

namespace {

json thresholds_json(const ClassifierThresholds& t)
{
    return {{"np_photons", t.np_photons},     {"dw_relative_std", t.dw_relative_std},
            {"lc_prominence", t.lc_prominence}, {"lc_flatness", t.lc_flatness},
            {"lc_line_fraction", t.lc_line_fraction}, {"lc_min_cycles", t.lc_min_cycles},
            {"band_hz", t.band_hz}, {"window", t.window}};
}

ClassifierThresholds thresholds_from(const json& j)
{
    ClassifierThresholds t;
    t.np_photons = j.at("np_photons").get<double>();
    t.dw_relative_std = j.at("dw_relative_std").get<double>();
    t.lc_prominence = j.at("lc_prominence").get<double>();
    t.lc_flatness = j.at("lc_flatness").get<double>();
    t.lc_line_fraction = j.at("lc_line_fraction").get<double>();
    t.lc_min_cycles = j.at("lc_min_cycles").get<double>();
    t.band_hz = j.at("band_hz").get<double>();
    t.window = j.at("window").get<double>();
    return t;
}

json optional_number(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

}  // namespace

void write_phase_map(std::ostream& os, const PhaseMap& map)
{
    json header = {{"kind", "phase_map"},         {"delta_count", map.delta_count},
                   {"eps_count", map.eps_count},  {"mode", map.mode},
                   {"params", map.params_digest}, {"code_version", map.code_version},
                   {"base_seed", map.base_seed}};
    os << header.dump() << '\n';
    for (const auto& c : map.cells) {
        const auto& v = c.verdict;
        json line = {{"i", c.i},
                     {"j", c.j},
                     {"delta_eff", c.delta_eff},
                     {"eps", c.eps},
                     {"label", c.diverged ? "DIVERGED" : to_string(v.label)},
                     {"omega_B", optional_number(v.omega_b)},
                     {"peak_amplitude", v.peak_amplitude},
                     {"flatness", v.spectral_flatness},
                     {"line_fraction", v.line_fraction},
                     {"diverged", c.diverged},
                     {"diverged_at", optional_number(c.diverged_at)},
                     {"seed", c.seed},
                     {"peak_frequency_hz", v.peak_frequency_hz},
                     {"peak_prominence", v.peak_prominence},
                     {"mean_photons", v.mean_photons},
                     {"relative_std", v.relative_std},
                     {"verdict_label", to_string(v.label)},
                     {"thresholds", thresholds_json(v.thresholds)}};
        os << line.dump() << '\n';
    }
}

PhaseMap read_phase_map(std::istream& is)
{
    PhaseMap map;
    std::string line;
    try {
        if (!std::getline(is, line)) throw InputError("empty phase map");
        const json header = json::parse(line);
        if (header.at("kind") != "phase_map") throw InputError("not a phase map");
        map.delta_count = header.at("delta_count").get<std::size_t>();
        map.eps_count = header.at("eps_count").get<std::size_t>();
        map.mode = header.at("mode").get<std::string>();
        map.params_digest = header.at("params").get<std::string>();
        map.code_version = header.at("code_version").get<std::string>();
        map.base_seed = header.at("base_seed").get<std::uint64_t>();
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            CellResult c;
            c.i = j.at("i").get<std::size_t>();
            c.j = j.at("j").get<std::size_t>();
            c.delta_eff = j.at("delta_eff").get<double>();
            c.eps = j.at("eps").get<double>();
            c.seed = j.at("seed").get<std::uint64_t>();
            c.diverged = j.at("diverged").get<bool>();
            if (!j.at("diverged_at").is_null()) c.diverged_at = j.at("diverged_at").get<double>();
            auto& v = c.verdict;
            v.label = phase_from_string(j.at("verdict_label").get<std::string>());
            if (!j.at("omega_B").is_null()) v.omega_b = j.at("omega_B").get<double>();
            v.peak_amplitude = j.at("peak_amplitude").get<double>();
            v.spectral_flatness = j.at("flatness").get<double>();
            v.line_fraction = j.at("line_fraction").get<double>();
            v.peak_frequency_hz = j.at("peak_frequency_hz").get<double>();
            v.peak_prominence = j.at("peak_prominence").get<double>();
            v.mean_photons = j.at("mean_photons").get<double>();
            v.relative_std = j.at("relative_std").get<double>();
            v.thresholds = thresholds_from(j.at("thresholds"));
            map.cells.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed phase map: ") + e.what());
    }
    if (map.cells.size() != map.delta_count * map.eps_count)
        throw InputError("phase map cell count does not match its axes");
    return map;
}

ColumnarTable extract_cut(const PhaseMap& map, CutAxis axis, std::size_t index)
{
    ColumnarTable t;
    const bool fixed_delta = axis == CutAxis::FixedDelta;
    const std::size_t n = fixed_delta ? map.eps_count : map.delta_count;
    if (index >= (fixed_delta ? map.delta_count : map.eps_count))
        throw InputError("cut index outside the phase map");
    t.columns = {fixed_delta ? "eps" : "delta_eff_khz", "omega_B_khz", "label", "diverged"};
    t.data.assign(4, {});
    const CellResult& first = fixed_delta ? map.at(index, 0) : map.at(0, index);
    t.meta = {{"kind", "cut"},
              {"fixed", fixed_delta ? "delta_eff" : "eps"},
              {"fixed_value", fixed_delta ? std::to_string(angular_to_khz(first.delta_eff))
                                          : std::to_string(first.eps)},
              {"mode", map.mode},
              {"omega_unit", "2pi kHz"}};
    for (std::size_t k = 0; k < n; ++k) {
        const CellResult& c = fixed_delta ? map.at(index, k) : map.at(k, index);
        t.data[0].push_back(fixed_delta ? c.eps : angular_to_khz(c.delta_eff));
        const bool has_omega = !c.diverged && c.verdict.omega_b.has_value();
        t.data[1].push_back(has_omega ? angular_to_khz(*c.verdict.omega_b)
                                      : std::numeric_limits<double>::quiet_NaN());
        t.data[2].push_back(static_cast<double>(static_cast<int>(c.verdict.label)));
        t.data[3].push_back(c.diverged ? 1.0 : 0.0);
    }
    return t;
}

}  // namespace atomcavity
