#include "atomcavity/twa.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "atomcavity/dynamics.hpp"
#include "atomcavity/errors.hpp"

namespace atomcavity {

namespace {

constexpr std::uint64_t kSamplingStream = 0x5a;

// Neumaier compensated accumulator.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x)
    {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

struct SeriesAccumulator {
    std::vector<KahanSum> photons_plus, photons_minus, dw, bunching, re_alpha, im_alpha;
    std::size_t count = 0;

    explicit SeriesAccumulator(std::size_t n)
        : photons_plus(n), photons_minus(n), dw(n), bunching(n), re_alpha(n), im_alpha(n)
    {
    }

    void add(const TrajectoryRecord& r)
    {
        for (std::size_t i = 0; i < r.size(); ++i) {
            photons_plus[i].add(r.photons_plus[i]);
            photons_minus[i].add(r.photons_minus[i]);
            dw[i].add(r.dw_order[i]);
            bunching[i].add(r.bunching[i]);
            re_alpha[i].add(r.alpha_plus[i].real());
            im_alpha[i].add(r.alpha_plus[i].imag());
        }
        ++count;
    }
};

}  // namespace

std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index)
{
    return mix_seed(base_seed, index);
}

FieldState sample_initial(const SystemParams& params, std::uint64_t seed)
{
    params.validate();
    if (params.atom_number <= 0) throw InvalidParameter("Wigner sampling needs atoms");

    std::mt19937_64 rng(mix_seed(seed, kSamplingStream));
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto vacuum = [&] {
        const double re = gauss(rng);
        const double im = gauss(rng);
        return Complex{re, im} * 0.5;
    };

    const double sqrt_atoms = std::sqrt(static_cast<double>(params.atom_number));
    FieldState s;
    s.phi = ModeGrid(params.mode_cutoff);
    const int c = params.mode_cutoff;
    for (int n = -c; n <= c; ++n) {
        for (int m = -c; m <= c; ++m) {
            Complex a = vacuum();
            if (n == 0 && m == 0) a += sqrt_atoms;
            s.phi(n, m) = a / sqrt_atoms;
        }
    }
    s.alpha_plus = vacuum();
    s.alpha_minus = vacuum();
    return s;
}

TrajectoryRecord EnsembleResult::mean_record() const
{
    TrajectoryRecord r;
    r.time = time;
    r.alpha_plus = mean_alpha_plus;
    r.photons_plus = mean_photons_plus;
    r.photons_minus = mean_photons_minus;
    r.dw_order = mean_dw_order;
    r.bunching = mean_bunching;
    r.params_digest = params_digest;
    r.protocol = protocol;
    r.seed = base_seed;
    return r;
}

EnsembleResult run_ensemble(const EnsembleSpec& spec)
{
    if (spec.n_traj < 1) throw InvalidParameter("ensemble needs at least one trajectory");
    spec.params.validate();

    const double duration = spec.protocol.duration();
    const auto samples = static_cast<std::size_t>(
        std::floor(duration / spec.params.sample_interval * (1.0 + 1e-12))) + 1;

    EnsembleResult result;
    result.n_traj = spec.n_traj;
    result.base_seed = spec.base_seed;
    result.params_digest = spec.params.digest();
    result.protocol = spec.protocol.to_string();
    if (spec.retain_trajectories) result.trajectories.resize(spec.n_traj);

    SeriesAccumulator acc(samples);
    std::vector<double> time_axis;

    // Completed trajectories wait here until every lower index is merged.
    std::mutex mu;
    std::map<std::size_t, std::optional<TrajectoryRecord>> pending;
    std::size_t next_merge = 0;
    std::exception_ptr failure;

    auto merge_ready = [&] {
        for (auto it = pending.find(next_merge); it != pending.end();
             it = pending.find(next_merge)) {
            if (it->second) {
                if (time_axis.empty()) time_axis = it->second->time;
                acc.add(*it->second);
                if (spec.retain_trajectories)
                    result.trajectories[next_merge] = std::move(*it->second);
            } else {
                ++result.diverged;
            }
            pending.erase(it);
            ++next_merge;
        }
    };

    auto run_one = [&](std::size_t index) -> std::optional<TrajectoryRecord> {
        const std::uint64_t seed = trajectory_seed(spec.base_seed, index);
        const FieldState init = spec.initial ? *spec.initial : sample_initial(spec.params, seed);
        try {
            return evolve(init, spec.protocol, spec.params, NoiseSettings{spec.noise, seed});
        } catch (const DivergenceError&) {
            return std::nullopt;
        }
    };

    std::atomic<std::size_t> next_index{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next_index.fetch_add(1);
            if (i >= spec.n_traj) return;
            std::optional<TrajectoryRecord> rec;
            try {
                rec = run_one(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                next_index = spec.n_traj;
                return;
            }
            std::lock_guard lock(mu);
            pending.emplace(i, std::move(rec));
            merge_ready();
        }
    };

    unsigned threads = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                         : spec.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, spec.n_traj));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    if (result.diverged * 100 > spec.n_traj)
        throw DivergenceError(0.0, std::to_string(result.diverged) + " of " +
                                       std::to_string(spec.n_traj) +
                                       " trajectories diverged (limit 1%)");
    if (acc.count == 0) throw DivergenceError(0.0, "every trajectory diverged");

    const double inv = 1.0 / static_cast<double>(acc.count);
    result.time = std::move(time_axis);
    result.mean_photons_plus.resize(samples);
    result.mean_photons_minus.resize(samples);
    result.mean_dw_order.resize(samples);
    result.mean_bunching.resize(samples);
    result.mean_alpha_plus.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        result.mean_photons_plus[i] = acc.photons_plus[i].value() * inv;
        result.mean_photons_minus[i] = acc.photons_minus[i].value() * inv;
        result.mean_dw_order[i] = acc.dw[i].value() * inv;
        result.mean_bunching[i] = acc.bunching[i].value() * inv;
        result.mean_alpha_plus[i] = Complex{acc.re_alpha[i].value(), acc.im_alpha[i].value()} * inv;
    }
    return result;
}

}  // namespace atomcavity
