#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <cqsim/bath.hpp>
#include <cqsim/field.hpp>
#include <cqsim/parallel.hpp>
#include <cqsim/rng.hpp>
#include <cqsim/superpotential.hpp>

namespace cqsim {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

struct PhysicalParams {
    double hbar = 1.0;
};

inline void validate(const PhysicalParams& p) {
    if (!(p.hbar >= 0.0))
        throw std::invalid_argument("params: hbar must be non-negative");
}

enum class NoiseKind { white, bath };

struct SdeConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    std::int64_t n_paths = 1;
    std::uint64_t master_seed = 0;
    NoiseKind noise = NoiseKind::white;
    BathConfig bath;
    double escape_radius = 50.0;
};

inline void validate(const SdeConfig& cfg) {
    if (!(cfg.dt > 0.0))
        throw std::invalid_argument("sde: dt must be positive");
    if (!(cfg.t_final >= cfg.dt))
        throw std::invalid_argument("sde: t_final must be at least dt");
    if (cfg.n_paths < 1)
        throw std::invalid_argument("sde: n_paths must be at least 1");
    if (!(cfg.escape_radius > 0.0))
        throw std::invalid_argument("sde: escape_radius must be positive");
    if (cfg.noise == NoiseKind::bath)
        validate(cfg.bath);
}

struct PathEndpoint {
    double x1 = 0.0;
    double x2 = 0.0;
    bool escaped = false;
};

struct EnsembleResult {
    double mean_u1 = 0.0;
    double mean_u2 = 0.0;
    double stderr_u1 = 0.0;
    double stderr_u2 = 0.0;
    std::int64_t n_escaped = 0;
};

// One scalar noise increment with variance hbar dt.
inline double white_increment(std::mt19937_64& rng, const PhysicalParams& params, double dt) {
    std::normal_distribution<double> unit(0.0, 1.0);
    return unit(rng) * std::sqrt(params.hbar * dt);
}

// Euler step: the common increment pushes both components along (1,1)/sqrt(2).
inline Point2 step(Point2 pos, std::pair<double, double> drift, double inc, double dt) {
    return {pos.x1 + drift.first * dt + kInvSqrt2 * inc,
            pos.x2 + drift.second * dt + kInvSqrt2 * inc};
}

inline int sde_steps(const SdeConfig& cfg) {
    const int n = static_cast<int>(std::llround(cfg.t_final / cfg.dt));
    if (n < 1 || std::abs(n * cfg.dt - cfg.t_final) > 1e-9 * cfg.t_final)
        throw std::invalid_argument("sde: t_final must be an integer number of dt steps");
    return n;
}

// Shared-stream ensemble driver. The noise increments of path i depend only on
// (master_seed, i), never on the start point or the worker count, so every
// start sees the same noise and repeated runs are bit-identical. Endpoints are
// returned per start, indexed [start][path].
template <typename Drift>
std::vector<std::vector<PathEndpoint>> simulate_paths_multi(const SdeConfig& cfg,
                                                            const PhysicalParams& params,
                                                            const std::vector<Point2>& starts,
                                                            Drift&& drift) {
    validate(cfg);
    validate(params);
    if (starts.empty())
        throw std::invalid_argument("sde: no start points");
    const int n_steps = sde_steps(cfg);
    const int n_starts = static_cast<int>(starts.size());
    const double r2 = cfg.escape_radius * cfg.escape_radius;

    std::vector<std::vector<PathEndpoint>> out(n_starts);
    for (auto& v : out)
        v.resize(cfg.n_paths);

    PhasorPanel panel;
    std::vector<double> panel_times;
    if (cfg.noise == NoiseKind::bath) {
        panel_times.resize(n_steps + 1);
        for (int j = 0; j <= n_steps; ++j)
            panel_times[j] = j * cfg.dt;
        panel = phasor_panel(cfg.bath, panel_times);
    }

    constexpr int kBlock = 256;
    const std::int64_t n_blocks = (cfg.n_paths + kBlock - 1) / kBlock;

    parallel_blocks(static_cast<std::size_t>(n_blocks), [&](std::size_t b) {
        const std::int64_t p0 = static_cast<std::int64_t>(b) * kBlock;
        const int rows = static_cast<int>(std::min<std::int64_t>(kBlock, cfg.n_paths - p0));
        std::vector<double> inc(static_cast<std::size_t>(rows) * n_steps);

        if (cfg.noise == NoiseKind::white) {
            for (int m = 0; m < rows; ++m) {
                auto rng = make_stream(cfg.master_seed, static_cast<std::uint64_t>(p0 + m));
                std::normal_distribution<double> unit(0.0, 1.0);
                const double scale = std::sqrt(params.hbar * cfg.dt);
                double* row = inc.data() + static_cast<std::size_t>(m) * n_steps;
                for (int j = 0; j < n_steps; ++j)
                    row[j] = unit(rng) * scale;
            }
        } else {
            std::vector<double> coeffs(static_cast<std::size_t>(rows) * 2 * cfg.bath.n_modes);
            for (int m = 0; m < rows; ++m) {
                auto rng = make_stream(cfg.master_seed, static_cast<std::uint64_t>(p0 + m));
                const BathState st = sample_bath(cfg.bath, rng);
                antiderivative_coeffs(st, cfg.bath,
                                      coeffs.data() + static_cast<std::size_t>(m) * 2 * cfg.bath.n_modes);
            }
            std::vector<double> q;
            phasor_product(coeffs, rows, cfg.bath, panel, q);
            for (int m = 0; m < rows; ++m) {
                const double* qrow = q.data() + static_cast<std::size_t>(m) * (n_steps + 1);
                double* row = inc.data() + static_cast<std::size_t>(m) * n_steps;
                for (int j = 0; j < n_steps; ++j)
                    row[j] = qrow[j + 1] - qrow[j];
            }
        }

        for (int s = 0; s < n_starts; ++s)
            for (int m = 0; m < rows; ++m) {
                const double* row = inc.data() + static_cast<std::size_t>(m) * n_steps;
                Point2 pos = starts[s];
                bool escaped = false;
                for (int j = 0; j < n_steps; ++j) {
                    pos = step(pos, drift(pos), row[j], cfg.dt);
                    if (pos.x1 * pos.x1 + pos.x2 * pos.x2 > r2) {
                        escaped = true;
                        break;
                    }
                }
                out[s][p0 + m] = {pos.x1, pos.x2, escaped};
            }
    });

    for (int s = 0; s < n_starts; ++s) {
        std::int64_t alive = 0;
        for (const auto& e : out[s])
            alive += e.escaped ? 0 : 1;
        if (alive == 0)
            throw std::runtime_error("sde: every path escaped radius " +
                                     std::to_string(cfg.escape_radius) + " from start (" +
                                     std::to_string(starts[s].x1) + ", " +
                                     std::to_string(starts[s].x2) + ")");
    }
    return out;
}

template <typename Drift>
std::vector<PathEndpoint> simulate_paths(const SdeConfig& cfg, const PhysicalParams& params,
                                         Point2 start, Drift&& drift) {
    auto all = simulate_paths_multi(cfg, params, std::vector<Point2>{start},
                                    std::forward<Drift>(drift));
    return std::move(all[0]);
}

inline auto superpotential_drift(const Superpotential& s) {
    return [s](Point2 p) { return drift_field(s, p); };
}

// Ensemble average of the field over surviving endpoints.
inline EnsembleResult mc_average_field(const HolomorphicField& u,
                                       const std::vector<PathEndpoint>& endpoints) {
    EnsembleResult res;
    std::int64_t n = 0;
    double s1 = 0.0, s2 = 0.0;
    for (const auto& e : endpoints) {
        if (e.escaped) {
            ++res.n_escaped;
            continue;
        }
        auto [a, b] = eval_field(u, {e.x1, e.x2});
        s1 += a;
        s2 += b;
        ++n;
    }
    if (n < 2)
        throw std::runtime_error("mc_average_field: fewer than 2 surviving paths");
    res.mean_u1 = s1 / n;
    res.mean_u2 = s2 / n;
    double v1 = 0.0, v2 = 0.0;
    for (const auto& e : endpoints) {
        if (e.escaped)
            continue;
        auto [a, b] = eval_field(u, {e.x1, e.x2});
        v1 += (a - res.mean_u1) * (a - res.mean_u1);
        v2 += (b - res.mean_u2) * (b - res.mean_u2);
    }
    res.stderr_u1 = std::sqrt(v1 / (n - 1) / n);
    res.stderr_u2 = std::sqrt(v2 / (n - 1) / n);
    return res;
}

}  // namespace cqsim
