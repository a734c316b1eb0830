#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <cblas.h>

#include <cqsim/parallel.hpp>
#include <cqsim/rng.hpp>

extern "C" void openblas_set_num_threads(int);

namespace cqsim {

inline constexpr double kPi = 3.14159265358979323846;

struct BathConfig {
    int n_modes = 1;               // K; mode frequencies are k * d_omega, k = 1..K
    double d_omega = 1.0;
    double hbar = 1.0;
    int n_realizations = 1;        // M
    std::uint64_t seed = 0;
    int n_refs = 64;               // reference times averaged by the correlation estimator
    double ref_spacing = 0.02;
};

inline void validate(const BathConfig& cfg) {
    if (cfg.n_modes < 1)
        throw std::invalid_argument("bath: n_modes must be at least 1");
    if (!(cfg.d_omega > 0.0))
        throw std::invalid_argument("bath: d_omega must be positive");
    if (!(cfg.hbar > 0.0))
        throw std::invalid_argument("bath: hbar must be positive");
    if (cfg.n_realizations < 1)
        throw std::invalid_argument("bath: n_realizations must be at least 1");
    if (cfg.n_refs < 1)
        throw std::invalid_argument("bath: n_refs must be at least 1");
    if (cfg.n_refs > 1 && !(cfg.ref_spacing > 0.0))
        throw std::invalid_argument("bath: ref_spacing must be positive");
}

struct BathState {
    std::vector<double> q0;
    std::vector<double> p0;
};

inline double bath_omega(const BathConfig& cfg, int k) { return (k + 1) * cfg.d_omega; }
inline double bath_coupling(const BathConfig& cfg) { return std::sqrt(cfg.d_omega / kPi); }

// Thermal-style initial data: Var q_k(0) = hbar / omega_k^2, Var p_k(0) = hbar.
inline BathState sample_bath(const BathConfig& cfg, std::mt19937_64& rng) {
    validate(cfg);
    BathState st;
    st.q0.resize(cfg.n_modes);
    st.p0.resize(cfg.n_modes);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double sq_hbar = std::sqrt(cfg.hbar);
    for (int k = 0; k < cfg.n_modes; ++k) {
        st.q0[k] = unit(rng) * sq_hbar / bath_omega(cfg, k);
        st.p0[k] = unit(rng) * sq_hbar;
    }
    return st;
}

// eta(t) = sum_k a_k qdot_k(t) with qdot_k = -omega_k q_k(0) sin + p_k(0) cos.
inline double eta_bath(const BathState& st, const BathConfig& cfg, double t) {
    const double a = bath_coupling(cfg);
    double acc = 0.0;
    for (int k = 0; k < cfg.n_modes; ++k) {
        const double w = bath_omega(cfg, k);
        acc += a * (-w * st.q0[k] * std::sin(w * t) + st.p0[k] * std::cos(w * t));
    }
    return acc;
}

// Antiderivative sum Q(t) = sum_k a_k q_k(t); increments of the driving noise
// over a step are exact differences Q(t_{j+1}) - Q(t_j).
inline double bath_antiderivative(const BathState& st, const BathConfig& cfg, double t) {
    const double a = bath_coupling(cfg);
    double acc = 0.0;
    for (int k = 0; k < cfg.n_modes; ++k) {
        const double w = bath_omega(cfg, k);
        acc += a * (st.q0[k] * std::cos(w * t) + st.p0[k] / w * std::sin(w * t));
    }
    return acc;
}

// Reference path: per-mode phase recurrence, one path at a time.
inline std::vector<double> bath_increments(const BathState& st, const BathConfig& cfg,
                                           double dt, int n_steps) {
    const double a = bath_coupling(cfg);
    std::vector<double> q(n_steps + 1, 0.0);
    for (int k = 0; k < cfg.n_modes; ++k) {
        const double w = bath_omega(cfg, k);
        const double cs = std::cos(w * dt), sn = std::sin(w * dt);
        double c = 1.0, s = 0.0;  // cos(w t_j), sin(w t_j)
        const double cq = a * st.q0[k], cp = a * st.p0[k] / w;
        for (int j = 0; j <= n_steps; ++j) {
            q[j] += cq * c + cp * s;
            const double c2 = c * cs - s * sn;
            s = c * sn + s * cs;
            c = c2;
        }
    }
    std::vector<double> inc(n_steps);
    for (int j = 0; j < n_steps; ++j)
        inc[j] = q[j + 1] - q[j];
    return inc;
}

// Shared phasor table: row 2k holds cos(omega_k t_j), row 2k+1 holds
// sin(omega_k t_j), for the given time columns. One table serves every
// realization; per-realization work is then a single matrix product.
struct PhasorPanel {
    int n_times = 0;
    std::vector<double> data;  // (2 n_modes) x n_times, row-major
};

inline PhasorPanel phasor_panel(const BathConfig& cfg, const std::vector<double>& times) {
    PhasorPanel p;
    p.n_times = static_cast<int>(times.size());
    p.data.resize(static_cast<std::size_t>(2 * cfg.n_modes) * p.n_times);
    for (int k = 0; k < cfg.n_modes; ++k) {
        const double w = bath_omega(cfg, k);
        double* crow = p.data.data() + static_cast<std::size_t>(2 * k) * p.n_times;
        double* srow = crow + p.n_times;
        for (int j = 0; j < p.n_times; ++j) {
            crow[j] = std::cos(w * times[j]);
            srow[j] = std::sin(w * times[j]);
        }
    }
    return p;
}

// Coefficient rows pairing with the panel: out[2k], out[2k+1] multiply the cos
// and sin rows of mode k.
inline void antiderivative_coeffs(const BathState& st, const BathConfig& cfg, double* out) {
    const double a = bath_coupling(cfg);
    for (int k = 0; k < cfg.n_modes; ++k) {
        out[2 * k] = a * st.q0[k];
        out[2 * k + 1] = a * st.p0[k] / bath_omega(cfg, k);
    }
}

inline void eta_coeffs(const BathState& st, const BathConfig& cfg, double* out) {
    const double a = bath_coupling(cfg);
    for (int k = 0; k < cfg.n_modes; ++k) {
        out[2 * k] = a * st.p0[k];
        out[2 * k + 1] = -a * bath_omega(cfg, k) * st.q0[k];
    }
}

// out[rows x n_times] = coeffs[rows x 2K] * panel. Runs on the calling thread.
inline void phasor_product(const std::vector<double>& coeffs, int rows,
                           const BathConfig& cfg, const PhasorPanel& panel,
                           std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(rows) * panel.n_times);
    openblas_set_num_threads(1);
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, rows, panel.n_times,
                2 * cfg.n_modes, 1.0, coeffs.data(), 2 * cfg.n_modes, panel.data.data(),
                panel.n_times, 0.0, out.data(), panel.n_times);
}

struct BathCorrelation {
    std::vector<double> lags;
    std::vector<double> c_hat;
    std::vector<double> stderr_c;
    std::vector<double> analytic;  // filled only for a single-mode bath
};

// C(0) of the continuum limit: hbar * omega_max / pi.
inline double bath_c0(const BathConfig& cfg) {
    return cfg.hbar * bath_omega(cfg, cfg.n_modes - 1) / kPi;
}

// Monte Carlo two-time average over realizations. Each realization contributes
// the average of eta(t_r + tau) eta(t_r) over n_refs reference times; the
// process is stationary, so references only reduce variance. n_refs = 1 is the
// plain single-reference estimator.
inline BathCorrelation bath_correlation(const BathConfig& cfg, const std::vector<double>& lags) {
    validate(cfg);
    if (lags.empty())
        throw std::invalid_argument("bath_correlation: empty lag list");
    const int L = static_cast<int>(lags.size());
    const int R = cfg.n_refs;
    const int M = cfg.n_realizations;

    // Columns: R reference times, then lag-shifted times grouped by reference.
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(R) * (1 + L));
    for (int r = 0; r < R; ++r)
        times.push_back(r * cfg.ref_spacing);
    for (int r = 0; r < R; ++r)
        for (int l = 0; l < L; ++l)
            times.push_back(r * cfg.ref_spacing + lags[l]);
    const PhasorPanel panel = phasor_panel(cfg, times);

    constexpr int kBlock = 256;
    const int n_blocks = (M + kBlock - 1) / kBlock;
    std::vector<double> samples(static_cast<std::size_t>(M) * L);

    parallel_blocks(n_blocks, [&](std::size_t b) {
        const int m0 = static_cast<int>(b) * kBlock;
        const int rows = std::min(kBlock, M - m0);
        std::vector<double> coeffs(static_cast<std::size_t>(rows) * 2 * cfg.n_modes);
        for (int m = 0; m < rows; ++m) {
            auto rng = make_stream(cfg.seed, static_cast<std::uint64_t>(m0 + m));
            const BathState st = sample_bath(cfg, rng);
            eta_coeffs(st, cfg, coeffs.data() + static_cast<std::size_t>(m) * 2 * cfg.n_modes);
        }
        std::vector<double> eta;
        phasor_product(coeffs, rows, cfg, panel, eta);
        for (int m = 0; m < rows; ++m) {
            const double* row = eta.data() + static_cast<std::size_t>(m) * panel.n_times;
            double* out = samples.data() + static_cast<std::size_t>(m0 + m) * L;
            for (int l = 0; l < L; ++l) {
                double acc = 0.0;
                for (int r = 0; r < R; ++r)
                    acc += row[R + r * L + l] * row[r];
                out[l] = acc / R;
            }
        }
    });

    BathCorrelation out;
    out.lags = lags;
    out.c_hat.resize(L);
    out.stderr_c.resize(L);
    for (int l = 0; l < L; ++l) {
        double mean = 0.0;
        for (int m = 0; m < M; ++m)
            mean += samples[static_cast<std::size_t>(m) * L + l];
        mean /= M;
        double var = 0.0;
        for (int m = 0; m < M; ++m) {
            const double d = samples[static_cast<std::size_t>(m) * L + l] - mean;
            var += d * d;
        }
        var = M > 1 ? var / (M - 1) : 0.0;
        out.c_hat[l] = mean;
        out.stderr_c[l] = std::sqrt(var / M);
    }
    if (cfg.n_modes == 1) {
        out.analytic.resize(L);
        const double a = bath_coupling(cfg);
        for (int l = 0; l < L; ++l)
            out.analytic[l] = cfg.hbar * a * a * std::cos(bath_omega(cfg, 0) * lags[l]);
    }
    return out;
}

}  // namespace cqsim
