#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <cqsim/field.hpp>
#include <cqsim/pde.hpp>
#include <cqsim/superpotential.hpp>

namespace cqsim {

// psi = exp(-S1/hbar) (u1 + i u2) on the line.
inline Wavefunction1D assemble_psi(const FieldPair1D& pair, const Superpotential& s,
                                   const PhysicalParams& params) {
    if (!(params.hbar > 0.0))
        throw std::invalid_argument("assemble_psi: hbar must be positive");
    if (pair.u1.size() != static_cast<std::size_t>(pair.grid.n) ||
        pair.u2.size() != pair.u1.size())
        throw std::invalid_argument("assemble_psi: component sizes do not match the grid");
    Wavefunction1D out;
    out.grid = pair.grid;
    out.psi.resize(pair.grid.n);
    for (int i = 0; i < pair.grid.n; ++i) {
        const double s1 = s.s1(pair.grid.x(i));
        if (-s1 / params.hbar > 690.0)
            throw std::invalid_argument("assemble_psi: exp(-S1/hbar) overflows at x = " +
                                        std::to_string(pair.grid.x(i)));
        out.psi[i] = std::exp(-s1 / params.hbar) * complex(pair.u1[i], pair.u2[i]);
    }
    return out;
}

// Trapezoid <a|b> = integral conj(a) b dx.
inline complex inner_product(const Wavefunction1D& a, const Wavefunction1D& b) {
    if (a.grid.n != b.grid.n || std::abs(a.grid.x_min - b.grid.x_min) > 1e-12 ||
        std::abs(a.grid.x_max - b.grid.x_max) > 1e-12)
        throw std::invalid_argument("inner_product: grids do not match");
    const double dx = a.grid.dx();
    complex acc = 0.0;
    for (int i = 0; i < a.grid.n; ++i) {
        const double w = (i == 0 || i == a.grid.n - 1) ? 0.5 : 1.0;
        acc += w * std::conj(a.psi[i]) * b.psi[i];
    }
    return acc * dx;
}

// Normalized oscillator eigenstate phi_n sampled on the grid, built with the
// stable normalized recurrence phi_{n+1} = xi sqrt(2/(n+1)) phi_n
// - sqrt(n/(n+1)) phi_{n-1}.
inline Wavefunction1D hermite_state(int n, double omega, const PhysicalParams& params,
                                    const Grid1D& grid) {
    if (n < 0 || n > 10)
        throw std::invalid_argument("hermite_state: n must be in 0..10");
    if (!(omega > 0.0) || !(params.hbar > 0.0))
        throw std::invalid_argument("hermite_state: omega and hbar must be positive");
    Wavefunction1D out;
    out.grid = grid;
    out.psi.resize(grid.n);
    const double scale = std::sqrt(omega / params.hbar);
    const double norm0 = std::pow(omega / (kPi * params.hbar), 0.25);
    for (int i = 0; i < grid.n; ++i) {
        const double xi = grid.x(i) * scale;
        double prev = 0.0, cur = norm0 * std::exp(-0.5 * xi * xi);
        for (int m = 0; m < n; ++m) {
            const double next =
                xi * std::sqrt(2.0 / (m + 1)) * cur - std::sqrt(double(m) / (m + 1)) * prev;
            prev = cur;
            cur = next;
        }
        out.psi[i] = cur;
    }
    return out;
}

struct SpectrumPeak {
    double energy = 0.0;
    double weight = 0.0;
};

struct SpectrumResult {
    std::vector<SpectrumPeak> peaks;  // sorted by energy
    double resolution = 0.0;          // 2 pi hbar / T
};

namespace detail {

inline complex windowed_transform(const std::vector<complex>& c, const std::vector<double>& w,
                                  double wsum, double dt, double hbar, double energy) {
    // Phase rotor e^{i E t_j / hbar} advanced multiplicatively.
    const double th = energy * dt / hbar;
    const complex stepper(std::cos(th), std::sin(th));
    complex rot(1.0, 0.0), acc(0.0, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
        acc += w[j] * c[j] * rot;
        rot *= stepper;
    }
    return acc / wsum;
}

}  // namespace detail

// Peak extraction from a sampled correlation record: Hann window, dense scan
// at resolution/8, parabolic refinement of local maxima above the threshold.
// The scan starts below zero so a peak at E = 0 is an interior maximum.
inline SpectrumResult energy_spectrum(const std::vector<complex>& c, double dt_sample,
                                      const PhysicalParams& params, double threshold = 0.05) {
    if (!(dt_sample > 0.0))
        throw std::invalid_argument("energy_spectrum: dt_sample must be positive");
    if (!(params.hbar > 0.0))
        throw std::invalid_argument("energy_spectrum: hbar must be positive");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("energy_spectrum: threshold must lie in (0, 1)");
    const int n = static_cast<int>(c.size());
    if (n < 16)
        throw std::invalid_argument("energy_spectrum: record too short, need at least 16 samples, got " +
                                    std::to_string(n));

    const double hbar = params.hbar;
    const double t_total = (n - 1) * dt_sample;
    const double res = 2.0 * kPi * hbar / t_total;

    std::vector<double> w(n);
    double wsum = 0.0;
    for (int j = 0; j < n; ++j) {
        w[j] = 0.5 * (1.0 - std::cos(2.0 * kPi * j / (n - 1)));
        wsum += w[j];
    }

    const double e_min = -2.0 * res;
    const double e_max = kPi * hbar / dt_sample;
    const double de = res / 8.0;
    const int ne = static_cast<int>((e_max - e_min) / de) + 1;

    std::vector<double> mag(ne);
    for (int m = 0; m < ne; ++m)
        mag[m] = std::abs(detail::windowed_transform(c, w, wsum, dt_sample, hbar, e_min + m * de));

    double peak_mag = 0.0;
    for (double v : mag)
        peak_mag = std::max(peak_mag, v);
    const double norm = std::abs(c[0]);
    if (!(norm > 0.0))
        throw std::invalid_argument("energy_spectrum: record starts at zero amplitude");

    SpectrumResult out;
    out.resolution = res;
    for (int m = 1; m + 1 < ne; ++m) {
        if (mag[m] < mag[m - 1] || mag[m] < mag[m + 1])
            continue;
        if (mag[m] <= threshold * peak_mag)
            continue;
        const double denom = mag[m - 1] - 2.0 * mag[m] + mag[m + 1];
        const double shift = denom != 0.0 ? 0.5 * (mag[m - 1] - mag[m + 1]) / denom : 0.0;
        const double e_pk = e_min + (m + shift) * de;
        const double a_pk =
            std::abs(detail::windowed_transform(c, w, wsum, dt_sample, hbar, e_pk));
        out.peaks.push_back({e_pk, a_pk / norm});
        // Skip the immediate neighbor of a flat-topped maximum.
        if (m + 1 < ne && mag[m + 1] == mag[m])
            ++m;
    }
    return out;
}

}  // namespace cqsim
