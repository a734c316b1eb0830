#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <cqsim/field.hpp>
#include <cqsim/sde.hpp>
#include <cqsim/superpotential.hpp>

namespace cqsim {

struct Wavefunction1D {
    Grid1D grid;
    std::vector<complex> psi;
};

namespace detail {

// The pair system in the weighted variable phi = exp(-S1/hbar) (u1 + i u2) is
// the Schrodinger form i hbar dphi/dt = -(hbar^2/2) phi'' + V phi with the
// companion potential. The raw pair variables support transient growth of
// size exp(max S1/hbar) that overflows doubles on wide quartic domains, so the
// integration runs in phi and converts back on exit; the two forms are related
// by an exact change of variables, not an approximation.
struct PairWorkspace {
    int n = 0;
    double dx = 0.0;
    double hbar = 0.0;
    std::vector<double> gauge;  // exp(-S1/hbar)
    std::vector<double> v;      // companion potential
    double dt_stab = 0.0;
};

inline PairWorkspace make_pair_workspace(const Grid1D& grid, const Superpotential& s,
                                         const PhysicalParams& params) {
    if (!(params.hbar > 0.0))
        throw std::invalid_argument("evolve_pair: hbar must be positive");
    PairWorkspace w;
    w.n = grid.n;
    w.dx = grid.dx();
    w.hbar = params.hbar;
    w.gauge.resize(w.n);
    w.v.resize(w.n);
    double max_s1 = 0.0, max_sp = 0.0, max_v = 0.0;
    for (int i = 0; i < w.n; ++i) {
        const double x = grid.x(i);
        const double s1 = s.s1(x);
        const double sp = s.s1_prime(x);
        w.gauge[i] = std::exp(-s1 / w.hbar);
        w.v[i] = 0.5 * sp * sp - 0.5 * w.hbar * s.s1_second(x);
        max_s1 = std::max(max_s1, std::abs(s1));
        max_sp = std::max(max_sp, std::abs(sp));
        max_v = std::max(max_v, std::abs(w.v[i]));
    }
    if (max_s1 / w.hbar > 690.0)
        throw std::invalid_argument(
            "evolve_pair: max |S1|/hbar = " + std::to_string(max_s1 / w.hbar) +
            " exceeds the exp() range of doubles; shrink the domain or the padding");
    double dt_stab = 0.4 * w.dx * w.dx / w.hbar;
    if (max_sp > 0.0)
        dt_stab = std::min(dt_stab, 0.4 * w.dx / max_sp);
    if (max_v > 0.0)
        dt_stab = std::min(dt_stab, 1.5 * w.hbar / max_v);
    w.dt_stab = dt_stab;
    return w;
}

inline void pair_rhs(const PairWorkspace& w, const std::vector<complex>& phi,
                     std::vector<complex>& out) {
    const double inv_dx2 = 1.0 / (w.dx * w.dx);
    const complex ih_half(0.0, 0.5 * w.hbar);
    const double inv_h = 1.0 / w.hbar;
    out[0] = 0.0;
    out[w.n - 1] = 0.0;
    for (int i = 1; i + 1 < w.n; ++i) {
        const complex lap = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) * inv_dx2;
        out[i] = ih_half * lap - complex(0.0, inv_h * w.v[i]) * phi[i];
    }
}

inline void rk4_step(const PairWorkspace& w, std::vector<complex>& phi, double h,
                     std::vector<complex>& k1, std::vector<complex>& k2,
                     std::vector<complex>& k3, std::vector<complex>& k4,
                     std::vector<complex>& tmp) {
    const int n = w.n;
    pair_rhs(w, phi, k1);
    for (int i = 0; i < n; ++i)
        tmp[i] = phi[i] + 0.5 * h * k1[i];
    pair_rhs(w, tmp, k2);
    for (int i = 0; i < n; ++i)
        tmp[i] = phi[i] + 0.5 * h * k2[i];
    pair_rhs(w, tmp, k3);
    for (int i = 0; i < n; ++i)
        tmp[i] = phi[i] + h * k3[i];
    pair_rhs(w, tmp, k4);
    const double h6 = h / 6.0;
    for (int i = 0; i < n; ++i)
        phi[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace detail

// Advances the coupled pair equations by n_steps outputs of size dt. dt may
// exceed the explicit stability bound 0.4 min(dx/max|S1'|, dx^2/hbar); the
// integrator then subdivides each output step and the bound is enforced on the
// substep.
inline FieldPair1D evolve_pair(const FieldPair1D& pair, const Superpotential& s,
                               const PhysicalParams& params, double dt, int n_steps) {
    if (!(dt > 0.0) || n_steps < 0)
        throw std::invalid_argument("evolve_pair: need dt > 0 and n_steps >= 0");
    if (pair.u1.size() != static_cast<std::size_t>(pair.grid.n) ||
        pair.u2.size() != pair.u1.size())
        throw std::invalid_argument("evolve_pair: component sizes do not match the grid");
    auto w = detail::make_pair_workspace(pair.grid, s, params);

    std::vector<complex> phi(w.n);
    for (int i = 0; i < w.n; ++i)
        phi[i] = w.gauge[i] * complex(pair.u1[i], pair.u2[i]);

    const int nsub = std::max(1, static_cast<int>(std::ceil(dt / w.dt_stab)));
    const double h = dt / nsub;
    std::vector<complex> k1(w.n), k2(w.n), k3(w.n), k4(w.n), tmp(w.n);

    for (int j = 0; j < n_steps; ++j) {
        for (int m = 0; m < nsub; ++m)
            detail::rk4_step(w, phi, h, k1, k2, k3, k4, tmp);
        double peak = 0.0;
        for (int i = 0; i < w.n; ++i)
            peak = std::max(peak, std::abs(phi[i].real()) + std::abs(phi[i].imag()));
        if (!std::isfinite(peak))
            throw std::runtime_error("evolve_pair: non-finite values after step " +
                                     std::to_string(j + 1) + " (t = " +
                                     std::to_string((j + 1) * dt) + ")");
    }

    FieldPair1D out;
    out.grid = pair.grid;
    out.u1.resize(w.n);
    out.u2.resize(w.n);
    for (int i = 0; i < w.n; ++i) {
        const complex uw = phi[i] / w.gauge[i];
        out.u1[i] = uw.real();
        out.u2[i] = uw.imag();
    }
    return out;
}

// Weighted norm integral conserved by the pair evolution.
inline double pair_weighted_norm(const FieldPair1D& pair, const Superpotential& s,
                                 const PhysicalParams& params) {
    const double dx = pair.grid.dx();
    double acc = 0.0;
    for (int i = 0; i < pair.grid.n; ++i) {
        // Fold one gauge factor into the pair before squaring: far out, the
        // raw weight underflows while |u|^2 can overflow, and 0 * inf = NaN.
        const double half = std::exp(-s.s1(pair.grid.x(i)) / params.hbar);
        const double a = half * pair.u1[i], b = half * pair.u2[i];
        acc += (a * a + b * b) * dx * ((i == 0 || i == pair.grid.n - 1) ? 0.5 : 1.0);
    }
    return acc;
}

// Crank-Nicolson propagator in Cayley form with Dirichlet ends. The implicit
// tridiagonal factorization is precomputed once; each step is one solve.
inline Wavefunction1D schrodinger_evolve(const Wavefunction1D& w, const PotentialSamples& v,
                                         const PhysicalParams& params, double dt, int n_steps) {
    if (!(params.hbar > 0.0))
        throw std::invalid_argument("schrodinger_evolve: hbar must be positive");
    if (!(dt > 0.0) || n_steps < 0)
        throw std::invalid_argument("schrodinger_evolve: need dt > 0 and n_steps >= 0");
    const Grid1D& grid = w.grid;
    if (w.psi.size() != static_cast<std::size_t>(grid.n))
        throw std::invalid_argument("schrodinger_evolve: psi size does not match the grid");
    if (v.v.size() != static_cast<std::size_t>(v.grid.n) || v.grid.n != grid.n ||
        std::abs(v.grid.x_min - grid.x_min) > 1e-12 || std::abs(v.grid.x_max - grid.x_max) > 1e-12)
        throw std::invalid_argument("schrodinger_evolve: potential grid does not match psi grid");

    const int n = grid.n, m = n - 2;
    const double dx = grid.dx(), hbar = params.hbar;
    const complex a(0.0, dt / (2.0 * hbar));
    const double off = -hbar * hbar / (2.0 * dx * dx);
    const complex beta = a * off;

    // Thomas factorization of A = 1 + aH over the interior points.
    std::vector<complex> alpha(m), denom(m), cp(m);
    for (int i = 0; i < m; ++i)
        alpha[i] = 1.0 + a * (hbar * hbar / (dx * dx) + v.v[i + 1]);
    denom[0] = alpha[0];
    cp[0] = beta / denom[0];
    for (int i = 1; i < m; ++i) {
        denom[i] = alpha[i] - beta * cp[i - 1];
        cp[i] = beta / denom[i];
    }

    std::vector<complex> psi(w.psi);
    psi[0] = 0.0;
    psi[n - 1] = 0.0;
    std::vector<complex> rhs(m), sol(m);
    for (int stp = 0; stp < n_steps; ++stp) {
        for (int i = 0; i < m; ++i) {
            const complex left = (i > 0) ? psi[i] : complex(0.0);
            const complex right = (i + 2 < n) ? psi[i + 2] : complex(0.0);
            rhs[i] = (2.0 - alpha[i]) * psi[i + 1] - beta * (left + right);
        }
        sol[0] = rhs[0] / denom[0];
        for (int i = 1; i < m; ++i)
            sol[i] = (rhs[i] - beta * sol[i - 1]) / denom[i];
        for (int i = m - 2; i >= 0; --i)
            sol[i] -= cp[i] * sol[i + 1];
        for (int i = 0; i < m; ++i)
            psi[i + 1] = sol[i];
    }

    Wavefunction1D out;
    out.grid = grid;
    out.psi = std::move(psi);
    return out;
}

namespace detail {

// Directional second difference along (1,1): exact for the diagonal diffusion
// term on quadratics when dx1 = dx2.
inline void require_square_spacing(const Grid2& g) {
    if (std::abs(g.dx1() - g.dx2()) > 1e-12 * std::max(g.dx1(), g.dx2()))
        throw std::invalid_argument("generator: grid spacings must match on both axes");
}

struct DriftTable {
    std::vector<double> b1, b2;
    double max_speed = 0.0;
};

inline DriftTable drift_table(const Grid2& grid, const Superpotential& s) {
    DriftTable t;
    t.b1.resize(grid.size());
    t.b2.resize(grid.size());
    for (int i = 0; i < grid.n1; ++i)
        for (int j = 0; j < grid.n2; ++j) {
            auto [b1, b2] = drift_field(s, grid.point(i, j));
            const std::size_t id = grid.index(i, j);
            t.b1[id] = b1;
            t.b2[id] = b2;
            t.max_speed = std::max(t.max_speed, std::hypot(b1, b2));
        }
    return t;
}

// Interior generator stencil applied to one component.
inline void generator_interior(const Grid2& g, const std::vector<double>& u,
                               const DriftTable& t, double hbar, std::vector<double>& out) {
    const double dx = g.dx1();
    const double inv2 = 1.0 / (2.0 * dx), invd = 1.0 / (2.0 * dx * dx);
    for (int i = 1; i + 1 < g.n1; ++i)
        for (int j = 1; j + 1 < g.n2; ++j) {
            const std::size_t id = g.index(i, j);
            const double d1 = (u[g.index(i + 1, j)] - u[g.index(i - 1, j)]) * inv2;
            const double d2 = (u[g.index(i, j + 1)] - u[g.index(i, j - 1)]) * inv2;
            const double diag =
                (u[g.index(i + 1, j + 1)] - 2.0 * u[id] + u[g.index(i - 1, j - 1)]) * invd;
            out[id] = t.b1[id] * d1 + t.b2[id] * d2 + 0.5 * hbar * diag;
        }
}

}  // namespace detail

// Generator applied to both components of a sampled field. Interior points use
// centered stencils; edge values fall back to one-sided differences and should
// not enter quantitative comparisons.
inline GridField2 apply_generator_2d(const GridField2& g, const Superpotential& s,
                                     const PhysicalParams& params) {
    const Grid2& grid = g.grid;
    detail::require_square_spacing(grid);
    if (g.u1.size() != grid.size() || g.u2.size() != grid.size())
        throw std::invalid_argument("apply_generator_2d: component sizes do not match the grid");
    const auto table = detail::drift_table(grid, s);
    const double dx = grid.dx1(), hbar = params.hbar;

    GridField2 out;
    out.grid = grid;
    out.u1.assign(grid.size(), 0.0);
    out.u2.assign(grid.size(), 0.0);

    const std::vector<double>* in[2] = {&g.u1, &g.u2};
    std::vector<double>* res[2] = {&out.u1, &out.u2};
    std::vector<double> dcol(grid.size());
    for (int c = 0; c < 2; ++c) {
        const auto& u = *in[c];
        auto& r = *res[c];
        detail::generator_interior(grid, u, table, hbar, r);

        // One-sided derivative helpers for the boundary ring.
        auto d_axis1 = [&](int i, int j) {
            if (i == 0)
                return (-3.0 * u[grid.index(0, j)] + 4.0 * u[grid.index(1, j)] -
                        u[grid.index(2, j)]) / (2.0 * dx);
            if (i == grid.n1 - 1)
                return (3.0 * u[grid.index(i, j)] - 4.0 * u[grid.index(i - 1, j)] +
                        u[grid.index(i - 2, j)]) / (2.0 * dx);
            return (u[grid.index(i + 1, j)] - u[grid.index(i - 1, j)]) / (2.0 * dx);
        };
        auto d_axis2 = [&](int i, int j) {
            if (j == 0)
                return (-3.0 * u[grid.index(i, 0)] + 4.0 * u[grid.index(i, 1)] -
                        u[grid.index(i, 2)]) / (2.0 * dx);
            if (j == grid.n2 - 1)
                return (3.0 * u[grid.index(i, j)] - 4.0 * u[grid.index(i, j - 1)] +
                        u[grid.index(i, j - 2)]) / (2.0 * dx);
            return (u[grid.index(i, j + 1)] - u[grid.index(i, j - 1)]) / (2.0 * dx);
        };
        auto d2_axis1 = [&](int i, int j) {
            const int ii = std::clamp(i, 1, grid.n1 - 2);
            return (u[grid.index(ii + 1, j)] - 2.0 * u[grid.index(ii, j)] +
                    u[grid.index(ii - 1, j)]) / (dx * dx);
        };
        auto d2_axis2 = [&](int i, int j) {
            const int jj = std::clamp(j, 1, grid.n2 - 2);
            return (u[grid.index(i, jj + 1)] - 2.0 * u[grid.index(i, jj)] +
                    u[grid.index(i, jj - 1)]) / (dx * dx);
        };
        for (int i = 0; i < grid.n1; ++i)
            for (int j = 0; j < grid.n2; ++j)
                dcol[grid.index(i, j)] = d_axis2(i, j);
        auto d12 = [&](int i, int j) {
            if (i == 0)
                return (-3.0 * dcol[grid.index(0, j)] + 4.0 * dcol[grid.index(1, j)] -
                        dcol[grid.index(2, j)]) / (2.0 * dx);
            if (i == grid.n1 - 1)
                return (3.0 * dcol[grid.index(i, j)] - 4.0 * dcol[grid.index(i - 1, j)] +
                        dcol[grid.index(i - 2, j)]) / (2.0 * dx);
            return (dcol[grid.index(i + 1, j)] - dcol[grid.index(i - 1, j)]) / (2.0 * dx);
        };
        for (int i = 0; i < grid.n1; ++i)
            for (int j = 0; j < grid.n2; ++j) {
                if (i > 0 && i + 1 < grid.n1 && j > 0 && j + 1 < grid.n2)
                    continue;
                const std::size_t id = grid.index(i, j);
                const double diag = 0.5 * (d2_axis1(i, j) + d2_axis2(i, j)) + d12(i, j);
                r[id] = table.b1[id] * d_axis1(i, j) + table.b2[id] * d_axis2(i, j) +
                        0.5 * hbar * diag;
            }
    }
    return out;
}

// Time-steps both components under the generator with RK4. The boundary ring
// is held fixed: one-sided edge closures are unstable once |drift| dx exceeds
// hbar, while the frozen ring keeps the interior scheme stable and only
// contaminates a thin layer that stays out of the interior window over the
// horizons used here.
inline GridField2 evolve_generator_2d(const GridField2& g, const Superpotential& s,
                                      const PhysicalParams& params, double dt, int n_steps) {
    const Grid2& grid = g.grid;
    detail::require_square_spacing(grid);
    if (!(dt > 0.0) || n_steps < 0)
        throw std::invalid_argument("evolve_generator_2d: need dt > 0 and n_steps >= 0");
    const auto table = detail::drift_table(grid, s);
    const double dx = grid.dx1(), hbar = params.hbar;

    double dt_stab = table.max_speed > 0.0 ? 0.4 * dx / table.max_speed : dt;
    if (hbar > 0.0)
        dt_stab = std::min(dt_stab, 0.4 * dx * dx / hbar);
    const int nsub = std::max(1, static_cast<int>(std::ceil(dt / dt_stab)));
    const double h = dt / nsub;

    GridField2 cur = g;
    const std::size_t sz = grid.size();
    std::vector<double> k1(sz), k2(sz), k3(sz), k4(sz), tmp(sz);
    auto rhs = [&](const std::vector<double>& u, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        detail::generator_interior(grid, u, table, hbar, out);
    };
    auto rk4 = [&](std::vector<double>& u) {
        rhs(u, k1);
        for (std::size_t i = 0; i < sz; ++i)
            tmp[i] = u[i] + 0.5 * h * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < sz; ++i)
            tmp[i] = u[i] + 0.5 * h * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < sz; ++i)
            tmp[i] = u[i] + h * k3[i];
        rhs(tmp, k4);
        const double h6 = h / 6.0;
        for (std::size_t i = 0; i < sz; ++i)
            u[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    };

    for (int j = 0; j < n_steps; ++j) {
        for (int m = 0; m < nsub; ++m) {
            rk4(cur.u1);
            rk4(cur.u2);
        }
        double peak = 0.0;
        for (std::size_t i = 0; i < sz; ++i)
            peak = std::max(peak, std::abs(cur.u1[i]) + std::abs(cur.u2[i]));
        if (!std::isfinite(peak))
            throw std::runtime_error("evolve_generator_2d: non-finite values after step " +
                                     std::to_string(j + 1));
    }
    return cur;
}

}  // namespace cqsim
