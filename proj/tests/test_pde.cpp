#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include <cqsim/cqsim.hpp>

using namespace cqsim;

namespace {

// Max abs error of an evolved pair against a closed-form solution. The pair
// picture multiplies psi-level lattice error by exp(+S1/hbar), and discrete
// eigenmode tails decay slower than continuum ones (relative excess
// ~exp(x^4 dx^2 / 96) for the oscillator), so the pointwise comparison is
// meaningful only on an inner window where dx^2 truncation still dominates.
// The linear case below checks the 4x error drop under grid refinement.
template <typename Fn>
double window_error(const FieldPair1D& p, double lo, double hi, Fn&& exact) {
    double err = 0.0;
    for (int i = 0; i < p.grid.n; ++i) {
        const double x = p.grid.x(i);
        if (x < lo || x > hi)
            continue;
        auto [w1, w2] = exact(x);
        err = std::max(err, std::abs(p.u1[i] - w1));
        err = std::max(err, std::abs(p.u2[i] - w2));
    }
    return err;
}

}  // namespace

TEST_CASE("linear start under the oscillator rotates in closed form", "[pde]") {
    const auto s = oscillator_superpotential(1.0);
    const PhysicalParams params{1.0};
    const double t = 0.5;

    auto run = [&](int n) {
        Grid1D g(-10.0, 10.0, n);
        const auto p0 = restrict_to_line(HolomorphicField({complex(0.0), complex(1.0)}), g);
        const auto pT = evolve_pair(p0, s, params, 1e-3, 500);
        return window_error(pT, -3.0, 3.0, [&](double x) {
            return std::pair<double, double>{x * std::cos(t), -x * std::sin(t)};
        });
    };
    const double coarse = run(401);  // dx = 0.05
    const double fine = run(801);    // dx = 0.025
    REQUIRE(coarse < 4e-3);
    REQUIRE(fine < 1e-3);
    REQUIRE(coarse / fine > 3.3);
    REQUIRE(coarse / fine < 4.7);
}

TEST_CASE("quadratic start under the oscillator picks up the diffusive offset", "[pde]") {
    const auto s = oscillator_superpotential(1.0);
    const PhysicalParams params{1.0};
    Grid1D g(-10.0, 10.0, 801);
    const auto p0 =
        restrict_to_line(HolomorphicField({complex(0.0), complex(0.0), complex(1.0)}), g);

    // At t = 0.5: u = a x^2 + b + i (c x^2 + d) with a = cos 2t, c = -sin 2t,
    // and the offsets fed by the noise term b = (1 - cos 2t)/2, d = (sin 2t)/2.
    const auto pT = evolve_pair(p0, s, params, 1e-3, 500);
    const double a = 0.5403023058681398, b = 0.2298488470659301;
    const double c = -0.8414709848078965, d = 0.42073549240394825;
    const double err = window_error(pT, -3.0, 3.0, [&](double x) {
        return std::pair<double, double>{a * x * x + b, c * x * x + d};
    });
    REQUIRE(err < 3e-3);
}

TEST_CASE("quarter-period evolution maps x to -i x", "[pde]") {
    const auto s = oscillator_superpotential(1.0);
    const PhysicalParams params{1.0};
    Grid1D g(-10.0, 10.0, 801);
    const auto p0 = restrict_to_line(HolomorphicField({complex(0.0), complex(1.0)}), g);

    const int n_steps = 15708;
    const double dt = (kPi / 2.0) / n_steps;
    const auto pT = evolve_pair(p0, s, params, dt, n_steps);
    const double err = window_error(pT, -3.0, 3.0, [&](double x) {
        return std::pair<double, double>{0.0, -x};
    });
    REQUIRE(err < 6e-3);
}

TEST_CASE("output cadence does not change the answer", "[pde]") {
    // dt is a reporting interval; the integrator subdivides to its stability
    // bound either way, so one big step agrees with many small ones.
    const auto s = oscillator_superpotential(1.0);
    const PhysicalParams params{1.0};
    Grid1D g(-8.0, 8.0, 161);
    const auto p0 = restrict_to_line(HolomorphicField({complex(0.0), complex(1.0)}), g);

    const auto big = evolve_pair(p0, s, params, 0.5, 1);
    const auto small = evolve_pair(p0, s, params, 0.005, 100);
    double diff = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (x < -6.0 || x > 6.0)
            continue;
        diff = std::max(diff, std::abs(big.u1[i] - small.u1[i]));
        diff = std::max(diff, std::abs(big.u2[i] - small.u2[i]));
    }
    REQUIRE(diff < 1e-6);
}

TEST_CASE("the weighted norm is conserved by the pair evolution", "[pde]") {
    const auto s = oscillator_superpotential(1.0);
    const PhysicalParams params{1.0};
    Grid1D g(-8.0, 8.0, 401);
    const auto p0 =
        restrict_to_line(HolomorphicField({complex(1.0), complex(0.0), complex(0.5)}), g);
    const double n0 = pair_weighted_norm(p0, s, params);
    const auto pT = evolve_pair(p0, s, params, 0.3, 1);
    const double n1 = pair_weighted_norm(pT, s, params);
    REQUIRE(std::abs(n1 - n0) / n0 < 1e-8);
}

TEST_CASE("wide domains overflow the weight and are rejected", "[pde]") {
    const Superpotential s({0.0, 0.0, 0.5, 0.0, 0.05});
    Grid1D g(-50.0, 50.0, 2001);
    const auto p0 = restrict_to_line(HolomorphicField({complex(1.0)}), g);
    REQUIRE_THROWS_AS(evolve_pair(p0, s, PhysicalParams{1.0}, 1e-3, 1), std::invalid_argument);
}

TEST_CASE("pair evolution rejects bad inputs", "[pde]") {
    const auto s = oscillator_superpotential(1.0);
    Grid1D g(-2.0, 2.0, 33);
    auto p0 = restrict_to_line(HolomorphicField({complex(1.0)}), g);
    REQUIRE_THROWS_AS(evolve_pair(p0, s, PhysicalParams{0.0}, 1e-3, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(evolve_pair(p0, s, PhysicalParams{1.0}, 0.0, 1), std::invalid_argument);
    p0.u2.pop_back();
    REQUIRE_THROWS_AS(evolve_pair(p0, s, PhysicalParams{1.0}, 1e-3, 1), std::invalid_argument);
}

TEST_CASE("both integration routes agree on the wavefunction", "[pde]") {
    const Superpotential s({0.0, 0.0, 0.5, 0.0, 0.05});
    const PhysicalParams params{1.0};
    Grid1D g(-10.0, 10.0, 401);
    const auto p0 = restrict_to_line(HolomorphicField({complex(1.0), complex(1.0)}), g);

    const double dt = 1e-3;
    const int steps = 500;
    const auto pT = evolve_pair(p0, s, params, dt, steps);
    const auto psi_a = assemble_psi(pT, s, params);

    const auto psi0 = assemble_psi(p0, s, params);
    const auto v = riccati_potential(s, params.hbar, g);
    const auto psi_b = schrodinger_evolve(psi0, v, params, dt, steps);

    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (x < -8.0 || x > 8.0)
            continue;
        num += std::norm(psi_a.psi[i] - psi_b.psi[i]);
        den += std::norm(psi_b.psi[i]);
    }
    REQUIRE(std::sqrt(num / den) < 1e-5);
}

TEST_CASE("the Cayley stepper preserves the discrete norm", "[pde]") {
    const auto s = oscillator_superpotential(1.0);
    const PhysicalParams params{1.0};
    Grid1D g(-8.0, 8.0, 801);
    const auto v = riccati_potential(s, params.hbar, g);
    auto phi = hermite_state(0, 1.0, params, g);
    const double n0 = std::abs(inner_product(phi, phi));
    const auto phiT = schrodinger_evolve(phi, v, params, 1e-3, 500);
    const double n1 = std::abs(inner_product(phiT, phiT));
    REQUIRE(std::abs(n1 - n0) / n0 < 1e-11);
}

TEST_CASE("the weight function is a stationary state of the wave equation", "[pde]") {
    const auto s = oscillator_superpotential(1.0);
    const PhysicalParams params{1.0};
    Grid1D g(-6.0, 6.0, 1201);
    Wavefunction1D psi0;
    psi0.grid = g;
    psi0.psi.resize(g.n);
    for (int i = 0; i < g.n; ++i)
        psi0.psi[i] = std::exp(-s.s1(g.x(i)));
    const auto v = riccati_potential(s, params.hbar, g);
    const auto psiT = schrodinger_evolve(psi0, v, params, 1e-3, 500);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.n; ++i) {
        num += std::norm(psiT.psi[i] - psi0.psi[i]);
        den += std::norm(psi0.psi[i]);
    }
    REQUIRE(std::sqrt(num / den) < 2e-5);
}

TEST_CASE("excited states acquire the right phase", "[pde]") {
    const auto s = oscillator_superpotential(1.0);
    const PhysicalParams params{1.0};
    Grid1D g(-8.0, 8.0, 801);
    const auto v = riccati_potential(s, params.hbar, g);
    const auto phi1 = hermite_state(1, 1.0, params, g);
    const auto phi1T = schrodinger_evolve(phi1, v, params, 1e-3, 500);
    // The companion potential floors the spectrum at zero, so E_1 = 1 and the
    // overlap phase after T = 0.5 is exp(-i 0.5).
    const complex overlap = inner_product(phi1, phi1T);
    REQUIRE(std::abs(overlap) > 0.999);
    REQUIRE(std::abs(std::arg(overlap * std::polar(1.0, 0.5))) < 1e-3);
}

TEST_CASE("the Cayley stepper rejects mismatched grids", "[pde]") {
    const auto s = oscillator_superpotential(1.0);
    const PhysicalParams params{1.0};
    Grid1D g(-4.0, 4.0, 101), g2(-5.0, 5.0, 101);
    const auto v = riccati_potential(s, params.hbar, g2);
    auto phi = hermite_state(0, 1.0, params, g);
    REQUIRE_THROWS_AS(schrodinger_evolve(phi, v, params, 1e-3, 1), std::invalid_argument);
}

TEST_CASE("the generator matches its closed form on quadratics", "[pde]") {
    const auto s = oscillator_superpotential(2.5);
    const PhysicalParams params{0.3};
    const auto z2 = HolomorphicField({complex(0.0), complex(0.0), complex(1.0)});
    Grid2 g(-2.0, 2.0, 41, -2.0, 2.0, 41);
    const auto hu = apply_generator_2d(sample_field(z2, g), s, params);
    double err = 0.0;
    for (int i = 1; i + 1 < g.n1; ++i)
        for (int j = 1; j + 1 < g.n2; ++j) {
            const Point2 p = g.point(i, j);
            const double want1 = 4.0 * 2.5 * p.x1 * p.x2;
            const double want2 = 2.0 * 2.5 * (p.x2 * p.x2 - p.x1 * p.x1) + params.hbar;
            err = std::max(err, std::abs(hu.u1[g.index(i, j)] - want1));
            err = std::max(err, std::abs(hu.u2[g.index(i, j)] - want2));
        }
    REQUIRE(err < 1e-9);
}

TEST_CASE("the generator stencil converges at second order on a cubic", "[pde]") {
    // Closed form for polynomial fields: H u = -i S' u' + i (hbar/2) u''.
    const Superpotential s({0.0, 0.0, 0.5, 0.0, 0.05});
    const PhysicalParams params{1.0};
    const auto z3 = HolomorphicField({complex(0.0), complex(0.0), complex(0.0), complex(1.0)});

    auto interior_err = [&](int n) {
        Grid2 g(-2.0, 2.0, n, -2.0, 2.0, n);
        const auto hu = apply_generator_2d(sample_field(z3, g), s, params);
        double err = 0.0;
        for (int i = 1; i + 1 < g.n1; ++i)
            for (int j = 1; j + 1 < g.n2; ++j) {
                const Point2 p = g.point(i, j);
                const complex z(p.x1, p.x2);
                const complex want = -complex(0, 1) * s.derivative(z) * (3.0 * z * z) +
                                     complex(0, 0.5 * params.hbar) * (6.0 * z);
                err = std::max(err, std::abs(hu.u1[g.index(i, j)] - want.real()));
                err = std::max(err, std::abs(hu.u2[g.index(i, j)] - want.imag()));
            }
        return err;
    };
    const double coarse = interior_err(41), fine = interior_err(81);
    REQUIRE(coarse > 1e-8);
    const double ratio = coarse / fine;
    REQUIRE(ratio > 3.4);
    REQUIRE(ratio < 4.6);
}

TEST_CASE("generator stepping freezes the boundary ring", "[pde]") {
    const Superpotential s({0.0, 0.0, 0.5, 0.0, 0.05});
    const auto z2 = HolomorphicField({complex(0.0), complex(0.0), complex(1.0)});
    Grid2 g(-1.0, 1.0, 33, -1.0, 1.0, 33);
    const auto f = sample_field(z2, g);
    const auto fT = evolve_generator_2d(f, s, PhysicalParams{1.0}, 1e-3, 10);

    double edge = 0.0, inner = 0.0;
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) {
            const double d = std::abs(fT.u1[g.index(i, j)] - f.u1[g.index(i, j)]) +
                             std::abs(fT.u2[g.index(i, j)] - f.u2[g.index(i, j)]);
            if (i == 0 || j == 0 || i + 1 == g.n1 || j + 1 == g.n2)
                edge = std::max(edge, d);
            else
                inner = std::max(inner, d);
        }
    REQUIRE(edge == 0.0);
    REQUIRE(inner > 1e-4);
}

TEST_CASE("2d helpers demand matching grid spacings", "[pde]") {
    const auto s = oscillator_superpotential(1.0);
    const auto z = HolomorphicField({complex(0.0), complex(1.0)});
    Grid2 g(-1.0, 1.0, 21, -2.0, 2.0, 21);  // dx2 = 2 dx1
    const auto f = sample_field(z, g);
    REQUIRE_THROWS_AS(apply_generator_2d(f, s, PhysicalParams{1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(evolve_generator_2d(f, s, PhysicalParams{1.0}, 1e-3, 1),
                      std::invalid_argument);
}
