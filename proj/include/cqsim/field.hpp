#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cqsim {

using complex = std::complex<double>;

struct Point2 {
    double x1 = 0.0;
    double x2 = 0.0;
};

struct Grid1D {
    double x_min = 0.0;
    double x_max = 0.0;
    int n = 0;

    Grid1D() = default;
    Grid1D(double x_min_, double x_max_, int n_) : x_min(x_min_), x_max(x_max_), n(n_) {
        if (!(x_max > x_min))
            throw std::invalid_argument("Grid1D: x_max must exceed x_min");
        if (n < 8)
            throw std::invalid_argument("Grid1D: need at least 8 points, got " + std::to_string(n));
    }

    double dx() const { return (x_max - x_min) / (n - 1); }
    double x(int i) const { return x_min + i * dx(); }
};

struct Grid2 {
    double x1_min = 0.0, x1_max = 0.0;
    double x2_min = 0.0, x2_max = 0.0;
    int n1 = 0, n2 = 0;

    Grid2() = default;
    Grid2(double x1_min_, double x1_max_, int n1_, double x2_min_, double x2_max_, int n2_)
        : x1_min(x1_min_), x1_max(x1_max_), x2_min(x2_min_), x2_max(x2_max_), n1(n1_), n2(n2_) {
        if (!(x1_max > x1_min) || !(x2_max > x2_min))
            throw std::invalid_argument("Grid2: empty axis range");
        if (n1 < 5 || n2 < 5)
            throw std::invalid_argument("Grid2: need at least 5 points per axis");
    }

    double dx1() const { return (x1_max - x1_min) / (n1 - 1); }
    double dx2() const { return (x2_max - x2_min) / (n2 - 1); }
    Point2 point(int i, int j) const { return {x1_min + i * dx1(), x2_min + j * dx2()}; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n2 + j; }
    std::size_t size() const { return static_cast<std::size_t>(n1) * n2; }
};

// Both displacement components sampled on a 2D grid, row-major in the x1 index.
struct GridField2 {
    Grid2 grid;
    std::vector<double> u1;
    std::vector<double> u2;
};

// Field pair restricted to a line x2 = 0.
struct FieldPair1D {
    Grid1D grid;
    std::vector<double> u1;
    std::vector<double> u2;
};

// Polynomial field u(z) = sum_k c_k z^k with u1 = Re u, u2 = Im u.
struct HolomorphicField {
    std::vector<complex> coeffs;

    HolomorphicField() = default;
    explicit HolomorphicField(std::vector<complex> c, int degree_cap = 16) : coeffs(std::move(c)) {
        if (coeffs.empty())
            throw std::invalid_argument("HolomorphicField: empty coefficient list");
        if (static_cast<int>(coeffs.size()) - 1 > degree_cap)
            throw std::invalid_argument("HolomorphicField: degree " +
                                        std::to_string(coeffs.size() - 1) + " exceeds cap " +
                                        std::to_string(degree_cap));
    }

    complex eval(complex z) const {
        complex acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
            acc = acc * z + *it;
        return acc;
    }
};

inline std::pair<double, double> eval_field(const HolomorphicField& f, Point2 p) {
    const complex u = f.eval(complex(p.x1, p.x2));
    return {u.real(), u.imag()};
}

inline GridField2 sample_field(const HolomorphicField& f, const Grid2& grid) {
    GridField2 out;
    out.grid = grid;
    out.u1.resize(grid.size());
    out.u2.resize(grid.size());
    for (int i = 0; i < grid.n1; ++i)
        for (int j = 0; j < grid.n2; ++j) {
            auto [a, b] = eval_field(f, grid.point(i, j));
            out.u1[grid.index(i, j)] = a;
            out.u2[grid.index(i, j)] = b;
        }
    return out;
}

// Max interior defect of the two CR relations, central differences.
// r_a: d1 u1 - d2 u2, r_b: d1 u2 + d2 u1.
inline std::pair<double, double> cr_residual(const GridField2& g) {
    const Grid2& gr = g.grid;
    const double h1 = 2.0 * gr.dx1(), h2 = 2.0 * gr.dx2();
    double ra = 0.0, rb = 0.0;
    for (int i = 1; i + 1 < gr.n1; ++i)
        for (int j = 1; j + 1 < gr.n2; ++j) {
            const double d1u1 = (g.u1[gr.index(i + 1, j)] - g.u1[gr.index(i - 1, j)]) / h1;
            const double d2u1 = (g.u1[gr.index(i, j + 1)] - g.u1[gr.index(i, j - 1)]) / h2;
            const double d1u2 = (g.u2[gr.index(i + 1, j)] - g.u2[gr.index(i - 1, j)]) / h1;
            const double d2u2 = (g.u2[gr.index(i, j + 1)] - g.u2[gr.index(i, j - 1)]) / h2;
            ra = std::max(ra, std::abs(d1u1 - d2u2));
            rb = std::max(rb, std::abs(d1u2 + d2u1));
        }
    return {ra, rb};
}

// Max interior 5-point Laplacian defect over both components.
inline double laplacian_residual(const GridField2& g) {
    const Grid2& gr = g.grid;
    const double h1sq = gr.dx1() * gr.dx1(), h2sq = gr.dx2() * gr.dx2();
    double r = 0.0;
    for (const auto* u : {&g.u1, &g.u2})
        for (int i = 1; i + 1 < gr.n1; ++i)
            for (int j = 1; j + 1 < gr.n2; ++j) {
                const double c = (*u)[gr.index(i, j)];
                const double lap =
                    ((*u)[gr.index(i + 1, j)] - 2.0 * c + (*u)[gr.index(i - 1, j)]) / h1sq +
                    ((*u)[gr.index(i, j + 1)] - 2.0 * c + (*u)[gr.index(i, j - 1)]) / h2sq;
                r = std::max(r, std::abs(lap));
            }
    return r;
}

inline FieldPair1D restrict_to_line(const HolomorphicField& f, const Grid1D& grid) {
    FieldPair1D out;
    out.grid = grid;
    out.u1.resize(grid.n);
    out.u2.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        auto [a, b] = eval_field(f, {grid.x(i), 0.0});
        out.u1[i] = a;
        out.u2[i] = b;
    }
    return out;
}

}  // namespace cqsim
