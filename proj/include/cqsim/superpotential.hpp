#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <cqsim/field.hpp>

namespace cqsim {

// Real-coefficient polynomial S(z); S1 denotes its real part, which restricts
// to an ordinary real polynomial on the x2 = 0 line.
struct Superpotential {
    std::vector<double> coeffs;

    Superpotential() = default;

    explicit Superpotential(std::vector<double> c) : coeffs(std::move(c)) {
        if (coeffs.empty())
            throw std::invalid_argument("Superpotential: empty coefficient list");
    }

    explicit Superpotential(const HolomorphicField& f) {
        coeffs.reserve(f.coeffs.size());
        for (const auto& c : f.coeffs) {
            if (c.imag() != 0.0)
                throw std::invalid_argument("Superpotential: coefficients must be real");
            coeffs.push_back(c.real());
        }
        if (coeffs.empty())
            throw std::invalid_argument("Superpotential: empty coefficient list");
    }

    complex eval(complex z) const {
        complex acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
            acc = acc * z + *it;
        return acc;
    }

    // S'(z), complex derivative.
    complex derivative(complex z) const {
        complex acc = 0.0;
        const int deg = static_cast<int>(coeffs.size()) - 1;
        for (int k = deg; k >= 1; --k)
            acc = acc * z + static_cast<double>(k) * coeffs[k];
        return acc;
    }

    // Restrictions of S1 and its x-derivatives to the line x2 = 0.
    double s1(double x) const { return eval(complex(x, 0.0)).real(); }
    double s1_prime(double x) const { return derivative(complex(x, 0.0)).real(); }
    double s1_second(double x) const {
        double acc = 0.0;
        const int deg = static_cast<int>(coeffs.size()) - 1;
        for (int k = deg; k >= 2; --k)
            acc = acc * x + static_cast<double>(k) * (k - 1) * coeffs[k];
        return acc;
    }
};

struct PotentialSamples {
    Grid1D grid;
    std::vector<double> v;
};

inline Superpotential oscillator_superpotential(double omega) {
    if (!(omega > 0.0))
        throw std::invalid_argument("oscillator_superpotential: omega must be positive");
    return Superpotential(std::vector<double>{0.0, 0.0, omega / 2.0});
}

// Drift vector (Im S'(z), -Re S'(z)).
inline std::pair<double, double> drift_field(const Superpotential& s, Point2 p) {
    const complex sp = s.derivative(complex(p.x1, p.x2));
    return {sp.imag(), -sp.real()};
}

// V(x) = (S1')^2 / 2 - (hbar/2) S1'' on the line.
inline PotentialSamples riccati_potential(const Superpotential& s, double hbar,
                                          const Grid1D& grid) {
    if (!(hbar > 0.0))
        throw std::invalid_argument("riccati_potential: hbar must be positive");
    PotentialSamples out;
    out.grid = grid;
    out.v.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        const double sp = s.s1_prime(x);
        out.v[i] = 0.5 * sp * sp - 0.5 * hbar * s.s1_second(x);
    }
    return out;
}

// Non-empty when exp(-2 S1 / hbar) is not integrable along the line, i.e. the
// leading term does not grow positively at both ends.
inline std::optional<std::string> normalizability_warning(const Superpotential& s) {
    int lead = static_cast<int>(s.coeffs.size()) - 1;
    while (lead > 0 && s.coeffs[lead] == 0.0)
        --lead;
    if (lead < 2 || lead % 2 != 0 || s.coeffs[lead] <= 0.0)
        return "leading term z^" + std::to_string(lead) + " with coefficient " +
               std::to_string(lead >= 0 ? s.coeffs[lead] : 0.0) +
               " does not confine exp(-2 S1/hbar); ensemble weights are not normalizable";
    return std::nullopt;
}

}  // namespace cqsim
