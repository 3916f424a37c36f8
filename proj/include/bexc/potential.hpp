#ifndef BEXC_POTENTIAL_HPP
#define BEXC_POTENTIAL_HPP

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bexc/grid.hpp"

namespace bexc {

enum class PotentialClass { BoundedPositiveType, Coulomb, Yukawa, YukawaComplement };

inline std::string to_string(PotentialClass c) {
    switch (c) {
        case PotentialClass::BoundedPositiveType: return "bounded-positive-type";
        case PotentialClass::Coulomb: return "coulomb";
        case PotentialClass::Yukawa: return "yukawa";
        case PotentialClass::YukawaComplement: return "yukawa-complement";
    }
    return "?";
}

inline PotentialClass potential_class_from_string(const std::string& s) {
    if (s == "bounded-positive-type") return PotentialClass::BoundedPositiveType;
    if (s == "coulomb") return PotentialClass::Coulomb;
    if (s == "yukawa") return PotentialClass::Yukawa;
    if (s == "yukawa-complement") return PotentialClass::YukawaComplement;
    throw std::invalid_argument("unknown potential class '" + s + "'");
}

// A pair interaction.  Bounded positive-type potentials live on the torus
// and are defined by finitely many Fourier coefficients under the repo-wide
// convention
//
//     v(x) = (1/L) Σ_k v̂(k) exp(2πikx/L),    v̂(k) = ∫ v(x) exp(-2πikx/L) dx.
//
// Coulomb/Yukawa classes are radial 3D potentials carrying their analytic
// Fourier transforms (v̂(k) = ∫ v(x) e^{-ik·x} d³x).
struct PairPotential {
    PotentialClass cls = PotentialClass::BoundedPositiveType;
    std::map<int, double> fourier;   // bounded case: integer mode -> v̂(k)
    double torus_length = 0.0;       // bounded case
    double lambda = 0.0;             // coulomb / yukawa coupling
    double kappa = 0.0;              // yukawa range

    bool is_bounded() const { return cls == PotentialClass::BoundedPositiveType; }

    // real-space value; argument is a (torus) displacement for the bounded
    // class and a 3D radius for the radial classes
    double operator()(double x) const {
        switch (cls) {
            case PotentialClass::BoundedPositiveType: {
                double s = 0.0;
                for (const auto& [k, vk] : fourier)
                    s += vk * std::cos(2.0 * pi * k * x / torus_length);
                return s / torus_length;
            }
            case PotentialClass::Coulomb:
                return lambda / x;
            case PotentialClass::Yukawa:
                // λ(1-e^{-r/κ})/r, continuous limit λ/κ at r=0
                if (x < 1e-12 * kappa) return lambda / kappa;
                return lambda * (1.0 - std::exp(-x / kappa)) / x;
            case PotentialClass::YukawaComplement:
                return lambda * std::exp(-x / kappa) / x;
        }
        return 0.0;
    }

    // bounded case: v(0) = Σ_k v̂(k)/L
    double value_at_zero() const {
        if (!is_bounded()) throw std::logic_error("value_at_zero: potential is singular at 0");
        double s = 0.0;
        for (const auto& kv : fourier) s += kv.second;
        return s / torus_length;
    }

    double fourier_coeff(int k) const {
        if (is_bounded()) {
            auto it = fourier.find(k);
            return it == fourier.end() ? 0.0 : it->second;
        }
        return fourier_radial(double(k));
    }

    // analytic 3D transforms of the radial classes, k > 0
    double fourier_radial(double k) const {
        const double k2 = k * k;
        switch (cls) {
            case PotentialClass::Coulomb: return 4.0 * pi * lambda / k2;
            case PotentialClass::Yukawa:
                return 4.0 * pi * lambda * (1.0 / k2 - 1.0 / (k2 + 1.0 / (kappa * kappa)));
            case PotentialClass::YukawaComplement:
                return 4.0 * pi * lambda / (k2 + 1.0 / (kappa * kappa));
            default: throw std::logic_error("fourier_radial: bounded potential");
        }
    }
};

// Builds a bounded positive-type potential from its Fourier coefficients.
// Rejects negative coefficients (naming the offending mode) and non-even
// spectra; modes must be resolvable on the grid.
inline PairPotential make_bounded_potential(const std::map<int, double>& coeffs, const Grid1D& grid) {
    if (grid.boundary != Boundary::Periodic)
        throw std::invalid_argument("make_bounded_potential: needs a periodic grid");
    PairPotential v;
    v.cls = PotentialClass::BoundedPositiveType;
    v.torus_length = grid.length;
    for (const auto& [k, vk] : coeffs) {
        if (vk < 0.0)
            throw std::invalid_argument("make_bounded_potential: negative coefficient at k=" +
                                        std::to_string(k));
        if (vk == 0.0) continue;
        if (2 * std::abs(k) >= grid.n)
            throw std::invalid_argument("make_bounded_potential: mode k=" + std::to_string(k) +
                                        " not resolvable on n=" + std::to_string(grid.n));
        v.fourier[k] = vk;
    }
    for (const auto& [k, vk] : v.fourier) {
        auto it = v.fourier.find(-k);
        const double mirror = it == v.fourier.end() ? 0.0 : it->second;
        if (std::abs(mirror - vk) > 1e-14 * (1.0 + std::abs(vk)))
            throw std::invalid_argument("make_bounded_potential: spectrum not even at k=" +
                                        std::to_string(k) + " (v must be even)");
    }
    return v;
}

// discrete forward transform of a grid function: f̂(k) = w Σ_i f(x_i) e^{-ik̃x_i}
inline std::complex<double> fourier_coefficient(const Eigen::VectorXd& f, const Grid1D& g, int k) {
    std::complex<double> acc(0.0, 0.0);
    const double kk = 2.0 * pi * k / g.length;
    for (int i = 0; i < g.n; ++i)
        acc += f(i) * std::exp(std::complex<double>(0.0, -kk * g.point(i)));
    return g.weight() * acc;
}

// (v*ρ)(x_i) by direct quadrature over torus displacements
inline Eigen::VectorXd convolve_quadrature(const PairPotential& v, const Eigen::VectorXd& rho,
                                           const Grid1D& g) {
    Eigen::VectorXd out(g.n);
    for (int i = 0; i < g.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < g.n; ++j) s += v(std::abs(g.distance(g.point(i), g.point(j)))) * rho(j);
        out(i) = g.weight() * s;
    }
    return out;
}

// (v*ρ)(x_i) by Fourier multiplication (bounded potentials)
inline Eigen::VectorXd convolve_fourier(const PairPotential& v, const Eigen::VectorXd& rho,
                                        const Grid1D& g) {
    if (!v.is_bounded()) throw std::invalid_argument("convolve_fourier: bounded potentials only");
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(g.n);
    for (const auto& [k, vk] : v.fourier) {
        const std::complex<double> rk = fourier_coefficient(rho, g, k);
        const double kk = 2.0 * pi * k / g.length;
        for (int i = 0; i < g.n; ++i)
            acc(i) += vk * rk * std::exp(std::complex<double>(0.0, kk * g.point(i)));
    }
    return acc.real() / g.length;
}

// Convolution entry point used by the solvers: Fourier path on bounded
// potentials, quadrature otherwise.  A non-normalized density is recorded
// as a warning, not an error.
inline Eigen::VectorXd convolve_with_density(const PairPotential& v, const Eigen::VectorXd& rho,
                                             const Grid1D& g,
                                             std::vector<std::string>* warnings = nullptr) {
    const double mass = g.weight() * rho.sum();
    if (warnings && std::abs(mass - 1.0) > 1e-8)
        warnings->push_back("convolve_with_density: density mass " + std::to_string(mass) +
                            " deviates from 1");
    if (warnings && rho.minCoeff() < -1e-12)
        warnings->push_back("convolve_with_density: density has negative entries");
    // Fourier multiplication assumes periodicity; hard walls get quadrature
    if (v.is_bounded() && g.boundary == Boundary::Periodic) return convolve_fourier(v, rho, g);
    return convolve_quadrature(v, rho, g);
}

} // namespace bexc

#endif
