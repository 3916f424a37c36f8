#ifndef BEXC_COULOMB_HPP
#define BEXC_COULOMB_HPP

#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "bexc/potential.hpp"

namespace bexc {

// Logarithmically spaced radial quadrature grid for 3D radial integrals,
// ∫ f d³x ≈ Σ_i w_i f(r_i) with w_i = 4π r_i² Δr_i.
struct RadialGrid {
    Eigen::VectorXd r;
    Eigen::VectorXd w;
    int n() const { return int(r.size()); }
};

inline RadialGrid make_radial_grid(double r_min, double r_max, int n) {
    if (!(r_min > 0.0) || !(r_max > r_min)) throw std::invalid_argument("make_radial_grid: bad radii");
    if (n < 16) throw std::invalid_argument("make_radial_grid: need n >= 16");
    RadialGrid g;
    g.r.resize(n);
    g.w.resize(n);
    const double dl = std::log(r_max / r_min) / n;
    for (int i = 0; i < n; ++i) {
        const double lo = r_min * std::exp(i * dl);
        const double hi = r_min * std::exp((i + 1) * dl);
        g.r(i) = std::sqrt(lo * hi);
        g.w(i) = 4.0 * pi * g.r(i) * g.r(i) * (hi - lo);
    }
    return g;
}

// grid built for a Yukawa range: innermost radius 1e-6·κ resolves the
// 1/r² integrand of the residual sup-norm
inline RadialGrid make_radial_grid_for_kappa(double kappa, double r_max, int n) {
    return make_radial_grid(1e-6 * kappa, r_max, n);
}

inline Eigen::VectorXd normalized_radial(const RadialGrid& g, const Eigen::VectorXd& raw) {
    const double nrm2 = (g.w.array() * raw.array().square()).sum();
    return raw / std::sqrt(nrm2);
}

inline Eigen::VectorXd gaussian_radial(const RadialGrid& g, double sigma = 1.0) {
    Eigen::VectorXd f(g.n());
    for (int i = 0; i < g.n(); ++i) f(i) = std::exp(-0.5 * g.r(i) * g.r(i) / (sigma * sigma));
    return normalized_radial(g, f);
}

// Splits the repulsive Coulomb potential λ/r into the bounded-at-origin
// positive-type part v_κ(r) = λ(1-e^{-r/κ})/r and the short-range remainder
// v_κ^⊥(r) = λ e^{-r/κ}/r.  Both carry their analytic 3D transforms.
inline std::pair<PairPotential, PairPotential> yukawa_split(double lambda, double kappa,
                                                            const RadialGrid& grid) {
    if (!(lambda > 0.0)) throw std::invalid_argument("yukawa_split: lambda must be positive");
    if (!(kappa > 0.0)) throw std::invalid_argument("yukawa_split: kappa must be positive");
    (void)grid;
    PairPotential vk, vp;
    vk.cls = PotentialClass::Yukawa;
    vk.lambda = lambda;
    vk.kappa = kappa;
    vp.cls = PotentialClass::YukawaComplement;
    vp.lambda = lambda;
    vp.kappa = kappa;
    return {vk, vp};
}

inline double expint_e1(double x) { return -std::expint(-x); }

namespace detail {

// Angular averages over the unit sphere at fixed radii x, y:
//   avg_f(x,y) = (1/(2xy)) ∫_{|x-y|}^{x+y} f(s) s ds
// so that (f*ρ)(x) = Σ_y w_y avg_f(x,y) ρ(y) on a RadialGrid.

// f = (λ e^{-s/κ}/s)²:  s-integral of e^{-2s/κ}/s = E₁(2a/κ) - E₁(2b/κ).
// cell_half > 0 marks the diagonal, where the log-singular E₁(2|x-y|/κ) is
// replaced by its average over u ∈ [-cell_half, cell_half] using
// ∫₀^z E₁ = z E₁(z) + 1 - e^{-z}.
inline double avg_yukawa_complement_sq(double x, double y, double lambda, double kappa,
                                       double cell_half) {
    const double c = lambda * lambda / (2.0 * x * y);
    const double hi = expint_e1(2.0 * (x + y) / kappa);
    if (cell_half > 0.0) {
        const double z = 2.0 * cell_half / kappa;
        const double avg = (z * expint_e1(z) + 1.0 - std::exp(-z)) / z;
        return c * (avg - hi);
    }
    return c * (expint_e1(2.0 * std::abs(x - y) / kappa) - hi);
}

// f = (λ/s)²:  s-integral of 1/s = ln((x+y)/|x-y|)
inline double avg_coulomb_sq(double x, double y, double lambda, double cell_half) {
    const double c = lambda * lambda / (2.0 * x * y);
    if (cell_half > 0.0) {
        // cell average of ln(2x/|u|) over u ∈ [-h, h]
        return c * (std::log(2.0 * x / cell_half) + 1.0);
    }
    return c * std::log((x + y) / std::abs(x - y));
}

} // namespace detail

// ‖(v_κ^⊥)² * φ²‖_∞ over the radial grid (the δ(κ)² of the splitting
// argument).  φ must be positive and normalized on the grid.  Throws with a
// refinement hint when the grid cannot resolve the 1/r² integrand.
inline double residual_supnorm(double lambda, double kappa, const Eigen::VectorXd& phi,
                               const RadialGrid& g) {
    if (!(kappa > 0.0)) throw std::invalid_argument("residual_supnorm: kappa must be positive");
    if (phi.minCoeff() <= 0.0) throw std::invalid_argument("residual_supnorm: phi must be positive");
    const double nrm = (g.w.array() * phi.array().square()).sum();
    if (std::abs(nrm - 1.0) > 1e-8)
        throw std::invalid_argument("residual_supnorm: phi not normalized on the grid");
    if (g.r(0) > 1e-3 * kappa)
        throw std::runtime_error(
            "residual_supnorm: innermost radius " + std::to_string(g.r(0)) +
            " too coarse for kappa=" + std::to_string(kappa) +
            "; rebuild the grid with r_min <= 1e-3*kappa (1e-6*kappa recommended)");

    double sup = 0.0;
    const int n = g.n();
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            // local cell half-width from the log spacing, used on the diagonal
            const double h = i == j ? 0.5 * g.w(j) / (4.0 * pi * g.r(j) * g.r(j)) : 0.0;
            acc += g.w(j) * phi(j) * phi(j) *
                   detail::avg_yukawa_complement_sq(g.r(i), g.r(j), lambda, kappa, h);
        }
        if (!std::isfinite(acc))
            throw std::runtime_error("residual_supnorm: quadrature divergence at r=" +
                                     std::to_string(g.r(i)) + "; refine the grid near r=0");
        sup = std::max(sup, acc);
    }
    return sup;
}

// ‖v² * φ²‖_∞ for the full Coulomb potential (Hardy-type finite)
inline double coulomb_sq_convolution_supnorm(double lambda, const Eigen::VectorXd& phi,
                                             const RadialGrid& g) {
    double sup = 0.0;
    const int n = g.n();
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double h = 0.5 * g.w(j) / (4.0 * pi * g.r(j) * g.r(j));
            acc += g.w(j) * phi(j) * phi(j) *
                   detail::avg_coulomb_sq(g.r(i), g.r(j), lambda, i == j ? h : 0.0);
        }
        sup = std::max(sup, acc);
    }
    return sup;
}

} // namespace bexc

#endif
