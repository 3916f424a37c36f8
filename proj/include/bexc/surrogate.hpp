#ifndef BEXC_SURROGATE_HPP
#define BEXC_SURROGATE_HPP

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "bexc/coulomb.hpp"
#include "bexc/kernels.hpp"

namespace bexc {

// ----------------------------------------------------------------------
// 1D radial surrogate for the Coulomb operator checks.
//
// Radial (s-wave) states on a 3D radial grid see the spherically averaged
// pair kernel Ṽ(x,y) = (1/(2xy)) ∫_{|x-y|}^{x+y} v(s) s ds.  The average is
// linear in v, so the Yukawa splitting v = v_κ + v_κ^⊥ carries over exactly,
// and positive-type 3D potentials stay positive semidefinite (the quadratic
// form is the 3D form evaluated on sums of uniform sphere measures).
// ----------------------------------------------------------------------

// Coulomb λ/s:  Newton's theorem, λ/max(x,y)
inline double radial_avg_coulomb(double x, double y, double lambda) {
    return lambda / std::max(x, y);
}

// short-range remainder λ e^{-s/κ}/s
inline double radial_avg_yukawa_complement(double x, double y, double lambda, double kappa) {
    return lambda * kappa / (2.0 * x * y) *
           (std::exp(-std::abs(x - y) / kappa) - std::exp(-(x + y) / kappa));
}

// bounded positive-type part λ(1-e^{-s/κ})/s
inline double radial_avg_yukawa_regular(double x, double y, double lambda, double kappa) {
    return radial_avg_coulomb(x, y, lambda) - radial_avg_yukawa_complement(x, y, lambda, kappa);
}

struct RadialSurrogate {
    RadialGrid grid;
    double lambda = 0.0;
    Eigen::VectorXd phi;    // positive, normalized
    Eigen::MatrixXcd modes; // n x m, grid-orthonormal, ⊥ phi
    int n_modes() const { return int(modes.cols()); }
};

// φ is a normalized Gaussian; the excitation modes are the orthonormalized
// polynomial excitations r^j φ(r), built by Householder QR in half-weight
// coordinates so orthogonality holds to machine precision
inline RadialSurrogate build_radial_surrogate(double lambda, const RadialGrid& grid, int m) {
    if (m < 1 || m > 8) throw std::invalid_argument("build_radial_surrogate: need 1 <= m <= 8");
    RadialSurrogate s;
    s.grid = grid;
    s.lambda = lambda;
    s.phi = gaussian_radial(grid);

    const int n = grid.n();
    const Eigen::VectorXd half_w = grid.w.array().sqrt();
    Eigen::MatrixXd cols(n, m + 1);
    for (int j = 0; j <= m; ++j)
        cols.col(j) = half_w.array() * s.phi.array() * grid.r.array().pow(double(j));
    cols.col(0) /= cols.col(0).norm();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(cols);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m + 1);

    s.modes.resize(n, m);
    for (int j = 1; j <= m; ++j) {
        Eigen::VectorXd u = q.col(j).array() / half_w.array();
        // fix an overall sign for determinism
        if (u(n - 1) < 0) u = -u;
        s.modes.col(j - 1) = u.cast<std::complex<double>>();
    }
    return s;
}

// pair-kernel matrix Ṽ(x_i, x_j) for a spherically averaged potential
template <typename F>
Eigen::MatrixXd surrogate_kernel_matrix(const RadialSurrogate& s, F&& avg) {
    const int n = s.grid.n();
    Eigen::MatrixXd v(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v(i, j) = avg(s.grid.r(i), s.grid.r(j));
    return v;
}

// mode kernels of the surrogate for a given averaged pair kernel
inline KernelSet surrogate_kernels(const RadialSurrogate& s, const Eigen::MatrixXd& vmat) {
    return kernels_from_matrix(s.grid.w, s.phi, vmat, s.modes);
}

// ∫ Ṽ(x,x) φ²(x) dx, the splitting analogue of v(0): for the regular Yukawa
// part it is bounded by λ/κ
inline double surrogate_diagonal_constant(const RadialSurrogate& s, const Eigen::MatrixXd& vmat) {
    return (s.grid.w.array() * s.phi.array().square() * vmat.diagonal().array()).sum();
}

} // namespace bexc

#endif
