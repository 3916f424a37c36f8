#ifndef BEXC_KERNELS_HPP
#define BEXC_KERNELS_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bexc/hartree.hpp"

namespace bexc {

struct K4Entry {
    int i, j, k, l;
    double value;
};

// Interaction kernels expanded in the excitation mode basis.
//   K1[i][j]     couples a_i† a_j           (sector-preserving, PSD for v̂ ≥ 0)
//   K2[i][j]     couples a_i† a_j†          (raises ℓ by 2, symmetric)
//   K3[i][j][k]  couples a_i† a_j† a_k      (raises ℓ by 1)
//   K4 entries   couple a_i† a_j† a_k a_l   (sector-preserving)
// plus the scalar data the operator lemmas need.
struct KernelSet {
    int m = 0;
    Eigen::MatrixXd K1;
    Eigen::MatrixXd K2;
    std::vector<double> K3;      // flat m³, index (i*m + j)*m + k
    std::vector<K4Entry> K4;     // sparse, |value| > threshold
    // quartic with the bare interaction v(x-y) instead of W; this is the
    // variant that is provably PSD for pointwise nonnegative v
    std::vector<K4Entry> K4_plain;
    double v0 = 0.0;             // v(0)
    double sup_v2_phi2 = 0.0;    // ‖v² * φ²‖_∞
    static constexpr double k4_threshold = 1e-14;

    double k3(int i, int j, int k) const { return K3[std::size_t((i * m + j)) * m + k]; }
};

// the same kernel set with the bare-interaction quartic in place of the
// W-kernel quartic (for positivity checks)
inline KernelSet with_plain_quartic(KernelSet ks) {
    ks.K4 = ks.K4_plain;
    return ks;
}

namespace detail {

inline void require_orthonormal_modes(const Eigen::MatrixXcd& modes, const Eigen::VectorXd& wts,
                                      const Eigen::VectorXd& phi) {
    const Eigen::MatrixXcd gram = modes.adjoint() * wts.asDiagonal() * modes;
    const double dev =
        (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e-10)
        throw std::runtime_error("compute_kernels: mode basis not orthonormal (dev=" +
                                 std::to_string(dev) + ")");
    const Eigen::VectorXcd ov = modes.adjoint() * wts.asDiagonal() * phi;
    if (ov.cwiseAbs().maxCoeff() > 1e-10)
        throw std::runtime_error("compute_kernels: modes not orthogonal to phi");
}

// analytic kernels on the homogeneous torus (modes = plane waves):
//   K1 = diag v̂(p)/L                K2_{ij} = v̂(p_i)/L  δ(p_i+p_j)
//   K3_{ijk} = v̂(p_i)/L δ(p_i+p_j-p_k)
//   K4_{ijkl} = [v̂(p_i-p_k) - v̂(0) δ(p_i-p_k)]/L  δ(p_i+p_j-p_k-p_l)
inline KernelSet homogeneous_kernels(const HartreeSolution& sol, const PairPotential& v, int m) {
    const double L = sol.grid.length;
    KernelSet ks;
    ks.m = m;
    ks.K1 = Eigen::MatrixXd::Zero(m, m);
    ks.K2 = Eigen::MatrixXd::Zero(m, m);
    ks.K3.assign(std::size_t(m) * m * m, 0.0);
    const auto p = [&](int j) { return sol.mode_momentum(j); };
    for (int i = 0; i < m; ++i) {
        ks.K1(i, i) = v.fourier_coeff(p(i)) / L;
        for (int j = 0; j < m; ++j) {
            if (p(i) + p(j) == 0) ks.K2(i, j) = v.fourier_coeff(p(i)) / L;
            for (int k = 0; k < m; ++k)
                if (p(i) + p(j) == p(k))
                    ks.K3[std::size_t((i * m + j)) * m + k] = v.fourier_coeff(p(i)) / L;
        }
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) {
                    if (p(i) + p(j) != p(k) + p(l)) continue;
                    const double plain = v.fourier_coeff(p(i) - p(k)) / L;
                    double val = plain;
                    if (p(i) == p(k)) val -= v.fourier_coeff(0) / L;
                    if (std::abs(val) > KernelSet::k4_threshold) ks.K4.push_back({i, j, k, l, val});
                    if (std::abs(plain) > KernelSet::k4_threshold)
                        ks.K4_plain.push_back({i, j, k, l, plain});
                }
    return ks;
}

} // namespace detail

// Mode-basis kernels for a general symmetric pair kernel V(x,y) on a weighted
// point set: K(x,y) = φ(x)V(x,y)φ(y) and W = V - c(x) - c(y) + c̄ with
// c = V-convolution of φ².  Shared by the 1D grids (V(x,y) = v(x-y)) and the
// radial Coulomb surrogate (spherically averaged kernels).
inline KernelSet kernels_from_matrix(const Eigen::VectorXd& wts, const Eigen::VectorXd& phi,
                                     const Eigen::MatrixXd& vmat, const Eigen::MatrixXcd& modes) {
    const int n = int(wts.size());
    const int m = int(modes.cols());
    if (phi.size() != n || vmat.rows() != n || vmat.cols() != n || modes.rows() != n)
        throw std::invalid_argument("kernels_from_matrix: size mismatch");
    detail::require_orthonormal_modes(modes, wts, phi);

    const Eigen::VectorXd rho = phi.array().square();
    const Eigen::VectorXd c = vmat * wts.cwiseProduct(rho);
    const double cbar = (wts.array() * rho.array() * c.array()).sum();
    const Eigen::MatrixXd K = phi.asDiagonal() * vmat * phi.asDiagonal();
    Eigen::MatrixXd W = vmat;
    W.colwise() -= c;
    W.rowwise() -= c.transpose();
    W.array() += cbar;

    KernelSet ks;
    ks.m = m;
    const Eigen::MatrixXcd Uw = wts.asDiagonal() * modes;        // weighted modes
    const Eigen::MatrixXcd Uwc = Uw.conjugate();

    double max_im = 0.0;
    auto realify = [&max_im](const Eigen::MatrixXcd& a, const char* name) {
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        const double im = a.imag().cwiseAbs().maxCoeff();
        if (im > 1e-9 * scale)
            throw std::runtime_error(std::string("kernels_from_matrix: ") + name +
                                     " has non-negligible imaginary part " + std::to_string(im));
        max_im = std::max(max_im, im);
        return Eigen::MatrixXd(a.real());
    };

    ks.K1 = realify(Uw.adjoint() * K * Uw, "K1");
    ks.K2 = realify(Uw.adjoint() * K * Uwc, "K2");

    // K3_{ijk} = Σ_{xy} w_x w_y ū_i(x) φ(x) W(x,y) ū_j(y) u_k(y)
    Eigen::MatrixXcd A = Uwc;
    A.array().colwise() *= phi.array().cast<std::complex<double>>();
    Eigen::MatrixXcd B(n, m * m);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) B.col(j * m + k) = Uwc.col(j).cwiseProduct(modes.col(k));
    const Eigen::MatrixXcd M3 = A.transpose() * W * B;
    ks.K3.assign(std::size_t(m) * m * m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const std::complex<double> z = M3(i, j * m + k);
                max_im = std::max(max_im, std::abs(z.imag()));
                if (std::abs(z.real()) > KernelSet::k4_threshold)
                    ks.K3[std::size_t((i * m + j)) * m + k] = z.real();
            }

    // K4_{ijkl} = Σ_{xy} w_x w_y ū_i(x) u_k(x) W(x,y) ū_j(y) u_l(y), plus the
    // bare-interaction variant with V in place of W
    Eigen::MatrixXcd C(n, m * m);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) C.col(i * m + k) = Uwc.col(i).cwiseProduct(modes.col(k));
    const Eigen::MatrixXcd M4 = C.transpose() * W * C;
    const Eigen::MatrixXcd M4p = C.transpose() * vmat * C;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) {
                    const std::complex<double> z = M4(i * m + k, j * m + l);
                    const std::complex<double> zp = M4p(i * m + k, j * m + l);
                    max_im = std::max(max_im, std::abs(z.imag()));
                    max_im = std::max(max_im, std::abs(zp.imag()));
                    if (std::abs(z.real()) > KernelSet::k4_threshold)
                        ks.K4.push_back({i, j, k, l, z.real()});
                    if (std::abs(zp.real()) > KernelSet::k4_threshold)
                        ks.K4_plain.push_back({i, j, k, l, zp.real()});
                }
    if (max_im > 1e-9)
        throw std::runtime_error("kernels_from_matrix: cubic/quartic kernels not real, max imag " +
                                 std::to_string(max_im));
    return ks;
}

// Expands the kernels through q = Id - |φ⟩⟨φ| in the excitation mode basis by
// grid quadrature.  On homogeneous tori the analytic Fourier kernels are used
// after checking agreement with the quadrature path to 1e-9.
inline KernelSet compute_kernels(const HartreeSolution& sol, const PairPotential& v, int m) {
    if (m > sol.n_modes())
        throw std::invalid_argument("compute_kernels: requested more modes than available");
    const Grid1D& g = sol.grid;
    const int n = g.n;

    Eigen::MatrixXd vmat(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) vmat(a, b) = v(std::abs(g.distance(g.point(a), g.point(b))));

    const Eigen::VectorXd wts = Eigen::VectorXd::Constant(n, g.weight());
    KernelSet ks = kernels_from_matrix(wts, sol.phi, vmat, sol.modes.leftCols(m));

    if (v.is_bounded()) ks.v0 = v.value_at_zero();
    const Eigen::VectorXd rho = sol.phi.array().square();
    double sup = 0.0;
    for (int a = 0; a < n; ++a) {
        double acc = 0.0;
        for (int b = 0; b < n; ++b) acc += g.weight() * vmat(a, b) * vmat(a, b) * rho(b);
        sup = std::max(sup, acc);
    }
    ks.sup_v2_phi2 = sup;

    // Fourier fast path: exact momentum-conserving kernels, checked against
    // the quadrature result entry by entry
    if (sol.momentum_labeled && v.is_bounded()) {
        KernelSet fk = detail::homogeneous_kernels(sol, v, m);
        fk.v0 = ks.v0;
        fk.sup_v2_phi2 = ks.sup_v2_phi2;
        double dev = (fk.K1 - ks.K1).cwiseAbs().maxCoeff();
        dev = std::max(dev, (fk.K2 - ks.K2).cwiseAbs().maxCoeff());
        for (std::size_t t = 0; t < ks.K3.size(); ++t)
            dev = std::max(dev, std::abs(fk.K3[t] - ks.K3[t]));
        Eigen::MatrixXd d4 = Eigen::MatrixXd::Zero(m * m, m * m);
        for (const auto& e : ks.K4) d4(e.i * m + e.k, e.j * m + e.l) = e.value;
        for (const auto& e : fk.K4) d4(e.i * m + e.k, e.j * m + e.l) -= e.value;
        dev = std::max(dev, d4.cwiseAbs().maxCoeff());
        d4.setZero();
        for (const auto& e : ks.K4_plain) d4(e.i * m + e.k, e.j * m + e.l) = e.value;
        for (const auto& e : fk.K4_plain) d4(e.i * m + e.k, e.j * m + e.l) -= e.value;
        dev = std::max(dev, d4.cwiseAbs().maxCoeff());
        if (dev > 1e-9)
            throw std::runtime_error(
                "compute_kernels: Fourier/quadrature mismatch, max deviation " +
                std::to_string(dev));
        return fk;
    }
    return ks;
}

} // namespace bexc

#endif
