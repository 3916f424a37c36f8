#ifndef BEXC_SOLVER_HPP
#define BEXC_SOLVER_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "bexc/hamiltonian.hpp"

namespace bexc {

struct GroundState {
    double energy = 0.0;
    Eigen::VectorXd vector;
    double residual = 0.0;
    int iterations = 0;
    std::uint64_t seed = 0;
    double ritz_gap = 0.0; // gap to the second Ritz value at convergence
};

// Lowest eigenpair by Lanczos with full reorthogonalization.  Deterministic
// for a fixed seed; the starting vector is the vacuum plus small seeded noise
// so every sector coupled to the ground state is populated.
inline GroundState lanczos_ground_state(const SparseMat& h, double tol = 1e-10,
                                        std::uint64_t seed = 1, int max_iter = 400) {
    if (!(tol > 0.0)) throw std::invalid_argument("lanczos_ground_state: tol must be positive");
    const int dim = int(h.rows());
    if (h.cols() != dim) throw std::invalid_argument("lanczos_ground_state: matrix not square");
    {
        const double dev = hermiticity_defect(h);
        if (dev > 1e-10)
            throw std::runtime_error("lanczos_ground_state: non-Hermitian input, defect " +
                                     std::to_string(dev));
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(dim);
    v.setZero();
    v(0) = 1.0;
    for (int i = 0; i < dim; ++i) v(i) += 1e-3 * normal(rng);
    v /= v.norm();

    max_iter = std::min(max_iter, dim);
    Eigen::MatrixXd basis(dim, max_iter);
    std::vector<double> alpha, beta; // tridiagonal entries
    std::vector<double> ritz_history;

    basis.col(0) = v;
    Eigen::VectorXd w;
    GroundState gs;
    gs.seed = seed;

    int k = 0;
    for (; k < max_iter; ++k) {
        w = h * basis.col(k);
        if (k > 0) w -= beta[k - 1] * basis.col(k - 1);
        const double a = basis.col(k).dot(w);
        alpha.push_back(a);
        w -= a * basis.col(k);
        // full reorthogonalization, twice for good measure
        for (int pass = 0; pass < 2; ++pass)
            w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * w);
        const double b = w.norm();

        // small tridiagonal eigenproblem for the current Ritz pair
        const int s = k + 1;
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(s, s);
        for (int i = 0; i < s; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < s) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const double theta = es.eigenvalues()(0);
        ritz_history.push_back(theta);
        const double res_est = b * std::abs(es.eigenvectors()(s - 1, 0));

        if (res_est <= 0.1 * tol || b < 1e-13 || k == max_iter - 1 || k == dim - 1) {
            Eigen::VectorXd x = basis.leftCols(s) * es.eigenvectors().col(0);
            x /= x.norm();
            const double res = (h * x - theta * x).norm();
            if (res <= tol || b < 1e-13 || k == dim - 1) {
                gs.energy = theta;
                gs.vector = x;
                gs.residual = res;
                gs.iterations = s;
                gs.ritz_gap = s > 1 ? es.eigenvalues()(1) - theta : 0.0;
                return gs;
            }
            if (k == max_iter - 1) break;
        }
        if (b < 1e-13) break; // invariant subspace, handled above
        beta.push_back(b);
        basis.col(k + 1) = w / b;
    }

    std::string hist;
    for (std::size_t i = ritz_history.size() >= 5 ? ritz_history.size() - 5 : 0;
         i < ritz_history.size(); ++i)
        hist += " " + std::to_string(ritz_history[i]);
    throw std::runtime_error("lanczos_ground_state: no convergence in " + std::to_string(k + 1) +
                             " iterations; last Ritz values:" + hist);
}

// dense full diagonalization, the small-instance oracle
inline GroundState dense_ground_state(const SparseMat& h, int dim_guard = 5000) {
    if (h.rows() > dim_guard)
        throw std::invalid_argument("dense_ground_state: dimension " + std::to_string(h.rows()) +
                                    " exceeds guard " + std::to_string(dim_guard));
    Eigen::MatrixXd dense(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense_ground_state: solver failed");
    GroundState gs;
    gs.energy = es.eigenvalues()(0);
    gs.vector = es.eigenvectors().col(0);
    gs.residual = (dense * gs.vector - gs.energy * gs.vector).norm();
    gs.iterations = 0;
    gs.ritz_gap = es.eigenvalues().size() > 1 ? es.eigenvalues()(1) - gs.energy : 0.0;
    return gs;
}

// ----------------------------------------------------------------------
// Analytic Bogoliubov oracle for ℍ₀ on the homogeneous torus.
//
// With plane-wave modes the quadratic Hamiltonian decouples into momentum
// pairs (p,-p),
//   H_p = D_p (a_p†a_p + a_-p†a_-p) + B_p (a_p†a_-p† + h.c.),
// with D_p = ε_p + K1_pp and B_p = K2_{p,-p}.  Diagonalization gives
// Ω_p = √(D²-B²), pair ground energy Ω_p - D_p ≤ 0, and a two-mode squeezed
// vacuum whose total-number law is geometric,
//   P_p(ℓ=2n) = (1-α²) α^{2n},   α = |B|/(D+Ω).
// The total P(ℓ) is the convolution over pairs.
// ----------------------------------------------------------------------

struct BogoliubovPair {
    int p = 0;
    int mode_plus = -1, mode_minus = -1;
    double eps = 0.0;
    double diag = 0.0;     // D_p
    double coupling = 0.0; // B_p
    double omega = 0.0;
    double alpha = 0.0;
    double energy = 0.0; // Ω_p - D_p
};

struct BogoliubovOracle {
    std::vector<BogoliubovPair> pairs;
    double E0 = 0.0;
    Eigen::VectorXd P; // sector distribution over ℓ = 0..truncation
    double mass_deficit = 0.0;
};

inline BogoliubovOracle bogoliubov_oracle(const KernelSet& ks, const Eigen::VectorXi& momenta,
                                          const Eigen::VectorXd& mode_eps, int truncation) {
    const int m = ks.m;
    if (momenta.size() != m || mode_eps.size() != m)
        throw std::invalid_argument("bogoliubov_oracle: mode data size mismatch");
    if (truncation < 0) throw std::invalid_argument("bogoliubov_oracle: bad truncation");

    // structural preconditions of the pair decoupling
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (i != j && std::abs(ks.K1(i, j)) > 1e-12)
                throw std::runtime_error("bogoliubov_oracle: K1 not diagonal");
            if (momenta(i) + momenta(j) != 0 && std::abs(ks.K2(i, j)) > 1e-12)
                throw std::runtime_error("bogoliubov_oracle: K2 couples non-opposite momenta");
        }

    BogoliubovOracle oracle;
    oracle.P = Eigen::VectorXd::Zero(truncation + 1);
    oracle.P(0) = 1.0;

    for (int i = 0; i < m; ++i) {
        const int p = momenta(i);
        if (p <= 0) continue;
        int jm = -1;
        for (int j = 0; j < m; ++j)
            if (momenta(j) == -p) jm = j;
        if (jm < 0) throw std::runtime_error("bogoliubov_oracle: unpaired momentum " + std::to_string(p));

        BogoliubovPair pair;
        pair.p = p;
        pair.mode_plus = i;
        pair.mode_minus = jm;
        pair.eps = mode_eps(i);
        if (std::abs(mode_eps(jm) - mode_eps(i)) > 1e-10)
            throw std::runtime_error("bogoliubov_oracle: pair dispersion mismatch at p=" +
                                     std::to_string(p));
        pair.diag = mode_eps(i) + ks.K1(i, i);
        pair.coupling = ks.K2(i, jm);
        if (!(pair.diag * pair.diag > pair.coupling * pair.coupling))
            throw std::runtime_error("bogoliubov_oracle: ill-posed pair p=" + std::to_string(p) +
                                     " (|coupling| >= diagonal, unstable quadratic Hamiltonian)");
        pair.omega = std::sqrt(pair.diag * pair.diag - pair.coupling * pair.coupling);
        pair.alpha = std::abs(pair.coupling) / (pair.diag + pair.omega);
        pair.energy = pair.omega - pair.diag;
        oracle.E0 += pair.energy;

        // exact polynomial convolution with the pair's geometric law
        const double a2 = pair.alpha * pair.alpha;
        Eigen::VectorXd next = Eigen::VectorXd::Zero(truncation + 1);
        double q = 1.0 - a2;
        for (int two_n = 0; two_n <= truncation; two_n += 2) {
            for (int l = 0; l + two_n <= truncation; ++l) next(l + two_n) += oracle.P(l) * q;
            q *= a2;
        }
        oracle.P = next;
        oracle.pairs.push_back(pair);
    }
    oracle.mass_deficit = 1.0 - oracle.P.sum();
    return oracle;
}

} // namespace bexc

#endif
