#ifndef BEXC_LEMMAS_HPP
#define BEXC_LEMMAS_HPP

#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bexc/hamiltonian.hpp"
#include "bexc/surrogate.hpp"

namespace bexc {

// Outcome of a randomized operator-inequality check.  Explicit-constant
// lemmas must come back with zero violations; C-form lemmas report the
// smallest constant making the bound hold over all samples.
struct LemmaReport {
    std::string lemma_id;
    int samples = 0;
    int violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity(); // min(RHS - LHS)
    double empirical_constant = 0.0;
    std::uint64_t seed = 0;
    std::map<std::string, double> parameters;
    std::vector<std::pair<int, int>> failing; // (sample index, sector) for replay
};

inline constexpr double lemma_tolerance = 1e-10;

// standard-normal amplitudes on sector ℓ, normalized; deterministic in
// (seed, sample index) so failures can be replayed by regeneration
inline Eigen::VectorXd random_sector_vector(const FockBasis& b, int l, std::uint64_t seed,
                                            int sample_index) {
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(sample_index + 1)));
    std::normal_distribution<double> nd;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.dim());
    for (int i = b.sector_begin(l); i < b.sector_end(l); ++i) x(i) = nd(rng);
    const double n = x.norm();
    if (n == 0.0) x(b.sector_begin(l)) = 1.0;
    else x /= n;
    return x;
}

// Lemma-3 type bound: |⟨ξ^(ℓ), 𝕂₁ ξ^(ℓ)⟩| ≤ ‖v²*φ²‖_∞^{1/2} ℓ ‖ξ^(ℓ)‖²
inline LemmaReport check_K1_bound(const HamiltonianBlocks& blocks, double sup_v2_phi2,
                                  int samples, std::uint64_t seed) {
    const FockBasis& b = *blocks.basis;
    LemmaReport rep;
    rep.lemma_id = "K1";
    rep.samples = samples;
    rep.seed = seed;
    rep.parameters["sup_v2_phi2"] = sup_v2_phi2;
    const double c = std::sqrt(sup_v2_phi2);
    for (int s = 0; s < samples; ++s) {
        const int l = 1 + s % b.cutoff();
        const Eigen::VectorXd xi = random_sector_vector(b, l, seed, s);
        const double lhs = std::abs(xi.dot(blocks.K1 * xi));
        const double margin = c * l - lhs;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -lemma_tolerance) {
            ++rep.violations;
            rep.failing.emplace_back(s, l);
        }
    }
    return rep;
}

// Lemma-4 type bound for bounded positive-type v:
//   4|⟨ξ^(ℓ), 𝕂₂ ξ^(ℓ-2)⟩| ≤ ⟨ξ^(ℓ),𝕂₁ξ^(ℓ)⟩ + ⟨ξ^(ℓ-2),𝕂₁ξ^(ℓ-2)⟩ + v(0)‖ξ^(ℓ-2)‖²
// and the adjoint variant with ℓ ↦ ℓ+2.
inline LemmaReport check_K2_bound(const HamiltonianBlocks& blocks, double v0, int samples,
                                  std::uint64_t seed) {
    const FockBasis& b = *blocks.basis;
    if (b.cutoff() < 2) throw std::invalid_argument("check_K2_bound: cutoff too small");
    LemmaReport rep;
    rep.lemma_id = "K2";
    rep.samples = samples;
    rep.seed = seed;
    rep.parameters["v0"] = v0;
    for (int s = 0; s < samples; ++s) {
        const int l = 2 + s % (b.cutoff() - 1);
        const Eigen::VectorXd hi = random_sector_vector(b, l, seed, 2 * s);
        const Eigen::VectorXd lo = random_sector_vector(b, l - 2, seed, 2 * s + 1);
        const double g_hi = hi.dot(blocks.K1 * hi);
        const double g_lo = lo.dot(blocks.K1 * lo);
        const double lhs = 4.0 * std::abs(hi.dot(blocks.K2 * lo));
        const double margin = g_hi + g_lo + v0 - lhs; // ‖lo‖² = 1
        // adjoint variant: 4|⟨lo, K2† hi⟩| ≤ g(lo)+g(hi)+v(0)‖lo‖², same scalar
        const double lhs_adj = 4.0 * std::abs(lo.dot(blocks.K2.transpose() * hi));
        const double margin_adj = g_hi + g_lo + v0 - lhs_adj;
        rep.worst_margin = std::min({rep.worst_margin, margin, margin_adj});
        if (margin < -lemma_tolerance || margin_adj < -lemma_tolerance) {
            ++rep.violations;
            rep.failing.emplace_back(s, l);
        }
    }
    return rep;
}

// Lemma-5 type C-form bound for ℓ ≤ δN:
//   |⟨ξ^(ℓ), 𝕂₃ ξ^(ℓ-1)⟩| ≤ (δN)^{1/2} ( C ℓ‖ξ^(ℓ)‖² + (ℓ-1)‖ξ^(ℓ-1)‖² )
// reports the smallest admissible C plus the best symmetric two-constant fit
inline LemmaReport check_K3_bound(const HamiltonianBlocks& blocks, double delta, int N,
                                  int samples, std::uint64_t seed) {
    const FockBasis& b = *blocks.basis;
    const int l_max = std::min(b.cutoff(), int(delta * N));
    if (l_max < 1) throw std::invalid_argument("check_K3_bound: delta*N below 1");
    LemmaReport rep;
    rep.lemma_id = "K3";
    rep.samples = samples;
    rep.seed = seed;
    rep.parameters["delta"] = delta;
    rep.parameters["N"] = N;
    const double root = std::sqrt(delta * N);
    double c_required = 0.0, c_sym = 0.0;
    for (int s = 0; s < samples; ++s) {
        const int l = 1 + s % l_max;
        const Eigen::VectorXd hi = random_sector_vector(b, l, seed, 2 * s);
        const Eigen::VectorXd lo = random_sector_vector(b, l - 1, seed, 2 * s + 1);
        const double lhs = std::abs(hi.dot(blocks.K3 * lo));
        c_required = std::max(c_required, (lhs / root - double(l - 1)) / double(l));
        c_sym = std::max(c_sym, lhs / (root * double(l + (l - 1))));
        // adjoint variant |⟨lo, K3† hi⟩| with the roles of the sectors swapped
        const double lhs_adj = std::abs(lo.dot(blocks.K3.transpose() * hi));
        if (l - 1 >= 1)
            c_required = std::max(c_required, (lhs_adj / root - double(l)) / double(l - 1));
    }
    rep.empirical_constant = std::max(0.0, c_required);
    rep.parameters["two_constant_fit"] = c_sym;
    rep.worst_margin = 0.0;
    return rep;
}

// Lemma-6 type C-form bound: |⟨ξ^(ℓ), 𝕂₄ ξ^(ℓ)⟩| ≤ C δN ℓ ‖ξ^(ℓ)‖²
inline LemmaReport check_K4_bound(const HamiltonianBlocks& blocks, double delta, int N,
                                  int samples, std::uint64_t seed) {
    const FockBasis& b = *blocks.basis;
    const int l_max = std::min(b.cutoff(), int(delta * N));
    if (l_max < 1) throw std::invalid_argument("check_K4_bound: delta*N below 1");
    LemmaReport rep;
    rep.lemma_id = "K4";
    rep.samples = samples;
    rep.seed = seed;
    rep.parameters["delta"] = delta;
    rep.parameters["N"] = N;
    double c_required = 0.0;
    for (int s = 0; s < samples; ++s) {
        const int l = 1 + s % l_max;
        const Eigen::VectorXd xi = random_sector_vector(b, l, seed, s);
        const double lhs = std::abs(xi.dot(blocks.K4 * xi));
        c_required = std::max(c_required, lhs / (delta * N * l));
    }
    rep.empirical_constant = c_required;
    rep.worst_margin = 0.0;
    return rep;
}

// 𝕂₀ ≥ τ𝒩, checked exhaustively on the diagonal of every sector
inline LemmaReport check_K0_gap(const HamiltonianBlocks& blocks, double tau) {
    const FockBasis& b = *blocks.basis;
    LemmaReport rep;
    rep.lemma_id = "K0-gap";
    rep.samples = b.dim();
    rep.parameters["tau"] = tau;
    for (int i = 0; i < b.dim(); ++i) {
        const double margin = blocks.K0.coeff(i, i) - tau * b.sector_of(i);
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -lemma_tolerance) {
            ++rep.violations;
            rep.failing.emplace_back(i, b.sector_of(i));
        }
    }
    if (rep.violations > 0)
        throw std::runtime_error("check_K0_gap: K0 >= tau*N violated, worst margin " +
                                 std::to_string(rep.worst_margin));
    return rep;
}

// ----------------------------------------------------------------------
// Lemma-7 machinery on the radial Coulomb surrogate.
//
// For each κ in a decreasing sequence the splitting v = v_κ + v_κ^⊥ yields
//   (a) the Lemma-4 bound for the positive-type part with ν = λ/κ,
//   (b) the remainder bound |⟨ξ^(ℓ),(𝕂₂-𝕂₂,κ)ξ^(ℓ-2)⟩| ≤ δ(κ) ℓ ‖ξ‖‖ξ'‖
//       with δ(κ) = ‖(v_κ^⊥)²*φ²‖_∞^{1/2},
//   (c) the combined Coulomb bound
//       4|⟨ξ^(ℓ),𝕂₂ξ^(ℓ-2)⟩| ≤ g(ℓ)+g(ℓ-2)+ν‖ξ^(ℓ-2)‖²+ε(f(ℓ)+f(ℓ-2)),
// and δ(κ) must decrease strictly along the sequence.
// ----------------------------------------------------------------------

struct CoulombSplitRow {
    double kappa = 0.0;
    double delta = 0.0;   // δ(κ)
    double nu = 0.0;      // λ/κ
    double epsilon = 0.0; // ε(κ) used in the combined bound
    int violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
};

struct CoulombSplitReport {
    LemmaReport summary;
    std::vector<CoulombSplitRow> rows;
};

inline CoulombSplitReport check_K2_coulomb(double lambda, const std::vector<double>& kappas,
                                           const RadialSurrogate& surr, const FockBasis& basis,
                                           int samples, std::uint64_t seed,
                                           double epsilon_override = -1.0) {
    if (kappas.empty()) throw std::invalid_argument("check_K2_coulomb: empty kappa sequence");
    if (basis.n_modes() != surr.n_modes())
        throw std::invalid_argument("check_K2_coulomb: basis/surrogate mode mismatch");

    CoulombSplitReport rep;
    rep.summary.lemma_id = "K2-coulomb";
    rep.summary.samples = samples;
    rep.summary.seed = seed;
    rep.summary.parameters["lambda"] = lambda;
    rep.summary.worst_margin = std::numeric_limits<double>::infinity();

    const Eigen::MatrixXd vc = surrogate_kernel_matrix(
        surr, [&](double x, double y) { return radial_avg_coulomb(x, y, lambda); });
    const KernelSet full = surrogate_kernels(surr, vc);
    const Eigen::VectorXd eps0 = Eigen::VectorXd::Zero(basis.n_modes());
    const HamiltonianBlocks fb = assemble_blocks(full, basis, eps0);

    double prev_delta = std::numeric_limits<double>::infinity();
    for (double kappa : kappas) {
        CoulombSplitRow row;
        row.kappa = kappa;
        row.nu = lambda / kappa;
        row.delta = std::sqrt(residual_supnorm(lambda, kappa, surr.phi, surr.grid));
        if (row.delta >= prev_delta)
            throw std::runtime_error("check_K2_coulomb: delta(kappa) not strictly decreasing at kappa=" +
                                     std::to_string(kappa));
        prev_delta = row.delta;
        row.epsilon = epsilon_override > 0.0 ? epsilon_override : 9.0 * row.delta;

        const Eigen::MatrixXd vk = surrogate_kernel_matrix(surr, [&](double x, double y) {
            return radial_avg_yukawa_regular(x, y, lambda, kappa);
        });
        const KernelSet reg = surrogate_kernels(surr, vk);
        const HamiltonianBlocks rb = assemble_blocks(reg, basis, eps0);

        for (int s = 0; s < samples; ++s) {
            const int l = 2 + s % (basis.cutoff() - 1);
            const Eigen::VectorXd hi = random_sector_vector(basis, l, seed, 2 * s);
            const Eigen::VectorXd lo = random_sector_vector(basis, l - 2, seed, 2 * s + 1);

            // (a) Lemma-4 form for the regular part
            const double lhs_a = 4.0 * std::abs(hi.dot(rb.K2 * lo));
            const double margin_a =
                hi.dot(rb.K1 * hi) + lo.dot(rb.K1 * lo) + row.nu - lhs_a;

            // (b) remainder bound
            const double lhs_b = std::abs(hi.dot((fb.K2 - rb.K2) * lo));
            const double margin_b = row.delta * l - lhs_b;

            // (c) combined Coulomb bound
            const double lhs_c = 4.0 * std::abs(hi.dot(fb.K2 * lo));
            const double margin_c = hi.dot(fb.K1 * hi) + lo.dot(fb.K1 * lo) + row.nu +
                                    row.epsilon * (l + (l - 2)) - lhs_c;

            const double worst = std::min({margin_a, margin_b, margin_c});
            row.worst_margin = std::min(row.worst_margin, worst);
            if (worst < -lemma_tolerance) {
                ++row.violations;
                rep.summary.failing.emplace_back(s, l);
            }
        }
        rep.summary.parameters["delta_kappa_" + std::to_string(kappa)] = row.delta;
        rep.summary.violations += row.violations;
        rep.summary.worst_margin = std::min(rep.summary.worst_margin, row.worst_margin);
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace bexc

#endif
