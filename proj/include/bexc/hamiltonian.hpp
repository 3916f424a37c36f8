#ifndef BEXC_HAMILTONIAN_HPP
#define BEXC_HAMILTONIAN_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "bexc/fock.hpp"
#include "bexc/kernels.hpp"

namespace bexc {

// N-dependent coefficient functions of the excitation Hamiltonian
inline double coeff_a(int N, int l) { return double(N - l); }
inline double coeff_b(int N, int l) {
    const double p = double(N - l) * double(N - l - 1);
    return std::sqrt(std::max(0.0, p));
}
inline double coeff_c(int N, int l) { return std::sqrt(std::max(0.0, double(N - l))); }

namespace detail {

// O(1) neighbour lookups for the operator assembly
struct LadderTables {
    int m;
    std::vector<int> up, down; // dim*m, -1 when outside the basis

    explicit LadderTables(const FockBasis& b) : m(b.n_modes()) {
        up.resize(std::size_t(b.dim()) * m);
        down.resize(std::size_t(b.dim()) * m);
        for (int i = 0; i < b.dim(); ++i)
            for (int j = 0; j < m; ++j) {
                up[std::size_t(i) * m + j] = b.raised(i, j);
                down[std::size_t(i) * m + j] = b.lowered(i, j);
            }
    }
    int raised(int i, int j) const { return up[std::size_t(i) * m + j]; }
    int lowered(int i, int j) const { return down[std::size_t(i) * m + j]; }
};

inline void check_sector_shift(const SparseMat& a, const FockBasis& basis, int shift,
                               const char* name) {
    for (int c = 0; c < a.outerSize(); ++c)
        for (SparseMat::InnerIterator it(a, c); it; ++it) {
            if (it.value() == 0.0) continue;
            if (basis.sector_of(int(it.row())) - basis.sector_of(int(it.col())) != shift)
                throw std::runtime_error(std::string("assemble_blocks: ") + name +
                                         " violates its sector-shift signature at (" +
                                         std::to_string(it.row()) + "," + std::to_string(it.col()) +
                                         ")");
        }
}

} // namespace detail

// The five operator blocks over the truncated excitation Fock basis.
//   𝕂₀ = Σ_j ε_j a_j†a_j   (diagonal)         𝕂₁ = Σ K1_{ij} a_i†a_j
//   𝕂₂ = ½ Σ K2_{ij} a_i†a_j†                 𝕂₃ = Σ K3_{ijk} a_i†a_j†a_k
//   𝕂₄ = ½ Σ K4_{ijkl} a_i†a_j†a_k a_l
struct HamiltonianBlocks {
    const FockBasis* basis = nullptr;
    SparseMat K0, K1, K2, K3, K4;
    Eigen::VectorXd mode_eps;
};

inline HamiltonianBlocks assemble_blocks(const KernelSet& ks, const FockBasis& basis,
                                         const Eigen::VectorXd& mode_eps) {
    const int m = basis.n_modes();
    if (ks.m != m) throw std::invalid_argument("assemble_blocks: kernel/basis mode count mismatch");
    if (mode_eps.size() != m) throw std::invalid_argument("assemble_blocks: mode_eps size mismatch");
    const int dim = basis.dim();
    const detail::LadderTables tab(basis);

    std::vector<Triplet> t0, t1, t2, t3, t4;
    t0.reserve(dim);

    std::vector<int> occ(m);
    for (int col = 0; col < dim; ++col) {
        for (int j = 0; j < m; ++j) occ[j] = basis.occupation(col, j);

        double diag = 0.0;
        for (int j = 0; j < m; ++j) diag += mode_eps(j) * occ[j];
        if (diag != 0.0) t0.emplace_back(col, col, diag);

        // K1: a_i† a_j
        for (int j = 0; j < m; ++j) {
            if (occ[j] == 0) continue;
            const int mid = tab.lowered(col, j);
            const double fj = std::sqrt(double(occ[j]));
            for (int i = 0; i < m; ++i) {
                if (ks.K1(i, j) == 0.0) continue;
                const int row = tab.raised(mid, i);
                const double fi = std::sqrt(double(basis.occupation(mid, i) + 1));
                t1.emplace_back(row, col, ks.K1(i, j) * fj * fi);
            }
        }

        // K2: ½ a_i† a_j†
        if (basis.sector_of(col) + 2 <= basis.cutoff()) {
            for (int j = 0; j < m; ++j) {
                for (int i = 0; i < m; ++i) {
                    if (ks.K2(i, j) == 0.0) continue;
                    const int mid = tab.raised(col, j);
                    const double fj = std::sqrt(double(occ[j] + 1));
                    const int row = tab.raised(mid, i);
                    const double fi = std::sqrt(double(basis.occupation(mid, i) + 1));
                    t2.emplace_back(row, col, 0.5 * ks.K2(i, j) * fj * fi);
                }
            }
        }

        // K3: a_i† a_j† a_k
        if (basis.sector_of(col) + 1 <= basis.cutoff()) {
            for (int k = 0; k < m; ++k) {
                if (occ[k] == 0) continue;
                const int m1 = tab.lowered(col, k);
                const double fk = std::sqrt(double(occ[k]));
                for (int j = 0; j < m; ++j) {
                    const int m2 = tab.raised(m1, j);
                    const double fj = std::sqrt(double(basis.occupation(m1, j) + 1));
                    for (int i = 0; i < m; ++i) {
                        const double kv = ks.k3(i, j, k);
                        if (kv == 0.0) continue;
                        const int row = tab.raised(m2, i);
                        const double fi = std::sqrt(double(basis.occupation(m2, i) + 1));
                        t3.emplace_back(row, col, kv * fk * fj * fi);
                    }
                }
            }
        }

        // K4: ½ a_i† a_j† a_k a_l
        for (const auto& e : ks.K4) {
            if (occ[e.l] == 0) continue;
            const int m1 = tab.lowered(col, e.l);
            if (basis.occupation(m1, e.k) == 0) continue;
            const double fl = std::sqrt(double(occ[e.l]));
            const int m2 = tab.lowered(m1, e.k);
            const double fk = std::sqrt(double(basis.occupation(m1, e.k)));
            const int m3 = tab.raised(m2, e.j);
            const double fj = std::sqrt(double(basis.occupation(m2, e.j) + 1));
            const int row = tab.raised(m3, e.i);
            const double fi = std::sqrt(double(basis.occupation(m3, e.i) + 1));
            t4.emplace_back(row, col, 0.5 * e.value * fl * fk * fj * fi);
        }
    }

    HamiltonianBlocks blocks;
    blocks.basis = &basis;
    blocks.mode_eps = mode_eps;
    auto build = [dim](std::vector<Triplet>& t) {
        SparseMat a(dim, dim);
        a.setFromTriplets(t.begin(), t.end());
        a.makeCompressed();
        return a;
    };
    blocks.K0 = build(t0);
    blocks.K1 = build(t1);
    blocks.K2 = build(t2);
    blocks.K3 = build(t3);
    blocks.K4 = build(t4);

    detail::check_sector_shift(blocks.K0, basis, 0, "K0");
    detail::check_sector_shift(blocks.K1, basis, 0, "K1");
    detail::check_sector_shift(blocks.K2, basis, +2, "K2");
    detail::check_sector_shift(blocks.K3, basis, +1, "K3");
    detail::check_sector_shift(blocks.K4, basis, 0, "K4");
    return blocks;
}

enum class Variant { Full, Bogoliubov };

struct ExcitationHamiltonian {
    int N = 0;
    Variant variant = Variant::Full;
    const FockBasis* basis = nullptr;
    SparseMat H;
};

inline double hermiticity_defect(const SparseMat& h) {
    SparseMat d = SparseMat(h.transpose()) - h;
    double dev = 0.0;
    for (int c = 0; c < d.outerSize(); ++c)
        for (SparseMat::InnerIterator it(d, c); it; ++it) dev = std::max(dev, std::abs(it.value()));
    return dev;
}

namespace detail {

// X·f(𝒩): the number function acts on the ket sector, i.e. scales column ℓ
// by f(ℓ) before the block shifts sectors
inline SparseMat apply_number_function(const SparseMat& x, const FockBasis& basis,
                                       const std::function<double(int)>& f) {
    Eigen::VectorXd d(basis.dim());
    for (int i = 0; i < basis.dim(); ++i) d(i) = f(basis.sector_of(i));
    return x * d.asDiagonal();
}

} // namespace detail

// ℍ = 𝕂₀ + (N-1)⁻¹ [ 𝕂₁𝔞(𝒩) + (𝕂₂𝔟(𝒩) + h.c.) + (𝕂₃𝔠(𝒩) + h.c.) + 𝕂₄ ]
inline ExcitationHamiltonian assemble_full(int N, const HamiltonianBlocks& blocks) {
    const FockBasis& basis = *blocks.basis;
    if (N < 2) throw std::invalid_argument("assemble_full: need N >= 2");
    if (N <= basis.cutoff())
        throw std::invalid_argument("assemble_full: need N > M (got N=" + std::to_string(N) +
                                    ", M=" + std::to_string(basis.cutoff()) + ")");
    const double s = 1.0 / double(N - 1);
    SparseMat k1a = detail::apply_number_function(blocks.K1, basis,
                                                  [N](int l) { return coeff_a(N, l); });
    SparseMat k2b = detail::apply_number_function(blocks.K2, basis,
                                                  [N](int l) { return coeff_b(N, l); });
    SparseMat k3c = detail::apply_number_function(blocks.K3, basis,
                                                  [N](int l) { return coeff_c(N, l); });
    ExcitationHamiltonian ham;
    ham.N = N;
    ham.variant = Variant::Full;
    ham.basis = &basis;
    ham.H = blocks.K0 + s * (k1a + SparseMat(k2b + SparseMat(k2b.transpose())) +
                             SparseMat(k3c + SparseMat(k3c.transpose())) + blocks.K4);
    ham.H.makeCompressed();
    const double dev = hermiticity_defect(ham.H);
    if (dev > 1e-12)
        throw std::runtime_error("assemble_full: Hermiticity defect " + std::to_string(dev));
    return ham;
}

// ℍ₀ = 𝕂₀ + 𝕂₁ + 𝕂₂ + 𝕂₂†
inline ExcitationHamiltonian assemble_bogoliubov(const HamiltonianBlocks& blocks) {
    ExcitationHamiltonian ham;
    ham.variant = Variant::Bogoliubov;
    ham.basis = blocks.basis;
    ham.H = blocks.K0 + blocks.K1 + blocks.K2 + SparseMat(blocks.K2.transpose());
    ham.H.makeCompressed();
    const double dev = hermiticity_defect(ham.H);
    if (dev > 1e-12)
        throw std::runtime_error("assemble_bogoliubov: Hermiticity defect " + std::to_string(dev));
    return ham;
}

// total momentum dΓ(p) diagonal, defined on momentum-labeled mode sets
inline Eigen::VectorXd momentum_diagonal(const FockBasis& basis, const Eigen::VectorXi& momenta) {
    if (momenta.size() != basis.n_modes())
        throw std::invalid_argument("momentum_diagonal: momenta size mismatch");
    Eigen::VectorXd d = Eigen::VectorXd::Zero(basis.dim());
    for (int i = 0; i < basis.dim(); ++i)
        for (int j = 0; j < basis.n_modes(); ++j) d(i) += momenta(j) * basis.occupation(i, j);
    return d;
}

// max entry of [H, dΓ(p)]; zero when every block conserves momentum
inline double momentum_commutator_norm(const SparseMat& h, const Eigen::VectorXd& pdiag) {
    double dev = 0.0;
    for (int c = 0; c < h.outerSize(); ++c)
        for (SparseMat::InnerIterator it(h, c); it; ++it)
            dev = std::max(dev, std::abs(it.value() * (pdiag(it.col()) - pdiag(it.row()))));
    return dev;
}

} // namespace bexc

#endif
