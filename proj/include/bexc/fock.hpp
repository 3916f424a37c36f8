#ifndef BEXC_FOCK_HPP
#define BEXC_FOCK_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace bexc {

using SparseMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Truncated bosonic occupation basis over m excitation modes with total
// occupation Σ n_j ≤ M, enumerated sector by sector (ℓ = Σ n_j) and
// lexicographically inside each sector.  Index lookups use combinadic
// ranking, so two builds with equal (m, M) are bit-identical.
class FockBasis {
public:
    FockBasis(int m, int M, std::int64_t budget = 8'000'000) : m_(m), M_(M) {
        if (m < 1) throw std::invalid_argument("FockBasis: need m >= 1");
        if (M < 0) throw std::invalid_argument("FockBasis: need M >= 0");
        build_binomials();
        const std::int64_t d = binom_(M + m, m);
        if (d > budget)
            throw std::invalid_argument("FockBasis: dimension " + std::to_string(d) +
                                        " exceeds budget " + std::to_string(budget));
        dim_ = int(d);
        sector_offsets_.assign(M + 2, 0);
        for (int l = 0; l <= M; ++l) sector_offsets_[l + 1] = sector_offsets_[l] + int(sector_dim(l));
        occ_.assign(std::size_t(dim_) * m_, 0);
        std::vector<std::uint8_t> state(m_, 0);
        int idx = 0;
        for (int l = 0; l <= M; ++l) enumerate_sector(l, 0, state, idx);
    }

    int n_modes() const { return m_; }
    int cutoff() const { return M_; }
    int dim() const { return dim_; }

    // number of states with exactly ℓ excitations: binom(ℓ+m-1, m-1)
    std::int64_t sector_dim(int l) const { return binom_(l + m_ - 1, m_ - 1); }
    int sector_begin(int l) const { return sector_offsets_[l]; }
    int sector_end(int l) const { return sector_offsets_[l + 1]; }

    int occupation(int idx, int j) const { return occ_[std::size_t(idx) * m_ + j]; }
    int sector_of(int idx) const {
        int s = 0;
        for (int j = 0; j < m_; ++j) s += occupation(idx, j);
        return s;
    }

    // rank of an occupation vector; -1 when Σn > M
    template <typename Vec>
    int index_of(const Vec& n) const {
        int l = 0;
        for (int j = 0; j < m_; ++j) l += int(n[j]);
        if (l > M_) return -1;
        int rank = sector_offsets_[l];
        int rem = l;
        for (int j = 0; j < m_ - 1; ++j) {
            for (int t = 0; t < int(n[j]); ++t) rank += int(binom_(rem - t + m_ - j - 2, m_ - j - 2));
            rem -= int(n[j]);
        }
        return rank;
    }

    // index after a_j† / a_j; -1 when the target leaves the basis
    int raised(int idx, int j) const {
        if (sector_of(idx) + 1 > M_) return -1;
        std::vector<int> n(m_);
        for (int t = 0; t < m_; ++t) n[t] = occupation(idx, t);
        n[j] += 1;
        return index_of(n);
    }
    int lowered(int idx, int j) const {
        if (occupation(idx, j) == 0) return -1;
        std::vector<int> n(m_);
        for (int t = 0; t < m_; ++t) n[t] = occupation(idx, t);
        n[j] -= 1;
        return index_of(n);
    }

private:
    void build_binomials() {
        const int top = M_ + m_ + 2;
        binom_table_.assign(std::size_t(top) * top, 0);
        for (int a = 0; a < top; ++a) {
            at(a, 0) = 1;
            for (int b = 1; b <= a; ++b)
                at(a, b) = at(a - 1, b - 1) + (b <= a - 1 ? at(a - 1, b) : 0);
        }
    }
    std::int64_t& at(int a, int b) { return binom_table_[std::size_t(a) * (M_ + m_ + 2) + b]; }
    std::int64_t binom_(int a, int b) const {
        if (b < 0 || b > a) return 0;
        return binom_table_[std::size_t(a) * (M_ + m_ + 2) + b];
    }
    void enumerate_sector(int remaining, int j, std::vector<std::uint8_t>& state, int& idx) {
        if (j == m_ - 1) {
            state[j] = std::uint8_t(remaining);
            for (int t = 0; t < m_; ++t) occ_[std::size_t(idx) * m_ + t] = state[t];
            ++idx;
            return;
        }
        for (int t = 0; t <= remaining; ++t) {
            state[j] = std::uint8_t(t);
            enumerate_sector(remaining - t, j + 1, state, idx);
        }
    }

    int m_, M_, dim_ = 0;
    std::vector<int> sector_offsets_;
    std::vector<std::uint8_t> occ_;
    std::vector<std::int64_t> binom_table_;
};

enum class LadderKind { Create, Annihilate };

// sparse matrix of a_j† (creation drops amplitudes beyond the cutoff) or a_j
inline SparseMat ladder_elements(const FockBasis& basis, int j, LadderKind kind) {
    if (j < 0 || j >= basis.n_modes()) throw std::invalid_argument("ladder_elements: mode out of range");
    std::vector<Triplet> trip;
    trip.reserve(basis.dim());
    for (int col = 0; col < basis.dim(); ++col) {
        if (kind == LadderKind::Create) {
            const int row = basis.raised(col, j);
            if (row >= 0) trip.emplace_back(row, col, std::sqrt(double(basis.occupation(col, j) + 1)));
        } else {
            const int row = basis.lowered(col, j);
            if (row >= 0) trip.emplace_back(row, col, std::sqrt(double(basis.occupation(col, j))));
        }
    }
    SparseMat a(basis.dim(), basis.dim());
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

// diagonal of the number operator 𝒩
inline Eigen::VectorXd number_diagonal(const FockBasis& basis) {
    Eigen::VectorXd d(basis.dim());
    for (int i = 0; i < basis.dim(); ++i) d(i) = basis.sector_of(i);
    return d;
}

struct FockVector {
    const FockBasis* basis = nullptr;
    Eigen::VectorXd amplitudes;

    FockVector() = default;
    explicit FockVector(const FockBasis& b) : basis(&b), amplitudes(Eigen::VectorXd::Zero(b.dim())) {}
    FockVector(const FockBasis& b, Eigen::VectorXd a) : basis(&b), amplitudes(std::move(a)) {
        if (amplitudes.size() != b.dim()) throw std::invalid_argument("FockVector: size mismatch");
    }

    double norm() const { return amplitudes.norm(); }
};

inline FockVector sector_project(const FockVector& x, int l) {
    if (l < 0 || l > x.basis->cutoff()) throw std::invalid_argument("sector_project: bad sector");
    FockVector out(*x.basis);
    const int b = x.basis->sector_begin(l), e = x.basis->sector_end(l);
    out.amplitudes.segment(b, e - b) = x.amplitudes.segment(b, e - b);
    return out;
}

// P(ℓ) = ‖χ^{(ℓ)}‖² for ℓ = 0..M
inline Eigen::VectorXd sector_norms_squared(const FockBasis& basis, const Eigen::VectorXd& amps) {
    Eigen::VectorXd p(basis.cutoff() + 1);
    for (int l = 0; l <= basis.cutoff(); ++l) {
        const int b = basis.sector_begin(l), e = basis.sector_end(l);
        p(l) = amps.segment(b, e - b).squaredNorm();
    }
    return p;
}

} // namespace bexc

#endif
