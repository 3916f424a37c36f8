#ifndef BEXC_DECAY_HPP
#define BEXC_DECAY_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bexc/solver.hpp"

namespace bexc {

enum class ProfileSource { Full, Bogoliubov, Oracle };

inline std::string to_string(ProfileSource s) {
    switch (s) {
        case ProfileSource::Full: return "full";
        case ProfileSource::Bogoliubov: return "bogoliubov";
        case ProfileSource::Oracle: return "oracle";
    }
    return "?";
}

// Sector-number distribution P(ℓ) = ‖χ^{(ℓ)}‖² together with f(ℓ) = ℓP(ℓ).
// valid_max marks the last ℓ unaffected by the occupation cutoff; windowed
// analyses must stay inside it.
struct DecayProfile {
    Eigen::VectorXd P;
    Eigen::VectorXd f;
    int valid_max = 0;
    ProfileSource source = ProfileSource::Full;

    int max_ell() const { return int(P.size()) - 1; }
};

inline DecayProfile sector_distribution(const GroundState& gs, const FockBasis& basis,
                                        ProfileSource source, int cutoff_margin = 4) {
    if (std::abs(gs.vector.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("sector_distribution: state not normalized");
    DecayProfile prof;
    prof.P = sector_norms_squared(basis, gs.vector);
    prof.f.resize(prof.P.size());
    for (int l = 0; l < prof.P.size(); ++l) prof.f(l) = l * prof.P(l);
    prof.valid_max = std::max(0, basis.cutoff() - cutoff_margin);
    prof.source = source;
    return prof;
}

inline DecayProfile profile_from_oracle(const BogoliubovOracle& oracle) {
    DecayProfile prof;
    prof.P = oracle.P;
    prof.f.resize(prof.P.size());
    for (int l = 0; l < prof.P.size(); ++l) prof.f(l) = l * prof.P(l);
    prof.valid_max = prof.max_ell();
    prof.source = ProfileSource::Oracle;
    return prof;
}

// F_L(ℓ) = Σ_{k=ℓ-L}^{ℓ+L} f(k); the window must lie inside the trusted
// range — it is never padded
inline double compute_FL(const DecayProfile& prof, int L, int ell) {
    if (L < 1) throw std::invalid_argument("compute_FL: need L >= 1");
    if (ell - L < 0 || ell + L > prof.valid_max)
        throw std::invalid_argument("compute_FL: window [" + std::to_string(ell - L) + "," +
                                    std::to_string(ell + L) + "] at ell=" + std::to_string(ell) +
                                    " leaves the valid range [0," +
                                    std::to_string(prof.valid_max) + "]");
    double s = 0.0;
    for (int k = ell - L; k <= ell + L; ++k) s += prof.f(k);
    return s;
}

struct DifferenceInequalityRow {
    int ell;
    double FL;
    double ratio; // [F_L(ℓ+L)+F_L(ℓ-L)] / F_L(ℓ)
};

struct DifferenceInequalityReport {
    int L = 0;
    int ell_lo = 0, ell_hi = 0;
    double sigma_star = 0.0;             // min of the ratios; a certificate needs > 2
    double mu_star = 0.0;                // empirical constant of the windowed bound, NaN if unprobed
    std::vector<DifferenceInequalityRow> rows;
};

// σ* = min_ℓ [F_L(ℓ+L) + F_L(ℓ-L)] / F_L(ℓ) over ℓ ∈ [ell_lo, ell_hi]
inline DifferenceInequalityReport verify_difference_inequality(const DecayProfile& prof, int L,
                                                               int ell_lo, int ell_hi) {
    if (ell_hi < ell_lo) throw std::invalid_argument("verify_difference_inequality: empty range");
    DifferenceInequalityReport rep;
    rep.L = L;
    rep.ell_lo = ell_lo;
    rep.ell_hi = ell_hi;
    rep.sigma_star = std::numeric_limits<double>::infinity();
    rep.mu_star = std::numeric_limits<double>::quiet_NaN();
    for (int ell = ell_lo; ell <= ell_hi; ++ell) {
        const double fc = compute_FL(prof, L, ell);
        if (fc == 0.0)
            throw std::runtime_error("verify_difference_inequality: degenerate window F_L(" +
                                     std::to_string(ell) + ") = 0");
        const double ratio = (compute_FL(prof, L, ell + L) + compute_FL(prof, L, ell - L)) / fc;
        rep.rows.push_back({ell, fc, ratio});
        rep.sigma_star = std::min(rep.sigma_star, ratio);
        // the intermediate windowed bound μ F_L(ℓ) ≤ f(ℓ+L+2)+f(ℓ+L+1)+f(ℓ-L-1)+f(ℓ-L-2)
        if (ell - L - 2 >= 0 && ell + L + 2 <= prof.valid_max) {
            const double mu = (prof.f(ell + L + 2) + prof.f(ell + L + 1) + prof.f(ell - L - 1) +
                               prof.f(ell - L - 2)) /
                              fc;
            if (std::isnan(rep.mu_star) || mu < rep.mu_star) rep.mu_star = mu;
        }
    }
    return rep;
}

struct DecayCertificate {
    int L = 0;
    double sigma = 0.0;
    double mu = std::numeric_limits<double>::quiet_NaN();
    int j_lo = 1, j_hi = 0; // certified stride-index range of G(j) = F_L(jL)
    int ell0 = -1;          // minimum location in stride units; j_hi means "none in range"
    double C = 0.0;         // P(ℓ) ≤ C e^{-εℓ} on the covered sector range
    double epsilon = 0.0;
    bool verified = false;
};

// Convexity-to-envelope certificate on G(j), j = 1..J (G[0] = G(1)).
// Verifies the difference inequality σG(j) ≤ G(j+1)+G(j-1) on the interior,
// locates the unique minimum, then checks both envelopes pointwise:
//   decay   G(j) ≤ G(1)/(σ-1)^{j-1}        for 1 ≤ j ≤ j₀
//   growth  G(k) ≥ (σ-1)^{k-j} G(j)        for j₀ ≤ j ≤ k ≤ J
inline DecayCertificate exponential_certificate(const std::vector<double>& G, double sigma,
                                                int stride_L, double tol = 1e-12) {
    if (!(sigma > 2.0))
        throw std::invalid_argument("exponential_certificate: need sigma > 2, got " +
                                    std::to_string(sigma));
    const int J = int(G.size());
    if (J < 3) throw std::invalid_argument("exponential_certificate: need at least 3 points");
    auto g = [&](int j) { return G[j - 1]; }; // 1-based stride index
    for (int j = 1; j <= J; ++j)
        if (g(j) < 0.0) throw std::invalid_argument("exponential_certificate: negative G");

    // precondition: the second-difference inequality, verified not assumed
    for (int j = 2; j <= J - 1; ++j) {
        const double slack = g(j + 1) + g(j - 1) - sigma * g(j);
        if (slack < -tol * std::max(1.0, g(j)))
            throw std::runtime_error("exponential_certificate: difference inequality violated at j=" +
                                     std::to_string(j) + " (slack " + std::to_string(slack) + ")");
    }

    DecayCertificate cert;
    cert.L = stride_L;
    cert.sigma = sigma;
    cert.j_lo = 1;
    cert.j_hi = J;

    int j0 = 1;
    for (int j = 2; j <= J; ++j)
        if (g(j) < g(j0)) j0 = j;
    cert.ell0 = j0;

    for (int j = 1; j <= j0; ++j) {
        const double env = g(1) / std::pow(sigma - 1.0, j - 1);
        if (g(j) > env * (1.0 + 1e-12) + tol)
            throw std::runtime_error("exponential_certificate: decay envelope violated at j=" +
                                     std::to_string(j));
    }
    for (int j = j0; j <= J; ++j)
        for (int k = j; k <= J; ++k) {
            const double lower = std::pow(sigma - 1.0, k - j) * g(j);
            if (g(k) < lower * (1.0 - 1e-12) - tol)
                throw std::runtime_error("exponential_certificate: growth envelope violated at (" +
                                         std::to_string(j) + "," + std::to_string(k) + ")");
        }

    // sector-level envelope: window j covers k ≤ (j+1)L, so
    // P(k) ≤ G(1)(σ-1)² · exp(-ln(σ-1)/L · k)
    cert.epsilon = std::log(sigma - 1.0) / stride_L;
    cert.C = g(1) * (sigma - 1.0) * (sigma - 1.0);
    cert.verified = true;
    return cert;
}

// builds G(j) = F_L(jL) for j = 1.. and runs the certificate, then re-verifies
// the resulting P-envelope pointwise on the covered sectors
inline DecayCertificate certify_profile(const DecayProfile& prof, int L, double sigma,
                                        double mu = std::numeric_limits<double>::quiet_NaN()) {
    std::vector<double> G;
    for (int j = 1; (j + 1) * L <= prof.valid_max; ++j) G.push_back(compute_FL(prof, L, j * L));
    DecayCertificate cert = exponential_certificate(G, sigma, L);
    cert.mu = mu;
    const int covered = std::min(prof.valid_max, (cert.ell0 + 1) * L);
    for (int k = 0; k <= covered; ++k) {
        if (prof.P(k) > cert.C * std::exp(-cert.epsilon * k) * (1.0 + 1e-12) + 1e-15)
            throw std::runtime_error("certify_profile: P-envelope violated at ell=" +
                                     std::to_string(k));
    }
    return cert;
}

// independent re-verification pass over an emitted certificate
inline bool verify_certificate(const DecayProfile& prof, const DecayCertificate& cert) {
    if (!cert.verified) return false;
    for (int j = 1; j <= cert.ell0; ++j) {
        if ((j + 1) * cert.L > prof.valid_max) break;
        const double gj = compute_FL(prof, cert.L, j * cert.L);
        const double g1 = compute_FL(prof, cert.L, cert.L);
        if (gj > g1 / std::pow(cert.sigma - 1.0, j - 1) * (1.0 + 1e-10) + 1e-15) return false;
    }
    const int covered = std::min(prof.valid_max, (cert.ell0 + 1) * cert.L);
    for (int k = 0; k <= covered; ++k)
        if (prof.P(k) > cert.C * std::exp(-cert.epsilon * k) * (1.0 + 1e-10) + 1e-15) return false;
    return true;
}

enum class Parity { Even, Odd, All };

struct DecayFit {
    double C = 0.0;
    double epsilon = 0.0;
    double r_squared = 0.0;
    int points = 0;
};

// least-squares line through (ℓ, ln P(ℓ)) on a parity class
inline DecayFit fit_decay_rate(const DecayProfile& prof, int ell_lo, int ell_hi, Parity parity) {
    std::vector<double> xs, ys;
    for (int l = ell_lo; l <= ell_hi && l <= prof.max_ell(); ++l) {
        if (parity == Parity::Even && l % 2 != 0) continue;
        if (parity == Parity::Odd && l % 2 != 1) continue;
        if (!(prof.P(l) > 0.0))
            throw std::invalid_argument("fit_decay_rate: non-positive P at ell=" + std::to_string(l));
        xs.push_back(l);
        ys.push_back(std::log(prof.P(l)));
    }
    const int n = int(xs.size());
    if (n < 3) throw std::invalid_argument("fit_decay_rate: fewer than 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    for (int i = 0; i < n; ++i) {
        const double e = ys[i] - (intercept + slope * xs[i]);
        ss_res += e * e;
        const double d = ys[i] - sy / n;
        ss_tot += d * d;
    }
    DecayFit fit;
    fit.C = std::exp(intercept);
    fit.epsilon = -slope;
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.points = n;
    return fit;
}

struct TailReport {
    bool tail_empty = false;
    double tail_norm2 = 0.0;
    double rayleigh_tail = 0.0;   // ⟨χ>,(ℍ-E)χ>⟩ / ‖χ>‖²
    double k0_rayleigh = 0.0;     // ⟨χ>,𝕂₀χ>⟩ / ‖χ>‖²
    double k0_lower_bound = 0.0;  // τ(cut+1)
    double coupling_k2 = 0.0;     // |⟨χ>, ℍ_{K2} χ≤⟩|
    double coupling_k3 = 0.0;
    double coupling_diag = 0.0;   // cross term of all sector-preserving parts (must vanish)
};

// Splits χ = χ≤ + χ> at the sector cut and checks that the tail is a
// high-energy component: 𝕂₀ pins its Rayleigh quotient above τ(cut+1) and
// only the 𝕂₂/𝕂₃ blocks couple the two parts.
inline TailReport tail_energy_check(const ExcitationHamiltonian& ham,
                                    const HamiltonianBlocks& blocks, const GroundState& gs,
                                    int cut, double tau) {
    const FockBasis& basis = *ham.basis;
    if (cut <= 0) throw std::invalid_argument("tail_energy_check: need cut > 0");
    TailReport rep;
    rep.k0_lower_bound = tau * (cut + 1);

    Eigen::VectorXd low = gs.vector, high = gs.vector;
    for (int i = 0; i < basis.dim(); ++i) {
        if (basis.sector_of(i) > cut) low(i) = 0.0;
        else high(i) = 0.0;
    }
    rep.tail_norm2 = high.squaredNorm();
    if (rep.tail_norm2 == 0.0) {
        rep.tail_empty = true;
        return rep;
    }

    rep.rayleigh_tail = (high.dot(ham.H * high) - gs.energy * rep.tail_norm2) / rep.tail_norm2;
    rep.k0_rayleigh = high.dot(blocks.K0 * high) / rep.tail_norm2;
    if (rep.k0_rayleigh < rep.k0_lower_bound - 1e-10)
        throw std::runtime_error("tail_energy_check: K0 Rayleigh quotient " +
                                 std::to_string(rep.k0_rayleigh) + " below tau*(cut+1)=" +
                                 std::to_string(rep.k0_lower_bound));

    const int N = ham.N;
    if (ham.variant == Variant::Full) {
        const double s = 1.0 / double(N - 1);
        SparseMat k2b = detail::apply_number_function(blocks.K2, basis,
                                                      [N](int l) { return coeff_b(N, l); });
        SparseMat k3c = detail::apply_number_function(blocks.K3, basis,
                                                      [N](int l) { return coeff_c(N, l); });
        SparseMat k1a = detail::apply_number_function(blocks.K1, basis,
                                                      [N](int l) { return coeff_a(N, l); });
        rep.coupling_k2 = std::abs(high.dot(s * (k2b * low)) + high.dot(s * (SparseMat(k2b.transpose()) * low)));
        rep.coupling_k3 = std::abs(high.dot(s * (k3c * low)) + high.dot(s * (SparseMat(k3c.transpose()) * low)));
        rep.coupling_diag = std::abs(high.dot(blocks.K0 * low)) +
                            std::abs(high.dot(s * (k1a * low))) +
                            std::abs(high.dot(s * (blocks.K4 * low)));
    } else {
        rep.coupling_k2 =
            std::abs(high.dot(blocks.K2 * low) + high.dot(SparseMat(blocks.K2.transpose()) * low));
        rep.coupling_k3 = 0.0;
        rep.coupling_diag =
            std::abs(high.dot(blocks.K0 * low)) + std::abs(high.dot(blocks.K1 * low));
    }
    if (rep.coupling_diag > 1e-13)
        throw std::runtime_error("tail_energy_check: sector-preserving blocks couple the parts");
    return rep;
}

// F_{L+j}(ℓ) ≥ F_L(ℓ) for j ≥ 0 whenever both windows are admissible
inline bool monotone_window_property(const DecayProfile& prof, int L, int ell, int j_max) {
    double prev = compute_FL(prof, L, ell);
    for (int j = 1; j <= j_max; ++j) {
        if (ell - (L + j) < 0 || ell + L + j > prof.valid_max) break;
        const double cur = compute_FL(prof, L + j, ell);
        if (cur < prev - 1e-14) return false;
        prev = cur;
    }
    return true;
}

} // namespace bexc

#endif
