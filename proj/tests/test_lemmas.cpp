#include <catch2/catch_amalgamated.hpp>

#include "bexc/lemmas.hpp"

using namespace bexc;

namespace {

struct Setup {
    HartreeSolution sol;
    KernelSet ks;
};

Setup torus(std::map<int, double> coeffs, int n, int m) {
    Setup s;
    HartreeProblem p;
    p.grid = Grid1D(n, 2.0 * pi);
    p.v_ext = Eigen::VectorXd::Zero(n);
    p.v = make_bounded_potential(coeffs, p.grid);
    s.sol = solve_hartree(p, 1e-12, 20000, m);
    s.ks = compute_kernels(s.sol, p.v, m);
    return s;
}

} // namespace

TEST_CASE("random sector vectors are deterministic and normalized") {
    FockBasis b(3, 6);
    Eigen::VectorXd a = random_sector_vector(b, 4, 42, 7);
    Eigen::VectorXd c = random_sector_vector(b, 4, 42, 7);
    REQUIRE((a - c).norm() == 0.0);
    REQUIRE(a.norm() == Catch::Approx(1.0).epsilon(1e-14));
    for (int i = 0; i < b.dim(); ++i)
        if (b.sector_of(i) != 4) REQUIRE(a(i) == 0.0);
    Eigen::VectorXd d = random_sector_vector(b, 4, 43, 7);
    REQUIRE((a - d).norm() > 0.1);
}

TEST_CASE("explicit-constant lemmas: zero violations on the desk-style config") {
    Setup s = torus({{-2, 1.0}, {-1, 2.0}, {0, 4.0}, {1, 2.0}, {2, 1.0}}, 48, 4);
    FockBasis b(4, 8);
    HamiltonianBlocks blocks = assemble_blocks(s.ks, b, s.sol.mode_eps);

    SECTION("K1 bound") {
        LemmaReport rep = check_K1_bound(blocks, s.ks.sup_v2_phi2, 300, 11);
        REQUIRE(rep.violations == 0);
        REQUIRE(rep.worst_margin >= 0.0);
    }
    SECTION("K2 bound") {
        LemmaReport rep = check_K2_bound(blocks, s.ks.v0, 300, 12);
        REQUIRE(rep.violations == 0);
        REQUIRE(rep.worst_margin >= 0.0);
    }
    SECTION("K0 gap, sector-1 margin is exactly zero") {
        LemmaReport rep = check_K0_gap(blocks, s.sol.tau);
        REQUIRE(rep.violations == 0);
        // sector 1 contains a state with diagonal exactly tau
        double min1 = std::numeric_limits<double>::infinity();
        for (int i = b.sector_begin(1); i < b.sector_end(1); ++i)
            min1 = std::min(min1, blocks.K0.coeff(i, i));
        REQUIRE(min1 - s.sol.tau == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("replay determinism: identical seed, identical report") {
        LemmaReport a = check_K1_bound(blocks, s.ks.sup_v2_phi2, 100, 5);
        LemmaReport c = check_K1_bound(blocks, s.ks.sup_v2_phi2, 100, 5);
        REQUIRE(a.worst_margin == c.worst_margin);
        REQUIRE(a.violations == c.violations);
    }
}

TEST_CASE("zero potential trivializes every bound") {
    Setup s = torus({}, 48, 4);
    FockBasis b(4, 6);
    HamiltonianBlocks blocks = assemble_blocks(s.ks, b, s.sol.mode_eps);
    REQUIRE(check_K1_bound(blocks, 0.0, 50, 1).violations == 0);
    REQUIRE(check_K2_bound(blocks, 0.0, 50, 1).violations == 0);
    REQUIRE(check_K3_bound(blocks, 0.2, 50, 100, 1).empirical_constant == 0.0);
    REQUIRE(check_K4_bound(blocks, 0.2, 50, 100, 1).empirical_constant == 0.0);
}

TEST_CASE("C-form lemmas") {
    Setup s = torus({{-2, 1.0}, {-1, 2.0}, {0, 4.0}, {1, 2.0}, {2, 1.0}}, 48, 4);
    FockBasis b(4, 8);
    HamiltonianBlocks blocks = assemble_blocks(s.ks, b, s.sol.mode_eps);

    SECTION("K3 annihilates the vacuum sector") {
        Eigen::VectorXd vac = Eigen::VectorXd::Zero(b.dim());
        vac(0) = 1.0;
        REQUIRE((blocks.K3 * vac).norm() == 0.0);
    }
    SECTION("K4 expectation vanishes on sectors 0 and 1") {
        for (int l : {0, 1}) {
            const Eigen::VectorXd xi = random_sector_vector(b, l, 3, 0);
            REQUIRE(std::abs(xi.dot(blocks.K4 * xi)) < 1e-15);
        }
    }
    SECTION("empirical constants finite and sample-size stable") {
        LemmaReport c500 = check_K3_bound(blocks, 0.16, 50, 500, 21);
        LemmaReport c2000 = check_K3_bound(blocks, 0.16, 50, 2000, 21);
        REQUIRE(std::isfinite(c500.empirical_constant));
        REQUIRE(c2000.empirical_constant <= c500.empirical_constant * 1.10 + 1e-12);
        REQUIRE(c500.empirical_constant <= c2000.empirical_constant + 1e-12);

        LemmaReport d500 = check_K4_bound(blocks, 0.16, 50, 500, 22);
        LemmaReport d2000 = check_K4_bound(blocks, 0.16, 50, 2000, 22);
        REQUIRE(std::isfinite(d500.empirical_constant));
        REQUIRE(d2000.empirical_constant <= d500.empirical_constant * 1.10 + 1e-12);
    }
}

TEST_CASE("coulomb splitting checks on the radial surrogate") {
    RadialGrid rg = make_radial_grid_for_kappa(0.125, 20.0, 400);
    RadialSurrogate surr = build_radial_surrogate(1.0, rg, 4);
    FockBasis b(4, 6);

    SECTION("combined bound: zero violations along the kappa sequence") {
        CoulombSplitReport rep =
            check_K2_coulomb(1.0, {1.0, 0.5, 0.25, 0.125}, surr, b, 150, 31);
        REQUIRE(rep.summary.violations == 0);
        REQUIRE(rep.rows.size() == 4);
        for (std::size_t i = 1; i < rep.rows.size(); ++i)
            REQUIRE(rep.rows[i].delta < rep.rows[i - 1].delta);
        for (const auto& row : rep.rows) REQUIRE(row.worst_margin >= 0.0);
    }
    SECTION("non-monotone kappa sequence is rejected") {
        REQUIRE_THROWS_AS(check_K2_coulomb(1.0, {0.25, 0.5}, surr, b, 10, 1),
                          std::runtime_error);
    }
    SECTION("large epsilon subsumes the inequality") {
        CoulombSplitReport rep = check_K2_coulomb(1.0, {1.0}, surr, b, 100, 32, 50.0);
        REQUIRE(rep.summary.violations == 0);
        REQUIRE(rep.rows[0].worst_margin > 1.0);
    }
    SECTION("K1 bound with the Coulomb constant from the radial machinery") {
        const Eigen::MatrixXd vc = surrogate_kernel_matrix(
            surr, [&](double x, double y) { return radial_avg_coulomb(x, y, 1.0); });
        KernelSet full = surrogate_kernels(surr, vc);
        HamiltonianBlocks blocks = assemble_blocks(full, b, Eigen::VectorXd::Zero(4));
        const double sup = coulomb_sq_convolution_supnorm(1.0, surr.phi, surr.grid);
        LemmaReport rep = check_K1_bound(blocks, sup, 200, 41);
        REQUIRE(rep.violations == 0);
    }
    SECTION("bare-interaction quartic of the surrogate Coulomb kernel is PSD") {
        const Eigen::MatrixXd vc = surrogate_kernel_matrix(
            surr, [&](double x, double y) { return radial_avg_coulomb(x, y, 1.0); });
        KernelSet full = surrogate_kernels(surr, vc);
        HamiltonianBlocks plain =
            assemble_blocks(with_plain_quartic(full), b, Eigen::VectorXd::Zero(4));
        for (int l : {2, 3, 4}) {
            const int lo = b.sector_begin(l), sz = b.sector_end(l) - lo;
            Eigen::MatrixXd sector = Eigen::MatrixXd(plain.K4).block(lo, lo, sz, sz);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sector);
            REQUIRE(es.eigenvalues()(0) >= -1e-10);
        }
    }
}
