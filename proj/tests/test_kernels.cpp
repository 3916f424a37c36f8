#include <catch2/catch_amalgamated.hpp>

#include "bexc/kernels.hpp"

using namespace bexc;

namespace {

HartreeSolution solved_torus(std::map<int, double> coeffs, int n = 64, int m = 6) {
    HartreeProblem p;
    p.grid = Grid1D(n, 2.0 * pi);
    p.v_ext = Eigen::VectorXd::Zero(n);
    p.v = make_bounded_potential(coeffs, p.grid);
    return solve_hartree(p, 1e-12, 20000, m);
}

} // namespace

TEST_CASE("zero potential gives all-zero kernels") {
    HartreeSolution sol = solved_torus({});
    PairPotential z = make_bounded_potential({}, sol.grid);
    KernelSet ks = compute_kernels(sol, z, 6);
    REQUIRE(ks.K1.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(ks.K2.cwiseAbs().maxCoeff() == 0.0);
    for (double v : ks.K3) REQUIRE(v == 0.0);
    REQUIRE(ks.K4.empty());
    REQUIRE(ks.v0 == 0.0);
}

TEST_CASE("homogeneous torus kernels: plane-wave structure") {
    std::map<int, double> coeffs{{-2, 1.0}, {-1, 2.0}, {0, 3.0}, {1, 2.0}, {2, 1.0}};
    HartreeSolution sol = solved_torus(coeffs);
    PairPotential v = make_bounded_potential(coeffs, sol.grid);
    KernelSet ks = compute_kernels(sol, v, 6);
    const double L = 2.0 * pi;

    SECTION("K1 diagonal with entries v̂(p)/L") {
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < 6; ++j) {
                if (i == j) {
                    const int p = sol.mode_momentum(i);
                    REQUIRE(ks.K1(i, i) == Catch::Approx(v.fourier_coeff(p) / L).margin(1e-12));
                } else {
                    REQUIRE(std::abs(ks.K1(i, j)) < 1e-12);
                }
            }
        }
    }
    SECTION("K2 couples only (p,-p)") {
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                const int pi_ = sol.mode_momentum(i), pj = sol.mode_momentum(j);
                if (pi_ + pj == 0)
                    REQUIRE(ks.K2(i, j) == Catch::Approx(v.fourier_coeff(pi_) / L).margin(1e-12));
                else
                    REQUIRE(std::abs(ks.K2(i, j)) < 1e-12);
            }
    }
    SECTION("K2 symmetric, K1 symmetric PSD") {
        REQUIRE((ks.K2 - ks.K2.transpose()).cwiseAbs().maxCoeff() < 1e-13);
        REQUIRE((ks.K1 - ks.K1.transpose()).cwiseAbs().maxCoeff() < 1e-13);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ks.K1);
        REQUIRE(es.eigenvalues()(0) >= -1e-12);
    }
    SECTION("K3 and K4 conserve momentum") {
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                for (int k = 0; k < 6; ++k) {
                    const int net =
                        sol.mode_momentum(i) + sol.mode_momentum(j) - sol.mode_momentum(k);
                    if (net != 0) REQUIRE(ks.k3(i, j, k) == 0.0);
                }
        for (const auto& e : ks.K4) {
            REQUIRE(sol.mode_momentum(e.i) + sol.mode_momentum(e.j) ==
                    sol.mode_momentum(e.k) + sol.mode_momentum(e.l));
        }
    }
    SECTION("quadrature path agrees with the analytic fast path") {
        // force the quadrature path by dropping momentum labels
        HartreeSolution plain = sol;
        plain.momentum_labeled = false;
        KernelSet kq = compute_kernels(plain, v, 6);
        REQUIRE((kq.K1 - ks.K1).cwiseAbs().maxCoeff() < 1e-9);
        REQUIRE((kq.K2 - ks.K2).cwiseAbs().maxCoeff() < 1e-9);
        for (std::size_t t = 0; t < kq.K3.size(); ++t)
            REQUIRE(std::abs(kq.K3[t] - ks.K3[t]) < 1e-9);
    }
    SECTION("K4 symmetric under (12) and (34) swaps") {
        auto value = [&](int i, int j, int k, int l) {
            for (const auto& e : ks.K4)
                if (e.i == i && e.j == j && e.k == k && e.l == l) return e.value;
            return 0.0;
        };
        for (const auto& e : ks.K4) {
            REQUIRE(value(e.j, e.i, e.l, e.k) == Catch::Approx(e.value).margin(1e-12));
            REQUIRE(value(e.k, e.l, e.i, e.j) == Catch::Approx(e.value).margin(1e-12));
        }
    }
}

TEST_CASE("W has zero mean against phi^2 in each argument") {
    std::map<int, double> coeffs{{-1, 1.5}, {0, 2.0}, {1, 1.5}};
    HartreeSolution sol = solved_torus(coeffs, 48, 4);
    PairPotential v = make_bounded_potential(coeffs, sol.grid);
    const Grid1D& g = sol.grid;

    Eigen::VectorXd rho = sol.phi.array().square();
    Eigen::VectorXd c = convolve_with_density(v, rho, g);
    const double cbar = g.inner(sol.phi, c.cwiseProduct(sol.phi));
    for (int a = 0; a < g.n; ++a) {
        double acc = 0.0;
        for (int b = 0; b < g.n; ++b) {
            const double w =
                v(std::abs(g.distance(g.point(a), g.point(b)))) - c(a) - c(b) + cbar;
            acc += g.weight() * w * rho(b);
        }
        REQUIRE(std::abs(acc) < 1e-10);
    }
}

TEST_CASE("trapped case: kernels real and K1 PSD") {
    HartreeProblem p;
    const int n = 48;
    p.grid = Grid1D(n, 10.0, Boundary::HardWall);
    p.v_ext.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = p.grid.point(i) - 5.0;
        p.v_ext(i) = 0.5 * x * x;
    }
    p.v = make_bounded_potential({{-1, 0.8}, {0, 1.0}, {1, 0.8}}, Grid1D(n, 10.0));
    HartreeSolution sol = solve_hartree(p, 1e-10, 40000, 4);
    KernelSet ks = compute_kernels(sol, p.v, 4);
    REQUIRE((ks.K1 - ks.K1.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((ks.K2 - ks.K2.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ks.K1);
    REQUIRE(es.eigenvalues()(0) >= -1e-12);
}

TEST_CASE("non-orthonormal modes rejected") {
    HartreeSolution sol = solved_torus({{0, 1.0}});
    sol.modes.col(1) = sol.modes.col(0);
    PairPotential v = make_bounded_potential({{0, 1.0}}, sol.grid);
    REQUIRE_THROWS_AS(compute_kernels(sol, v, 6), std::runtime_error);
}
