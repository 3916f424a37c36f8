#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bexc/fock.hpp"

using namespace bexc;

TEST_CASE("basis enumeration dimensions") {
    REQUIRE(FockBasis(1, 2).dim() == 3);
    REQUIRE(FockBasis(2, 2).dim() == 6);
    REQUIRE(FockBasis(6, 12).dim() == 18564); // binom(18,6)
    REQUIRE_THROWS_AS(FockBasis(8, 30, 1000), std::invalid_argument);
}

TEST_CASE("m=1 enumeration is the number ladder") {
    FockBasis b(1, 2);
    REQUIRE(b.occupation(0, 0) == 0);
    REQUIRE(b.occupation(1, 0) == 1);
    REQUIRE(b.occupation(2, 0) == 2);
}

TEST_CASE("index_of inverts enumeration and ordering is deterministic") {
    FockBasis b(4, 7);
    std::vector<int> n(4);
    for (int i = 0; i < b.dim(); ++i) {
        for (int j = 0; j < 4; ++j) n[j] = b.occupation(i, j);
        REQUIRE(b.index_of(n) == i);
    }
    // sector grouping: sector_of is non-decreasing with index
    for (int i = 1; i < b.dim(); ++i) REQUIRE(b.sector_of(i) >= b.sector_of(i - 1));
    // two builds agree state by state
    FockBasis b2(4, 7);
    for (int i = 0; i < b.dim(); ++i)
        for (int j = 0; j < 4; ++j) REQUIRE(b.occupation(i, j) == b2.occupation(i, j));
}

TEST_CASE("ladder operators") {
    FockBasis b(2, 4);

    SECTION("annihilation on vacuum is zero") {
        SparseMat a = ladder_elements(b, 0, LadderKind::Annihilate);
        Eigen::VectorXd vac = Eigen::VectorXd::Zero(b.dim());
        vac(0) = 1.0;
        REQUIRE((a * vac).norm() == 0.0);
    }
    SECTION("bosonic factor sqrt(2)") {
        SparseMat ad = ladder_elements(b, 0, LadderKind::Create);
        std::vector<int> one{1, 0}, two{2, 0};
        Eigen::VectorXd x = Eigen::VectorXd::Zero(b.dim());
        x(b.index_of(one)) = 1.0;
        Eigen::VectorXd y = ad * x;
        REQUIRE(y(b.index_of(two)) == Catch::Approx(std::sqrt(2.0)));
        REQUIRE(y.norm() == Catch::Approx(std::sqrt(2.0)));
    }
    SECTION("commutator [a_j, a_j^dag] = Id on the guarded subspace") {
        for (int j : {0, 1}) {
            SparseMat a = ladder_elements(b, j, LadderKind::Annihilate);
            SparseMat ad = ladder_elements(b, j, LadderKind::Create);
            Eigen::MatrixXd comm = Eigen::MatrixXd(a * ad) - Eigen::MatrixXd(ad * a);
            for (int i = 0; i < b.dim(); ++i) {
                if (b.sector_of(i) <= b.cutoff() - 1)
                    REQUIRE(comm(i, i) == Catch::Approx(1.0));
                for (int k = 0; k < b.dim(); ++k)
                    if (i != k) REQUIRE(comm(i, k) == 0.0);
            }
        }
    }
    SECTION("creation is the adjoint of annihilation below the cutoff") {
        SparseMat a = ladder_elements(b, 1, LadderKind::Annihilate);
        SparseMat ad = ladder_elements(b, 1, LadderKind::Create);
        Eigen::MatrixXd d = Eigen::MatrixXd(ad) - Eigen::MatrixXd(a).transpose();
        // adjoint defect only involves states at the cutoff edge
        for (int col = 0; col < b.dim(); ++col)
            if (b.sector_of(col) <= b.cutoff() - 1)
                REQUIRE(d.col(col).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("nonnegative entries") {
        SparseMat ad = ladder_elements(b, 0, LadderKind::Create);
        for (int c = 0; c < ad.outerSize(); ++c)
            for (SparseMat::InnerIterator it(ad, c); it; ++it) REQUIRE(it.value() >= 0.0);
    }
}

TEST_CASE("number operator is diagonal with sector eigenvalues") {
    FockBasis b(3, 5);
    Eigen::VectorXd nd = number_diagonal(b);
    SparseMat acc(b.dim(), b.dim());
    for (int j = 0; j < 3; ++j) {
        SparseMat a = ladder_elements(b, j, LadderKind::Annihilate);
        SparseMat ad = ladder_elements(b, j, LadderKind::Create);
        acc = acc + SparseMat(ad * a);
    }
    Eigen::MatrixXd diff = Eigen::MatrixXd(acc);
    diff.diagonal() -= nd;
    REQUIRE(diff.cwiseAbs().maxCoeff() < 1e-14);
    for (int i = 0; i < b.dim(); ++i) REQUIRE(nd(i) == b.sector_of(i));
}

TEST_CASE("sector projection") {
    FockBasis b(3, 6);
    std::mt19937_64 rng(42);
    std::normal_distribution<double> nd;

    FockVector x(b);
    for (int i = 0; i < b.dim(); ++i) x.amplitudes(i) = nd(rng);
    x.amplitudes /= x.amplitudes.norm();

    SECTION("projection to own sector is identity, to others zero") {
        FockVector y(b);
        const int l = 3;
        for (int i = b.sector_begin(l); i < b.sector_end(l); ++i) y.amplitudes(i) = nd(rng);
        FockVector same = sector_project(y, 3);
        REQUIRE((same.amplitudes - y.amplitudes).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(sector_project(y, 2).norm() == 0.0);
    }
    SECTION("Parseval over sectors") {
        double total = 0.0;
        for (int l = 0; l <= b.cutoff(); ++l) {
            const double nl = sector_project(x, l).norm();
            total += nl * nl;
        }
        REQUIRE(total == Catch::Approx(x.norm() * x.norm()).epsilon(1e-12));
        Eigen::VectorXd p = sector_norms_squared(b, x.amplitudes);
        REQUIRE(p.sum() == Catch::Approx(1.0).epsilon(1e-12));
    }
}
