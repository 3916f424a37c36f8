#ifndef BEXC_GRID_HPP
#define BEXC_GRID_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bexc {

inline constexpr double pi = 3.14159265358979323846;

enum class Boundary { Periodic, HardWall };

// Uniform 1D quadrature grid, either a torus of circumference `length`
// (points x_i = i*h) or a hard-wall interval (cell-centred points,
// functions vanish outside).  Weight per point is length/n in both cases.
struct Grid1D {
    int n = 0;
    double length = 0.0;
    Boundary boundary = Boundary::Periodic;

    Grid1D() = default;
    Grid1D(int n_, double length_, Boundary b = Boundary::Periodic)
        : n(n_), length(length_), boundary(b) {
        if (n < 8) throw std::invalid_argument("Grid1D: need n >= 8, got " + std::to_string(n));
        if (!(length > 0.0)) throw std::invalid_argument("Grid1D: length must be positive");
    }

    double weight() const { return length / n; }

    double point(int i) const {
        const double h = length / n;
        return boundary == Boundary::Periodic ? i * h : (i + 0.5) * h;
    }

    Eigen::VectorXd points() const {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x(i) = point(i);
        return x;
    }

    // shortest signed distance folded onto the torus; plain difference on hard walls
    double distance(double a, double b) const {
        double d = a - b;
        if (boundary == Boundary::Periodic) {
            d = std::fmod(d, length);
            if (d > 0.5 * length) d -= length;
            if (d < -0.5 * length) d += length;
        }
        return d;
    }

    double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
        return weight() * f.dot(g);
    }
    double norm(const Eigen::VectorXd& f) const { return std::sqrt(inner(f, f)); }
};

// Dense -Laplacian.  Spectral (exact on resolved plane waves) on the torus,
// second-order central differences with Dirichlet ghost cells on hard walls.
inline Eigen::MatrixXd laplacian_matrix(const Grid1D& g) {
    const int n = g.n;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    if (g.boundary == Boundary::Periodic) {
        // -Δ = Σ_k k̃² e_k e_kᵀ over the orthonormal real DFT basis
        const double kk = 2.0 * pi / g.length;
        Eigen::VectorXd e(n);
        for (int k = 1; k <= n / 2; ++k) {
            const double lam = (kk * k) * (kk * k);
            if (2 * k == n) {
                for (int i = 0; i < n; ++i) e(i) = (i % 2 ? -1.0 : 1.0) / std::sqrt(double(n));
                A += lam * e * e.transpose();
                break;
            }
            for (int i = 0; i < n; ++i) e(i) = std::sqrt(2.0 / n) * std::cos(kk * k * g.point(i));
            A += lam * e * e.transpose();
            for (int i = 0; i < n; ++i) e(i) = std::sqrt(2.0 / n) * std::sin(kk * k * g.point(i));
            A += lam * e * e.transpose();
        }
        A = 0.5 * (A + A.transpose()).eval();
    } else {
        const double h = g.length / g.n;
        const double c = 1.0 / (h * h);
        for (int i = 0; i < n; ++i) {
            A(i, i) = 2.0 * c;
            if (i > 0) A(i, i - 1) = -c;
            if (i + 1 < n) A(i, i + 1) = -c;
        }
    }
    return A;
}

} // namespace bexc

#endif
