#include "auctionfda/oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace auctionfda::oracle {

namespace {

double falling(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= n - i;
    return r;
}

// m-th derivative of basis function j, straight from the definition
template <typename T>
T basis_deriv(const SplineConfig& c, std::size_t j, T t, int m) {
    const int p = c.degree;
    if (j <= static_cast<std::size_t>(p)) {
        const int e = static_cast<int>(j);
        if (m > e) return 0;
        return falling(e, m) * std::pow(t, e - m);
    }
    const T tau = c.knots[j - static_cast<std::size_t>(p) - 1];
    if (t <= tau || m > p) return 0;
    return falling(p, m) * std::pow(t - tau, p - m);
}

Eigen::MatrixXd pow_basis(const Grid& grid, const SplineConfig& c) {
    const std::size_t k = c.basis_size();
    Eigen::MatrixXd b(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = basis_deriv(c, j, grid[i], 0);
        }
    }
    return b;
}

}  // namespace

std::vector<std::pair<long double, long double>> gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre needs n >= 1");
    std::vector<std::pair<long double, long double>> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75) / (n + 0.5));
        long double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            long double p0 = 1.0;
            long double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const long double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const long double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-19L) break;
        }
        long double p0 = 1.0;
        long double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const long double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        out[static_cast<std::size_t>(i)] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
    }
    return out;
}

Eigen::MatrixXd quadrature_penalty_gram(const SplineConfig& config, int nodes) {
    const auto rule = gauss_legendre(nodes);
    std::vector<double> breaks{0.0};
    breaks.insert(breaks.end(), config.knots.begin(), config.knots.end());
    breaks.push_back(1.0);
    const std::size_t k = config.basis_size();
    // long double accumulation keeps the summed node contributions near an ulp
    using Wide = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    Wide g = Wide::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    Eigen::Matrix<long double, Eigen::Dynamic, 1> d(static_cast<Eigen::Index>(k));
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const long double a = breaks[s];
        const long double half = 0.5L * (breaks[s + 1] - a);
        for (const auto& [x, w] : rule) {
            const long double t = a + half * (x + 1.0L);
            for (std::size_t j = 0; j < k; ++j) {
                d(static_cast<Eigen::Index>(j)) = basis_deriv(config, j, t, config.penalty_order);
            }
            g.noalias() += (w * half) * d * d.transpose();
        }
    }
    return g.cast<double>();
}

double penss_objective(std::span<const double> y, const Grid& grid, const SplineConfig& config,
                       const Eigen::VectorXd& coeffs) {
    const Eigen::MatrixXd b = pow_basis(grid, config);
    const Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    const double rss = (yy - b * coeffs).squaredNorm();
    const double pen = coeffs.dot(quadrature_penalty_gram(config) * coeffs);
    return rss + config.lambda * pen;
}

Eigen::VectorXd oracle_penss(std::span<const double> y, const Grid& grid, const SplineConfig& config) {
    const Eigen::MatrixXd b = pow_basis(grid, config);
    const auto n = b.rows();
    const auto k = b.cols();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(quadrature_penalty_gram(config));
    const Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd r = ev.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();

    Eigen::MatrixXd a(n + k, k);
    a.topRows(n) = b;
    a.bottomRows(k) = std::sqrt(config.lambda) * r;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
    rhs.head(n) = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    return a.completeOrthogonalDecomposition().solve(rhs);
}

}  // namespace auctionfda::oracle
