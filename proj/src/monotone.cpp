#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "auctionfda/pspline.hpp"

namespace auctionfda {

namespace {

/// Lawson-Hanson active-set NNLS: argmin ||E u - f|| subject to u >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& e, const Eigen::VectorXd& f, bool& converged) {
    const Eigen::Index n = e.cols();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const double tol = 10.0 * std::numeric_limits<double>::epsilon() * e.norm() * std::max<Eigen::Index>(e.rows(), n);
    converged = false;

    auto solve_passive = [&](Eigen::VectorXd& z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
        }
        Eigen::MatrixXd ep(e.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) ep.col(static_cast<Eigen::Index>(k)) = e.col(idx[k]);
        Eigen::VectorXd sol = ep.colPivHouseholderQr().solve(f);
        z.setZero(n);
        for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = sol(static_cast<Eigen::Index>(k));
    };

    const int max_outer = static_cast<int>(3 * n + 10);
    for (int outer = 0; outer < max_outer; ++outer) {
        Eigen::VectorXd w = e.transpose() * (f - e * x);
        Eigen::Index t = -1;
        double best = tol;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!passive[static_cast<std::size_t>(j)] && w(j) > best) {
                best = w(j);
                t = j;
            }
        }
        if (t < 0) {
            converged = true;
            return x;
        }
        passive[static_cast<std::size_t>(t)] = true;

        for (int inner = 0; inner <= n; ++inner) {
            Eigen::VectorXd z;
            solve_passive(z);
            bool all_positive = true;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) all_positive = false;
            }
            if (all_positive) {
                x = z;
                break;
            }
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
            }
            x += alpha * (z - x);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
                    passive[static_cast<std::size_t>(j)] = false;
                    x(j) = 0.0;
                }
            }
        }
    }
    return x;
}

double min_slope(const Eigen::MatrixXd& slope_rows, const Eigen::VectorXd& coeffs) {
    return (slope_rows * coeffs).minCoeff();
}

}  // namespace

SplineFit fit_monotone(std::span<const double> y, const Grid& grid, const SplineConfig& config,
                       const MonotoneOptions& options) {
    if (options.check_points < 2) throw ValidationError("monotone fit needs at least two check points");
    SplineFit unconstrained = fit(y, grid, config);

    const Grid checks(options.check_points);
    Eigen::MatrixXd slope_rows(static_cast<Eigen::Index>(checks.size()), static_cast<Eigen::Index>(config.basis_size()));
    for (Eigen::Index i = 0; i < slope_rows.rows(); ++i) {
        for (Eigen::Index j = 0; j < slope_rows.cols(); ++j) {
            slope_rows(i, j) = basis_derivative(config, static_cast<std::size_t>(j), checks[static_cast<std::size_t>(i)], 1);
        }
    }
    if (min_slope(slope_rows, unconstrained.coeffs) >= 0.0) return unconstrained;

    // With H = B^T B + lambda P = L L^T, substitute z = L^T (c - c_u): the QP
    // becomes min ||z|| s.t. G z >= h, G = S L^-T, h = -S c_u.
    const Eigen::MatrixXd basis = basis_matrix(grid, config);
    const Eigen::MatrixXd gram = penalty_gram(config);
    Eigen::MatrixXd hessian = basis.transpose() * basis + config.lambda * gram;
    if (unconstrained.ridge_fallback) hessian.diagonal().array() += 1e-12 * hessian.trace();

    Eigen::VectorXd d(hessian.rows());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = hessian(i, i) > 0.0 ? 1.0 / std::sqrt(hessian(i, i)) : 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(d.asDiagonal() * hessian * d.asDiagonal());
    if (llt.info() != Eigen::Success) {
        throw MonotoneFitError("monotone fit: penalized Hessian is not positive definite", unconstrained);
    }
    const Eigen::MatrixXd l = llt.matrixL();

    Eigen::MatrixXd g = l.triangularView<Eigen::Lower>().solve(d.asDiagonal() * slope_rows.transpose()).transpose();
    Eigen::VectorXd h = -(slope_rows * unconstrained.coeffs);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        const double norm = g.row(i).norm();
        if (norm > 0.0) {
            g.row(i) /= norm;
            h(i) /= norm;
        }
    }

    SplineFit out;
    out.config = config;
    out.ridge_fallback = unconstrained.ridge_fallback;
    // The margin tightens the constraints slightly when rounding leaves the
    // first solve a hair infeasible.
    for (double margin : {0.0, 1e-10, 1e-8}) {
        const Eigen::Index k = g.rows();
        const Eigen::Index dim = g.cols();
        Eigen::MatrixXd e(dim + 1, k);
        e.topRows(dim) = g.transpose();
        e.row(dim) = (h.array() + margin).matrix().transpose();
        Eigen::VectorXd f = Eigen::VectorXd::Zero(dim + 1);
        f(dim) = 1.0;

        bool converged = false;
        Eigen::VectorXd u = nnls(e, f, converged);
        Eigen::VectorXd r = e * u - f;
        if (!converged || !(std::abs(r(dim)) > 1e-14)) continue;
        Eigen::VectorXd z = -r.head(dim) / r(dim);
        Eigen::VectorXd delta = l.transpose().triangularView<Eigen::Upper>().solve(z);
        out.coeffs = unconstrained.coeffs + d.asDiagonal() * delta;
        if (out.coeffs.allFinite() && min_slope(slope_rows, out.coeffs) >= -1e-8) {
            Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
            out.residual_ss = (yv - basis * out.coeffs).squaredNorm();
            out.penalty_value = out.coeffs.dot(gram * out.coeffs);
            out.penss = out.residual_ss + config.lambda * out.penalty_value;
            return out;
        }
    }
    throw MonotoneFitError("monotone fit did not converge to a feasible solution", unconstrained);
}

}  // namespace auctionfda
