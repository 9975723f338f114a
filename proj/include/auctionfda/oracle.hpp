#pragma once

// Brute-force reference computations. Nothing here calls into the spline
// module: basis values, penalty integrals and the minimizer are recomputed by
// independent routes.

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "auctionfda/grid.hpp"
#include "auctionfda/pspline.hpp"

namespace auctionfda::oracle {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration, in
/// extended precision.
std::vector<std::pair<long double, long double>> gauss_legendre(int n);

/// Penalty Gram by per-interval Gauss-Legendre quadrature.
Eigen::MatrixXd quadrature_penalty_gram(const SplineConfig& config, int nodes = 16);

/// PENSS of coeffs with basis values from std::pow and the quadrature Gram.
double penss_objective(std::span<const double> y, const Grid& grid, const SplineConfig& config,
                       const Eigen::VectorXd& coeffs);

/// Minimizes PENSS as the stacked least-squares problem
///   || [B; sqrt(lambda) R] c - [y; 0] ||^2,  R^T R = quadrature Gram,
/// with a column-pivoted QR. Intended for basis sizes up to 10.
Eigen::VectorXd oracle_penss(std::span<const double> y, const Grid& grid, const SplineConfig& config);

}  // namespace auctionfda::oracle
