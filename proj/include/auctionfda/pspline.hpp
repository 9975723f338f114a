#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auctionfda/curve_prep.hpp"
#include "auctionfda/error.hpp"
#include "auctionfda/grid.hpp"

namespace auctionfda {

/// Polynomial spline of degree p in the truncated-power basis
///   1, t, ..., t^p, (t - tau_1)_+^p, ..., (t - tau_L)_+^p
/// with roughness penalty integral_0^1 (D^m f)^2 dt weighted by lambda.
struct SplineConfig {
    int degree = 4;
    std::vector<double> knots;  // interior, strictly increasing, inside (0, 1)
    int penalty_order = 2;
    double lambda = 0.1;

    static constexpr int kDefaultKnots = 10;

    /// knot_count interior knots at l / (knot_count + 1).
    static SplineConfig equally_spaced(int degree = 4, int knot_count = kDefaultKnots, int penalty_order = 2,
                                       double lambda = 0.1);

    std::size_t basis_size() const { return static_cast<std::size_t>(degree) + 1 + knots.size(); }

    /// Throws ValidationError.
    void validate() const;
};

struct SplineFit {
    SplineConfig config;
    Eigen::VectorXd coeffs;
    double residual_ss = 0.0;
    double penalty_value = 0.0;
    double penss = 0.0;
    bool ridge_fallback = false;  // a 1e-12 * trace ridge was needed to factorize
};

struct PriceCurve {
    std::string lot_id;
    SplineFit fit;
    Grid grid;
    std::vector<double> values;
    std::vector<double> velocity;
    std::vector<double> acceleration;
};

/// Value of the k-th derivative of basis function `index` at t.
double basis_derivative(const SplineConfig& config, std::size_t index, double t, int order);

Eigen::MatrixXd basis_matrix(const Grid& grid, const SplineConfig& config);
Eigen::MatrixXd basis_matrix(std::span<const double> points, const SplineConfig& config);

/// Gram matrix of the m-th derivatives of the basis functions over [0, 1],
/// integrated exactly interval by interval between knots.
Eigen::MatrixXd penalty_gram(const SplineConfig& config);

/// Minimizes sum (y_i - f(t_i))^2 + lambda * PEN_m through the penalized
/// normal equations. Throws SingularSystemError at lambda = 0 when the basis is
/// rank deficient on the grid.
SplineFit fit(std::span<const double> y, const Grid& grid, const SplineConfig& config);
SplineFit fit(const ResponseVector& y, const Grid& grid, const SplineConfig& config);

/// PENSS of an arbitrary coefficient vector.
double penss(std::span<const double> y, const Grid& grid, const SplineConfig& config,
             const Eigen::VectorXd& coeffs);

/// D^k f(t) for k in {0, ..., degree}. Throws ValidationError for t outside
/// [0, 1] or k > degree.
double evaluate(const SplineFit& fit, double t, int deriv_order = 0);

struct MonotoneOptions {
    std::size_t check_points = 201;  // equally spaced on [0, 1]
};

/// Carries the unconstrained fit when the monotone program fails.
class MonotoneFitError : public Error {
public:
    MonotoneFitError(const std::string& message, SplineFit unconstrained);
    const SplineFit& unconstrained() const noexcept { return unconstrained_; }

private:
    SplineFit unconstrained_;
};

/// PENSS minimized subject to f'(g) >= 0 on the check grid, as a strictly
/// convex QP reduced to least-distance form and solved by NNLS.
SplineFit fit_monotone(std::span<const double> y, const Grid& grid, const SplineConfig& config,
                       const MonotoneOptions& options = {});

struct SmoothOptions {
    bool monotone = false;
    MonotoneOptions monotone_options;
};

/// Fits a response and samples value, velocity and acceleration on the grid.
PriceCurve smooth_curve(const ResponseVector& y, const Grid& grid, const SplineConfig& config,
                        const SmoothOptions& options = {});

struct SensitivityCell {
    int degree = 0;
    double lambda = 0.0;
    std::optional<double> rmse;  // empty when some lot failed to fit
    std::string note;
};

struct SensitivityTable {
    std::vector<SensitivityCell> cells;  // sorted by (degree, lambda)
    std::optional<std::size_t> best;     // index into cells
};

/// 14 values log-spaced over [0.001, 100].
std::vector<double> default_lambda_grid();
std::vector<int> default_degree_grid();

/// Pooled RMSE over all lots and grid points for every (degree, lambda) pair.
/// The knot layout and penalty order come from `base`. Ties for the minimum
/// go to the smaller lambda, then the smaller degree.
SensitivityTable lambda_sensitivity(std::span<const ResponseVector> responses, const Grid& grid,
                                    const SplineConfig& base, std::span<const int> degrees,
                                    std::span<const double> lambdas);

}  // namespace auctionfda
