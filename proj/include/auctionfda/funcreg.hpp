#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "auctionfda/auction_data.hpp"
#include "auctionfda/pspline.hpp"

namespace auctionfda {

enum class ResponseKind { level, velocity, acceleration };

std::string_view to_string(ResponseKind kind);
ResponseKind parse_response_kind(std::string_view token);

/// Design columns in order: intercept, x1..x7, x8(t).
inline constexpr std::size_t kDesignColumns = 1 + kStaticCovariates + 1;

const std::array<std::string, kDesignColumns>& covariate_names();

/// Index of a covariate by name; throws std::invalid_argument.
std::size_t covariate_index(std::string_view name);

struct LotObservation {
    std::string lot_id;
    CovariateVector covariates;
    PriceCurve curve;
};

/// Lots x grid view of everything a pointwise regression needs.
struct FunctionalSample {
    std::vector<std::string> lot_ids;
    Eigen::MatrixXd static_covariates;  // N x 7
    Eigen::MatrixXd dynamic_covariate;  // N x n
    Eigen::MatrixXd response;           // N x n
    ResponseKind kind = ResponseKind::level;

    std::size_t lots() const { return static_cast<std::size_t>(response.rows()); }
    std::size_t grid_size() const { return static_cast<std::size_t>(response.cols()); }
};

/// Throws EstimabilityError when a lot lacks a covariate or curve sample.
FunctionalSample make_sample(std::span<const LotObservation> lots, ResponseKind kind);

struct DesignMatrix {
    std::size_t t_index = 1;  // 1-based grid position
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

/// Throws EstimabilityError for fewer than 2 lots; pointwise_ols enforces
/// N > number of design columns.
DesignMatrix assemble_design(const FunctionalSample& sample, std::size_t t_index);
DesignMatrix assemble_design(std::span<const LotObservation> lots, std::size_t t_index, ResponseKind kind);

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd se;
    Eigen::VectorXd residuals;
    int dof = 0;
    double rss = 0.0;
    double condition_number = 0.0;  // of X^T X
};

/// Ordinary least squares through the SVD of X with homoskedastic standard
/// errors. Throws EstimabilityError listing collinear columns when X is rank
/// deficient.
OlsFit pointwise_ols(const DesignMatrix& design);

struct CoefficientCurve {
    std::string covariate;
    std::vector<double> beta;
    std::vector<double> se;
    std::vector<double> ci_lo;
    std::vector<double> ci_hi;
    std::vector<bool> significant;  // band excludes zero
};

struct RegressionResult {
    ResponseKind kind = ResponseKind::level;
    double alpha = 0.05;
    std::size_t n_lots = 0;
    int dof = 0;
    std::vector<CoefficientCurve> curves;  // one per design column
    std::vector<double> condition_numbers;  // one per grid point
    std::vector<std::string> warnings;
};

inline constexpr double kConditionWarning = 1e8;

/// Two-sided Student-t quantile t_{1 - alpha/2, dof}; zero when alpha = 1.
double t_critical(double alpha, int dof);

/// Runs pointwise_ols at every grid point and forms beta +/- t * se bands.
/// Per-point failures are rethrown as EstimabilityError carrying the t_index.
RegressionResult coefficient_curves(const FunctionalSample& sample, double alpha = 0.05);
RegressionResult coefficient_curves(std::span<const LotObservation> lots, ResponseKind kind,
                                    double alpha = 0.05);

}  // namespace auctionfda
