#include "auctionfda/funcreg.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "auctionfda/error.hpp"
#include "auctionfda/io.hpp"
#include "auctionfda/parallel.hpp"

namespace auctionfda {

std::string_view to_string(ResponseKind kind) {
    switch (kind) {
        case ResponseKind::level: return "level";
        case ResponseKind::velocity: return "velocity";
        case ResponseKind::acceleration: return "acceleration";
    }
    return "level";
}

ResponseKind parse_response_kind(std::string_view token) {
    std::string t = io::to_lower(token);
    if (t == "level") return ResponseKind::level;
    if (t == "velocity") return ResponseKind::velocity;
    if (t == "acceleration") return ResponseKind::acceleration;
    throw std::invalid_argument("unknown response kind '" + std::string(token) + "'");
}

const std::array<std::string, kDesignColumns>& covariate_names() {
    static const std::array<std::string, kDesignColumns> names = {
        "intercept",          "log_prev_price_sqin", "established", "emerging",   "log_opening_bid",
        "log_position_group", "log_area",            "canvas",      "log_bidders"};
    return names;
}

std::size_t covariate_index(std::string_view name) {
    const auto& names = covariate_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    throw std::invalid_argument("unknown covariate '" + std::string(name) + "'");
}

FunctionalSample make_sample(std::span<const LotObservation> lots, ResponseKind kind) {
    FunctionalSample s;
    s.kind = kind;
    if (lots.empty()) throw EstimabilityError("no lots to regress");
    const std::size_t n = lots.front().curve.values.size();
    const auto rows = static_cast<Eigen::Index>(lots.size());
    s.static_covariates.resize(rows, static_cast<Eigen::Index>(kStaticCovariates));
    s.dynamic_covariate.resize(rows, static_cast<Eigen::Index>(n));
    s.response.resize(rows, static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& lot = lots[static_cast<std::size_t>(r)];
        const std::vector<double>& y = kind == ResponseKind::level      ? lot.curve.values
                                       : kind == ResponseKind::velocity ? lot.curve.velocity
                                                                        : lot.curve.acceleration;
        if (y.size() != n || lot.covariates.log_bidders.size() != n) {
            throw EstimabilityError("lot " + lot.lot_id + " is missing curve samples or the dynamic bidder covariate");
        }
        auto x = lot.covariates.static_values();
        for (std::size_t c = 0; c < kStaticCovariates; ++c) s.static_covariates(r, static_cast<Eigen::Index>(c)) = x[c];
        for (std::size_t i = 0; i < n; ++i) {
            s.dynamic_covariate(r, static_cast<Eigen::Index>(i)) = lot.covariates.log_bidders[i];
            s.response(r, static_cast<Eigen::Index>(i)) = y[i];
        }
        s.lot_ids.push_back(lot.lot_id);
    }
    if (!s.static_covariates.allFinite() || !s.dynamic_covariate.allFinite() || !s.response.allFinite()) {
        throw EstimabilityError("non-finite covariate or response value");
    }
    return s;
}

DesignMatrix assemble_design(const FunctionalSample& sample, std::size_t t_index) {
    if (t_index < 1 || t_index > sample.grid_size()) {
        throw std::out_of_range("t_index " + std::to_string(t_index) + " outside 1.." + std::to_string(sample.grid_size()));
    }
    if (sample.lots() < 2) {
        throw EstimabilityError("a design needs at least 2 lots, have " + std::to_string(sample.lots()), {}, t_index);
    }
    const auto rows = static_cast<Eigen::Index>(sample.lots());
    const auto col = static_cast<Eigen::Index>(t_index - 1);
    DesignMatrix d;
    d.t_index = t_index;
    d.X.resize(rows, static_cast<Eigen::Index>(kDesignColumns));
    d.X.col(0).setOnes();
    d.X.middleCols(1, static_cast<Eigen::Index>(kStaticCovariates)) = sample.static_covariates;
    d.X.col(static_cast<Eigen::Index>(kDesignColumns) - 1) = sample.dynamic_covariate.col(col);
    d.y = sample.response.col(col);
    return d;
}

DesignMatrix assemble_design(std::span<const LotObservation> lots, std::size_t t_index, ResponseKind kind) {
    return assemble_design(make_sample(lots, kind), t_index);
}

OlsFit pointwise_ols(const DesignMatrix& design) {
    const Eigen::MatrixXd& x = design.X;
    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();
    if (n <= k) {
        throw EstimabilityError("need more than " + std::to_string(k) + " lots for " + std::to_string(k) +
                                    " coefficients, have " + std::to_string(n),
                                {}, design.t_index);
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double tol = static_cast<double>(std::max(n, k)) * std::numeric_limits<double>::epsilon() * sv(0);
    if (!(sv(k - 1) > tol)) {
        const auto& names = covariate_names();
        std::vector<std::string> collinear;
        for (Eigen::Index j = 0; j < k; ++j) {
            bool involved = false;
            for (Eigen::Index s = 0; s < k; ++s) {
                if (!(sv(s) > tol) && std::abs(svd.matrixV()(j, s)) > 1e-6) involved = true;
            }
            if (involved) {
                collinear.push_back(j < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(j)]
                                                                                : "column " + std::to_string(j));
            }
        }
        std::string list;
        for (const auto& c : collinear) list += (list.empty() ? "" : ", ") + c;
        throw EstimabilityError("design matrix is rank deficient; collinear columns: " + list, collinear,
                                design.t_index);
    }

    OlsFit out;
    const Eigen::VectorXd inv_sv = sv.cwiseInverse();
    out.beta = svd.matrixV() * (inv_sv.asDiagonal() * (svd.matrixU().transpose() * design.y));
    out.residuals = design.y - x * out.beta;
    out.rss = out.residuals.squaredNorm();
    out.dof = static_cast<int>(n - k);
    const double sigma2 = out.rss / out.dof;
    const Eigen::VectorXd cov_diag = svd.matrixV().array().square().matrix() * inv_sv.array().square().matrix();
    out.se = (sigma2 * cov_diag.array()).sqrt().matrix();
    const double ratio = sv(0) / sv(k - 1);
    out.condition_number = ratio * ratio;
    return out;
}

double t_critical(double alpha, int dof) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
    if (dof < 1) throw ValidationError("t quantile needs at least one degree of freedom");
    if (alpha == 1.0) return 0.0;
    boost::math::students_t_distribution<double> dist(static_cast<double>(dof));
    return boost::math::quantile(dist, 1.0 - alpha / 2.0);
}

RegressionResult coefficient_curves(const FunctionalSample& sample, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
    const std::size_t n = sample.grid_size();
    const auto last = static_cast<Eigen::Index>(kDesignColumns) - 1;
    std::vector<OlsFit> fits(n);
    std::vector<char> dropped(n, 0);
    parallel_for(n, [&](std::size_t i) {
        try {
            DesignMatrix d = assemble_design(sample, i + 1);
            // Before the first bid every lot has x8 = 0; a constant dynamic
            // column is aliased with the intercept, so it is left out there.
            if (d.X.col(last).maxCoeff() == d.X.col(last).minCoeff()) {
                dropped[i] = 1;
                d.X.conservativeResize(Eigen::NoChange, last);
            }
            fits[i] = pointwise_ols(d);
        } catch (const EstimabilityError& e) {
            std::string msg = e.what();
            if (!msg.starts_with("t_index")) msg = "t_index " + std::to_string(i + 1) + ": " + msg;
            throw EstimabilityError(msg, e.collinear_columns(), i + 1);
        }
    });

    RegressionResult result;
    result.kind = sample.kind;
    result.alpha = alpha;
    result.n_lots = sample.lots();
    result.dof = static_cast<int>(sample.lots() - kDesignColumns);
    const auto& names = covariate_names();
    result.curves.resize(kDesignColumns);
    for (std::size_t c = 0; c < kDesignColumns; ++c) {
        auto& curve = result.curves[c];
        curve.covariate = names[c];
        curve.beta.assign(n, 0.0);
        curve.se.assign(n, 0.0);
        curve.ci_lo.assign(n, 0.0);
        curve.ci_hi.assign(n, 0.0);
        curve.significant.assign(n, false);
    }
    result.condition_numbers.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const OlsFit& f = fits[i];
        const double crit = t_critical(alpha, f.dof);
        for (Eigen::Index c = 0; c < f.beta.size(); ++c) {
            auto& curve = result.curves[static_cast<std::size_t>(c)];
            const double b = f.beta(c);
            const double se = f.se(c);
            curve.beta[i] = b;
            curve.se[i] = se;
            curve.ci_lo[i] = b - crit * se;
            curve.ci_hi[i] = b + crit * se;
            curve.significant[i] = curve.ci_lo[i] > 0.0 || curve.ci_hi[i] < 0.0;
        }
        if (dropped[i]) {
            result.warnings.push_back("t_index " + std::to_string(i + 1) + ": " + names.back() +
                                      " is constant across lots; column dropped and its curve set to 0");
        }
        result.condition_numbers[i] = f.condition_number;
        if (f.condition_number > kConditionWarning) {
            result.warnings.push_back("t_index " + std::to_string(i + 1) + ": condition number of X'X is " +
                                      io::format_fixed(f.condition_number, 0));
        }
    }
    return result;
}

RegressionResult coefficient_curves(std::span<const LotObservation> lots, ResponseKind kind, double alpha) {
    return coefficient_curves(make_sample(lots, kind), alpha);
}

}  // namespace auctionfda
