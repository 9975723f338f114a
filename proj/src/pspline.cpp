#include "auctionfda/pspline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "auctionfda/parallel.hpp"

namespace auctionfda {

namespace {

template <typename T>
T ipow(T x, int e) {
    T r = 1;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

/// n! / (n - k)!
double falling_factorial(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= static_cast<double>(n - i);  // exact for the degrees allowed
    return r;
}

// The Gram is accumulated in extended precision so that the rounded result is
// within an ulp or so of the exact integral even for entries near 5e5 (p = m = 6).
using Wide = long double;

Wide binomial(int n, int k) {
    Wide r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Coefficients in s of c * (shift + s)^e.
std::vector<Wide> shifted_power(Wide c, Wide shift, int e) {
    std::vector<Wide> coef(static_cast<std::size_t>(e) + 1);
    for (int r = 0; r <= e; ++r) coef[static_cast<std::size_t>(r)] = c * binomial(e, r) * ipow(shift, e - r);
    return coef;
}

/// integral_0^h p(s) q(s) ds
Wide integrate_product(const std::vector<Wide>& p, const std::vector<Wide>& q, Wide h) {
    Wide total = 0;
    for (std::size_t r = 0; r < p.size(); ++r) {
        if (p[r] == 0) continue;
        for (std::size_t k = 0; k < q.size(); ++k) {
            const int e = static_cast<int>(r + k) + 1;
            total += p[r] * q[k] * ipow(h, e) / e;
        }
    }
    return total;
}

/// Solves the equilibrated SPD system D A D z = D b, x = D z.
struct EquilibratedSolve {
    Eigen::VectorXd x;
    bool ok = false;
};

Eigen::VectorXd equilibration(const Eigen::MatrixXd& a) {
    Eigen::VectorXd d(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) d(i) = a(i, i) > 0.0 ? 1.0 / std::sqrt(a(i, i)) : 1.0;
    return d;
}

EquilibratedSolve spd_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd d = equilibration(a);
    const Eigen::MatrixXd scaled = d.asDiagonal() * a * d.asDiagonal();
    Eigen::LLT<Eigen::MatrixXd> llt(scaled);
    EquilibratedSolve out;
    if (llt.info() != Eigen::Success) return out;
    const Eigen::MatrixXd& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        if (!(l(i, i) > 1e-13)) return out;
    }
    out.x = d.asDiagonal() * llt.solve(d.asDiagonal() * b);
    out.ok = out.x.allFinite();
    return out;
}

void finish(SplineFit& fit, std::span<const double> y, const Eigen::MatrixXd& basis, const Eigen::MatrixXd& gram) {
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    fit.residual_ss = (yv - basis * fit.coeffs).squaredNorm();
    fit.penalty_value = fit.coeffs.dot(gram * fit.coeffs);
    fit.penss = fit.residual_ss + fit.config.lambda * fit.penalty_value;
}

}  // namespace

SplineConfig SplineConfig::equally_spaced(int degree, int knot_count, int penalty_order, double lambda) {
    if (knot_count < 0) throw ValidationError("knot count must be >= 0");
    SplineConfig c;
    c.degree = degree;
    c.penalty_order = penalty_order;
    c.lambda = lambda;
    c.knots.resize(static_cast<std::size_t>(knot_count));
    for (int l = 0; l < knot_count; ++l) c.knots[static_cast<std::size_t>(l)] = (l + 1.0) / (knot_count + 1.0);
    return c;
}

void SplineConfig::validate() const {
    if (degree < 1) throw ValidationError("spline degree must be >= 1");
    if (penalty_order < 1) throw ValidationError("penalty order must be >= 1");
    if (degree < penalty_order) throw ValidationError("spline degree must be >= penalty order");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("smoothing parameter must be finite and >= 0");
    for (std::size_t l = 0; l < knots.size(); ++l) {
        if (!(knots[l] > 0.0 && knots[l] < 1.0)) throw ValidationError("knots must lie strictly inside (0, 1)");
        if (l > 0 && !(knots[l] > knots[l - 1])) throw ValidationError("knots must be strictly increasing");
    }
}

double basis_derivative(const SplineConfig& config, std::size_t index, double t, int order) {
    const int p = config.degree;
    if (index <= static_cast<std::size_t>(p)) {
        const int j = static_cast<int>(index);
        if (order > j) return 0.0;
        return falling_factorial(j, order) * ipow(t, j - order);
    }
    const double u = t - config.knots[index - static_cast<std::size_t>(p) - 1];
    if (u < 0.0 || order > p) return 0.0;
    return falling_factorial(p, order) * ipow(u, p - order);
}

Eigen::MatrixXd basis_matrix(std::span<const double> points, const SplineConfig& config) {
    config.validate();
    const auto cols = static_cast<Eigen::Index>(config.basis_size());
    Eigen::MatrixXd b(static_cast<Eigen::Index>(points.size()), cols);
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            b(i, j) = basis_derivative(config, static_cast<std::size_t>(j), points[static_cast<std::size_t>(i)], 0);
        }
    }
    return b;
}

Eigen::MatrixXd basis_matrix(const Grid& grid, const SplineConfig& config) {
    return basis_matrix(grid.points(), config);
}

Eigen::MatrixXd penalty_gram(const SplineConfig& config) {
    config.validate();
    const int p = config.degree;
    const int m = config.penalty_order;
    const std::size_t dim = config.basis_size();

    std::vector<double> breaks{0.0};
    breaks.insert(breaks.end(), config.knots.begin(), config.knots.end());
    breaks.push_back(1.0);

    using WideMatrix = Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic>;
    WideMatrix gram = WideMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    std::vector<std::vector<Wide>> local(dim);
    for (std::size_t iv = 0; iv + 1 < breaks.size(); ++iv) {
        const Wide a = breaks[iv];
        const Wide h = static_cast<Wide>(breaks[iv + 1]) - a;
        // D^m of every basis function as a polynomial in s = t - a on [a, a + h]
        for (std::size_t j = 0; j < dim; ++j) {
            local[j].clear();
            if (j <= static_cast<std::size_t>(p)) {
                const int deg = static_cast<int>(j);
                if (deg >= m) local[j] = shifted_power(falling_factorial(deg, m), a, deg - m);
            } else {
                const Wide tau = config.knots[j - static_cast<std::size_t>(p) - 1];
                if (a >= tau) local[j] = shifted_power(falling_factorial(p, m), a - tau, p - m);
            }
        }
        for (std::size_t r = 0; r < dim; ++r) {
            if (local[r].empty()) continue;
            for (std::size_t c = r; c < dim; ++c) {
                if (local[c].empty()) continue;
                gram(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += integrate_product(local[r], local[c], h);
            }
        }
    }
    gram.triangularView<Eigen::StrictlyLower>() = gram.transpose().triangularView<Eigen::StrictlyLower>();
    return gram.cast<double>();
}

SplineFit fit(std::span<const double> y, const Grid& grid, const SplineConfig& config) {
    config.validate();
    if (y.size() != grid.size()) throw ValidationError("response length does not match the grid");
    for (double v : y) {
        if (!std::isfinite(v)) throw ValidationError("non-finite response value");
    }
    const Eigen::MatrixXd basis = basis_matrix(grid, config);
    const Eigen::MatrixXd gram = penalty_gram(config);
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));

    SplineFit out;
    out.config = config;
    if (config.lambda == 0.0) {
        // Unpenalized: least squares on the column-equilibrated basis.
        Eigen::VectorXd d(basis.cols());
        for (Eigen::Index j = 0; j < basis.cols(); ++j) {
            const double norm = basis.col(j).norm();
            d(j) = norm > 0.0 ? 1.0 / norm : 1.0;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis * d.asDiagonal());
        qr.setThreshold(1e-12);
        if (qr.rank() < basis.cols()) {
            throw SingularSystemError("basis is rank deficient on the grid (rank " + std::to_string(qr.rank()) + " of " +
                                      std::to_string(basis.cols()) + "); use lambda > 0 or fewer knots");
        }
        out.coeffs = d.asDiagonal() * qr.solve(yv);
    } else {
        const Eigen::MatrixXd system = basis.transpose() * basis + config.lambda * gram;
        const Eigen::VectorXd rhs = basis.transpose() * yv;
        auto solved = spd_solve(system, rhs);
        if (!solved.ok) {
            const double ridge = 1e-12 * system.trace();
            Eigen::MatrixXd ridged = system;
            ridged.diagonal().array() += ridge;
            solved = spd_solve(ridged, rhs);
            if (!solved.ok) throw SingularSystemError("penalized normal equations are singular even with a ridge");
            out.ridge_fallback = true;
        }
        out.coeffs = std::move(solved.x);
    }
    finish(out, y, basis, gram);
    return out;
}

SplineFit fit(const ResponseVector& y, const Grid& grid, const SplineConfig& config) {
    return fit(std::span<const double>(y.values), grid, config);
}

double penss(std::span<const double> y, const Grid& grid, const SplineConfig& config, const Eigen::VectorXd& coeffs) {
    SplineFit f;
    f.config = config;
    f.coeffs = coeffs;
    finish(f, y, basis_matrix(grid, config), penalty_gram(config));
    return f.penss;
}

double evaluate(const SplineFit& fit, double t, int deriv_order) {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("spline evaluation point outside [0, 1]");
    if (deriv_order < 0 || deriv_order > fit.config.degree) {
        throw ValidationError("derivative order " + std::to_string(deriv_order) + " exceeds spline degree " +
                              std::to_string(fit.config.degree));
    }
    double v = 0.0;
    for (Eigen::Index j = 0; j < fit.coeffs.size(); ++j) {
        v += fit.coeffs(j) * basis_derivative(fit.config, static_cast<std::size_t>(j), t, deriv_order);
    }
    return v;
}

MonotoneFitError::MonotoneFitError(const std::string& message, SplineFit unconstrained)
    : Error(message), unconstrained_(std::move(unconstrained)) {}

PriceCurve smooth_curve(const ResponseVector& y, const Grid& grid, const SplineConfig& config,
                        const SmoothOptions& options) {
    PriceCurve curve{.lot_id = y.lot_id,
                     .fit = options.monotone ? fit_monotone(y.values, grid, config, options.monotone_options)
                                             : fit(y, grid, config),
                     .grid = grid,
                     .values = {},
                     .velocity = {},
                     .acceleration = {}};
    curve.values.resize(grid.size());
    curve.velocity.resize(grid.size());
    curve.acceleration.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        curve.values[i] = evaluate(curve.fit, grid[i], 0);
        curve.velocity[i] = evaluate(curve.fit, grid[i], 1);
        curve.acceleration[i] = config.degree >= 2 ? evaluate(curve.fit, grid[i], 2) : 0.0;
    }
    return curve;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> out;
    for (int k = 0; k < 14; ++k) out.push_back(std::pow(10.0, -3.0 + 5.0 * k / 13.0));
    return out;
}

std::vector<int> default_degree_grid() { return {4, 5, 6}; }

SensitivityTable lambda_sensitivity(std::span<const ResponseVector> responses, const Grid& grid,
                                    const SplineConfig& base, std::span<const int> degrees,
                                    std::span<const double> lambdas) {
    if (degrees.empty() || lambdas.empty()) throw ValidationError("sensitivity sweep needs degrees and lambdas");
    if (responses.empty()) throw ValidationError("sensitivity sweep needs at least one lot");

    SensitivityTable table;
    for (int p : degrees) {
        for (double lambda : lambdas) table.cells.push_back({p, lambda, std::nullopt, {}});
    }
    std::stable_sort(table.cells.begin(), table.cells.end(), [](const auto& a, const auto& b) {
        return a.degree != b.degree ? a.degree < b.degree : a.lambda < b.lambda;
    });

    parallel_for(table.cells.size(), [&](std::size_t c) {
        auto& cell = table.cells[c];
        SplineConfig config = base;
        config.degree = cell.degree;
        config.lambda = cell.lambda;
        double rss = 0.0;
        std::size_t count = 0;
        for (const auto& y : responses) {
            try {
                rss += fit(y, grid, config).residual_ss;
                count += y.values.size();
            } catch (const Error& e) {
                cell.note = "lot " + y.lot_id + ": " + e.what();
                return;
            }
        }
        cell.rmse = std::sqrt(rss / static_cast<double>(count));
    });

    // RMSE differences below the solver's resolution on data of this size are
    // ties; among tied cells the smaller lambda wins, then the smaller degree.
    double sum_sq = 0.0;
    std::size_t n = 0;
    for (const auto& y : responses) {
        for (double v : y.values) sum_sq += v * v;
        n += y.values.size();
    }
    const double resolution = 1e-10 * (1.0 + std::sqrt(sum_sq / static_cast<double>(std::max<std::size_t>(n, 1))));
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& cell : table.cells) {
        if (cell.rmse) lowest = std::min(lowest, *cell.rmse);
    }
    for (std::size_t c = 0; c < table.cells.size(); ++c) {
        const auto& cell = table.cells[c];
        if (!cell.rmse || *cell.rmse > lowest + resolution + 1e-9 * lowest) continue;
        if (!table.best || cell.lambda < table.cells[*table.best].lambda) table.best = c;
    }
    return table;
}

}  // namespace auctionfda
