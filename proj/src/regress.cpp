#include "minerdr/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "minerdr/distributions.hpp"
#include "minerdr/error.hpp"
#include "minerdr/linalg.hpp"

namespace minerdr::regress {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double column_value(const HourlyPanel& panel, const Column& c, std::size_t row, const SeasonMask& season) {
    if (!season.active(c.gate, panel.hour(row))) return 0.0;
    if (c.lag < 0 || static_cast<std::size_t>(c.lag) > row) return kNaN;
    return panel.column(c.source)[row - static_cast<std::size_t>(c.lag)];
}

std::string join_names(const std::vector<Column>& cols) {
    std::string out;
    for (const auto& c : cols) out += (out.empty() ? "" : ", ") + c.name();
    return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<std::size_t>& keep) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(keep[j]));
    return out;
}

double mean_square(const std::vector<double>& r, std::span<const std::uint8_t> rows) {
    double ss = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!rows[i] || !std::isfinite(r[i])) continue;
        ss += r[i] * r[i];
        ++n;
    }
    return n ? ss / static_cast<double>(n) : kNaN;
}

}  // namespace

std::string Column::name() const {
    std::string s(series_name(source));
    if (gate != Gate::none) s += "@" + std::string(gate_name(gate));
    return s + "[t-" + std::to_string(lag) + "]";
}

Design design_matrix(const HourlyPanel& panel, std::span<const LagSpec> specs, std::span<const std::uint8_t> mask,
                     const SeasonMask& season) {
    if (mask.size() != panel.size()) throw PreconditionError("design_matrix: mask length differs from the panel");
    if (specs.empty()) throw PreconditionError("design_matrix: no regressors specified");
    season.validate();
    std::vector<Column> cols;
    for (const auto& spec : specs) {
        if (!panel.has(spec.source)) {
            throw PreconditionError("design_matrix: panel has no series " + std::string(series_name(spec.source)));
        }
        std::set<int> seen;
        for (int lag : spec.lags) {
            if (lag < 0) throw PreconditionError("design_matrix: negative lag");
            if (!seen.insert(lag).second) throw PreconditionError("design_matrix: repeated lag in one spec");
            cols.push_back({spec.source, spec.gate, lag});
        }
    }

    Design d;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < panel.size(); ++i) {
        if (!mask[i]) continue;
        std::vector<double> v(cols.size());
        bool ok = true;
        for (std::size_t j = 0; j < cols.size() && ok; ++j) {
            v[j] = column_value(panel, cols[j], i, season);
            ok = std::isfinite(v[j]);
        }
        if (!ok) {
            d.dropped_rows.push_back(i);
            continue;
        }
        d.rows.push_back(i);
        rows.push_back(std::move(v));
    }
    if (rows.empty()) throw PreconditionError("design_matrix: empty effective sample after dropping missing rows");

    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        bool nonzero = std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r[j] != 0.0; });
        if (nonzero) keep.push_back(j);
        else d.warnings.push_back("dropped all-zero column " + cols[j].name());
    }
    if (keep.empty()) throw PreconditionError("design_matrix: every column is zero on the sample");

    d.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < keep.size(); ++j) {
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][keep[j]];
        }
    }
    for (std::size_t j : keep) d.columns.push_back(cols[j]);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.X, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    double smin = s(s.size() - 1);
    if (!(smin > 0.0) || s(0) / smin > 1e10) {
        Eigen::VectorXd v = svd.matrixV().col(s.size() - 1).cwiseAbs();
        std::vector<Column> involved;
        for (Eigen::Index j = 0; j < v.size(); ++j) {
            if (v(j) > 0.1 * v.maxCoeff()) involved.push_back(d.columns[static_cast<std::size_t>(j)]);
        }
        throw DegenerateError("design_matrix: collinear columns (condition number above 1e10): " +
                              join_names(involved));
    }
    return d;
}

StepResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const auto n = X.rows();
    const auto k = X.cols();
    if (y.size() != n) throw PreconditionError("ols: target length differs from design rows");
    if (n < k + 10) {
        throw PreconditionError("ols: need at least " + std::to_string(k + 10) + " rows for " + std::to_string(k) +
                                " regressors, got " + std::to_string(n));
    }
    auto ls = linalg::least_squares(X, y);
    StepResult r;
    r.n = static_cast<std::size_t>(n);
    const double df = static_cast<double>(n - k);
    r.sigma2 = ls.ssr / df;
    for (Eigen::Index j = 0; j < k; ++j) {
        double b = ls.coef(j);
        double se = std::sqrt(std::max(0.0, r.sigma2 * ls.cov_unscaled(j, j)));
        double t = se > 0.0 ? b / se : (b == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), b));
        r.coefficients.push_back(b);
        r.se.push_back(se);
        r.t_values.push_back(t);
        r.p_values.push_back(std::isinf(t) ? 0.0 : dist::student_t_two_sided(t, df));
    }
    r.residuals.assign(ls.residuals.data(), ls.residuals.data() + ls.residuals.size());
    return r;
}

double contribution(const HourlyPanel& panel, std::span<const Column> columns, std::span<const double> coefficients,
                    std::size_t row, const SeasonMask& season) {
    double acc = 0.0;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        double v = column_value(panel, columns[j], row, season);
        if (!std::isfinite(v)) return kNaN;
        acc += coefficients[j] * v;
    }
    return acc;
}

StagedResult staged_regression(const HourlyPanel& panel, Series target, std::span<const Stage> stages,
                               std::span<const std::uint8_t> train, std::span<const std::uint8_t> test,
                               const StagedOptions& options) {
    if (stages.empty()) throw PreconditionError("staged_regression: no stages");
    if (train.size() != panel.size() || test.size() != panel.size()) {
        throw PreconditionError("staged_regression: row masks differ in length from the panel");
    }
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw PreconditionError("staged_regression: alpha must be in (0, 1)");

    StagedResult out;
    auto tcol = panel.column(target);
    out.residuals.assign(tcol.begin(), tcol.end());

    for (const auto& stage : stages) {
        StepResult step;
        try {
            std::vector<std::uint8_t> fit_rows(panel.size());
            for (std::size_t i = 0; i < panel.size(); ++i) fit_rows[i] = train[i] && std::isfinite(out.residuals[i]);
            auto design = design_matrix(panel, stage.specs, fit_rows, options.season);
            Eigen::VectorXd y(static_cast<Eigen::Index>(design.rows.size()));
            for (std::size_t i = 0; i < design.rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = out.residuals[design.rows[i]];

            std::vector<std::size_t> keep(design.columns.size());
            for (std::size_t j = 0; j < keep.size(); ++j) keep[j] = j;
            while (!keep.empty()) {
                step = ols(select_columns(design.X, keep), y);
                std::size_t worst = 0;
                double pmax = -1.0;
                for (std::size_t j = 0; j < keep.size(); ++j) {
                    double p = std::isnan(step.p_values[j]) ? 1.0 : step.p_values[j];
                    if (p > pmax) {
                        pmax = p;
                        worst = j;
                    }
                }
                if (pmax <= options.alpha) break;
                step.pruned.push_back(design.columns[keep[worst]]);
                keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(worst));
            }
            auto pruned = step.pruned;
            if (keep.empty()) {
                step = StepResult{};
                step.pruned = std::move(pruned);
            } else {
                // ols() resets pruned on each refit; keep the full history.
                std::vector<Column> all_pruned;
                for (std::size_t j = 0; j < design.columns.size(); ++j) {
                    if (std::find(keep.begin(), keep.end(), j) == keep.end()) all_pruned.push_back(design.columns[j]);
                }
                step.pruned = std::move(all_pruned);
                for (std::size_t j : keep) step.columns.push_back(design.columns[j]);
            }
            step.warnings = design.warnings;
        } catch (const Error& e) {
            throw Error(e.kind(), "stage '" + stage.name + "': " + e.what());
        }
        step.stage = stage.name;

        if (!step.columns.empty()) {
            for (std::size_t i = 0; i < panel.size(); ++i) {
                if (!std::isfinite(out.residuals[i])) continue;
                out.residuals[i] -= contribution(panel, step.columns, step.coefficients, i, options.season);
            }
        }
        step.train_mse = mean_square(out.residuals, train);
        step.test_mse = mean_square(out.residuals, test);
        out.steps.push_back(std::move(step));
    }
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw PreconditionError("quantile: empty sample");
    std::sort(values.begin(), values.end());
    double h = (static_cast<double>(values.size()) - 1.0) * q;
    auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

FitMetrics metrics(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != predicted.size()) throw PreconditionError("metrics: series differ in length");
    std::vector<double> y, e;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!std::isfinite(truth[i]) || !std::isfinite(predicted[i])) continue;
        y.push_back(truth[i]);
        e.push_back(truth[i] - predicted[i]);
    }
    if (y.size() < 2) throw PreconditionError("metrics: need at least 2 complete pairs");

    auto r2 = [](const std::vector<double>& yy, const std::vector<double>& ee) {
        double mean = 0.0;
        for (double v : yy) mean += v;
        mean /= static_cast<double>(yy.size());
        double sst = 0.0, sse = 0.0;
        for (std::size_t i = 0; i < yy.size(); ++i) {
            sst += (yy[i] - mean) * (yy[i] - mean);
            sse += ee[i] * ee[i];
        }
        return sst > 0.0 ? 1.0 - sse / sst : kNaN;
    };

    FitMetrics m;
    m.n = y.size();
    double sse = 0.0, ape = 0.0;
    std::size_t n_ape = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sse += e[i] * e[i];
        if (std::abs(y[i]) < 1e-9) {
            ++m.mape_excluded;
        } else {
            ape += std::abs(e[i] / y[i]);
            ++n_ape;
        }
    }
    if (n_ape == 0) throw PreconditionError("metrics: MAPE undefined, every true value is zero");
    m.mse = sse / static_cast<double>(y.size());
    m.rmse = std::sqrt(m.mse);
    m.mape = 100.0 * ape / static_cast<double>(n_ape);
    m.r_squared = r2(y, e);

    double lo = quantile(e, 0.125), hi = quantile(e, 0.875);
    std::vector<double> yk, ek;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (e[i] >= lo && e[i] <= hi) {
            yk.push_back(y[i]);
            ek.push_back(e[i]);
        }
    }
    m.r_squared_iqr75 = yk.size() >= 2 ? r2(yk, ek) : kNaN;
    return m;
}

}  // namespace minerdr::regress
