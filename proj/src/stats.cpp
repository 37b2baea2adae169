#include "minerdr/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "minerdr/distributions.hpp"
#include "minerdr/error.hpp"
#include "minerdr/linalg.hpp"

namespace minerdr::stats {

namespace {

// MacKinnon (1994) response surface for one series (N = 1), indexed by
// regression variant {none, constant, constant_trend}.
struct MacKinnonSurface {
    double tau_min;
    double tau_max;
    double tau_star;
    std::array<double, 3> small_p;
    std::array<double, 4> large_p;
};

constexpr std::array<MacKinnonSurface, 3> kSurface = {{
    {-19.04, std::numeric_limits<double>::infinity(), -1.04, {0.6344, 1.2378, 3.2496e-2},
     {0.4797, 0.93557, -0.06999, 0.033066}},
    {-18.83, 2.74, -1.61, {2.1659, 1.4412, 3.8269e-2}, {1.7339, 0.93202, -0.12745, -0.010368}},
    {-16.18, 0.7, -2.89, {3.2512, 1.6047, 4.9588e-2}, {2.5261, 0.61654, -0.37956, -0.060285}},
}};

// MacKinnon (2010) critical-value response surfaces, N = 1: rows 1%, 5%, 10%;
// cv = c0 + c1/T + c2/T^2 + c3/T^3.
constexpr std::array<std::array<std::array<double, 4>, 3>, 3> kCrit2010 = {{
    {{{-2.56574, -2.2358, -3.627, 0.0}, {-1.94100, -0.2686, -3.365, 31.223}, {-1.61682, 0.2656, -2.714, 25.364}}},
    {{{-3.43035, -6.5393, -16.786, -79.433}, {-2.86154, -2.8903, -4.234, -40.040}, {-2.56677, -1.5384, -2.809, 0.0}}},
    {{{-3.95877, -9.0531, -28.428, -134.155},
      {-3.41049, -4.3904, -9.036, -45.374},
      {-3.12705, -2.5856, -3.925, -22.380}}},
}};

std::size_t trend_columns(AdfRegression r) {
    switch (r) {
        case AdfRegression::none: return 0;
        case AdfRegression::constant: return 1;
        case AdfRegression::constant_trend: return 2;
    }
    return 1;
}

std::string_view regression_tag(AdfRegression r) {
    switch (r) {
        case AdfRegression::none: return "n";
        case AdfRegression::constant: return "c";
        case AdfRegression::constant_trend: return "ct";
    }
    return "c";
}

struct CentralMoments {
    double mean = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
};

CentralMoments central_moments(std::span<const double> x) {
    CentralMoments m;
    const double n = static_cast<double>(x.size());
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    for (double v : x) {
        double d = v - m.mean;
        double d2 = d * d;
        m.m2 += d2;
        m.m3 += d2 * d;
        m.m4 += d2 * d2;
    }
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    return m;
}

void require_finite(std::span<const double> x, const char* what) {
    for (double v : x) {
        if (!std::isfinite(v)) throw PreconditionError(std::string(what) + ": series contains missing or non-finite values");
    }
}

double ols_aic(double ssr, std::size_t nobs, std::size_t k) {
    const double n = static_cast<double>(nobs);
    double llf = -0.5 * n * (std::log(2.0 * M_PI) + std::log(ssr / n) + 1.0);
    return -2.0 * llf + 2.0 * static_cast<double>(k);
}

// ADF regression of dx_t on [x_{t-1}, dx_{t-1..t-lags}, deterministic terms]
// over the last `nobs` available rows.
struct AdfFit {
    double tau = 0.0;
    double aic = 0.0;
    std::size_t nobs = 0;
};

AdfFit adf_regression(std::span<const double> x, std::size_t lags, std::size_t nobs, AdfRegression reg) {
    const std::size_t nd = x.size() - 1;  // length of the differenced series
    const std::size_t k = 1 + lags + trend_columns(reg);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(nobs), static_cast<Eigen::Index>(k));
    Eigen::VectorXd y(static_cast<Eigen::Index>(nobs));
    for (std::size_t r = 0; r < nobs; ++r) {
        std::size_t t = nd - nobs + r;  // index into the differenced series
        auto row = static_cast<Eigen::Index>(r);
        y(row) = x[t + 1] - x[t];
        X(row, 0) = x[t];
        for (std::size_t j = 1; j <= lags; ++j) X(row, static_cast<Eigen::Index>(j)) = x[t + 1 - j] - x[t - j];
        std::size_t c = 1 + lags;
        if (reg != AdfRegression::none) X(row, static_cast<Eigen::Index>(c++)) = 1.0;
        if (reg == AdfRegression::constant_trend) X(row, static_cast<Eigen::Index>(c)) = static_cast<double>(r + 1);
    }
    auto ls = linalg::least_squares(X, y);
    double sigma2 = ls.ssr / static_cast<double>(nobs - k);
    AdfFit fit;
    fit.tau = ls.coef(0) / std::sqrt(sigma2 * ls.cov_unscaled(0, 0));
    fit.aic = ols_aic(ls.ssr, nobs, k);
    fit.nobs = nobs;
    return fit;
}

}  // namespace

Moments moments(std::span<const double> x) {
    if (x.size() < 3) throw PreconditionError("moments: need at least 3 observations");
    require_finite(x, "moments");
    auto m = central_moments(x);
    if (!(m.m2 > 0.0)) throw DegenerateError("moments: zero variance");
    const double n = static_cast<double>(x.size());
    Moments out;
    out.mean = m.mean;
    out.std = std::sqrt(m.m2 * n / (n - 1.0));
    double g1 = m.m3 / std::pow(m.m2, 1.5);
    out.skewness = std::sqrt(n * (n - 1.0)) / (n - 2.0) * g1;
    return out;
}

TestReport jarque_bera(std::span<const double> x) {
    if (x.size() < 30) throw PreconditionError("jarque_bera: need at least 30 observations");
    require_finite(x, "jarque_bera");
    auto m = central_moments(x);
    if (!(m.m2 > 0.0)) throw DegenerateError("jarque_bera: zero variance");
    const double n = static_cast<double>(x.size());
    double s = m.m3 / std::pow(m.m2, 1.5);
    double k = m.m4 / (m.m2 * m.m2) - 3.0;
    TestReport r;
    r.name = "jarque_bera";
    r.statistic = n / 6.0 * (s * s + 0.25 * k * k);
    r.p_value = dist::chi2_sf(r.statistic, 2.0);
    r.df_or_lags = 2;
    r.decision_note = *r.p_value < 0.05 ? "reject normality at 5%" : "normality not rejected at 5%";
    r.extras["skewness"] = s;
    r.extras["excess_kurtosis"] = k;
    return r;
}

double mackinnon_p(double tau, AdfRegression regression) {
    const auto& s = kSurface[static_cast<std::size_t>(regression)];
    if (tau > s.tau_max) return 1.0;
    if (tau < s.tau_min) return 0.0;
    double z = 0.0;
    if (tau <= s.tau_star) {
        z = s.small_p[0] + tau * (s.small_p[1] + tau * s.small_p[2]);
    } else {
        z = s.large_p[0] + tau * (s.large_p[1] + tau * (s.large_p[2] + tau * s.large_p[3]));
    }
    return dist::normal_cdf(z);
}

double mackinnon_crit(double level, AdfRegression regression, std::size_t nobs) {
    std::size_t row = 0;
    if (level == 0.01) row = 0;
    else if (level == 0.05) row = 1;
    else if (level == 0.10) row = 2;
    else throw PreconditionError("mackinnon_crit: level must be 0.01, 0.05 or 0.10");
    const auto& c = kCrit2010[static_cast<std::size_t>(regression)][row];
    double inv = 1.0 / static_cast<double>(nobs);
    return c[0] + inv * (c[1] + inv * (c[2] + inv * c[3]));
}

TestReport adf_test(std::span<const double> x, const AdfOptions& options) {
    require_finite(x, "adf_test");
    const std::size_t n = x.size();
    const std::size_t ntrend = trend_columns(options.regression);
    std::size_t max_lag = options.max_lag.value_or(
        static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25))));
    if (n / 2 > ntrend + 1) max_lag = std::min(max_lag, n / 2 - ntrend - 1);
    if (n < max_lag + 51) {
        throw PreconditionError("adf_test: need at least 50 observations after lagging (got " +
                                std::to_string(n) + " with max lag " + std::to_string(max_lag) + ")");
    }

    std::size_t lag = max_lag;
    if (!options.fixed_lag) {
        const std::size_t common = n - 1 - max_lag;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l <= max_lag; ++l) {
            double aic = adf_regression(x, l, common, options.regression).aic;
            if (aic < best) {
                best = aic;
                lag = l;
            }
        }
    }
    auto fit = adf_regression(x, lag, n - 1 - lag, options.regression);

    TestReport r;
    r.name = "adf";
    r.statistic = fit.tau;
    r.p_value = mackinnon_p(fit.tau, options.regression);
    r.df_or_lags = static_cast<long>(lag);
    r.extras["nobs"] = static_cast<double>(fit.nobs);
    r.extras["cv_1pct"] = mackinnon_crit(0.01, options.regression, fit.nobs);
    r.extras["cv_5pct"] = mackinnon_crit(0.05, options.regression, fit.nobs);
    r.extras["cv_10pct"] = mackinnon_crit(0.10, options.regression, fit.nobs);
    r.decision_note = std::string("regression=") + std::string(regression_tag(options.regression)) +
                      (*r.p_value < 0.05 ? "; unit root rejected at 5% (stationary)"
                                         : "; unit root not rejected at 5%");
    return r;
}

TestReport breusch_pagan(std::span<const double> residuals, const Eigen::MatrixXd& regressors) {
    const auto n = static_cast<Eigen::Index>(residuals.size());
    if (regressors.rows() != n) throw PreconditionError("breusch_pagan: regressors and residuals differ in length");
    if (regressors.cols() == 0) throw PreconditionError("breusch_pagan: no regressors");
    require_finite(residuals, "breusch_pagan");
    Eigen::VectorXd e2(n);
    for (Eigen::Index i = 0; i < n; ++i) e2(i) = residuals[static_cast<std::size_t>(i)] * residuals[static_cast<std::size_t>(i)];
    double mean = e2.mean();
    double tss = (e2.array() - mean).square().sum();
    if (!(tss > 0.0)) throw DegenerateError("breusch_pagan: squared residuals are constant (degenerate auxiliary regression)");

    Eigen::MatrixXd X(n, regressors.cols() + 1);
    X.col(0).setOnes();
    X.rightCols(regressors.cols()) = regressors;
    auto ls = linalg::least_squares(X, e2);
    double r2 = 1.0 - ls.ssr / tss;

    TestReport r;
    r.name = "breusch_pagan";
    r.statistic = static_cast<double>(n) * r2;
    r.df_or_lags = static_cast<long>(regressors.cols());
    r.p_value = dist::chi2_sf(r.statistic, static_cast<double>(regressors.cols()));
    r.decision_note = *r.p_value < 0.05 ? "heteroskedastic at 5%" : "homoskedasticity not rejected at 5%";
    return r;
}

Eigen::MatrixXd hour_of_day_dummies(Hour start, std::size_t n) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 23);
    for (std::size_t i = 0; i < n; ++i) {
        unsigned hod = hour_of_day(start + static_cast<std::int64_t>(i));
        if (hod > 0) D(static_cast<Eigen::Index>(i), hod - 1) = 1.0;
    }
    return D;
}

TestReport durbin_watson(std::span<const double> e) {
    if (e.size() < 2) throw PreconditionError("durbin_watson: need at least 2 residuals");
    require_finite(e, "durbin_watson");
    double num = 0.0;
    double den = e[0] * e[0];
    for (std::size_t t = 1; t < e.size(); ++t) {
        double d = e[t] - e[t - 1];
        num += d * d;
        den += e[t] * e[t];
    }
    if (!(den > 0.0)) throw DegenerateError("durbin_watson: residuals are all zero");
    TestReport r;
    r.name = "durbin_watson";
    r.statistic = num / den;
    r.df_or_lags = static_cast<long>(e.size());
    if (r.statistic < 1.5) r.decision_note = "DW < 1.5: positive autocorrelation (scale 0-4, 2 = none)";
    else if (r.statistic > 2.5) r.decision_note = "DW > 2.5: negative autocorrelation (scale 0-4, 2 = none)";
    else r.decision_note = "DW near 2: little first-order autocorrelation (scale 0-4)";
    return r;
}

TestReport ljung_box(std::span<const double> e, std::size_t h, std::size_t fitted_params) {
    if (h <= fitted_params) throw PreconditionError("ljung_box: lags must exceed the number of fitted parameters");
    if (e.size() <= h + 1) throw PreconditionError("ljung_box: series shorter than the number of lags");
    auto r = acf(e, h);
    const double n = static_cast<double>(e.size());
    double q = 0.0;
    for (std::size_t k = 1; k <= h; ++k) q += r[k] * r[k] / (n - static_cast<double>(k));
    q *= n * (n + 2.0);
    TestReport out;
    out.name = "ljung_box";
    out.statistic = q;
    out.df_or_lags = static_cast<long>(h - fitted_params);
    out.p_value = dist::chi2_sf(q, static_cast<double>(h - fitted_params));
    out.decision_note = *out.p_value < 0.05 ? "autocorrelation detected at 5%" : "no autocorrelation detected at 5%";
    out.extras["lags"] = static_cast<double>(h);
    return out;
}

std::vector<double> acf(std::span<const double> x_in, std::size_t max_lag, std::size_t seasonal_period) {
    require_finite(x_in, "acf");
    std::vector<double> x(x_in.begin(), x_in.end());
    if (seasonal_period > 0) {
        if (x.size() <= seasonal_period) throw PreconditionError("acf: series shorter than the seasonal period");
        std::vector<double> d(x.size() - seasonal_period);
        for (std::size_t t = 0; t < d.size(); ++t) d[t] = x[t + seasonal_period] - x[t];
        x = std::move(d);
    }
    if (x.size() < max_lag + 2) throw PreconditionError("acf: max_lag must be below n - 1");
    const double n = static_cast<double>(x.size());
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double c0 = 0.0;
    for (double v : x) c0 += (v - mean) * (v - mean);
    if (!(c0 > 0.0)) throw DegenerateError("acf: zero variance");
    std::vector<double> out(max_lag + 1);
    out[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double ck = 0.0;
        for (std::size_t t = k; t < x.size(); ++t) ck += (x[t] - mean) * (x[t - k] - mean);
        out[k] = ck / c0;
    }
    return out;
}

std::vector<double> pacf(std::span<const double> x, std::size_t max_lag, std::size_t seasonal_period) {
    auto r = acf(x, max_lag, seasonal_period);
    std::vector<double> out(max_lag + 1, 0.0);
    out[0] = 1.0;
    if (max_lag == 0) return out;
    std::vector<double> phi(max_lag + 1, 0.0);
    std::vector<double> prev(max_lag + 1, 0.0);
    phi[1] = r[1];
    out[1] = r[1];
    for (std::size_t k = 2; k <= max_lag; ++k) {
        prev = phi;
        double num = r[k];
        double den = 1.0;
        for (std::size_t j = 1; j < k; ++j) {
            num -= prev[j] * r[k - j];
            den -= prev[j] * r[j];
        }
        phi[k] = num / den;
        for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - phi[k] * prev[k - j];
        out[k] = phi[k];
    }
    return out;
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw PreconditionError("pearson: series differ in length");
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        sx += x[i];
        sy += y[i];
        ++n;
    }
    if (n < 3) throw PreconditionError("pearson: need at least 3 complete pairs");
    double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateError("pearson: a series has zero variance");
    CorrelationResult out;
    out.n = n;
    out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    double df = static_cast<double>(n) - 2.0;
    if (std::abs(out.r) >= 1.0 || df <= 0.0) {
        out.p_value = std::abs(out.r) >= 1.0 ? 0.0 : 1.0;
    } else {
        double t = out.r * std::sqrt(df / (1.0 - out.r * out.r));
        out.p_value = dist::student_t_two_sided(t, df);
    }
    return out;
}

CorrelationResult windowed_correlation(const HourlyPanel& panel, Series x, Series y, const CorrelationWindow& window) {
    if (!panel.has(x) || !panel.has(y)) throw PreconditionError("windowed_correlation: series not present in panel");
    auto xs = panel.column(x);
    auto ys = panel.column(y);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < panel.size(); ++i) {
        Hour h = panel.hour(i);
        if (!window.hours.empty() && !window.hours.count(hour_of_day(h))) continue;
        if (!window.months.empty() && !window.months.count(month_of(h))) continue;
        auto j = static_cast<long long>(i) - window.lag;
        if (j < 0 || j >= static_cast<long long>(panel.size())) continue;
        double xv = xs[i], yv = ys[static_cast<std::size_t>(j)];
        if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
        a.push_back(xv);
        b.push_back(yv);
    }
    if (a.size() < 30) {
        throw PreconditionError("windowed_correlation: filtered sample has " + std::to_string(a.size()) +
                                " pairs, need at least 30");
    }
    auto result = pearson(a, b);
    std::ostringstream note;
    auto join = [&](const std::set<unsigned>& s) {
        if (s.empty()) return std::string("all");
        std::string out;
        for (unsigned v : s) out += (out.empty() ? "" : ",") + std::to_string(v);
        return out;
    };
    note << series_name(x) << " vs " << series_name(y) << "[t-" << window.lag << "] hours=" << join(window.hours)
         << " months=" << join(window.months);
    result.window_note = note.str();
    return result;
}

}  // namespace minerdr::stats
