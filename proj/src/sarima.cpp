#include "minerdr/sarima.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "minerdr/distributions.hpp"

namespace minerdr::sarima {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kHuge = 1e300;

// Dense polynomial in B: c[0] + c[1] B + ... .
using Poly = std::vector<double>;

Poly multiply(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

// 1 + sign * sum c_i B^{i*step}
Poly lag_poly(std::span<const double> c, int step, double sign) {
    Poly out(c.size() * static_cast<std::size_t>(step) + 1, 0.0);
    out[0] = 1.0;
    for (std::size_t i = 0; i < c.size(); ++i) out[(i + 1) * static_cast<std::size_t>(step)] = sign * c[i];
    return out;
}

Poly difference_poly(int d, int D, int S) {
    Poly out{1.0};
    for (int i = 0; i < d; ++i) out = multiply(out, Poly{1.0, -1.0});
    for (int i = 0; i < D; ++i) {
        Poly s(static_cast<std::size_t>(S) + 1, 0.0);
        s[0] = 1.0;
        s[static_cast<std::size_t>(S)] = -1.0;
        out = multiply(out, s);
    }
    return out;
}

struct Term {
    std::size_t lag;
    double coef;
};

// e_t = sum_j ar_j y_{t-j} (lag 0 included) - sum_j ma_j e_{t-j}.
struct Filter {
    std::vector<Term> ar;  // full AR polynomial incl. differencing, lag 0 = 1
    std::vector<Term> ma;  // MA polynomial without lag 0
    std::size_t ar_degree = 0;
    std::size_t ma_degree = 0;
};

std::vector<Term> sparse(const Poly& p, bool skip_zero_lag) {
    std::vector<Term> out;
    for (std::size_t j = skip_zero_lag ? 1 : 0; j < p.size(); ++j) {
        if (p[j] != 0.0) out.push_back({j, p[j]});
    }
    return out;
}

Poly full_ar_poly(const SarimaOrder& o, const SarimaParams& prm) {
    Poly ar = multiply(lag_poly(prm.phi, 1, -1.0), lag_poly(prm.Phi, o.S, -1.0));
    return multiply(ar, difference_poly(o.d, o.D, o.S));
}

Poly full_ma_poly(const SarimaOrder& o, const SarimaParams& prm) {
    return multiply(lag_poly(prm.theta, 1, 1.0), lag_poly(prm.Theta, o.S, 1.0));
}

Filter build_filter(const SarimaOrder& o, const SarimaParams& prm) {
    Poly ar = full_ar_poly(o, prm);
    Poly ma = full_ma_poly(o, prm);
    Filter f;
    f.ar = sparse(ar, false);
    f.ma = sparse(ma, true);
    f.ar_degree = ar.size() - 1;
    f.ma_degree = ma.size() - 1;
    return f;
}

// Residuals e_t for t >= start; zeros before. Returns the sum of squares.
double run_filter(const Filter& f, std::span<const double> y, std::size_t start, std::vector<double>* residuals) {
    std::vector<double> e(y.size(), 0.0);
    double ss = 0.0;
    for (std::size_t t = start; t < y.size(); ++t) {
        double v = 0.0;
        for (const auto& term : f.ar) v += term.coef * y[t - term.lag];
        for (const auto& term : f.ma) {
            if (term.lag <= t) v -= term.coef * e[t - term.lag];
        }
        e[t] = v;
        ss += v * v;
    }
    if (residuals) residuals->insert(residuals->end(), e.begin() + static_cast<std::ptrdiff_t>(start), e.end());
    return ss;
}

// Partial autocorrelations -> coefficients of a stationary 1 - sum a_i B^i.
std::vector<double> pacf_to_ar(std::span<const double> r) {
    std::vector<double> a(r.size()), prev(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        prev = a;
        a[k] = r[k];
        for (std::size_t j = 0; j < k; ++j) a[j] = prev[j] - r[k] * prev[k - 1 - j];
    }
    return a;
}

// Unconstrained vector -> natural coefficients [phi, theta, Phi, Theta].
std::vector<double> to_natural(const SarimaOrder& o, std::span<const double> u) {
    std::vector<double> out;
    out.reserve(u.size());
    std::size_t pos = 0;
    auto block = [&](int n, double sign) {
        std::vector<double> r(static_cast<std::size_t>(n));
        for (auto& v : r) v = std::tanh(u[pos++]);
        for (double c : pacf_to_ar(r)) out.push_back(sign * c);
    };
    block(o.p, 1.0);
    block(o.q, -1.0);
    block(o.P, 1.0);
    block(o.Q, -1.0);
    return out;
}

struct Problem {
    SarimaOrder order;
    std::vector<std::span<const double>> segments;
    std::size_t start = 0;
    std::size_t n_eff = 0;
    mutable int evaluations = 0;

    double css_natural(std::span<const double> c, std::vector<double>* residuals = nullptr) const {
        ++evaluations;
        auto prm = SarimaParams::from_coefficients(order, c, 1.0);
        Filter f = build_filter(order, prm);
        double total = 0.0;
        for (auto seg : segments) total += run_filter(f, seg, start, residuals);
        return total;
    }

    double objective(std::span<const double> u) const {
        double s = css_natural(to_natural(order, u));
        if (!std::isfinite(s) || s <= 0.0) return kHuge;
        return std::log(s / static_cast<double>(n_eff));
    }
};

struct MinResult {
    std::vector<double> x;
    double f = kHuge;
    bool converged = false;
};

MinResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                      double step, int max_evals, double tol, int& evals) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);
    evals += static_cast<int>(n + 1);

    MinResult res;
    std::vector<std::size_t> idx(n + 1);
    while (evals < max_evals) {
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> sp(n + 1);
        std::vector<double> sf(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            sp[i] = pts[idx[i]];
            sf[i] = fv[idx[i]];
        }
        pts = std::move(sp);
        fv = std::move(sf);

        double size = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) size = std::max(size, std::abs(pts[i][j] - pts[0][j]));
        }
        if (fv[n] - fv[0] <= tol && size <= 1e-6) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);
        }
        auto along = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + t * (pts[n][j] - centroid[j]);
            return x;
        };
        auto xr = along(-1.0);
        double fr = f(xr);
        ++evals;
        if (fr < fv[0]) {
            auto xe = along(-2.0);
            double fe = f(xe);
            ++evals;
            if (fe < fr) {
                pts[n] = std::move(xe);
                fv[n] = fe;
            } else {
                pts[n] = std::move(xr);
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            pts[n] = std::move(xr);
            fv[n] = fr;
        } else {
            bool outside = fr < fv[n];
            auto xc = along(outside ? -0.5 : 0.5);
            double fc = f(xc);
            ++evals;
            if (fc < (outside ? fr : fv[n])) {
                pts[n] = std::move(xc);
                fv[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[0][j] + 0.5 * (pts[i][j] - pts[0][j]);
                    fv[i] = f(pts[i]);
                    ++evals;
                }
            }
        }
    }
    auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    res.x = pts[best];
    res.f = fv[best];
    return res;
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     const std::vector<double>& x, int& evals) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
        evals += 2;
    }
    return g;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Quasi-Newton polish from a simplex optimum.
MinResult bfgs(const std::function<double(const std::vector<double>&)>& f, MinResult start, int max_iter,
               int& evals) {
    const std::size_t n = start.x.size();
    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    auto x = start.x;
    double fx = start.f;
    auto g = numeric_gradient(f, x, evals);
    for (int it = 0; it < max_iter; ++it) {
        if (max_abs(g) < 1e-7) {
            start.converged = true;
            break;
        }
        Eigen::VectorXd gv = Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(n));
        Eigen::VectorXd dir = -Hinv * gv;
        if (dir.dot(gv) >= 0.0) {
            Hinv.setIdentity();
            dir = -gv;
        }
        double t = 1.0;
        std::vector<double> xn(n);
        double fn = kHuge;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t j = 0; j < n; ++j) xn[j] = x[j] + t * dir(static_cast<Eigen::Index>(j));
            fn = f(xn);
            ++evals;
            if (fn <= fx + 1e-4 * t * dir.dot(gv)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
        auto gn = numeric_gradient(f, xn, evals);
        Eigen::VectorXd s(static_cast<Eigen::Index>(n)), y(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j) {
            s(static_cast<Eigen::Index>(j)) = xn[j] - x[j];
            y(static_cast<Eigen::Index>(j)) = gn[j] - g[j];
        }
        double sy = s.dot(y);
        if (sy > 1e-300) {
            double rho = 1.0 / sy;
            Eigen::MatrixXd I = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        bool small_step = std::abs(fx - fn) < 1e-15 * (1.0 + std::abs(fx));
        x = std::move(xn);
        fx = fn;
        g = std::move(gn);
        if (small_step) {
            start.converged = start.converged || max_abs(g) < 1e-5;
            break;
        }
    }
    if (fx <= start.f) {
        start.x = x;
        start.f = fx;
    }
    if (max_abs(g) < 1e-5) start.converged = true;
    return start;
}

// Hessian of the negative concentrated log-likelihood in natural parameters.
Eigen::MatrixXd hessian(const Problem& pr, const std::vector<double>& c) {
    const std::size_t k = c.size();
    const double half_n = 0.5 * static_cast<double>(pr.n_eff);
    auto nll = [&](const std::vector<double>& x) {
        double s = pr.css_natural(x);
        return half_n * std::log(s / static_cast<double>(pr.n_eff));
    };
    Eigen::MatrixXd H(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    const double f0 = nll(c);
    std::vector<double> h(k);
    for (std::size_t i = 0; i < k; ++i) h[i] = 1e-4 * std::max(1.0, std::abs(c[i]));
    for (std::size_t i = 0; i < k; ++i) {
        auto xp = c, xm = c;
        xp[i] += h[i];
        xm[i] -= h[i];
        H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = (nll(xp) - 2.0 * f0 + nll(xm)) / (h[i] * h[i]);
        for (std::size_t j = 0; j < i; ++j) {
            auto a = c, b = c, d = c, e = c;
            a[i] += h[i]; a[j] += h[j];
            b[i] += h[i]; b[j] -= h[j];
            d[i] -= h[i]; d[j] += h[j];
            e[i] -= h[i]; e[j] -= h[j];
            double v = (nll(a) - nll(b) - nll(d) + nll(e)) / (4.0 * h[i] * h[j]);
            H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    return H;
}

}  // namespace

std::string SarimaOrder::label() const {
    std::ostringstream os;
    os << '(' << p << ',' << d << ',' << q << ")(" << P << ',' << D << ',' << Q << ")[" << S << ']';
    return os.str();
}

void SarimaOrder::validate() const {
    for (int v : {p, d, q, P, D, Q}) {
        if (v < 0 || v > 5) throw PreconditionError("SARIMA order " + label() + ": orders must lie in 0..5");
    }
    if (S < 1) throw PreconditionError("SARIMA order " + label() + ": season length must be >= 1");
}

SarimaOrder parse_order(std::string_view text) {
    std::string digits;
    for (char c : text) digits += (std::isdigit(static_cast<unsigned char>(c)) || c == '-') ? c : ' ';
    std::istringstream in(digits);
    std::vector<int> v;
    int x = 0;
    while (in >> x) v.push_back(x);
    if (v.size() != 7 && v.size() != 3) {
        throw PreconditionError("cannot parse SARIMA order '" + std::string(text) + "'");
    }
    SarimaOrder o;
    o.p = v[0];
    o.d = v[1];
    o.q = v[2];
    if (v.size() == 7) {
        o.P = v[3];
        o.D = v[4];
        o.Q = v[5];
        o.S = v[6];
    }
    o.validate();
    return o;
}

std::vector<double> SarimaParams::coefficients() const {
    std::vector<double> c;
    c.insert(c.end(), phi.begin(), phi.end());
    c.insert(c.end(), theta.begin(), theta.end());
    c.insert(c.end(), Phi.begin(), Phi.end());
    c.insert(c.end(), Theta.begin(), Theta.end());
    return c;
}

SarimaParams SarimaParams::from_coefficients(const SarimaOrder& o, std::span<const double> c, double sigma) {
    if (c.size() != static_cast<std::size_t>(o.num_coefficients())) {
        throw PreconditionError("SARIMA coefficient vector does not match order " + o.label());
    }
    SarimaParams prm;
    auto it = c.begin();
    prm.phi.assign(it, it + o.p);
    it += o.p;
    prm.theta.assign(it, it + o.q);
    it += o.q;
    prm.Phi.assign(it, it + o.P);
    it += o.P;
    prm.Theta.assign(it, it + o.Q);
    prm.sigma = sigma;
    return prm;
}

std::vector<std::string> SarimaFit::parameter_names() const {
    std::vector<std::string> names;
    for (int i = 1; i <= order.p; ++i) names.push_back("phi" + std::to_string(i));
    for (int i = 1; i <= order.q; ++i) names.push_back("theta" + std::to_string(i));
    for (int i = 1; i <= order.P; ++i) names.push_back("Phi" + std::to_string(i));
    for (int i = 1; i <= order.Q; ++i) names.push_back("Theta" + std::to_string(i));
    names.push_back("sigma");
    return names;
}

std::vector<double> difference(std::span<const double> x, int d, int D, int S) {
    if (d < 0 || D < 0 || S < 1) throw PreconditionError("difference: invalid orders");
    auto lead = static_cast<std::size_t>(d + D * S);
    if (x.size() <= lead) throw PreconditionError("difference: series shorter than d + D*S + 1");
    std::vector<double> w(x.begin(), x.end());
    for (int i = 0; i < D; ++i) {
        for (std::size_t t = w.size(); t-- > static_cast<std::size_t>(S);) w[t] -= w[t - static_cast<std::size_t>(S)];
        w.erase(w.begin(), w.begin() + S);
    }
    for (int i = 0; i < d; ++i) {
        for (std::size_t t = w.size(); t-- > 1;) w[t] -= w[t - 1];
        w.erase(w.begin());
    }
    return w;
}

std::vector<double> integrate(std::span<const double> w, int d, int D, int S, std::span<const double> initial) {
    if (d < 0 || D < 0 || S < 1) throw PreconditionError("integrate: invalid orders");
    auto lead = static_cast<std::size_t>(d + D * S);
    if (initial.size() < lead) {
        throw PreconditionError("integrate: need " + std::to_string(lead) + " initial values, got " +
                                std::to_string(initial.size()));
    }
    // y_t = w_t - sum_{j>=1} c_j y_{t-j} with c the differencing polynomial.
    Poly c = difference_poly(d, D, S);
    std::vector<double> y(initial.begin(), initial.begin() + static_cast<std::ptrdiff_t>(lead));
    y.reserve(lead + w.size());
    for (double v : w) {
        std::size_t t = y.size();
        double acc = v;
        for (std::size_t j = 1; j < c.size(); ++j) {
            if (c[j] != 0.0) acc -= c[j] * y[t - j];
        }
        y.push_back(acc);
    }
    return y;
}

bool is_stationary(std::span<const double> ar) {
    std::size_t n = ar.size();
    while (n > 0 && ar[n - 1] == 0.0) --n;
    if (n == 0) return true;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) C(0, static_cast<Eigen::Index>(j)) = ar[j];
    for (std::size_t i = 1; i < n; ++i) C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    double rmax = es.eigenvalues().cwiseAbs().maxCoeff();
    return rmax < 1.0 - 1e-12;
}

std::vector<double> simulate(const SarimaOrder& order, const SarimaParams& prm, std::size_t n, std::uint64_t seed,
                             std::optional<std::size_t> burn_in) {
    order.validate();
    if (prm.coefficients().size() != static_cast<std::size_t>(order.num_coefficients())) {
        throw PreconditionError("simulate: parameters do not match order " + order.label());
    }
    if (!(prm.sigma > 0.0)) throw PreconditionError("simulate: sigma must be positive");
    auto neg = [](const std::vector<double>& v) {
        std::vector<double> o(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) o[i] = -v[i];
        return o;
    };
    if (!is_stationary(prm.phi) || !is_stationary(prm.Phi)) {
        throw PreconditionError("simulate: AR parameters are not stationary");
    }
    if (!is_stationary(neg(prm.theta)) || !is_stationary(neg(prm.Theta))) {
        throw PreconditionError("simulate: MA parameters are not invertible");
    }
    const std::size_t min_burn = 10 * static_cast<std::size_t>(order.S);
    std::size_t burn = burn_in.value_or(min_burn + 200);
    if (burn < min_burn) throw PreconditionError("simulate: burn_in must be at least 10*S");

    Poly ar = full_ar_poly(order, prm);
    Poly ma = full_ma_poly(order, prm);
    const std::size_t total = n + burn;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> eps(total), y(total, 0.0);
    for (auto& e : eps) e = prm.sigma * normal(rng);
    auto ar_terms = sparse(ar, true);
    auto ma_terms = sparse(ma, true);
    for (std::size_t t = 0; t < total; ++t) {
        double v = eps[t];
        for (const auto& term : ma_terms) {
            if (term.lag <= t) v += term.coef * eps[t - term.lag];
        }
        for (const auto& term : ar_terms) {
            if (term.lag <= t) v -= term.coef * y[t - term.lag];
        }
        y[t] = v;
    }
    return {y.begin() + static_cast<std::ptrdiff_t>(burn), y.end()};
}

double css(std::span<const double> series, const SarimaOrder& order, const SarimaParams& params,
           std::optional<std::size_t> condition_start) {
    std::size_t start = std::max(condition_start.value_or(0), order.condition_length());
    if (series.size() <= start) throw PreconditionError("css: series shorter than the conditioning window");
    return run_filter(build_filter(order, params), series, start, nullptr);
}

std::vector<std::span<const double>> finite_segments(std::span<const double> x, std::size_t min_length) {
    std::vector<std::span<const double>> out;
    std::size_t i = 0;
    while (i < x.size()) {
        while (i < x.size() && !std::isfinite(x[i])) ++i;
        std::size_t j = i;
        while (j < x.size() && std::isfinite(x[j])) ++j;
        if (j > i && j - i >= min_length) out.push_back(x.subspan(i, j - i));
        i = j;
    }
    return out;
}

SarimaFit fit(std::span<const double> series, const SarimaOrder& order, const FitOptions& options) {
    return fit(std::vector<std::span<const double>>{series}, order, options);
}

SarimaFit fit(const std::vector<std::span<const double>>& segments, const SarimaOrder& order,
              const FitOptions& options) {
    order.validate();
    if (segments.empty()) throw PreconditionError("fit: no data segments");
    Problem pr;
    pr.order = order;
    pr.start = std::max(options.condition_start.value_or(0), order.condition_length());
    std::size_t total = 0;
    bool varies = false;
    for (auto seg : segments) {
        for (double v : seg) {
            if (!std::isfinite(v)) throw PreconditionError("fit: series contains gaps; pass gap-free segments");
        }
        if (seg.size() <= pr.start) continue;
        pr.segments.push_back(seg);
        pr.n_eff += seg.size() - pr.start;
        total += seg.size();
        auto w = difference(seg, order.d, order.D, order.S);
        for (std::size_t t = 1; t < w.size() && !varies; ++t) varies = w[t] != w[0];
    }
    const int k = order.num_coefficients();
    const std::size_t needed = 10 * static_cast<std::size_t>(k + 1) + static_cast<std::size_t>(order.d + order.D * order.S);
    if (pr.segments.empty() || total < needed || pr.n_eff <= static_cast<std::size_t>(k + 1)) {
        throw PreconditionError("fit: " + std::to_string(total) + " usable observations are too few for order " +
                                order.label() + " (need " + std::to_string(std::max(needed, pr.start + 1)) + ")");
    }
    if (!varies) throw DegenerateError("fit: differenced series is constant");

    auto f = [&](const std::vector<double>& u) { return pr.objective(u); };
    int evals = 0;
    MinResult best;
    best.x.assign(static_cast<std::size_t>(k), 0.0);
    best.f = f(best.x);
    bool converged = k == 0;
    if (k > 0) {
        double step = 0.5;
        for (int r = 0; r <= options.restarts; ++r) {
            auto res = nelder_mead(f, best.x, step, evals + options.max_evaluations / (options.restarts + 1),
                                   options.tolerance, evals);
            bool improved = res.f < best.f - 1e-12;
            if (res.f <= best.f) best = res;
            if (res.converged && !improved && r > 0) {
                converged = true;
                break;
            }
            step = 0.1;
        }
        auto polished = bfgs(f, best, 200, evals);
        if (polished.f <= best.f) best = polished;
        converged = converged || polished.converged;
    }

    SarimaFit out;
    out.order = order;
    out.condition_start = pr.start;
    out.n_eff = pr.n_eff;
    auto coef = to_natural(order, best.x);
    out.css = pr.css_natural(coef, &out.residuals);
    const double n = static_cast<double>(pr.n_eff);
    const double sigma2 = out.css / n;
    out.params = SarimaParams::from_coefficients(order, coef, std::sqrt(sigma2));
    out.loglik = -0.5 * n * (std::log(2.0 * M_PI * sigma2) + 1.0);
    out.aic = 2.0 * (k + 1) - 2.0 * out.loglik;
    out.evaluations = pr.evaluations;
    out.converged = converged;

    out.se.assign(static_cast<std::size_t>(k) + 1, kNaN);
    out.p_values.assign(static_cast<std::size_t>(k) + 1, kNaN);
    if (k > 0) {
        Eigen::MatrixXd H = hessian(pr, coef);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
            for (int i = 0; i < k; ++i) {
                double v = cov(i, i);
                if (v > 0.0) out.se[static_cast<std::size_t>(i)] = std::sqrt(v);
            }
        }
    }
    out.se[static_cast<std::size_t>(k)] = out.params.sigma / std::sqrt(2.0 * n);
    for (std::size_t i = 0; i <= static_cast<std::size_t>(k); ++i) {
        double value = i < static_cast<std::size_t>(k) ? coef[i] : out.params.sigma;
        if (std::isfinite(out.se[i]) && out.se[i] > 0.0) {
            out.p_values[i] = 2.0 * dist::normal_sf(std::abs(value / out.se[i]));
        }
    }
    if (!converged) {
        throw ConvergenceError("fit: optimizer did not converge for order " + order.label() + " after " +
                                   std::to_string(out.evaluations) + " evaluations",
                               out);
    }
    return out;
}

Selection select_order(const std::vector<std::span<const double>>& segments, std::span<const SarimaOrder> grid,
                       const FitOptions& options) {
    if (grid.empty()) throw PreconditionError("select_order: empty candidate grid");
    FitOptions opt = options;
    std::size_t start = options.condition_start.value_or(0);
    for (const auto& o : grid) start = std::max(start, o.condition_length());
    opt.condition_start = start;

    Selection sel;
    std::optional<SarimaFit> best;
    for (const auto& o : grid) {
        Candidate c;
        c.order = o;
        try {
            auto f = fit(segments, o, opt);
            c.aic = f.aic;
            bool better = !best || f.aic < best->aic - 1e-9 ||
                          (std::abs(f.aic - best->aic) <= 1e-9 && o.num_coefficients() < best->order.num_coefficients());
            if (better) best = std::move(f);
        } catch (const Error& e) {
            c.error = e.what();
        }
        sel.table.push_back(std::move(c));
    }
    if (!best) {
        std::string reasons;
        for (const auto& c : sel.table) reasons += "; " + c.order.label() + ": " + c.error;
        throw DegenerateError("select_order: every candidate failed" + reasons);
    }
    sel.order = best->order;
    sel.fit = std::move(*best);
    return sel;
}

Selection select_order(std::span<const double> series, std::span<const SarimaOrder> grid,
                       const FitOptions& options) {
    return select_order(std::vector<std::span<const double>>{series}, grid, options);
}

Forecast forecast(const SarimaFit& fit, std::size_t horizon, std::span<const double> history) {
    Forecast out;
    if (horizon == 0) return out;
    const auto& o = fit.order;
    Poly ar = full_ar_poly(o, fit.params);
    Poly ma = full_ma_poly(o, fit.params);
    const std::size_t start = o.condition_length();
    const std::size_t needed = start + (ma.size() - 1);
    if (history.size() < std::max<std::size_t>(needed, 1)) {
        throw PreconditionError("forecast: need at least " + std::to_string(needed) +
                                " observations of history, got " + std::to_string(history.size()));
    }
    for (double v : history) {
        if (!std::isfinite(v)) throw PreconditionError("forecast: history contains gaps");
    }
    Filter f = build_filter(o, fit.params);
    std::vector<double> e;
    run_filter(f, history, start, &e);
    e.insert(e.begin(), start, 0.0);

    std::vector<double> y(history.begin(), history.end());
    const std::size_t T = y.size();
    y.resize(T + horizon, 0.0);
    e.resize(T + horizon, 0.0);
    for (std::size_t h = 0; h < horizon; ++h) {
        std::size_t t = T + h;
        double v = 0.0;
        for (std::size_t j = 1; j < ar.size(); ++j) {
            if (ar[j] != 0.0) v -= ar[j] * y[t - j];
        }
        for (std::size_t j = 1; j < ma.size(); ++j) {
            if (ma[j] != 0.0 && t >= j) v += ma[j] * e[t - j];
        }
        y[t] = v;
        out.mean.push_back(v);
    }
    auto psi = psi_weights(o, fit.params, horizon);
    double acc = 0.0;
    for (double v : psi) {
        acc += v * v;
        out.std.push_back(fit.params.sigma * std::sqrt(acc));
    }
    return out;
}

std::vector<double> psi_weights(const SarimaOrder& order, const SarimaParams& params, std::size_t n) {
    Poly ar = full_ar_poly(order, params);
    Poly ma = full_ma_poly(order, params);
    std::vector<double> psi(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double v = j == 0 ? 1.0 : (j < ma.size() ? ma[j] : 0.0);
        for (std::size_t i = 1; i <= j && i < ar.size(); ++i) v -= ar[i] * psi[j - i];
        psi[j] = v;
    }
    return psi;
}

std::vector<double> one_step_predictions(const SarimaOrder& order, const SarimaParams& params,
                                         std::span<const double> series) {
    const std::size_t start = order.condition_length();
    std::vector<double> out(series.size(), kNaN);
    if (series.size() <= start) return out;
    std::vector<double> e;
    run_filter(build_filter(order, params), series, start, &e);
    for (std::size_t t = start; t < series.size(); ++t) out[t] = series[t] - e[t - start];
    return out;
}

}  // namespace minerdr::sarima
