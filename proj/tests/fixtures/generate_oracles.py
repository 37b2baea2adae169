"""Regenerates oracles.json from statsmodels/scipy reference implementations."""

import json
from pathlib import Path

import numpy as np
from scipy import optimize, stats
from statsmodels.stats.diagnostic import acorr_ljungbox, het_breuschpagan
from statsmodels.stats.stattools import durbin_watson
from statsmodels.tsa.adfvalues import mackinnoncrit, mackinnonp
from statsmodels.tsa.stattools import acf, adfuller, pacf
import statsmodels.api as sm

rng = np.random.default_rng(20240917)
out = {}


def floats(a):
    return [float(v) for v in np.asarray(a).ravel()]


# ADF
adf_cases = []
rw = np.cumsum(rng.standard_normal(300))
ar = np.zeros(500)
e = rng.standard_normal(500)
for t in range(1, 500):
    ar[t] = 0.5 * ar[t - 1] + e[t]
tr = 0.05 * np.arange(250) + np.cumsum(rng.standard_normal(250)) * 0.3 + rng.standard_normal(250)
for name, x, reg in [("random_walk", rw, "c"), ("ar_half", ar, "c"), ("trend", tr, "ct"), ("ar_none", ar, "n")]:
    stat, p, lag, nobs, crit, _ = adfuller(x, regression=reg, autolag="AIC")
    adf_cases.append({"name": name, "x": floats(x), "regression": reg, "stat": stat, "p": p, "lag": lag,
                      "nobs": nobs, "cv": [crit["1%"], crit["5%"], crit["10%"]]})
    stat, p, lag, nobs, crit = adfuller(x, regression=reg, maxlag=3, autolag=None)
    adf_cases.append({"name": name + "_fixed3", "x": floats(x), "regression": reg, "stat": stat, "p": p, "lag": lag,
                      "nobs": nobs, "cv": [crit["1%"], crit["5%"], crit["10%"]], "fixed_lag": 3})
out["adf"] = adf_cases

out["mackinnon"] = [
    {"tau": tau, "regression": reg, "p": float(mackinnonp(tau, regression=reg, N=1)),
     "crit_nobs": 250, "crit": floats(mackinnoncrit(N=1, regression=reg, nobs=250))}
    for tau in (-4.5, -3.1, -2.0, -0.5, 0.8) for reg in ("n", "c", "ct")
]

# Jarque-Bera
x = rng.gamma(2.0, 1.0, 200)
jb = stats.jarque_bera(x)
out["jarque_bera"] = {"x": floats(x), "stat": float(jb.statistic), "p": float(jb.pvalue),
                      "skewness": float(stats.skew(x)), "excess_kurtosis": float(stats.kurtosis(x)),
                      "g1": float(stats.skew(x, bias=False)), "std": float(np.std(x, ddof=1))}

# Breusch-Pagan (studentized)
X = rng.standard_normal((300, 2))
u = rng.standard_normal(300) * (1.0 + 0.5 * np.abs(X[:, 0]))
lm, lmp, _, _ = het_breuschpagan(u, sm.add_constant(X), robust=True)
out["breusch_pagan"] = {"e": floats(u), "X": [floats(r) for r in X], "lm": lm, "p": lmp}

# Ljung-Box, Durbin-Watson, ACF, PACF
y = np.zeros(400)
e = rng.standard_normal(400)
for t in range(1, 400):
    y[t] = 0.2 * y[t - 1] + e[t]
lb0 = acorr_ljungbox(y, lags=[10], model_df=0)
lb2 = acorr_ljungbox(y, lags=[10], model_df=2)
ys = y[24:] - y[:-24]
out["series"] = {
    "y": floats(y),
    "lb10": {"q": float(lb0["lb_stat"].iloc[0]), "p": float(lb0["lb_pvalue"].iloc[0]),
             "p_df2": float(lb2["lb_pvalue"].iloc[0])},
    "dw": float(durbin_watson(y)),
    "acf10": floats(acf(y, nlags=10, fft=False)),
    "pacf10": floats(pacf(y, nlags=10, method="ldb")),
    "acf_seasonal24": floats(acf(ys, nlags=5, fft=False)),
}

# Pearson
a = rng.standard_normal(80)
b = 0.3 * a + rng.standard_normal(80)
r = stats.pearsonr(a, b)
out["pearson"] = {"x": floats(a), "y": floats(b), "r": float(r.statistic), "p": float(r.pvalue)}

# Distributions
pts = [-6.0, -3.2, -1.0, -0.1, 0.0, 0.4, 1.96, 3.0, 7.5]
probs = [1e-10, 1e-6, 0.001, 0.025, 0.3, 0.5, 0.8, 0.975, 0.999999]
out["distributions"] = {
    "points": pts,
    "normal_cdf": floats(stats.norm.cdf(pts)),
    "normal_sf": floats(stats.norm.sf(pts)),
    "probs": probs,
    "normal_quantile": floats(stats.norm.ppf(probs)),
    "chi2": [{"x": xv, "df": df, "sf": float(stats.chi2.sf(xv, df))}
             for xv, df in [(0.5, 1), (3.84, 1), (10.0, 4), (45.0, 45), (80.0, 46), (200.0, 23)]],
    "t_two_sided": [{"t": tv, "df": df, "p": float(2 * stats.t.sf(abs(tv), df))}
                    for tv, df in [(0.3, 5), (2.0, 10), (-2.5, 30), (4.0, 100), (1.1, 2000)]],
}

# OLS without intercept
Xo = rng.standard_normal((120, 3))
yo = Xo @ np.array([0.5, -1.0, 0.0]) + rng.standard_normal(120)
res = sm.OLS(yo, Xo).fit()
out["ols"] = {"X": [floats(r) for r in Xo], "y": floats(yo), "coef": floats(res.params), "se": floats(res.bse),
              "p": floats(res.pvalues), "sigma2": float(res.scale)}


# CSS objective and minimizer for (1,0,0)(1,1,1)[24], written directly from the
# difference equations.
def css_resid(w, phi, Phi, Theta, S=24):
    n = len(w)
    e = np.zeros(n)
    t0 = 1 + S
    for t in range(t0, n):
        ar = phi * w[t - 1] + Phi * w[t - S] - phi * Phi * w[t - S - 1]
        e[t] = w[t] - ar - Theta * e[t - S]
    return e[t0:]


def sim(n, phi, Phi, Theta, sigma, S=24, burn=600):
    m = n + burn + S
    a = rng.standard_normal(m) * sigma
    w = np.zeros(m)
    for t in range(S + 1, m):
        w[t] = phi * w[t - 1] + Phi * w[t - S] - phi * Phi * w[t - S - 1] + a[t] + Theta * a[t - S]
    w = w[burn:]
    x = np.zeros(len(w))
    x[:S] = w[:S]
    for t in range(S, len(w)):
        x[t] = x[t - S] + w[t]
    return x


xs = sim(3000, 0.84, -0.09, -0.93, 0.7)
w = xs[24:] - xs[:-24]
params = (0.8, -0.1, -0.9)
css_at = float(np.sum(css_resid(w, *params) ** 2))
obj = lambda p: np.sum(css_resid(w, *p) ** 2)
opt = optimize.minimize(obj, x0=[0.5, 0.0, -0.5], method="Nelder-Mead",
                        options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 20000, "maxfev": 40000})
opt = optimize.minimize(obj, x0=opt.x, method="BFGS", options={"gtol": 1e-9})
out["sarima_css"] = {"x": floats(xs), "params": list(params), "css": css_at, "argmin": floats(opt.x),
                     "min": float(opt.fun), "n_eff": len(w) - 25}

# Wilder RSI
prices = 100 * np.exp(np.cumsum(rng.standard_normal(60) * 0.02))
n = 14
d = np.diff(prices)
g = np.clip(d, 0, None)
l = np.clip(-d, 0, None)
ag, al = g[:n].mean(), l[:n].mean()
rsi = [100 - 100 / (1 + ag / al)]
for k in range(n, len(d)):
    ag = (ag * (n - 1) + g[k]) / n
    al = (al * (n - 1) + l[k]) / n
    rsi.append(100 - 100 / (1 + ag / al))
out["rsi"] = {"prices": floats(prices), "window": n, "rsi": floats(rsi)}

# Gaussianization scores
gx = rng.lognormal(0.0, 1.0, 50)
ranks = stats.rankdata(gx, method="ordinal")
out["gaussianize"] = {"x": floats(gx), "z": floats(stats.norm.ppf((ranks - 0.5) / len(gx)))}

from statsmodels.tsa.arima_process import ArmaProcess
sar = np.zeros(26)
sar[0], sar[1], sar[24], sar[25] = 1.0, -0.83, 0.43, -0.83 * 0.43
proc = ArmaProcess(sar, [1.0])
out["seasonal_ar_theory"] = {"phi": 0.83, "Phi": -0.43, "acf24": float(proc.acf(25)[24]),
                             "pacf24": float(proc.pacf(26)[24]), "pacf25": float(proc.pacf(26)[25])}

Path(__file__).with_name("oracles.json").write_text(json.dumps(out, indent=1) + "\n")
