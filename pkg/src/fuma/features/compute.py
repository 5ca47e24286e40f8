"""Computation of the 43 registry features for one series.

Scale- and shift-invariant features are computed from the standardized
series, so the declared invariances hold by construction. Degenerate
(constant) input never aborts: it yields a zero-dominated vector with the
``degenerate`` flag set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fuma import _numerics as nx
from fuma._initstate import heuristic_states
from fuma.errors import InsufficientData
from fuma.features.registry import FEATURE_NAMES, N_FEATURES, validate_vector
from fuma.features.stl import decompose

_HURST_SIZES = (8, 12, 18, 27, 40, 60, 90, 135, 202, 303)


def _acf(x: np.ndarray, nlags: int) -> np.ndarray:
    """Autocorrelations rho_1..rho_nlags (full-sample denominator)."""
    n = len(x)
    out = np.zeros(nlags)
    if n < 2:
        return out
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    # relative guard: a numerically constant series has no autocorrelation
    if denom <= 0.0 or denom <= 1e-14 * float(np.dot(x, x)):
        return out
    for k in range(1, nlags + 1):
        if k >= n:
            break
        out[k - 1] = float(np.dot(xc[:-k], xc[k:]) / denom)
    return out


def _pacf_from_acf(rho: np.ndarray, nlags: int) -> np.ndarray:
    """Partial autocorrelations via the Durbin-Levinson recursion."""
    out = np.zeros(nlags)
    if nlags == 0:
        return out
    phi = np.zeros((nlags + 1, nlags + 1))
    phi[1, 1] = rho[0]
    out[0] = rho[0]
    for k in range(2, nlags + 1):
        num = rho[k - 1] - sum(phi[k - 1, j] * rho[k - 1 - j]
                               for j in range(1, k))
        den = 1.0 - sum(phi[k - 1, j] * rho[j - 1] for j in range(1, k))
        if abs(den) < 1e-12:
            break
        pk = num / den
        phi[k, k] = pk
        for j in range(1, k):
            phi[k, j] = phi[k - 1, j] - pk * phi[k - 1, k - j]
        out[k - 1] = pk
    return np.clip(out, -1.0, 1.0)


def _lag_r2(x: np.ndarray, nlags: int) -> float:
    """R^2 of x_t regressed on an intercept and its first nlags lags."""
    n = len(x)
    if n - nlags < nlags + 2:
        nlags = max(1, (n - 2) // 2)
    if n - nlags < nlags + 2 or nlags < 1:
        return 0.0
    y = x[nlags:]
    cols = [np.ones(n - nlags)]
    for k in range(1, nlags + 1):
        cols.append(x[nlags - k: n - k])
    design = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst <= 0.0:
        return 0.0
    r2 = 1.0 - float(np.sum(resid ** 2)) / sst
    return float(np.clip(r2, 0.0, 1.0))


def _prewhiten(x: np.ndarray) -> np.ndarray:
    """Residuals of the AIC-best autoregression of order 0..5, demeaned."""
    n = len(x)
    pmax = min(5, max(0, n // 4))
    best_p, best_aic = 0, np.inf
    # orders compared on the common sample t >= pmax
    y_common = x[pmax:]
    n_eff = len(y_common)
    if n_eff < 8:
        z = x - x.mean()
        return z
    for p in range(pmax + 1):
        cols = [np.ones(n_eff)]
        for k in range(1, p + 1):
            cols.append(x[pmax - k: n - k])
        design = np.column_stack(cols)
        coef, *_ = np.linalg.lstsq(design, y_common, rcond=None)
        sse = float(np.sum((y_common - design @ coef) ** 2))
        if sse <= 0.0:
            aic = -np.inf
        else:
            aic = n_eff * np.log(sse / n_eff) + 2.0 * (p + 1)
        if aic < best_aic:
            best_aic, best_p = aic, p
    p = best_p
    if p == 0:
        z = x - x.mean()
    else:
        yy = x[p:]
        cols = [np.ones(n - p)]
        for k in range(1, p + 1):
            cols.append(x[p - k: n - k])
        design = np.column_stack(cols)
        coef, *_ = np.linalg.lstsq(design, yy, rcond=None)
        z = yy - design @ coef
    return z - z.mean()


def _fit_ets(ys: np.ndarray, m: int, trend_code: int, seas_code: int):
    """Optimize smoothing weights for fixed heuristic initial states."""
    l0, b0, s0 = heuristic_states(ys, m if seas_code == 1 else 1,
                                  seasonal=seas_code == 1)
    m_eff = m if seas_code == 1 else 1
    floats = np.concatenate([[l0, b0], s0[:m_eff]])
    ndim = 1 + (1 if trend_code > 0 else 0) + (1 if trend_code == 2 else 0) \
        + (1 if seas_code == 1 else 0)
    ints = np.array([nx.OBJ_ETS, m_eff, trend_code, seas_code, 0, 0, 0],
                    dtype=np.int64)
    x, sse = nx.nelder_mead(nx.OBJ_ETS, ys, ints, floats, np.zeros(ndim),
                            np.full(ndim, 1.0), 200 * ndim, 1e-10)
    lo, hi = 1e-4, 0.9999
    alpha = lo + (hi - lo) * _sigmoid(x[0])
    beta = gamma = 0.0
    i = 1
    if trend_code > 0:
        beta = alpha * _sigmoid(x[i])
        i += 1
        if trend_code == 2:
            i += 1
    if seas_code == 1:
        gamma = (1.0 - alpha) * _sigmoid(x[i])
    return alpha, beta, gamma


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    ez = np.exp(z)
    return ez / (1.0 + ez)


def _garch_std_residuals(z: np.ndarray) -> np.ndarray | None:
    var = float(np.mean(z * z))
    if var <= 0.0 or len(z) < 20:
        return None
    ints = np.array([nx.OBJ_GARCH, 0, 0, 0, 0, 0, 0], dtype=np.int64)
    floats = np.array([var])
    x0 = np.array([np.log(0.1), -2.2, 2.1])
    x, _ = nx.nelder_mead(nx.OBJ_GARCH, z, ints, floats, x0,
                          np.full(3, 1.0), 600, 1e-9)
    omega = float(np.exp(x[0])) * var
    a = _sigmoid(x[1])
    b = (1.0 - a) * _sigmoid(x[2])
    h = nx.garch_filter(z * z, omega, a, b)
    return z / np.sqrt(h)


def _kpss(x: np.ndarray) -> float:
    n = len(x)
    if n < 4:
        return 0.0
    lags = int(4 * (n / 100.0) ** 0.25)
    e = x - x.mean()
    s = np.cumsum(e)
    eta = float(np.sum(s * s)) / (n * n)
    gamma0 = float(np.dot(e, e)) / n
    lrv = gamma0
    for k in range(1, min(lags, n - 1) + 1):
        w = 1.0 - k / (lags + 1.0)
        lrv += 2.0 * w * float(np.dot(e[:-k], e[k:])) / n
    if lrv <= 0.0:
        return 0.0
    return eta / lrv


def _pp_zalpha(x: np.ndarray) -> float:
    n = len(x)
    if n < 5:
        return 0.0
    dy = np.diff(x)
    ylag = x[:-1]
    np1 = n - 1
    design = np.column_stack([np.ones(np1), ylag])
    coef, *_ = np.linalg.lstsq(design, dy, rcond=None)
    u = dy - design @ coef
    lags = int(4 * (np1 / 100.0) ** 0.25)
    gamma0 = float(np.dot(u, u)) / np1
    lam2 = gamma0
    for k in range(1, min(lags, np1 - 1) + 1):
        w = 1.0 - k / (lags + 1.0)
        lam2 += 2.0 * w * float(np.dot(u[:-k], u[k:])) / np1
    ssd = float(np.sum((ylag - ylag.mean()) ** 2))
    if ssd <= 0.0:
        return 0.0
    return np1 * float(coef[1]) - 0.5 * (lam2 - gamma0) / (ssd / (np1 * np1))


def _nonlinearity(x: np.ndarray) -> float:
    n = len(x)
    if n < 10:
        return 0.0
    y = x[1:]
    x1 = x[:-1]
    base = np.column_stack([np.ones(n - 1), x1])
    coef, *_ = np.linalg.lstsq(base, y, rcond=None)
    u = y - base @ coef
    sse0 = float(np.dot(u, u))
    if sse0 <= 0.0:
        return 0.0
    aux = np.column_stack([np.ones(n - 1), x1, x1 ** 2, x1 ** 3])
    coef2, *_ = np.linalg.lstsq(aux, u, rcond=None)
    r = u - aux @ coef2
    r2 = 1.0 - float(np.dot(r, r)) / sse0
    return 10.0 * float(np.clip(r2, 0.0, 1.0))


def _hurst(x: np.ndarray) -> float:
    n = len(x)
    sizes = sorted({s for s in _HURST_SIZES if s <= n // 2}
                   | ({n // 2} if n // 2 >= 8 else set()))
    if len(sizes) < 2:
        return 0.5
    log_s, log_rs = [], []
    for s in sizes:
        vals = []
        for b in range(n // s):
            block = x[b * s:(b + 1) * s]
            dev = block - block.mean()
            z = np.cumsum(dev)
            rng = float(z.max() - z.min())
            sd = float(block.std())
            if sd > 0.0:
                vals.append(rng / sd)
        if vals:
            log_s.append(np.log(s))
            log_rs.append(np.log(np.mean(vals)))
    if len(log_s) < 2:
        return 0.5
    slope = np.polyfit(log_s, log_rs, 1)[0]
    return float(np.clip(slope, 0.0, 1.0))


def _entropy(x: np.ndarray) -> float:
    n = len(x)
    if n < 4:
        return 0.0
    spec = np.abs(np.fft.rfft(x - x.mean())[1:]) ** 2
    if len(spec) < 2:
        return 0.0
    total = float(spec.sum())
    if total <= 0.0:
        return 0.0
    p = spec / total
    p = p[p > 0]
    h = -float(np.sum(p * np.log(p))) / np.log(len(spec))
    return float(np.clip(h, 0.0, 1.0))


def _flat_spots(y: np.ndarray) -> float:
    lo, hi = float(y.min()), float(y.max())
    if hi <= lo:
        return float(len(y))
    bins = np.minimum((10 * (y - lo) / (hi - lo)).astype(np.int64), 9)
    best = run = 1
    for i in range(1, len(bins)):
        run = run + 1 if bins[i] == bins[i - 1] else 1
        best = max(best, run)
    return float(best)


def _orthonormal_poly(n: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(n, dtype=np.float64)
    q1 = t - t.mean()
    q1 /= np.linalg.norm(q1)
    q2 = t * t
    q2 -= q2.mean()
    q2 -= np.dot(q2, q1) * q1
    nrm = np.linalg.norm(q2)
    if nrm > 0:
        q2 /= nrm
    return q1, q2


@dataclass(frozen=True)
class FeatureVector:
    """Feature values in registry order, plus the degeneracy flag."""

    values: np.ndarray
    degenerate: bool

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values.tolist()))


def compute_features(values, m: int) -> FeatureVector:
    """Compute the full registry vector for one series of period m."""
    y = np.asarray(values, dtype=np.float64)
    n = len(y)
    f = dict.fromkeys(FEATURE_NAMES, 0.0)
    f["length"] = float(n)
    f["nperiods"] = 1.0 if m > 1 else 0.0
    f["seasonal-period-q"] = 1.0 if m == 4 else 0.0
    f["seasonal-period-m"] = 1.0 if m == 12 else 0.0

    sd = float(y.std(ddof=1)) if n >= 2 else 0.0
    if not np.isfinite(sd) or sd <= 0.0:
        f["flat-spots"] = float(n)
        f["hurst"] = 0.5
        vec = np.array([f[name] for name in FEATURE_NAMES])
        validate_vector(vec)
        return FeatureVector(values=vec, degenerate=True)

    ys = (y - y.mean()) / sd

    rho = _acf(ys, max(10, m))
    f["x-acf1"] = rho[0]
    f["x-acf10"] = float(np.sum(rho[:10] ** 2))
    if m > 1:
        f["seas-acf1"] = rho[m - 1]

    d1 = np.diff(ys)
    rho1 = _acf(d1, 10)
    f["diff1-acf1"] = rho1[0]
    f["diff1-acf10"] = float(np.sum(rho1 ** 2))
    d2 = np.diff(d1)
    rho2 = _acf(d2, 10)
    f["diff2-acf1"] = rho2[0]
    f["diff2-acf10"] = float(np.sum(rho2 ** 2))

    f["x-pacf5"] = float(np.sum(_pacf_from_acf(rho, min(5, n - 1)) ** 2))
    f["diff1-pacf5"] = float(np.sum(_pacf_from_acf(rho1, min(5, max(len(d1) - 1, 0))) ** 2))
    f["diff2-pacf5"] = float(np.sum(_pacf_from_acf(rho2, min(5, max(len(d2) - 1, 0))) ** 2))
    if m > 1 and n > m:
        f["seas-pacf"] = float(_pacf_from_acf(rho, m)[m - 1])

    try:
        dec = decompose(ys, m)
    except InsufficientData:
        dec = decompose(ys, 1)
    var_r = float(np.var(dec.remainder, ddof=1))
    var_tr = float(np.var(dec.trend + dec.remainder, ddof=1))
    if var_tr > 0.0:
        f["trend-strength"] = max(0.0, 1.0 - var_r / var_tr)
    if dec.period > 1:
        var_sr = float(np.var(dec.seasonal + dec.remainder, ddof=1))
        if var_sr > 0.0:
            f["seasonal-strength"] = max(0.0, 1.0 - var_r / var_sr)
        cycle = dec.cycle
        f["peak"] = (int(np.argmax(cycle)) + 1) / m
        f["trough"] = (int(np.argmin(cycle)) + 1) / m

    if n >= 4:
        r = dec.remainder
        s1, s2 = float(r.sum()), float(np.dot(r, r))
        loo_mean = (s1 - r) / (n - 1)
        loo_var = (s2 - r * r - (n - 1) * loo_mean ** 2) / (n - 2)
        f["spike"] = max(0.0, float(np.var(loo_var, ddof=1)))
    q1, q2 = _orthonormal_poly(n)
    f["linearity"] = float(np.dot(q1, dec.trend))
    f["curvature"] = float(np.dot(q2, dec.trend))
    rho_e = _acf(dec.remainder, 10)
    f["e-acf1"] = rho_e[0]
    f["e-acf10"] = float(np.sum(rho_e ** 2))

    f["entropy"] = _entropy(ys)

    block = max(10, 2 * m)
    nb = n // block
    if nb >= 2:
        means = np.array([y[i * block:(i + 1) * block].mean() for i in range(nb)])
        variances = np.array([y[i * block:(i + 1) * block].var(ddof=1)
                              for i in range(nb)])
        f["stability"] = float(np.var(means, ddof=1))
        f["lumpiness"] = float(np.var(variances, ddof=1))

    if n >= 5:
        alpha, beta, _ = _fit_ets(ys, 1, trend_code=1, seas_code=0)
        f["alpha"] = alpha
        f["beta"] = beta
    if m > 1 and n >= 2 * m + 2:
        hw_a, hw_b, hw_g = _fit_ets(ys, m, trend_code=1, seas_code=1)
        f["hw-alpha"] = hw_a
        f["hw-beta"] = hw_b
        f["hw-gamma"] = hw_g

    f["unitroot-kpss"] = max(0.0, _kpss(ys))
    f["unitroot-pp"] = _pp_zalpha(ys)

    z = _prewhiten(ys)
    if len(z) >= 16 and float(np.dot(z, z)) / len(z) > 1e-10:
        z2 = z * z
        f["arch-acf"] = float(np.sum(_acf(z2, 12) ** 2))
        f["arch-r2"] = _lag_r2(z2, 12)
        r = _garch_std_residuals(z)
        if r is not None and np.all(np.isfinite(r)):
            r2s = r * r
            f["garch-acf"] = float(np.sum(_acf(r2s, 12) ** 2))
            f["garch-r2"] = _lag_r2(r2s, 12)
    if n >= 16:
        f["arch-lm"] = _lag_r2(ys * ys, 12)

    f["non-linearity"] = _nonlinearity(ys)
    f["hurst"] = _hurst(ys)

    med = float(np.median(ys))
    above = ys > med
    f["crossing-points"] = float(np.sum(above[1:] != above[:-1]))
    f["flat-spots"] = _flat_spots(y)

    vec = np.array([f[name] for name in FEATURE_NAMES])
    validate_vector(vec)
    vec.flags.writeable = False
    return FeatureVector(values=vec, degenerate=False)
