"""Jitted numeric kernels: model recursions and a Nelder-Mead optimizer.

Every inner loop that runs per candidate model per series lives here so the
batch pipeline stays fast on a single core. All objectives share one
signature, dispatched on an integer code, which lets the optimizer itself
be jitted (no Python-level callbacks in the hot path).

Objective codes
---------------
OBJ_ETS         additive-error exponential smoothing SSE
OBJ_ARMA_CSS    seasonal ARMA conditional sum of squares
OBJ_ARMA_ML     seasonal ARMA exact Gaussian negative log-likelihood
OBJ_GARCH       GARCH(1,1) negative log-likelihood

Parameters are optimized in an unconstrained space; each objective applies
its own transform. Instability (non-stationary AR, non-invertible MA) is
handled with a smooth penalty so the simplex is pushed back inside the
admissible region.
"""
from __future__ import annotations

import numpy as np
from numba import njit

OBJ_ETS = 0
OBJ_ARMA_CSS = 1
OBJ_ARMA_ML = 2
OBJ_GARCH = 3

_PENALTY = 1e10


@njit(cache=True)
def _sigmoid(z):
    if z >= 0.0:
        return 1.0 / (1.0 + np.exp(-z))
    ez = np.exp(z)
    return ez / (1.0 + ez)


@njit(cache=True)
def ar_margin(a):
    """Largest |reflection coefficient| of the lag polynomial 1 - a1 B - ...

    The polynomial has all roots outside the unit circle iff the returned
    margin is < 1 (step-down recursion).
    """
    p = len(a)
    if p == 0:
        return 0.0
    work = a.copy()
    margin = 0.0
    for order in range(p, 0, -1):
        k = work[order - 1]
        ak = abs(k)
        if ak > margin:
            margin = ak
        if ak >= 1.0:
            return margin
        denom = 1.0 - k * k
        prev = np.empty(order - 1)
        for j in range(order - 1):
            prev[j] = (work[j] + k * work[order - 2 - j]) / denom
        for j in range(order - 1):
            work[j] = prev[j]
    return margin


@njit(cache=True)
def _expand_seasonal(coefs, seas, m):
    """Multiply a non-seasonal lag polynomial by (1 - seas * B^m).

    ``coefs`` holds recursion-form coefficients a_j (lag j = 1..p); returns
    the expanded recursion-form coefficients up to lag p + m.
    """
    p = len(coefs)
    if seas == 0.0:
        return coefs.copy()
    out = np.zeros(p + m)
    for j in range(p):
        out[j] = coefs[j]
    out[m - 1] += seas
    for j in range(p):
        out[m + j] -= seas * coefs[j]
    return out


@njit(cache=True)
def ets_filter(y, m, trend_code, seas_code, alpha, beta, phi, gamma,
               l0, b0, s0):
    """Run the additive-error smoothing recursion; returns SSE and end state.

    trend_code: 0 none, 1 additive, 2 additive damped.
    seas_code: 0 none, 1 additive.
    """
    n = len(y)
    level = l0
    trend = b0
    season = s0.copy()
    sse = 0.0
    for t in range(n):
        bt = 0.0
        if trend_code == 1:
            bt = trend
        elif trend_code == 2:
            bt = phi * trend
        s_t = season[t % m] if seas_code == 1 else 0.0
        yhat = level + bt + s_t
        e = y[t] - yhat
        sse += e * e
        level = level + bt + alpha * e
        if trend_code > 0:
            trend = bt + beta * e
        if seas_code == 1:
            season[t % m] = s_t + gamma * e
    return sse, level, trend, season


@njit(cache=True)
def _ets_params_from_x(x, trend_code, seas_code):
    """Map unconstrained optimizer coordinates to admissible smoothing weights."""
    lo = 1e-4
    hi = 0.9999
    alpha = lo + (hi - lo) * _sigmoid(x[0])
    beta = 0.0
    phi = 1.0
    gamma = 0.0
    i = 1
    if trend_code > 0:
        beta = alpha * _sigmoid(x[i])
        i += 1
        if trend_code == 2:
            phi = 0.8 + 0.18 * _sigmoid(x[i])
            i += 1
    if seas_code == 1:
        gamma = (1.0 - alpha) * _sigmoid(x[i])
        i += 1
    return alpha, beta, phi, gamma, i


@njit(cache=True)
def _obj_ets(x, y, ints, floats):
    m = ints[1]
    trend_code = ints[2]
    seas_code = ints[3]
    opt_init = ints[4]
    alpha, beta, phi, gamma, used = _ets_params_from_x(x, trend_code, seas_code)
    l0 = floats[0]
    b0 = floats[1]
    s0 = floats[2:2 + m].copy()
    if opt_init == 1:
        l0 = x[used]
    sse, _, _, _ = ets_filter(y, m, trend_code, seas_code,
                              alpha, beta, phi, gamma, l0, b0, s0)
    return sse


@njit(cache=True)
def _unpack_arma(x, ints):
    p, q, P, Q = ints[1], ints[2], ints[3], ints[4]
    use_mean = ints[6]
    i = 0
    mu = 0.0
    if use_mean == 1:
        mu = x[0]
        i = 1
    phi = x[i:i + p]
    i += p
    theta = x[i:i + q]
    i += q
    sphi = x[i] if P == 1 else 0.0
    i += P
    stheta = x[i] if Q == 1 else 0.0
    return mu, phi, theta, sphi, stheta


@njit(cache=True)
def _arma_polys(phi, theta, sphi, stheta, m):
    """Expanded recursion-form AR and MA coefficient vectors."""
    neg_theta = np.empty(len(theta))
    for j in range(len(theta)):
        neg_theta[j] = -theta[j]
    ar_full = _expand_seasonal(phi, sphi, m)
    ma_part = _expand_seasonal(neg_theta, -stheta, m)
    ma_full = np.empty(len(ma_part))
    for j in range(len(ma_part)):
        ma_full[j] = -ma_part[j]
    return ar_full, ma_full


@njit(cache=True)
def _arma_stability_penalty(phi, theta, sphi, stheta):
    pen = 0.0
    margin = ar_margin(phi)
    if margin >= 0.999:
        pen += _PENALTY * (1.0 + margin)
    neg = np.empty(len(theta))
    for j in range(len(theta)):
        neg[j] = -theta[j]
    margin = ar_margin(neg)
    if margin >= 0.999:
        pen += _PENALTY * (1.0 + margin)
    if abs(sphi) >= 0.999:
        pen += _PENALTY * (1.0 + abs(sphi))
    if abs(stheta) >= 0.999:
        pen += _PENALTY * (1.0 + abs(stheta))
    return pen


@njit(cache=True)
def arma_css_residuals(y, mu, ar_full, ma_full):
    """Conditional residuals: presample shocks set to zero, first len(ar)
    observations conditioned on."""
    n = len(y)
    n_ar = len(ar_full)
    n_ma = len(ma_full)
    e = np.zeros(n)
    for t in range(n_ar, n):
        acc = y[t] - mu
        for j in range(n_ar):
            acc -= ar_full[j] * (y[t - 1 - j] - mu)
        for j in range(n_ma):
            if t - 1 - j >= 0:
                acc -= ma_full[j] * e[t - 1 - j]
        e[t] = acc
    return e


@njit(cache=True)
def _obj_arma_css(x, y, ints, floats):
    m = ints[5]
    mu, phi, theta, sphi, stheta = _unpack_arma(x, ints)
    pen = _arma_stability_penalty(phi, theta, sphi, stheta)
    if pen > 0.0:
        return pen
    ar_full, ma_full = _arma_polys(phi, theta, sphi, stheta, m)
    e = arma_css_residuals(y, mu, ar_full, ma_full)
    n_ar = len(ar_full)
    sse = 0.0
    for t in range(n_ar, len(y)):
        sse += e[t] * e[t]
    return sse


@njit(cache=True)
def _lyapunov_doubling(T, RR):
    """Stationary state covariance of x' = T x + R eta, Var(eta) = 1."""
    P = RR.copy()
    A = T.copy()
    for _ in range(60):
        AP = A @ P
        P = P + AP @ A.T
        A = A @ A
        if np.max(np.abs(A)) < 1e-14:
            break
    return P


@njit(cache=True)
def arma_kalman_negll(y, mu, ar_full, ma_full):
    """Exact Gaussian negative log-likelihood (sigma^2 concentrated out)."""
    n = len(y)
    p = len(ar_full)
    q = len(ma_full)
    r = max(p, q + 1)
    T = np.zeros((r, r))
    for i in range(p):
        T[i, 0] = ar_full[i]
    for i in range(r - 1):
        T[i, i + 1] = 1.0
    R = np.zeros(r)
    R[0] = 1.0
    for i in range(q):
        R[i + 1] = ma_full[i]
    RR = np.empty((r, r))
    for i in range(r):
        for j in range(r):
            RR[i, j] = R[i] * R[j]
    P = _lyapunov_doubling(T, RR)
    a = np.zeros(r)
    ssq = 0.0
    logdet = 0.0
    for t in range(n):
        v = y[t] - mu - a[0]
        F = P[0, 0]
        if F < 1e-12:
            F = 1e-12
        ssq += v * v / F
        logdet += np.log(F)
        M = P[:, 0].copy()
        TM = T @ M
        a = T @ a + TM * (v / F)
        P = T @ P @ T.T + RR
        for i in range(r):
            for j in range(r):
                P[i, j] -= TM[i] * TM[j] / F
    sigma2 = ssq / n
    if sigma2 < 1e-300:
        sigma2 = 1e-300
    ll = -0.5 * n * (np.log(2.0 * np.pi) + 1.0 + np.log(sigma2)) - 0.5 * logdet
    return -ll


@njit(cache=True)
def _obj_arma_ml(x, y, ints, floats):
    m = ints[5]
    mu, phi, theta, sphi, stheta = _unpack_arma(x, ints)
    pen = _arma_stability_penalty(phi, theta, sphi, stheta)
    if pen > 0.0:
        return pen
    ar_full, ma_full = _arma_polys(phi, theta, sphi, stheta, m)
    return arma_kalman_negll(y, mu, ar_full, ma_full)


@njit(cache=True)
def garch_filter(x2, omega, a, b):
    """Conditional-variance recursion for squared innovations x2."""
    n = len(x2)
    var0 = 0.0
    for t in range(n):
        var0 += x2[t]
    var0 /= n
    h = np.empty(n)
    h[0] = var0
    for t in range(1, n):
        h[t] = omega + a * x2[t - 1] + b * h[t - 1]
        if h[t] < 1e-12:
            h[t] = 1e-12
    return h


@njit(cache=True)
def _obj_garch(x, y, ints, floats):
    # y holds the (demeaned) innovations; floats[0] their variance for scaling
    omega = np.exp(x[0]) * floats[0]
    a = _sigmoid(x[1])
    b = (1.0 - a) * _sigmoid(x[2])
    x2 = y * y
    h = garch_filter(x2, omega, a, b)
    nll = 0.0
    for t in range(len(y)):
        nll += np.log(h[t]) + x2[t] / h[t]
    return 0.5 * nll


@njit(cache=True)
def _objective(code, x, y, ints, floats):
    if code == OBJ_ETS:
        return _obj_ets(x, y, ints, floats)
    elif code == OBJ_ARMA_CSS:
        return _obj_arma_css(x, y, ints, floats)
    elif code == OBJ_ARMA_ML:
        return _obj_arma_ml(x, y, ints, floats)
    elif code == OBJ_GARCH:
        return _obj_garch(x, y, ints, floats)
    return _PENALTY


@njit(cache=True)
def nelder_mead(code, y, ints, floats, x0, step, maxiter, ftol):
    """Minimize a dispatched objective from a deterministic start simplex.

    Returns (best_x, best_f). Standard reflection/expansion/contraction/
    shrink moves; convergence when the simplex f-spread falls below
    ftol * (|f_best| + ftol).
    """
    d = len(x0)
    npts = d + 1
    simplex = np.empty((npts, d))
    fvals = np.empty(npts)
    for i in range(npts):
        for j in range(d):
            simplex[i, j] = x0[j]
        if i > 0:
            simplex[i, i - 1] += step[i - 1]
        fvals[i] = _objective(code, simplex[i], y, ints, floats)

    order = np.argsort(fvals)
    simplex = simplex[order]
    fvals = fvals[order]

    it = 0
    while it < maxiter:
        it += 1
        spread = fvals[npts - 1] - fvals[0]
        if spread <= ftol * (abs(fvals[0]) + ftol):
            break
        centroid = np.zeros(d)
        for i in range(npts - 1):
            for j in range(d):
                centroid[j] += simplex[i, j]
        for j in range(d):
            centroid[j] /= (npts - 1)

        xr = centroid + (centroid - simplex[npts - 1])
        fr = _objective(code, xr, y, ints, floats)
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - simplex[npts - 1])
            fe = _objective(code, xe, y, ints, floats)
            if fe < fr:
                simplex[npts - 1] = xe
                fvals[npts - 1] = fe
            else:
                simplex[npts - 1] = xr
                fvals[npts - 1] = fr
        elif fr < fvals[npts - 2]:
            simplex[npts - 1] = xr
            fvals[npts - 1] = fr
        else:
            if fr < fvals[npts - 1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (simplex[npts - 1] - centroid)
            fc = _objective(code, xc, y, ints, floats)
            if fc < min(fr, fvals[npts - 1]):
                simplex[npts - 1] = xc
                fvals[npts - 1] = fc
            else:
                for i in range(1, npts):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    fvals[i] = _objective(code, simplex[i], y, ints, floats)

        order = np.argsort(fvals)
        simplex = simplex[order]
        fvals = fvals[order]

    return simplex[0].copy(), fvals[0]


@njit(cache=True)
def loess_smooth(y, weights, window):
    """Local linear smoother on integer positions with tricube kernel.

    ``weights`` are multiplicative robustness weights (all-ones when not in
    a robust pass); ``window`` is the (odd) number of nearest neighbours.
    """
    n = len(y)
    out = np.empty(n)
    if window > n:
        window = n if n % 2 == 1 else n - 1
    half = window // 2
    for i in range(n):
        lo = i - half
        hi = i + half
        if lo < 0:
            lo = 0
            hi = window - 1
        if hi > n - 1:
            hi = n - 1
            lo = n - window
        dmax = max(i - lo, hi - i)
        if dmax == 0:
            out[i] = y[i]
            continue
        sw = 0.0
        swx = 0.0
        swy = 0.0
        swxx = 0.0
        swxy = 0.0
        for t in range(lo, hi + 1):
            u = abs(t - i) / (dmax + 1e-12)
            tri = (1.0 - u * u * u)
            w = tri * tri * tri * weights[t]
            if w <= 0.0:
                continue
            dx = float(t - i)
            sw += w
            swx += w * dx
            swy += w * y[t]
            swxx += w * dx * dx
            swxy += w * dx * y[t]
        det = sw * swxx - swx * swx
        if abs(det) < 1e-12 or sw <= 0.0:
            out[i] = swy / sw if sw > 0.0 else y[i]
        else:
            # intercept of the local weighted line at dx = 0
            out[i] = (swxx * swy - swx * swxy) / det
    return out


@njit(cache=True)
def mar_simulate_path(ar_coefs, sigmas, component_idx, normals, n_keep, burnin):
    """Drive the mixture-autoregressive recursion over a shared history.

    ar_coefs: (K, L) expanded recursion coefficients per component;
    component_idx / normals are pre-drawn (length burnin + n_keep).
    """
    K, L = ar_coefs.shape
    total = burnin + n_keep
    x = np.zeros(total)
    for t in range(total):
        k = component_idx[t]
        acc = 0.0
        for j in range(L):
            if t - 1 - j >= 0:
                acc += ar_coefs[k, j] * x[t - 1 - j]
        x[t] = acc + sigmas[k] * normals[t]
    return x[burnin:]


@njit(cache=True)
def ar_psi_weights(ar_full, ma_full, h):
    """First h MA(inf) weights psi_0..psi_{h-1} of an ARMA recursion."""
    psi = np.zeros(h)
    psi[0] = 1.0
    p = len(ar_full)
    q = len(ma_full)
    for j in range(1, h):
        acc = ma_full[j - 1] if j - 1 < q else 0.0
        for i in range(1, min(j, p) + 1):
            acc += ar_full[i - 1] * psi[j - i]
        psi[j] = acc
    return psi


def warmup():
    """Force compilation of every kernel (small inputs, results discarded)."""
    y = np.array([1.0, 2.0, 1.5, 2.5, 2.0, 3.0, 2.5, 3.5])
    ints = np.array([OBJ_ETS, 1, 1, 0, 0, 0, 0], dtype=np.int64)
    floats = np.array([1.0, 0.1, 0.0], dtype=np.float64)
    nelder_mead(OBJ_ETS, y, ints, floats,
                np.array([0.0, 0.0]), np.array([0.25, 0.25]), 50, 1e-8)
    ints = np.array([OBJ_ARMA_CSS, 1, 1, 0, 0, 1, 1], dtype=np.int64)
    nelder_mead(OBJ_ARMA_CSS, y, ints, floats,
                np.array([2.0, 0.1, 0.1]), np.array([0.1, 0.1, 0.1]), 50, 1e-8)
    ints[0] = OBJ_ARMA_ML
    nelder_mead(OBJ_ARMA_ML, y, ints, floats,
                np.array([2.0, 0.1, 0.1]), np.array([0.1, 0.1, 0.1]), 20, 1e-8)
    ints = np.array([OBJ_GARCH, 0, 0, 0, 0, 0, 0], dtype=np.int64)
    nelder_mead(OBJ_GARCH, y - y.mean(), ints, np.array([1.0]),
                np.array([-1.0, 0.0, 0.0]), np.array([0.5, 0.5, 0.5]), 30, 1e-8)
    loess_smooth(y, np.ones(len(y)), 5)
    mar_simulate_path(np.array([[0.5, 0.0]]), np.array([1.0]),
                      np.zeros(10, dtype=np.int64), np.zeros(10), 5, 5)
    ar_psi_weights(np.array([0.5]), np.array([0.2]), 4)
