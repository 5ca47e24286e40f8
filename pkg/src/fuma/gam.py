"""Penalized additive regression of a scalar response on feature vectors.

Each smooth term is a natural cubic regression spline with knots at evenly
spaced quantiles of the feature, a second-derivative penalty, and a
sum-to-zero constraint for identifiability with the intercept. Smoothing
parameters are selected per term by golden-section search on the GCV score,
cycling over terms until the score stops improving. Dummy-coded features
enter linearly; features without enough distinct values are demoted to
linear or dropped. Beyond its boundary knots a smooth continues linearly,
so predictions stay finite everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from fuma.errors import (InsufficientData, RegistryMismatch, SingularDesign,
                         UnknownFeature)
from fuma.features.registry import FEATURE_NAMES, registry_hash

# features that enter linearly (dummy codes), never as smooths
LINEAR_FEATURES = ("nperiods", "seasonal-period-q", "seasonal-period-m")

BASIS_SIZE = 10
MIN_ROWS = 200
LOG_LAMBDA_RANGE = (-6.0, 8.0)
GCV_TOL = 1e-6
MAX_CYCLES = 20
# quantile knots closer than this fraction of the knot range are merged;
# the curvature penalty scales like (range / spacing)^3, so spacings at
# float-rounding distance would overflow it
MIN_KNOT_GAP = 1e-8


def _cr_penalty(knots: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Second-derivative penalty of a natural cubic spline on these knots.

    Returns ``(S, F)`` where ``S`` (K x K) gives the exact integrated squared
    second derivative as ``coef @ S @ coef`` and ``F`` (K x K) maps knot
    values to second derivatives at the knots (rows 0 and K-1 are zero).
    """
    h = np.diff(knots)
    k = len(knots)
    D = np.zeros((k - 2, k))
    B = np.zeros((k - 2, k - 2))
    for i in range(k - 2):
        D[i, i] = 1.0 / h[i]
        D[i, i + 1] = -1.0 / h[i] - 1.0 / h[i + 1]
        D[i, i + 2] = 1.0 / h[i + 1]
        B[i, i] = (h[i] + h[i + 1]) / 3.0
        if i + 1 < k - 2:
            B[i, i + 1] = B[i + 1, i] = h[i + 1] / 6.0
    Finner = np.linalg.solve(B, D)
    S = D.T @ Finner
    F = np.vstack([np.zeros(k), Finner, np.zeros(k)])
    return S, F


def _cr_design(x: np.ndarray, knots: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Rows mapping knot values to spline values at ``x``.

    Inside the knot range this is cubic interpolation; outside it continues
    the boundary tangent line.
    """
    x = np.asarray(x, dtype=np.float64)
    k = len(knots)
    h = np.diff(knots)
    X = np.zeros((len(x), k))

    def interval_row(xi: float, j: int) -> np.ndarray:
        hj = h[j]
        am = (knots[j + 1] - xi) / hj
        ap = (xi - knots[j]) / hj
        cm = ((knots[j + 1] - xi) ** 3 / hj - hj * (knots[j + 1] - xi)) / 6.0
        cp = ((xi - knots[j]) ** 3 / hj - hj * (xi - knots[j])) / 6.0
        row = cm * F[j] + cp * F[j + 1]
        row[j] += am
        row[j + 1] += ap
        return row

    # boundary tangent rows for linear continuation
    left_val = np.zeros(k)
    left_val[0] = 1.0
    left_der = -h[0] / 6.0 * F[1]
    left_der[0] += -1.0 / h[0]
    left_der[1] += 1.0 / h[0]
    right_val = np.zeros(k)
    right_val[-1] = 1.0
    right_der = h[-1] / 6.0 * F[k - 2]
    right_der[-2] += -1.0 / h[-1]
    right_der[-1] += 1.0 / h[-1]

    for i, xi in enumerate(x):
        if xi < knots[0]:
            X[i] = left_val + (xi - knots[0]) * left_der
        elif xi > knots[-1]:
            X[i] = right_val + (xi - knots[-1]) * right_der
        else:
            j = min(int(np.searchsorted(knots, xi, side="right")) - 1, k - 2)
            j = max(j, 0)
            X[i] = interval_row(xi, j)
    return X


@dataclass(frozen=True)
class SmoothTerm:
    """One fitted spline term: knots, knot coefficients, smoothing weight."""

    name: str
    knots: np.ndarray
    coef: np.ndarray
    lam: float
    edf: float

    def design(self, x: np.ndarray) -> np.ndarray:
        _, F = _cr_penalty(self.knots)
        return _cr_design(np.asarray(x, dtype=np.float64), self.knots, F)

    def __call__(self, x) -> np.ndarray:
        return self.design(np.atleast_1d(np.asarray(x, dtype=np.float64))) \
            @ self.coef


@dataclass(frozen=True)
class GamModel:
    """Additive model: intercept + linear terms + centered spline terms."""

    method: str
    level_pct: int
    intercept: float
    linear_names: tuple
    linear_coefs: np.ndarray
    smooths: tuple
    feature_names: tuple
    registry_hash: str

    def __post_init__(self):
        for term in self.smooths:
            if not np.all(np.diff(term.knots) > 0):
                raise ValueError(f"knots of {term.name!r} must be strictly "
                                 "increasing")
            if not np.isfinite(term.lam) or term.lam < 0:
                raise ValueError(f"smoothing weight of {term.name!r} must be "
                                 "finite and >= 0")

    @property
    def smooth_names(self) -> tuple:
        return tuple(term.name for term in self.smooths)


@dataclass(frozen=True)
class FitDiagnostics:
    """Fit-quality record: GCV score, per-term freedom, flags."""

    gcv: float
    edf: Mapping[str, float]
    residual_variance: float
    ridged: bool
    demoted: tuple
    dropped: tuple
    cycles: int


def _column_index(feature_names: Sequence[str]) -> dict:
    return {name: i for i, name in enumerate(feature_names)}


class _Factor:
    """Jacobi-scaled Cholesky factorization with one refinement step.

    Scaling plus refinement keeps solves accurate when one term's smoothing
    weight is extreme (1e12-scale) relative to the Gram matrix.
    """

    def __init__(self, H: np.ndarray):
        self.H = H
        d = np.sqrt(np.clip(np.diag(H), 1e-300, None))
        self.d = d
        Hs = H / np.outer(d, d)
        self.cho = scipy.linalg.cho_factor(Hs)
        # the scaled matrix has unit diagonal, so a vanishing pivot means
        # numerical rank deficiency that plain cho_factor lets through
        if float(np.min(np.diag(self.cho[0]))) < 1e-7:
            raise np.linalg.LinAlgError("effectively singular system")

    def _raw(self, B: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve(self.cho, B / self.d[:, None]) \
            / self.d[:, None]

    def solve(self, B: np.ndarray) -> np.ndarray:
        B2 = B.reshape(-1, 1) if B.ndim == 1 else B
        x = self._raw(B2)
        x = x + self._raw(B2 - self.H @ x)
        return x[:, 0] if B.ndim == 1 else x


class _Workspace:
    """Precomputed Gram pieces for fast per-term GCV evaluation."""

    def __init__(self, X: np.ndarray, y: np.ndarray,
                 blocks: list[tuple[slice, np.ndarray]]):
        self.X = X
        self.y = y
        self.n, self.p = X.shape
        self.G = X.T @ X
        self.Xty = X.T @ y
        self.yty = float(y @ y)
        self.blocks = blocks  # (columns, normalized penalty) per smooth
        self.ridge = 0.0

    def penalty_total(self, lambdas: np.ndarray,
                      skip: int | None = None) -> np.ndarray:
        S = np.zeros((self.p, self.p))
        for i, (cols, Sn) in enumerate(self.blocks):
            if i == skip:
                continue
            S[cols, cols] += lambdas[i] * Sn
        return S

    def factor(self, H: np.ndarray) -> _Factor:
        try:
            return _Factor(H + self.ridge * np.eye(self.p))
        except np.linalg.LinAlgError:
            raise SingularDesign("penalized normal equations not positive "
                                 "definite")

    def solve_all(self, lambdas: np.ndarray) -> dict:
        """Full solve at a fixed smoothing vector."""
        H = self.G + self.penalty_total(lambdas)
        fac = self.factor(H)
        beta = fac.solve(self.Xty)
        HinvG = fac.solve(self.G)
        tr_a = float(np.trace(HinvG))
        rss = self.yty - 2.0 * float(beta @ self.Xty) \
            + float(beta @ self.G @ beta)
        rss = max(rss, 0.0)
        denom = max(self.n - tr_a, 1e-8)
        gcv = self.n * rss / denom ** 2
        return {"beta": beta, "tr_a": tr_a, "rss": rss, "gcv": gcv,
                "edf_cols": np.diag(HinvG).copy()}


def _term_search(ws: _Workspace, lambdas: np.ndarray, j: int) -> float:
    """Best lambda for term j by grid plus golden section on the GCV score.

    All per-candidate evaluations reuse one factorization of the penalized
    system without term j; the rank-deficient penalty of term j enters
    through a low-rank update.
    """
    cols, Sn = ws.blocks[j]
    H0 = ws.G + ws.penalty_total(lambdas, skip=j)
    fac = ws.factor(H0)
    beta0 = fac.solve(ws.Xty)
    H0invG = fac.solve(ws.G)
    t0 = float(np.trace(H0invG))

    vals, vecs = np.linalg.eigh(Sn)
    keep = vals > 1e-10 * max(vals[-1], 1e-300)
    s = vals[keep]
    U = np.zeros((ws.p, int(keep.sum())))
    U[cols.start:cols.stop] = vecs[:, keep]

    W = fac.solve(U)
    E = U.T @ W
    GW = ws.G @ W
    C = W.T @ GW
    WtXty = W.T @ ws.Xty
    WtGbeta0 = GW.T @ beta0
    b0Gb0 = float(beta0 @ ws.G @ beta0)
    b0Xty = float(beta0 @ ws.Xty)

    def gcv_at(log_lam: float) -> float:
        lam = 10.0 ** log_lam
        M = np.diag(1.0 / (lam * s)) + E
        try:
            P = np.linalg.inv(M)
        except np.linalg.LinAlgError:
            return np.inf
        tr_a = t0 - float(np.trace(P @ C))
        a = P @ WtXty
        bGb = b0Gb0 - 2.0 * float(a @ WtGbeta0) + float(a @ C @ a)
        bXty = b0Xty - float(a @ WtXty)
        rss = max(ws.yty - 2.0 * bXty + bGb, 0.0)
        denom = ws.n - tr_a
        if denom <= 1e-8:
            return np.inf
        return ws.n * rss / denom ** 2

    lo, hi = LOG_LAMBDA_RANGE
    grid = np.arange(lo, hi + 1e-9, 2.0)
    candidates = [(gcv_at(g), g) for g in grid]
    current = float(np.log10(max(lambdas[j], 10.0 ** lo)))
    candidates.append((gcv_at(current), current))
    best_f, best_g = min(candidates, key=lambda t: (t[0], t[1]))

    a, b = max(lo, best_g - 2.0), min(hi, best_g + 2.0)
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = gcv_at(c), gcv_at(d)
    for _ in range(30):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = gcv_at(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = gcv_at(d)
        if b - a < 1e-4:
            break
    for f, g in ((fc, c), (fd, d)):
        if f < best_f:
            best_f, best_g = f, g
    return 10.0 ** best_g


def _sum_to_zero_basis(col_sums: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the constraint null space {b : col_sums @ b = 0}."""
    q, _ = np.linalg.qr(col_sums.reshape(-1, 1), mode="complete")
    return q[:, 1:]


def fit_gam(X, y, *, method: str = "", level_pct: int = 0,
            feature_names: Sequence[str] | None = None,
            fixed_lambdas: Mapping[str, float] | None = None,
            ) -> tuple[GamModel, FitDiagnostics]:
    """Fit the additive model of ``y`` on the feature columns of ``X``.

    Rows with a non-finite response are dropped. Features listed in
    ``LINEAR_FEATURES`` enter linearly; other features get a spline unless
    they lack enough distinct values (demoted to linear below four distinct
    quantile knots, dropped when constant). ``fixed_lambdas`` pins the
    smoothing weight of named terms instead of searching.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be (rows, features) matching y")
    names = tuple(feature_names) if feature_names is not None \
        else tuple(FEATURE_NAMES)
    if X.shape[1] != len(names):
        raise ValueError(f"X has {X.shape[1]} columns for {len(names)} "
                         "feature names")
    keep = np.isfinite(y) & np.all(np.isfinite(X), axis=1)
    X, y = X[keep], y[keep]
    n = len(y)
    if n < MIN_ROWS:
        raise InsufficientData(f"need at least {MIN_ROWS} rows with finite "
                               f"response, have {n}")
    fixed_lambdas = dict(fixed_lambdas or {})

    # classify features
    linear_names: list[str] = []
    smooth_specs: list[tuple[str, np.ndarray]] = []  # (name, knots)
    demoted: list[str] = []
    dropped: list[str] = []
    idx = _column_index(names)
    for name in names:
        col = X[:, idx[name]]
        distinct = np.unique(col)
        if len(distinct) < 2:
            dropped.append(name)
            continue
        if name in LINEAR_FEATURES:
            linear_names.append(name)
            continue
        quant = np.quantile(col, np.linspace(0.0, 1.0, BASIS_SIZE))
        gap = MIN_KNOT_GAP * (quant[-1] - quant[0])
        kept = [quant[0]]
        for q in quant[1:]:
            if q - kept[-1] > gap:
                kept.append(q)
        knots = np.asarray(kept)
        if len(knots) < 4:
            linear_names.append(name)
            demoted.append(name)
            continue
        smooth_specs.append((name, knots))

    # assemble design: intercept | linear | smooth blocks
    columns = [np.ones((n, 1))]
    for name in linear_names:
        columns.append(X[:, idx[name]].reshape(-1, 1))
    blocks: list[tuple[slice, np.ndarray]] = []
    zbases: list[np.ndarray] = []
    start = 1 + len(linear_names)
    for name, knots in smooth_specs:
        S, F = _cr_penalty(knots)
        raw = _cr_design(X[:, idx[name]], knots, F)
        Z = _sum_to_zero_basis(raw.sum(axis=0))
        Xc = raw @ Z
        Sc = Z.T @ S @ Z
        norm = np.linalg.norm(Xc.T @ Xc) / max(np.linalg.norm(Sc), 1e-300)
        Sn = Sc * norm
        # rebuild from the positive eigenspace so the penalty null space
        # (linear functions) is exact even under extreme smoothing weights
        vals, vecs = np.linalg.eigh(Sn)
        vals[vals < 1e-12 * max(vals[-1], 1e-300)] = 0.0
        Sn = (vecs * vals) @ vecs.T
        stop = start + Xc.shape[1]
        columns.append(Xc)
        blocks.append((slice(start, stop), Sn))
        zbases.append(Z)
        start = stop

    design = np.hstack(columns)
    ws = _Workspace(design, y, blocks)

    lambdas = np.ones(len(smooth_specs))
    searchable = []
    for i, (name, _) in enumerate(smooth_specs):
        if name in fixed_lambdas:
            lambdas[i] = float(fixed_lambdas[name])
        else:
            searchable.append(i)

    def full_gcv() -> float:
        return ws.solve_all(lambdas)["gcv"]

    try:
        gcv_prev = full_gcv()
        ridged = False
    except SingularDesign:
        ws.ridge = 1e-8 * max(1.0, float(np.mean(np.diag(ws.G))))
        gcv_prev = full_gcv()
        ridged = True

    cycles = 0
    if searchable:
        for cycle in range(MAX_CYCLES):
            cycles = cycle + 1
            for i in searchable:
                lambdas[i] = _term_search(ws, lambdas, i)
            gcv_now = full_gcv()
            if gcv_prev - gcv_now < GCV_TOL:
                gcv_prev = min(gcv_prev, gcv_now)
                break
            gcv_prev = gcv_now

    sol = ws.solve_all(lambdas)
    beta = sol["beta"]
    edf_cols = sol["edf_cols"]

    intercept = float(beta[0])
    linear_coefs = beta[1:1 + len(linear_names)].copy()
    smooths = []
    edf: dict[str, float] = {
        "parametric": float(np.sum(edf_cols[:1 + len(linear_names)]))}
    for i, ((name, knots), (cols, _), Z) in enumerate(
            zip(smooth_specs, blocks, zbases)):
        gamma = beta[cols]
        term_edf = float(np.sum(edf_cols[cols]))
        smooths.append(SmoothTerm(name=name, knots=knots, coef=Z @ gamma,
                                  lam=float(lambdas[i]), edf=term_edf))
        edf[name] = term_edf
    tr_a = sol["tr_a"]
    resid_var = sol["rss"] / max(n - tr_a, 1.0)

    model = GamModel(method=method, level_pct=level_pct, intercept=intercept,
                     linear_names=tuple(linear_names),
                     linear_coefs=linear_coefs, smooths=tuple(smooths),
                     feature_names=names, registry_hash=registry_hash())
    diag = FitDiagnostics(gcv=float(sol["gcv"]), edf=edf,
                          residual_variance=float(resid_var), ridged=ridged,
                          demoted=tuple(demoted), dropped=tuple(dropped),
                          cycles=cycles)
    return model, diag


def predict_matrix(model: GamModel, X) -> np.ndarray:
    """Predict for every row of ``X`` (columns in model feature order)."""
    if model.registry_hash != registry_hash():
        raise RegistryMismatch("model was trained against a different "
                               "feature registry")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != len(model.feature_names):
        raise ValueError(f"expected {len(model.feature_names)} feature "
                         f"columns, got {X.shape[1]}")
    idx = _column_index(model.feature_names)
    out = np.full(len(X), model.intercept)
    for name, coef in zip(model.linear_names, model.linear_coefs):
        out += coef * X[:, idx[name]]
    for term in model.smooths:
        out += term(X[:, idx[term.name]])
    return out


def predict_gam(model: GamModel, features) -> float:
    """Predict the response for one feature vector."""
    return float(predict_matrix(model, np.asarray(features))[0])


def partial_effect(model: GamModel, feature: str, grid) -> np.ndarray:
    """Centered spline effect of one smooth feature on a value grid."""
    for term in model.smooths:
        if term.name == feature:
            return term(np.atleast_1d(np.asarray(grid, dtype=np.float64)))
    raise UnknownFeature(f"{feature!r} is not a smooth term of this model")
