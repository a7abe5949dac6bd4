"""Core model types: VAR dimensions, parameterizations, impulse responses.

A reduced-form VAR with n variables and p lags is written
``y_t' = x_t' B + u_t'`` where x_t stacks p lagged observation vectors
followed by deterministic terms, B is m x n with m = n*p + (number of
deterministic terms), and u_t has covariance Sigma.

Three equivalent parameterizations are supported:

* reduced form (B, Sigma),
* structural (A0, Aplus) with A0 the invertible impact matrix,
* orthogonal reduced form (B, Sigma, Q) with Q orthogonal.

The maps between them are exact inverses; ``to_structural`` and
``to_orthogonal`` implement the round trip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DataError, NumericalError

DETERMINISTIC_KINDS = ("constant", "exogenous")

# Validation tolerances. Symmetry and orthogonality are checked in max-abs
# terms; invertibility via the singular-value ratio.
SYMMETRY_TOL = 1e-10
ORTHOGONALITY_TOL = 1e-10
SINGULARITY_RTOL = 1e-12


@dataclass(frozen=True)
class ModelSpec:
    """Dimensions of a VAR: n variables, p lags, T effective observations.

    ``deterministic`` lists the deterministic regressors in the order in
    which they appear after the lag block, each entry one of
    ``"constant"`` or ``"exogenous"``.
    """

    n: int
    p: int
    T: int
    deterministic: tuple[str, ...] = ("constant",)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one variable, got n={self.n}")
        if self.p < 0:
            raise ValueError(f"lag order must be nonnegative, got p={self.p}")
        if self.T < 1:
            raise ValueError(f"need at least one observation, got T={self.T}")
        for kind in self.deterministic:
            if kind not in DETERMINISTIC_KINDS:
                raise ValueError(
                    f"unknown deterministic term {kind!r}; "
                    f"expected one of {DETERMINISTIC_KINDS}"
                )

    @property
    def m(self) -> int:
        """Number of regressors per equation."""
        return self.n * self.p + len(self.deterministic)

    @classmethod
    def from_data(
        cls, raw: np.ndarray, p: int, deterministic: tuple[str, ...] = ("constant",)
    ) -> "ModelSpec":
        """Spec for a raw series matrix, with T the post-lag sample size."""
        raw = np.asarray(raw, dtype=float)
        if raw.ndim == 1:
            raw = raw[:, None]
        t_raw, n = raw.shape
        if t_raw <= p:
            raise DataError(
                f"need more than p={p} rows to build a lagged sample, got {t_raw}"
            )
        return cls(n=n, p=p, T=t_raw - p, deterministic=tuple(deterministic))


@dataclass(frozen=True)
class TimeSeriesData:
    """Aligned response matrix Y (T x n) and regressor matrix X (T x m)."""

    Y: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.Y, dtype=float)
        x = np.asarray(self.X, dtype=float)
        if y.ndim != 2 or x.ndim != 2:
            raise DataError("Y and X must be 2-d arrays")
        if y.shape[0] != x.shape[0]:
            raise DataError(
                f"Y has {y.shape[0]} rows but X has {x.shape[0]}; "
                "responses and regressors must align"
            )
        if not (np.isfinite(y).all() and np.isfinite(x).all()):
            raise DataError("non-finite values in Y or X")
        object.__setattr__(self, "Y", y)
        object.__setattr__(self, "X", x)

    @property
    def T(self) -> int:
        return self.Y.shape[0]

    @property
    def n(self) -> int:
        return self.Y.shape[1]

    @property
    def m(self) -> int:
        return self.X.shape[1]


def build_regressors(
    raw: np.ndarray, spec: ModelSpec, exogenous: np.ndarray | None = None
) -> TimeSeriesData:
    """Build (Y, X) from a raw T_raw x n series matrix.

    The first p rows are consumed as initial conditions. Row t of X holds
    ``[y_{t-1}', ..., y_{t-p}', deterministic terms]``. Exogenous columns,
    if any, must cover all T_raw rows; the first p are dropped to align.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim == 1:
        raw = raw[:, None]
    if raw.ndim != 2:
        raise DataError(f"raw series must be 1-d or 2-d, got ndim={raw.ndim}")
    t_raw, n = raw.shape
    if n != spec.n:
        raise DataError(f"raw series has {n} columns but spec.n={spec.n}")
    if t_raw <= spec.p:
        raise DataError(
            f"need more than p={spec.p} rows to build a lagged sample, got {t_raw}"
        )
    if t_raw - spec.p != spec.T:
        raise DataError(
            f"raw series implies T={t_raw - spec.p} but spec.T={spec.T}"
        )
    if not np.isfinite(raw).all():
        raise DataError("non-finite values in raw series")

    n_exo = sum(1 for kind in spec.deterministic if kind == "exogenous")
    if n_exo:
        if exogenous is None:
            raise DataError(
                f"spec declares {n_exo} exogenous column(s) but none were given"
            )
        exogenous = np.asarray(exogenous, dtype=float)
        if exogenous.ndim == 1:
            exogenous = exogenous[:, None]
        if exogenous.shape != (t_raw, n_exo):
            raise DataError(
                f"exogenous must be shaped ({t_raw}, {n_exo}), "
                f"got {exogenous.shape}"
            )
        if not np.isfinite(exogenous).all():
            raise DataError("non-finite values in exogenous columns")
    elif exogenous is not None:
        raise DataError("exogenous data given but spec declares no exogenous terms")

    T, p = spec.T, spec.p
    Y = raw[p:].copy()
    cols = []
    for k in range(1, p + 1):
        cols.append(raw[p - k : t_raw - k])
    exo_used = 0
    for kind in spec.deterministic:
        if kind == "constant":
            cols.append(np.ones((T, 1)))
        else:
            cols.append(exogenous[p:, exo_used : exo_used + 1])
            exo_used += 1
    X = np.hstack(cols) if cols else np.empty((T, 0))
    return TimeSeriesData(Y=Y, X=X)


def _check_symmetric_spd(mat: np.ndarray, name: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be square, got shape {mat.shape}")
    if mat.shape[0] and np.abs(mat - mat.T).max() > SYMMETRY_TOL:
        raise ValueError(f"{name} is not symmetric to {SYMMETRY_TOL}")
    chol_lower(mat, name=name)
    return mat


def chol_lower(sigma: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Lower Cholesky factor L with L L' = sigma and positive diagonal.

    Raises NumericalError if sigma is not positive definite.
    """
    sigma = np.asarray(sigma, dtype=float)
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"{name} is not positive definite: {exc}") from exc


@dataclass(frozen=True)
class ReducedFormParams:
    """Reduced-form parameters: coefficients B (m x n), covariance Sigma."""

    B: np.ndarray
    Sigma: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.B, dtype=float)
        sigma = _check_symmetric_spd(self.Sigma, "Sigma")
        if b.ndim != 2 or b.shape[1] != sigma.shape[0]:
            raise ValueError(
                f"B must be m x n with n={sigma.shape[0]}, got shape {b.shape}"
            )
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "Sigma", sigma)


@dataclass(frozen=True)
class StructuralParams:
    """Structural parameters: impact matrix A0 (n x n), lag part Aplus (m x n)."""

    A0: np.ndarray
    Aplus: np.ndarray

    def __post_init__(self):
        a0 = np.asarray(self.A0, dtype=float)
        aplus = np.asarray(self.Aplus, dtype=float)
        if a0.ndim != 2 or a0.shape[0] != a0.shape[1]:
            raise ValueError(f"A0 must be square, got shape {a0.shape}")
        n = a0.shape[0]
        if aplus.ndim != 2 or aplus.shape[1] != n:
            raise ValueError(
                f"Aplus must be m x n with n={n}, got shape {aplus.shape}"
            )
        svals = np.linalg.svd(a0, compute_uv=False)
        if n and svals[-1] <= SINGULARITY_RTOL * svals[0]:
            raise ValueError("A0 is singular or numerically singular")
        object.__setattr__(self, "A0", a0)
        object.__setattr__(self, "Aplus", aplus)


@dataclass(frozen=True)
class OrthogonalParams:
    """Orthogonal reduced-form parameters (B, Sigma, Q) with Q orthogonal."""

    B: np.ndarray
    Sigma: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.B, dtype=float)
        sigma = _check_symmetric_spd(self.Sigma, "Sigma")
        q = np.asarray(self.Q, dtype=float)
        n = sigma.shape[0]
        if b.ndim != 2 or b.shape[1] != n:
            raise ValueError(
                f"B must be m x n with n={n}, got shape {b.shape}"
            )
        if q.shape != (n, n):
            raise ValueError(f"Q must be {n} x {n}, got shape {q.shape}")
        defect = np.abs(q.T @ q - np.eye(n)).max() if n else 0.0
        if defect > ORTHOGONALITY_TOL:
            raise ValueError(
                f"Q is not orthogonal: max |Q'Q - I| = {defect:.3e} "
                f"exceeds {ORTHOGONALITY_TOL}"
            )
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "Sigma", sigma)
        object.__setattr__(self, "Q", q)

    @property
    def n(self) -> int:
        return self.Sigma.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[0]


def to_structural(params: OrthogonalParams) -> StructuralParams:
    """Map (B, Sigma, Q) to (A0, Aplus).

    A0 solves ``chol_lower(Sigma)' A0 = Q`` and Aplus = B A0, so that
    Sigma = (A0 A0')^{-1} and B = Aplus A0^{-1} hold on the way back.
    """
    sigma_tr = chol_lower(params.Sigma, name="Sigma")
    a0 = scipy.linalg.solve_triangular(sigma_tr, params.Q, lower=True, trans="T")
    aplus = params.B @ a0
    return StructuralParams(A0=a0, Aplus=aplus)


def to_orthogonal(params: StructuralParams) -> OrthogonalParams:
    """Map (A0, Aplus) back to (B, Sigma, Q); exact inverse of to_structural."""
    a0 = params.A0
    precision = a0 @ a0.T
    factor = scipy.linalg.cho_factor(precision, lower=True)
    sigma = scipy.linalg.cho_solve(factor, np.eye(a0.shape[0]))
    sigma = (sigma + sigma.T) / 2.0
    sigma_tr = chol_lower(sigma, name="Sigma")
    q = sigma_tr.T @ a0
    b = np.linalg.solve(a0.T, params.Aplus.T).T
    return OrthogonalParams(B=b, Sigma=sigma, Q=q)


@dataclass(frozen=True)
class ImpulseResponses:
    """Responses at horizons 0..H: values[h, i, j] is the response of
    variable i to structural shock j, h periods after impact."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 3 or vals.shape[1] != vals.shape[2]:
            raise ValueError(
                f"values must be (H+1) x n x n, got shape {vals.shape}"
            )
        if not np.isfinite(vals).all():
            raise ValueError("impulse responses contain non-finite entries")
        object.__setattr__(self, "values", vals)

    @property
    def horizon(self) -> int:
        return self.values.shape[0] - 1

    @property
    def n(self) -> int:
        return self.values.shape[1]


def lag_blocks(b: np.ndarray, n: int, p: int) -> np.ndarray:
    """Extract the p lag-coefficient blocks from B as a (p, n, n) array.

    Block k-1 multiplies the k-th lag: rows (k-1)*n .. k*n of B.
    Deterministic-term rows beyond n*p are ignored.
    """
    b = np.asarray(b, dtype=float)
    if b.shape[0] < n * p:
        raise ValueError(
            f"B has {b.shape[0]} rows but n*p={n * p} lag rows are required"
        )
    return b[: n * p].reshape(p, n, n)


def irf_values(
    b: np.ndarray, sigma_tr: np.ndarray, q: np.ndarray, p: int, horizon: int
) -> np.ndarray:
    """Impulse responses as a raw (H+1, n, n) array.

    Horizon 0 is ``sigma_tr @ q``; later horizons follow the moving-average
    recursion ``L_h = sum_{k=1}^{min(h,p)} B_k' L_{h-k}``. No stationarity
    is assumed; responses of explosive models simply grow.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, got {horizon}")
    n = q.shape[0]
    out = np.empty((horizon + 1, n, n))
    out[0] = sigma_tr @ q
    if horizon == 0 or p == 0:
        out[1:] = 0.0
        return out
    blocks_t = lag_blocks(b, n, p).transpose(0, 2, 1)
    for h in range(1, horizon + 1):
        acc = np.zeros((n, n))
        for k in range(1, min(h, p) + 1):
            acc += blocks_t[k - 1] @ out[h - k]
        out[h] = acc
    return out


def impulse_responses(
    params: OrthogonalParams, spec: ModelSpec, horizon: int
) -> ImpulseResponses:
    """Structural impulse responses of ``params`` at horizons 0..horizon."""
    if params.n != spec.n:
        raise ValueError(f"params have n={params.n} but spec.n={spec.n}")
    if params.m != spec.m:
        raise ValueError(f"params have m={params.m} but spec.m={spec.m}")
    sigma_tr = chol_lower(params.Sigma, name="Sigma")
    vals = irf_values(params.B, sigma_tr, params.Q, spec.p, horizon)
    return ImpulseResponses(values=vals)
