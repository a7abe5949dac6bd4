"""Sampler efficiency diagnostics built on batch-means effective sample size.

The central quantity is the multivariate effective sample size of a chain
of d-dimensional functionals: N scaled by the d-th root of the ratio of
the determinant of the sample covariance to the determinant of the
batch-means long-run covariance. ``draws_per_iid`` (stored draws needed
per effectively independent one) and ``minutes_per_1000_effective`` make
runs of different algorithms and lengths comparable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDrawsError
from .gibbs import PosteriorDraws
from .model import chol_lower, irf_values

DEFAULT_BATCH_SIZE = 100
# Coordinates with variance below this fraction of the largest are treated
# as constant and dropped before determinants are taken.
VARIANCE_FLOOR = 1e-14
# mESS above this multiple of N is flagged as suspicious estimator noise.
UPPER_SLACK = 1.05


def _prepare(draws: np.ndarray, batch_size: int) -> tuple[np.ndarray, int]:
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    if draws.ndim != 2:
        raise ValueError(f"draws must be (N, d), got shape {draws.shape}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    n_batches = draws.shape[0] // batch_size
    if n_batches < 2:
        raise ValueError(
            f"need at least 2 full batches of {batch_size}, "
            f"got {draws.shape[0]} draws"
        )
    used = n_batches * batch_size
    # Trim from the front: the oldest draws are the least stationary.
    return draws[draws.shape[0] - used :], n_batches


def _active_columns(draws: np.ndarray) -> np.ndarray:
    variances = draws.var(axis=0, ddof=1)
    top = variances.max()
    if top <= 0.0:
        raise DegenerateDrawsError(
            "all coordinates are constant; effective sample size is undefined"
        )
    keep = variances >= VARIANCE_FLOOR * top
    if not keep.all():
        dropped = np.flatnonzero(~keep).tolist()
        warnings.warn(
            f"dropping near-constant coordinate(s) {dropped} from the "
            "effective-sample-size determinant",
            stacklevel=3,
        )
    return keep


def multivariate_ess(
    draws: np.ndarray, batch_size: int = DEFAULT_BATCH_SIZE
) -> float:
    """Batch-means multivariate effective sample size of an (N, d) chain.

    Uses the largest prefix-trimmed sample that splits into full batches.
    Near-constant coordinates are dropped with a warning; an estimate far
    above N draws a warning as estimator noise but is returned as-is.
    """
    used, n_batches = _prepare(draws, batch_size)
    keep = _active_columns(used)
    active = used[:, keep]
    n_used, dim = active.shape

    sample_cov = np.atleast_2d(np.cov(active, rowvar=False))
    means = active.reshape(n_batches, batch_size, dim).mean(axis=1)
    batch_cov = batch_size * np.atleast_2d(np.cov(means, rowvar=False))

    sign_s, logdet_s = np.linalg.slogdet(sample_cov)
    sign_b, logdet_b = np.linalg.slogdet(batch_cov)
    if sign_s <= 0 or sign_b <= 0:
        raise DegenerateDrawsError(
            "covariance determinant is not positive; the draws are linearly "
            "degenerate or there are too few batches for the dimension"
        )
    ess = n_used * math.exp((logdet_s - logdet_b) / dim)
    if ess > UPPER_SLACK * n_used:
        warnings.warn(
            f"effective sample size {ess:.1f} exceeds the chain length "
            f"{n_used}; treat as estimator noise on a near-iid chain",
            stacklevel=2,
        )
    return ess


def univariate_ess(
    draws: np.ndarray, batch_size: int = DEFAULT_BATCH_SIZE
) -> np.ndarray:
    """Per-coordinate batch-means effective sample sizes (nan if constant)."""
    used, n_batches = _prepare(draws, batch_size)
    n_used, dim = used.shape
    variances = used.var(axis=0, ddof=1)
    means = used.reshape(n_batches, batch_size, dim).mean(axis=1)
    batch_var = batch_size * means.var(axis=0, ddof=1)
    out = np.full(dim, np.nan)
    top = variances.max()
    for i in range(dim):
        if top > 0 and variances[i] >= VARIANCE_FLOOR * top and batch_var[i] > 0:
            out[i] = n_used * variances[i] / batch_var[i]
    return out


def draws_per_iid(
    draws: np.ndarray, batch_size: int = DEFAULT_BATCH_SIZE
) -> float:
    """Stored draws needed per effectively independent draw (N / mESS)."""
    used, _ = _prepare(draws, batch_size)
    return used.shape[0] / multivariate_ess(used, batch_size)


def minutes_per_1000_effective(wall_seconds: float, ess: float) -> float:
    """Wall-clock minutes a run spends per 1000 effectively independent draws."""
    if ess <= 0:
        raise ValueError(f"effective sample size must be positive, got {ess}")
    return (wall_seconds / 60.0) / (ess / 1000.0)


@dataclass(frozen=True)
class DiagnosticsReport:
    """Efficiency summary of one run on a chosen functional of the draws."""

    n_draws: int
    dim: int
    batch_size: int
    mess: float
    draws_per_iid: float
    per_dim_ess: tuple[float, ...]
    wall_seconds: float | None = None
    minutes_per_1000_effective: float | None = None

    def __post_init__(self):
        if not self.mess > 0:
            raise ValueError(f"mess must be positive, got {self.mess}")

    def to_dict(self) -> dict:
        return {
            "n_draws": self.n_draws,
            "dim": self.dim,
            "batch_size": self.batch_size,
            "mess": self.mess,
            "draws_per_iid": self.draws_per_iid,
            "per_dim_ess": [
                None if math.isnan(v) else v for v in self.per_dim_ess
            ],
            "wall_seconds": self.wall_seconds,
            "minutes_per_1000_effective": self.minutes_per_1000_effective,
        }


def compute_diagnostics(
    functional: np.ndarray,
    batch_size: int = DEFAULT_BATCH_SIZE,
    wall_seconds: float | None = None,
) -> DiagnosticsReport:
    """Build a DiagnosticsReport from an (N, d) functional chain."""
    used, _ = _prepare(functional, batch_size)
    mess = multivariate_ess(used, batch_size)
    per_dim = univariate_ess(used, batch_size)
    minutes = (
        minutes_per_1000_effective(wall_seconds, mess)
        if wall_seconds is not None
        else None
    )
    return DiagnosticsReport(
        n_draws=used.shape[0],
        dim=used.shape[1] if used.ndim == 2 else 1,
        batch_size=batch_size,
        mess=mess,
        draws_per_iid=used.shape[0] / mess,
        per_dim_ess=tuple(per_dim.tolist()),
        wall_seconds=wall_seconds,
        minutes_per_1000_effective=minutes,
    )


def impact_functional(
    draws: PosteriorDraws, shocks: tuple[int, ...] | None = None
) -> np.ndarray:
    """Impact (horizon-zero) responses per draw, flattened to (N, n*k).

    This is the default functional for efficiency comparisons: the full
    set of impact responses to the ``shocks`` of interest (all shocks when
    None). Column order is shock-major, variable-minor.
    """
    count = len(draws)
    n = draws.sigma.shape[1]
    if shocks is None:
        shocks = tuple(range(n))
    if not shocks:
        raise ValueError("need at least one shock index")
    if min(shocks) < 0 or max(shocks) >= n:
        raise ValueError(f"shock indices {shocks} out of range for n={n}")
    out = np.empty((count, n * len(shocks)))
    for i in range(count):
        impact = chol_lower(draws.sigma[i], name="sigma") @ draws.q[i]
        out[i] = impact[:, list(shocks)].T.ravel()
    return out


def irf_tensor(
    draws: PosteriorDraws,
    p: int,
    horizon: int,
    shocks: tuple[int, ...] | None = None,
    normalize: bool = False,
) -> np.ndarray:
    """Per-draw impulse responses as an (N, H+1, n, k) array.

    ``normalize`` rescales each selected shock to unit impact on its own
    variable (response j to shock j at horizon zero becomes one). Raw
    draws are never modified.
    """
    count = len(draws)
    n = draws.sigma.shape[1]
    if shocks is None:
        shocks = tuple(range(n))
    if min(shocks) < 0 or max(shocks) >= n:
        raise ValueError(f"shock indices {shocks} out of range for n={n}")
    cols = list(shocks)
    out = np.empty((count, horizon + 1, n, len(cols)))
    for i in range(count):
        sigma_tr = chol_lower(draws.sigma[i], name="sigma")
        vals = irf_values(draws.b[i], sigma_tr, draws.q[i], p, horizon)
        sel = vals[:, :, cols]
        if normalize:
            scale = vals[0, cols, cols]
            if np.any(scale == 0.0):
                raise DegenerateDrawsError(
                    f"draw {i}: cannot normalize a shock with zero own impact"
                )
            sel = sel / scale
        out[i] = sel
    return out


@dataclass(frozen=True)
class QuantileTable:
    """Pointwise quantile bands of impulse responses.

    ``values`` has shape (len(quantiles), H+1, n, len(shocks)); quantile
    levels must be strictly increasing, which makes the bands weakly
    increasing along the first axis.
    """

    quantiles: tuple[float, ...]
    shocks: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        if any(
            not 0.0 < q < 1.0 for q in self.quantiles
        ) or list(self.quantiles) != sorted(set(self.quantiles)):
            raise ValueError(
                f"quantiles must be strictly increasing in (0, 1), "
                f"got {self.quantiles}"
            )
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 4 or vals.shape[0] != len(self.quantiles) or vals.shape[
            3
        ] != len(self.shocks):
            raise ValueError(
                f"values must be (n_q, H+1, n, n_shocks), got shape {vals.shape}"
            )
        object.__setattr__(self, "values", vals)

    @property
    def horizon(self) -> int:
        return self.values.shape[1] - 1

    @property
    def n(self) -> int:
        return self.values.shape[2]


def quantile_table(
    tensor: np.ndarray,
    shocks: tuple[int, ...],
    quantiles: tuple[float, ...] = (0.16, 0.5, 0.84),
) -> QuantileTable:
    """Pointwise quantiles of an (N, H+1, n, k) response tensor."""
    tensor = np.asarray(tensor, dtype=float)
    if tensor.ndim != 4:
        raise ValueError(f"tensor must be (N, H+1, n, k), got shape {tensor.shape}")
    vals = np.quantile(tensor, list(quantiles), axis=0)
    return QuantileTable(quantiles=tuple(quantiles), shocks=tuple(shocks), values=vals)
