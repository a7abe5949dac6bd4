"""Bivariate impact-only toy model: posterior sampling on a circle arc.

With a fixed covariance and restrictions only on impact signs, the only
free parameter is the first column of the orthogonal factor, a point on
the unit circle; the restrictions cut out an arc. Accept-reject costs
2*pi/arc proposals per draw (hyperbolic in the arc length), while the
slice sampler's per-step candidate count grows roughly logarithmically as
the arc shrinks. Sweeping the arc length reproduces that contrast.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .diagnostics import multivariate_ess
from .errors import ConfigError
from .ess import EssTarget, ess_step
from .rng import derive_rng

TWO_PI = 2.0 * math.pi

# Impact-factor transpose of the running bivariate example: unit variances,
# regression coefficient -0.9 of the second innovation on the first.
BASELINE_SIGMA_TR = np.array([[1.0, 0.0], [-0.9, 1.0]])

# Left endpoint of the arc the baseline restrictions carve out.
BASELINE_ANCHOR = math.atan2(0.9, 1.0)


def arc_from_sigma_tr(sigma_tr: np.ndarray) -> tuple[float, float]:
    """Arc (low, high) carved out by requiring both impact responses of the
    first shock to be positive, for a 2x2 lower-triangular impact factor.

    The first row gives ``cos(angle) > 0``; the second gives
    ``sigma_tr[1,0] cos + sigma_tr[1,1] sin > 0``; together an arc from
    atan2(-sigma_tr[1,0], sigma_tr[1,1]) to pi/2.
    """
    sigma_tr = np.asarray(sigma_tr, dtype=float)
    if sigma_tr.shape != (2, 2) or sigma_tr[0, 1] != 0.0:
        raise ValueError(
            f"expected a 2x2 lower-triangular factor, got {sigma_tr!r}"
        )
    if sigma_tr[0, 0] <= 0.0 or sigma_tr[1, 1] <= 0.0:
        raise ValueError("impact factor needs a positive diagonal")
    low = math.atan2(-sigma_tr[1, 0], sigma_tr[1, 1])
    return low, math.pi / 2.0


def baseline_arc_length() -> float:
    """Length of the arc the baseline restrictions identify (about 0.838)."""
    low, high = arc_from_sigma_tr(BASELINE_SIGMA_TR)
    return high - low


@dataclass(frozen=True)
class CircleArc:
    """Arc [start, start + length) on the unit circle, angles in radians."""

    start: float = BASELINE_ANCHOR
    length: float = math.pi / 2.0 - BASELINE_ANCHOR

    def __post_init__(self):
        if not 0.0 < self.length <= TWO_PI:
            raise ValueError(f"length must be in (0, 2*pi], got {self.length}")

    def phase(self, angle: float | np.ndarray) -> float | np.ndarray:
        """Angle measured from the arc start, wrapped into [0, 2*pi)."""
        return np.mod(angle - self.start, TWO_PI)

    def contains_angle(self, angle: float | np.ndarray):
        return self.phase(angle) < self.length

    def contains_point(self, xy: np.ndarray) -> bool:
        return bool(self.contains_angle(math.atan2(xy[1], xy[0])))

    def midpoint_unit(self) -> np.ndarray:
        mid = self.start + self.length / 2.0
        return np.array([math.cos(mid), math.sin(mid)])


def ar_expected_trials(arc_length: float) -> float:
    """Exact mean accept-reject proposals per draw: 2*pi over the arc."""
    if not 0.0 < arc_length <= TWO_PI:
        raise ValueError(f"arc length must be in (0, 2*pi], got {arc_length}")
    return TWO_PI / arc_length


def ar_mean_trials_mc(
    arc: CircleArc,
    accepted: int,
    rng: np.random.Generator,
    max_chunk: int = 1 << 20,
) -> float:
    """Monte Carlo mean proposals per accepted draw.

    Proposes normalized bivariate Gaussians (uniform angles) in vectorized
    chunks until ``accepted`` draws land in the arc; returns total
    proposals over acceptances.
    """
    if accepted < 1:
        raise ValueError(f"accepted must be >= 1, got {accepted}")
    expected = ar_expected_trials(arc.length)
    chunk = int(min(max_chunk, max(1024, accepted * expected * 1.25)))
    total_prev = 0
    found = 0
    while True:
        xy = rng.standard_normal((chunk, 2))
        angles = np.arctan2(xy[:, 1], xy[:, 0])
        hits = np.flatnonzero(arc.contains_angle(angles))
        if found + hits.size >= accepted:
            idx = hits[accepted - found - 1]
            return (total_prev + int(idx) + 1) / accepted
        found += hits.size
        total_prev += chunk


@dataclass(frozen=True)
class ArcEssResult:
    """One slice-sampling chain on an arc."""

    angles: np.ndarray
    phases: np.ndarray
    mean_trials: float
    total_trials: int


def ess_arc_chain(
    arc: CircleArc,
    steps: int,
    rng: np.random.Generator,
    max_shrink: int = 200,
    initial_angle: float | None = None,
) -> ArcEssResult:
    """Run ``steps`` elliptical slice updates targeting the uniform arc.

    The target is a standard bivariate Gaussian restricted to the arc (in
    angle terms: uniform on the arc). Starts at the arc midpoint unless an
    initial angle inside the arc is given. ``phases`` are angles measured
    from the arc start, free of wrap-around jumps for diagnostics.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if initial_angle is None:
        current = arc.midpoint_unit()
    else:
        if not arc.contains_angle(initial_angle):
            raise ValueError(
                f"initial angle {initial_angle} is outside the arc"
            )
        current = np.array([math.cos(initial_angle), math.sin(initial_angle)])

    target = EssTarget(
        dim=2,
        prior_mean=np.zeros(2),
        prior_draw=lambda g: g.standard_normal(2),
        log_likelihood=lambda xy: 0.0 if arc.contains_point(xy) else -math.inf,
    )
    angles = np.empty(steps)
    total = 0
    for i in range(steps):
        current, trials = ess_step(target, current, rng, max_shrink=max_shrink)
        total += trials
        angles[i] = math.atan2(current[1], current[0])
    return ArcEssResult(
        angles=angles,
        phases=np.asarray(arc.phase(angles)),
        mean_trials=total / steps,
        total_trials=total,
    )


@dataclass(frozen=True)
class SweepRow:
    """One arc length's cost comparison."""

    arc_length: float
    ar_expected_trials: float
    ar_mc_trials: float
    ess_mean_trials: float
    ess_draws_per_iid: float


def _sweep_point(
    index: int,
    length: float,
    steps: int,
    accepted: int,
    seed: int,
    anchor: float,
    thin: int,
) -> SweepRow:
    arc = CircleArc(start=anchor, length=length)
    ar_mc = ar_mean_trials_mc(arc, accepted, derive_rng(seed, index, 0))
    result = ess_arc_chain(arc, steps, derive_rng(seed, index, 1))
    thinned = result.phases[thin - 1 :: thin]
    # Small stored samples need smaller batches than the SVAR default.
    batch = int(np.clip(thinned.size // 20, 10, 100))
    if thinned.size >= 2 * batch:
        ess = multivariate_ess(thinned[:, None], batch_size=batch)
        per_iid = (thinned.size // batch * batch) / ess
    else:
        per_iid = math.nan
    return SweepRow(
        arc_length=length,
        ar_expected_trials=ar_expected_trials(length),
        ar_mc_trials=ar_mc,
        ess_mean_trials=result.mean_trials,
        ess_draws_per_iid=per_iid,
    )


def _sweep_point_args(args: tuple) -> SweepRow:
    return _sweep_point(*args)


def sweep_arc_grid(
    lengths: np.ndarray,
    steps: int = 20_000,
    accepted: int = 200,
    seed: int = 0,
    anchor: float = BASELINE_ANCHOR,
    thin: int = 100,
    workers: int = 1,
) -> list[SweepRow]:
    """Compare sampler costs across arc lengths.

    Each grid point gets its own random streams derived from (seed, index),
    so results are identical for any ``workers`` count; workers only change
    wall time.
    """
    lengths = [float(v) for v in np.asarray(lengths, dtype=float).ravel()]
    if not lengths:
        raise ValueError("need at least one arc length")
    args = [
        (i, length, steps, accepted, seed, anchor, thin)
        for i, length in enumerate(lengths)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point_args, args))
    return [_sweep_point(*a) for a in args]


def worker_count_from_env() -> int:
    """Worker count from the SIGNVAR_WORKERS environment variable."""
    raw = os.environ.get("SIGNVAR_WORKERS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(
            f"SIGNVAR_WORKERS must be a positive integer, got {raw!r}"
        ) from None
    if value < 1:
        raise ConfigError(
            f"SIGNVAR_WORKERS must be a positive integer, got {raw!r}"
        )
    return value
