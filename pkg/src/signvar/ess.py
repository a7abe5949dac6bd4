"""Elliptical slice sampling for Gaussian priors with black-box likelihoods.

One update draws an auxiliary point from the prior, intersects the ellipse
through the current and auxiliary points with a likelihood slice, and
shrinks the angle bracket until a point on the ellipse clears the slice
threshold. The kernel needs no tuning, leaves prior times likelihood
invariant, and works for likelihoods that are plain 0/1 indicators: the
log-likelihood only has to be finite at the current point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ShrinkBracketError


@dataclass(frozen=True)
class EssTarget:
    """A Gaussian prior (mean plus sampler) and a log likelihood.

    ``prior_draw`` must sample from the prior with the given mean;
    ``log_likelihood`` may return ``-inf`` to veto a point, and must be
    finite at the chain's current state.
    """

    dim: int
    prior_mean: np.ndarray
    prior_draw: Callable[[np.random.Generator], np.ndarray]
    log_likelihood: Callable[[np.ndarray], float]


def ess_step(
    target: EssTarget,
    current: np.ndarray,
    rng: np.random.Generator,
    max_shrink: int = 200,
    step_name: str = "ess",
) -> tuple[np.ndarray, int]:
    """One elliptical slice update; returns (new point, candidates tried).

    The slice threshold is the current log likelihood minus an Exp(1)
    draw (equal in law to adding log of a uniform, without log(0) risk).
    Rejected angles shrink the bracket toward zero, so the current point
    is always reachable and the loop terminates with probability one; the
    ``max_shrink`` cap turns a pathological target into a clean error.
    """
    loglik = target.log_likelihood
    current_ll = loglik(current)
    if not math.isfinite(current_ll):
        raise ValueError(
            "log likelihood at the current state must be finite; "
            "the chain appears to have left the support"
        )
    threshold = current_ll - rng.standard_exponential()
    auxiliary = target.prior_draw(rng)

    mean = target.prior_mean
    delta = current - mean
    span = auxiliary - mean

    angle = rng.uniform(0.0, 2.0 * math.pi)
    low, high = angle - 2.0 * math.pi, angle
    trials = 0
    while True:
        trials += 1
        if trials > max_shrink:
            raise ShrinkBracketError(
                f"slice bracket failed to find an acceptable point after "
                f"{max_shrink} candidates in step {step_name!r}; the target "
                "may be numerically degenerate",
                step=step_name,
                trials=trials,
            )
        candidate = mean + delta * math.cos(angle) + span * math.sin(angle)
        if loglik(candidate) > threshold:
            return candidate, trials
        if angle < 0.0:
            low = angle
        else:
            high = angle
        angle = rng.uniform(low, high)
