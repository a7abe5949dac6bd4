"""Accept-reject sampling from the restricted posterior.

Proposals are independent draws from the unrestricted conjugate posterior
(coefficients and covariance) times the uniform distribution on orthogonal
matrices; a proposal is kept when its impulse responses satisfy the
restriction set. Acceptances are exact independent posterior draws, but
the expected cost per draw is the inverse posterior mass of the restricted
set, so a proposal budget guards against effectively-empty sets.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .conjugate import (
    NiwParams,
    draw_coefficients,
    draw_orthogonal_latent,
    draw_wishart_latent,
    latent_to_covariance,
    latent_to_orthogonal,
)
from .errors import BudgetExceededError, DegenerateLatentError
from .gibbs import PosteriorDraws
from .model import ModelSpec, OrthogonalParams, chol_lower, irf_values
from .restrictions import RestrictionSet, evaluate

DEFAULT_BUDGET = 10_000_000


@dataclass(frozen=True)
class ArStats:
    """Accept-reject run counters."""

    proposals: int
    accepted: int
    wall_seconds: float

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else 0.0


def _draw_arrays(
    posterior: NiwParams, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One unrestricted posterior draw as raw (b, sigma, sigma_tr, q) arrays."""
    while True:
        try:
            q = latent_to_orthogonal(draw_orthogonal_latent(posterior.n, rng))
            sigma = latent_to_covariance(draw_wishart_latent(posterior, rng))
            sigma_tr = chol_lower(sigma, name="sigma")
        except DegenerateLatentError:
            # Measure-zero latent degeneracies: redraw.
            continue
        noise = rng.standard_normal((posterior.m, posterior.n))
        b = draw_coefficients(posterior.psi, sigma, posterior.omega, noise)
        return b, sigma, sigma_tr, q


def draw_unrestricted(
    posterior: NiwParams, rng: np.random.Generator
) -> OrthogonalParams:
    """One validated draw from the unrestricted posterior."""
    if posterior.flat:
        raise ValueError(
            "cannot sample from a flat prior; update it with data first"
        )
    b, sigma, _, q = _draw_arrays(posterior, rng)
    return OrthogonalParams(B=b, Sigma=sigma, Q=q)


def ar_draw(
    posterior: NiwParams,
    restrictions: RestrictionSet,
    model: ModelSpec,
    rng: np.random.Generator,
    budget: int = DEFAULT_BUDGET,
) -> tuple[OrthogonalParams, int]:
    """Propose until the restrictions hold; returns (draw, proposals used).

    Raises BudgetExceededError when ``budget`` proposals all fail, which is
    the practical signal that the restricted set is empty or negligible.
    """
    if posterior.flat:
        raise ValueError(
            "cannot sample from a flat prior; update it with data first"
        )
    restrictions.check_model(model.n)
    h_req = restrictions.required_horizon()
    proposals = 0
    while proposals < budget:
        proposals += 1
        b, sigma, sigma_tr, q = _draw_arrays(posterior, rng)
        if restrictions.is_empty or evaluate(
            restrictions, irf_values(b, sigma_tr, q, model.p, h_req)
        ):
            return OrthogonalParams(B=b, Sigma=sigma, Q=q), proposals
    raise BudgetExceededError(
        f"no acceptance in {budget} proposals; the restricted set may be "
        "empty or carry negligible posterior mass",
        proposals=proposals,
        accepted=0,
    )


def ar_run(
    posterior: NiwParams,
    restrictions: RestrictionSet,
    model: ModelSpec,
    n_draws: int,
    rng: np.random.Generator,
    budget_per_draw: int = DEFAULT_BUDGET,
) -> tuple[PosteriorDraws, ArStats]:
    """Collect ``n_draws`` accepted draws with per-draw proposal budgets.

    The returned PosteriorDraws mirrors the Gibbs layout; its
    ``iterations`` field counts total proposals and ``trial_counts``
    carries the same number under "proposals".
    """
    if n_draws < 1:
        raise ValueError(f"n_draws must be >= 1, got {n_draws}")
    if posterior.flat:
        raise ValueError(
            "cannot sample from a flat prior; update it with data first"
        )
    restrictions.check_model(model.n)
    h_req = restrictions.required_horizon()
    m, n = posterior.m, posterior.n

    b_out = np.empty((n_draws, m, n))
    sigma_out = np.empty((n_draws, n, n))
    q_out = np.empty((n_draws, n, n))
    total = 0
    start = time.perf_counter()
    for k in range(n_draws):
        used = 0
        while True:
            if used >= budget_per_draw:
                raise BudgetExceededError(
                    f"draw {k + 1} of {n_draws}: no acceptance in "
                    f"{budget_per_draw} proposals; the restricted set may be "
                    "empty or carry negligible posterior mass",
                    proposals=total,
                    accepted=k,
                )
            used += 1
            total += 1
            b, sigma, sigma_tr, q = _draw_arrays(posterior, rng)
            if restrictions.is_empty or evaluate(
                restrictions, irf_values(b, sigma_tr, q, model.p, h_req)
            ):
                b_out[k] = b
                sigma_out[k] = sigma
                q_out[k] = q
                break
    wall = time.perf_counter() - start
    draws = PosteriorDraws(
        b=b_out,
        sigma=sigma_out,
        q=q_out,
        trial_counts={"proposals": total},
        iterations=total,
        wall_seconds=wall,
        algorithm="accept-reject",
    )
    return draws, ArStats(proposals=total, accepted=n_draws, wall_seconds=wall)
