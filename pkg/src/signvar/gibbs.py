"""Slice-within-Gibbs sampler for restricted structural VARs.

The posterior over (B, Sigma, Q) is the conjugate normal-inverse-Wishart
posterior times the Haar measure on Q, restricted to parameters whose
impulse responses satisfy a RestrictionSet. Each sweep updates, in order:

1. the orthogonal factor Q through its ragged Gaussian latent,
2. the covariance Sigma through its matrix Gaussian latent,
3. the coefficients B directly in coefficient space.

Each block is an elliptical slice update whose Gaussian prior is the
unrestricted conditional posterior and whose likelihood is the restriction
indicator (plus, for the Sigma block, the part of the coefficient density
that moves with Sigma). When a block's likelihood is constant the update
collapses to an exact conditional draw, which is taken directly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .conjugate import (
    NiwParams,
    OrthogonalLatent,
    WishartLatent,
    draw_coefficients,
    draw_orthogonal_latent,
    draw_wishart_latent,
    latent_to_covariance,
    latent_to_orthogonal,
    phi_inverse_factor,
)
from .errors import ConfigError, DegenerateLatentError, InfeasibleError
from .ess import EssTarget, ess_step
from .model import ModelSpec, OrthogonalParams, chol_lower, irf_values
from .restrictions import RestrictionSet, evaluate
from .rng import derive_rng

NEG_INF = float("-inf")


@dataclass(frozen=True)
class SamplerConfig:
    """Run-length and safety knobs shared by the samplers.

    ``burn_in=None`` resolves to 10% of iterations. ``seed`` is optional
    when the caller passes a Generator directly. ``validate`` turns on
    per-iteration invariant checks (latent/cache consistency, restriction
    satisfaction); it is a debugging aid, far too slow for production runs.
    """

    iterations: int
    thin: int = 100
    burn_in: int | None = None
    seed: int | None = None
    max_shrink_iterations: int = 200
    max_init_attempts: int = 10_000
    validate: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.thin < 1:
            raise ConfigError(f"thin must be >= 1, got {self.thin}")
        if self.burn_in is not None and not (
            0 <= self.burn_in < self.iterations
        ):
            raise ConfigError(
                f"burn_in must be in [0, iterations), got {self.burn_in}"
            )
        if self.max_shrink_iterations < 1:
            raise ConfigError("max_shrink_iterations must be >= 1")
        if self.max_init_attempts < 1:
            raise ConfigError("max_init_attempts must be >= 1")

    @property
    def resolved_burn_in(self) -> int:
        if self.burn_in is not None:
            return self.burn_in
        return self.iterations // 10

    @property
    def stored_draws(self) -> int:
        """Number of states the run will retain."""
        return (self.iterations - self.resolved_burn_in) // self.thin


@dataclass(frozen=True)
class ChainState:
    """Current chain position: coefficients, latents, and caches.

    ``sigma``, ``sigma_tr`` and ``q`` are deterministic images of the
    latents, cached because every block update needs them.
    """

    b: np.ndarray
    x_latent: OrthogonalLatent
    r_latent: WishartLatent
    sigma: np.ndarray
    sigma_tr: np.ndarray
    q: np.ndarray


@dataclass(frozen=True)
class PosteriorDraws:
    """Packed posterior sample with bookkeeping.

    ``b`` is (N, m, n); ``sigma`` and ``q`` are (N, n, n). ``trial_counts``
    totals slice candidates per block ("q", "sigma", "b") for the Gibbs
    sampler, or proposals for accept-reject.
    """

    b: np.ndarray
    sigma: np.ndarray
    q: np.ndarray
    trial_counts: dict[str, int]
    iterations: int
    wall_seconds: float
    algorithm: str = "gibbs"

    def __post_init__(self):
        if not (len(self.b) == len(self.sigma) == len(self.q)):
            raise ValueError("draw arrays must have equal first dimensions")

    def __len__(self) -> int:
        return self.b.shape[0]

    def param(self, i: int) -> OrthogonalParams:
        """The i-th stored draw as a validated parameter object."""
        return OrthogonalParams(B=self.b[i], Sigma=self.sigma[i], Q=self.q[i])


class GibbsSampler:
    """Slice-within-Gibbs kernel for one posterior and restriction set."""

    def __init__(
        self,
        posterior: NiwParams,
        restrictions: RestrictionSet,
        model: ModelSpec,
        config: SamplerConfig,
    ):
        if posterior.flat:
            raise ValueError(
                "cannot sample from a flat prior; update it with data first"
            )
        if posterior.n != model.n or posterior.m != model.m:
            raise ValueError(
                f"posterior is ({posterior.m} x {posterior.n}) but model "
                f"needs ({model.m} x {model.n})"
            )
        restrictions.check_model(model.n)
        self.posterior = posterior
        self.restrictions = restrictions
        self.model = model
        self.config = config

        self._n = model.n
        self._m = model.m
        self._p = model.p
        self._nu = posterior.nu
        self._h_req = restrictions.required_horizon()
        self._x_dim = OrthogonalLatent.dim(self._n)
        self._r_dim = self._n * self._nu
        self._x_mean = np.zeros(self._x_dim)
        self._r_mean = np.zeros(self._r_dim)
        self._b_mean = posterior.psi.ravel()
        self._phi_scale = phi_inverse_factor(posterior.phi)
        if self._m:
            self._omega_factor = scipy.linalg.cho_factor(posterior.omega, lower=True)
        else:
            self._omega_factor = None

    # -- restriction indicator on raw arrays ------------------------------

    def _indicator(self, b: np.ndarray, sigma_tr: np.ndarray, q: np.ndarray) -> bool:
        if self.restrictions.is_empty:
            return True
        vals = irf_values(b, sigma_tr, q, self._p, self._h_req)
        return evaluate(self.restrictions, vals)

    # -- block updates -----------------------------------------------------

    def step_q(
        self, state: ChainState, rng: np.random.Generator
    ) -> tuple[ChainState, int]:
        """Update the orthogonal factor through its ragged latent."""
        if self.restrictions.is_empty:
            # Constant likelihood: the conditional is exactly Haar.
            x_latent = draw_orthogonal_latent(self._n, rng)
            q = latent_to_orthogonal(x_latent)
            return replace(state, x_latent=x_latent, q=q), 1

        def loglik(x_flat: np.ndarray) -> float:
            try:
                q = latent_to_orthogonal(
                    OrthogonalLatent.from_flat(x_flat, self._n)
                )
            except DegenerateLatentError:
                return NEG_INF
            return 0.0 if self._indicator(state.b, state.sigma_tr, q) else NEG_INF

        target = EssTarget(
            dim=self._x_dim,
            prior_mean=self._x_mean,
            prior_draw=lambda g: g.standard_normal(self._x_dim),
            log_likelihood=loglik,
        )
        x_flat, trials = ess_step(
            target,
            state.x_latent.flatten(),
            rng,
            max_shrink=self.config.max_shrink_iterations,
            step_name="q",
        )
        x_latent = OrthogonalLatent.from_flat(x_flat, self._n)
        q = latent_to_orthogonal(x_latent)
        return replace(state, x_latent=x_latent, q=q), trials

    def step_sigma(
        self, state: ChainState, rng: np.random.Generator
    ) -> tuple[ChainState, int]:
        """Update the covariance through its matrix latent.

        The slice likelihood combines the restriction indicator with the
        Sigma-dependent part of the coefficient density; with no lag rows
        and no restrictions it is constant and the update is a direct
        inverse-Wishart draw.
        """
        n, nu, m = self._n, self._nu, self._m
        if self.restrictions.is_empty and m == 0:
            r_latent = draw_wishart_latent(self.posterior, rng)
            sigma = latent_to_covariance(r_latent)
            sigma_tr = chol_lower(sigma, name="sigma")
            return replace(
                state, r_latent=r_latent, sigma=sigma, sigma_tr=sigma_tr
            ), 1

        if m:
            diff = state.b - self.posterior.psi
            # Sigma-free inner quadratic; reused by every slice candidate.
            cross = diff.T @ scipy.linalg.cho_solve(self._omega_factor, diff)
        else:
            cross = None

        def loglik(r_flat: np.ndarray) -> float:
            r = r_flat.reshape(n, nu)
            gram = r @ r.T
            try:
                gram_chol = np.linalg.cholesky(gram)
            except np.linalg.LinAlgError:
                return NEG_INF
            if not self.restrictions.is_empty:
                sigma = scipy.linalg.cho_solve((gram_chol, True), np.eye(n))
                sigma = (sigma + sigma.T) / 2.0
                try:
                    sigma_tr = np.linalg.cholesky(sigma)
                except np.linalg.LinAlgError:
                    return NEG_INF
                if not self._indicator(state.b, sigma_tr, state.q):
                    return NEG_INF
            if m == 0:
                return 0.0
            # logdet(Sigma) = -logdet(R R'); trace uses Sigma^{-1} = R R'.
            logdet_sigma = -2.0 * float(np.sum(np.log(np.diag(gram_chol))))
            quad = float(np.sum(gram * cross))
            return -0.5 * m * logdet_sigma - 0.5 * quad

        target = EssTarget(
            dim=self._r_dim,
            prior_mean=self._r_mean,
            prior_draw=lambda g: (
                self._phi_scale @ g.standard_normal((n, nu))
            ).ravel(),
            log_likelihood=loglik,
        )
        r_flat, trials = ess_step(
            target,
            state.r_latent.r.ravel(),
            rng,
            max_shrink=self.config.max_shrink_iterations,
            step_name="sigma",
        )
        r_latent = WishartLatent(r=r_flat.reshape(n, nu))
        sigma = latent_to_covariance(r_latent)
        sigma_tr = chol_lower(sigma, name="sigma")
        return replace(
            state, r_latent=r_latent, sigma=sigma, sigma_tr=sigma_tr
        ), trials

    def step_b(
        self, state: ChainState, rng: np.random.Generator
    ) -> tuple[ChainState, int]:
        """Update the coefficients given (Sigma, Q).

        Impact responses do not involve B, so when no restriction looks
        past horizon zero the conditional is the unrestricted matrix
        normal and is drawn directly.
        """
        m, n = self._m, self._n
        direct = self.restrictions.is_empty or self._h_req == 0
        if direct:
            noise = rng.standard_normal((m, n))
            b = draw_coefficients(
                self.posterior.psi, state.sigma, self.posterior.omega, noise
            )
            return replace(state, b=b), 1

        def loglik(b_flat: np.ndarray) -> float:
            b = b_flat.reshape(m, n)
            return 0.0 if self._indicator(b, state.sigma_tr, state.q) else NEG_INF

        def prior_draw(g: np.random.Generator) -> np.ndarray:
            noise = g.standard_normal((m, n))
            return draw_coefficients(
                self.posterior.psi, state.sigma, self.posterior.omega, noise
            ).ravel()

        target = EssTarget(
            dim=m * n,
            prior_mean=self._b_mean,
            prior_draw=prior_draw,
            log_likelihood=loglik,
        )
        b_flat, trials = ess_step(
            target,
            state.b.ravel(),
            rng,
            max_shrink=self.config.max_shrink_iterations,
            step_name="b",
        )
        return replace(state, b=b_flat.reshape(m, n)), trials

    # -- initialization and the main loop ----------------------------------

    def initialize(self, rng: np.random.Generator) -> ChainState:
        """Find a starting state by unrestricted posterior sampling.

        Draws (B, Sigma, Q) from the unrestricted posterior until the
        restrictions hold; the expected number of attempts is the inverse
        unrestricted posterior mass of the restricted set.
        """
        attempts = self.config.max_init_attempts
        for _ in range(attempts):
            x_latent = draw_orthogonal_latent(self._n, rng)
            r_latent = draw_wishart_latent(self.posterior, rng)
            noise = rng.standard_normal((self._m, self._n))
            try:
                q = latent_to_orthogonal(x_latent)
                sigma = latent_to_covariance(r_latent)
                sigma_tr = chol_lower(sigma, name="sigma")
            except DegenerateLatentError:
                continue
            b = draw_coefficients(
                self.posterior.psi, sigma, self.posterior.omega, noise
            )
            if self._indicator(b, sigma_tr, q):
                return ChainState(
                    b=b,
                    x_latent=x_latent,
                    r_latent=r_latent,
                    sigma=sigma,
                    sigma_tr=sigma_tr,
                    q=q,
                )
        raise InfeasibleError(
            f"no unrestricted posterior draw satisfied the restrictions in "
            f"{attempts} attempts; the restricted set may be empty or carry "
            "negligible posterior mass (or raise max_init_attempts / supply "
            "an initial state)"
        )

    def _validate_state(self, state: ChainState, iteration: int) -> None:
        q = latent_to_orthogonal(state.x_latent)
        sigma = latent_to_covariance(state.r_latent)
        if not np.allclose(q, state.q, atol=1e-10):
            raise AssertionError(f"iteration {iteration}: Q cache inconsistent")
        if not np.allclose(sigma, state.sigma, atol=1e-10):
            raise AssertionError(f"iteration {iteration}: Sigma cache inconsistent")
        if np.abs(state.q.T @ state.q - np.eye(self._n)).max() > 1e-8:
            raise AssertionError(f"iteration {iteration}: Q not orthogonal")
        if not self._indicator(state.b, state.sigma_tr, state.q):
            raise AssertionError(f"iteration {iteration}: restrictions violated")

    def run(
        self,
        rng: np.random.Generator | None = None,
        initial_state: ChainState | None = None,
    ) -> PosteriorDraws:
        """Run the chain and return thinned post-burn-in draws."""
        config = self.config
        if rng is None:
            if config.seed is None:
                raise ConfigError("either a Generator or config.seed is required")
            rng = derive_rng(config.seed)
        burn = config.resolved_burn_in
        stored = config.stored_draws
        if stored < 1:
            raise ConfigError(
                f"iterations={config.iterations} with burn_in={burn} and "
                f"thin={config.thin} stores no draws"
            )

        start = time.perf_counter()
        state = initial_state if initial_state is not None else self.initialize(rng)
        b_out = np.empty((stored, self._m, self._n))
        sigma_out = np.empty((stored, self._n, self._n))
        q_out = np.empty((stored, self._n, self._n))
        counts = {"q": 0, "sigma": 0, "b": 0}
        kept = 0
        for it in range(1, config.iterations + 1):
            state, t_q = self.step_q(state, rng)
            state, t_sigma = self.step_sigma(state, rng)
            state, t_b = self.step_b(state, rng)
            counts["q"] += t_q
            counts["sigma"] += t_sigma
            counts["b"] += t_b
            if config.validate:
                self._validate_state(state, it)
            if it > burn and (it - burn) % config.thin == 0 and kept < stored:
                b_out[kept] = state.b
                sigma_out[kept] = state.sigma
                q_out[kept] = state.q
                kept += 1
        wall = time.perf_counter() - start
        return PosteriorDraws(
            b=b_out,
            sigma=sigma_out,
            q=q_out,
            trial_counts=counts,
            iterations=config.iterations,
            wall_seconds=wall,
            algorithm="gibbs",
        )


def run_chain(
    posterior: NiwParams,
    restrictions: RestrictionSet,
    model: ModelSpec,
    config: SamplerConfig,
    rng: np.random.Generator | None = None,
    initial_state: ChainState | None = None,
) -> PosteriorDraws:
    """Convenience wrapper: build a GibbsSampler and run it."""
    sampler = GibbsSampler(posterior, restrictions, model, config)
    return sampler.run(rng=rng, initial_state=initial_state)
