from __future__ import annotations

import numpy as np
import pytest

import signvar as sv

from _oracles import simulate_var, stable_var_coefficients


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260824)


def make_dataset(
    seed: int, n: int = 2, p: int = 1, t_raw: int = 101
) -> tuple[np.ndarray, sv.ModelSpec, sv.TimeSeriesData]:
    """Synthetic stable VAR dataset plus its spec and design matrices."""
    gen = np.random.default_rng(seed)
    blocks = stable_var_coefficients(n, max(p, 1), gen)
    sigma = np.eye(n) + 0.3 * np.ones((n, n))
    raw = simulate_var(blocks, sigma, t_raw, gen)
    spec = sv.ModelSpec.from_data(raw, p)
    data = sv.build_regressors(raw, spec)
    return raw, spec, data


def make_posterior(
    seed: int, n: int = 2, p: int = 1, t_raw: int = 101
) -> tuple[sv.ModelSpec, sv.NiwParams]:
    """Minnesota-prior posterior for a synthetic dataset."""
    _, spec, data = make_dataset(seed, n=n, p=p, t_raw=t_raw)
    prior = sv.minnesota_prior(spec, data)
    return spec, sv.posterior(prior, data)
