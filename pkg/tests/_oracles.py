"""Independent reference implementations used as test oracles.

Everything here deliberately takes a different route from the library:
companion-matrix powers instead of the moving-average recursion, explicit
index loops instead of stride tricks, dense Kronecker algebra instead of
factored solves. Expected values in tests come from these, never from the
code under test.
"""

from __future__ import annotations

import numpy as np


def companion_irf(
    b: np.ndarray, sigma_tr: np.ndarray, q: np.ndarray, p: int, horizon: int
) -> np.ndarray:
    """Impulse responses via companion-matrix powers.

    Stacks the lag transposes into the (np x np) companion matrix F and
    reads response h as the top-left block of F^h applied to the impact.
    """
    n = q.shape[0]
    impact = sigma_tr @ q
    if p == 0:
        out = np.zeros((horizon + 1, n, n))
        out[0] = impact
        return out
    comp = np.zeros((n * p, n * p))
    for k in range(p):
        comp[:n, k * n : (k + 1) * n] = b[k * n : (k + 1) * n].T
    if p > 1:
        comp[n:, : n * (p - 1)] = np.eye(n * (p - 1))
    pad = np.zeros((n * p, n))
    pad[:n] = impact
    out = np.empty((horizon + 1, n, n))
    power = np.eye(n * p)
    for h in range(horizon + 1):
        out[h] = (power @ pad)[:n]
        power = comp @ power
    return out


def naive_regressors(
    raw: np.ndarray, p: int, constant: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Lagged regressor construction with explicit scalar loops."""
    raw = np.asarray(raw, dtype=float)
    t_raw, n = raw.shape
    T = t_raw - p
    y = np.empty((T, n))
    m = n * p + (1 if constant else 0)
    x = np.empty((T, m))
    for t in range(T):
        for j in range(n):
            y[t, j] = raw[p + t, j]
        col = 0
        for k in range(1, p + 1):
            for j in range(n):
                x[t, col] = raw[p + t - k, j]
                col += 1
        if constant:
            x[t, col] = 1.0
    return y, x


def dense_matrix_normal_logpdf(
    b: np.ndarray, mean: np.ndarray, sigma: np.ndarray, omega: np.ndarray
) -> float:
    """Full matrix-normal log density via the vec/Kronecker form.

    Includes every normalization constant; tests subtract the Sigma-free
    pieces when comparing against the library's trimmed version.
    """
    m, n = mean.shape
    cov = np.kron(sigma, omega)
    diff = (b - mean).ravel(order="F")
    sign, logdet = np.linalg.slogdet(cov)
    assert sign > 0
    quad = diff @ np.linalg.solve(cov, diff)
    return -0.5 * (m * n * np.log(2.0 * np.pi) + logdet + quad)


def stable_var_coefficients(
    n: int, p: int, rng: np.random.Generator, radius: float = 0.9
) -> np.ndarray:
    """Random lag blocks rescaled until the companion matrix is stable."""
    blocks = rng.standard_normal((p, n, n)) * 0.5
    for _ in range(200):
        comp = np.zeros((n * p, n * p))
        for k in range(p):
            comp[:n, k * n : (k + 1) * n] = blocks[k]
        if p > 1:
            comp[n:, : n * (p - 1)] = np.eye(n * (p - 1))
        top = np.abs(np.linalg.eigvals(comp)).max()
        if top < radius:
            return blocks
        blocks *= radius / (top + 1e-12)
    raise RuntimeError("failed to stabilize coefficients")


def simulate_var(
    blocks: np.ndarray,
    sigma: np.ndarray,
    t_raw: int,
    rng: np.random.Generator,
    intercept: np.ndarray | None = None,
) -> np.ndarray:
    """Simulate a VAR path; blocks is (p, n, n) with y_t += y_{t-k} B_k."""
    p, n, _ = blocks.shape
    chol = np.linalg.cholesky(sigma)
    if intercept is None:
        intercept = np.zeros(n)
    y = np.zeros((t_raw + p, n))
    for t in range(p, t_raw + p):
        level = intercept.copy()
        for k in range(1, p + 1):
            level += y[t - k] @ blocks[k - 1]
        y[t] = level + chol @ rng.standard_normal(n)
    return y[p:]


def random_spd(n: int, rng: np.random.Generator) -> np.ndarray:
    root = rng.standard_normal((n, n))
    return root @ root.T + n * np.eye(n)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar orthogonal matrix via QR with the R-diagonal sign fix."""
    z = rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * np.sign(np.diag(r))


def ar1_chain(
    n: int, rho: float, rng: np.random.Generator, dim: int = 1
) -> np.ndarray:
    """Stationary AR(1) chain with unit marginal variance per coordinate."""
    innov_sd = np.sqrt(1.0 - rho * rho)
    out = np.empty((n, dim))
    out[0] = rng.standard_normal(dim)
    for t in range(1, n):
        out[t] = rho * out[t - 1] + innov_sd * rng.standard_normal(dim)
    return out
