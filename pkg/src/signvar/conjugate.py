"""Normal-inverse-Wishart prior and posterior, plus latent-variable draws.

The conjugate family over (B, Sigma) is parameterized by degrees of freedom
nu, an n x n scale Phi, an m x n coefficient mean Psi, and an m x m
coefficient scale Omega. ``omega=None`` marks a flat coefficient prior
(zero precision), in which case the posterior mean is the OLS estimate.

Both samplers draw from the posterior through deterministic maps of simple
latents:

* ``latent_to_orthogonal`` maps a ragged Gaussian latent (vectors of length
  n, n-1, ..., 1) to an orthogonal matrix whose columns, given the earlier
  ones, are uniform over the remaining unit sphere.
* ``latent_to_covariance`` maps an n x nu Gaussian matrix with columns
  N(0, Phi^{-1}) to Sigma = (R R')^{-1}, an inverse-Wishart draw.

Keeping the latents explicit lets the Gibbs sampler run slice-sampling
updates in these unconstrained spaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DataError, DegenerateLatentError, NumericalError
from .model import ModelSpec, TimeSeriesData, chol_lower


@dataclass(frozen=True)
class NiwParams:
    """Normal-inverse-Wishart parameters.

    ``nu`` must be an integer at least n: the covariance latent is an
    n x nu matrix, so fractional degrees of freedom have no latent
    representation. ``omega=None`` encodes the flat coefficient prior.
    """

    nu: int
    phi: np.ndarray
    psi: np.ndarray
    omega: np.ndarray | None

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        psi = np.asarray(self.psi, dtype=float)
        if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
            raise ValueError(f"phi must be square, got shape {phi.shape}")
        n = phi.shape[0]
        if n < 1:
            raise ValueError("phi must be at least 1 x 1")
        nu = self.nu
        if not float(nu).is_integer():
            raise ValueError(
                f"nu must be an integer (the covariance latent has nu columns), "
                f"got {nu}"
            )
        nu = int(nu)
        if nu < n:
            raise ValueError(f"nu must be at least n={n}, got {nu}")
        if np.abs(phi - phi.T).max() > 1e-10:
            raise ValueError("phi is not symmetric")
        chol_lower(phi, name="phi")
        if psi.ndim != 2 or psi.shape[1] != n:
            raise ValueError(
                f"psi must be m x n with n={n}, got shape {psi.shape}"
            )
        m = psi.shape[0]
        omega = self.omega
        if omega is not None:
            omega = np.asarray(omega, dtype=float)
            if omega.shape != (m, m):
                raise ValueError(
                    f"omega must be {m} x {m} to match psi, got shape {omega.shape}"
                )
            if m and np.abs(omega - omega.T).max() > 1e-10:
                raise ValueError("omega is not symmetric")
            if m:
                chol_lower(omega, name="omega")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "omega", omega)

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    @property
    def m(self) -> int:
        return self.psi.shape[0]

    @property
    def flat(self) -> bool:
        """True when the coefficient prior has zero precision."""
        return self.omega is None


def _spd_inverse(mat: np.ndarray, name: str) -> np.ndarray:
    try:
        factor = scipy.linalg.cho_factor(mat, lower=True)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"{name} is not positive definite: {exc}") from exc
    inv = scipy.linalg.cho_solve(factor, np.eye(mat.shape[0]))
    return (inv + inv.T) / 2.0


def posterior(prior: NiwParams, data: TimeSeriesData) -> NiwParams:
    """Conjugate posterior after observing ``data``.

    With zero rows of data the prior object itself is returned, so the
    no-data posterior equals the prior exactly (not merely to rounding).
    A flat prior requires X'X to have full rank.
    """
    if data.n != prior.n:
        raise DataError(f"data has n={data.n} but prior has n={prior.n}")
    if data.m != prior.m:
        raise DataError(f"data has m={data.m} regressors but prior has m={prior.m}")
    T = data.T
    if T == 0:
        return prior

    X, Y = data.X, data.Y
    m, n = prior.m, prior.n
    xtx = X.T @ X
    xty = X.T @ Y
    yty = Y.T @ Y

    if m == 0:
        phi_post = yty + prior.phi
        phi_post = (phi_post + phi_post.T) / 2.0
        return NiwParams(
            nu=prior.nu + T,
            phi=phi_post,
            psi=np.zeros((0, n)),
            omega=np.zeros((0, 0)),
        )

    if prior.flat:
        try:
            factor = scipy.linalg.cho_factor(xtx, lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise NumericalError(
                "flat coefficient prior requires X'X to be positive definite; "
                "add observations or use a proper prior"
            ) from exc
        omega_post = scipy.linalg.cho_solve(factor, np.eye(m))
        omega_post = (omega_post + omega_post.T) / 2.0
        psi_post = scipy.linalg.cho_solve(factor, xty)
        phi_post = yty + prior.phi - psi_post.T @ xtx @ psi_post
    else:
        omega_inv = _spd_inverse(prior.omega, "omega")
        precision = xtx + omega_inv
        try:
            factor = scipy.linalg.cho_factor(precision, lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise NumericalError(
                "posterior coefficient precision is not positive definite"
            ) from exc
        omega_post = scipy.linalg.cho_solve(factor, np.eye(m))
        omega_post = (omega_post + omega_post.T) / 2.0
        psi_post = scipy.linalg.cho_solve(factor, xty + omega_inv @ prior.psi)
        phi_post = (
            yty
            + prior.phi
            + prior.psi.T @ omega_inv @ prior.psi
            - psi_post.T @ precision @ psi_post
        )
    phi_post = (phi_post + phi_post.T) / 2.0
    return NiwParams(nu=prior.nu + T, phi=phi_post, psi=psi_post, omega=omega_post)


@dataclass(frozen=True)
class OrthogonalLatent:
    """Ragged Gaussian latent behind an orthogonal matrix.

    ``parts[j]`` has length n - j; there are n parts and n(n+1)/2 scalars
    in total.
    """

    parts: tuple[np.ndarray, ...]

    def __post_init__(self):
        n = len(self.parts)
        parts = []
        for j, part in enumerate(self.parts):
            part = np.asarray(part, dtype=float)
            if part.shape != (n - j,):
                raise ValueError(
                    f"part {j} must have length {n - j}, got shape {part.shape}"
                )
            parts.append(part)
        object.__setattr__(self, "parts", tuple(parts))

    @property
    def n(self) -> int:
        return len(self.parts)

    @staticmethod
    def dim(n: int) -> int:
        """Total scalar count n(n+1)/2."""
        return n * (n + 1) // 2

    def flatten(self) -> np.ndarray:
        return np.concatenate(self.parts)

    @classmethod
    def from_flat(cls, vec: np.ndarray, n: int) -> "OrthogonalLatent":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (cls.dim(n),):
            raise ValueError(
                f"flat latent for n={n} must have length {cls.dim(n)}, "
                f"got shape {vec.shape}"
            )
        parts = []
        offset = 0
        for j in range(n):
            parts.append(vec[offset : offset + n - j])
            offset += n - j
        return cls(parts=tuple(parts))


def draw_orthogonal_latent(n: int, rng: np.random.Generator) -> OrthogonalLatent:
    """Independent standard-normal latent parts for an n x n orthogonal draw."""
    return OrthogonalLatent(
        parts=tuple(rng.standard_normal(n - j) for j in range(n))
    )


def _complement_basis(cols: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complement of span(cols), deterministically.

    Completion columns are sign-fixed so the largest-magnitude entry of each
    is positive, making the basis a pure function of ``cols``.
    """
    n, j = cols.shape
    qfull, _ = np.linalg.qr(cols, mode="complete")
    comp = qfull[:, j:].copy()
    for c in range(comp.shape[1]):
        idx = int(np.argmax(np.abs(comp[:, c])))
        if comp[idx, c] < 0:
            comp[:, c] = -comp[:, c]
    return comp


def latent_to_orthogonal(latent: OrthogonalLatent) -> np.ndarray:
    """Map a ragged Gaussian latent to an orthogonal matrix.

    Column j is a point on the unit sphere within the orthogonal complement
    of the earlier columns: the normalized latent part expressed in a
    deterministic complement basis. With standard-normal latents the result
    is uniform over the orthogonal group, and the map is measurable and
    bit-reproducible in the latents.
    """
    n = latent.n
    q = np.empty((n, n))
    for j, part in enumerate(latent.parts):
        norm = float(np.linalg.norm(part))
        if not np.isfinite(norm) or norm == 0.0:
            raise DegenerateLatentError(
                f"latent part {j} has zero or non-finite norm"
            )
        unit = part / norm
        if j == 0:
            q[:, 0] = unit
        else:
            q[:, j] = _complement_basis(q[:, :j]) @ unit
    return q


@dataclass(frozen=True)
class WishartLatent:
    """Gaussian matrix latent behind an inverse-Wishart covariance draw."""

    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.ndim != 2:
            raise ValueError(f"latent must be an n x nu matrix, got shape {r.shape}")
        if r.shape[1] < r.shape[0]:
            raise ValueError(
                f"latent needs at least n={r.shape[0]} columns, got {r.shape[1]}"
            )
        object.__setattr__(self, "r", r)

    @property
    def n(self) -> int:
        return self.r.shape[0]

    @property
    def nu(self) -> int:
        return self.r.shape[1]


def phi_inverse_factor(phi: np.ndarray) -> np.ndarray:
    """Upper-triangular C with C C' = phi^{-1}, from one Cholesky of phi."""
    n = phi.shape[0]
    lower = chol_lower(phi, name="phi")
    return scipy.linalg.solve_triangular(lower, np.eye(n), lower=True).T


def draw_wishart_latent(params: NiwParams, rng: np.random.Generator) -> WishartLatent:
    """n x nu latent with columns iid N(0, phi^{-1})."""
    scale = phi_inverse_factor(params.phi)
    return WishartLatent(r=scale @ rng.standard_normal((params.n, params.nu)))


def latent_to_covariance(latent: WishartLatent) -> np.ndarray:
    """Map the matrix latent to Sigma = (R R')^{-1}, an inverse-Wishart draw."""
    gram = latent.r @ latent.r.T
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise DegenerateLatentError(
            "covariance latent is rank-deficient (R R' not positive definite)"
        ) from exc
    sigma = scipy.linalg.cho_solve(factor, np.eye(latent.n))
    return (sigma + sigma.T) / 2.0


def draw_coefficients(
    mean: np.ndarray,
    sigma: np.ndarray,
    omega: np.ndarray,
    noise: np.ndarray,
) -> np.ndarray:
    """Matrix-normal coefficient draw ``mean + C_omega noise C_sigma'``.

    ``noise`` is an m x n standard-normal matrix supplied by the caller, so
    the map is deterministic given the latent; vec(B) has covariance
    kron(sigma, omega) under iid noise.
    """
    mean = np.asarray(mean, dtype=float)
    m, n = mean.shape
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (m, n):
        raise ValueError(f"noise must be {m} x {n}, got shape {noise.shape}")
    if m == 0:
        return mean.copy()
    c_omega = chol_lower(omega, name="omega")
    c_sigma = chol_lower(sigma, name="sigma")
    return mean + c_omega @ noise @ c_sigma.T


def coef_log_density(
    b: np.ndarray,
    mean: np.ndarray,
    sigma: np.ndarray,
    omega: np.ndarray,
) -> float:
    """Matrix-normal log density of B given Sigma, up to a Sigma-free constant.

    Returns ``-(m/2) logdet(sigma) - tr(sigma^{-1} (B-mean)' omega^{-1}
    (B-mean)) / 2``. The Sigma-dependent normalization is kept: this is the
    piece of the joint density that moves when Sigma moves, which the
    covariance Gibbs step relies on. The Omega-only normalization constant
    is dropped.
    """
    mean = np.asarray(mean, dtype=float)
    m = mean.shape[0]
    if m == 0:
        return 0.0
    b = np.asarray(b, dtype=float)
    diff = b - mean
    try:
        omega_factor = scipy.linalg.cho_factor(omega, lower=True)
        sigma_factor = scipy.linalg.cho_factor(sigma, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"scale matrix not positive definite: {exc}") from exc
    cross = diff.T @ scipy.linalg.cho_solve(omega_factor, diff)
    quad = float(np.trace(scipy.linalg.cho_solve(sigma_factor, cross)))
    logdet_sigma = 2.0 * float(np.sum(np.log(np.diag(sigma_factor[0]))))
    return -0.5 * m * logdet_sigma - 0.5 * quad


@dataclass(frozen=True)
class MinnesotaHyper:
    """Hyperparameters for the shrinkage prior.

    ``tightness`` scales all coefficient standard deviations; ``decay``
    is the harmonic lag-decay exponent; ``deterministic_scale`` multiplies
    tightness for deterministic-term columns (kept proportional so the
    tightness -> infinity limit is flat in every column).
    """

    tightness: float = 0.2
    decay: float = 2.0
    deterministic_scale: float = 100.0

    def __post_init__(self):
        if not self.tightness > 0:
            raise ValueError(f"tightness must be positive, got {self.tightness}")
        if self.decay < 0:
            raise ValueError(f"decay must be nonnegative, got {self.decay}")
        if not self.deterministic_scale > 0:
            raise ValueError(
                f"deterministic_scale must be positive, got {self.deterministic_scale}"
            )


def _residual_scales(spec: ModelSpec, data: TimeSeriesData) -> np.ndarray:
    """Per-variable residual variances from univariate fits.

    Each variable is regressed on its own lags plus the deterministic
    columns; the degrees-of-freedom-adjusted residual variance anchors the
    prior scale for that variable.
    """
    n, p, T = spec.n, spec.p, data.T
    det_cols = list(range(n * p, spec.m))
    s2 = np.empty(n)
    for i in range(n):
        own = [k * n + i for k in range(p)]
        cols = own + det_cols
        y = data.Y[:, i]
        if cols:
            xi = data.X[:, cols]
            dof = T - len(cols)
            if dof < 1:
                raise DataError(
                    f"too few observations (T={T}) to estimate residual scales "
                    f"with {len(cols)} univariate regressors"
                )
            beta, *_ = np.linalg.lstsq(xi, y, rcond=None)
            resid = y - xi @ beta
            s2[i] = float(resid @ resid) / dof
        else:
            s2[i] = float(y @ y) / max(T, 1)
        if not s2[i] > 0:
            raise DataError(
                f"variable {i} has zero residual variance; "
                "constant series cannot anchor the prior scale"
            )
    return s2


def minnesota_prior(
    spec: ModelSpec,
    data: TimeSeriesData,
    hyper: MinnesotaHyper | None = None,
) -> NiwParams:
    """Shrinkage prior centered on univariate random walks.

    Own first-lag coefficients have prior mean one, everything else zero.
    Prior coefficient variances shrink with lag distance and with the scale
    of the explained variable relative to the explaining one; the
    inverse-Wishart component has the smallest integer degrees of freedom
    with a finite mean, set to the univariate residual variances.
    """
    if hyper is None:
        hyper = MinnesotaHyper()
    if data.n != spec.n or data.m != spec.m:
        raise DataError(
            f"data shaped for (n={data.n}, m={data.m}) but spec has "
            f"(n={spec.n}, m={spec.m})"
        )
    n, p, m = spec.n, spec.p, spec.m
    s2 = _residual_scales(spec, data)

    nu = n + 2
    phi = np.diag((nu - n - 1) * s2)
    psi = np.zeros((m, n))
    if p >= 1:
        psi[:n, :n] = np.eye(n)

    lam = hyper.tightness
    omega_diag = np.empty(m)
    for k in range(1, p + 1):
        for j in range(n):
            omega_diag[(k - 1) * n + j] = lam**2 / (k ** (2 * hyper.decay) * s2[j])
    omega_diag[n * p :] = (hyper.deterministic_scale * lam) ** 2
    omega = np.diag(omega_diag)
    return NiwParams(nu=nu, phi=phi, psi=psi, omega=omega)
