from __future__ import annotations

import numpy as np
import pytest

import signvar as sv
from signvar.model import irf_values, lag_blocks

from _oracles import (
    companion_irf,
    naive_regressors,
    random_orthogonal,
    random_spd,
    stable_var_coefficients,
)

# Running bivariate example: unit variances, second innovation regressed on
# the first with coefficient -0.9.
EXAMPLE_SIGMA = np.array([[1.0, -0.9], [-0.9, 1.81]])
EXAMPLE_SIGMA_TR = np.array([[1.0, 0.0], [-0.9, 1.0]])


class TestModelSpec:
    def test_regressor_count(self):
        spec = sv.ModelSpec(n=3, p=2, T=50)
        assert spec.m == 3 * 2 + 1

    def test_no_deterministic_terms(self):
        spec = sv.ModelSpec(n=2, p=0, T=10, deterministic=())
        assert spec.m == 0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n": 0, "p": 1, "T": 10},
            {"n": 2, "p": -1, "T": 10},
            {"n": 2, "p": 1, "T": 0},
            {"n": 2, "p": 1, "T": 10, "deterministic": ("trend",)},
        ],
    )
    def test_invalid_spec(self, kwargs):
        with pytest.raises(ValueError):
            sv.ModelSpec(**kwargs)

    def test_from_data_sets_effective_sample(self, rng):
        raw = rng.standard_normal((30, 3))
        spec = sv.ModelSpec.from_data(raw, p=4)
        assert (spec.n, spec.p, spec.T) == (3, 4, 26)

    def test_from_data_needs_rows(self, rng):
        with pytest.raises(sv.DataError):
            sv.ModelSpec.from_data(rng.standard_normal((3, 2)), p=3)


class TestBuildRegressors:
    @pytest.mark.parametrize("n,p", [(1, 1), (2, 1), (2, 3), (4, 2)])
    def test_matches_naive_loops(self, rng, n, p):
        raw = rng.standard_normal((40, n))
        spec = sv.ModelSpec.from_data(raw, p)
        data = sv.build_regressors(raw, spec)
        y_ref, x_ref = naive_regressors(raw, p, constant=True)
        np.testing.assert_array_equal(data.Y, y_ref)
        np.testing.assert_array_equal(data.X, x_ref)

    def test_no_lags_constant_only(self, rng):
        raw = rng.standard_normal((12, 2))
        spec = sv.ModelSpec.from_data(raw, 0)
        data = sv.build_regressors(raw, spec)
        np.testing.assert_array_equal(data.Y, raw)
        np.testing.assert_array_equal(data.X, np.ones((12, 1)))

    def test_exogenous_column_aligned(self, rng):
        raw = rng.standard_normal((20, 2))
        exo = rng.standard_normal((20, 1))
        spec = sv.ModelSpec.from_data(
            raw, 2, deterministic=("constant", "exogenous")
        )
        data = sv.build_regressors(raw, spec, exogenous=exo)
        assert data.m == 2 * 2 + 2
        np.testing.assert_array_equal(data.X[:, -1], exo[2:, 0])
        np.testing.assert_array_equal(data.X[:, -2], np.ones(18))

    def test_exogenous_shape_mismatch(self, rng):
        raw = rng.standard_normal((20, 2))
        spec = sv.ModelSpec.from_data(
            raw, 1, deterministic=("constant", "exogenous")
        )
        with pytest.raises(sv.DataError):
            sv.build_regressors(raw, spec, exogenous=rng.standard_normal((19, 1)))
        with pytest.raises(sv.DataError):
            sv.build_regressors(raw, spec)

    def test_non_finite_rejected(self, rng):
        raw = rng.standard_normal((20, 2))
        raw[5, 1] = np.nan
        spec = sv.ModelSpec(n=2, p=1, T=19)
        with pytest.raises(sv.DataError):
            sv.build_regressors(raw, spec)

    def test_too_few_rows(self, rng):
        raw = rng.standard_normal((3, 2))
        spec = sv.ModelSpec(n=2, p=3, T=1)
        with pytest.raises(sv.DataError):
            sv.build_regressors(raw, spec)


class TestCholLower:
    def test_reconstructs_with_positive_diagonal(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 6))
            sigma = random_spd(n, rng)
            low = sv.chol_lower(sigma)
            np.testing.assert_allclose(low @ low.T, sigma, atol=1e-10)
            assert (np.diag(low) > 0).all()
            assert np.allclose(low, np.tril(low))

    def test_example_factor(self):
        # The running example pins the orientation of the factor.
        np.testing.assert_allclose(
            sv.chol_lower(EXAMPLE_SIGMA), EXAMPLE_SIGMA_TR, atol=1e-12
        )

    def test_rejects_indefinite(self):
        with pytest.raises(sv.NumericalError):
            sv.chol_lower(np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestParameterMaps:
    def test_round_trip_from_orthogonal(self, rng):
        for _ in range(25):
            n = int(rng.integers(1, 6))
            m = n * int(rng.integers(0, 3)) + 1
            params = sv.OrthogonalParams(
                B=rng.standard_normal((m, n)),
                Sigma=random_spd(n, rng),
                Q=random_orthogonal(n, rng),
            )
            back = sv.to_orthogonal(sv.to_structural(params))
            np.testing.assert_allclose(back.B, params.B, atol=1e-9)
            np.testing.assert_allclose(back.Sigma, params.Sigma, atol=1e-9)
            np.testing.assert_allclose(back.Q, params.Q, atol=1e-9)

    def test_round_trip_from_structural(self, rng):
        for _ in range(25):
            n = int(rng.integers(1, 5))
            m = n + 2
            a0 = rng.standard_normal((n, n)) + 3 * np.eye(n)
            structural = sv.StructuralParams(
                A0=a0, Aplus=rng.standard_normal((m, n))
            )
            back = sv.to_structural(sv.to_orthogonal(structural))
            np.testing.assert_allclose(back.A0, structural.A0, atol=1e-9)
            np.testing.assert_allclose(back.Aplus, structural.Aplus, atol=1e-9)

    def test_identity_case(self):
        params = sv.OrthogonalParams(
            B=np.zeros((1, 2)), Sigma=np.eye(2), Q=np.eye(2)
        )
        structural = sv.to_structural(params)
        np.testing.assert_allclose(structural.A0, np.eye(2), atol=1e-12)

    def test_structural_covariance_identity(self, rng):
        # Sigma must equal the inverse Gram matrix of A0.
        params = sv.OrthogonalParams(
            B=rng.standard_normal((3, 2)),
            Sigma=random_spd(2, rng),
            Q=random_orthogonal(2, rng),
        )
        structural = sv.to_structural(params)
        gram = structural.A0 @ structural.A0.T
        np.testing.assert_allclose(
            np.linalg.inv(gram), params.Sigma, atol=1e-10
        )

    def test_singular_a0_rejected(self):
        with pytest.raises(ValueError):
            sv.StructuralParams(
                A0=np.array([[1.0, 1.0], [1.0, 1.0]]), Aplus=np.zeros((2, 2))
            )

    def test_non_orthogonal_q_rejected(self, rng):
        with pytest.raises(ValueError):
            sv.OrthogonalParams(
                B=np.zeros((1, 2)),
                Sigma=np.eye(2),
                Q=np.array([[1.0, 0.1], [0.0, 1.0]]),
            )


class TestImpulseResponses:
    def test_impact_is_cholesky_rotation(self, rng):
        sigma = random_spd(3, rng)
        q = random_orthogonal(3, rng)
        params = sv.OrthogonalParams(B=np.zeros((1, 3)), Sigma=sigma, Q=q)
        spec = sv.ModelSpec(n=3, p=0, T=10)
        irfs = sv.impulse_responses(params, spec, 2)
        np.testing.assert_allclose(
            irfs.values[0] @ irfs.values[0].T, sigma, atol=1e-10
        )
        np.testing.assert_array_equal(irfs.values[1], np.zeros((3, 3)))
        np.testing.assert_array_equal(irfs.values[2], np.zeros((3, 3)))

    def test_matches_companion_powers(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 5))
            p = int(rng.integers(1, 4))
            blocks = stable_var_coefficients(n, p, rng)
            b = np.vstack([blocks.reshape(p * n, n), rng.standard_normal((1, n))])
            sigma = random_spd(n, rng)
            sigma_tr = sv.chol_lower(sigma)
            q = random_orthogonal(n, rng)
            ours = irf_values(b, sigma_tr, q, p, 12)
            ref = companion_irf(b, sigma_tr, q, p, 12)
            np.testing.assert_allclose(ours, ref, atol=1e-12)

    def test_explosive_model_allowed(self):
        # Stationarity is not required; responses may grow without error.
        b = np.array([[1.2, 0.0], [0.0, 1.1], [0.0, 0.0]])
        params = sv.OrthogonalParams(B=b, Sigma=np.eye(2), Q=np.eye(2))
        spec = sv.ModelSpec(n=2, p=1, T=10)
        irfs = sv.impulse_responses(params, spec, 30)
        assert irfs.values[30, 0, 0] > 100.0

    def test_orientation_variable_then_shock(self):
        # Response of variable i to shock j sits at [h, i, j]: with the
        # example factor and Q = I, shock 0 moves variable 1 by -0.9.
        params = sv.OrthogonalParams(
            B=np.zeros((0, 2)), Sigma=EXAMPLE_SIGMA, Q=np.eye(2)
        )
        spec = sv.ModelSpec(n=2, p=0, T=10, deterministic=())
        irfs = sv.impulse_responses(params, spec, 0)
        np.testing.assert_allclose(irfs.values[0], EXAMPLE_SIGMA_TR, atol=1e-12)
        assert irfs.values[0, 1, 0] == pytest.approx(-0.9)
        assert irfs.values[0, 0, 1] == 0.0

    def test_lag_blocks_layout(self, rng):
        b = np.arange(10, dtype=float).reshape(5, 2)
        blocks = lag_blocks(b, n=2, p=2)
        np.testing.assert_array_equal(blocks[0], b[0:2])
        np.testing.assert_array_equal(blocks[1], b[2:4])

    def test_dimension_mismatch_rejected(self, rng):
        params = sv.OrthogonalParams(
            B=np.zeros((2, 2)), Sigma=np.eye(2), Q=np.eye(2)
        )
        spec = sv.ModelSpec(n=2, p=1, T=10)
        with pytest.raises(ValueError):
            sv.impulse_responses(params, spec, 4)

    def test_negative_horizon_rejected(self):
        params = sv.OrthogonalParams(
            B=np.zeros((1, 2)), Sigma=np.eye(2), Q=np.eye(2)
        )
        spec = sv.ModelSpec(n=2, p=0, T=10)
        with pytest.raises(ValueError):
            sv.impulse_responses(params, spec, -1)

    def test_non_finite_values_rejected(self):
        with pytest.raises(ValueError):
            sv.ImpulseResponses(values=np.full((2, 2, 2), np.inf))
