"""End-to-end run: config to posterior draws, summary, and diagnostics.

``execute_run`` loads the data, builds the prior and posterior, runs the
configured sampler, and writes four artifacts: the binary draws file, the
impulse-response quantile CSV, a diagnostics JSON, and a resolved-config
echo in each output directory. Draws, summary, and echo are byte-identical
across reruns of the same config; the diagnostics file carries wall-clock
timings and is excluded from that guarantee.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .accept_reject import ArStats, ar_run
from .config import RunConfig
from .conjugate import MinnesotaHyper, NiwParams, minnesota_prior, posterior
from .diagnostics import (
    DiagnosticsReport,
    compute_diagnostics,
    impact_functional,
    irf_tensor,
    quantile_table,
)
from .errors import ConfigError, DegenerateDrawsError
from .gibbs import PosteriorDraws, run_chain
from .model import ModelSpec, TimeSeriesData, build_regressors
from .rng import derive_rng
from .storage import (
    load_series_csv,
    write_draws,
    write_json,
    write_summary_csv,
)


@dataclass(frozen=True)
class RunResult:
    """Everything a run produced, with the paths it was written to."""

    draws: PosteriorDraws
    report: DiagnosticsReport | None
    draws_path: str
    summary_path: str
    diagnostics_path: str
    stats: ArStats | None


def build_prior(
    config: RunConfig, spec: ModelSpec, data: TimeSeriesData
) -> NiwParams:
    """Construct the prior named by the config for the given model."""
    options = config.prior_options
    try:
        if config.prior_kind == "minnesota":
            return minnesota_prior(spec, data, MinnesotaHyper(**options))
        if config.prior_kind == "flat":
            nu = options["nu"] if options["nu"] is not None else spec.n
            phi = options["phi_scale"] * np.eye(spec.n)
            return NiwParams(
                nu=nu, phi=phi, psi=np.zeros((spec.m, spec.n)), omega=None
            )
        return NiwParams(
            nu=options["nu"],
            phi=np.asarray(options["phi"], dtype=float),
            psi=np.asarray(options["psi"], dtype=float),
            omega=(
                None
                if options["omega"] is None
                else np.asarray(options["omega"], dtype=float)
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"config.prior: {exc}") from exc


def _diagnostics_batch_size(stored: int) -> int:
    # Default 100, shrunk for small runs so at least two batches exist.
    return min(100, max(2, stored // 10))


def execute_run(config: RunConfig) -> RunResult:
    """Run one configured estimation end to end; returns paths and draws."""
    raw, names, _ = load_series_csv(config.data_path)
    exogenous = None
    if config.exogenous_path is not None:
        exogenous, _, _ = load_series_csv(config.exogenous_path)
    spec = ModelSpec.from_data(raw, config.lags, config.deterministic)
    data = build_regressors(raw, spec, exogenous)
    try:
        config.restrictions.check_model(spec.n)
    except ValueError as exc:
        raise ConfigError(f"config.restrictions: {exc}") from exc
    prior = build_prior(config, spec, data)
    if prior.n != spec.n or prior.m != spec.m:
        raise ConfigError(
            f"config.prior: matrices sized for (m={prior.m}, n={prior.n}) "
            f"but the model needs (m={spec.m}, n={spec.n})"
        )
    post = posterior(prior, data)

    rng = derive_rng(config.seed, 0)
    stats: ArStats | None = None
    if config.algorithm == "gibbs":
        draws = run_chain(post, config.restrictions, spec, config.sampler, rng)
    else:
        draws, stats = ar_run(
            post,
            config.restrictions,
            spec,
            n_draws=config.sampler.stored_draws,
            rng=rng,
            budget_per_draw=config.proposal_budget,
        )

    shocks = config.restrictions.identified_shocks() or tuple(range(spec.n))
    meta = {
        "seed": config.seed,
        "model": {
            "n": spec.n,
            "p": spec.p,
            "T": spec.T,
            "deterministic": list(spec.deterministic),
        },
        "variable_names": list(names),
        "restrictions": config.echo["restrictions"],
        "normalize_shocks": config.restrictions.normalize_shocks,
        "identified_shocks": list(shocks),
        "signvar_version": __version__,
    }
    write_draws(config.draws_path, draws, meta)

    tensor = irf_tensor(
        draws,
        spec.p,
        config.irf_horizon,
        shocks=shocks,
        normalize=config.restrictions.normalize_shocks,
    )
    table = quantile_table(tensor, shocks, config.quantiles)
    write_summary_csv(config.summary_path, table, names)

    functional = impact_functional(draws, shocks)
    stored = len(draws)
    report: DiagnosticsReport | None = None
    note = None
    try:
        report = compute_diagnostics(
            functional,
            batch_size=_diagnostics_batch_size(stored),
            wall_seconds=draws.wall_seconds,
        )
    except (ValueError, DegenerateDrawsError) as exc:
        note = f"diagnostics unavailable: {exc}"

    diag = {
        "algorithm": draws.algorithm,
        "functional": {
            "kind": "impact_responses",
            "shocks": list(shocks),
            "dim": functional.shape[1],
        },
        "stored_draws": stored,
        "iterations": draws.iterations,
        "trial_counts": draws.trial_counts,
        "wall_seconds": draws.wall_seconds,
        "report": report.to_dict() if report is not None else None,
        "note": note,
        "signvar_version": __version__,
    }
    if stats is not None:
        diag["acceptance_rate"] = stats.acceptance_rate
        diag["proposals"] = stats.proposals
    write_json(config.diagnostics_path, diag)

    echo_dirs = {
        os.path.dirname(os.path.abspath(p))
        for p in (config.draws_path, config.summary_path, config.diagnostics_path)
    }
    for directory in sorted(echo_dirs):
        write_json(os.path.join(directory, "resolved_config.json"), config.echo)

    return RunResult(
        draws=draws,
        report=report,
        draws_path=config.draws_path,
        summary_path=config.summary_path,
        diagnostics_path=config.diagnostics_path,
        stats=stats,
    )
