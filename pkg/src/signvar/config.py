"""Run configuration: JSON schema, validation, and path resolution.

A run config is a single JSON object; every error names the offending
dotted key path. Relative paths resolve against the config file's
directory, so a config and its data travel together. The parsed object
keeps a fully resolved ``echo`` dict (defaults filled in) that the
pipeline writes next to the outputs for provenance.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .errors import ConfigError
from .gibbs import SamplerConfig
from .model import DETERMINISTIC_KINDS
from .restrictions import RestrictionSet, restriction_set_from_dicts

SCHEMA_VERSION = 1
ALGORITHMS = ("gibbs", "accept-reject")
PRIOR_KINDS = ("minnesota", "flat", "niw")
DEFAULT_QUANTILES = (0.16, 0.5, 0.84)


def _expect_object(obj, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    return obj


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")


def _req(obj: dict, key: str, where: str):
    if key not in obj:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return obj[key]


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _as_str(value, where: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a string, got {value!r}")
    return value


def _as_bool(value, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{where}: expected true or false, got {value!r}")
    return value


def _as_matrix(value, where: str) -> list[list[float]]:
    if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
        raise ConfigError(f"{where}: expected a list of rows")
    return [[_as_float(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)]
            for i, row in enumerate(value)]


@dataclass(frozen=True)
class RunConfig:
    """Validated, path-resolved run configuration."""

    seed: int
    data_path: str
    exogenous_path: str | None
    lags: int
    deterministic: tuple[str, ...]
    prior_kind: str
    prior_options: dict
    restrictions: RestrictionSet
    algorithm: str
    sampler: SamplerConfig
    proposal_budget: int
    draws_path: str
    summary_path: str
    diagnostics_path: str
    irf_horizon: int
    quantiles: tuple[float, ...]
    echo: dict


def _parse_prior(obj, where: str) -> tuple[str, dict]:
    obj = _expect_object(obj, where)
    kind = _as_str(_req(obj, "kind", where), f"{where}.kind")
    if kind not in PRIOR_KINDS:
        raise ConfigError(
            f"{where}.kind: must be one of {list(PRIOR_KINDS)}, got {kind!r}"
        )
    options: dict = {}
    if kind == "minnesota":
        _check_keys(
            obj, {"kind", "tightness", "decay", "deterministic_scale"}, where
        )
        for key, default in (
            ("tightness", 0.2),
            ("decay", 2.0),
            ("deterministic_scale", 100.0),
        ):
            options[key] = (
                _as_float(obj[key], f"{where}.{key}") if key in obj else default
            )
    elif kind == "flat":
        _check_keys(obj, {"kind", "nu", "phi_scale"}, where)
        options["nu"] = (
            _as_int(obj["nu"], f"{where}.nu") if "nu" in obj else None
        )
        options["phi_scale"] = (
            _as_float(obj["phi_scale"], f"{where}.phi_scale")
            if "phi_scale" in obj
            else 1.0
        )
        if not options["phi_scale"] > 0:
            raise ConfigError(f"{where}.phi_scale: must be positive")
    else:
        _check_keys(obj, {"kind", "nu", "phi", "psi", "omega"}, where)
        options["nu"] = _as_int(_req(obj, "nu", where), f"{where}.nu")
        options["phi"] = _as_matrix(_req(obj, "phi", where), f"{where}.phi")
        options["psi"] = _as_matrix(_req(obj, "psi", where), f"{where}.psi")
        omega = _req(obj, "omega", where)
        options["omega"] = (
            None if omega is None else _as_matrix(omega, f"{where}.omega")
        )
    return kind, options


def load_run_config(path: str) -> RunConfig:
    """Parse and validate a JSON run config; see the module docstring."""
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    root = _expect_object(raw, "config")
    _check_keys(
        root,
        {
            "schema_version",
            "seed",
            "data",
            "model",
            "prior",
            "restrictions",
            "normalize_shocks",
            "algorithm",
            "sampler",
            "output",
        },
        "config",
    )

    version = root.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"config.schema_version: this build reads version "
            f"{SCHEMA_VERSION}, got {version!r}"
        )
    seed = _as_int(_req(root, "seed", "config"), "config.seed")
    if seed < 0:
        raise ConfigError(f"config.seed: must be nonnegative, got {seed}")

    data = _expect_object(_req(root, "data", "config"), "config.data")
    _check_keys(data, {"path", "exogenous_path"}, "config.data")
    config_dir = os.path.dirname(os.path.abspath(path))

    def resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(config_dir, p)

    data_path = resolve(_as_str(_req(data, "path", "config.data"), "config.data.path"))
    exogenous_path = None
    if data.get("exogenous_path") is not None:
        exogenous_path = resolve(
            _as_str(data["exogenous_path"], "config.data.exogenous_path")
        )

    model = _expect_object(_req(root, "model", "config"), "config.model")
    _check_keys(model, {"lags", "deterministic"}, "config.model")
    lags = _as_int(_req(model, "lags", "config.model"), "config.model.lags")
    if lags < 0:
        raise ConfigError(f"config.model.lags: must be nonnegative, got {lags}")
    det_raw = model.get("deterministic", ["constant"])
    if not isinstance(det_raw, list):
        raise ConfigError("config.model.deterministic: expected a list of strings")
    deterministic = tuple(
        _as_str(v, f"config.model.deterministic[{i}]") for i, v in enumerate(det_raw)
    )
    for i, kind in enumerate(deterministic):
        if kind not in DETERMINISTIC_KINDS:
            raise ConfigError(
                f"config.model.deterministic[{i}]: must be one of "
                f"{list(DETERMINISTIC_KINDS)}, got {kind!r}"
            )

    prior_kind, prior_options = _parse_prior(
        root.get("prior", {"kind": "minnesota"}), "config.prior"
    )

    normalize = _as_bool(
        root.get("normalize_shocks", False), "config.normalize_shocks"
    )
    restrictions = restriction_set_from_dicts(
        root.get("restrictions", []),
        normalize_shocks=normalize,
        where="config.restrictions",
    )

    algorithm = _as_str(root.get("algorithm", "gibbs"), "config.algorithm")
    if algorithm not in ALGORITHMS:
        raise ConfigError(
            f"config.algorithm: must be one of {list(ALGORITHMS)}, "
            f"got {algorithm!r}"
        )

    sampler_obj = _expect_object(_req(root, "sampler", "config"), "config.sampler")
    _check_keys(
        sampler_obj,
        {
            "iterations",
            "thin",
            "burn_in",
            "max_shrink_iterations",
            "max_init_attempts",
            "proposal_budget",
        },
        "config.sampler",
    )
    iterations = _as_int(
        _req(sampler_obj, "iterations", "config.sampler"),
        "config.sampler.iterations",
    )
    thin = (
        _as_int(sampler_obj["thin"], "config.sampler.thin")
        if "thin" in sampler_obj
        else 100
    )
    burn_in = None
    if sampler_obj.get("burn_in") is not None:
        burn_in = _as_int(sampler_obj["burn_in"], "config.sampler.burn_in")
    max_shrink = (
        _as_int(
            sampler_obj["max_shrink_iterations"],
            "config.sampler.max_shrink_iterations",
        )
        if "max_shrink_iterations" in sampler_obj
        else 200
    )
    max_init = (
        _as_int(
            sampler_obj["max_init_attempts"], "config.sampler.max_init_attempts"
        )
        if "max_init_attempts" in sampler_obj
        else 10_000
    )
    budget = (
        _as_int(sampler_obj["proposal_budget"], "config.sampler.proposal_budget")
        if "proposal_budget" in sampler_obj
        else 10_000_000
    )
    if budget < 1:
        raise ConfigError("config.sampler.proposal_budget: must be >= 1")
    try:
        sampler = SamplerConfig(
            iterations=iterations,
            thin=thin,
            burn_in=burn_in,
            seed=seed,
            max_shrink_iterations=max_shrink,
            max_init_attempts=max_init,
        )
    except ConfigError as exc:
        raise ConfigError(f"config.sampler: {exc}") from exc
    if sampler.stored_draws < 1:
        raise ConfigError(
            "config.sampler: iterations, burn_in and thin leave no stored draws"
        )

    output = _expect_object(root.get("output", {}), "config.output")
    _check_keys(
        output,
        {"draws_path", "summary_path", "diagnostics_path", "irf_horizon", "quantiles"},
        "config.output",
    )

    def out_path(key: str, default: str) -> str:
        if key in output:
            return resolve(_as_str(output[key], f"config.output.{key}"))
        return os.path.join(config_dir, default)

    draws_path = out_path("draws_path", "draws.bin")
    summary_path = out_path("summary_path", "summary.csv")
    diagnostics_path = out_path("diagnostics_path", "diagnostics.json")
    irf_horizon = (
        _as_int(output["irf_horizon"], "config.output.irf_horizon")
        if "irf_horizon" in output
        else 12
    )
    if irf_horizon < 0:
        raise ConfigError("config.output.irf_horizon: must be nonnegative")
    if "quantiles" in output:
        if not isinstance(output["quantiles"], list) or not output["quantiles"]:
            raise ConfigError("config.output.quantiles: expected a non-empty list")
        quantiles = tuple(
            _as_float(v, f"config.output.quantiles[{i}]")
            for i, v in enumerate(output["quantiles"])
        )
        if any(not 0.0 < q < 1.0 for q in quantiles) or list(quantiles) != sorted(
            set(quantiles)
        ):
            raise ConfigError(
                "config.output.quantiles: must be strictly increasing in (0, 1)"
            )
    else:
        quantiles = DEFAULT_QUANTILES

    echo = {
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "data": {
            "path": data.get("path"),
            "exogenous_path": data.get("exogenous_path"),
        },
        "model": {"lags": lags, "deterministic": list(deterministic)},
        "prior": {"kind": prior_kind, **prior_options},
        "restrictions": root.get("restrictions", []),
        "normalize_shocks": normalize,
        "algorithm": algorithm,
        "sampler": {
            "iterations": iterations,
            "thin": thin,
            "burn_in": burn_in,
            "max_shrink_iterations": max_shrink,
            "max_init_attempts": max_init,
            "proposal_budget": budget,
        },
        "output": {
            "draws_path": output.get("draws_path", "draws.bin"),
            "summary_path": output.get("summary_path", "summary.csv"),
            "diagnostics_path": output.get("diagnostics_path", "diagnostics.json"),
            "irf_horizon": irf_horizon,
            "quantiles": list(quantiles),
        },
    }

    return RunConfig(
        seed=seed,
        data_path=data_path,
        exogenous_path=exogenous_path,
        lags=lags,
        deterministic=deterministic,
        prior_kind=prior_kind,
        prior_options=prior_options,
        restrictions=restrictions,
        algorithm=algorithm,
        sampler=sampler,
        proposal_budget=budget,
        draws_path=draws_path,
        summary_path=summary_path,
        diagnostics_path=diagnostics_path,
        irf_horizon=irf_horizon,
        quantiles=quantiles,
        echo=echo,
    )
