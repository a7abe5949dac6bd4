"""Restrictions on structural impulse responses.

Three kinds are supported, all evaluated with strict inequalities (boundary
cases count as unsatisfied; they carry no posterior mass):

* sign: a response has a given sign over an inclusive horizon range,
* ratio: the ratio of two responses to one shock lies in an open interval
  (the elasticity-bound form),
* ranking: one response exceeds another for the same shock and horizon.

A RestrictionSet evaluates to a plain bool on a set of impulse responses;
samplers use it as a 0/1 indicator on top of the unrestricted posterior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import ImpulseResponses, ModelSpec, OrthogonalParams, impulse_responses


@dataclass(frozen=True)
class SignRestriction:
    """Response of ``variable`` to ``shock`` has ``sign`` for all horizons
    in [horizon_min, horizon_max]."""

    variable: int
    shock: int
    sign: int
    horizon_min: int = 0
    horizon_max: int = 0

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if self.horizon_min < 0 or self.horizon_max < self.horizon_min:
            raise ValueError(
                f"need 0 <= horizon_min <= horizon_max, got "
                f"[{self.horizon_min}, {self.horizon_max}]"
            )
        if self.variable < 0 or self.shock < 0:
            raise ValueError("variable and shock indices must be nonnegative")


@dataclass(frozen=True)
class RatioBound:
    """Ratio of the ``numerator`` response to the ``denominator`` response
    (same shock and horizon) lies strictly inside (lower, upper)."""

    numerator: int
    denominator: int
    shock: int
    horizon: int = 0
    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(
                f"need lower < upper, got ({self.lower}, {self.upper})"
            )
        if math.isinf(self.lower) and math.isinf(self.upper):
            raise ValueError("at least one bound must be finite")
        if self.horizon < 0:
            raise ValueError(f"horizon must be nonnegative, got {self.horizon}")
        if min(self.numerator, self.denominator, self.shock) < 0:
            raise ValueError("variable and shock indices must be nonnegative")


@dataclass(frozen=True)
class RankingRestriction:
    """Response of ``greater`` minus response of ``lesser`` (same shock and
    horizon) has the given sign; +1 means greater responds more."""

    greater: int
    lesser: int
    shock: int
    horizon: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if self.greater == self.lesser:
            raise ValueError("ranking needs two distinct variables")
        if self.horizon < 0:
            raise ValueError(f"horizon must be nonnegative, got {self.horizon}")
        if min(self.greater, self.lesser, self.shock) < 0:
            raise ValueError("variable and shock indices must be nonnegative")


Restriction = SignRestriction | RatioBound | RankingRestriction


@dataclass(frozen=True)
class RestrictionSet:
    """Conjunction of restrictions, plus a reporting flag.

    ``normalize_shocks`` asks reporting code to rescale each identified
    shock to unit own impact before quantiles are computed; it does not
    affect evaluation, which always sees unnormalized responses.
    """

    signs: tuple[SignRestriction, ...] = ()
    ratios: tuple[RatioBound, ...] = ()
    rankings: tuple[RankingRestriction, ...] = ()
    normalize_shocks: bool = False

    @property
    def is_empty(self) -> bool:
        return not (self.signs or self.ratios or self.rankings)

    def __len__(self) -> int:
        return len(self.signs) + len(self.ratios) + len(self.rankings)

    def required_horizon(self) -> int:
        """Largest horizon any restriction inspects (0 when empty)."""
        h = 0
        for r in self.signs:
            h = max(h, r.horizon_max)
        for r in self.ratios:
            h = max(h, r.horizon)
        for r in self.rankings:
            h = max(h, r.horizon)
        return h

    def identified_shocks(self) -> tuple[int, ...]:
        """Sorted distinct shock indices any restriction touches."""
        shocks = {r.shock for r in self.signs}
        shocks |= {r.shock for r in self.ratios}
        shocks |= {r.shock for r in self.rankings}
        return tuple(sorted(shocks))

    def check_model(self, n: int) -> None:
        """Raise ValueError if any index is out of range for an n-variable model."""
        for r in self.signs:
            if r.variable >= n or r.shock >= n:
                raise ValueError(
                    f"sign restriction on (variable={r.variable}, shock={r.shock}) "
                    f"is out of range for n={n}"
                )
        for r in self.ratios:
            if max(r.numerator, r.denominator, r.shock) >= n:
                raise ValueError(
                    f"ratio bound on (numerator={r.numerator}, "
                    f"denominator={r.denominator}, shock={r.shock}) "
                    f"is out of range for n={n}"
                )
        for r in self.rankings:
            if max(r.greater, r.lesser, r.shock) >= n:
                raise ValueError(
                    f"ranking on (greater={r.greater}, lesser={r.lesser}, "
                    f"shock={r.shock}) is out of range for n={n}"
                )


def evaluate(rset: RestrictionSet, irfs: ImpulseResponses | np.ndarray) -> bool:
    """True when every restriction holds strictly on the given responses.

    ``irfs`` may be an ImpulseResponses object or a raw (H+1, n, n) array.
    Raises ValueError if a restriction needs a horizon beyond H. A zero
    ratio denominator counts as unsatisfied rather than an error.
    """
    vals = irfs.values if isinstance(irfs, ImpulseResponses) else np.asarray(irfs)
    if vals.ndim != 3:
        raise ValueError(f"expected (H+1, n, n) responses, got shape {vals.shape}")
    horizon = vals.shape[0] - 1
    need = rset.required_horizon()
    if need > horizon:
        raise ValueError(
            f"restrictions inspect horizon {need} but responses stop at {horizon}"
        )
    n = vals.shape[1]
    rset.check_model(n)

    for r in rset.signs:
        block = vals[r.horizon_min : r.horizon_max + 1, r.variable, r.shock]
        if r.sign > 0:
            if not (block > 0.0).all():
                return False
        else:
            if not (block < 0.0).all():
                return False
    for r in rset.rankings:
        diff = vals[r.horizon, r.greater, r.shock] - vals[r.horizon, r.lesser, r.shock]
        if r.sign > 0:
            if not diff > 0.0:
                return False
        else:
            if not diff < 0.0:
                return False
    for r in rset.ratios:
        den = vals[r.horizon, r.denominator, r.shock]
        if den == 0.0:
            return False
        ratio = vals[r.horizon, r.numerator, r.shock] / den
        if not (r.lower < ratio < r.upper):
            return False
    return True


def indicator(
    rset: RestrictionSet, params: OrthogonalParams, spec: ModelSpec
) -> bool:
    """Evaluate the set on responses computed from ``params``."""
    if rset.is_empty:
        return True
    irfs = impulse_responses(params, spec, rset.required_horizon())
    return evaluate(rset, irfs)


def _require_int(obj: dict, key: str, where: str) -> int:
    if key not in obj:
        raise ConfigError(f"{where}: missing key {key!r}")
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{where}: {key!r} must be an integer, got {val!r}")
    return val


def _optional_int(obj: dict, key: str, default: int, where: str) -> int:
    if key not in obj:
        return default
    return _require_int(obj, key, where)


def _parse_horizon_range(obj: dict, where: str) -> tuple[int, int]:
    val = obj.get("horizon", 0)
    if isinstance(val, list):
        if len(val) != 2 or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in val
        ):
            raise ConfigError(
                f"{where}: 'horizon' must be an integer or [min, max], got {val!r}"
            )
        return int(val[0]), int(val[1])
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(
            f"{where}: 'horizon' must be an integer or [min, max], got {val!r}"
        )
    return int(val), int(val)


def _parse_bound(val, side: str, where: str) -> float:
    if val is None:
        return -math.inf if side == "lower" else math.inf
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}: {side} bound must be a number or null")
    return float(val)


def restriction_from_dict(obj: dict, where: str = "restriction") -> Restriction:
    """Parse one JSON restriction object.

    Wire forms::

        {"kind": "sign", "variable": i, "shock": j, "sign": +-1,
         "horizon": h or [h_min, h_max]}
        {"kind": "ratio", "numerator": i, "denominator": k, "shock": j,
         "horizon": h, "bounds": [lo or null, hi or null]}
        {"kind": "ranking", "greater": i, "lesser": k, "shock": j,
         "horizon": h, "sign": +-1}
    """
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    kind = obj.get("kind")
    known = {
        "sign": {"kind", "variable", "shock", "sign", "horizon"},
        "ratio": {"kind", "numerator", "denominator", "shock", "horizon", "bounds"},
        "ranking": {"kind", "greater", "lesser", "shock", "horizon", "sign"},
    }
    if kind not in known:
        raise ConfigError(
            f"{where}: 'kind' must be one of {sorted(known)}, got {kind!r}"
        )
    extra = set(obj) - known[kind]
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)} for kind {kind!r}")
    try:
        if kind == "sign":
            h_min, h_max = _parse_horizon_range(obj, where)
            return SignRestriction(
                variable=_require_int(obj, "variable", where),
                shock=_require_int(obj, "shock", where),
                sign=_require_int(obj, "sign", where),
                horizon_min=h_min,
                horizon_max=h_max,
            )
        if kind == "ratio":
            bounds = obj.get("bounds")
            if not isinstance(bounds, list) or len(bounds) != 2:
                raise ConfigError(
                    f"{where}: 'bounds' must be a two-element list, got {bounds!r}"
                )
            return RatioBound(
                numerator=_require_int(obj, "numerator", where),
                denominator=_require_int(obj, "denominator", where),
                shock=_require_int(obj, "shock", where),
                horizon=_optional_int(obj, "horizon", 0, where),
                lower=_parse_bound(bounds[0], "lower", where),
                upper=_parse_bound(bounds[1], "upper", where),
            )
        return RankingRestriction(
            greater=_require_int(obj, "greater", where),
            lesser=_require_int(obj, "lesser", where),
            shock=_require_int(obj, "shock", where),
            horizon=_optional_int(obj, "horizon", 0, where),
            sign=_optional_int(obj, "sign", 1, where),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def restriction_set_from_dicts(
    items: list, normalize_shocks: bool = False, where: str = "restrictions"
) -> RestrictionSet:
    """Parse a JSON restriction list into a RestrictionSet."""
    if not isinstance(items, list):
        raise ConfigError(f"{where}: expected a list, got {type(items).__name__}")
    signs, ratios, rankings = [], [], []
    for idx, obj in enumerate(items):
        parsed = restriction_from_dict(obj, where=f"{where}[{idx}]")
        if isinstance(parsed, SignRestriction):
            signs.append(parsed)
        elif isinstance(parsed, RatioBound):
            ratios.append(parsed)
        else:
            rankings.append(parsed)
    return RestrictionSet(
        signs=tuple(signs),
        ratios=tuple(ratios),
        rankings=tuple(rankings),
        normalize_shocks=normalize_shocks,
    )


def restriction_set_to_dicts(rset: RestrictionSet) -> list[dict]:
    """Inverse of restriction_set_from_dicts, for config echoing."""
    out: list[dict] = []
    for r in rset.signs:
        horizon = (
            r.horizon_min
            if r.horizon_min == r.horizon_max
            else [r.horizon_min, r.horizon_max]
        )
        out.append(
            {
                "kind": "sign",
                "variable": r.variable,
                "shock": r.shock,
                "sign": r.sign,
                "horizon": horizon,
            }
        )
    for r in rset.ratios:
        out.append(
            {
                "kind": "ratio",
                "numerator": r.numerator,
                "denominator": r.denominator,
                "shock": r.shock,
                "horizon": r.horizon,
                "bounds": [
                    None if math.isinf(r.lower) else r.lower,
                    None if math.isinf(r.upper) else r.upper,
                ],
            }
        )
    for r in rset.rankings:
        out.append(
            {
                "kind": "ranking",
                "greater": r.greater,
                "lesser": r.lesser,
                "shock": r.shock,
                "horizon": r.horizon,
                "sign": r.sign,
            }
        )
    return out
