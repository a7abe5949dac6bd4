"""File formats: series CSV input, binary draws, CSV/JSON outputs.

All writers are atomic (temp file in the destination directory, then
rename), so a crash never leaves a partial file at the target path, and
all numeric text is written with 17 significant digits so values survive
a write/read round trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

import numpy as np

from .diagnostics import QuantileTable
from .errors import DataError
from .gibbs import PosteriorDraws
from .toy import SweepRow

DRAWS_MAGIC = b"SVARDRW1"
SCHEMA_VERSION = 1


def _format(value: float) -> str:
    return f"{value:.17g}"


def atomic_write_bytes(path: str, payload: bytes) -> None:
    """Write bytes to ``path`` via a temp file and rename."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path: str, obj) -> None:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    atomic_write_text(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


# -- series CSV input -------------------------------------------------------


def _try_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def load_series_csv(
    path: str,
) -> tuple[np.ndarray, tuple[str, ...], tuple[str, ...] | None]:
    """Read a time-series CSV into (matrix, column names, date labels).

    The first row is taken as a header when any of its cells is not a
    number. A leading column whose body cells are not numbers is treated
    as date labels: kept for labeling, excluded from the matrix. Every
    remaining cell must be a finite number; errors name the offending
    1-based row and column.
    """
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = [row for row in csv.reader(handle) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: file contains no data")

    header: list[str] | None = None
    if any(_try_float(cell) is None for cell in rows[0]):
        header = [cell.strip() for cell in rows[0]]
        body = rows[1:]
        first_body_row = 2
    else:
        body = rows
        first_body_row = 1
    if not body:
        raise DataError(f"{path}: header only, no data rows")

    width = len(body[0])
    for i, row in enumerate(body):
        if len(row) != width:
            raise DataError(
                f"{path}: row {first_body_row + i} has {len(row)} cells, "
                f"expected {width}"
            )
    if header is not None and len(header) != width:
        raise DataError(
            f"{path}: header has {len(header)} cells but rows have {width}"
        )

    has_dates = width > 1 and _try_float(body[0][0]) is None
    start_col = 1 if has_dates else 0
    if width - start_col < 1:
        raise DataError(f"{path}: no numeric columns found")

    dates: tuple[str, ...] | None = None
    if has_dates:
        dates = tuple(row[0] for row in body)

    matrix = np.empty((len(body), width - start_col))
    for i, row in enumerate(body):
        for j in range(start_col, width):
            value = _try_float(row[j])
            if value is None:
                raise DataError(
                    f"{path}: cell at row {first_body_row + i}, column {j + 1} "
                    f"is not a number: {row[j]!r}"
                )
            if not math.isfinite(value):
                raise DataError(
                    f"{path}: cell at row {first_body_row + i}, column {j + 1} "
                    f"is not finite: {row[j]!r}"
                )
            matrix[i, j - start_col] = value

    if header is not None:
        names = tuple(header[start_col:])
    else:
        names = tuple(f"var{j}" for j in range(width - start_col))
    return matrix, names, dates


def save_matrix_csv(
    path: str, matrix: np.ndarray, names: tuple[str, ...] | None = None
) -> None:
    """Write a numeric matrix as CSV with 17-significant-digit cells."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise ValueError(f"matrix must be 2-d, got shape {matrix.shape}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if names is not None:
        if len(names) != matrix.shape[1]:
            raise ValueError(
                f"{len(names)} names for {matrix.shape[1]} columns"
            )
        writer.writerow(names)
    for row in matrix:
        writer.writerow([_format(v) for v in row])
    atomic_write_text(path, buf.getvalue())


# -- binary draws file ------------------------------------------------------


def write_draws(path: str, draws: PosteriorDraws, meta: dict | None = None) -> None:
    """Serialize draws: magic, length-prefixed JSON header, float64 payload.

    The payload is draw-major: for each stored draw, B then Sigma then Q,
    row-major little-endian float64. The header records shapes, counts,
    the algorithm, and any caller metadata (seed, model, restrictions),
    so a reader needs nothing else to interpret the payload.
    """
    count = len(draws)
    m, n = draws.b.shape[1], draws.b.shape[2]
    header = {
        "schema_version": SCHEMA_VERSION,
        "kind": "draws",
        "count": count,
        "m": m,
        "n": n,
        "record": ["b", "sigma", "q"],
        "layout": "row-major float64 little-endian",
        "algorithm": draws.algorithm,
        "iterations": draws.iterations,
        "trial_counts": draws.trial_counts,
    }
    if meta:
        overlap = set(meta) & set(header)
        if overlap:
            raise ValueError(f"meta keys collide with header keys: {sorted(overlap)}")
        header.update(meta)
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")

    record = np.empty((count, m * n + 2 * n * n))
    record[:, : m * n] = draws.b.reshape(count, -1)
    record[:, m * n : m * n + n * n] = draws.sigma.reshape(count, -1)
    record[:, m * n + n * n :] = draws.q.reshape(count, -1)
    payload = record.astype("<f8").tobytes()

    out = bytearray()
    out += DRAWS_MAGIC
    out += len(header_bytes).to_bytes(8, "little")
    out += header_bytes
    out += payload
    atomic_write_bytes(path, bytes(out))


def read_draws(path: str) -> tuple[PosteriorDraws, dict]:
    """Read a draws file back into (PosteriorDraws, header dict)."""
    try:
        with open(path, "rb") as handle:
            blob = handle.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(blob) < len(DRAWS_MAGIC) + 8:
        raise DataError(f"{path}: truncated draws file")
    if blob[: len(DRAWS_MAGIC)] != DRAWS_MAGIC:
        raise DataError(
            f"{path}: not a draws file (bad magic {blob[:8]!r})"
        )
    offset = len(DRAWS_MAGIC)
    header_len = int.from_bytes(blob[offset : offset + 8], "little")
    offset += 8
    if len(blob) < offset + header_len:
        raise DataError(f"{path}: truncated draws header")
    try:
        header = json.loads(blob[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: corrupt draws header: {exc}") from exc
    offset += header_len

    for key in ("count", "m", "n"):
        if not isinstance(header.get(key), int) or header[key] < 0:
            raise DataError(f"{path}: header field {key!r} missing or invalid")
    count, m, n = header["count"], header["m"], header["n"]
    per_draw = m * n + 2 * n * n
    expected = count * per_draw * 8
    payload = blob[offset:]
    if len(payload) != expected:
        raise DataError(
            f"{path}: payload is {len(payload)} bytes, expected {expected} "
            f"for {count} draws"
        )
    record = np.frombuffer(payload, dtype="<f8").reshape(count, per_draw)
    record = record.astype(float)
    draws = PosteriorDraws(
        b=record[:, : m * n].reshape(count, m, n),
        sigma=record[:, m * n : m * n + n * n].reshape(count, n, n),
        q=record[:, m * n + n * n :].reshape(count, n, n),
        trial_counts={
            k: int(v) for k, v in (header.get("trial_counts") or {}).items()
        },
        iterations=int(header.get("iterations", 0)),
        wall_seconds=0.0,
        algorithm=str(header.get("algorithm", "unknown")),
    )
    return draws, header


def export_draws_csv(path: str, draws: PosteriorDraws) -> None:
    """Flatten draws to CSV, one row per draw, for external tooling."""
    count = len(draws)
    m, n = draws.b.shape[1], draws.b.shape[2]
    names = (
        [f"b_{r}_{c}" for r in range(m) for c in range(n)]
        + [f"sigma_{r}_{c}" for r in range(n) for c in range(n)]
        + [f"q_{r}_{c}" for r in range(n) for c in range(n)]
    )
    flat = np.empty((count, len(names)))
    flat[:, : m * n] = draws.b.reshape(count, -1)
    flat[:, m * n : m * n + n * n] = draws.sigma.reshape(count, -1)
    flat[:, m * n + n * n :] = draws.q.reshape(count, -1)
    save_matrix_csv(path, flat, tuple(names))


# -- summary and sweep CSVs -------------------------------------------------


def _quantile_label(q: float) -> str:
    scaled = q * 100.0
    if abs(scaled - round(scaled)) < 1e-9:
        return f"q{int(round(scaled))}"
    return f"q{q:g}"


def write_summary_csv(
    path: str, table: QuantileTable, variable_names: tuple[str, ...]
) -> None:
    """Quantile bands as CSV rows keyed by (variable, shock, horizon)."""
    if len(variable_names) != table.n:
        raise ValueError(
            f"{len(variable_names)} variable names for {table.n} variables"
        )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["variable", "shock", "horizon"]
        + [_quantile_label(q) for q in table.quantiles]
    )
    for var in range(table.n):
        for pos, shock in enumerate(table.shocks):
            for h in range(table.horizon + 1):
                writer.writerow(
                    [variable_names[var], shock, h]
                    + [_format(table.values[k, h, var, pos]) for k in range(len(table.quantiles))]
                )
    atomic_write_text(path, buf.getvalue())


def write_sweep_csv(path: str, rows: list[SweepRow]) -> None:
    """Toy-circle sweep results, one row per arc length."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "arc_length",
            "ar_expected_trials",
            "ar_mc_trials",
            "ess_mean_trials",
            "ess_draws_per_iid",
        ]
    )
    for row in rows:
        writer.writerow(
            [
                _format(row.arc_length),
                _format(row.ar_expected_trials),
                _format(row.ar_mc_trials),
                _format(row.ess_mean_trials),
                _format(row.ess_draws_per_iid),
            ]
        )
    atomic_write_text(path, buf.getvalue())
