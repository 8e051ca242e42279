"""Parsing of the harness sweep CSV.

The file format is an external contract shared with the experiment
harness: a fixed fourteen-column header, one row per (sweep point,
trial), and one aggregated row per sweep point carrying ``trial=-1``
plus two trailing columns ``error_mean,error_std``.  Optional fields
(``q`` for single-trajectory sweeps, bound columns where preconditions
fail, means for points whose trials all failed) are empty strings.

The header must match exactly; renaming, reordering, or dropping a
column aborts the load with a message naming the offending columns.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

EXPECTED_HEADER = (
    "experiment",
    "system",
    "q",
    "m_norm1",
    "lambda",
    "sigma_u",
    "N",
    "trial",
    "error",
    "bound_total",
    "bound_noise",
    "bound_nonlin",
    "bound_reg",
    "status",
)

AGGREGATE_EXTRAS = ("error_mean", "error_std")


@dataclass(frozen=True)
class AggregateRow:
    """The per-sweep-point summary row (``trial=-1``) of the CSV."""

    q: float | None
    m_norm1: float | None
    lam: float
    sigma_u: float | None
    n: int
    bound_total: float | None
    bound_noise: float | None
    bound_nonlin: float | None
    bound_reg: float | None
    status: str
    error_mean: float | None
    error_std: float | None


@dataclass(frozen=True)
class SweepTable:
    """One loaded CSV: identity fields plus the aggregated rows.

    Per-trial rows are counted but not kept; every figure plots the
    aggregated means.
    """

    experiment: str
    system: str
    aggregates: tuple[AggregateRow, ...]
    trial_row_count: int


def _optional_float(text: str, column: str, line: int) -> float | None:
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise ValueError(
            f"line {line}: column {column!r} has non-numeric value {text!r}"
        ) from None


def _required_float(text: str, column: str, line: int) -> float:
    value = _optional_float(text, column, line)
    if value is None:
        raise ValueError(f"line {line}: column {column!r} is empty")
    return value


def load_table(csv_path) -> SweepTable:
    """Parse a harness CSV, validating the header and row shapes.

    Parameters
    ----------
    csv_path : path-like
        File written by the harness ``run`` command.

    Returns
    -------
    SweepTable
        Aggregated rows in file order plus the trial-row count.

    Raises
    ------
    ValueError
        On unreadable files, header mismatches (naming the missing or
        unexpected columns), malformed rows, or a file with no rows.
    """
    path = Path(csv_path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValueError(f"{path}: cannot read csv: {exc}") from None
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise ValueError(f"{path}: empty file, expected the sweep csv header")
    header = tuple(rows[0])
    if header != EXPECTED_HEADER:
        missing = [c for c in EXPECTED_HEADER if c not in header]
        unexpected = [c for c in header if c not in EXPECTED_HEADER]
        parts = [f"{path}: csv header mismatch"]
        if missing:
            parts.append(f"missing column(s): {missing}")
        if unexpected:
            parts.append(f"unexpected column(s): {unexpected}")
        if not missing and not unexpected:
            parts.append(f"columns out of order: got {list(header)}")
        raise ValueError("; ".join(parts))
    experiment = system = None
    aggregates: list[AggregateRow] = []
    trial_row_count = 0
    for line, row in enumerate(rows[1:], start=2):
        is_aggregate = len(row) >= 8 and row[7] == "-1"
        expected_len = len(EXPECTED_HEADER) + (2 if is_aggregate else 0)
        if len(row) != expected_len:
            raise ValueError(
                f"{path}: line {line}: expected {expected_len} fields, got {len(row)}"
            )
        if experiment is None:
            experiment, system = row[0], row[1]
        elif (row[0], row[1]) != (experiment, system):
            raise ValueError(
                f"{path}: line {line}: mixed experiments in one file "
                f"({row[0]!r}/{row[1]!r} after {experiment!r}/{system!r})"
            )
        if not is_aggregate:
            trial_row_count += 1
            continue
        n_raw = row[6]
        if not n_raw.isdigit():
            raise ValueError(f"{path}: line {line}: column 'N' has value {n_raw!r}")
        try:
            aggregates.append(
                AggregateRow(
                    q=_optional_float(row[2], "q", line),
                    m_norm1=_optional_float(row[3], "m_norm1", line),
                    lam=_required_float(row[4], "lambda", line),
                    sigma_u=_optional_float(row[5], "sigma_u", line),
                    n=int(n_raw),
                    bound_total=_optional_float(row[9], "bound_total", line),
                    bound_noise=_optional_float(row[10], "bound_noise", line),
                    bound_nonlin=_optional_float(row[11], "bound_nonlin", line),
                    bound_reg=_optional_float(row[12], "bound_reg", line),
                    status=row[13],
                    error_mean=_optional_float(row[14], "error_mean", line),
                    error_std=_optional_float(row[15], "error_std", line),
                )
            )
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from None
    if not aggregates:
        raise ValueError(f"{path}: no aggregated rows (trial=-1) found")
    return SweepTable(
        experiment=experiment,
        system=system,
        aggregates=tuple(aggregates),
        trial_row_count=trial_row_count,
    )
