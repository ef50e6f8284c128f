"""Delimited-text ingestion for real-data analyses.

Input is a comma- or tab-delimited file with a header row, in exactly one
of two modes: ``id, stat[, df]`` (statistics referred to a t distribution,
or to the normal where df is empty) or ``id, p, sign`` (precomputed
two-sided p-values plus directions). Column names are case-insensitive;
extra columns are ignored. Errors carry the 1-based file line number.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

__all__ = ["StatTable", "TableParseError", "read_stat_table"]

MODE_STATISTICS = "statistics"
MODE_PVALUES = "pvalues"


class TableParseError(ValueError):
    """Input-table validation failure, pointing at the offending line."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class StatTable:
    """A validated input table in one of the two modes.

    ``df`` is NaN where a statistic is referred to the standard normal;
    the p-value arrays are None in statistics mode and vice versa.
    """

    ids: tuple[str, ...]
    mode: str
    statistics: Optional[np.ndarray] = None
    df: Optional[np.ndarray] = None
    p_values: Optional[np.ndarray] = None
    signs: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.ids)

    def common_df(self) -> Optional[float]:
        """The single reference distribution of a statistics table.

        NaN means all-normal; a float means all rows share that t df;
        None means mixed references (no common statistic scale) or a
        p-value table.
        """
        if self.mode != MODE_STATISTICS:
            return None
        normal = np.isnan(self.df)
        if normal.all():
            return math.nan
        if normal.any():
            return None
        first = float(self.df[0])
        return first if bool(np.all(self.df == first)) else None


def _sniff_delimiter(header_line: str) -> str:
    return "\t" if "\t" in header_line else ","


def _parse_float(text: str, what: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise TableParseError(f"{what} {text!r} is not a number", line) from None
    if not math.isfinite(value):
        raise TableParseError(f"{what} must be finite, got {text!r}", line)
    return value


def read_stat_table(path, delimiter: Optional[str] = None) -> StatTable:
    """Read and validate a delimited table; see the module docstring.

    ``delimiter`` is sniffed from the header (tab wins if present) unless
    given explicitly.
    """
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise TableParseError(f"cannot read {path}: {exc.strerror or exc}") from exc
    lines = raw.splitlines()
    if not lines:
        raise TableParseError(f"{path} is empty")
    delim = delimiter if delimiter is not None else _sniff_delimiter(lines[0])

    rows = list(csv.reader(lines, delimiter=delim))
    header = [cell.strip().lower() for cell in rows[0]]
    if len(set(header)) != len(header):
        raise TableParseError(f"duplicate column names in header {header!r}", 1)
    col = {name: pos for pos, name in enumerate(header)}

    if "id" not in col:
        raise TableParseError("header must contain an 'id' column", 1)
    has_stat = "stat" in col
    has_p = "p" in col
    if has_stat and has_p:
        raise TableParseError("header mixes modes: found both 'stat' and 'p' columns", 1)
    if has_stat:
        mode = MODE_STATISTICS
        if "sign" in col:
            raise TableParseError("'sign' column is not valid in statistics mode", 1)
    elif has_p:
        mode = MODE_PVALUES
        if "sign" not in col:
            raise TableParseError("p-value mode needs a 'sign' column", 1)
        if "df" in col:
            raise TableParseError("'df' column is not valid in p-value mode", 1)
    else:
        raise TableParseError("header must contain 'stat' (statistics mode) or 'p' (p-value mode)", 1)

    ids: list[str] = []
    seen: dict[str, int] = {}
    stats: list[float] = []
    dfs: list[float] = []
    ps: list[float] = []
    signs: list[int] = []

    for line_no, row in enumerate(rows[1:], start=2):
        if not row or all(cell.strip() == "" for cell in row):
            continue  # blank line
        if len(row) != len(header):
            raise TableParseError(
                f"expected {len(header)} fields, got {len(row)}", line_no
            )
        ident = row[col["id"]].strip()
        if not ident:
            raise TableParseError("empty id", line_no)
        if ident in seen:
            raise TableParseError(f"duplicate id {ident!r} (first seen on line {seen[ident]})", line_no)
        seen[ident] = line_no
        ids.append(ident)

        if mode == MODE_STATISTICS:
            stats.append(_parse_float(row[col["stat"]].strip(), "stat", line_no))
            if "df" in col and row[col["df"]].strip() != "":
                df = _parse_float(row[col["df"]].strip(), "df", line_no)
                if df <= 0:
                    raise TableParseError(f"df must be positive, got {df}", line_no)
                dfs.append(df)
            else:
                dfs.append(math.nan)
        else:
            p = _parse_float(row[col["p"]].strip(), "p", line_no)
            if not (0.0 <= p <= 1.0):
                raise TableParseError(f"p must lie in [0, 1], got {p}", line_no)
            ps.append(p)
            sign_text = row[col["sign"]].strip()
            if sign_text in {"1", "+1"}:
                signs.append(1)
            elif sign_text == "-1":
                signs.append(-1)
            else:
                raise TableParseError(f"sign must be +1 or -1, got {sign_text!r}", line_no)

    if not ids:
        raise TableParseError(f"{path} contains a header but no data rows")

    if mode == MODE_STATISTICS:
        return StatTable(
            ids=tuple(ids),
            mode=mode,
            statistics=np.array(stats),
            df=np.array(dfs),
        )
    return StatTable(
        ids=tuple(ids),
        mode=mode,
        p_values=np.array(ps),
        signs=np.array(signs, dtype=np.int8),
    )
