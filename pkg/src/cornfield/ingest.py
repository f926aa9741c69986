"""Read observed exposure/outcome counts from delimited text files."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import Optional, Union

from .measures import (
    AssociationMeasures,
    MarginError,
    StratifiedTable,
    TwoByTwo,
    measures_from_table,
)

REQUIRED = ("exposure", "outcome", "count")
OPTIONAL = ("confounder",)
DELIMITERS = {",": ",", "comma": ",", "\t": "\t", "tab": "\t"}

Source = Union[str, os.PathLike, bytes, io.IOBase]
Table = Union[TwoByTwo, StratifiedTable]


class IngestError(ValueError):
    """A problem with the input file. ``line`` is 1-based and counts the header."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class RecordRow:
    exposure: int
    outcome: int
    count: int
    confounder: Optional[int] = None

    def __post_init__(self):
        if self.exposure not in (0, 1) or self.outcome not in (0, 1):
            raise ValueError("exposure and outcome must be 0 or 1")
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if self.confounder is not None and self.confounder < 0:
            raise ValueError("confounder level must be >= 0")


def _read_text(source: Source) -> str:
    if isinstance(source, bytes):
        data = source
    elif isinstance(source, io.IOBase):
        data = source.read()
    else:
        with open(source, "rb") as fh:
            data = fh.read()
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise IngestError(f"input is not valid UTF-8 ({exc.reason} at byte {exc.start})") from None


def _parse_int(field: str, name: str, line: int, allowed: Optional[tuple[int, ...]] = None) -> int:
    text = field.strip()
    if not text:
        raise IngestError(f"empty {name}", line)
    sign = text[1:] if text[0] in "+-" else text
    if not sign.isdigit():
        raise IngestError(f"{name} must be an integer, got {text!r}", line)
    value = int(text)
    if name == "count" and value < 0:
        raise IngestError(f"negative count {value}", line)
    if name == "confounder" and value < 0:
        raise IngestError(f"confounder level must be >= 0, got {value}", line)
    if allowed is not None and value not in allowed:
        raise IngestError(f"{name} must be one of {allowed}, got {value}", line)
    return value


def parse_rows(source: Source, delimiter: str = ",") -> list[tuple[int, RecordRow]]:
    """Parse data rows into (line number, RecordRow) pairs without aggregating."""
    try:
        delim = DELIMITERS[delimiter]
    except KeyError:
        raise ValueError(f"unsupported delimiter {delimiter!r}; use ',' or tab") from None
    text = _read_text(source)
    lines = text.splitlines()
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise IngestError("input is empty; expected a header row", 1)
    reader = csv.reader(lines, delimiter=delim)
    header = [h.strip().lower() for h in next(reader)]
    for name in REQUIRED:
        if name not in header:
            raise IngestError(f"missing column {name!r} (header: {', '.join(header)})", 1)
    unknown = [h for h in header if h not in REQUIRED + OPTIONAL]
    if unknown:
        raise IngestError(f"unexpected column(s): {', '.join(unknown)}", 1)
    if len(set(header)) != len(header):
        raise IngestError("duplicate column names in header", 1)
    idx = {name: header.index(name) for name in header}
    rows = []
    for line_no, fields in enumerate(reader, start=2):
        if len(fields) != len(header):
            raise IngestError(f"expected {len(header)} fields, found {len(fields)}", line_no)
        rows.append(
            (
                line_no,
                RecordRow(
                    exposure=_parse_int(fields[idx["exposure"]], "exposure", line_no, (0, 1)),
                    outcome=_parse_int(fields[idx["outcome"]], "outcome", line_no, (0, 1)),
                    count=_parse_int(fields[idx["count"]], "count", line_no),
                    confounder=(
                        _parse_int(fields[idx["confounder"]], "confounder", line_no)
                        if "confounder" in idx
                        else None
                    ),
                ),
            )
        )
    if not rows:
        raise IngestError("no data rows after the header", 2)
    return rows


def _table_from_cells(cells: dict[tuple[int, int], int]) -> TwoByTwo:
    return TwoByTwo(cells.get((1, 1), 0), cells.get((1, 0), 0), cells.get((0, 1), 0), cells.get((0, 0), 0))


def parse_table(source: Source, delimiter: str = ",") -> Table:
    """Parse a delimited count file into a TwoByTwo, or a StratifiedTable if a
    confounder column is present. Rows sharing a key are summed."""
    rows = parse_rows(source, delimiter)
    if rows[0][1].confounder is None:
        cells: dict[tuple[int, int], int] = {}
        for _, r in rows:
            key = (r.exposure, r.outcome)
            cells[key] = cells.get(key, 0) + r.count
        return _table_from_cells(cells)
    by_level: dict[int, dict[tuple[int, int], int]] = {}
    for _, r in rows:
        cells = by_level.setdefault(r.confounder, {})
        key = (r.exposure, r.outcome)
        cells[key] = cells.get(key, 0) + r.count
    levels = sorted(by_level)
    k = levels[-1] + 1
    if levels != list(range(k)):
        missing = sorted(set(range(k)) - set(levels))
        raise IngestError(
            f"confounder levels must be contiguous from 0; found {levels}, missing {missing}"
        )
    if k < 2:
        raise IngestError("a confounder column needs at least two levels (0 and 1)")
    return StratifiedTable(tuple(_table_from_cells(by_level[i]) for i in range(k)))


def format_table(table: Table, delimiter: str = ",") -> str:
    """Serialize a table in the input format (LF line endings, one row per cell)."""
    delim = DELIMITERS[delimiter]
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delim, lineterminator="\n")

    def cells(t: TwoByTwo):
        return ((1, 1, t.exposed_cases), (1, 0, t.exposed_noncases),
                (0, 1, t.unexposed_cases), (0, 0, t.unexposed_noncases))

    if isinstance(table, StratifiedTable):
        writer.writerow(["exposure", "outcome", "confounder", "count"])
        for level, t in enumerate(table.strata):
            for e, d, n in cells(t):
                writer.writerow([e, d, level, n])
    else:
        writer.writerow(["exposure", "outcome", "count"])
        for e, d, n in cells(table):
            writer.writerow([e, d, n])
    return buf.getvalue()


def write_table(table: Table, path: Union[str, os.PathLike], delimiter: str = ",") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_table(table, delimiter))


def _stratum_risks(t: TwoByTwo, level: int) -> tuple[float, float]:
    try:
        return t.risks()
    except MarginError as exc:
        raise MarginError(f"confounder level {level}: {exc}") from None


def observed_from_table(table: Table) -> AssociationMeasures:
    """Observed measures; stratified input adds per-level contrasts against level 0."""
    if isinstance(table, TwoByTwo):
        return measures_from_table(table)
    base = measures_from_table(table.collapse())
    risks = [_stratum_risks(t, i) for i, t in enumerate(table.strata)]
    r1 = [r[0] for r in risks]
    r0 = [r[1] for r in risks]

    def ratio(a: float, b: float) -> float:
        if b == 0:
            return float("inf") if a > 0 else float("nan")
        return a / b

    rd_e1 = tuple(r1[j] - r1[0] for j in range(1, table.k))
    rd_e0 = tuple(r0[j] - r0[0] for j in range(1, table.k))
    rr_e1 = tuple(ratio(r1[j], r1[0]) for j in range(1, table.k))
    rr_e0 = tuple(ratio(r0[j], r0[0]) for j in range(1, table.k))
    rr_eu = rd_eu = None
    if table.k == 2:
        n1 = sum(t.exposed_total for t in table.strata)
        n0 = sum(t.unexposed_total for t in table.strata)
        pu1 = table.strata[1].exposed_total / n1
        pu0 = table.strata[1].unexposed_total / n0
        rr_eu = ratio(pu1, pu0)
        rd_eu = pu1 - pu0
    return AssociationMeasures(
        rr_ed=base.rr_ed,
        rd_ed=base.rd_ed,
        rr_eu=rr_eu,
        rd_eu=rd_eu,
        rd_ud_given_e1=rd_e1,
        rd_ud_given_e0=rd_e0,
        rr_ud_given_e1=rr_e1,
        rr_ud_given_e0=rr_e0,
    )
