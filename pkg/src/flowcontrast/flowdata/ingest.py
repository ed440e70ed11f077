"""CSV parsing into flow records.

Real NetFlow exports are dirty, so malformed rows are counted and skipped
instead of aborting the whole file; the skip reasons come back in the
parse report.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import SchemaError
from .schema import FeatureSchema

BENIGN = "Benign"


@dataclass(frozen=True)
class FlowRecord:
    """One network flow: endpoints, raw features, and its labels.

    ``label`` is 0 exactly when ``attack`` is the benign category.
    Categorical values are kept raw (strings); encoding happens when a
    standardizer is fitted.
    """

    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    categorical: tuple[str, ...]
    numeric: tuple[float, ...]
    label: int
    attack: str


@dataclass
class ParseReport:
    total_rows: int = 0
    skipped: int = 0
    reasons: Counter = field(default_factory=Counter)

    def note_skip(self, reason: str) -> None:
        self.skipped += 1
        self.reasons[reason] += 1


def parse_netflow_csv(path, schema: FeatureSchema) -> tuple[list[FlowRecord], ParseReport]:
    """Read a headered CSV into records, skipping malformed rows.

    Raises :class:`SchemaError` when a mapped column is absent from the
    header; unreadable files raise the underlying ``OSError``.
    """
    path = Path(path)
    report = ParseReport()
    records: list[FlowRecord] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, no header row")
        header = set(reader.fieldnames)
        missing = [c for c in schema.all_columns() if c not in header]
        if missing:
            raise SchemaError(f"{path}: header is missing mapped columns {missing}")
        for row in reader:
            report.total_rows += 1
            rec = _row_to_record(row, schema, report)
            if rec is not None:
                records.append(rec)
    return records, report


def _row_to_record(row: dict, schema: FeatureSchema, report: ParseReport) -> FlowRecord | None:
    try:
        numeric = tuple(float(row[c]) for c in schema.numeric)
    except (TypeError, ValueError):
        report.note_skip("non-numeric feature value")
        return None
    if any(x != x or x in (float("inf"), float("-inf")) for x in numeric):
        report.note_skip("non-finite feature value")
        return None
    try:
        label = int(float(row[schema.label]))
    except (TypeError, ValueError):
        report.note_skip("bad label value")
        return None
    attack = (row[schema.attack] or "").strip()
    if label not in (0, 1):
        report.note_skip("label outside {0,1}")
        return None
    if (label == 0) != (attack == BENIGN):
        report.note_skip("label/attack mismatch")
        return None
    if schema.has_ports:
        try:
            src_port = int(float(row[schema.src_port]))
            dst_port = int(float(row[schema.dst_port]))
        except (TypeError, ValueError):
            report.note_skip("bad port value")
            return None
    else:
        src_port = dst_port = 0
    src_ip = (row[schema.src_ip] or "").strip()
    dst_ip = (row[schema.dst_ip] or "").strip()
    if not src_ip or not dst_ip:
        report.note_skip("missing endpoint")
        return None
    categorical = tuple((row[c] or "").strip() for c in schema.categorical)
    return FlowRecord(
        src_ip=src_ip,
        dst_ip=dst_ip,
        src_port=src_port,
        dst_port=dst_port,
        categorical=categorical,
        numeric=numeric,
        label=label,
        attack=attack,
    )
