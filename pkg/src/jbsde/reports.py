"""Report records: property check results and CSV table output."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict


@dataclass
class PropertyReport:
    """Outcome of one theorem-derived invariant check."""

    property_id: str
    theorem_tag: str
    status: str  # pass | fail | diagnostic
    statistic: float
    tolerance: float
    note: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class CsvTable:
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError("row width mismatch")
        self.rows.append(list(values))

    def render(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.render())


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_json_report(reports, path):
    payload = [r.as_dict() for r in reports]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
