"""Machine-readable sweep reports: CSV rows plus a JSON sidecar.

Rows are ordered by schedule index and floats are written with 17 significant
digits, so reports are diffable golden files; the sidecar echoes the fully
resolved config and carries pass/fail summaries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

FORMAT_VERSION = 1

CSV_HEADER = "param,nonlocal,local,abs_err,rel_err,ms"


@dataclass
class Row:
    param: str
    nonlocal_value: float
    local_value: float
    ms: float

    @property
    def abs_err(self) -> float:
        return abs(self.nonlocal_value - self.local_value)

    @property
    def rel_err(self) -> float:
        denom = abs(self.local_value)
        return self.abs_err / denom if denom > 0 else self.abs_err

    def csv(self) -> str:
        return ",".join(
            [
                self.param,
                _fmt(self.nonlocal_value),
                _fmt(self.local_value),
                _fmt(self.abs_err),
                _fmt(self.rel_err),
                _fmt(self.ms),
            ]
        )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class Report:
    command: str
    config: dict
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def add_row(self, param: str, nonlocal_value: float, local_value: float, ms: float) -> Row:
        row = Row(str(param), float(nonlocal_value), float(local_value), float(ms))
        self.rows.append(row)
        return row

    @property
    def passed(self) -> bool:
        return bool(self.summary.get("pass", True))

    def csv_text(self) -> str:
        lines = [CSV_HEADER] + [r.csv() for r in self.rows]
        return "\n".join(lines) + "\n"

    def json_payload(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "command": self.command,
            "config": self.config,
            "summary": self.summary,
            "rows": [
                {
                    "param": r.param,
                    "nonlocal": r.nonlocal_value,
                    "local": r.local_value,
                    "abs_err": r.abs_err,
                    "rel_err": r.rel_err,
                    "ms": r.ms,
                }
                for r in self.rows
            ],
        }

    def write(self, out_base) -> tuple[Path, Path]:
        base = Path(out_base)
        base.parent.mkdir(parents=True, exist_ok=True)
        csv_path = base.with_suffix(".csv")
        json_path = base.with_suffix(".json")
        csv_path.write_text(self.csv_text(), newline="\n")
        json_path.write_text(
            json.dumps(self.json_payload(), indent=2, sort_keys=True) + "\n", newline="\n"
        )
        return csv_path, json_path
