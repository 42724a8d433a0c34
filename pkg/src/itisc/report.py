"""Long-format experiment reports and their CSV/JSON serialisation."""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Any

HEADER = ("experiment", "algorithm", "param", "metric", "value")


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    algorithm: str
    param: str
    metric: str
    value: float


@dataclass
class ExperimentReport:
    rows: list[ReportRow] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def add(self, experiment, algorithm, param, metric, value) -> None:
        self.rows.append(ReportRow(experiment, algorithm, param, metric, float(value)))

    def extend(self, other: "ExperimentReport") -> None:
        self.rows.extend(other.rows)

    def select(self, **match) -> list[ReportRow]:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in match.items())]

    def value(self, **match) -> float:
        found = self.select(**match)
        if len(found) != 1:
            raise KeyError(f"{len(found)} rows match {match}")
        return found[0].value

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HEADER)
        for r in self.rows:
            writer.writerow((r.experiment, r.algorithm, r.param, r.metric, repr(r.value)))
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ExperimentReport":
        reader = csv.reader(io.StringIO(text))
        header = tuple(next(reader))
        if header != HEADER:
            raise ValueError(f"unexpected report header {header}")
        rows = [ReportRow(e, a, p, m, float(v)) for e, a, p, m, v in reader]
        return cls(rows)

    def to_json(self) -> str:
        doc = {"metadata": self.metadata, "rows": [asdict(r) for r in self.rows]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        doc = json.loads(text)
        return cls([ReportRow(**r) for r in doc["rows"]], dict(doc.get("metadata", {})))

    def dumps(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")


def build_metadata(seeds, stamp: bool = False) -> dict:
    """Run metadata; the timestamp is opt-in so repeated runs stay byte-identical."""
    from . import __version__

    meta = {"seeds": list(seeds), "version": f"itisc-{__version__}"}
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        meta["timestamp"] = int(epoch)
    elif stamp:
        import time

        meta["timestamp"] = int(time.time())
    return meta
