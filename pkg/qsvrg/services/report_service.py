# qsvrg/services/report_service.py

import bisect
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from ..core.exceptions import IncompatibleTracesError
from ..core.schemas import TraceFile
from ..storage.trace_store import format_float

logger = logging.getLogger(__name__)

G_STAR_RTOL = 1e-9


def interpolate_log(points: Sequence[Tuple[float, float]], passes: float) -> Optional[float]:
    """Suboptimality at ``passes``, geometric between neighbouring recorded points.

    Returns None outside the recorded range. Recorded points are returned as stored;
    a zero endpoint falls back to linear interpolation.
    """
    xs = [p for p, _ in points]
    if not xs or passes < xs[0] or passes > xs[-1]:
        return None
    i = bisect.bisect_left(xs, passes)
    if xs[i] == passes:
        return points[i][1]
    (x0, y0), (x1, y1) = points[i - 1], points[i]
    t = (passes - x0) / (x1 - x0)
    if y0 > 0 and y1 > 0:
        return math.exp((1.0 - t) * math.log(y0) + t * math.log(y1))
    return (1.0 - t) * y0 + t * y1


@dataclass
class ReportRow:
    passes: float
    values: List[Optional[float]]
    winner: Optional[str]


@dataclass
class ComparisonTable:
    columns: List[str]
    rows: List[ReportRow] = field(default_factory=list)
    g_star: float = 0.0
    dataset: str = ""
    problem: str = ""

    def to_tsv(self) -> str:
        lines = ["\t".join(["passes", *self.columns, "winner"])]
        for row in self.rows:
            cells = [format_float(row.passes)]
            cells += ["" if v is None else format_float(v) for v in row.values]
            cells.append(row.winner or "")
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "problem": self.problem,
            "g_star": self.g_star,
            "columns": self.columns,
            "rows": [
                {
                    "passes": row.passes,
                    "values": dict(zip(self.columns, row.values)),
                    "winner": row.winner,
                }
                for row in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class ReportService:
    """Aligns several traces of one problem on a shared pass grid"""

    def check_compatible(self, traces: Sequence[TraceFile]):
        first = traces[0]
        for trace in traces[1:]:
            if not math.isclose(trace.g_star, first.g_star, rel_tol=G_STAR_RTOL, abs_tol=0.0):
                raise IncompatibleTracesError(
                    f"{trace.label()} has g* = {trace.g_star!r} but {first.label()} has "
                    f"g* = {first.g_star!r}; traces come from different problems"
                )

    def column_labels(self, traces: Sequence[TraceFile]) -> List[str]:
        labels: List[str] = []
        for trace in traces:
            label = base = trace.label()
            suffix = 2
            while label in labels:
                label = f"{base}~{suffix}"
                suffix += 1
            labels.append(label)
        return labels

    def build(self, traces: Sequence[TraceFile]) -> ComparisonTable:
        if not traces:
            raise IncompatibleTracesError("at least one trace is needed for a report")
        self.check_compatible(traces)
        columns = self.column_labels(traces)
        grid = sorted({p for trace in traces for p, _ in trace.points})

        table = ComparisonTable(
            columns=columns,
            g_star=traces[0].g_star,
            dataset=traces[0].dataset,
            problem=traces[0].problem,
        )
        for passes in grid:
            values = [interpolate_log(trace.points, passes) for trace in traces]
            winner = _winner(columns, values)
            table.rows.append(ReportRow(passes=passes, values=values, winner=winner))
        logger.info(f"Report over {len(traces)} traces and {len(grid)} checkpoints")
        return table

    def write(
        self,
        table: ComparisonTable,
        tsv: Optional[Path] = None,
        json_path: Optional[Path] = None,
    ):
        if tsv is not None:
            Path(tsv).write_text(table.to_tsv(), encoding="utf-8")
            logger.info(f"Wrote TSV report to {tsv}")
        if json_path is not None:
            Path(json_path).write_text(table.to_json() + "\n", encoding="utf-8")
            logger.info(f"Wrote JSON report to {json_path}")


def _winner(columns: List[str], values: List[Optional[float]]) -> Optional[str]:
    """Column with the lowest value; ties go to the first column"""
    best = None
    for label, value in zip(columns, values):
        if value is not None and (best is None or value < best[1]):
            best = (label, value)
    return best[0] if best else None
