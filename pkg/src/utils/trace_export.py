"""Trace export: flat tables and the run summary document."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from src.config import settings
from src.core.metrics import demand_consistency_check, windowed_mean_price
from src.exceptions import ExportError
from src.models import ExportFormat, SimTrace

logger = logging.getLogger(__name__)

SUMMARY_WINDOW = 30


def trace_frame(trace: SimTrace) -> pd.DataFrame:
    """One row per PCC with per-provider columns."""
    rows = []
    for record in trace.records:
        row: Dict[str, Any] = {"f": record.f}
        for prefix, values in (
            ("p", record.prices),
            ("cap", record.caps),
            ("L", record.loads),
            ("Q", record.first_requests),
            ("S", record.prb_totals),
            ("condition", [condition.value for condition in record.conditions]),
            ("honest", record.honesty_draws),
        ):
            for j, value in enumerate(values):
                row[f"{prefix}_{j}"] = value
        row["sum_abs_error"] = record.sum_abs_error
        row["mean_price"] = record.mean_price
        row["bai_count"] = record.bai_count
        for j, value in enumerate(record.next_caps):
            row[f"next_cap_{j}"] = value
        for j, value in enumerate(record.profits):
            row[f"profit_{j}"] = value
        rows.append(row)
    return pd.DataFrame(rows)


def trace_long_frame(trace: SimTrace) -> pd.DataFrame:
    """One row per PCC and provider."""
    rows = []
    for record in trace.records:
        for j in range(trace.n_providers):
            rows.append({
                "f": record.f,
                "wnp": j,
                "price": record.prices[j],
                "cap": record.caps[j],
                "load": record.loads[j],
                "first_request": record.first_requests[j],
                "prb_total": record.prb_totals[j],
                "condition": record.conditions[j].value,
                "honest": record.honesty_draws[j],
                "next_cap": record.next_caps[j],
                "profit": record.profits[j],
                "fair_cost": trace.fair_costs[j],
            })
    return pd.DataFrame(rows)


def run_summary(trace: SimTrace) -> Dict[str, Any]:
    """Config snapshot, seed and final metrics."""
    final = trace.final
    window = min(SUMMARY_WINDOW, len(trace.records))
    summary: Dict[str, Any] = {
        "name": trace.config.name,
        "seed": trace.seed,
        "started_at": trace.started_at.isoformat(),
        "pccs": len(trace.records),
        "duration_s": trace.duration,
        "fair_costs": trace.fair_costs,
        "mean_fair_cost": trace.mean_fair_cost,
        "config": trace.config.model_dump(mode="json"),
    }
    if final is not None:
        summary["final"] = {
            "f": final.f,
            "prices": final.prices,
            "caps": final.caps,
            "loads": final.loads,
            "prb_totals": final.prb_totals,
            "conditions": [condition.value for condition in final.conditions],
            "sum_abs_error": final.sum_abs_error,
            "mean_price": final.mean_price,
            "demand_consistent": demand_consistency_check(trace),
        }
        summary["windowed_mean_price"] = {"last_k": window, "value": windowed_mean_price(trace, window)}
    return summary


def _write(path: Path, writer) -> Path:
    try:
        writer(path)
    except OSError as e:
        raise ExportError(e.strerror or str(e), path=str(path)) from e
    logger.debug(f"Wrote {path}")
    return path


def export_trace(
    trace: SimTrace,
    fmt: Union[ExportFormat, str],
    directory: Union[str, Path],
    long_format: bool = False,
    float_format: Optional[str] = None
) -> List[Path]:
    """
    Write the per-PCC table in `fmt` plus run_summary.json into `directory`.

    Args:
        trace: Completed trace
        fmt: csv (wide table) or json (one object per PCC)
        directory: Created if missing
        long_format: Also write trace_long.csv
        float_format: printf-style float format for CSV; None keeps full precision

    Returns:
        Paths written
    """
    fmt = ExportFormat(fmt)
    directory = Path(directory)
    float_format = float_format if float_format is not None else settings.float_format
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ExportError(e.strerror or str(e), path=str(directory)) from e

    written = []
    if fmt == ExportFormat.CSV:
        frame = trace_frame(trace)
        written.append(_write(directory / "trace.csv", lambda p: frame.to_csv(p, index=False, float_format=float_format)))
    else:
        records = [record.model_dump(mode="json") for record in trace.records]
        written.append(_write(directory / "trace.json", lambda p: p.write_text(json.dumps(records, indent=2), encoding="utf-8")))

    if long_format:
        long_frame = trace_long_frame(trace)
        written.append(_write(
            directory / "trace_long.csv",
            lambda p: long_frame.to_csv(p, index=False, float_format=float_format)
        ))

    summary = run_summary(trace)
    written.append(_write(
        directory / "run_summary.json",
        lambda p: p.write_text(json.dumps(summary, indent=2), encoding="utf-8")
    ))
    return written
