"""Static convergence charts (SVG)."""
import logging
from pathlib import Path
from typing import List, Optional, Union

import matplotlib
matplotlib.use('Agg')  # Non-interactive backend
import matplotlib.pyplot as plt

from src.config import settings
from src.exceptions import ExportError
from src.models import SimTrace

logger = logging.getLogger(__name__)


def _save(fig, path: Path, dpi: int) -> Path:
    try:
        fig.savefig(path, format="svg", dpi=dpi, bbox_inches="tight")
    except OSError as e:
        raise ExportError(e.strerror or str(e), path=str(path)) from e
    finally:
        plt.close(fig)
    return path


def render_charts(trace: SimTrace, directory: Union[str, Path], dpi: Optional[int] = None) -> List[Path]:
    """
    Draw the price trajectories and the error curve of a run.

    Args:
        trace: Completed trace
        directory: Output directory, created if missing
        dpi: Rasterisation hint for embedded elements

    Returns:
        [prices.svg, error.svg]
    """
    directory = Path(directory)
    dpi = dpi or settings.chart_dpi
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ExportError(e.strerror or str(e), path=str(directory)) from e

    pccs = [record.f for record in trace.records]
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]

    fig, ax = plt.subplots(figsize=(10, 6), facecolor="white")
    for j, fair_cost in enumerate(trace.fair_costs):
        color = colors[j % len(colors)]
        ax.plot(pccs, [record.prices[j] for record in trace.records], color=color, label=f"WNP {j + 1}")
        ax.axhline(fair_cost, color=color, linestyle="--", linewidth=1, label=f"MC {j + 1}")
    ax.set_xlabel("PCC")
    ax.set_ylabel("Announced price ($/Mbps)")
    ax.set_title(f"Prices - {trace.config.name}")
    ax.legend(ncol=2, fontsize=8)
    ax.grid(True, alpha=0.3)
    prices_path = _save(fig, directory / "prices.svg", dpi)

    fig, ax = plt.subplots(figsize=(10, 4), facecolor="white")
    ax.plot(pccs, [record.sum_abs_error for record in trace.records], color="black")
    ax.set_xlabel("PCC")
    ax.set_ylabel("Sum of absolute error ($/Mbps)")
    ax.set_title(f"Error - {trace.config.name}")
    ax.grid(True, alpha=0.3)
    error_path = _save(fig, directory / "error.svg", dpi)

    logger.info(f"Charts written to {directory}")
    return [prices_path, error_path]
