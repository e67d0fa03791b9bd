"""Convergence metrics and diagnostics over simulation traces."""
import logging
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.stats import linregress

from src.core.market import fair_marginal_costs, marginal_cost
from src.exceptions import DomainError
from src.models import ScenarioConfig, SimTrace, WnpSpec

logger = logging.getLogger(__name__)


class ScalingFit(NamedTuple):
    """log(runtime) = intercept + slope * log(F)."""
    slope: float
    intercept: float
    r_squared: float
    pcc_grid: List[int]
    durations: List[float]


def sum_abs_error(prices: Sequence[float], wnps: Sequence[WnpSpec]) -> float:
    """Sum over providers of |p_j - MC_j(L_max_j)|."""
    prices = np.asarray(prices, dtype=float)
    return float(np.abs(prices - fair_marginal_costs(wnps)).sum())


def windowed_mean_price(trace: SimTrace, last_k: int) -> float:
    """Mean of P_bar over the last `last_k` PCCs."""
    if last_k < 1:
        raise DomainError(f"window must be >= 1, got {last_k}")
    if len(trace.records) < last_k:
        raise DomainError(f"trace has {len(trace.records)} PCCs, window needs {last_k}")
    return float(np.mean([record.mean_price for record in trace.records[-last_k:]]))


def rolling_mean_price(trace: SimTrace, window: int) -> pd.Series:
    """Trailing mean of P_bar indexed by PCC; the first window-1 entries are NaN."""
    series = pd.Series([record.mean_price for record in trace.records], index=[record.f for record in trace.records])
    return series.rolling(window).mean()


def demand_consistency_check(
    trace: SimTrace,
    wnps: Optional[Sequence[WnpSpec]] = None,
    tol: float = 1e-9
) -> List[bool]:
    """MC_j(L_j) <= p_j at the final PCC, per provider."""
    if trace.final is None:
        raise DomainError("trace has no records")
    wnps = trace.config.wnps if wnps is None else wnps
    final = trace.final
    return [
        marginal_cost(wnp.cost, load) <= price + tol
        for wnp, price, load in zip(wnps, final.prices, final.loads)
    ]


def fit_runtime_scaling(
    config: ScenarioConfig,
    pcc_grid: Sequence[int] = (10, 20, 40, 80),
    workers: Optional[int] = None
) -> ScalingFit:
    """Run `config` for each F in the grid and fit log wall-clock against log F."""
    from src.core.engine import run_simulation

    if len(pcc_grid) < 2:
        raise DomainError("need at least two PCC counts to fit a slope")

    durations = []
    for pccs in pcc_grid:
        trace = run_simulation(config.model_copy(update={"max_pccs": int(pccs)}), workers=workers)
        durations.append(trace.duration)
        logger.info(f"F={pccs}: {trace.duration:.3f}s")

    fit = linregress(np.log(np.asarray(pcc_grid, dtype=float)), np.log(durations))
    return ScalingFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue ** 2),
        pcc_grid=[int(pccs) for pccs in pcc_grid],
        durations=durations
    )
