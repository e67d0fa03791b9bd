"""Regulator strategy: PCC classification and price-cap update."""
import logging
from typing import Optional, Sequence

import numpy as np

from src.exceptions import DomainError
from src.models import CapacityLimitedPolicy, PccCondition

logger = logging.getLogger(__name__)


def classify(load: float, prb_total: float, l_max: float, tol: float = 0.0) -> PccCondition:
    """Read a provider's load against the crowdsourced demand S."""
    if load >= prb_total - tol:
        return PccCondition.FAIR_PRICED
    if load >= l_max - tol:
        return PccCondition.CAPACITY_LIMITED
    return PccCondition.OVER_PRICED


def update_caps(
    prices: Sequence[float],
    loads: Sequence[float],
    prb_totals: Sequence[float],
    xi: float,
    gamma: float,
    ratio_clamp: float,
    capacities: Optional[Sequence[float]] = None,
    policy: CapacityLimitedPolicy = CapacityLimitedPolicy.EQ12,
    tol: float = 0.0
) -> np.ndarray:
    """Caps for the next PCC.

    ratio = clamp(L/S, 0, ratio_clamp) with S = 0 mapped to ratio_clamp.
    L >= S rewards with p * ratio * xi; otherwise p * max(ratio, gamma).
    With `capacities` and the REWARD policy, a sold-out provider short of S
    gets xi * p instead.
    """
    p = np.asarray(prices, dtype=float)
    load = np.asarray(loads, dtype=float)
    demand = np.asarray(prb_totals, dtype=float)
    if np.any(p <= 0):
        raise DomainError("prices must be > 0")
    if np.any(load < 0) or np.any(demand < 0):
        raise DomainError("loads and PRB totals must be >= 0")

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(demand > 0, load / demand, ratio_clamp)
    ratio = np.clip(ratio, 0.0, ratio_clamp)

    fair = load >= demand - tol
    # Within tol of S counts as L = S
    caps = np.where(fair, p * np.maximum(ratio, 1.0) * xi, p * np.maximum(ratio, gamma))

    if capacities is not None and policy == CapacityLimitedPolicy.REWARD:
        limited = ~fair & (load >= np.asarray(capacities, dtype=float) - tol)
        caps = np.where(limited, p * xi, caps)
    return caps
