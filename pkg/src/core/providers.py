"""Provider strategy: honesty, price announcement, lottery allocation and profit."""
import logging
from typing import Sequence

import numpy as np

from src.core.market import capacity, marginal_cost, total_cost
from src.exceptions import DomainError
from src.models import (
    AlwaysHonest,
    AlwaysUnfair,
    CostModel,
    HonestUntilPcc,
    HonestWithProb,
    HonestyPolicy,
    WnpSpec,
)

logger = logging.getLogger(__name__)


def is_honest(policy: HonestyPolicy, f: int, rng: np.random.Generator) -> bool:
    """Evaluate a honesty policy at PCC f."""
    if isinstance(policy, AlwaysHonest):
        return True
    if isinstance(policy, AlwaysUnfair):
        return False
    if isinstance(policy, HonestWithProb):
        return bool(rng.random() < policy.sigma)
    if isinstance(policy, HonestUntilPcc):
        if f <= policy.k:
            return True
        return is_honest(policy.then, f, rng)
    raise DomainError(f"unknown honesty policy {type(policy).__name__}")


def announce_price(wnp: WnpSpec, cap: float, honest: bool) -> float:
    """Honest providers charge min(MC at capacity, cap); unfair ones charge the cap."""
    if cap <= 0:
        raise DomainError(f"provider {wnp.id}: cap must be > 0, got {cap}")
    if not honest:
        return float(cap)
    return float(min(marginal_cost(wnp.cost, capacity(wnp)), cap))


def allocate(requests: Sequence[float], available: float, order: Sequence[int]) -> np.ndarray:
    """Grant requests to one provider's remaining capacity.

    Args:
        requests: Requested Mbps per client, indexed by client id
        available: Remaining capacity L_A of the provider
        order: Lottery permutation of the requesting client ids

    Returns:
        Granted Mbps per client; the total is min(sum(requests), available)
    """
    requests = np.asarray(requests, dtype=float)
    if np.any(requests < 0):
        raise DomainError("requests must be >= 0")
    available = max(0.0, float(available))

    if requests.sum() <= available:
        return requests.copy()

    granted = np.zeros_like(requests)
    remaining = available
    for i in order:
        if remaining <= 0:
            break
        granted[i] = min(requests[i], remaining)
        remaining -= granted[i]
    return granted


def wnp_profit(price: float, load: float, model: CostModel, l_max: float) -> float:
    """Income p*L less the cost of the whole prepared capacity."""
    if load < 0 or load > l_max * (1.0 + 1e-12):
        raise DomainError(f"load must lie in [0, {l_max}], got {load}")
    return price * load - total_cost(model, l_max)
