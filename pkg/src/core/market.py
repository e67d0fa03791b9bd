"""Cost models, capacities and population generation."""
import logging
from typing import List, Sequence

import numpy as np

from src.core.streams import RandomStreams
from src.exceptions import DomainError
from src.models import ClientSpec, ConstantMC, CostModel, QuadraticTC, ScenarioConfig, WnpSpec

logger = logging.getLogger(__name__)


def total_cost(model: CostModel, load: float) -> float:
    """Total cost of serving `load` Mbps."""
    if load < 0:
        raise DomainError(f"load must be >= 0, got {load}")
    if isinstance(model, ConstantMC):
        return model.c * load
    if isinstance(model, QuadraticTC):
        return model.a + model.b * load + model.q * load * load
    raise DomainError(f"unknown cost model {type(model).__name__}")


def marginal_cost(model: CostModel, load: float) -> float:
    """Derivative of total_cost at `load`."""
    if load < 0:
        raise DomainError(f"load must be >= 0, got {load}")
    if isinstance(model, ConstantMC):
        return model.c
    if isinstance(model, QuadraticTC):
        return model.b + 2.0 * model.q * load
    raise DomainError(f"unknown cost model {type(model).__name__}")


def capacity(wnp: WnpSpec) -> float:
    """L_max = spectrum * efficiency in Mbps."""
    if wnp.spectrum_mhz <= 0 or wnp.efficiency <= 0:
        raise DomainError(
            f"provider {wnp.id}: spectrum and efficiency must be > 0 "
            f"(got {wnp.spectrum_mhz} MHz, {wnp.efficiency} bps/Hz)"
        )
    return wnp.spectrum_mhz * wnp.efficiency


def capacities(wnps: Sequence[WnpSpec]) -> np.ndarray:
    return np.array([capacity(wnp) for wnp in wnps], dtype=float)


def fair_marginal_costs(wnps: Sequence[WnpSpec]) -> np.ndarray:
    """MC_j evaluated at full capacity, the price the mechanism should discover."""
    return np.array([marginal_cost(wnp.cost, capacity(wnp)) for wnp in wnps], dtype=float)


def draw_srp(fair_costs: np.ndarray, tolerance: float, rng: np.random.Generator) -> np.ndarray:
    """rho_j = (MC_j / mean MC) * (1 + eps_j), eps_j ~ Uniform(-tol, tol)."""
    eps = rng.uniform(-tolerance, tolerance, size=len(fair_costs))
    return (fair_costs / fair_costs.mean()) * (1.0 + eps)


def generate_clients(config: ScenarioConfig, streams: RandomStreams) -> List[ClientSpec]:
    """Return the configured clients, or draw a population from the generator parameters."""
    if config.clients is not None:
        return list(config.clients)

    pop = config.population
    if pop.count == 0:
        return []

    caps = capacities(config.wnps)
    fair_costs = fair_marginal_costs(config.wnps)
    mean_cost = float(fair_costs.mean())
    mean_requirement = pop.demand_scale * caps.sum() / pop.count
    preference_scale = caps / caps.mean() if pop.capacity_weighted_preferences else np.ones_like(caps)

    clients = []
    for i in range(pop.count):
        rng = streams.client(i)
        requirement = mean_requirement * rng.uniform(1.0 - pop.requirement_spread, 1.0 + pop.requirement_spread)
        budget = requirement * mean_cost * rng.uniform(*pop.budget_range)
        weights = rng.uniform(*pop.weight_range, size=len(caps)) * preference_scale
        srp = draw_srp(fair_costs, pop.tolerance, rng)
        clients.append(ClientSpec(
            id=i,
            budget=float(budget),
            requirement=float(requirement),
            initial_weights=weights.tolist(),
            srp=srp.tolist()
        ))

    logger.debug(
        f"Generated {len(clients)} clients: mean requirement={mean_requirement:.3f} Mbps, "
        f"aggregate requirement={sum(c.requirement for c in clients):.1f} of {caps.sum():.1f} Mbps capacity"
    )
    return clients


def draw_initial_caps(config: ScenarioConfig, streams: RandomStreams) -> np.ndarray:
    """Initial price ceilings: explicit, or Uniform(lo, hi) * mean MC per provider."""
    if config.initial_caps is not None:
        return np.array(config.initial_caps, dtype=float)
    mean_cost = float(fair_marginal_costs(config.wnps).mean())
    low, high = config.initial_cap_range
    return np.array([
        streams.initial_cap(j).uniform(low * mean_cost, high * mean_cost)
        for j in range(config.n_providers)
    ])
