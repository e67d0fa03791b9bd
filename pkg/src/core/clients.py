"""Client strategy: fair-price estimation, weight adjustment, PRB and request bundles."""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.core.ces_solver import DemandProblem, solve_demand
from src.exceptions import DomainError
from src.models import ClientSpec, MechanismParams

# Remainders below this fraction of the PCC allowance are treated as spent
_SNAP = 1e-12


@dataclass
class ClientPccView:
    """What a client knows and still holds during one PCC."""
    fair_estimate: np.ndarray
    weights: np.ndarray
    remaining_budget: float
    remaining_requirement: float
    budget: float = 0.0
    requirement: float = 0.0

    def charge(self, allocation: np.ndarray, prices: np.ndarray) -> None:
        """Apply the H(t+1) = H(t) - p.x and R(t+1) = R(t) - sum x recursions."""
        spent = float(np.dot(prices, allocation))
        received = float(np.sum(allocation))
        self.remaining_budget = max(0.0, self.remaining_budget - spent)
        self.remaining_requirement = max(0.0, self.remaining_requirement - received)
        if self.remaining_budget <= _SNAP * self.budget:
            self.remaining_budget = 0.0
        if self.remaining_requirement <= _SNAP * self.requirement:
            self.remaining_requirement = 0.0


def estimate_fair_prices(mean_price: float, srp: Sequence[float]) -> np.ndarray:
    """p_hat_j = P_bar * rho_j."""
    if mean_price <= 0:
        raise DomainError(f"mean price must be > 0, got {mean_price}")
    srp = np.asarray(srp, dtype=float)
    if np.any(srp <= 0):
        raise DomainError("suitable ratio of prices must be > 0")
    return mean_price * srp


def adjust_weights(
    initial_weights: Sequence[float],
    fair_estimate: Sequence[float],
    prices: Sequence[float],
    beta: float,
    floor: float
) -> np.ndarray:
    """w_j = max(floor, w0_j * (1 + beta * (p_hat_j - p_j) / p_j)).

    A provider announcing more than the client's fair estimate loses weight,
    one announcing less gains it.
    """
    prices = np.asarray(prices, dtype=float)
    if np.any(prices <= 0):
        raise DomainError("announced prices must be > 0")
    w0 = np.asarray(initial_weights, dtype=float)
    p_hat = np.asarray(fair_estimate, dtype=float)
    return np.maximum(floor, w0 * (1.0 + beta * (p_hat - prices) / prices))


def open_pcc_view(
    client: ClientSpec,
    mean_price: float,
    prices: np.ndarray,
    mechanism: MechanismParams,
    srp: Optional[Sequence[float]] = None
) -> ClientPccView:
    """Start-of-PCC view: fair estimate, adjusted weights and full allowances."""
    fair_estimate = estimate_fair_prices(mean_price, client.srp if srp is None else srp)
    weights = adjust_weights(client.initial_weights, fair_estimate, prices, mechanism.beta, mechanism.weight_floor)
    return ClientPccView(
        fair_estimate=fair_estimate,
        weights=weights,
        remaining_budget=client.budget,
        remaining_requirement=client.requirement,
        budget=client.budget,
        requirement=client.requirement
    )


def prepare_prb(client: ClientSpec, fair_estimate: Sequence[float], weights: Sequence[float], exponent: float) -> np.ndarray:
    """Perfect request bundle at the client's fair prices, ignoring provider capacities."""
    problem = DemandProblem(
        weights=weights,
        exponent=exponent,
        prices=fair_estimate,
        budget=client.budget,
        total_cap=client.requirement
    )
    return solve_demand(problem).bundle


def prepare_request_bundle(
    view: ClientPccView,
    prices: Sequence[float],
    available: Sequence[float],
    exponent: float
) -> np.ndarray:
    """Request for the current BAI under the remaining budget, requirement and provider availability."""
    problem = DemandProblem(
        weights=view.weights,
        exponent=exponent,
        prices=prices,
        budget=view.remaining_budget,
        total_cap=view.remaining_requirement,
        caps=np.maximum(np.asarray(available, dtype=float), 0.0)
    )
    return solve_demand(problem).bundle
