"""CES demand solver.

Maximises the CES utility

    u(x) = (sum_j (w_j * x_j) ** (1/r)) ** r,    r > 1

subject to a budget (q . x <= B), a total requirement (sum x <= R) and
per-good caps (0 <= x_j <= cap_j). The objective is separable and strictly
concave in the transformed form sum_j w_j**(1/r) * x_j**(1/r), so every
positive-cap coordinate is interior to its non-negativity bound and the
optimum is

    x_j = min(cap_j, K * y_j(theta)),    y_j = (w_j**(1/r) / (q_j + theta)) ** (r/(r-1))

with theta = mu/lambda the ratio of the total and budget multipliers.
"""
import logging
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize

from src.exceptions import DomainError, SolverRefusalError

logger = logging.getLogger(__name__)

TOL_X = 1e-8  # feasibility, Mbps
TOL_U = 1e-9  # relative utility
TOL_G = 1e-7  # relative KKT residual

_ACTIVE_REL = 1e-9
_MAX_ORACLE_DIM = 4


@dataclass(frozen=True)
class DemandProblem:
    """One CES maximisation instance."""
    weights: np.ndarray
    exponent: float
    prices: np.ndarray
    budget: float
    total_cap: float = np.inf
    caps: Optional[np.ndarray] = None

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        prices = np.asarray(self.prices, dtype=float)
        caps = np.full(len(weights), np.inf) if self.caps is None else np.asarray(self.caps, dtype=float)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "caps", caps)

        if not (len(weights) == len(prices) == len(caps)) or len(weights) == 0:
            raise DomainError("weights, prices and caps must be non-empty vectors of equal length")
        if self.exponent <= 1:
            raise DomainError(f"CES exponent must be > 1, got {self.exponent}")
        if np.any(weights <= 0):
            raise DomainError("weights must be > 0")
        if np.any(prices <= 0):
            raise DomainError("prices must be > 0")
        if self.budget < 0 or self.total_cap < 0 or np.any(caps < 0):
            raise DomainError("budget, total cap and per-good caps must be >= 0")

    @property
    def n(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class DemandSolution:
    """Optimal bundle with its utility and the constraints it sits on."""
    bundle: np.ndarray
    utility: float
    active_constraints: FrozenSet[str] = field(default_factory=frozenset)
    method: str = "closed_form"


def ces_utility(x: Sequence[float], w: Sequence[float], r: float) -> float:
    """(sum_j (w_j x_j)^(1/r))^r; the zero bundle has utility 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("bundle components must be >= 0")
    if r <= 1:
        raise DomainError(f"CES exponent must be > 1, got {r}")
    terms = np.power(np.asarray(w, dtype=float) * x, 1.0 / r)
    return float(np.sum(terms) ** r)


def solve_budget_only(w: Sequence[float], r: float, q: Sequence[float], budget: float) -> DemandSolution:
    """Closed form when only the budget binds: x_j = B a_j / (q . a)."""
    prob = DemandProblem(weights=w, exponent=r, prices=q, budget=budget)
    if budget <= 0:
        raise DomainError("budget must be > 0")
    s = r / (r - 1.0)
    log_a = np.log(prob.weights) / (r - 1.0) - s * np.log(prob.prices)
    a = np.exp(log_a - log_a.max())
    x = budget * a / np.dot(prob.prices, a)
    return DemandSolution(
        bundle=x,
        utility=ces_utility(x, prob.weights, r),
        active_constraints=frozenset({"budget"})
    )


def solve_demand(prob: DemandProblem) -> DemandSolution:
    """Constrained CES optimum of `prob`."""
    zero = np.zeros(prob.n)
    if prob.budget <= 0 or prob.total_cap <= 0 or not np.any(prob.caps > 0):
        return _finish(prob, zero, "trivial")

    r = prob.exponent
    s = r / (r - 1.0)
    log_pref = np.log(prob.weights) / (r - 1.0)

    # Budget alone (with caps)
    x = _water_fill(log_pref, prob.prices, prob.budget, prob.caps, s)
    if np.all(np.isfinite(x)):
        if x.sum() <= prob.total_cap * (1.0 + 1e-12):
            return _finish(prob, x, "closed_form")
    elif not np.isfinite(prob.total_cap):
        raise DomainError("demand problem is unbounded: no finite budget, total or caps")

    # Requirement alone (with caps)
    x = _water_fill(log_pref, np.ones(prob.n), prob.total_cap, prob.caps, s)
    if np.dot(prob.prices, x) <= prob.budget * (1.0 + 1e-12):
        return _finish(prob, x, "closed_form")

    # Both bind
    x = _both_binding(prob, log_pref, s)
    method = "active_set"
    if x is None:
        logger.warning(f"Multiplier search failed for N={prob.n}; falling back to SLSQP")
        x, method = _slsqp(prob), "slsqp"

    candidates = [_project(prob, c) for c in [x, *_single_constraint_candidates(prob, log_pref, s)]]
    utilities = [ces_utility(c, prob.weights, prob.exponent) for c in candidates]
    best = int(np.argmax(utilities))
    if utilities[best] <= utilities[0] * (1.0 + TOL_U):
        return _finish(prob, candidates[0], method)
    logger.debug(f"single-constraint candidate beat the {method} optimum: {utilities[best]:.6e} > {utilities[0]:.6e}")
    return _finish(prob, candidates[best], "single_constraint")


def grid_oracle(prob: DemandProblem, grid_points_per_axis: int) -> DemandSolution:
    """Exhaustive search over the feasible lattice; verification only."""
    if prob.n > _MAX_ORACLE_DIM:
        raise SolverRefusalError(f"grid oracle supports N <= {_MAX_ORACLE_DIM}, got {prob.n}")
    if grid_points_per_axis < 2:
        raise SolverRefusalError("grid oracle needs at least 2 points per axis")

    upper = _axis_bounds(prob)
    axes = [np.linspace(0.0, ub, grid_points_per_axis) for ub in upper]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)

    feasible = (points @ prob.prices <= prob.budget + _ACTIVE_REL * max(1.0, prob.budget))
    if np.isfinite(prob.total_cap):
        feasible &= points.sum(axis=1) <= prob.total_cap + _ACTIVE_REL * max(1.0, prob.total_cap)

    utility = np.sum(np.power(prob.weights * points, 1.0 / prob.exponent), axis=1) ** prob.exponent
    utility[~feasible] = -np.inf
    best = int(np.argmax(utility))
    x = points[best]
    return DemandSolution(
        bundle=x,
        utility=float(utility[best]),
        active_constraints=_active_constraints(prob, x),
        method="grid_oracle"
    )


def lattice_floor(prob: DemandProblem, x: Sequence[float], grid_points_per_axis: int) -> np.ndarray:
    """Round a bundle down onto the oracle lattice."""
    upper = _axis_bounds(prob)
    x = np.asarray(x, dtype=float)
    step = upper / (grid_points_per_axis - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        index = np.where(step > 0, np.floor(x / step), 0.0)
    index = np.clip(index, 0, grid_points_per_axis - 1)
    return index * step


def kkt_residual(prob: DemandProblem, solution: DemandSolution) -> float:
    """Relative norm of the gradient left after projecting out the active constraint normals."""
    x = solution.bundle
    positive = x > TOL_X
    if not positive.any():
        return 0.0
    r = prob.exponent
    grad = (1.0 / r) * np.power(prob.weights[positive], 1.0 / r) * np.power(x[positive], 1.0 / r - 1.0)

    normals = []
    if "budget" in solution.active_constraints:
        normals.append(prob.prices[positive])
    if "total" in solution.active_constraints:
        normals.append(np.ones(positive.sum()))
    for k, j in enumerate(np.flatnonzero(positive)):
        if f"cap_{j}" in solution.active_constraints:
            unit = np.zeros(positive.sum())
            unit[k] = 1.0
            normals.append(unit)
    if not normals:
        return 1.0

    basis = np.array(normals).T
    multipliers, *_ = np.linalg.lstsq(basis, grad, rcond=None)
    return float(np.linalg.norm(grad - basis @ multipliers) / np.linalg.norm(grad))


# ============================================================================
# Internals
# ============================================================================

def _water_fill(log_pref: np.ndarray, coef: np.ndarray, limit: float, caps: np.ndarray, s: float) -> np.ndarray:
    """Optimum under a single linear constraint coef . x <= limit plus caps."""
    n = len(coef)
    x = np.zeros(n)
    if not np.isfinite(limit) or np.dot(coef, caps) <= limit:
        return caps.copy()
    if limit <= 0:
        return x

    capped = np.zeros(n, dtype=bool)
    for _ in range(n + 1):
        free = (caps > 0) & ~capped
        if not free.any():
            break
        remaining = limit - np.dot(coef[capped], caps[capped])
        log_a = log_pref[free] - s * np.log(coef[free])
        a = np.exp(log_a - log_a.max())
        x_free = remaining * a / np.dot(coef[free], a)

        x[:] = 0.0
        x[capped] = caps[capped]
        x[free] = x_free
        over = x_free > caps[free]
        if not over.any():
            return x
        # Capping a violator only frees resource for the others, so every violator stays capped
        capped[np.flatnonzero(free)[over]] = True
    return np.minimum(x, caps)


def _both_binding(prob: DemandProblem, log_pref: np.ndarray, s: float) -> Optional[np.ndarray]:
    """Budget and requirement both tight.

    For theta = mu/lambda >= 0 the optimum fills the requirement R along the
    shape y_j = (w_j**(1/r) / (q_j + theta)) ** s, capped. Spending q . x(theta)
    rises with theta from the budget-only shape to the requirement-only shape,
    and theta is its root against B. The search runs over log(theta) so that
    prices many orders of magnitude apart keep their resolution; B never enters
    the fill, which keeps it exact whatever the scale of theta * R.
    """
    q, caps = prob.prices, prob.caps
    budget, total = prob.budget, prob.total_cap
    ones = np.ones(prob.n)

    def fill(theta: float) -> np.ndarray:
        return _water_fill(log_pref - s * np.log(q + theta), ones, total, caps, s)

    def overspend(log_theta: float) -> float:
        return float(np.dot(q, fill(np.exp(log_theta))) - budget) / budget

    lo = float(np.log(q.min())) - 40.0
    hi = float(np.log(q.max())) + 40.0
    if overspend(lo) >= 0 or overspend(hi) <= 0:
        logger.debug("no sign change for the requirement multiplier")
        return None

    try:
        log_theta = brentq(overspend, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=500)
    except (ValueError, RuntimeError) as e:
        logger.debug(f"multiplier root search failed: {e}")
        return None
    return fill(np.exp(log_theta))


def _single_constraint_candidates(prob: DemandProblem, log_pref: np.ndarray, s: float) -> List[np.ndarray]:
    """Each single-constraint optimum shrunk until the other constraint holds."""
    budget_fill = _water_fill(log_pref, prob.prices, prob.budget, prob.caps, s)
    total_fill = _water_fill(log_pref, np.ones(prob.n), prob.total_cap, prob.caps, s)
    candidates = []
    for x in (budget_fill, total_fill):
        if not np.all(np.isfinite(x)):
            continue
        scale = min(1.0, prob.budget / max(float(np.dot(prob.prices, x)), 1e-300))
        if np.isfinite(prob.total_cap):
            scale = min(scale, prob.total_cap / max(float(x.sum()), 1e-300))
        candidates.append(x * scale)
    return candidates


def _slsqp(prob: DemandProblem) -> np.ndarray:
    """General-purpose fallback from a feasible interior start."""
    upper = _axis_bounds(prob)
    alpha = 1.0 / prob.exponent
    coef = np.power(prob.weights, alpha)
    floor = 1e-12

    def objective(x):
        return -float(np.sum(coef * np.power(np.maximum(x, floor), alpha)))

    def gradient(x):
        return -alpha * coef * np.power(np.maximum(x, floor), alpha - 1.0)

    constraints = [
        {"type": "ineq", "fun": lambda x: prob.budget - prob.prices @ x, "jac": lambda x: -prob.prices},
    ]
    if np.isfinite(prob.total_cap):
        constraints.append({"type": "ineq", "fun": lambda x: prob.total_cap - x.sum(), "jac": lambda x: -np.ones(prob.n)})

    start = upper / (2.0 * prob.n)
    result = minimize(
        objective,
        start,
        jac=gradient,
        method="SLSQP",
        bounds=list(zip(np.zeros(prob.n), upper)),
        constraints=constraints,
        options={"ftol": 1e-15, "maxiter": 1000}
    )
    if not result.success:
        logger.warning(f"SLSQP fallback did not converge: {result.message}")
    return np.asarray(result.x, dtype=float)


def _axis_bounds(prob: DemandProblem) -> np.ndarray:
    upper = np.minimum(prob.caps, np.minimum(prob.total_cap, prob.budget / prob.prices))
    if not np.all(np.isfinite(upper)):
        raise DomainError("problem has an unbounded axis")
    return upper


def _project(prob: DemandProblem, x: np.ndarray) -> np.ndarray:
    """Clip to the caps, then shrink onto the budget and requirement."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, prob.caps)
    spend = float(np.dot(prob.prices, x))
    if spend > prob.budget:
        x = x * (prob.budget / spend)
    total = float(x.sum())
    if total > prob.total_cap:
        x = x * (prob.total_cap / total)
    return x


def _finish(prob: DemandProblem, x: np.ndarray, method: str) -> DemandSolution:
    """Project round-off back onto the feasible set and tag the active constraints."""
    x = _project(prob, x)
    return DemandSolution(
        bundle=x,
        utility=ces_utility(x, prob.weights, prob.exponent),
        active_constraints=_active_constraints(prob, x),
        method=method
    )


def _active_constraints(prob: DemandProblem, x: np.ndarray) -> FrozenSet[str]:
    tags = set()
    if np.dot(prob.prices, x) >= prob.budget - _ACTIVE_REL * max(1.0, prob.budget):
        tags.add("budget")
    if np.isfinite(prob.total_cap) and x.sum() >= prob.total_cap - _ACTIVE_REL * max(1.0, prob.total_cap):
        tags.add("total")
    for j in range(prob.n):
        if np.isfinite(prob.caps[j]) and x[j] >= prob.caps[j] - _ACTIVE_REL * max(1.0, prob.caps[j]):
            tags.add(f"cap_{j}")
        if x[j] <= TOL_X:
            tags.add(f"nonneg_{j}")
    return frozenset(tags)
