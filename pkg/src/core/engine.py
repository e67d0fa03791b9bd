"""Simulation engine: the nested PCC / BAI loops."""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.config import settings
from src.core.clients import ClientPccView, open_pcc_view, prepare_prb, prepare_request_bundle
from src.core.market import capacities, draw_initial_caps, draw_srp, fair_marginal_costs, generate_clients
from src.core.metrics import sum_abs_error
from src.core.providers import allocate, announce_price, is_honest, wnp_profit
from src.core.regulator import classify, update_caps
from src.core.streams import RandomStreams
from src.models import ClientSpec, PccRecord, ScenarioConfig, SimTrace

logger = logging.getLogger(__name__)


class MarketState(BaseModel):
    """Mutable per-PCC market state, owned by the engine."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    f: int = Field(..., ge=1)
    caps: np.ndarray
    prices: Optional[np.ndarray] = None
    mean_price: float = float("nan")
    prb_totals: Optional[np.ndarray] = None
    loads: Optional[np.ndarray] = None
    first_requests: Optional[np.ndarray] = None
    allocations: Optional[np.ndarray] = None
    honesty_draws: Optional[np.ndarray] = None

    @field_validator("caps", mode="before")
    @classmethod
    def as_float_array(cls, v) -> np.ndarray:
        return np.asarray(v, dtype=float)

    def advance(self, next_caps: np.ndarray) -> None:
        """Move to the next PCC under the regulator's new caps."""
        self.f += 1
        self.caps = np.asarray(next_caps, dtype=float)
        self.prices = None
        self.mean_price = float("nan")
        self.prb_totals = None
        self.loads = None
        self.first_requests = None
        self.allocations = None
        self.honesty_draws = None


class BaiOutcome(NamedTuple):
    allocations: np.ndarray  # M x N
    loads: np.ndarray
    bai_count: int
    first_requests: np.ndarray  # aggregate requests of BAI 1, before any provider ran out


def _parallel_map(pool: Optional[ThreadPoolExecutor], fn: Callable, items: Iterable) -> list:
    """Order-preserving map, threaded when a pool is given."""
    if pool is None:
        return [fn(item) for item in items]
    return list(pool.map(fn, items))


def run_bai_loop(
    views: Sequence[ClientPccView],
    prices: np.ndarray,
    provider_capacities: np.ndarray,
    exponent: float,
    max_bais: int,
    lottery_rngs: Sequence[np.random.Generator],
    stop_tol: float = 1e-6,
    pool: Optional[ThreadPoolExecutor] = None
) -> BaiOutcome:
    """Iterate request / allocation rounds until nothing new is granted or T is reached.

    Each BAI every client requests under its remaining budget, requirement and the
    providers' remaining capacity; each provider serves its requesters in a fresh
    lottery order. Views are charged in place.

    Args:
        views: Client views, ordered by client id
        prices: Announced prices p
        provider_capacities: L_max per provider
        exponent: CES exponent r
        max_bais: T
        lottery_rngs: One generator per provider for this PCC
        stop_tol: Total newly granted Mbps below which the loop stops
        pool: Optional thread pool for the client requests

    Returns:
        BaiOutcome with the PCC's allocations, loads, number of BAIs run and
        the first BAI's aggregate requests
    """
    m, n = len(views), len(prices)
    allocations = np.zeros((m, n))
    available = np.asarray(provider_capacities, dtype=float).copy()
    first_requests = np.zeros(n)

    bai_count = 0
    for t in range(1, max_bais + 1):
        bai_count = t
        snapshot = available.copy()
        requests = np.array(
            _parallel_map(pool, lambda view: prepare_request_bundle(view, prices, snapshot, exponent), views),
            dtype=float
        ).reshape(m, n)
        if t == 1:
            first_requests = requests.sum(axis=0)

        granted = np.zeros((m, n))
        for j in range(n):
            order = lottery_rngs[j].permutation(np.flatnonzero(requests[:, j] > 0))
            granted[:, j] = allocate(requests[:, j], available[j], order)

        for i, view in enumerate(views):
            view.charge(granted[i], prices)
        allocations += granted
        available = np.maximum(provider_capacities - allocations.sum(axis=0), 0.0)

        new_total = float(granted.sum())
        logger.debug(f"BAI {t}: granted {new_total:.6f} Mbps, available {np.round(available, 3).tolist()}")
        if new_total < stop_tol:
            break

    return BaiOutcome(
        allocations=allocations,
        loads=allocations.sum(axis=0),
        bai_count=bai_count,
        first_requests=first_requests
    )


def regulated_loads(loads: np.ndarray, first_requests: np.ndarray, exclude_spillover: bool = True) -> np.ndarray:
    """Loads the regulator reads against S.

    With `exclude_spillover`, a provider is credited with at most what the
    clients asked of it in the first BAI; load it picked up later because
    another provider sold out does not count as demand for its price.
    """
    loads = np.asarray(loads, dtype=float)
    if not exclude_spillover:
        return loads
    return np.minimum(loads, np.asarray(first_requests, dtype=float))


class MarketSimulator:
    """Runs a scenario PCC by PCC.

    Client populations, capacities and fair costs are fixed at construction;
    every random draw comes from the scenario seed through RandomStreams.
    """

    def __init__(self, config: ScenarioConfig, workers: Optional[int] = None):
        self.config = config
        self.workers = max(1, workers if workers is not None else settings.workers)
        self.streams = RandomStreams(config.seed)
        self.capacities = capacities(config.wnps)
        self.fair_costs = fair_marginal_costs(config.wnps)
        self.clients: List[ClientSpec] = generate_clients(config, self.streams)

    def initial_state(self) -> MarketState:
        return MarketState(f=1, caps=draw_initial_caps(self.config, self.streams))

    def _srp(self, client: ClientSpec, f: int) -> Sequence[float]:
        population = self.config.population
        if not population.resample_srp_each_pcc:
            return client.srp
        return draw_srp(self.fair_costs, population.tolerance, self.streams.srp_resample(f, client.id))

    def run_pcc(self, state: MarketState, pool: Optional[ThreadPoolExecutor] = None) -> PccRecord:
        """One price controlling cycle; fills `state` and returns the record."""
        config = self.config
        mechanism = config.mechanism
        f = state.f
        wnps = config.wnps
        n = len(wnps)

        # Providers decide honesty and announce
        honesty = np.array([is_honest(wnp.honesty, f, self.streams.honesty(f, j)) for j, wnp in enumerate(wnps)])
        prices = np.array([announce_price(wnp, state.caps[j], honesty[j]) for j, wnp in enumerate(wnps)])
        mean_price = float(prices.mean())

        # Clients estimate fair prices and crowdsource their PRBs
        views = [open_pcc_view(client, mean_price, prices, mechanism, self._srp(client, f)) for client in self.clients]
        prbs = _parallel_map(
            pool,
            lambda pair: prepare_prb(pair[0], pair[1].fair_estimate, pair[1].weights, mechanism.ces_exponent),
            list(zip(self.clients, views))
        )
        prb_totals = np.sum(prbs, axis=0) if prbs else np.zeros(n)

        # Bit-rate allocation
        outcome = run_bai_loop(
            views,
            prices,
            self.capacities,
            mechanism.ces_exponent,
            config.max_bais,
            [self.streams.lottery(f, j) for j in range(n)],
            stop_tol=config.bai_stop_tol,
            pool=pool
        )

        # Regulator
        regulated = regulated_loads(outcome.loads, outcome.first_requests, mechanism.exclude_spillover)
        conditions = [
            classify(regulated[j], prb_totals[j], self.capacities[j], tol=config.bai_stop_tol)
            for j in range(n)
        ]
        next_caps = update_caps(
            prices,
            regulated,
            prb_totals,
            mechanism.xi,
            mechanism.gamma,
            mechanism.ratio_clamp,
            capacities=self.capacities,
            policy=mechanism.capacity_limited_policy,
            tol=config.bai_stop_tol
        )
        profits = [
            wnp_profit(prices[j], min(outcome.loads[j], self.capacities[j]), wnp.cost, self.capacities[j])
            for j, wnp in enumerate(wnps)
        ]

        state.prices = prices
        state.mean_price = mean_price
        state.prb_totals = prb_totals
        state.loads = outcome.loads
        state.first_requests = outcome.first_requests
        state.allocations = outcome.allocations
        state.honesty_draws = honesty

        for j in range(n):
            logger.debug(
                f"PCC {f} WNP {j}: {'honest' if honesty[j] else 'unfair'} p={prices[j]:.4f} "
                f"L={outcome.loads[j]:.3f} (first BAI {outcome.first_requests[j]:.3f}) S={prb_totals[j]:.3f} "
                f"{conditions[j].value} "
                f"cap {state.caps[j]:.4f} -> {next_caps[j]:.4f}"
            )

        error = sum_abs_error(prices, wnps)
        logger.info(f"PCC {f}: mean price={mean_price:.4f}, error={error:.4f}, BAIs={outcome.bai_count}")

        return PccRecord(
            f=f,
            caps=state.caps.tolist(),
            prices=prices.tolist(),
            loads=outcome.loads.tolist(),
            first_requests=outcome.first_requests.tolist(),
            prb_totals=np.asarray(prb_totals, dtype=float).tolist(),
            conditions=conditions,
            honesty_draws=honesty.tolist(),
            sum_abs_error=error,
            mean_price=mean_price,
            bai_count=outcome.bai_count,
            next_caps=next_caps.tolist(),
            profits=profits
        )

    def run(self, max_pccs: Optional[int] = None) -> SimTrace:
        """Run F PCCs from freshly drawn initial caps."""
        config = self.config
        pccs = config.max_pccs if max_pccs is None else max_pccs
        logger.info(
            f"Starting '{config.name}': N={config.n_providers}, M={len(self.clients)}, "
            f"F={pccs}, T={config.max_bais}, seed={config.seed}, workers={self.workers}"
        )

        trace = SimTrace(config=config, seed=config.seed, fair_costs=self.fair_costs.tolist())
        state = self.initial_state()

        pool_context = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 1 else nullcontext(None)
        with pool_context as pool:
            for _ in range(pccs):
                started = time.perf_counter()
                record = self.run_pcc(state, pool)
                trace.wall_clock.append(time.perf_counter() - started)
                trace.records.append(record)
                state.advance(np.array(record.next_caps))

        logger.info(f"Finished '{config.name}' in {trace.duration:.2f}s, final error={trace.final.sum_abs_error:.4f}")
        return trace


def run_pcc(state: MarketState, config: ScenarioConfig, workers: Optional[int] = None) -> PccRecord:
    """Run a single PCC of `config` from `state`."""
    return MarketSimulator(config, workers=workers).run_pcc(state)


def run_simulation(config: ScenarioConfig, workers: Optional[int] = None) -> SimTrace:
    """Run a whole scenario; deterministic for a fixed seed and any worker count."""
    return MarketSimulator(config, workers=workers).run()
