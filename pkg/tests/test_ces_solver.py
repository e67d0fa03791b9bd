"""Tests for the CES demand solver and its brute-force oracle."""
import numpy as np
import pytest

from src.core.ces_solver import (
    TOL_G,
    TOL_X,
    DemandProblem,
    ces_utility,
    grid_oracle,
    kkt_residual,
    lattice_floor,
    solve_budget_only,
    solve_demand,
)
from src.exceptions import DomainError, SolverRefusalError

INF = np.inf


def assert_feasible(prob, x, tol=TOL_X):
    assert np.all(x >= -tol)
    assert np.dot(prob.prices, x) <= prob.budget + tol
    assert x.sum() <= prob.total_cap + tol
    assert np.all(x <= prob.caps + tol)


def random_problem(rng, n):
    caps = np.where(rng.random(n) < 0.4, rng.uniform(0.5, 5.0, n), INF)
    return DemandProblem(
        weights=rng.uniform(0.5, 2.0, n),
        exponent=float(rng.choice([1.5, 2.0, 3.0])),
        prices=rng.uniform(0.5, 2.0, n),
        budget=float(rng.uniform(1.0, 10.0)),
        total_cap=float(rng.uniform(1.0, 10.0)) if rng.random() < 0.7 else INF,
        caps=caps
    )


class TestUtility:
    def test_zero_bundle(self):
        assert ces_utility([0, 0, 0], [1, 2, 3], 2) == 0

    def test_hand_values(self):
        assert ces_utility([1, 1], [1, 1], 2) == pytest.approx(4)
        assert ces_utility([1, 4], [4, 1], 2) == pytest.approx(16)

    def test_negative_component_rejected(self):
        with pytest.raises(DomainError):
            ces_utility([1, -0.1], [1, 1], 2)

    @pytest.mark.parametrize("r", [1.5, 2.0, 3.0])
    def test_concavity(self, r):
        rng = np.random.default_rng(7)
        w = rng.uniform(0.5, 2.0, 3)
        for _ in range(50):
            x, y = rng.uniform(0, 5, 3), rng.uniform(0, 5, 3)
            theta = rng.uniform(0.01, 0.99)
            mixed = ces_utility(theta * x + (1 - theta) * y, w, r)
            assert mixed >= theta * ces_utility(x, w, r) + (1 - theta) * ces_utility(y, w, r) - 1e-9


class TestBudgetOnly:
    @pytest.mark.parametrize("w,q,budget,expected", [
        ((1, 1), (1, 1), 10, (5, 5)),
        ((4, 1), (1, 1), 10, (8, 2)),
        ((1, 1), (2, 1), 12, (2, 8)),
    ])
    def test_closed_form(self, w, q, budget, expected):
        solution = solve_budget_only(w, 2.0, q, budget)
        assert solution.bundle == pytest.approx(expected)
        assert np.dot(q, solution.bundle) == pytest.approx(budget)
        assert solution.active_constraints == {"budget"}

    def test_agrees_with_general_solver_when_slack(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            w, q = rng.uniform(0.5, 2, 3), rng.uniform(0.5, 2, 3)
            closed = solve_budget_only(w, 2.5, q, 7.0)
            general = solve_demand(DemandProblem(weights=w, exponent=2.5, prices=q, budget=7.0))
            assert np.max(np.abs(closed.bundle - general.bundle)) <= TOL_X

    def test_zero_budget_rejected(self):
        with pytest.raises(DomainError):
            solve_budget_only((1, 1), 2.0, (1, 1), 0.0)


class TestSolveDemand:
    def test_total_cap_binds(self):
        prob = DemandProblem(weights=[4, 1], exponent=2, prices=[1, 1], budget=10, total_cap=6)
        solution = solve_demand(prob)
        assert solution.bundle == pytest.approx([4.8, 1.2])
        assert "total" in solution.active_constraints

    def test_good_cap_binds(self):
        prob = DemandProblem(weights=[4, 1], exponent=2, prices=[1, 1], budget=10, caps=[3, INF])
        solution = solve_demand(prob)
        assert solution.bundle == pytest.approx([3, 7])
        assert {"budget", "cap_0"} <= solution.active_constraints

    def test_budget_and_total_both_bind(self):
        prob = DemandProblem(weights=[1, 1], exponent=2, prices=[2, 1], budget=12, total_cap=9)
        solution = solve_demand(prob)
        assert solution.bundle == pytest.approx([3, 6])
        assert {"budget", "total"} <= solution.active_constraints
        assert solution.method == "active_set"
        assert kkt_residual(prob, solution) <= TOL_G

    def test_prices_sixteen_orders_apart(self):
        prob = DemandProblem(
            weights=[9.05e14, 4.44, 1e-6],
            exponent=2,
            prices=[19.68, 8.42e15, 4.57e16],
            budget=396.01,
            total_cap=9.912,
            caps=[240, 432, 360]
        )
        solution = solve_demand(prob)
        assert_feasible(prob, solution.bundle)
        assert solution.utility >= ces_utility([9.912, 0, 0], prob.weights, 2) * (1 - 1e-9)
        assert solution.bundle[0] == pytest.approx(9.912)

    def test_badly_scaled_beats_every_single_good_bundle(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            n = int(rng.integers(2, 5))
            prob = DemandProblem(
                weights=10.0 ** rng.uniform(-6, 15, n),
                exponent=float(rng.choice([1.5, 2.0, 3.0])),
                prices=10.0 ** rng.uniform(0, 17, n),
                budget=float(10.0 ** rng.uniform(1, 4)),
                total_cap=float(rng.uniform(1.0, 50.0)),
                caps=rng.uniform(50.0, 500.0, n)
            )
            solution = solve_demand(prob)
            assert_feasible(prob, solution.bundle, tol=1e-8 * prob.budget)
            for j in range(n):
                single = np.zeros(n)
                single[j] = min(prob.total_cap, prob.budget / prob.prices[j], prob.caps[j])
                assert solution.utility >= ces_utility(single, prob.weights, prob.exponent) * (1 - 1e-9)

    def test_zero_budget_or_requirement(self):
        for budget, total in ((0.0, 5.0), (5.0, 0.0)):
            prob = DemandProblem(weights=[1, 2], exponent=2, prices=[1, 1], budget=budget, total_cap=total)
            assert solve_demand(prob).bundle.tolist() == [0.0, 0.0]

    def test_zero_caps_everywhere(self):
        prob = DemandProblem(weights=[1, 2], exponent=2, prices=[1, 1], budget=10, caps=[0, 0])
        assert solve_demand(prob).bundle.tolist() == [0.0, 0.0]

    def test_unbounded_rejected(self):
        prob = DemandProblem(weights=[1, 2], exponent=2, prices=[1, 1], budget=INF)
        with pytest.raises(DomainError):
            solve_demand(prob)

    @pytest.mark.parametrize("kwargs", [
        {"prices": [0, 1]},
        {"weights": [1, -1]},
        {"exponent": 1.0},
        {"budget": -1},
        {"caps": [1, -1]},
    ])
    def test_invalid_problem_rejected(self, kwargs):
        base = {"weights": [1, 1], "exponent": 2.0, "prices": [1, 1], "budget": 5.0}
        with pytest.raises(DomainError):
            DemandProblem(**{**base, **kwargs})

    def test_monotone_in_budget(self):
        utilities = [
            solve_demand(DemandProblem(weights=[1, 3, 2], exponent=2, prices=[1, 2, 3], budget=b)).utility
            for b in (1, 2, 4, 8)
        ]
        assert utilities == sorted(utilities)

    def test_weight_scaling_leaves_bundle(self):
        prob = DemandProblem(weights=[1, 3, 2], exponent=2, prices=[1, 2, 3], budget=10, total_cap=4, caps=[1, INF, INF])
        scaled = DemandProblem(weights=[5, 15, 10], exponent=2, prices=[1, 2, 3], budget=10, total_cap=4, caps=[1, INF, INF])
        a, b = solve_demand(prob), solve_demand(scaled)
        assert b.bundle == pytest.approx(a.bundle, abs=1e-10)
        assert b.utility == pytest.approx(5 * a.utility)

    @pytest.mark.parametrize("r", [1.5, 2.0, 3.0])
    def test_kkt_residual_small(self, r):
        rng = np.random.default_rng(int(r * 10))
        for _ in range(30):
            prob = random_problem(rng, 3)
            prob = DemandProblem(
                weights=prob.weights, exponent=r, prices=prob.prices,
                budget=prob.budget, total_cap=prob.total_cap, caps=prob.caps
            )
            solution = solve_demand(prob)
            assert_feasible(prob, solution.bundle)
            assert kkt_residual(prob, solution) <= TOL_G


class TestOracle:
    def test_symmetric_lattice(self):
        prob = DemandProblem(weights=[1, 1], exponent=2, prices=[1, 1], budget=10)
        assert grid_oracle(prob, 101).bundle == pytest.approx([5, 5], abs=1e-9)

    def test_within_one_step(self):
        prob = DemandProblem(weights=[4, 1], exponent=2, prices=[1, 1], budget=10)
        oracle = grid_oracle(prob, 201)
        step = 10 / 200
        assert np.all(np.abs(oracle.bundle - np.array([8, 2])) <= step + 1e-12)

    def test_refuses_large_problems(self):
        prob = DemandProblem(weights=np.ones(5), exponent=2, prices=np.ones(5), budget=10)
        with pytest.raises(SolverRefusalError):
            grid_oracle(prob, 5)
        with pytest.raises(SolverRefusalError):
            grid_oracle(DemandProblem(weights=[1], exponent=2, prices=[1], budget=1), 1)

    def test_lattice_floor_is_feasible(self):
        prob = DemandProblem(weights=[2, 1], exponent=2, prices=[1, 3], budget=9, total_cap=5)
        x = solve_demand(prob).bundle
        floor = lattice_floor(prob, x, 51)
        assert np.all(floor <= x)
        assert_feasible(prob, floor)

    def test_oracle_equivalence(self):
        rng = np.random.default_rng(2024)
        for k in range(200):
            n = 2 if k % 2 else 3
            grid = 101 if n == 2 else 31
            prob = random_problem(rng, n)
            solution = solve_demand(prob)
            oracle = grid_oracle(prob, grid)
            assert_feasible(prob, solution.bundle)

            scale = max(1.0, oracle.utility)
            assert solution.utility >= oracle.utility - 1e-9 * scale
            # The floored optimum is a lattice point, so the oracle is at least as good
            gap = solution.utility - ces_utility(lattice_floor(prob, solution.bundle, grid), prob.weights, prob.exponent)
            assert oracle.utility >= solution.utility - gap - 1e-9 * scale
