"""Tests for the provider strategy."""
import numpy as np
import pytest

from src.core.providers import allocate, announce_price, is_honest, wnp_profit
from src.exceptions import DomainError
from src.models import (
    AlwaysHonest,
    AlwaysUnfair,
    ConstantMC,
    HonestUntilPcc,
    HonestWithProb,
    QuadraticTC,
)

from conftest import make_wnp


class TestHonesty:
    def test_fixed_policies(self):
        rng = np.random.default_rng(0)
        assert is_honest(AlwaysHonest(), 1, rng)
        assert not is_honest(AlwaysUnfair(), 1, rng)

    def test_honest_until_switch(self):
        policy = HonestUntilPcc(k=3, then=AlwaysUnfair())
        rng = np.random.default_rng(0)
        assert [is_honest(policy, f, rng) for f in range(1, 6)] == [True, True, True, False, False]

    def test_probability_extremes(self):
        rng = np.random.default_rng(1)
        assert not any(is_honest(HonestWithProb(sigma=0.0), f, rng) for f in range(1, 200))
        assert all(is_honest(HonestWithProb(sigma=1.0), f, rng) for f in range(1, 200))

    def test_probability_frequency(self):
        rng = np.random.default_rng(2)
        draws = [is_honest(HonestWithProb(sigma=0.5), f, rng) for f in range(1, 4001)]
        assert 0.45 <= np.mean(draws) <= 0.55


class TestAnnounce:
    def test_honest_below_cap(self):
        assert announce_price(make_wnp(0, 19.68), 25.0, honest=True) == 19.68

    def test_honest_capped(self):
        assert announce_price(make_wnp(0, 19.68), 15.0, honest=True) == 15.0

    def test_unfair_announces_cap(self):
        assert announce_price(make_wnp(0, 19.68), 41.05, honest=False) == 41.05

    def test_quadratic_uses_mc_at_capacity(self):
        wnp = make_wnp(0, 1.0).model_copy(update={"cost": QuadraticTC(b=2.0, q=0.05)})
        assert announce_price(wnp, 100.0, honest=True) == pytest.approx(12.0)

    def test_non_positive_cap_rejected(self):
        with pytest.raises(DomainError):
            announce_price(make_wnp(0, 10.0), 0.0, honest=True)


class TestAllocate:
    def test_undersubscribed_grants_all(self):
        assert allocate([2.0, 3.0], 10.0, [1, 0]).tolist() == [2.0, 3.0]

    def test_lottery_order(self):
        assert allocate([6.0, 5.0, 4.0], 10.0, [1, 0, 2]).tolist() == [5.0, 5.0, 0.0]

    def test_no_capacity(self):
        assert allocate([6.0, 5.0], 0.0, [0, 1]).tolist() == [0.0, 0.0]

    def test_total_is_min_of_request_and_capacity(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            requests = rng.uniform(0, 5, 6)
            available = float(rng.uniform(0, 30))
            granted = allocate(requests, available, rng.permutation(6))
            assert granted.sum() == pytest.approx(min(requests.sum(), available))
            assert np.all(granted <= requests)

    def test_negative_request_rejected(self):
        with pytest.raises(DomainError):
            allocate([1.0, -1.0], 5.0, [0, 1])


class TestProfit:
    def test_income_less_prepared_cost(self):
        assert wnp_profit(12.0, 80.0, ConstantMC(c=10.0), 100.0) == pytest.approx(-40.0)
        assert wnp_profit(12.8, 100.0, ConstantMC(c=12.032), 100.0) == pytest.approx(76.8)

    def test_idle_provider_pays_full_cost(self):
        assert wnp_profit(12.0, 0.0, ConstantMC(c=10.0), 100.0) == pytest.approx(-1000.0)

    def test_fair_price_at_capacity_breaks_even(self):
        assert wnp_profit(10.0, 100.0, ConstantMC(c=10.0), 100.0) == pytest.approx(0.0)

    def test_load_outside_capacity_rejected(self):
        with pytest.raises(DomainError):
            wnp_profit(10.0, 101.0, ConstantMC(c=10.0), 100.0)
        with pytest.raises(DomainError):
            wnp_profit(10.0, -1.0, ConstantMC(c=10.0), 100.0)
