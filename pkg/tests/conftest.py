"""Shared fixtures."""
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.scenarios import load_preset
from src.models import (
    AlwaysHonest,
    AlwaysUnfair,
    ClientPopulation,
    ClientSpec,
    ConstantMC,
    ScenarioConfig,
    WnpSpec,
)


def make_wnp(j, c, capacity=100.0, honesty=None):
    """Provider with efficiency 1 so spectrum equals capacity."""
    return WnpSpec(
        id=j,
        spectrum_mhz=capacity,
        efficiency=1.0,
        cost=ConstantMC(c=c),
        honesty=honesty or AlwaysHonest()
    )


@pytest.fixture
def setting1():
    return load_preset("setting1")


@pytest.fixture
def setting2():
    return load_preset("setting2")


@pytest.fixture
def small_setting1(setting1):
    """Setting 1 with a small population for fast engine runs."""
    return setting1.model_copy(update={"population": ClientPopulation(count=12), "max_pccs": 5})


@pytest.fixture
def honest_market():
    """Two honest providers priced at MC, budgets ample, SRP exact."""
    wnps = [make_wnp(0, 10.0), make_wnp(1, 20.0)]
    clients = [
        ClientSpec(id=i, budget=1e6, requirement=10.0, initial_weights=[1.0, 1.0 + 0.1 * i], srp=[0.5, 1.5])
        for i in range(3)
    ]
    return ScenarioConfig(wnps=wnps, clients=clients, initial_caps=[15.0, 30.0], max_pccs=3)


@pytest.fixture
def one_deviant_market():
    """Provider 0 unfair at twice its MC, budgets binding."""
    wnps = [
        make_wnp(0, 10.0, honesty=AlwaysUnfair()),
        make_wnp(1, 20.0),
        make_wnp(2, 30.0),
    ]
    clients = [
        ClientSpec(id=i, budget=150.0, requirement=10.0, initial_weights=[1.0, 1.0, 1.0], srp=[0.5, 1.0, 1.5])
        for i in range(3)
    ]
    return ScenarioConfig(wnps=wnps, clients=clients, initial_caps=[20.0, 40.0, 60.0], max_pccs=1)


@pytest.fixture
def spillover_market():
    """Cheap honest provider 0 sells out; unfair provider 1 only gains the overflow."""
    wnps = [
        make_wnp(0, 10.0, capacity=10.0),
        make_wnp(1, 20.0, capacity=100.0, honesty=AlwaysUnfair()),
    ]
    clients = [
        ClientSpec(id=i, budget=100.0, requirement=10.0, initial_weights=[1.0, 1.0], srp=[2.0 / 3.0, 4.0 / 3.0])
        for i in range(3)
    ]
    return ScenarioConfig(wnps=wnps, clients=clients, initial_caps=[15.0, 40.0], max_pccs=1)
