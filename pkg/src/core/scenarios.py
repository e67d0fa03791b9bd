"""Built-in market settings and scenario honesty assignments."""
import logging
from typing import Dict, List, Optional

from pydantic import ValidationError

from src.exceptions import ConfigError
from src.models import (
    AlwaysHonest,
    AlwaysUnfair,
    ClientPopulation,
    ConstantMC,
    HonestUntilPcc,
    HonestWithProb,
    ScenarioConfig,
    WnpSpec,
)

logger = logging.getLogger(__name__)

SETTINGS: Dict[str, dict] = {
    "setting1": {
        "spectrum_mhz": [30, 48, 60],
        "efficiency": [8, 9, 6],
        "marginal_costs": [19.68, 38.68, 28.73],
        "clients": 50,
    },
    "setting2": {
        "spectrum_mhz": [30, 48, 60, 49, 75, 27],
        "efficiency": [8, 9, 6, 5, 4, 7],
        "marginal_costs": [19.68, 38.68, 28.73, 9.79, 14.18, 6.97],
        "clients": 100,
    },
}

ALL_HONEST = "scenario1-all-honest"
ONE_HONEST = "scenario2-one-honest"
BEHAVIOR_CHANGE = "scenario3-behavior-change"
PROBABILISTIC = "scenario4-probabilistic"
CUSTOM = "custom"

SCENARIOS = {
    ALL_HONEST: "Every provider prices honestly",
    ONE_HONEST: "Provider 0 is honest, the others announce their caps",
    BEHAVIOR_CHANGE: "Providers 0 and 1 honest, provider 1 turns unfair after the switch PCC",
    PROBABILISTIC: "Provider 0 honest with probability sigma, the others announce their caps",
}

DEFAULT_SWITCH_PCC = {"setting1": 32, "setting2": 15}
DEFAULT_SIGMA = 0.9
DIVERGENCE_SWITCH_PCC = 18  # honest run-in before a sigma = 0 provider turns unfair
WINDOW_PCCS = 30


def load_preset(name: str) -> ScenarioConfig:
    """A built-in setting with every provider honest."""
    if name not in SETTINGS:
        raise ConfigError(f"unknown preset '{name}'; choose from {', '.join(SETTINGS)}", field="preset")
    setting = SETTINGS[name]
    wnps = [
        WnpSpec(id=j, spectrum_mhz=spectrum, efficiency=efficiency, cost=ConstantMC(c=mc))
        for j, (spectrum, efficiency, mc) in enumerate(
            zip(setting["spectrum_mhz"], setting["efficiency"], setting["marginal_costs"])
        )
    ]
    return ScenarioConfig(name=name, wnps=wnps, population=ClientPopulation(count=setting["clients"]))


def scenario_wnps(
    wnps: List[WnpSpec],
    scenario: str,
    sigma: Optional[float] = None,
    switch_pcc: Optional[int] = None,
    preset: Optional[str] = None
) -> List[WnpSpec]:
    """Re-assign honesty policies for a named scenario."""
    if scenario == CUSTOM:
        return list(wnps)
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario '{scenario}'; choose from {', '.join(SCENARIOS)}", field="scenario")

    n = len(wnps)
    unfair = AlwaysUnfair()
    if scenario == ALL_HONEST:
        policies = [AlwaysHonest()] * n
    elif scenario == ONE_HONEST:
        policies = [AlwaysHonest()] + [unfair] * (n - 1)
    elif scenario == BEHAVIOR_CHANGE:
        if n < 2:
            raise ConfigError("behavior-change scenario needs at least two providers", field="wnps")
        k = switch_pcc if switch_pcc is not None else DEFAULT_SWITCH_PCC.get(preset, DEFAULT_SWITCH_PCC["setting1"])
        policies = [AlwaysHonest(), HonestUntilPcc(k=k, then=unfair)] + [unfair] * (n - 2)
    else:
        sigma = DEFAULT_SIGMA if sigma is None else sigma
        if switch_pcc is None and sigma == 0:
            switch_pcc = DIVERGENCE_SWITCH_PCC
        first = HonestWithProb(sigma=sigma)
        if switch_pcc is not None:
            first = HonestUntilPcc(k=switch_pcc, then=first)
        policies = [first] + [unfair] * (n - 1)

    return [wnp.model_copy(update={"honesty": policy}) for wnp, policy in zip(wnps, policies)]


def build_scenario(
    preset: Optional[str] = "setting1",
    scenario: str = ALL_HONEST,
    sigma: Optional[float] = None,
    switch_pcc: Optional[int] = None,
    seed: Optional[int] = None,
    pccs: Optional[int] = None,
    base: Optional[ScenarioConfig] = None
) -> ScenarioConfig:
    """Compose a preset (or a loaded config) with a scenario's honesty policies.

    Args:
        preset: Built-in setting name, ignored when `base` is given
        scenario: One of SCENARIOS or "custom" to keep the configured policies
        sigma: Honesty probability for the probabilistic scenario
        switch_pcc: Last honest PCC of the switching provider
        seed: Overrides the config seed
        pccs: Overrides F

    Returns:
        Validated ScenarioConfig
    """
    config = base if base is not None else load_preset(preset)
    data = config.model_dump()
    if scenario != CUSTOM:
        data["name"] = f"{preset or config.name}/{scenario}"
    if seed is not None:
        data["seed"] = seed
    if pccs is not None:
        data["max_pccs"] = pccs

    try:
        wnps = scenario_wnps(config.wnps, scenario, sigma, switch_pcc, preset)
        data["wnps"] = [wnp.model_dump() for wnp in wnps]
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError.from_validation(e) from e
