"""Data models for the CSPC market simulator."""
from datetime import datetime
from enum import Enum
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# ============================================================================
# Cost models
# ============================================================================

class ConstantMC(BaseModel):
    """Constant marginal cost: TC(l) = c*l."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["constant_mc"] = "constant_mc"
    c: float = Field(..., gt=0, description="Marginal cost, currency per Mbps")


class QuadraticTC(BaseModel):
    """Quadratic total cost: TC(l) = a + b*l + q*l^2, MC(l) = b + 2*q*l."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["quadratic_tc"] = "quadratic_tc"
    a: float = Field(0.0, ge=0, description="Fixed cost, currency")
    b: float = Field(..., gt=0, description="Linear cost, currency per Mbps")
    q: float = Field(..., gt=0, description="Curvature, currency per Mbps^2")

    @classmethod
    def calibrated(
        cls,
        target_mc: float,
        capacity: float,
        curvature_share: float = 0.5,
        fixed_cost: float = 0.0
    ) -> "QuadraticTC":
        """Build a model whose marginal cost at full capacity equals target_mc.

        Args:
            target_mc: Marginal cost wanted at l = capacity
            capacity: Provider capacity L_max in Mbps
            curvature_share: Fraction of target_mc contributed by the 2*q*l term, in (0, 1)
            fixed_cost: The constant term a
        """
        if not 0 < curvature_share < 1:
            raise ValueError("curvature_share must lie in (0, 1)")
        if target_mc <= 0 or capacity <= 0:
            raise ValueError("target_mc and capacity must be positive")
        return cls(
            a=fixed_cost,
            b=target_mc * (1.0 - curvature_share),
            q=target_mc * curvature_share / (2.0 * capacity)
        )


CostModel = Annotated[Union[ConstantMC, QuadraticTC], Field(discriminator="kind")]


# ============================================================================
# Honesty policies
# ============================================================================

class AlwaysHonest(BaseModel):
    """Announce min(MC at capacity, cap) every PCC."""
    model_config = ConfigDict(frozen=True)
    kind: Literal["always_honest"] = "always_honest"


class AlwaysUnfair(BaseModel):
    """Announce the cap every PCC."""
    model_config = ConfigDict(frozen=True)
    kind: Literal["always_unfair"] = "always_unfair"


class HonestWithProb(BaseModel):
    """Independent Bernoulli(sigma) honesty draw every PCC."""
    model_config = ConfigDict(frozen=True)
    kind: Literal["honest_with_prob"] = "honest_with_prob"
    sigma: float = Field(..., ge=0.0, le=1.0)


class HonestUntilPcc(BaseModel):
    """Honest for PCCs f <= k, then follow another policy."""
    model_config = ConfigDict(frozen=True)
    kind: Literal["honest_until_pcc"] = "honest_until_pcc"
    k: int = Field(..., ge=0)
    then: "HonestyPolicy" = Field(default_factory=AlwaysUnfair)


HonestyPolicy = Annotated[
    Union[AlwaysHonest, AlwaysUnfair, HonestWithProb, HonestUntilPcc],
    Field(discriminator="kind")
]

HonestUntilPcc.model_rebuild()


# ============================================================================
# Market participants
# ============================================================================

class WnpSpec(BaseModel):
    """A wireless network provider."""
    model_config = ConfigDict(frozen=True)

    id: int = Field(..., ge=0)
    spectrum_mhz: float = Field(..., gt=0, description="Allocated spectrum, MHz")
    efficiency: float = Field(..., gt=0, description="Technology efficiency, bps/Hz")
    cost: CostModel
    honesty: HonestyPolicy = Field(default_factory=AlwaysHonest)

    @property
    def capacity(self) -> float:
        """Maximum bit-rate L_max = spectrum * efficiency, Mbps."""
        return self.spectrum_mhz * self.efficiency


class ClientSpec(BaseModel):
    """A client with a per-PCC budget and bit-rate requirement."""
    model_config = ConfigDict(frozen=True)

    id: int = Field(..., ge=0)
    budget: float = Field(..., gt=0, description="Budget per PCC, currency")
    requirement: float = Field(..., gt=0, description="Required bit-rate, Mbps")
    initial_weights: List[float] = Field(..., min_length=1)
    srp: List[float] = Field(..., min_length=1, description="Suitable ratio of prices")

    @field_validator("initial_weights", "srp")
    @classmethod
    def validate_positive(cls, v: List[float]) -> List[float]:
        """Every component must be strictly positive."""
        if any(value <= 0 for value in v):
            raise ValueError("all components must be > 0")
        return v

    @model_validator(mode="after")
    def validate_lengths(self) -> "ClientSpec":
        if len(self.initial_weights) != len(self.srp):
            raise ValueError("initial_weights and srp must have the same length")
        return self


class ClientPopulation(BaseModel):
    """Generator parameters for a synthetic client population."""
    model_config = ConfigDict(frozen=True)

    count: int = Field(50, ge=0, description="Number of clients M")
    demand_scale: float = Field(1.0, gt=0, description="Aggregate mean requirement / total capacity")
    requirement_spread: float = Field(0.5, ge=0, lt=1)
    budget_range: Tuple[float, float] = (0.8, 1.5)
    weight_range: Tuple[float, float] = (0.8, 1.2)
    capacity_weighted_preferences: bool = False
    tolerance: float = Field(0.1, ge=0, lt=1, description="SRP estimation tolerance tau")
    resample_srp_each_pcc: bool = False

    @field_validator("budget_range", "weight_range")
    @classmethod
    def validate_range(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        low, high = v
        if not 0 < low <= high:
            raise ValueError("range must satisfy 0 < low <= high")
        return v


# ============================================================================
# Mechanism and scenario configuration
# ============================================================================

class CapacityLimitedPolicy(str, Enum):
    """How the regulator treats a provider that sold its whole capacity short of the crowd's demand."""
    EQ12 = "eq12"  # the L < S branch, unchanged
    REWARD = "reward"  # cap = xi * price


class MechanismParams(BaseModel):
    """Regulator and client coefficients."""
    model_config = ConfigDict(frozen=True)

    xi: float = Field(1.05, gt=1, description="Reward coefficient")
    gamma: float = Field(0.9, gt=0, lt=1, description="Minimum penalty coefficient")
    beta: float = Field(2.0, gt=0, description="Weight adjustment coefficient")
    ces_exponent: float = Field(2.0, gt=1, description="CES exponent r")
    weight_floor: float = Field(1e-6, gt=0)
    ratio_clamp: float = Field(2.0, gt=1, description="Upper clamp on L/S")
    capacity_limited_policy: CapacityLimitedPolicy = CapacityLimitedPolicy.REWARD
    exclude_spillover: bool = Field(True, description="Cap the load read against S at the first BAI requests")

    @model_validator(mode="after")
    def validate_clamp(self) -> "MechanismParams":
        if self.ratio_clamp < self.xi:
            raise ValueError("ratio_clamp must be >= xi")
        return self


class ScenarioConfig(BaseModel):
    """Complete, validated description of one simulation run."""
    model_config = ConfigDict(frozen=True)

    name: str = "custom"
    wnps: List[WnpSpec] = Field(..., min_length=1)
    clients: Optional[List[ClientSpec]] = None
    population: ClientPopulation = Field(default_factory=ClientPopulation)
    mechanism: MechanismParams = Field(default_factory=MechanismParams)
    max_pccs: int = Field(60, ge=1, description="F")
    max_bais: int = Field(20, ge=1, description="T")
    bai_stop_tol: float = Field(1e-6, gt=0, description="Mbps newly allocated below which the BAI loop stops")
    initial_caps: Optional[List[float]] = None
    initial_cap_range: Tuple[float, float] = (0.1, 0.5)
    seed: int = Field(20240101, ge=0, lt=2 ** 64)

    @field_validator("initial_caps")
    @classmethod
    def validate_caps(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None and any(cap <= 0 for cap in v):
            raise ValueError("initial caps must be > 0")
        return v

    @field_validator("initial_cap_range")
    @classmethod
    def validate_cap_range(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        low, high = v
        if not 0 < low <= high:
            raise ValueError("range must satisfy 0 < low <= high")
        return v

    @model_validator(mode="after")
    def validate_shapes(self) -> "ScenarioConfig":
        n = len(self.wnps)
        if [wnp.id for wnp in self.wnps] != list(range(n)):
            raise ValueError("wnp ids must be 0..N-1 in order")
        if self.initial_caps is not None and len(self.initial_caps) != n:
            raise ValueError(f"initial_caps must have {n} entries")
        if self.clients is not None:
            if [client.id for client in self.clients] != list(range(len(self.clients))):
                raise ValueError("client ids must be 0..M-1 in order")
            for client in self.clients:
                if len(client.initial_weights) != n:
                    raise ValueError(f"client {client.id} vectors must have {n} entries")
        return self

    @property
    def n_providers(self) -> int:
        return len(self.wnps)

    @property
    def n_clients(self) -> int:
        return len(self.clients) if self.clients is not None else self.population.count


# ============================================================================
# Per-PCC output
# ============================================================================

class PccCondition(str, Enum):
    """Regulator's reading of a provider's load against the crowdsourced demand."""
    OVER_PRICED = "over_priced"
    CAPACITY_LIMITED = "capacity_limited"
    FAIR_PRICED = "fair_priced"


class PccRecord(BaseModel):
    """Everything observed in one price controlling cycle."""
    f: int = Field(..., ge=1)
    caps: List[float]
    prices: List[float]
    loads: List[float]
    first_requests: List[float] = Field(default_factory=list, description="Aggregate BAI-1 requests")
    prb_totals: List[float]
    conditions: List[PccCondition]
    honesty_draws: List[bool]
    sum_abs_error: float
    mean_price: float
    bai_count: int = Field(..., ge=0)
    next_caps: List[float]
    profits: List[float]


class SimTrace(BaseModel):
    """Full time series of a run."""
    config: ScenarioConfig
    seed: int
    fair_costs: List[float] = Field(..., description="MC_j(L_max_j) per provider")
    records: List[PccRecord] = []
    wall_clock: List[float] = []  # seconds per PCC
    started_at: datetime = Field(default_factory=datetime.now)

    @model_validator(mode="after")
    def validate_indices(self) -> "SimTrace":
        if [record.f for record in self.records] != list(range(1, len(self.records) + 1)):
            raise ValueError("record indices must be contiguous from 1")
        return self

    @property
    def n_providers(self) -> int:
        return len(self.fair_costs)

    @property
    def mean_fair_cost(self) -> float:
        return sum(self.fair_costs) / len(self.fair_costs)

    @property
    def final(self) -> Optional[PccRecord]:
        return self.records[-1] if self.records else None

    @property
    def duration(self) -> float:
        """Total engine time in seconds."""
        return float(sum(self.wall_clock))


# ============================================================================
# CLI
# ============================================================================

class ExportFormat(str, Enum):
    """Flat-table formats for trace export."""
    CSV = "csv"
    JSON = "json"


class RunManifest(BaseModel):
    """What the CLI was asked to do."""
    config_path: Optional[str] = None
    preset: Optional[str] = None
    scenario: str = "custom"
    seed: int = Field(..., ge=0, lt=2 ** 64)
    output_dir: str
    formats: List[ExportFormat] = [ExportFormat.CSV]
    long_format: bool = False
    charts: bool = False
    created_at: datetime = Field(default_factory=datetime.now)
