"""
Data models for the three-type diploid population.
"""

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Optional, Sequence

from diploid_vortex.types.enums import EventType

Matrix3 = tuple[tuple[float, float, float], tuple[float, float, float], tuple[float, float, float]]


class PopulationState(BaseModel):
    """Counts (k, m, n) of AA, Aa and aa individuals; at least two individuals."""

    k: int = Field(..., ge=0, description="AA individuals")
    m: int = Field(..., ge=0, description="Aa individuals")
    n: int = Field(..., ge=0, description="aa individuals")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_size(self) -> "PopulationState":
        if self.k + self.m + self.n < 2:
            raise ValueError("population size k + m + n must be at least 2")
        return self

    @classmethod
    def of(cls, k: int, m: int, n: int) -> "PopulationState":
        return cls(k=k, m=m, n=n)

    @property
    def N(self) -> int:  # noqa: N802
        return self.k + self.m + self.n

    @property
    def Y(self) -> int:  # noqa: N802
        """Number of A alleles; 2N - Y is the number of a alleles."""
        return 2 * self.k + self.m

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.k, self.m, self.n)

    def __str__(self) -> str:
        return f"({self.k},{self.m},{self.n})"


class DemographicParams(BaseModel):
    """
    Rates of the study regime: common fecundity b and competition c, natural
    death d for AA, d + delta for Aa and d + delta_prime for aa. All rates are
    per unit time.
    """

    b: float = Field(..., gt=0, description="Per-capita fecundity")
    d: float = Field(..., ge=0, description="Natural death rate of AA")
    c: float = Field(..., gt=0, description="Pairwise competition rate")
    delta: float = Field(default=0.0, description="Heterozygote death-rate increment")
    delta_prime: float = Field(default=0.0, description="aa homozygote death-rate increment")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_death_rates(self) -> "DemographicParams":
        if self.d + self.delta < 0 or self.d + self.delta_prime < 0:
            raise ValueError("d + delta and d + delta_prime must be nonnegative")
        return self

    @property
    def is_neutral(self) -> bool:
        return self.delta == 0.0 and self.delta_prime == 0.0

    def neutral(self) -> "DemographicParams":
        """Same demography with both perturbations switched off."""
        return self.model_copy(update={"delta": 0.0, "delta_prime": 0.0})

    def with_death(self, d: float) -> "DemographicParams":
        return DemographicParams(
            b=self.b, d=d, c=self.c, delta=self.delta, delta_prime=self.delta_prime
        )

    def with_perturbation(self, delta: float, delta_prime: float) -> "DemographicParams":
        return DemographicParams(b=self.b, d=self.d, c=self.c, delta=delta, delta_prime=delta_prime)

    def per_capita_death(self, size: int) -> float:
        """Neutral per-capita death rate d + c(N - 1) (zero at N = 2)."""
        if size <= 2:
            return 0.0
        return self.d + self.c * (size - 1)


def _as_matrix(rows: Sequence[Sequence[float]], name: str) -> Matrix3:
    if len(rows) != 3 or any(len(row) != 3 for row in rows):
        raise ValueError(f"{name} must be a 3x3 table")
    return tuple(tuple(float(x) for x in row) for row in rows)  # type: ignore[return-value]


class GeneralRates(BaseModel):
    """
    Genotype-dependent rates: symmetric birth table b_ij = r * p_ij, competition
    table c_ij (all positive) and natural deaths d_i. Index 0, 1, 2 stands for
    AA, Aa, aa.
    """

    b: Matrix3
    c: Matrix3
    d: tuple[float, float, float]

    model_config = ConfigDict(frozen=True)

    @field_validator("b", mode="before")
    @classmethod
    def validate_birth(cls, v: Sequence[Sequence[float]]) -> Matrix3:
        table = _as_matrix(v, "b")
        for i in range(3):
            for j in range(3):
                if table[i][j] < 0:
                    raise ValueError("birth rates must be nonnegative")
                if table[i][j] != table[j][i]:
                    raise ValueError("birth table must be symmetric (b_ij = b_ji)")
        return table

    @field_validator("c", mode="before")
    @classmethod
    def validate_competition(cls, v: Sequence[Sequence[float]]) -> Matrix3:
        table = _as_matrix(v, "c")
        if min(min(row) for row in table) <= 0:
            raise ValueError("competition rates must all be positive")
        return table

    @field_validator("d", mode="before")
    @classmethod
    def validate_death(cls, v: Sequence[float]) -> tuple[float, float, float]:
        if len(v) != 3:
            raise ValueError("d must have three entries")
        values = tuple(float(x) for x in v)
        if min(values) < 0:
            raise ValueError("natural death rates must be nonnegative")
        return values  # type: ignore[return-value]

    @classmethod
    def from_params(cls, params: DemographicParams) -> "GeneralRates":
        """b_ij = b, c_ij = c and d = (d, d + delta, d + delta_prime)."""
        b = [[params.b] * 3 for _ in range(3)]
        c = [[params.c] * 3 for _ in range(3)]
        d = [params.d, params.d + params.delta, params.d + params.delta_prime]
        return cls(b=b, c=c, d=d)

    @classmethod
    def from_fitness(
        cls,
        r: float,
        p: Sequence[Sequence[float]],
        c: Sequence[Sequence[float]],
        d: Sequence[float],
    ) -> "GeneralRates":
        """Birth table from a maximal encounter rate r and selective values p_ij."""
        if r <= 0:
            raise ValueError("r must be positive")
        table = _as_matrix(p, "p")
        if any(not (0.0 <= x <= 1.0) for row in table for x in row):
            raise ValueError("selective values p_ij must lie in [0, 1]")
        return cls(b=[[r * x for x in row] for row in table], c=c, d=d)

    @property
    def max_birth(self) -> float:
        return max(max(row) for row in self.b)


class Transition(BaseModel):
    """One of the six possible jumps out of a state."""

    event: EventType
    target: Optional[PopulationState] = Field(
        None, description="None when the jump would leave the state space (rate 0)"
    )
    rate: float = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)


class TransitionSet(BaseModel):
    """The six transitions out of a state, in the fixed event order."""

    source: PopulationState
    entries: tuple[Transition, ...]

    model_config = ConfigDict(frozen=True)

    @field_validator("entries")
    @classmethod
    def validate_entries(cls, v: tuple[Transition, ...]) -> tuple[Transition, ...]:
        if len(v) != 6:
            raise ValueError("a transition set has exactly 6 entries")
        return v

    @property
    def total_rate(self) -> float:
        return sum(t.rate for t in self.entries)

    @property
    def birth_total(self) -> float:
        return sum(t.rate for t in self.entries[:3])

    def rate_of(self, event: EventType) -> float:
        for entry in self.entries:
            if entry.event == event:
                return entry.rate
        raise KeyError(event)
