from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator

from card_lab.domain.entities import MAX_SEED
from card_lab.domain.value_objects import ArrangementPattern, DealerKind, GuesserKind


class GuesserSpec(BaseModel):
    """Which guesser to build and with what parameters.

    ``m`` is the subset size (subset) or bit budget (combined); ``k`` the number
    of power sums (power_sum) or the independence of the hash family (amplified);
    ``domain`` restricts play to cards 1..domain.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: GuesserKind
    m: int | None = Field(default=None, ge=1)
    k: int | None = Field(default=None, ge=1)
    delta: float | None = Field(default=None, gt=0, le=1)
    card: int = Field(default=1, ge=1)
    domain: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_required(self) -> GuesserSpec:
        if self.kind in (GuesserKind.SUBSET, GuesserKind.COMBINED) and self.m is None:
            raise ValueError(f"{self.kind.value} guesser needs m")
        if self.kind is GuesserKind.POWER_SUM and self.k is None:
            raise ValueError("power_sum guesser needs k")
        if self.kind is GuesserKind.AMPLIFIED and (self.delta is None or self.delta >= 1):
            raise ValueError("amplified guesser needs 0 < delta < 1")
        return self


class DealerSpec(BaseModel):
    """Which dealer to build. ``m`` feeds the MtBE schedule."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: DealerKind
    m: int | None = Field(default=None, ge=1)
    pattern: ArrangementPattern | None = None
    arrangement: tuple[int, ...] | None = None

    @model_validator(mode="after")
    def _check_required(self) -> DealerSpec:
        if self.kind is DealerKind.STATIC and self.pattern is None and self.arrangement is None:
            raise ValueError("static dealer needs a pattern or an arrangement")
        return self


class ExperimentConfig(BaseModel):
    """One Monte Carlo experiment: a guesser, a dealer and how many games to play."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    guesser: GuesserSpec
    dealer: DealerSpec
    n: int = Field(ge=1)
    m: int = Field(default=0, ge=0)  # guesser budget checked in strict mode
    trials: int = Field(default=1, ge=1)
    master_seed: int = Field(default=0, ge=0, le=MAX_SEED)
    strict_memory: bool = False
    workers: int = Field(default=1, ge=1)


class GridCell(BaseModel):
    """One line of a sweep grid."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(ge=1)
    guesser: GuesserKind
    dealer: DealerKind
    m: int | None = Field(default=None, ge=1)
    delta: float | None = Field(default=None, gt=0, le=1)
    k: int | None = Field(default=None, ge=1)
    card: int = Field(default=1, ge=1)
    trials: int | None = Field(default=None, ge=1)
    pattern: ArrangementPattern | None = None

    def guesser_spec(self) -> GuesserSpec:
        return GuesserSpec(kind=self.guesser, m=self.m, k=self.k, delta=self.delta, card=self.card)

    def dealer_spec(self) -> DealerSpec:
        pattern = self.pattern
        if self.dealer is DealerKind.STATIC and pattern is None:
            pattern = ArrangementPattern.RANDOM
        return DealerSpec(kind=self.dealer, m=self.m, pattern=pattern)

    def experiment(
        self, trials: int, master_seed: int = 0, workers: int = 1, strict_memory: bool = False
    ) -> ExperimentConfig:
        """The cell as an experiment; the cell's own ``trials`` overrides the default."""
        return ExperimentConfig(
            guesser=self.guesser_spec(),
            dealer=self.dealer_spec(),
            n=self.n,
            m=self.m or 0,
            trials=self.trials or trials,
            master_seed=master_seed,
            strict_memory=strict_memory,
            workers=workers,
        )
