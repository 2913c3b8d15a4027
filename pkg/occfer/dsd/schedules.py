import math
from dataclasses import dataclass
from typing import List, Literal, Sequence, Tuple

import gin
import numpy as np


@dataclass(frozen=True)
class SparsitySchedule:
    """
    The pruning rate of every conv layer during the sparse phases, index 0 being the first conv layer. The first
    conv layer is never pruned and the rates never decrease with depth.
    """

    rates: Tuple[float, ...]

    def __post_init__(self):
        rates = tuple(float(rate) for rate in self.rates)
        object.__setattr__(self, "rates", rates)
        if len(rates) < 2:
            raise ValueError("A sparsity schedule covers at least two conv layers")
        if rates[0] != 0.0:
            raise ValueError(f"The first conv layer must not be pruned, got rate {rates[0]}")
        if any(not 0.0 <= rate < 1.0 for rate in rates):
            raise ValueError(f"Sparsity rates must lie in [0, 1), got {rates}")
        if any(b < a for a, b in zip(rates, rates[1:])):
            raise ValueError(f"Sparsity rates must be non-decreasing, got {rates}")

    def __len__(self) -> int:
        return len(self.rates)

    def __getitem__(self, idx: int) -> float:
        return self.rates[idx]

    @property
    def max_rate(self) -> float:
        return self.rates[-1]


@gin.configurable()
def build_sparsity_schedule(
    first_rate: float, last_rate: float, num_conv_layers: int
) -> SparsitySchedule:
    """
    A linear ramp from `first_rate` at the second conv layer to `last_rate` at the last one; the first conv layer
    gets rate 0. With exactly two conv layers the single pruned layer gets `last_rate`.
    """
    if num_conv_layers < 2:
        raise ValueError(f"num_conv_layers must be >= 2, got {num_conv_layers}")
    if first_rate > last_rate:
        raise ValueError(f"first_rate ({first_rate}) must not exceed last_rate ({last_rate})")
    if first_rate < 0 or last_rate >= 1:
        raise ValueError("Rates must satisfy 0 <= first_rate <= last_rate < 1")
    if num_conv_layers == 2:
        return SparsitySchedule((0.0, float(last_rate)))
    ramp = np.linspace(first_rate, last_rate, num_conv_layers - 1)
    return SparsitySchedule((0.0, *(float(rate) for rate in ramp)))


@dataclass(frozen=True)
class Phase:
    kind: Literal["dense", "sparse"]
    epochs: int

    def __post_init__(self):
        if self.kind not in ("dense", "sparse"):
            raise ValueError(f"Unknown phase kind: {self.kind!r}")
        if self.epochs < 1:
            raise ValueError(f"A phase lasts at least one epoch, got {self.epochs}")


@dataclass(frozen=True)
class PhasePlan:
    """
    The ordered dense / sparse phases of one training stage. A non-empty plan begins and ends with a dense phase.
    """

    phases: Tuple[Phase, ...]

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(self.phases))
        if self.phases:
            if self.phases[0].kind != "dense" or self.phases[-1].kind != "dense":
                raise ValueError("A DSD plan must begin and end with a dense phase")
            if len(self.phases) < 3:
                raise ValueError("A DSD plan has at least three phases")

    @property
    def total_epochs(self) -> int:
        return sum(phase.epochs for phase in self.phases)

    def phase_kinds(self) -> List[Literal["dense", "sparse"]]:
        """
        The phase kind of every epoch of the plan.
        """
        return [phase.kind for phase in self.phases for _ in range(phase.epochs)]

    def kind_at(self, epoch: int) -> Literal["dense", "sparse"]:
        return self.phase_kinds()[epoch]

    def to_list(self) -> List[List[object]]:
        return [[phase.kind, phase.epochs] for phase in self.phases]

    @classmethod
    def from_list(cls, phases: Sequence[Sequence[object]]) -> "PhasePlan":
        return cls(tuple(Phase(str(kind), int(epochs)) for kind, epochs in phases))


@gin.configurable()
def build_phase_plan(
    total_epochs: int,
    dense_fraction: float = 0.25,
    n_rounds: int = 1,
) -> PhasePlan:
    """
    Split an epoch budget into `n_rounds` dense-sparse-dense rounds. Every round gets an equal share of the budget
    (the remainder goes to the first rounds), of which `dense_fraction` goes to each of the two dense phases and the
    rest to the sparse phase. Every phase lasts at least one epoch.
    """
    if total_epochs == 0:
        return PhasePlan(())
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be >= 1, got {n_rounds}")
    if total_epochs < 3 * n_rounds:
        raise ValueError(f"{n_rounds} DSD rounds need at least {3 * n_rounds} epochs")
    if not 0.0 < dense_fraction < 0.5:
        raise ValueError(f"dense_fraction must lie in (0, 0.5), got {dense_fraction}")
    base, remainder = divmod(total_epochs, n_rounds)
    phases: List[Phase] = []
    for round_idx in range(n_rounds):
        budget = base + int(round_idx < remainder)
        dense = max(1, math.floor(budget * dense_fraction))
        sparse = budget - 2 * dense
        phases.extend([Phase("dense", dense), Phase("sparse", sparse), Phase("dense", dense)])
    return PhasePlan(tuple(phases))
