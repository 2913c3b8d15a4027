from typing import Any, Dict

from torch import nn

from occfer.api.training_hooks_mixin import TrainingHooksMixin

from .pruning import achieved_sparsity, sparse_epoch_hook
from .schedules import PhasePlan, SparsitySchedule


class DSDController(TrainingHooksMixin):
    """
    Drives the dense-sparse-dense phases of a training stage. At the end of every sparse-phase epoch the weights of
    the conv layers are re-pruned from their current magnitudes; during dense phases the weights evolve freely. The
    achieved per-layer sparsity is reported after every epoch.

    Args:
        schedule: the per-conv-layer pruning rates.
        plan: the phase plan of the stage.
    """

    def __init__(self, schedule: SparsitySchedule, plan: PhasePlan):
        self.schedule = schedule
        self.plan = plan
        self._kinds = plan.phase_kinds()

    def phase_at(self, epoch_idx: int) -> str:
        return self._kinds[epoch_idx]

    def on_end_epoch(
        self, epoch_idx: int, model: nn.Module, recursive: bool = True
    ) -> Dict[str, Any]:
        if self.phase_at(epoch_idx) == "sparse":
            sparse_epoch_hook(model, self.schedule)
        return {
            f"sparsity_l{idx}": fraction for idx, fraction in enumerate(achieved_sparsity(model))
        }
