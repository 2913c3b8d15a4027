from .dsd_controller import DSDController
from .pruning import (
    PruneMaskSet,
    achieved_sparsity,
    apply_masks,
    compute_masks,
    compute_prune_mask,
    sparse_epoch_hook,
)
from .schedules import Phase, PhasePlan, SparsitySchedule, build_phase_plan, build_sparsity_schedule
