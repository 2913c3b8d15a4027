import pytest

from occfer.trainer import LRSchedulerState, OptimizerConfig, PlateauLRScheduler, plateau_step


def _run(state: LRSchedulerState, errors: list, **kwargs) -> LRSchedulerState:
    for error in errors:
        state = plateau_step(state, error, **kwargs)
    return state


def test__plateau_step__eleven_stagnant_epochs_drop_lr():
    state = plateau_step(LRSchedulerState(current_lr=1e-4), 0.5)
    state = _run(state, [0.5] * 10)
    assert state.current_lr == 1e-4
    assert state.epochs_since_improvement == 10
    state = plateau_step(state, 0.6)
    assert state.current_lr == pytest.approx(1e-5)
    assert state.epochs_since_improvement == 0


def test__plateau_step__improvement_resets_counter():
    state = LRSchedulerState(current_lr=1e-3, best_val_error=0.5, epochs_since_improvement=7)
    state = plateau_step(state, 0.4)
    assert state == LRSchedulerState(
        current_lr=1e-3, best_val_error=0.4, epochs_since_improvement=0
    )


def test__plateau_step__equal_error_is_not_an_improvement():
    state = plateau_step(LRSchedulerState(current_lr=1e-3, best_val_error=0.4), 0.4)
    assert state.epochs_since_improvement == 1
    assert state.best_val_error == 0.4


def test__plateau_step__two_plateau_trajectory():
    state = LRSchedulerState(current_lr=1e-3)
    errors = [0.9, 0.8, 0.7] + [0.7] * 11 + [0.6] + [0.65] * 11
    lrs = []
    for error in errors:
        state = plateau_step(state, error)
        lrs.append(state.current_lr)
    assert lrs[:13] == [1e-3] * 13
    assert lrs[13] == pytest.approx(1e-4)
    assert lrs[-1] == pytest.approx(1e-5)
    assert all(b <= a for a, b in zip(lrs, lrs[1:]))
    assert len({round(lr, 12) for lr in lrs}) == 3


def test__plateau_step__respects_min_lr():
    state = _run(LRSchedulerState(current_lr=1e-3), [0.5] * 12, min_lr=1e-3)
    assert state.current_lr == 1e-3


def test__plateau_step__rejects_negative_error():
    with pytest.raises(ValueError):
        plateau_step(LRSchedulerState(current_lr=1e-3), -0.1)


def test__plateau_lr_scheduler__uses_config():
    scheduler = PlateauLRScheduler(
        OptimizerConfig(initial_lr=0.1, lr_drop_factor=2.0, plateau_patience=1)
    )
    assert scheduler.lr == 0.1
    for error in [0.5, 0.5, 0.5]:
        scheduler.step(error)
    assert scheduler.lr == pytest.approx(0.05)
