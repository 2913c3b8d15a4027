import pytest

from occfer.dsd import Phase, PhasePlan, SparsitySchedule, build_phase_plan, build_sparsity_schedule


def test__build_sparsity_schedule__vggface_endpoints():
    schedule = build_sparsity_schedule(0.2, 0.7, 13)
    assert len(schedule) == 13
    assert schedule[0] == 0.0
    assert schedule[1] == pytest.approx(0.2)
    assert schedule[12] == pytest.approx(0.7)
    assert list(schedule.rates) == sorted(schedule.rates)


@pytest.mark.parametrize(
    "first_rate, last_rate, n_layers, expected",
    [
        (0.2, 0.5, 5, [0.0, 0.2, 0.3, 0.4, 0.5]),
        (0.3, 0.3, 2, [0.0, 0.3]),
        (0.2, 0.5, 3, [0.0, 0.2, 0.5]),
    ],
)
def test__build_sparsity_schedule__rates(
    first_rate: float, last_rate: float, n_layers: int, expected: list
):
    assert list(build_sparsity_schedule(first_rate, last_rate, n_layers).rates) == pytest.approx(
        expected
    )


@pytest.mark.parametrize(
    "first_rate, last_rate, n_layers", [(0.5, 0.2, 5), (0.2, 1.0, 5), (-0.1, 0.5, 5), (0.2, 0.5, 1)]
)
def test__build_sparsity_schedule__invalid(first_rate: float, last_rate: float, n_layers: int):
    with pytest.raises(ValueError):
        build_sparsity_schedule(first_rate, last_rate, n_layers)


@pytest.mark.parametrize("rates", [(0.1, 0.2), (0.0, 0.5, 0.3), (0.0, 1.0), (0.0,)])
def test__sparsity_schedule__invariants(rates: tuple):
    with pytest.raises(ValueError):
        SparsitySchedule(rates)


@pytest.mark.parametrize(
    "total_epochs, n_rounds, expected",
    [
        (50, 1, [["dense", 12], ["sparse", 26], ["dense", 12]]),
        (5, 1, [["dense", 1], ["sparse", 3], ["dense", 1]]),
        (3, 1, [["dense", 1], ["sparse", 1], ["dense", 1]]),
        (
            13,
            2,
            [["dense", 1], ["sparse", 5], ["dense", 1], ["dense", 1], ["sparse", 4], ["dense", 1]],
        ),
        (0, 1, []),
    ],
)
def test__build_phase_plan(total_epochs: int, n_rounds: int, expected: list):
    plan = build_phase_plan(total_epochs, n_rounds=n_rounds)
    assert plan.to_list() == expected
    assert plan.total_epochs == total_epochs


def test__build_phase_plan__rejects_short_budget():
    with pytest.raises(ValueError):
        build_phase_plan(2)
    with pytest.raises(ValueError):
        build_phase_plan(5, n_rounds=2)


def test__phase_plan__kinds_per_epoch():
    plan = PhasePlan.from_list([["dense", 1], ["sparse", 2], ["dense", 1]])
    assert plan.phase_kinds() == ["dense", "sparse", "sparse", "dense"]
    assert plan.kind_at(2) == "sparse"


@pytest.mark.parametrize(
    "phases",
    [
        [Phase("sparse", 2), Phase("dense", 1), Phase("dense", 1)],
        [Phase("dense", 2), Phase("sparse", 1)],
        [Phase("dense", 1), Phase("dense", 1)],
    ],
)
def test__phase_plan__must_begin_and_end_dense(phases: list):
    with pytest.raises(ValueError):
        PhasePlan(tuple(phases))


def test__phase__invalid():
    with pytest.raises(ValueError):
        Phase("dense", 0)
    with pytest.raises(ValueError):
        Phase("pruned", 1)
