#!/usr/bin/env python3
"""
Tests for the sweep-based pants decomposition
"""

import io
import json
import math

import pytest

from app.modules.combinatorial_map import dualize, mark_holes
from app.modules.curves import boundary_length, cut_curve_system
from app.modules.fixtures import genus_canonical, genus_zero_with_holes, k7_double, k7_torus
from app.modules.genus_zero import verify_pants
from app.modules.pants import (
    PantsConfig, ShiftState, choose_s, component_classes, decompose_step, detect_tangency, ell_sequence,
    is_decomposable, merging_phase, pants_decomposition, recurrence_holds, rewire, shift_right,
    splitting_phase,
)
from app.modules.random_surfaces import RandomSurfaceSpec, grown_surface, random_surface
from app.modules.systole import shortest_nonseparating
from app.utils.errors import (
    BudgetExceeded, ComponentNotDecomposable, FaceMeetsItself, GenusTooSmall, HasBoundary,
    InitialBoundaryTooLong, LedgerViolation, NotInMergeState, NotInSplitState, TangencyPresent,
)

TRACE_KEYS = {'round', 'ell', 's', 'r', 'U', 'phase', 'eta', 'boundary_before', 'boundary_after'}
FALLBACK_KEYS = {'round', 'ell', 'phase', 'reason', 'curves'}
ESCALATE_KEYS = {'round', 'ell', 'phase', 'C'}


@pytest.fixture
def double_torus():
    return dualize(k7_double())


@pytest.fixture
def cut_double_torus(double_torus):
    """The double torus cut along a shortest non-separating curve: genus one with two holes"""
    _, curve = shortest_nonseparating(double_torus)
    piece, = cut_curve_system(double_torus, [curve])
    return piece.surface


def test_ell_sequence():
    assert ell_sequence(8.0, 100, 2) == [80, 113, 138]


def test_recurrence():
    assert recurrence_holds(8.0, 100, 3)
    assert not recurrence_holds(1.0, 100, 2)


def test_decomposable_components():
    assert not is_decomposable(component_classes(genus_zero_with_holes(3))[0])
    assert not is_decomposable(component_classes(dualize(k7_torus()))[0])
    assert is_decomposable(component_classes(genus_zero_with_holes(4))[0])


def test_state_starts_at_the_holes(cut_double_torus):
    state = ShiftState(cut_double_torus)
    assert state.r == 0
    assert sorted(f for f in range(len(state.in_region)) if state.in_region[f]) == cut_double_torus.hole_faces()
    assert state.totals[0] > 0
    assert state.pending


def test_choose_s_rejects_long_boundaries(cut_double_torus):
    state = ShiftState(cut_double_torus)
    with pytest.raises(InitialBoundaryTooLong):
        choose_s(state, state.totals[0] - 1)
    assert choose_s(state, state.totals[0]) == 0


def test_phases_need_the_right_outcome(cut_double_torus):
    state = ShiftState(cut_double_torus)
    with pytest.raises(NotInSplitState):
        splitting_phase(state, 0)
    with pytest.raises(NotInMergeState):
        merging_phase(state, 0)


def test_sweep_stops_at_a_tangency(cut_double_torus):
    state = ShiftState(cut_double_torus)
    outcome = None
    for _ in range(2 * cut_double_torus.num_faces_total + 2):
        shift_right(state)
        if state.tangency is not None:
            assert detect_tangency(state) is state.tangency
            with pytest.raises(TangencyPresent):
                shift_right(state)
            outcome = rewire(state, state.tangency)
            if outcome.kind != 'continued':
                break
    assert outcome is not None and outcome.kind in ('split', 'merged')


def test_step_on_a_pants_is_refused():
    with pytest.raises(ComponentNotDecomposable):
        decompose_step(genus_zero_with_holes(3), 100)


def test_single_step_cuts_off_one_pants(cut_double_torus):
    ell = 10 * boundary_length(cut_double_torus)
    step, state = decompose_step(cut_double_torus, ell)
    pants = [c for c in step.discarded if c.surface.num_holes == 3 and c.surface.genus == 0]
    assert len(pants) == 1
    assert step.phase in ('split', 'merge')
    assert 0 <= step.s <= step.r == state.r
    assert step.boundary_after == sum(c.length(cut_double_torus) for c in step.delta)
    for comp in step.remainder:
        assert () not in comp.hole_curves


def test_step_on_genus_zero_surface():
    s = genus_zero_with_holes(5, seed=2)
    step, _ = decompose_step(s, 10 * boundary_length(s))
    assert len([c for c in step.discarded if c.surface.num_holes == 3]) == 1
    # each Delta curve leaves exactly one boundary copy on the remainder
    assert sum(c.surface.num_holes for c in step.remainder) == len(step.delta)
    assert all(c.surface.genus == 0 for c in step.remainder)


@pytest.mark.parametrize('build', [k7_double, lambda: genus_canonical(2)])
def test_pants_decomposition_of_genus_two(build):
    s = dualize(build())
    result = pants_decomposition(s)
    assert len(result.curves) == 3
    assert result.pants == 2
    assert verify_pants(s, result.curves) == 2
    assert result.bound_constant == pytest.approx(result.C * math.sqrt(2))
    bound = result.bound_constant * math.sqrt(s.genus * s.n)
    assert max(c.length(s) for c in result.curves) <= bound
    assert result.operations <= PantsConfig.OP_BUDGET_K * s.genus * s.n


def test_pants_decomposition_with_bounds_asserted(double_torus):
    result = pants_decomposition(double_torus, assert_bounds=True)
    assert len(result.curves) == 3


def test_trace_records_every_round(double_torus):
    trace = io.StringIO()
    result = pants_decomposition(double_torus, trace=trace)
    records = [json.loads(line) for line in trace.getvalue().splitlines()]
    restarts = [i for i, record in enumerate(records) if record['phase'] == 'escalate']
    assert len(restarts) <= result.escalations
    last_run = records[restarts[-1] + 1:] if restarts else records
    assert len(last_run) == result.rounds
    for record in last_run:
        if record['phase'] == 'fallback':
            assert set(record) == FALLBACK_KEYS
            assert record['round'] in result.fallback_rounds
        else:
            assert set(record) == TRACE_KEYS
            assert record['phase'] in ('split', 'merge')
    for i in restarts:
        assert set(records[i]) == ESCALATE_KEYS


def test_budget_guard(double_torus):
    with pytest.raises(BudgetExceeded):
        pants_decomposition(double_torus, budget=1)


def test_genus_one_is_refused():
    with pytest.raises(GenusTooSmall):
        pants_decomposition(dualize(k7_torus()))


def test_holes_are_refused(double_torus):
    with pytest.raises(HasBoundary):
        pants_decomposition(mark_holes(double_torus, [0]))


@pytest.mark.slow
@pytest.mark.parametrize('genus, n', [(2, 60), (3, 72)])
def test_pants_on_grown_surfaces(genus, n):
    s = grown_surface(n, genus, seed=11)
    result = pants_decomposition(s)
    assert len(result.curves) == 3 * genus - 3
    assert verify_pants(s, result.curves) == 2 * genus - 2


def _self_bordering_faces(s):
    return sorted({int(s.face[h]) for h in range(s.num_half_edges)
                   if s.face[h] == s.face[s.twin[h]] and not s.hole[h]})


def test_sweep_refuses_faces_meeting_themselves():
    s = dualize(genus_canonical(2))
    looped = _self_bordering_faces(s)
    assert looped
    holed = mark_holes(s, [next(f for f in range(s.num_faces_total) if f not in looped)])
    with pytest.raises(FaceMeetsItself):
        ShiftState(holed)
    with pytest.raises(FaceMeetsItself):
        decompose_step(holed, 10 * boundary_length(holed))


def test_canonical_genus_two_is_completed():
    s = dualize(genus_canonical(2))
    trace = io.StringIO()
    result = pants_decomposition(s, trace=trace)
    assert len(result.curves) == 3
    assert result.pants == 2
    assert verify_pants(s, result.curves) == 2
    assert all(k <= result.rounds for k in result.fallback_rounds)
    phases = [json.loads(line)['phase'] for line in trace.getvalue().splitlines()]
    assert phases.count('fallback') == len(result.fallback_rounds)


@pytest.mark.parametrize('n', [12, 14, 16])
@pytest.mark.parametrize('seed', range(8))
def test_pants_on_configuration_model_surfaces(n, seed):
    s = random_surface(RandomSurfaceSpec(n=n, seed=seed, condition='genus-exact', genus=2))
    assert s.genus == 2
    result = pants_decomposition(s)
    assert len(result.curves) == 3
    assert verify_pants(s, result.curves) == 2
    assert max(c.length(s) for c in result.curves) <= result.bound_constant * math.sqrt(2 * s.n)


def test_small_constant_is_escalated(double_torus):
    result = pants_decomposition(double_torus, C=0.5)
    assert result.escalations >= 1
    assert result.C == pytest.approx(0.5 * 2 ** result.escalations)
    assert recurrence_holds(result.C, double_torus.n, 3)
    assert len(result.curves) == 3


def test_escalation_gives_up(double_torus, monkeypatch):
    monkeypatch.setattr(PantsConfig, 'MAX_ESCALATIONS', 0)
    with pytest.raises(LedgerViolation):
        pants_decomposition(double_torus, C=0.5)


@pytest.mark.slow
@pytest.mark.parametrize('seed', range(100))
def test_step_inequalities_hold_on_random_inputs(seed):
    s = random_surface(RandomSurfaceSpec(n=12 + 2 * (seed % 4), seed=100 + seed, condition='genus-exact', genus=2))
    result = pants_decomposition(s, assert_bounds=True)
    assert len(result.curves) == 3
    assert verify_pants(s, result.curves) == 2


@pytest.mark.slow
@pytest.mark.parametrize('seed', range(4))
def test_pants_with_bounds_asserted_on_grown_surfaces(seed):
    s = grown_surface(60, 2, seed=seed)
    result = pants_decomposition(s, assert_bounds=True)
    assert verify_pants(s, result.curves) == 2
