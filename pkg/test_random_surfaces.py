#!/usr/bin/env python3
"""
Tests for random surface sampling, growth studies and the worker pool
"""

import math

import numpy as np
import pandas as pd
import pytest

from app.modules.random_surfaces import (
    STUDY_COLUMNS, RandomSurfaceSpec, configuration_arrays, genus_distribution, growth_study, grown_start,
    grown_surface, loglog_slope, max_genus, measure_one, nearest_grown_n, random_surface, rng_for,
)
from app.modules.systole import shortest_noncontractible
from app.utils.errors import ConditionUnsatisfiable, InvalidMapError, JobsFailed, SamplingBudgetExceeded
from app.utils.worker_pool import WorkerPool


def test_same_seed_same_surface():
    spec = RandomSurfaceSpec(n=40, seed=12345)
    a, b = random_surface(spec), random_surface(spec)
    assert np.array_equal(a.twin, b.twin)
    assert np.array_equal(a.nxt, b.nxt)


def test_different_seeds_differ():
    a = random_surface(RandomSurfaceSpec(n=40, seed=1))
    b = random_surface(RandomSurfaceSpec(n=40, seed=2))
    assert not (np.array_equal(a.twin, b.twin) and np.array_equal(a.nxt, b.nxt))


def test_configuration_arrays_shape():
    twin, nxt = configuration_arrays(10, rng_for(0))
    assert len(twin) == len(nxt) == 30
    assert (twin[twin] == np.arange(30)).all()
    assert (twin != np.arange(30)).all()
    assert sorted(nxt.tolist()) == list(range(30))


def test_connected_sample_is_trivalent():
    s = random_surface(RandomSurfaceSpec(n=30, seed=4))
    assert s.num_components == 1
    assert s.is_trivalent()
    assert s.n == 30


def test_genus_exact_condition():
    s = random_surface(RandomSurfaceSpec(n=12, seed=0, condition='genus-exact', genus=2))
    assert s.genus == 2


def test_bad_specs():
    with pytest.raises(InvalidMapError):
        RandomSurfaceSpec(n=7)
    with pytest.raises(InvalidMapError):
        RandomSurfaceSpec(n=8, seed=-1)
    with pytest.raises(InvalidMapError):
        RandomSurfaceSpec(n=8, condition='genus-exact')
    with pytest.raises(InvalidMapError):
        RandomSurfaceSpec(n=8, method='annealed')


def test_unreachable_genus():
    assert max_genus(4) == 1
    with pytest.raises(ConditionUnsatisfiable):
        random_surface(RandomSurfaceSpec(n=4, condition='genus-exact', genus=5))


def test_sampling_budget():
    spec = RandomSurfaceSpec(n=4, seed=0, condition='genus-exact', genus=1)
    with pytest.raises(SamplingBudgetExceeded):
        random_surface(spec, attempts=0)


def test_genus_distribution_small():
    counts = genus_distribution(2)
    assert set(counts) <= {0, 1}
    assert sum(counts.values()) > 0
    with pytest.raises(InvalidMapError):
        genus_distribution(8)


@pytest.mark.parametrize('n, samples', [(2, 600), pytest.param(4, 1500, marks=pytest.mark.slow)])
def test_sampled_genus_matches_the_enumeration(n, samples):
    counts = genus_distribution(n)
    total = sum(counts.values())
    genera = [random_surface(RandomSurfaceSpec(n=n, seed=k)).genus for k in range(samples)]
    for g, c in counts.items():
        p = c / total
        sigma = math.sqrt(p * (1 - p) / samples)
        assert abs(genera.count(g) / samples - p) <= 3 * sigma + 1e-12
    assert set(genera) <= set(counts)


@pytest.mark.parametrize('genus, n', [(0, 10), (1, 20), (2, 30)])
def test_grown_surfaces_keep_their_genus(genus, n):
    s = grown_surface(n, genus, seed=3)
    assert s.genus == genus
    assert s.n == n
    assert s.is_trivalent()


def test_grown_size_must_reach_the_start():
    with pytest.raises(ConditionUnsatisfiable):
        grown_surface(22, 2)
    assert nearest_grown_n(25, 2) == 26
    assert nearest_grown_n(10, 2) == 26
    assert nearest_grown_n(7, 0) == 8


@pytest.mark.parametrize('genus', [0, 1, 2, 3])
def test_grown_start_is_small_and_simple(genus):
    t = grown_start(genus)
    assert t.genus == genus
    assert t.num_faces == (12 * genus + 2 if genus else 4)
    ends = {tuple(sorted((int(t.vert[h]), int(t.vert[t.twin[h]])))) for h in range(t.num_half_edges)}
    assert len(ends) == t.num_edges
    assert all(u != v for u, v in ends)


@pytest.mark.parametrize('seed', range(3))
def test_grown_surfaces_stay_simple(seed):
    s = grown_surface(120, 2, seed=seed)
    face, twin = s.face, s.twin
    assert not (face == face[twin]).any()
    sides = {tuple(sorted((int(face[h]), int(face[twin[h]])))) for h in range(s.num_half_edges)}
    assert len(sides) == s.num_edges


def test_grown_edge_width_grows_with_n():
    small = [shortest_noncontractible(grown_surface(14, 1, seed=k))[0] for k in range(3)]
    large = [shortest_noncontractible(grown_surface(400, 1, seed=k))[0] for k in range(3)]
    assert np.median(large) > np.median(small)


def test_loglog_slope():
    table = pd.DataFrame({'n': [100, 400, 1600], 'value': [10.0, 20.0, 40.0]})
    assert loglog_slope(table) == pytest.approx(0.5)
    assert loglog_slope(table.iloc[:1]) is None
    assert loglog_slope(pd.DataFrame(columns=STUDY_COLUMNS)) is None


def test_measure_one_row():
    row = measure_one('edge_width', 20, 1, 5)
    assert list(row) == STUDY_COLUMNS
    assert row['g'] == 1
    assert row['value'] >= 1


def test_growth_study_rows():
    table, slope = growth_study([12, 24], 2, 'edge_width', genus=1, seed=0)
    assert list(table.columns) == STUDY_COLUMNS
    assert len(table) == 4
    assert sorted(table['seed'].unique().tolist()) == [0, 1]
    assert slope is None or isinstance(slope, float)


def test_unknown_measure():
    with pytest.raises(InvalidMapError):
        growth_study([12], 1, 'diameter')


@pytest.mark.slow
def test_growth_study_on_a_pool():
    table, _ = growth_study([12, 24], 2, 'edge_width', genus=1, seed=0, workers=2)
    serial, _ = growth_study([12, 24], 2, 'edge_width', genus=1, seed=0)
    assert table['value'].tolist() == serial['value'].tolist()


def test_worker_pool_keeps_job_order():
    with WorkerPool(workers=2) as pool:
        assert pool.map(pow, [(2, 3), (3, 2), (5, 1)]) == [8, 9, 5]
    stats = pool.get_stats()
    assert stats['jobs_run'] == 3
    assert stats['jobs_failed'] == 0


def test_worker_pool_reports_failures():
    pool = WorkerPool(workers=1)
    results = pool.map(pow, [(2, 2), (2, 'x')])
    assert results == [4, None]
    stats = pool.get_stats()
    assert stats['jobs_failed'] == 1
    assert len(stats['errors']) == 1


def test_pooled_study_fails_loudly():
    # two holes are too few for the pairing decomposition
    with pytest.raises(JobsFailed) as exc:
        growth_study([2, 4], 1, 'genus0_multiplicity', seed=0, workers=2)
    assert exc.value.details['failed'] == 1
    assert exc.value.exit_code == 4
