"""
Random Surfaces Module
Samples trivalent cross-metric surfaces and runs growth studies over them.

Sampling methods:
    configuration   3n labeled half-edges, a random rotation at every vertex and
                    a uniformly random perfect matching as twin; rejection until
                    the condition holds
    grown           genus-exact growth of a simple genus-g triangulation (K7 tori
                    summed g times) by random triangle splits, each followed by
                    diagonal flips that keep it simple, then dualized

The generator is numpy's Philox (counter based, keyed by the 64-bit seed), so a
given spec produces the same surface on every platform.

Author: Surface Lab Team
Version: 1.0.0
"""

import time
import logging
import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Set, Tuple

import numpy as np
import pandas as pd

from app.modules.combinatorial_map import CrossMetricSurface, Triangulation, dualize, from_phi
from app.modules.fixtures import connected_sum, genus_zero_with_holes, k7_torus, tetrahedron
from app.utils.errors import ConditionUnsatisfiable, InvalidMapError, JobsFailed, SamplingBudgetExceeded
from app.utils.validation import log_event, validate_seed

logger = logging.getLogger(__name__)


class RandomConfig:
    """Sampling settings"""

    SAMPLE_ATTEMPTS = 10_000
    FLIPS_PER_SPLIT = 6
    FLIPS_PER_TRIANGLE = 4
    CONDITIONS = frozenset({'none', 'connected', 'genus-exact', 'genus-min'})
    METHODS = frozenset({'configuration', 'grown'})
    MEASURES = frozenset({'edge_width', 'pants_total_length', 'pants_max_curve', 'genus0_multiplicity'})


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def max_genus(n: int) -> int:
    """Largest genus of a connected trivalent map on n vertices"""
    return (n + 2) // 4


@dataclass(frozen=True)
class RandomSurfaceSpec:
    n: int
    seed: int = 0
    condition: str = 'connected'
    genus: Optional[int] = None
    method: str = 'configuration'

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise InvalidMapError(f'n must be even and at least 2 (got {self.n})')
        check = validate_seed(self.seed)
        if not check['valid']:
            raise InvalidMapError(check['error'])
        if self.condition not in RandomConfig.CONDITIONS:
            raise InvalidMapError(f'unknown condition: {self.condition}')
        if self.method not in RandomConfig.METHODS:
            raise InvalidMapError(f'unknown sampling method: {self.method}')
        if self.condition.startswith('genus') and self.genus is None:
            raise InvalidMapError(f'condition {self.condition} needs a genus')

    def accepts(self, s: CrossMetricSurface) -> bool:
        if self.condition == 'none':
            return True
        if s.num_components != 1:
            return False
        if self.condition == 'genus-exact':
            return s.genus == self.genus
        if self.condition == 'genus-min':
            return s.genus >= self.genus
        return True


###############################################################################
# CONFIGURATION MODEL
###############################################################################

def configuration_arrays(n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """twin and next arrays of one configuration-model draw"""
    size = 3 * n
    perm = rng.permutation(size)
    twin = np.empty(size, dtype=np.int64)
    twin[perm[0::2]] = perm[1::2]
    twin[perm[1::2]] = perm[0::2]

    reverse = rng.integers(0, 2, size=n).astype(bool)
    base = 3 * np.arange(n)
    nxt = np.empty(size, dtype=np.int64)
    step = np.where(reverse, 2, 1)
    for k in range(3):
        nxt[base + k] = base + (k + step) % 3
    return twin, nxt


def _configuration(spec: RandomSurfaceSpec, attempts: int) -> CrossMetricSurface:
    if spec.condition == 'genus-exact' and spec.genus > max_genus(spec.n):
        raise ConditionUnsatisfiable(f'genus {spec.genus} exceeds (n+2)/4 for n={spec.n}',
                                     n=spec.n, genus=spec.genus)
    if spec.condition == 'genus-min' and spec.genus > max_genus(spec.n):
        raise ConditionUnsatisfiable(f'genus at least {spec.genus} is impossible for n={spec.n}',
                                     n=spec.n, genus=spec.genus)
    rng = rng_for(spec.seed)
    for attempt in range(1, attempts + 1):
        twin, nxt = configuration_arrays(spec.n, rng)
        s = CrossMetricSurface(twin, nxt, allow_disconnected=True)
        if spec.accepts(s):
            if attempt > 1:
                logger.debug(f"Accepted sample after {attempt} draws (n={spec.n}, seed={spec.seed})")
            return s
    log_event('sampling_budget_exceeded', {'n': spec.n, 'seed': spec.seed, 'condition': spec.condition,
                                           'genus': spec.genus, 'attempts': attempts}, violation=True)
    raise SamplingBudgetExceeded(f'no sample met {spec.condition} within {attempts} draws',
                                 attempts=attempts)


def genus_distribution(n: int) -> Dict[int, int]:
    """Exact genus counts of connected configurations, by full enumeration (small n only)"""
    if n > 6:
        raise InvalidMapError('exhaustive enumeration is limited to n <= 6')
    size = 3 * n
    counts: Dict[int, int] = {}
    for matching in _matchings(list(range(size))):
        twin = np.empty(size, dtype=np.int64)
        for a, b in matching:
            twin[a], twin[b] = b, a
        for orientation in itertools.product((1, 2), repeat=n):
            nxt = np.empty(size, dtype=np.int64)
            for v, step in enumerate(orientation):
                for k in range(3):
                    nxt[3 * v + k] = 3 * v + (k + step) % 3
            s = CrossMetricSurface(twin, nxt, allow_disconnected=True)
            if s.num_components == 1:
                counts[s.genus] = counts.get(s.genus, 0) + 1
    return counts


def _matchings(items: List[int]):
    if not items:
        yield []
        return
    first = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1:]
        for tail in _matchings(rest):
            yield [(first, items[i])] + tail


###############################################################################
# GROWN SURFACES
###############################################################################

def _split_triangle(phi: List[int], twin: List[int], tail: List[int], h: int, center: int) -> Tuple[int, int, int]:
    """Star a new vertex inside the triangle of h, in place; returns the three corners"""
    p, q = h, phi[h]
    r = phi[q]
    corners = (tail[p], tail[q], tail[r])
    base = len(phi)
    a, a2, b, b2, c, c2 = range(base, base + 6)
    phi.extend([0] * 6)
    twin.extend([0] * 6)
    tail.extend([tail[q], center, tail[r], center, tail[p], center])
    phi[p], phi[a], phi[a2] = a, a2, p
    phi[q], phi[b], phi[b2] = b, b2, q
    phi[r], phi[c], phi[c2] = c, c2, r
    for x, y in ((a, b2), (a2, c), (b, c2)):
        twin[x], twin[y] = y, x
    return corners


def _pair(u: int, v: int) -> Tuple[int, int]:
    return (u, v) if u < v else (v, u)


def _flip(phi: List[int], twin: List[int], degree: Dict[int, int], tail: List[int],
          pairs: Set[Tuple[int, int]], h: int) -> bool:
    """Swap the diagonal of the two triangles at h; refused when the result would not be simple"""
    t = twin[h]
    a, b = phi[h], phi[phi[h]]
    c, d = phi[t], phi[phi[t]]
    if b == t or d == h or a == t or c == h:
        return False
    u, v = tail[h], tail[t]
    w, z = tail[b], tail[d]
    if u == v or w == z or degree[u] <= 3 or degree[v] <= 3 or _pair(w, z) in pairs:
        return False
    phi[h], phi[d], phi[a] = d, a, h
    phi[t], phi[b], phi[c] = b, c, t
    tail[h], tail[t] = w, z
    pairs.discard(_pair(u, v))
    pairs.add(_pair(w, z))
    degree[u] -= 1
    degree[v] -= 1
    degree[w] += 1
    degree[z] += 1
    return True


def grown_start(genus: int) -> Triangulation:
    """Smallest simple triangulation the grown sampler starts from: K7 tori summed g times"""
    if genus == 0:
        return tetrahedron()
    t = k7_torus()
    for _ in range(genus - 1):
        t = connected_sum(t, k7_torus())
    return t


def _grown(spec: RandomSurfaceSpec) -> CrossMetricSurface:
    genus = spec.genus or 0
    start = grown_start(genus)
    start_n = start.num_faces
    if spec.n < start_n or (spec.n - start_n) % 2:
        raise ConditionUnsatisfiable(f'grown genus-{genus} surfaces have n >= {start_n} with n - {start_n} even',
                                     n=spec.n, genus=genus)
    rng = rng_for(spec.seed)
    phi = start.phi.tolist()
    twin = start.twin.tolist()
    tail = start.vert.tolist()
    degree = {v: int(d) for v, d in enumerate(start.vertex_degrees())}
    pairs = {_pair(tail[h], tail[twin[h]]) for h in range(len(twin))}
    center = start.num_vertices

    for _ in range((spec.n - start_n) // 2):
        corners = _split_triangle(phi, twin, tail, int(rng.integers(0, len(phi))), center)
        degree[center] = 3
        for v in corners:
            degree[v] += 1
            pairs.add(_pair(v, center))
        center += 1
        for _ in range(RandomConfig.FLIPS_PER_SPLIT):
            _flip(phi, twin, degree, tail, pairs, int(rng.integers(0, len(phi))))
    for _ in range(RandomConfig.FLIPS_PER_TRIANGLE * spec.n):
        _flip(phi, twin, degree, tail, pairs, int(rng.integers(0, len(phi))))

    t = from_phi(phi, twin, cls=Triangulation)
    if t.genus != genus:
        raise InvalidMapError(f'growth changed the genus to {t.genus}')
    return dualize(t)


def random_surface(spec: RandomSurfaceSpec, attempts: Optional[int] = None) -> CrossMetricSurface:
    """Deterministic random trivalent surface for a spec"""
    attempts = RandomConfig.SAMPLE_ATTEMPTS if attempts is None else attempts
    if spec.method == 'grown':
        if spec.condition == 'genus-exact' and spec.genus > max_genus(spec.n):
            raise ConditionUnsatisfiable(f'genus {spec.genus} exceeds (n+2)/4 for n={spec.n}',
                                         n=spec.n, genus=spec.genus)
        return _grown(spec)
    return _configuration(spec, attempts)


def grown_surface(n: int, genus: int, seed: int = 0) -> CrossMetricSurface:
    return random_surface(RandomSurfaceSpec(n=n, seed=seed, condition='genus-exact', genus=genus, method='grown'))


###############################################################################
# GROWTH STUDIES
###############################################################################

STUDY_COLUMNS = ['measure', 'n', 'g', 'seed', 'value', 'time_ms']


def nearest_grown_n(n: int, genus: int) -> int:
    """Closest valid vertex count for a grown genus-g surface"""
    start = 12 * genus + 2 if genus else 4
    n = max(n, start)
    return n + (n - start) % 2


def measure_one(measure: str, n: int, genus: int, seed: int) -> Dict[str, object]:
    """One row of a growth study. genus0_multiplicity reads n as the hole count."""
    from app.modules.genus_zero import multiplicity, pairing_decomposition
    from app.modules.pants import pants_decomposition
    from app.modules.systole import shortest_noncontractible

    start = time.perf_counter()
    if measure == 'genus0_multiplicity':
        s = genus_zero_with_holes(n, seed=seed)
        value = multiplicity(s, pairing_decomposition(s))
        g = 0
    else:
        s = grown_surface(nearest_grown_n(n, genus), genus, seed)
        g = s.genus
        if measure == 'edge_width':
            value, _ = shortest_noncontractible(s)
        else:
            result = pants_decomposition(s)
            lengths = [c.length(s) for c in result.curves]
            value = sum(lengths) if measure == 'pants_total_length' else max(lengths)
    return {'measure': measure, 'n': s.n if measure != 'genus0_multiplicity' else n, 'g': g,
            'seed': seed, 'value': value, 'time_ms': round((time.perf_counter() - start) * 1000, 3)}


def loglog_slope(table: pd.DataFrame) -> Optional[float]:
    """Least-squares slope of log(median value) against log(n)"""
    if table.empty:
        return None
    medians = table.groupby('n')['value'].median()
    medians = medians[medians > 0]
    if len(medians) < 2:
        return None
    x = np.log(medians.index.to_numpy(dtype=float))
    y = np.log(medians.to_numpy(dtype=float))
    design = np.vstack([x, np.ones_like(x)]).T
    slope, _ = np.linalg.lstsq(design, y, rcond=None)[0]
    return float(slope)


def growth_study(n_values: Iterable[int], samples_per_n: int, measure: str, genus: int = 2,
                 seed: int = 0, workers: int = 1) -> Tuple[pd.DataFrame, Optional[float]]:
    """Per-(n, sample) measurements and their log-log slope"""
    if measure not in RandomConfig.MEASURES:
        raise InvalidMapError(f'unknown measure: {measure}')
    jobs = [(measure, int(n), genus, seed + k) for n in n_values for k in range(samples_per_n)]
    if not jobs:
        return pd.DataFrame(columns=STUDY_COLUMNS), None

    if workers > 1:
        from app.utils.worker_pool import WorkerPool
        pool = WorkerPool(workers=workers)
        rows = pool.map(measure_one, jobs)
        stats = pool.get_stats()
        if stats['jobs_failed']:
            log_event('study_jobs_failed', {'measure': measure, 'failed': stats['jobs_failed'],
                                             'jobs': len(jobs)}, violation=True)
            raise JobsFailed(f"{stats['jobs_failed']} of {len(jobs)} study jobs failed",
                             failed=stats['jobs_failed'], errors=stats['errors'][:5])
    else:
        rows = [measure_one(*job) for job in jobs]
    table = pd.DataFrame(rows, columns=STUDY_COLUMNS)
    slope = loglog_slope(table)
    logger.info(f"Growth study {measure}: {len(table)} rows, slope {slope}")
    return table, slope
