#!/usr/bin/env python3
"""
Shared helpers for the test suite
"""

from collections import deque

import numpy as np
import pytest

from app.modules.curves import CrossCurve, reduce_backtracks


def _entering(s, root):
    """BFS tree of the faces: for every reached face the half-edge crossed to enter it"""
    parent = {root: None}
    queue = deque([root])
    while queue:
        f = queue.popleft()
        for k in s.face_cycle(f):
            g = int(s.face[s.twin[k]])
            if g not in parent and not s.hole_face[g]:
                parent[g] = int(s.twin[k])
                queue.append(g)
    return parent


def _path(s, parent, f):
    path = []
    while parent[f] is not None:
        path.append(parent[f])
        f = int(s.face[s.twin[parent[f]]])
    return path[::-1]


def fundamental_curves(s, count, seed=0):
    """Face-simple curves closing a BFS tree of the faces through one extra edge each"""
    rng = np.random.default_rng(seed)
    open_faces = [f for f in range(s.num_faces_total) if not s.hole_face[f]]
    curves = []
    for _ in range(50 * count):
        if len(curves) == count:
            break
        root = int(rng.choice(open_faces))
        parent = _entering(s, root)
        h = int(rng.integers(s.num_half_edges))
        a, b = int(s.face[s.twin[h]]), int(s.face[h])
        if a == b or a not in parent or b not in parent:
            continue
        route = _path(s, parent, a) + [h] + [int(s.twin[x]) for x in reversed(_path(s, parent, b))]
        crossings = reduce_backtracks(route, s.twin)
        if crossings:
            curves.append(CrossCurve(tuple(crossings)))
    return curves


@pytest.fixture
def tree_curves():
    return fundamental_curves
