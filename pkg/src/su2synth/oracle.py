"""Brute-force minimum time by shortest-path search over a chart lattice.

Independent of the PDE solver: no value field, no interpolation. From a
state the search applies every unit control for a fixed time ``tau``
(exact group flow) and files the result under its nearest lattice node.
Each node settles at most ``per_node`` states that are at least ``sep``
apart in the chart, so a little of the sub-node position survives
snapping; this matters for motion along the bracket direction I_y,
which is second order in the controls. The first settled state whose
node is the identity node ends the search.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from ._accel import njit
from .dynamics import BRANCH_MARGIN, DEFAULT_DIRECTIONS, make_control_set
from .errors import InvalidInputError, UnreachedError
from .su2 import TWO_PI, log_map

DEFAULT_BUDGET = 2_000_000
DEFAULT_PER_NODE = 3


@njit
def _qmul(p, q):
    return np.array([
        p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
        p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
        p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
        p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
    ])


@njit
def _qexp(a, b, c):
    r = math.sqrt(a * a + b * b + c * c)
    k = 0.5 - r * r / 48.0 if r < 1e-6 else math.sin(0.5 * r) / r
    return np.array([math.cos(0.5 * r), k * a, k * b, k * c])


@njit
def _qlog(q):
    s = math.sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    if s < 1e-8:
        f = 2.0 * (1.0 + s * s / 6.0)
    else:
        f = 2.0 * math.atan2(s, q[0]) / s
    return np.array([q[1] * f, q[2] * f, q[3] * f])


@njit
def _search(q0, half, ho, tau, steps, budget, per_node, sep, r_max):
    """Returns (time, settled nodes, settled states, status); status 0 ok,
    1 budget exhausted, 2 frontier exhausted."""
    n = 2 * half + 1
    cnt = np.zeros(n * n * n, dtype=np.int32)
    pos = np.zeros((n * n * n * per_node, 3))
    goal = half + n * (half + n * half)
    heap = [(0.0, 0, q0[0], q0[1], q0[2], q0[3])]
    seq = 1
    nodes = 0
    states = 0
    sep2 = sep * sep
    r2max = r_max * r_max
    while len(heap) > 0:
        d, _, w, x, y, z = heapq.heappop(heap)
        q = np.array([w, x, y, z])
        p = _qlog(q)
        i = (int(round(p[0] / ho)) + half) + n * ((int(round(p[1] / ho)) + half)
                                                   + n * (int(round(p[2] / ho)) + half))
        m = cnt[i]
        if m >= per_node:
            continue
        crowded = False
        for j in range(m):
            o = pos[i * per_node + j]
            if (o[0] - p[0]) ** 2 + (o[1] - p[1]) ** 2 + (o[2] - p[2]) ** 2 < sep2:
                crowded = True
                break
        if crowded:
            continue
        pos[i * per_node + m] = p
        cnt[i] = m + 1
        states += 1
        if m == 0:
            nodes += 1
        if i == goal:
            return d, nodes, states, 0
        if nodes > budget:
            return np.inf, nodes, states, 1
        for k in range(steps.shape[0]):
            qn = _qmul(steps[k], q)
            e = _qlog(qn)
            if e[0] * e[0] + e[1] * e[1] + e[2] * e[2] > r2max:
                continue
            ja = int(round(e[0] / ho)) + half
            jb = int(round(e[1] / ho)) + half
            jc = int(round(e[2] / ho)) + half
            if ja < 0 or jb < 0 or jc < 0 or ja >= n or jb >= n or jc >= n:
                continue
            if cnt[ja + n * (jb + n * jc)] >= per_node:
                continue
            heapq.heappush(heap, (d + tau, seq, qn[0], qn[1], qn[2], qn[3]))
            seq += 1
    return np.inf, nodes, states, 2


@dataclass
class OracleResult:
    time: float
    bound: float  # quantisation slack, h_o + tau
    settled_nodes: int
    settled_states: int


def dijkstra_min_time(U_target, h_o: float = 0.05, tau: float = 0.05,
                      n_dir: int = DEFAULT_DIRECTIONS, extent: float | None = None,
                      budget: int = DEFAULT_BUDGET, per_node: int = DEFAULT_PER_NODE,
                      sep: float | None = None, use_numba: bool | None = None) -> OracleResult:
    """Shortest arrival time from ``U_target`` to the identity lattice node.

    ``extent`` bounds the lattice to [-extent, extent]^3 (default: the
    start's largest coordinate plus 1, at least 2.5). ``sep`` defaults to
    ``0.4 * h_o``. Raises :class:`UnreachedError` when the identity node
    is not settled within ``budget`` lattice nodes.
    """
    if not (h_o > 0 and tau >= h_o):
        raise InvalidInputError("need h_o > 0 and tau >= h_o (got %r, %r)" % (h_o, tau))
    if per_node < 1:
        raise InvalidInputError("per_node must be >= 1")
    x = log_map(U_target)
    if extent is None:
        extent = max(2.5, float(np.abs(x).max()) + 1.0)
    extent = min(extent, TWO_PI)
    half = int(math.floor(extent / h_o + 1e-9))
    if np.abs(x).max() > half * h_o + 0.5 * h_o:
        raise InvalidInputError("start %r outside the lattice extent %g" % (tuple(x), extent))
    sep = 0.4 * h_o if sep is None else float(sep)
    controls = make_control_set(n_dir)
    steps = np.array([_qexp(tau * v1, 0.0, tau * v2) for v1, v2 in controls])
    q0 = np.asarray(_qexp(float(x[0]), float(x[1]), float(x[2])))
    use_numba = _accel.USE_NUMBA if use_numba is None else use_numba
    kernel = _search if use_numba else getattr(_search, "py_func", _search)
    t, nodes, states, status = kernel(q0, half, float(h_o), float(tau), steps, int(budget),
                                      int(per_node), sep, TWO_PI - BRANCH_MARGIN)
    if status != 0:
        why = "node budget %d exhausted" % budget if status == 1 else "frontier exhausted"
        raise UnreachedError("identity node not settled: %s (%d nodes)" % (why, nodes))
    return OracleResult(time=float(t), bound=float(h_o + tau), settled_nodes=int(nodes),
                        settled_states=int(states))
