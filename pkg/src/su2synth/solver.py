"""Discounted minimum-time value function on a uniform chart grid.

The value S = 1 - exp(-C) is computed by Jacobi value iteration of the
upwind (Kushner-Dupuis) scheme

    S(x) = min_v [ h l(v) + sum_i (S(x + h e_i) f+_i + S(x - h e_i) f-_i) ] / (h + |f|_1)

with S pinned to 0 on cells identified with the identity. Neighbours
off the grid, or inside the excluded shell near chart radius 2*pi, read
as 1 (infinite time).
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from ._accel import njit
from .dynamics import BRANCH_MARGIN, DEFAULT_DIRECTIONS, control_columns, make_control_set
from .errors import (
    EmptyTargetError,
    InvalidInputError,
    NaNDetectedError,
    OutOfGridError,
    UnreachableError,
)
from .su2 import TWO_PI

log = logging.getLogger(__name__)

INTERIOR, TARGET, EXCLUDED = 0, 1, 2

FIELD_MAGIC = b"SU2HJB-FIELD\n"
FIELD_VERSION = 1
UNREACHABLE_S = 1.0 - 1e-12


@dataclass(frozen=True)
class SolverConfig:
    h: float = 0.1
    R: float = 3.0
    eps_target: float | None = None  # defaults to 0.5 * h: the centre cell alone
    n_dir: int = DEFAULT_DIRECTIONS
    tol: float = 1e-6
    max_iters: int = 3000
    running_cost: float = 1.0

    def __post_init__(self):
        if self.eps_target is None:
            object.__setattr__(self, "eps_target", 0.5 * self.h)
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InvalidInputError("grid spacing must be positive, got %r" % self.h)
        if not self.R >= self.h:
            raise InvalidInputError("grid extent %r smaller than spacing %r" % (self.R, self.h))
        if not 0.0 < self.eps_target < 0.5:
            raise InvalidInputError("target radius must lie in (0, 0.5), got %r" % self.eps_target)
        # tol == 0 is accepted: it asks for an exact fixed point
        if not self.tol >= 0.0:
            raise InvalidInputError("tolerance must be >= 0, got %r" % self.tol)
        if int(self.max_iters) < 1:
            raise InvalidInputError("max_iters must be >= 1")
        if not self.running_cost > 0.0:
            raise InvalidInputError("running cost must be positive")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class Grid:
    h: float
    R: float
    half: int  # cells on each side of the centre
    mask: np.ndarray  # (n, n, n) uint8 indexed [ia, ib, ic]

    @property
    def n(self) -> int:
        return 2 * self.half + 1

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.n,) * 3

    @property
    def axis(self) -> np.ndarray:
        return self.h * (np.arange(self.n) - self.half)

    @property
    def extent(self) -> float:
        """Largest on-grid coordinate."""
        return self.h * self.half

    def points(self) -> np.ndarray:
        """All cell centres, flattened a-fastest, shape (n**3, 3)."""
        ax = self.axis
        c, b, a = np.meshgrid(ax, ax, ax, indexing="ij")
        return np.column_stack([a.ravel(), b.ravel(), c.ravel()])

    def flat_index(self, ia, ib, ic):
        return ia + self.n * (ib + self.n * ic)

    def index_of(self, x) -> tuple[int, int, int]:
        """Index of the grid node at ``x``; raises if ``x`` is not on a node."""
        idx = []
        for coord in np.asarray(x, dtype=float):
            k = coord / self.h + self.half
            kr = int(round(k))
            if abs(k - kr) > 1e-6 or not 0 <= kr < self.n:
                raise OutOfGridError("%r is not a grid node" % (tuple(x),))
            idx.append(kr)
        return tuple(idx)


def build_grid(config: SolverConfig) -> Grid:
    h, R = config.h, config.R
    half = int(math.floor(R / h + 1e-9))
    ax = h * (np.arange(2 * half + 1) - half)
    a, b, c = np.meshgrid(ax, ax, ax, indexing="ij")
    r = np.sqrt(a * a + b * b + c * c)
    mask = np.full(r.shape, INTERIOR, dtype=np.uint8)
    mask[r >= TWO_PI - BRANCH_MARGIN] = EXCLUDED
    dist = 2.0 * math.sqrt(2.0) * np.abs(np.sin(r / 4.0))
    mask[(dist <= config.eps_target) & (mask != EXCLUDED)] = TARGET
    if not (mask == TARGET).any():
        raise EmptyTargetError("no grid cell lies within %g of the identity" % config.eps_target)
    return Grid(h=h, R=R, half=half, mask=mask)


@dataclass
class ValueField:
    S: np.ndarray  # (n, n, n) indexed [ia, ib, ic]
    grid: Grid
    config: SolverConfig
    iterations: int = 0
    residual: float = math.inf
    converged: bool = False
    residual_history: list = field(default_factory=list, repr=False)

    @property
    def C(self) -> np.ndarray:
        """Un-normalised minimum time on every cell (inf where S == 1)."""
        with np.errstate(divide="ignore"):
            return -np.log1p(-self.S)


def initial_field(config: SolverConfig, grid: Grid | None = None) -> ValueField:
    grid = build_grid(config) if grid is None else grid
    S = np.ones(grid.dims)
    S[grid.mask == TARGET] = 0.0
    return ValueField(S=S, grid=grid, config=config)


# ---------------------------------------------------------------------------
# sweep kernels


@dataclass
class SweepTables:
    """Per-interior-cell data reused by every sweep."""

    interior: np.ndarray  # flat indices (a-fastest) of INTERIOR cells
    nbr: np.ndarray  # (n_int, 6) flat neighbour index, -1 => value 1
    cols: np.ndarray  # (n_int, 2, 3) chart velocity of u = e_a, e_c
    controls: np.ndarray  # (n_dir, 2)
    cost: np.ndarray  # (n_dir,)
    h: float


def sweep_tables(grid: Grid, controls: np.ndarray, running_cost: float = 1.0) -> SweepTables:
    n = grid.n
    mask = grid.mask.ravel(order="F")
    interior = np.flatnonzero(mask == INTERIOR)
    ia = interior % n
    ib = (interior // n) % n
    ic = interior // (n * n)
    nbr = np.empty((interior.size, 6), dtype=np.int64)
    strides = (1, n, n * n)
    for d, coord in enumerate((ia, ib, ic)):
        up = np.where(coord + 1 < n, interior + strides[d], -1)
        dn = np.where(coord - 1 >= 0, interior - strides[d], -1)
        nbr[:, 2 * d] = up
        nbr[:, 2 * d + 1] = dn
    # excluded cells behave like the outside of the grid
    excluded = mask == EXCLUDED
    valid = nbr >= 0
    nbr[valid & excluded[np.where(valid, nbr, 0)]] = -1
    cols = control_columns(grid.points()[interior])
    controls = np.ascontiguousarray(controls, dtype=float)
    cost = np.full(controls.shape[0], float(running_cost))
    return SweepTables(interior, nbr, cols, controls, cost, float(grid.h))


@njit
def _sweep_numba(S, out, interior, nbr, cols, controls, cost, h):
    res = 0.0
    nan = False
    for j in range(interior.shape[0]):
        idx = interior[j]
        best = np.inf
        for k in range(controls.shape[0]):
            v1 = controls[k, 0]
            v2 = controls[k, 1]
            num = h * cost[k]
            den = h
            for d in range(3):
                f = v1 * cols[j, 0, d] + v2 * cols[j, 1, d]
                if f > 0.0:
                    nb = nbr[j, 2 * d]
                elif f < 0.0:
                    nb = nbr[j, 2 * d + 1]
                    f = -f
                elif f == 0.0:
                    continue
                else:
                    nan = True
                    continue
                val = 1.0 if nb < 0 else S[nb]
                num += f * val
                den += f
            q = num / den
            if q < best:
                best = q
            elif q != q:
                nan = True
        out[idx] = best
        diff = abs(best - S[idx])
        if diff > res:
            res = diff
    if nan:
        return np.nan
    return res


def _sweep_numpy(S, out, t: SweepTables):
    padded = np.append(S, 1.0)  # index -1 reads 1
    vals = padded[t.nbr]
    up, dn = vals[:, 0::2], vals[:, 1::2]
    best = np.full(t.interior.size, np.inf)
    any_nan = False
    for k in range(t.controls.shape[0]):
        v1, v2 = t.controls[k]
        f = v1 * t.cols[:, 0, :] + v2 * t.cols[:, 1, :]
        fp = np.maximum(f, 0.0)
        fm = np.maximum(-f, 0.0)
        num = t.h * t.cost[k] + (fp * up + fm * dn).sum(axis=1)
        den = t.h + (fp + fm).sum(axis=1)
        q = num / den
        any_nan |= bool(np.isnan(q).any())
        np.minimum(best, q, out=best)
    out[t.interior] = best
    if any_nan:
        return math.nan
    return float(np.abs(best - S[t.interior]).max()) if best.size else 0.0


def sweep_flat(S_flat: np.ndarray, tables: SweepTables, use_numba: bool | None = None):
    """One Jacobi sweep on a flat (a-fastest) value array.

    Returns ``(S_new, residual)``; non-interior entries are copied.
    """
    use_numba = _accel.USE_NUMBA if use_numba is None else use_numba
    out = S_flat.copy()
    if use_numba:
        res = _sweep_numba(S_flat, out, tables.interior, tables.nbr, tables.cols,
                           tables.controls, tables.cost, tables.h)
    else:
        res = _sweep_numpy(S_flat, out, tables)
    if math.isnan(res) or np.isnan(out).any():
        raise NaNDetectedError("NaN produced during value-iteration sweep")
    return out, float(res)


def value_iteration_sweep(S: ValueField, controls: np.ndarray, tables: SweepTables | None = None,
                          use_numba: bool | None = None):
    """One full Jacobi sweep. Returns ``(new_field, residual)``."""
    if tables is None:
        tables = sweep_tables(S.grid, controls, S.config.running_cost)
    flat, res = sweep_flat(S.S.ravel(order="F"), tables, use_numba)
    new = dataclasses.replace(S, S=flat.reshape(S.grid.dims, order="F"), residual=res,
                              iterations=S.iterations + 1,
                              residual_history=S.residual_history + [res])
    return new, res


def solve(config: SolverConfig, use_numba: bool | None = None, record_history: bool = True,
          callback=None) -> ValueField:
    """Iterate sweeps from S = 1 off target until residual <= tol.

    On hitting ``max_iters`` a warning is logged and the unconverged field
    is returned with ``converged=False``. ``callback(iteration, S_flat,
    residual)`` is invoked after each sweep when given.
    """
    grid = build_grid(config)
    controls = make_control_set(config.n_dir)
    tables = sweep_tables(grid, controls, config.running_cost)
    S = initial_field(config, grid).S.ravel(order="F")
    history = []
    res = math.inf
    it = 0
    converged = False
    while it < config.max_iters:
        S, res = sweep_flat(S, tables, use_numba)
        it += 1
        if record_history:
            history.append(res)
        if callback is not None:
            callback(it, S, res)
        if res <= config.tol:
            converged = True
            break
    if not converged:
        log.warning("value iteration did not converge: %d sweeps, residual %.3e", it, res)
    return ValueField(S=S.reshape(grid.dims, order="F"), grid=grid, config=config,
                      iterations=it, residual=res, converged=converged,
                      residual_history=history)


# ---------------------------------------------------------------------------
# evaluation


def interpolate(S: ValueField, x) -> float:
    """Trilinear interpolation of S at chart point ``x``."""
    g = S.grid
    x = np.asarray(x, dtype=float)
    k = x / g.h + g.half
    if np.any(k < -1e-9) or np.any(k > g.n - 1 + 1e-9):
        raise OutOfGridError("point %r outside the grid" % (tuple(x),))
    k = np.clip(k, 0.0, g.n - 1)
    i0 = np.minimum(np.floor(k).astype(int), g.n - 2)
    t = k - i0
    cube = S.S[i0[0]:i0[0] + 2, i0[1]:i0[1] + 2, i0[2]:i0[2] + 2]
    wa = np.array([1 - t[0], t[0]])
    wb = np.array([1 - t[1], t[1]])
    wc = np.array([1 - t[2], t[2]])
    return float(np.einsum("ijk,i,j,k->", cube, wa, wb, wc))


def interpolate_or_one(S: ValueField, x) -> float:
    """Like :func:`interpolate` but reads 1 outside the grid."""
    try:
        return interpolate(S, x)
    except OutOfGridError:
        return 1.0


def kruskov_inverse(S: ValueField, x) -> float:
    """Minimum time C = -ln(1 - S) at ``x``."""
    s = interpolate(S, x)
    if s >= UNREACHABLE_S:
        raise UnreachableError("identity not reachable from %r within the grid" % (tuple(np.asarray(x)),))
    return float(-math.log1p(-s)) if s > 0.0 else 0.0


PLANES = {"ab": (0, 1, 2), "ac": (0, 2, 1), "bc": (1, 2, 0),
          "ba": (1, 0, 2), "ca": (2, 0, 1), "cb": (2, 1, 0)}


def slice_export(S: ValueField, plane: str = "ab", offset: float = 0.0) -> np.ndarray:
    """Rows ``(coord1, coord2, C)`` over a coordinate plane.

    ``plane`` names the two varying axes in order (``"ab"``, ``"cb"``, ...);
    the third axis is held at ``offset``, which must be a grid node.
    """
    if plane not in PLANES:
        raise InvalidInputError("plane must be one of %s" % sorted(PLANES))
    p, q, fixed = PLANES[plane]
    g = S.grid
    probe = np.zeros(3)
    probe[fixed] = offset
    k = g.index_of(probe)[fixed]
    C = S.C
    idx = [slice(None)] * 3
    idx[fixed] = k
    sl = C[tuple(idx)]
    if p > q:
        sl = sl.T
    ax = g.axis
    u, w = np.meshgrid(ax, ax, indexing="ij")
    return np.column_stack([u.ravel(), w.ravel(), sl.ravel()])


def write_slice_csv(rows: np.ndarray, path, plane: str = "ab") -> None:
    names = {"a": "a", "b": "b", "c": "c"}
    header = "%s,%s,C" % (names[plane[0]], names[plane[1]])
    np.savetxt(path, rows, delimiter=",", header=header, comments="", fmt="%.10g")


# ---------------------------------------------------------------------------
# persistence


def _header(S: ValueField) -> dict:
    c = S.config
    return {
        "format": "su2hjb-field",
        "version": FIELD_VERSION,
        "h": c.h,
        "R": c.R,
        "eps_target": c.eps_target,
        "n_dir": c.n_dir,
        "tol": c.tol,
        "max_iters": c.max_iters,
        "running_cost": c.running_cost,
        "iterations": S.iterations,
        "residual": S.residual,
        "converged": S.converged,
        "dims": list(S.grid.dims),
        "dtype": "<f8",
        "order": "a-fastest",
    }


def save_field(S: ValueField, path, extra: dict | None = None) -> None:
    """Write magic line, one JSON header line, then raw little-endian float64."""
    head = _header(S)
    if extra:
        head["meta"] = extra
    with open(path, "wb") as fh:
        fh.write(FIELD_MAGIC)
        fh.write(json.dumps(head).encode("ascii") + b"\n")
        fh.write(S.S.ravel(order="F").astype("<f8").tobytes())


def load_field(path) -> ValueField:
    with open(path, "rb") as fh:
        magic = fh.readline()
        if magic != FIELD_MAGIC:
            raise InvalidInputError("%s is not a value-field file" % path)
        head = json.loads(fh.readline().decode("ascii"))
        if head.get("version") != FIELD_VERSION:
            raise InvalidInputError("unsupported field version %r" % head.get("version"))
        data = np.frombuffer(fh.read(), dtype="<f8").astype(float)
    config = SolverConfig(h=head["h"], R=head["R"], eps_target=head["eps_target"],
                          n_dir=head["n_dir"], tol=head["tol"], max_iters=head["max_iters"],
                          running_cost=head["running_cost"])
    grid = build_grid(config)
    if list(grid.dims) != head["dims"] or data.size != np.prod(grid.dims):
        raise InvalidInputError("field dimensions do not match header")
    return ValueField(S=data.reshape(grid.dims, order="F"), grid=grid, config=config,
                      iterations=head["iterations"], residual=head["residual"],
                      converged=head["converged"])
