"""Feedback extraction, closed-loop tracing and gate compilation."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .dynamics import control_columns, make_control_set
from .errors import (
    InvalidInputError,
    NonTerminalTrajectoryError,
    NumericalError,
    OnTargetError,
    OutOfGridError,
    WrongDirectionError,
)
from .solver import ValueField, interpolate, interpolate_or_one, kruskov_inverse
from .su2 import IDENTITY, as_group_element, dagger, exp_map, group_distance, log_map, rotation

TO_IDENTITY = "TO_IDENTITY"
FROM_IDENTITY = "FROM_IDENTITY"
ELIDE_TOL = 1e-12
GATES_FORMAT_VERSION = 1


def step_unitary(v, dt: float) -> np.ndarray:
    """exp(-i dt (v1 I_x + v2 I_z))."""
    return exp_map(np.array([dt * v[0], 0.0, dt * v[1]]))


def _scheme_values(x, S: ValueField, controls: np.ndarray) -> np.ndarray:
    """Right-hand side of the upwind update at ``x`` for every control."""
    h = S.grid.h
    x = np.asarray(x, dtype=float)
    up = np.empty(3)
    dn = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        up[i] = interpolate_or_one(S, x + e)
        dn[i] = interpolate_or_one(S, x - e)
    cols = control_columns(x)[0]  # (2, 3)
    f = controls @ cols  # (n_dir, 3)
    fp = np.maximum(f, 0.0)
    fm = np.maximum(-f, 0.0)
    num = h * S.config.running_cost + fp @ up + fm @ dn
    return num / (h + (fp + fm).sum(axis=1))


def optimal_control(x, S: ValueField, controls: np.ndarray | None = None) -> np.ndarray:
    """Control minimising the discrete scheme at ``x``; ties go to the lowest index."""
    if controls is None:
        controls = make_control_set(S.config.n_dir)
    x = np.asarray(x, dtype=float)
    if group_distance(exp_map(x), IDENTITY) <= S.config.eps_target:
        raise OnTargetError("point %r is on the target; no control needed" % (tuple(x),))
    interpolate(S, x)  # bounds check
    q = _scheme_values(x, S, controls)
    return controls[int(np.argmin(q))].copy()


# ---------------------------------------------------------------------------
# terminal homing: exact sub-Riemannian geodesic for small residuals


def rotating_control(t, phi: float, omega: float) -> np.ndarray:
    """Unit control whose direction turns at rate ``omega`` from angle ``phi``."""
    ang = phi - omega * np.asarray(t, dtype=float)
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def geodesic_propagator(T: float, phi: float, omega: float) -> np.ndarray:
    """Propagator of dU/dt = -i(v1 I_x + v2 I_z) U under :func:`rotating_control`."""
    th = omega * T
    p = np.array([T * math.cos(phi), -th, T * math.sin(phi)])
    return exp_map(np.array([0.0, th, 0.0])) @ exp_map(p)


def shortest_geodesic(W) -> tuple[float, float, float]:
    """Minimum-time rotating-control arc with propagator ``W``.

    Returns ``(T, phi, omega)``. Normal geodesics of this control system
    have constant-speed controls turning at a constant rate, so the
    search is over three parameters; several starts are tried and the
    shortest exact solution kept.
    """
    W = np.asarray(W, dtype=complex)
    x = log_map(W)
    if abs(x[1]) < 1e-13:
        return float(math.hypot(x[0], x[2])), float(math.atan2(x[2], x[0])), 0.0

    def resid(z):
        T, phi, th = z
        omega = th / T if T > 1e-12 else 0.0
        D = geodesic_propagator(T, phi, omega) - W
        return np.concatenate([D.real.ravel(), D.imag.ravel()])

    b = abs(x[1])
    starts = [(math.hypot(x[0], x[2]) + 1e-3, math.atan2(x[2], x[0]), 0.0)]
    tb = math.sqrt(max(4 * math.pi * b - b * b, 1e-6))
    for phi0 in np.linspace(0.0, 2 * math.pi, 8, endpoint=False):
        for sgn in (1.0, -1.0):
            starts.append((tb, phi0, sgn * (2 * math.pi - b)))
    for T0 in (0.5 * tb, 1.5 * tb):
        for th0 in np.linspace(-2 * math.pi, 2 * math.pi, 9):
            for phi0 in np.linspace(0.0, 2 * math.pi, 4, endpoint=False):
                starts.append((T0, phi0, th0))
    best = None
    for z0 in starts:
        r = least_squares(resid, z0, bounds=([0.0, -np.inf, -np.inf], np.inf),
                          xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.abs(r.fun).max() < 1e-11 and (best is None or r.x[0] < best[0] - 1e-12):
            best = r.x
    if best is None:
        raise NumericalError("geodesic shooting failed for residual %r" % (tuple(x),))
    T, phi, th = (float(v) for v in best)
    return T, phi, th / T


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    times: np.ndarray  # (n + 1,)
    points: np.ndarray  # (n + 1, 3) chart points
    controls: np.ndarray  # (n, 2) control applied on [times[k], times[k+1]]
    dt: float
    start: np.ndarray  # U0
    terminal: bool
    terminal_distance: float
    feedback_steps: int = 0  # steps before the homing arc
    meta: dict = field(default_factory=dict)

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    @property
    def durations(self) -> np.ndarray:
        return np.diff(self.times)

    def __len__(self):
        return self.controls.shape[0]

    def rows(self) -> np.ndarray:
        """``(t, a, b, c, v1, v2)`` per sample; the final sample has zero control."""
        v = np.vstack([self.controls, np.zeros((1, 2))]) if len(self) else np.zeros((1, 2))
        return np.column_stack([self.times, self.points, v])


def write_trajectory_csv(traj: Trajectory, path) -> None:
    np.savetxt(path, traj.rows(), delimiter=",", header="t,a,b,c,v1,v2", comments="", fmt="%.12g")


def default_capture_radius(S: ValueField) -> float:
    # the discrete value is least reliable in the last few cells around the
    # target, so the exact arc takes over three cells out
    return max(3.0 * S.grid.h, 2.0 * S.config.eps_target)


def trace_trajectory(U0, S: ValueField, dt: float | None = None, eps_reach: float | None = None,
                     controls: np.ndarray | None = None, home: bool = True) -> Trajectory:
    """Closed-loop Euler integration of the feedback towards the identity.

    The feedback phase stops inside the capture radius ``eps_reach``
    (default ``3 * h`` in group distance); the residual is then removed by the
    shortest exact arc, sampled with the same step ``dt``. A run that
    exceeds ``4 * C(U0) + 1`` is returned with ``terminal=False``.
    """
    U0 = as_group_element(U0)
    cfg = S.config
    dt = S.grid.h / 2.0 if dt is None else float(dt)
    if not dt > 0:
        raise InvalidInputError("dt must be positive")
    eps_reach = default_capture_radius(S) if eps_reach is None else float(eps_reach)
    controls = make_control_set(cfg.n_dir) if controls is None else controls

    U = U0.copy()
    x = log_map(U)
    times, points, used = [0.0], [x], []
    dist = group_distance(U, IDENTITY)
    terminal = True
    t = 0.0
    if dist > eps_reach:
        cap = 4.0 * kruskov_inverse(S, x) + 1.0
        while dist > eps_reach:
            if t >= cap:
                terminal = False
                break
            try:
                v = optimal_control(x, S, controls)
            except OnTargetError:
                break  # inside the target set: the arc below finishes
            except OutOfGridError:
                terminal = False
                break
            U = step_unitary(v, dt) @ U
            x = log_map(U)
            t += dt
            times.append(t)
            points.append(x)
            used.append(v)
            dist = group_distance(U, IDENTITY)
    n_feedback = len(used)

    if terminal and home and dist > 0.0:
        T, phi, omega = shortest_geodesic(dagger(U))
        n = max(1, math.ceil(T / dt - 1e-9)) if T > 0 else 0
        if n:
            d = T / n
            # midpoint samples of the turning control
            for v in rotating_control((np.arange(n) + 0.5) * d, phi, omega):
                U = step_unitary(v, d) @ U
                x = log_map(U)
                t += d
                times.append(t)
                points.append(x)
                used.append(v)
        dist = group_distance(U, IDENTITY)

    return Trajectory(times=np.array(times), points=np.array(points),
                      controls=np.array(used).reshape(-1, 2), dt=dt, start=U0,
                      terminal=terminal, terminal_distance=float(dist),
                      feedback_steps=n_feedback,
                      meta={"eps_reach": eps_reach, "h": S.grid.h})


# ---------------------------------------------------------------------------
# gate sequences


@dataclass
class GateSequence:
    """Elementary rotations in application order (first entry acts first).

    Gate ``(axis, angle)`` is exp(-i * angle * I_axis).
    """

    gates: list
    target: np.ndarray
    direction: str
    error: float
    dt: float | None = None

    def product(self) -> np.ndarray:
        P = IDENTITY.copy()
        for axis, angle in self.gates:
            P = rotation(axis, angle) @ P
        return P

    def to_json(self) -> str:
        return json.dumps({
            "format_version": GATES_FORMAT_VERSION,
            "direction": self.direction,
            "dt": self.dt,
            "error_estimate": self.error,
            "target": [[[float(z.real), float(z.imag)] for z in row] for row in self.target],
            "gates": [{"axis": a, "angle": float(g)} for a, g in self.gates],
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "GateSequence":
        d = json.loads(text)
        if d.get("format_version") != GATES_FORMAT_VERSION:
            raise InvalidInputError("unsupported gate file version %r" % d.get("format_version"))
        target = np.array([[complex(re, im) for re, im in row] for row in d["target"]])
        return cls(gates=[(g["axis"], g["angle"]) for g in d["gates"]], target=target,
                   direction=d["direction"], error=d["error_estimate"], dt=d.get("dt"))


def compile_gates(traj: Trajectory) -> GateSequence:
    """Split every step exp(-i d (v1 I_x + v2 I_z)) into a Z then an X rotation.

    The recorded error is the Frobenius distance between (gate product) U0
    and the identity.
    """
    if not traj.terminal:
        raise NonTerminalTrajectoryError("trajectory did not reach the capture radius")
    gates = []
    for d, (v1, v2) in zip(traj.durations, traj.controls):
        # exp(-i d v1 I_x) exp(-i d v2 I_z): the Z factor acts first
        for axis, ang in (("Z", v2 * d), ("X", v1 * d)):
            if abs(ang) > ELIDE_TOL:
                gates.append((axis, float(ang)))
    seq = GateSequence(gates=gates, target=traj.start.copy(), direction=TO_IDENTITY,
                       error=0.0, dt=traj.dt)
    seq.error = group_distance(seq.product() @ traj.start, IDENTITY)
    return seq


def reverse_to_forward(seq: GateSequence) -> GateSequence:
    """Turn a sequence with P U0 ~ I into one with Q ~ U0 (Q = P^-1)."""
    if seq.direction != TO_IDENTITY:
        raise WrongDirectionError("expected a %s sequence, got %s" % (TO_IDENTITY, seq.direction))
    gates = [(axis, -angle) for axis, angle in reversed(seq.gates)]
    return GateSequence(gates=gates, target=seq.target.copy(), direction=FROM_IDENTITY,
                        error=seq.error, dt=seq.dt)


def forward_error(seq: GateSequence) -> float:
    """Distance actually achieved by a sequence against its goal."""
    P = seq.product()
    if seq.direction == TO_IDENTITY:
        return group_distance(P @ seq.target, IDENTITY)
    return group_distance(P, seq.target)


# ---------------------------------------------------------------------------


def bounds_report(C_value: float, n_qubits: int, epsilon: float) -> dict:
    """Order-of-magnitude gate-count scale n^6 C^3 / eps^2 (constants unknown)."""
    if C_value < 0 or epsilon <= 0 or n_qubits < 1:
        raise InvalidInputError("need C >= 0, n >= 1, epsilon > 0")
    scale = float(n_qubits) ** 6 * float(C_value) ** 3 / float(epsilon) ** 2
    return {
        "C": float(C_value),
        "n_qubits": int(n_qubits),
        "epsilon": float(epsilon),
        "scale": scale,
        "upper_bound": "G(U0, eps) <= O(n^6 C(U0)^3 / eps^2) ~ O(%.6g)" % scale,
        "lower_bound": "C(U0) <= L_max * G(U0) * T_max with L_max = 1 (G, T_max symbolic)",
        "disclaimer": "asymptotic scaling only; the hidden constants are unknown",
    }
