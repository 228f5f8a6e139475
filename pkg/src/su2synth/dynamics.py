"""Chart velocity of the right-invariant flow dU/dt = -i (v1 I_x + v2 I_z) U.

In the chart U = exp(X) with X = -i (x . I) the flow satisfies
dexp_X(dX/dt) = u where u = (v1, 0, v2), so the chart velocity is
dexp_X^{-1}(u). For su(2) ~ (R^3, cross product) that is

    u_par + k(r) u_perp - 0.5 * x cross u,    k(r) = (r/2) cot(r/2).
"""
from __future__ import annotations

import math

import numpy as np

from .errors import BadResolutionError, InvalidInputError, NearBranchError
from .su2 import TWO_PI

BRANCH_MARGIN = 0.1
MIN_DIRECTIONS = 8
DEFAULT_DIRECTIONS = 16


def perp_factor(r):
    """(r/2) cot(r/2), with its Taylor series near the origin. Vectorised."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    small = r < 1e-3
    rs = r[small]
    out[small] = 1.0 - rs ** 2 / 12.0 - rs ** 4 / 720.0
    half = 0.5 * r[~small]
    out[~small] = half / np.tan(half)
    return out


def dexp_inv(x) -> np.ndarray:
    """3x3 matrix J with chart velocity = J @ (algebra increment)."""
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    r = math.sqrt(r2)
    k = float(perp_factor(r))
    if r2 > 0.0:
        n = x / r
        P = np.outer(n, n)
    else:
        P = np.zeros((3, 3))
    K = np.array([[0.0, -x[2], x[1]],
                  [x[2], 0.0, -x[0]],
                  [-x[1], x[0], 0.0]])
    return P + k * (np.eye(3) - P) - 0.5 * K


def control_columns(points) -> np.ndarray:
    """Chart velocities for u = e_a and u = e_c at each point.

    Returns an ``(n, 2, 3)`` array; the velocity for control ``(v1, v2)``
    is ``v1 * out[:, 0] + v2 * out[:, 1]``. Used to precompute the
    solver's dynamics table since f is linear in v.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.sqrt(np.einsum("ij,ij->i", x, x))
    k = perp_factor(r)
    out = np.empty((x.shape[0], 2, 3))
    for col, axis in enumerate((0, 2)):
        u = np.zeros(3)
        u[axis] = 1.0
        with np.errstate(invalid="ignore", divide="ignore"):
            par = np.where(r > 0.0, x[:, axis] / np.where(r > 0.0, r * r, 1.0), 0.0)
        u_par = par[:, None] * x
        u_perp = u[None, :] - u_par
        out[:, col, :] = u_par + k[:, None] * u_perp - 0.5 * np.cross(x, u[None, :])
    return out


def coordinate_velocity(x, v) -> np.ndarray:
    """Chart velocity f(x, v) of the controlled flow.

    Raises :class:`NearBranchError` within ``BRANCH_MARGIN`` of the
    radius-2*pi sphere where the chart derivative blows up.
    """
    x = np.asarray(x, dtype=float)
    v1, v2 = (float(c) for c in v)
    if math.hypot(v1, v2) > 1.0 + 1e-12:
        raise InvalidInputError("control norm exceeds 1: %r" % ((v1, v2),))
    r = math.sqrt(float(x @ x))
    if r > TWO_PI - BRANCH_MARGIN:
        raise NearBranchError("chart radius %.6f too close to 2*pi" % r)
    return dexp_inv(x) @ np.array([v1, 0.0, v2])


def make_control_set(n_dir: int = DEFAULT_DIRECTIONS) -> np.ndarray:
    """``(n_dir, 2)`` unit controls at angles 2*pi*k/n_dir."""
    if int(n_dir) != n_dir or n_dir < MIN_DIRECTIONS:
        raise BadResolutionError("need at least %d control directions, got %r" % (MIN_DIRECTIONS, n_dir))
    theta = TWO_PI * np.arange(int(n_dir)) / int(n_dir)
    out = np.column_stack([np.cos(theta), np.sin(theta)])
    # exact zeros and unit entries on the axes
    out[np.abs(out) < 1e-15] = 0.0
    out[np.abs(np.abs(out) - 1.0) < 1e-15] = np.sign(out[np.abs(np.abs(out) - 1.0) < 1e-15])
    return out
