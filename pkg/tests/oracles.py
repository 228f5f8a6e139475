"""Independent reference computations used by the tests."""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from su2synth.su2 import hat, log_map


def fd_velocity(x, v, dt=1e-5):
    """Central difference of t -> log(exp(-i t (v1 I_x + v2 I_z)) exp(x)) at t = 0,
    Richardson-extrapolated (h, h/2)."""
    x = np.asarray(x, dtype=float)
    U = expm(-1j * hat(x))
    A = hat((v[0], 0.0, v[1]))

    def central(d):
        plus = log_map(expm(-1j * d * A) @ U)
        minus = log_map(expm(1j * d * A) @ U)
        return (plus - minus) / (2 * d)

    return (4 * central(dt / 2) - central(dt)) / 3


def sr_distance_y(theta):
    """Sub-Riemannian distance from I to exp(-i theta I_y), 0 < theta < 2 pi.

    The shortest arc turns its control once around a circle; the closed
    form is sqrt(4 pi theta - theta^2)."""
    return math.sqrt(4 * math.pi * theta - theta * theta)
