"""Closed-form SU(2) arithmetic in the chart U = exp(-i (a I_x + b I_y + c I_z)).

Group elements are plain ``(2, 2)`` complex arrays, algebra elements are
``(3,)`` float arrays of chart coordinates ``(a, b, c)``. With the basis
``-i I_k`` the Lie bracket is the cross product, which is what the
dynamics module relies on.
"""
from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import BranchSingularityWarning, InvalidInputError

TWO_PI = 2.0 * math.pi

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

I_X = 0.5 * SIGMA_X
I_Y = 0.5 * SIGMA_Y
I_Z = 0.5 * SIGMA_Z
GENERATORS = (I_X, I_Y, I_Z)

IDENTITY = np.eye(2, dtype=complex)

UNITARY_TOL = 1e-12
_SINGULAR_TOL = 1e-12


def hat(x) -> np.ndarray:
    """Hermitian matrix a*I_x + b*I_y + c*I_z."""
    a, b, c = (float(v) for v in x)
    return a * I_X + b * I_Y + c * I_Z


def is_special_unitary(U, tol: float = UNITARY_TOL) -> bool:
    U = np.asarray(U)
    if U.shape != (2, 2) or not np.all(np.isfinite(U)):
        return False
    return (np.abs(U @ U.conj().T - IDENTITY).max() <= tol
            and abs(np.linalg.det(U) - 1.0) <= tol)


def as_group_element(U, tol: float = 1e-9) -> np.ndarray:
    """Validate and copy ``U`` as a complex 2x2 special unitary."""
    U = np.array(U, dtype=complex)
    if not is_special_unitary(U, tol):
        raise InvalidInputError("matrix is not in SU(2) within tolerance %g" % tol)
    return U


def exp_map(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (3,) or not np.all(np.isfinite(x)):
        raise InvalidInputError("algebra element must be 3 finite reals, got %r" % (x,))
    r = math.sqrt(float(x @ x))
    half = 0.5 * r
    # sin(r/2)/r -> 1/2 at the origin
    k = 0.5 - r * r / 48.0 if r < 1e-6 else math.sin(half) / r
    a, b, c = x
    cs = math.cos(half)
    return np.array([[cs - 1j * k * c, -k * b - 1j * k * a],
                     [k * b - 1j * k * a, cs + 1j * k * c]], dtype=complex)


def log_map(U) -> np.ndarray:
    """Principal chart coordinates of ``U`` with radius in ``[0, 2*pi]``.

    ``-I`` has no preferred axis; it is canonicalised to ``(2*pi, 0, 0)``
    and a :class:`BranchSingularityWarning` is emitted.
    """
    U = np.asarray(U, dtype=complex)
    # project onto the quaternion form [[al, be], [-be*, al*]]
    al = 0.5 * (U[0, 0] + np.conj(U[1, 1]))
    be = 0.5 * (U[0, 1] - np.conj(U[1, 0]))
    w = al.real
    v = np.array([-be.imag, -be.real, -al.imag])  # sin(r/2) * axis
    s = math.sqrt(float(v @ v))
    if s < _SINGULAR_TOL and w < 0.0:
        warnings.warn("log_map at -I: axis undefined, returning (2pi, 0, 0)",
                      BranchSingularityWarning, stacklevel=2)
        return np.array([TWO_PI, 0.0, 0.0])
    half = math.atan2(s, w)
    if s < 1e-8 and w > 0.0:
        return 2.0 * v * (1.0 + s * s / 6.0)
    return v * (2.0 * half / s)


def compose(U, W) -> np.ndarray:
    return np.asarray(U) @ np.asarray(W)


def dagger(U) -> np.ndarray:
    return np.asarray(U).conj().T


def group_distance(U, W) -> float:
    """Frobenius norm of ``U - W``."""
    return float(np.linalg.norm(np.asarray(U) - np.asarray(W)))


def identity_distance_of_radius(r: float) -> float:
    """Frobenius distance from I to any chart point of radius ``r``."""
    return 2.0 * math.sqrt(2.0) * abs(math.sin(r / 4.0))


def rotation(axis: str, angle: float) -> np.ndarray:
    """exp(-i * angle * I_axis) for ``axis`` in ``'X'``, ``'Y'``, ``'Z'``."""
    x = np.zeros(3)
    x["XYZ".index(axis.upper())] = angle
    return exp_map(x)
