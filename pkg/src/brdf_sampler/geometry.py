"""Directions on the upper hemisphere and the angular primitives built on them.

Angles are radians. ``theta`` is the polar angle measured from the surface
normal (0 at the normal, pi/2 at the horizon), ``phi`` the azimuth in [0, 2pi).

Scalar helpers work on :class:`Direction` values; the ``*_arrays`` helpers are
their vectorized counterparts used in the numerical hot paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HALF_PI = 0.5 * math.pi
TWO_PI = 2.0 * math.pi

_ANGLE_SLACK = 1e-12


def canonical_phi(phi: float) -> float:
    phi = math.fmod(phi, TWO_PI)
    if phi < 0.0:
        phi += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2pi
    if phi >= TWO_PI:
        phi = 0.0
    return phi


@dataclass(frozen=True, order=True)
class Direction:
    """A point on the upper unit hemisphere.

    ``phi`` is canonicalized to [0, 2pi) and forced to 0 at the pole so that
    equal directions compare equal.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        phi = float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise ValueError(f"non-finite direction ({theta}, {phi})")
        if theta < -_ANGLE_SLACK or theta > HALF_PI + _ANGLE_SLACK:
            raise ValueError(f"theta={theta} outside [0, pi/2]")
        theta = min(max(theta, 0.0), HALF_PI)
        phi = 0.0 if theta == 0.0 else canonical_phi(phi)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    def as_tuple(self) -> tuple[float, float]:
        return (self.theta, self.phi)


NORMAL = Direction(0.0, 0.0)


def to_unit_vector(d: Direction) -> np.ndarray:
    st = math.sin(d.theta)
    return np.array([st * math.cos(d.phi), st * math.sin(d.phi), math.cos(d.theta)])


def from_unit_vector(v) -> Direction:
    """Inverse of :func:`to_unit_vector`.

    Raises ``ValueError`` for vectors that are not unit length (within 1e-9)
    or that point below the horizon.
    """
    x, y, z = (float(c) for c in v)
    norm = math.sqrt(x * x + y * y + z * z)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"vector norm {norm} is not 1")
    if z < -_ANGLE_SLACK:
        raise ValueError(f"vector z={z} points below the hemisphere")
    # atan2 keeps full precision near the pole where acos(z) does not
    theta = math.atan2(math.hypot(x, y), max(z, 0.0))
    phi = math.atan2(y, x) if (x != 0.0 or y != 0.0) else 0.0
    return Direction(theta, phi)


def angular_distance(a: Direction, b: Direction) -> float:
    """Great-circle angle between two directions, in [0, pi]."""
    return float(angle_between(to_unit_vector(a), to_unit_vector(b)))


def mirror_reflect(d: Direction) -> Direction:
    """Specular mirror of ``d`` about the surface normal."""
    # subtracting pi from phi >= pi is exact, so a double mirror drifts by at most 1 ulp
    phi = d.phi + math.pi if d.phi < math.pi else d.phi - math.pi
    return Direction(d.theta, phi)


def halfway(a: Direction, b: Direction) -> Direction:
    s = to_unit_vector(a) + to_unit_vector(b)
    norm = float(np.linalg.norm(s))
    if norm < 1e-9:
        raise ValueError("halfway vector undefined for antipodal directions")
    return from_unit_vector(s / norm)


# -- vectorized helpers ----------------------------------------------------


def unit_vectors(theta, phi) -> np.ndarray:
    """Stack unit vectors for arrays of angles; result has shape ``(..., 3)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def angle_between(u, v) -> np.ndarray:
    """Angle between unit vectors along the last axis (broadcasting).

    Uses the chord form ``2 asin(|u - v| / 2)`` which, unlike ``acos`` of the
    dot product, returns exactly 0 for identical inputs and keeps full
    precision for nearly parallel vectors.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    chord = np.sqrt(np.sum((u - v) ** 2, axis=-1))
    return 2.0 * np.arcsin(np.minimum(0.5 * chord, 1.0))


def angle_arrays(theta_a, phi_a, theta_b, phi_b) -> np.ndarray:
    return angle_between(unit_vectors(theta_a, phi_a), unit_vectors(theta_b, phi_b))


def canonical_phi_array(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.mod(np.asarray(phi, dtype=float), TWO_PI)
    phi = np.where(phi >= TWO_PI, 0.0, phi)
    return np.where(theta == 0.0, 0.0, phi)


def directions_from_arrays(theta, phi) -> list[Direction]:
    return [Direction(t, p) for t, p in zip(np.ravel(theta), np.ravel(phi))]


def pair_unit_vectors(pairs):
    """Unit vectors of the incoming and outgoing halves of ``(n, 4)`` angle rows."""
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 4)
    return unit_vectors(pairs[:, 0], pairs[:, 1]), unit_vectors(pairs[:, 2], pairs[:, 3])


def _angle_matrix(u, v) -> np.ndarray:
    """Angles between rows of ``u`` and rows of ``v`` (matrix form).

    Uses the dot product through BLAS, then recomputes near-coincident
    entries from explicit differences so identical vectors give exactly 0.
    """
    c2 = np.maximum(2.0 - 2.0 * (u @ v.T), 0.0)
    rows, cols = np.nonzero(c2 < 1e-6)
    if len(rows):
        c2[rows, cols] = np.sum((u[rows] - v[cols]) ** 2, axis=1)
    return 2.0 * np.arcsin(np.minimum(0.5 * np.sqrt(c2), 1.0))


def pair_distance_matrix(query, samples, max_block=1 << 22) -> np.ndarray:
    """Distances ``sqrt(ang_i^2 + ang_r^2)`` between every query and sample pair.

    ``query`` and ``samples`` are either ``(n, 4)`` angle arrays or tuples of
    precomputed unit vectors from :func:`pair_unit_vectors`.
    """
    qi, qr = query if isinstance(query, tuple) else pair_unit_vectors(query)
    si, sr = samples if isinstance(samples, tuple) else pair_unit_vectors(samples)
    nq, ns = len(qi), len(si)
    out = np.empty((nq, ns))
    step = max(1, max_block // max(ns, 1))
    for s in range(0, nq, step):
        e = min(nq, s + step)
        ai = _angle_matrix(qi[s:e], si)
        ar = _angle_matrix(qr[s:e], sr)
        out[s:e] = np.sqrt(ai * ai + ar * ar)
    return out
