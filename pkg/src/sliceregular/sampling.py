"""Seeded sampling helpers for balls, spheres and slices.

All randomness in the package flows through numpy Generators created from an
explicit integer seed, so every scan and report is reproducible.
"""

from __future__ import annotations

import numpy as np

from .quaternion import Quaternion, as_quaternion


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed))


def unit_quaternions(rng: np.random.Generator, n: int) -> np.ndarray:
    """n points uniform on the unit 3-sphere, as an (n, 4) array."""
    v = rng.standard_normal((n, 4))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def imaginary_units(rng: np.random.Generator, n: int) -> np.ndarray:
    """n imaginary units uniform on the 2-sphere, as an (n, 4) array with w = 0."""
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    out = np.zeros((n, 4))
    out[:, 1:] = v
    return out


def random_unit(rng: np.random.Generator) -> Quaternion:
    return Quaternion.from_array(unit_quaternions(rng, 1)[0])


def random_imaginary_unit(rng: np.random.Generator) -> Quaternion:
    return Quaternion.from_array(imaginary_units(rng, 1)[0])


def shell_points(rng: np.random.Generator, n: int, r: float) -> np.ndarray:
    """n points uniform on the sphere |q| = r."""
    return r * unit_quaternions(rng, n)


def ball_points(rng: np.random.Generator, n: int, r_max: float,
                r_min: float = 0.0) -> np.ndarray:
    """n points with radius uniform in [r_min, r_max] and uniform direction.

    The radial measure deliberately favors large radii relative to the uniform
    volume measure, to stress near-boundary behavior.
    """
    radii = rng.uniform(r_min, r_max, size=n)
    return unit_quaternions(rng, n) * radii[:, None]


def sphere_mates(q, rng: np.random.Generator, n: int) -> np.ndarray:
    """n points of the sphere through q (same real part and imaginary modulus)."""
    q = as_quaternion(q)
    y = q.im_norm()
    out = y * imaginary_units(rng, n)
    out[:, 0] = q.w
    return out


def circle_points(unit, r: float, n: int, x: float = 0.0) -> np.ndarray:
    """n equispaced points x + r e^{I theta} on a circle inside the slice of I."""
    unit = as_quaternion(unit)
    theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    out = np.zeros((n, 4))
    out[:, 0] = x + r * np.cos(theta)
    s = r * np.sin(theta)
    out[:, 1] = s * unit.x
    out[:, 2] = s * unit.y
    out[:, 3] = s * unit.z
    return out


def orthogonal_imaginary_unit(unit) -> Quaternion:
    """Some unit imaginary quaternion orthogonal to the given one."""
    unit = as_quaternion(unit)
    v = np.array([unit.x, unit.y, unit.z])
    probe = np.array([1.0, 0.0, 0.0])
    if abs(v[0]) > 0.9:
        probe = np.array([0.0, 1.0, 0.0])
    w = np.cross(v, probe)
    w /= np.linalg.norm(w)
    return Quaternion(0.0, w[0], w[1], w[2])
