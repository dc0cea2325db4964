"""Quaternion arithmetic and the geometry of imaginary units and spheres.

A quaternion is stored as four float64 components over the basis (1, i, j, k).
Scalar values use the :class:`Quaternion` class; hot loops operate on numpy
arrays of shape ``(..., 4)`` through the ``q*`` kernel functions below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroDivisorError

#: Default tolerance governing zero tests, overridable per call.
DEFAULT_EPS = 1e-10


@dataclass(frozen=True, slots=True)
class Quaternion:
    """An element of the real algebra of quaternions, components (w, x, y, z)."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @staticmethod
    def from_array(a) -> "Quaternion":
        w, x, y, z = (float(v) for v in a)
        return Quaternion(w, x, y, z)

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def to_list(self) -> list[float]:
        return [self.w, self.x, self.y, self.z]

    @property
    def re(self) -> float:
        return self.w

    @property
    def im(self) -> "Quaternion":
        return Quaternion(0.0, self.x, self.y, self.z)

    def im_norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def norm_sq(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def __abs__(self) -> float:
        return self.norm()

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def inverse(self, eps: float | None = None) -> "Quaternion":
        eps = DEFAULT_EPS if eps is None else eps
        n2 = self.norm_sq()
        if n2 <= eps * eps:
            raise ZeroDivisorError(f"quaternion norm {math.sqrt(n2):.3e} below eps")
        return Quaternion(self.w / n2, -self.x / n2, -self.y / n2, -self.z / n2)

    def is_real(self, eps: float | None = None) -> bool:
        eps = DEFAULT_EPS if eps is None else eps
        return self.im_norm() <= eps

    def isclose(self, other: "Quaternion", tol: float = 1e-12) -> bool:
        return (self - other).norm() <= tol

    def __add__(self, other):
        other = as_quaternion(other)
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_quaternion(other)
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __rsub__(self, other):
        return as_quaternion(other) - self

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            s = float(other)
            return Quaternion(self.w * s, self.x * s, self.y * s, self.z * s)
        a, b = self, other
        return Quaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * float(other)
        return as_quaternion(other) * self

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return self * (1.0 / float(other))
        raise TypeError("quaternion division is ambiguous; multiply by .inverse()")

    def __repr__(self):
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


ZERO = Quaternion()
ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def as_quaternion(v) -> Quaternion:
    """Coerce a real number, length-4 sequence, or Quaternion to a Quaternion."""
    if isinstance(v, Quaternion):
        return v
    if isinstance(v, (int, float)):
        return Quaternion(float(v))
    return Quaternion.from_array(v)


def mul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product of two quaternions (noncommutative)."""
    return as_quaternion(p) * as_quaternion(q)


def inverse(q: Quaternion, eps: float | None = None) -> Quaternion:
    """Multiplicative inverse conj(q) / |q|^2."""
    return as_quaternion(q).inverse(eps)


def imaginary_unit(x: float, y: float, z: float) -> Quaternion:
    """Unit imaginary quaternion with the given direction, renormalized.

    Renormalization keeps the defining identity I^2 = -1 accurate even when
    the components come from upstream floating-point computation.
    """
    n = math.sqrt(x * x + y * y + z * z)
    if n == 0.0:
        raise ZeroDivisorError("imaginary unit needs a nonzero direction")
    return Quaternion(0.0, x / n, y / n, z / n)


def renormalize_imaginary(q: Quaternion) -> Quaternion:
    """Project a nearly imaginary, nearly unit quaternion onto the unit sphere of imaginary units."""
    return imaginary_unit(q.x, q.y, q.z)


def slice_decompose(q, eps: float | None = None):
    """Write q = x + y*I with y = |Im q| >= 0.

    Returns ``(x, y, I)`` where I is a unit imaginary quaternion, or
    ``(x, 0.0, None)`` when q is real to within ``eps``.
    """
    q = as_quaternion(q)
    eps = DEFAULT_EPS if eps is None else eps
    y = q.im_norm()
    if y <= eps:
        return q.w, 0.0, None
    return q.w, y, Quaternion(0.0, q.x / y, q.y / y, q.z / y)


def same_sphere(p, q, tol: float = 1e-9) -> bool:
    """Whether p and q share real part and imaginary modulus, i.e. lie on one sphere x + y*S."""
    p, q = as_quaternion(p), as_quaternion(q)
    return abs(p.w - q.w) <= tol and abs(p.im_norm() - q.im_norm()) <= tol


@dataclass(frozen=True, slots=True)
class SphereRef:
    """Reference to the sphere x + y*S; y = 0 designates the real point x."""

    x: float
    y: float

    def __post_init__(self):
        if self.y < 0.0:
            raise ValueError("sphere radius y must be nonnegative")

    @staticmethod
    def from_point(q) -> "SphereRef":
        q = as_quaternion(q)
        return SphereRef(q.w, q.im_norm())

    def point(self, unit: Quaternion) -> Quaternion:
        """The point x + y*I of the sphere in direction of the imaginary unit I."""
        return Quaternion(self.x, self.y * unit.x, self.y * unit.y, self.y * unit.z)

    def contains(self, q, tol: float = 1e-9) -> bool:
        q = as_quaternion(q)
        return abs(q.w - self.x) <= tol and abs(q.im_norm() - self.y) <= tol

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y}


# ---------------------------------------------------------------------------
# Array kernels: quaternions as float64 arrays of shape (..., 4).

def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product on arrays of shape (..., 4), broadcasting."""
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def qconj(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


def qnorm_sq(a: np.ndarray) -> np.ndarray:
    return np.einsum("...k,...k->...", a, a)


def qnorm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(qnorm_sq(a))


def qinv(a: np.ndarray) -> np.ndarray:
    return qconj(a) / qnorm_sq(a)[..., None]


def _right_mult_tensor() -> np.ndarray:
    """Structure tensor T with T[i, j, k] = component i of e_j * e_k."""
    basis = [ONE, I, J, K]
    t = np.zeros((4, 4, 4))
    for j, ej in enumerate(basis):
        for k, ek in enumerate(basis):
            t[:, j, k] = (ej * ek).to_array()
    return t


_RIGHT_MULT_TENSOR = _right_mult_tensor()


def right_mult_matrix(p: np.ndarray) -> np.ndarray:
    """Real 4x4 matrix (batched) of the map v -> v * p on column components.

    ``p`` has shape (..., 4); the result has shape (..., 4, 4) and satisfies
    ``matrix @ v_components = components of (v * p)``.
    """
    return np.einsum("ijk,...k->...ij", _RIGHT_MULT_TENSOR, np.asarray(p, dtype=float))
