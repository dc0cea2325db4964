"""Classical and regular Moebius transformations of the quaternionic unit ball.

The classical transformation is the pointwise map M_a(q) = (1 - q conj(a))^{-1} (q - a).
Its regular counterpart is the series (1 - q conj(a))^{-*} * (q - a), optionally
right-multiplied by a unit; these series are the bijective regular self-maps of
the ball. Both agree when the center is real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PoleError
from .quaternion import DEFAULT_EPS, ONE, Quaternion, as_quaternion, qconj, qinv, qmul, qnorm
from .series import SliceSeries, reciprocal, star_mul, polynomial

#: Default truncation order for regular Moebius series; ample for |center| <= 0.7.
DEFAULT_MOEBIUS_ORDER = 128


@dataclass(frozen=True)
class MoebiusSpec:
    """Parameters of a Moebius transformation of the unit ball.

    ``center`` is the zero of the map (|center| < 1); ``right_unit`` multiplies
    the result on the right; ``kind`` selects the classical pointwise map or
    the regular series.
    """

    center: Quaternion
    right_unit: Quaternion = field(default=ONE)
    kind: str = "regular"

    def __post_init__(self):
        c = as_quaternion(self.center)
        u = as_quaternion(self.right_unit)
        if c.norm() >= 1.0 - DEFAULT_EPS:
            raise ValueError(f"|center| = {c.norm():.6g} must be < 1")
        if abs(u.norm() - 1.0) > 1e-13:
            raise ValueError(f"|right_unit| = {u.norm():.16g} must be 1 within 1e-13")
        if self.kind not in ("classical", "regular"):
            raise ValueError(f"unknown kind {self.kind!r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "right_unit", u * (1.0 / u.norm()))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "center": self.center.to_list(),
                "right_unit": self.right_unit.to_list()}

    @staticmethod
    def from_dict(d: dict) -> "MoebiusSpec":
        return MoebiusSpec(center=as_quaternion(d["center"]),
                           right_unit=as_quaternion(d.get("right_unit", [1, 0, 0, 0])),
                           kind=d.get("kind", "regular"))


def classical_eval(a, q, eps: float | None = None) -> Quaternion:
    """Classical Moebius value (1 - q conj(a))^{-1} (q - a); maps the ball to itself."""
    eps = DEFAULT_EPS if eps is None else eps
    a, q = as_quaternion(a), as_quaternion(q)
    denom = ONE - q * a.conjugate()
    if denom.norm() <= eps:
        raise PoleError("1 - q conj(a) vanishes at this point")
    return denom.inverse(eps) * (q - a)


def classical_eval_many(a, points: np.ndarray) -> np.ndarray:
    """Vectorized classical Moebius transformation over an (M, 4) array."""
    a = as_quaternion(a).to_array()
    pts = np.asarray(points, dtype=float)
    denom = -qmul(pts, qconj(a)[None, :])
    denom[..., 0] += 1.0
    return qmul(qinv(denom), pts - a)


def regular_moebius_series(center, right_unit=ONE, order: int = DEFAULT_MOEBIUS_ORDER,
                           radius: float = 1.0) -> SliceSeries:
    """Series of the regular Moebius transformation with the given center, times a unit.

    The geometric expansion (1 - q conj(a))^{-*} = sum_n q^n conj(a)^n telescopes
    against the factor (q - a), giving c_0 = -a u and
    c_n = conj(a)^{n-1} (1 - |a|^2) u for n >= 1. The exact coefficient norms
    (1 - |a|^2) |a|^{n-1} provide the attached tail envelope.
    """
    a = as_quaternion(center)
    u = as_quaternion(right_unit)
    if a.norm() >= 1.0 - DEFAULT_EPS:
        raise ValueError("Moebius center must lie strictly inside the unit ball")
    coeffs = np.zeros((order + 1, 4))
    coeffs[0] = (-a * u).to_array()
    abar = a.conjugate()
    one_minus = 1.0 - a.norm_sq()
    power = u * one_minus              # conj(a)^0 (1 - |a|^2) u
    for n in range(1, order + 1):
        coeffs[n] = power.to_array()
        power = abar * power
    mod = a.norm()
    # |c_{order+k}| = (1-|a|^2) |a|^{order+k-1}, so the envelope is exact here.
    tail_scale = one_minus * mod ** (order - 1) if mod > 0.0 else 0.0
    return SliceSeries(coeffs, radius, truncated=mod > 0.0,
                       tail_scale=tail_scale, tail_ratio=mod)


def regular_moebius_series_via_reciprocal(center, right_unit=ONE,
                                          order: int = DEFAULT_MOEBIUS_ORDER,
                                          radius: float = 1.0) -> SliceSeries:
    """Same series built from the generic reciprocal; used as a cross-check oracle."""
    a = as_quaternion(center)
    u = as_quaternion(right_unit)
    denom = polynomial([1.0, -a.conjugate()], radius)
    numer = polynomial([-a, 1.0], radius)
    out = star_mul(reciprocal(denom, order=order), numer, max_order=order)
    return out.right_const_mul(u)


def moebius_series(spec: MoebiusSpec, order: int = DEFAULT_MOEBIUS_ORDER,
                   radius: float = 1.0) -> SliceSeries:
    """Regular Moebius series from a spec; the spec must have kind 'regular'."""
    if spec.kind != "regular":
        raise ValueError("series form exists for regular transformations only")
    return regular_moebius_series(spec.center, spec.right_unit, order, radius)


def moebius_bound(b, q) -> tuple[float, float, float]:
    """Two-sided modulus bound for the classical transformation.

    Returns ``(lower, value, upper)`` with
    lower = (|b| - |q|) / (1 - |b||q|), value = |M_b(q)|,
    upper = (|q| + |b|) / (1 + |b||q|); lower <= value <= upper always holds,
    with equality on the left exactly when q = r b, r in [0, 1], and on the
    right exactly when q = r b, r <= 0.
    """
    b, q = as_quaternion(b), as_quaternion(q)
    nb, nq = b.norm(), q.norm()
    lower = (nb - nq) / (1.0 - nb * nq)
    upper = (nq + nb) / (1.0 + nb * nq)
    return lower, classical_eval(b, q).norm(), upper


def moebius_inverse_identity_check(a: float, q) -> float:
    """Residual |M_{-a}(M_a(q)) - q| for real a in (0, 1); vanishes identically."""
    if not (0.0 < a < 1.0):
        raise ValueError("a must lie in (0, 1)")
    q = as_quaternion(q)
    return (classical_eval(Quaternion(-a), classical_eval(Quaternion(a), q)) - q).norm()


def moebius_tail_bound(center, order: int, r: float) -> float:
    """Tail of the regular Moebius series at radius r past the given order."""
    mod = as_quaternion(center).norm()
    if mod == 0.0:
        return 0.0
    x = mod * r
    if x >= 1.0:
        return math.inf
    return (1.0 - mod * mod) / mod * x ** (order + 1) / (1.0 - x)
