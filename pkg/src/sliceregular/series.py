"""Truncated power series with quaternion coefficients on a ball.

A series represents f(q) = sum_n q^n a_n with the coefficients multiplying on
the right. This is the series form of every slice regular function on a
Euclidean ball centered at the origin. The module provides the regular (star)
product, conjugation, symmetrization, the regular reciprocal, Cullen and
spherical derivatives, and linear star-division.

Every series carries a geometric tail envelope ``|a_{order+k}| <=
tail_scale * tail_ratio**k`` so that downstream inequality checks can budget
truncation error separately from genuine violations.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import (
    DomainError,
    NonInvertibleError,
    RadiusMismatchError,
    RealPointError,
    RemainderError,
)
from .quaternion import (
    DEFAULT_EPS,
    Quaternion,
    as_quaternion,
    qmul,
)

#: Star products are truncated at this order unless told otherwise.
DEFAULT_MAX_ORDER = 256


class SliceSeries:
    """Immutable truncated series sum_n q^n a_n on the ball B(0, radius)."""

    __slots__ = ("_coeffs", "radius", "truncated", "tail_scale", "tail_ratio",
                 "_tuples_cache")

    def __init__(self, coeffs, radius: float = 1.0, truncated: bool = False,
                 tail_scale: float = 0.0, tail_ratio: float = 0.0):
        arr = np.array(coeffs, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 4)
        if arr.ndim != 2 or arr.shape[1] != 4 or arr.shape[0] == 0:
            raise ValueError("coefficients must form an (n+1, 4) array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        if not (radius > 0.0):
            raise ValueError("radius must be positive")
        arr.setflags(write=False)
        object.__setattr__(self, "_coeffs", arr)
        object.__setattr__(self, "radius", float(radius))
        object.__setattr__(self, "truncated", bool(truncated))
        object.__setattr__(self, "tail_scale", float(tail_scale))
        object.__setattr__(self, "tail_ratio", float(tail_ratio))
        object.__setattr__(self, "_tuples_cache", None)

    def __setattr__(self, name, value):
        raise AttributeError("SliceSeries is immutable")

    # -- basic accessors ----------------------------------------------------

    @property
    def order(self) -> int:
        return self._coeffs.shape[0] - 1

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    def coeff(self, n: int) -> Quaternion:
        if n < 0:
            raise IndexError(n)
        if n > self.order:
            return Quaternion()
        return Quaternion.from_array(self._coeffs[n])

    def coeff_norms(self) -> np.ndarray:
        return np.sqrt(np.einsum("nk,nk->n", self._coeffs, self._coeffs))

    def _tuples(self):
        cached = self._tuples_cache
        if cached is None:
            cached = [tuple(row) for row in self._coeffs]
            object.__setattr__(self, "_tuples_cache", cached)
        return cached

    def __repr__(self):
        flag = ", truncated" if self.truncated else ""
        return f"SliceSeries(order={self.order}, radius={self.radius}{flag})"

    # -- evaluation ----------------------------------------------------------

    def eval(self, q) -> Quaternion:
        """Horner evaluation at a single quaternion with |q| < radius."""
        q = as_quaternion(q)
        if q.norm() >= self.radius:
            raise DomainError(f"|q| = {q.norm():.6g} outside ball of radius {self.radius}")
        qw, qx, qy, qz = q.w, q.x, q.y, q.z
        t = self._tuples()
        aw, ax, ay, az = t[-1]
        for cw, cx, cy, cz in reversed(t[:-1]):
            nw = qw * aw - qx * ax - qy * ay - qz * az + cw
            nx = qw * ax + qx * aw + qy * az - qz * ay + cx
            ny = qw * ay - qx * az + qy * aw + qz * ax + cy
            nz = qw * az + qx * ay - qy * ax + qz * aw + cz
            aw, ax, ay, az = nw, nx, ny, nz
        return Quaternion(aw, ax, ay, az)

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized Horner evaluation at an (M, 4) array of points."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, 4)
        norms = np.sqrt(np.einsum("mk,mk->m", pts, pts))
        if norms.size and float(norms.max()) >= self.radius:
            raise DomainError(f"point with |q| = {norms.max():.6g} outside ball "
                              f"of radius {self.radius}")
        acc = np.broadcast_to(self._coeffs[-1], pts.shape).copy()
        for n in range(self.order - 1, -1, -1):
            acc = qmul(pts, acc)
            acc += self._coeffs[n]
        return acc

    def tail_bound(self, r: float) -> float:
        """Upper bound on |sum_{n > order} q^n a_n| for |q| <= r, from the envelope."""
        if self.tail_scale == 0.0:
            return 0.0
        x = self.tail_ratio * r
        if x >= 1.0:
            return math.inf
        return self.tail_scale * r ** self.order * x / (1.0 - x)

    def sup_bound(self, r: float) -> float:
        """Upper bound on sup |f| over the closed ball of radius r."""
        n = np.arange(self.order + 1, dtype=float)
        return float(np.sum(self.coeff_norms() * r ** n)) + self.tail_bound(r)

    # -- linear structure ----------------------------------------------------

    def _check_radius(self, other: "SliceSeries"):
        if not math.isclose(self.radius, other.radius, rel_tol=1e-12, abs_tol=0.0):
            raise RadiusMismatchError(f"radii {self.radius} and {other.radius} differ")

    def __add__(self, other: "SliceSeries") -> "SliceSeries":
        self._check_radius(other)
        n = max(self.order, other.order) + 1
        out = np.zeros((n, 4))
        out[: self.order + 1] += self._coeffs
        out[: other.order + 1] += other._coeffs
        scale, ratio = _sum_tail(self, other)
        return SliceSeries(out, self.radius, self.truncated or other.truncated,
                           scale, ratio)

    def __sub__(self, other: "SliceSeries") -> "SliceSeries":
        return self + (-other)

    def __neg__(self) -> "SliceSeries":
        return SliceSeries(-self._coeffs, self.radius, self.truncated,
                           self.tail_scale, self.tail_ratio)

    def scale(self, s: float) -> "SliceSeries":
        """Multiply every coefficient by a real scalar."""
        s = float(s)
        return SliceSeries(self._coeffs * s, self.radius, self.truncated,
                           abs(s) * self.tail_scale, self.tail_ratio)

    def left_const_mul(self, c) -> "SliceSeries":
        """The series of c * f, i.e. coefficients c * a_n."""
        c = as_quaternion(c)
        arr = qmul(c.to_array()[None, :], self._coeffs)
        return SliceSeries(arr, self.radius, self.truncated,
                           c.norm() * self.tail_scale, self.tail_ratio)

    def right_const_mul(self, c) -> "SliceSeries":
        """The series of f * c, i.e. coefficients a_n * c."""
        c = as_quaternion(c)
        arr = qmul(self._coeffs, c.to_array()[None, :])
        return SliceSeries(arr, self.radius, self.truncated,
                           c.norm() * self.tail_scale, self.tail_ratio)

    def shift_constant(self, c) -> "SliceSeries":
        """Add a constant to the series (changes a_0 only)."""
        c = as_quaternion(c)
        out = np.array(self._coeffs)
        out[0] += c.to_array()
        return SliceSeries(out, self.radius, self.truncated,
                           self.tail_scale, self.tail_ratio)

    def rescale_argument(self, s: float, new_radius: float | None = None) -> "SliceSeries":
        """The series of q -> f(s q) on B(0, radius/|s|): coefficients a_n s^n."""
        s = float(s)
        if s == 0.0:
            raise ValueError("argument scale must be nonzero")
        pows = np.abs(s) ** np.arange(self.order + 1) * np.sign(s) ** np.arange(self.order + 1)
        arr = self._coeffs * pows[:, None]
        radius = self.radius / abs(s) if new_radius is None else new_radius
        return SliceSeries(arr, radius, self.truncated,
                           self.tail_scale * abs(s) ** self.order,
                           self.tail_ratio * abs(s))

    def truncate(self, order: int) -> "SliceSeries":
        """Drop coefficients above the given order; the envelope absorbs them."""
        if order >= self.order:
            return self
        kept = self._coeffs[: order + 1]
        dropped = self.coeff_norms()[order + 1:]
        # Re-anchor the carried envelope from the old order to the new one.
        carry_scale = self.tail_scale
        if carry_scale > 0.0 and self.tail_ratio > 0.0:
            carry_scale /= self.tail_ratio ** (self.order - order)
        scale, ratio = _fit_envelope(dropped, carry=(carry_scale, self.tail_ratio))
        return SliceSeries(kept, self.radius, True, scale, ratio)

    def with_radius(self, radius: float) -> "SliceSeries":
        return SliceSeries(self._coeffs, radius, self.truncated,
                           self.tail_scale, self.tail_ratio)


# ---------------------------------------------------------------------------
# Constructors.

def polynomial(coeffs, radius: float = 1.0) -> SliceSeries:
    """Series with the given exact coefficients (reals or quaternions) and zero tail."""
    rows = [as_quaternion(c).to_array() for c in coeffs]
    return SliceSeries(np.array(rows), radius)


def constant(c, radius: float = 1.0) -> SliceSeries:
    return polynomial([c], radius)


def identity(radius: float = 1.0) -> SliceSeries:
    """The series of f(q) = q."""
    return polynomial([0.0, 1.0], radius)


# ---------------------------------------------------------------------------
# Tail envelope bookkeeping.

def _fit_envelope(dropped_norms: np.ndarray, carry=(0.0, 0.0)):
    """Geometric envelope covering explicit dropped norms plus a carried envelope."""
    scale, ratio = carry
    dropped_norms = np.asarray(dropped_norms, dtype=float)
    nz = dropped_norms[dropped_norms > 0.0]
    if nz.size:
        if nz.size >= 2:
            steps = len(dropped_norms)
            fitted = (nz[-1] / nz[0]) ** (1.0 / max(steps - 1, 1))
            ratio = max(ratio, min(max(fitted, 0.0), 0.999))
        else:
            ratio = max(ratio, 0.9)
        scale = max(scale, 10.0 * float(nz.max()))
    return scale, ratio


def _sum_tail(f: SliceSeries, g: SliceSeries):
    ratio = max(f.tail_ratio, g.tail_ratio)
    return f.tail_scale + g.tail_scale, ratio


def _cross_tail_weight(explicit: SliceSeries, tailed: SliceSeries, out_order: int) -> float:
    """Envelope scale of sum_j |a_j| * (tail of b at order out_order - j), anchored at out_order."""
    if tailed.tail_scale == 0.0 or tailed.tail_ratio == 0.0:
        return 0.0
    j = np.arange(explicit.order + 1, dtype=float)
    weights = tailed.tail_ratio ** ((out_order - tailed.order) - j)
    return tailed.tail_scale * float(np.sum(explicit.coeff_norms() * weights))


def _product_tail(f: SliceSeries, g: SliceSeries, out_order: int,
                  dropped_norms: np.ndarray):
    """Conservative envelope for a star product truncated at ``out_order``."""
    ratio = max(f.tail_ratio, g.tail_ratio)
    scale = _cross_tail_weight(f, g, out_order) + _cross_tail_weight(g, f, out_order)
    if f.tail_scale > 0.0 and g.tail_scale > 0.0 and ratio < 1.0:
        anchor = f.order + g.order - out_order
        scale += f.tail_scale * g.tail_scale * ratio ** anchor / (1.0 - ratio)
    return _fit_envelope(dropped_norms, carry=(scale, ratio))


# ---------------------------------------------------------------------------
# Ring operations.

def _qconvolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coefficient convolution c_n = sum_k a_k b_{n-k} with the Hamilton product."""
    aw, ax, ay, az = a[:, 0], a[:, 1], a[:, 2], a[:, 3]
    bw, bx, by, bz = b[:, 0], b[:, 1], b[:, 2], b[:, 3]
    cv = np.convolve
    return np.stack([
        cv(aw, bw) - cv(ax, bx) - cv(ay, by) - cv(az, bz),
        cv(aw, bx) + cv(ax, bw) + cv(ay, bz) - cv(az, by),
        cv(aw, by) - cv(ax, bz) + cv(ay, bw) + cv(az, bx),
        cv(aw, bz) + cv(ax, by) - cv(ay, bx) + cv(az, bw),
    ], axis=1)


def star_mul(f: SliceSeries, g: SliceSeries,
             max_order: int = DEFAULT_MAX_ORDER) -> SliceSeries:
    """Regular product f * g, coefficients c_n = sum_k a_k b_{n-k}.

    The result order is min(f.order + g.order, max_order); when the cap bites,
    the result is flagged truncated and the dropped norms feed the envelope.
    """
    f._check_radius(g)
    full = _qconvolve(f.coeffs, g.coeffs)
    if full.shape[0] - 1 <= max_order:
        out_order = full.shape[0] - 1
        scale, ratio = _product_tail(f, g, out_order, np.empty(0))
        return SliceSeries(full, f.radius, f.truncated or g.truncated, scale, ratio)
    kept = full[: max_order + 1]
    dropped = np.sqrt(np.einsum("nk,nk->n", full[max_order + 1:], full[max_order + 1:]))
    scale, ratio = _product_tail(f, g, max_order, dropped)
    return SliceSeries(kept, f.radius, True, scale, ratio)


def star_eval_formula(f: SliceSeries, g: SliceSeries, q,
                      eps: float | None = None) -> Quaternion:
    """Value of f * g at q without forming the product series.

    Uses (f * g)(q) = f(q) g(f(q)^{-1} q f(q)), and 0 when f(q) = 0.
    """
    eps = DEFAULT_EPS if eps is None else eps
    q = as_quaternion(q)
    fq = f.eval(q)
    if fq.norm() <= eps:
        return Quaternion()
    inner = fq.inverse(eps) * q * fq
    return fq * g.eval(inner)


def conjugate(f: SliceSeries) -> SliceSeries:
    """Regular conjugate: coefficients replaced by their quaternion conjugates."""
    out = np.array(f.coeffs)
    out[:, 1:] *= -1.0
    return SliceSeries(out, f.radius, f.truncated, f.tail_scale, f.tail_ratio)


def symmetrize(f: SliceSeries, max_order: int = DEFAULT_MAX_ORDER) -> SliceSeries:
    """Symmetrization f * f^c, projected onto its (exactly real) coefficients."""
    s = star_mul(f, conjugate(f), max_order=max_order)
    out = np.array(s.coeffs)
    out[:, 1:] = 0.0
    return SliceSeries(out, s.radius, s.truncated, s.tail_scale, s.tail_ratio)


def symmetrize_imag_defect(f: SliceSeries, max_order: int = DEFAULT_MAX_ORDER) -> float:
    """Largest imaginary-component magnitude of f * f^c before projection."""
    s = star_mul(f, conjugate(f), max_order=max_order)
    return float(np.max(np.abs(s.coeffs[:, 1:]))) if s.coeffs.size else 0.0


def reciprocal(f: SliceSeries, order: int | None = None,
               eps: float | None = None) -> SliceSeries:
    """Regular reciprocal f^{-*} = (f^s)^{-1} * f^c as a truncated series.

    Requires |a_0| > eps so the symmetrization is invertible at 0. Satisfies
    star_mul(f, reciprocal(f)) = 1 + O(q^{order+1}).
    """
    eps = DEFAULT_EPS if eps is None else eps
    a0 = f.coeff(0)
    if a0.norm() <= eps:
        raise NonInvertibleError("constant term vanishes; no reciprocal on this ball")
    m = f.order if order is None else int(order)
    s = symmetrize(f, max_order=max(m, 2 * f.order))
    sr = s.coeffs[:, 0]
    inv = np.zeros(m + 1)
    inv[0] = 1.0 / sr[0]
    for n in range(1, m + 1):
        k = min(n, len(sr) - 1)
        acc = float(np.dot(sr[1: k + 1], inv[n - 1:: -1][: k]))
        inv[n] = -acc / sr[0]
    inv_series = SliceSeries(np.stack([inv, np.zeros(m + 1), np.zeros(m + 1),
                                       np.zeros(m + 1)], axis=1), f.radius)
    out = star_mul(inv_series, conjugate(f), max_order=m)
    scale, ratio = _fit_envelope(
        np.sqrt(np.einsum("nk,nk->n", out.coeffs, out.coeffs))[-9:],
        carry=(out.tail_scale, out.tail_ratio))
    return SliceSeries(out.coeffs, f.radius, True, scale, ratio)


def cullen_derivative(f: SliceSeries) -> SliceSeries:
    """Termwise derivative: coefficients (n+1) a_{n+1}."""
    if f.order == 0:
        return SliceSeries(np.zeros((1, 4)), f.radius)
    n = np.arange(1, f.order + 1, dtype=float)
    arr = f.coeffs[1:] * n[:, None]
    scale, ratio = _derivative_tail(f)
    return SliceSeries(arr, f.radius, f.truncated, scale, ratio)


def _derivative_tail(f: SliceSeries):
    if f.tail_scale == 0.0:
        return 0.0, 0.0
    ratio = min(0.5 * (1.0 + f.tail_ratio), 0.9995)
    t = f.tail_ratio / ratio
    ks = np.arange(0, 2000)
    bump = float(np.max((f.order + 1 + ks) * t ** ks))
    return f.tail_scale * bump, ratio


def spherical_derivative_at(f: SliceSeries, q, eps: float | None = None) -> Quaternion:
    """Spherical derivative (q - conj(q))^{-1} (f(q) - f(conj(q))) at a nonreal point."""
    eps = DEFAULT_EPS if eps is None else eps
    q = as_quaternion(q)
    if q.im_norm() <= eps:
        raise RealPointError("spherical derivative undefined at real points")
    diff = f.eval(q) - f.eval(q.conjugate())
    return (q - q.conjugate()).inverse(eps) * diff


def spherical_derivative_grid(f: SliceSeries, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Spherical derivative as a function of the sphere (x, y), vectorized.

    Uses the stable recurrence for the symmetric sums s_n = sum_k q^k conj(q)^{n-k},
    which are real and satisfy s_n = 2x s_{n-1} - (x^2 + y^2) s_{n-2}. The
    spherical derivative equals sum_{n>=1} s_{n-1} a_n; the formula remains
    accurate as y -> 0, where it tends to the Cullen derivative on the reals.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    two_x = 2.0 * x
    sq = x * x + y * y
    out = np.zeros(x.shape + (4,))
    s_prev = np.zeros_like(x)          # s_{-1}
    s_cur = np.ones_like(x)            # s_0
    coeffs = f.coeffs
    for n in range(1, f.order + 1):
        out += s_cur[..., None] * coeffs[n]
        s_prev, s_cur = s_cur, two_x * s_cur - sq * s_prev
    return out


def star_divide_linear(f: SliceSeries, q0, eps: float | None = None) -> SliceSeries:
    """Solve (q - q0) * h = f for h, valid when f(q0) = 0.

    The convolution identity c_n = h_{n-1} - q0 h_n is solved by back
    substitution from the top coefficient, which is the stable direction for
    |q0| < 1; the order-0 identity then holds up to the remainder f(q0).
    """
    eps = DEFAULT_EPS if eps is None else eps
    q0 = as_quaternion(q0)
    resid = f.eval(q0)
    if resid.norm() > eps:
        raise RemainderError(f"f(q0) must vanish within {eps:.1e}, got {resid.norm():.3e}")
    if f.order == 0:
        return SliceSeries(np.zeros((1, 4)), f.radius)
    n = f.order
    out = np.zeros((n, 4))
    h = f.coeffs[n]
    out[n - 1] = h
    q0a = q0.to_array()
    for k in range(n - 1, 0, -1):
        h = f.coeffs[k] + qmul(q0a, h)
        out[k - 1] = h
    scale, ratio = _derivative_tail(f)  # same absorption shape works for division
    if f.tail_scale == 0.0:
        scale, ratio = 0.0, 0.0
    return SliceSeries(out, f.radius, f.truncated, scale, ratio)
