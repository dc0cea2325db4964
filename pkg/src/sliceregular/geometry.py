"""Pointwise geometry of regular functions: conjugation map, real differential,
sphere zeros with multiplicities, and slice recentering.

The key structural facts used here:

* ``T_f(q) = f^c(q)^{-1} q f^c(q)`` preserves every sphere x + y*S and turns
  the star quotient into a pointwise quotient.
* The real differential of a regular function acts on the slice plane L_I by
  right multiplication by the Cullen derivative and on its orthogonal
  complement by right multiplication by the spherical derivative.
* On each sphere x + y*S the function is affine in the imaginary unit:
  f(x + yI) = b + I c with b, c independent of I, which makes zero finding on
  a sphere a closed-form computation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSphereError, DomainError, ZeroDivisorError
from .quaternion import (
    DEFAULT_EPS,
    I as QI,
    Quaternion,
    SphereRef,
    as_quaternion,
    qconj,
    qinv,
    qmul,
    qnorm,
    right_mult_matrix,
    slice_decompose,
)
from .sampling import orthogonal_imaginary_unit
from .series import (
    SliceSeries,
    conjugate,
    cullen_derivative,
    reciprocal,
    spherical_derivative_grid,
    star_divide_linear,
    star_mul,
    symmetrize,
)


def t_map(f: SliceSeries, q, eps: float | None = None) -> Quaternion:
    """The sphere-preserving conjugation T_f(q) = f^c(q)^{-1} q f^c(q)."""
    eps = DEFAULT_EPS if eps is None else eps
    q = as_quaternion(q)
    v = conjugate(f).eval(q)
    if v.norm() <= eps:
        raise ZeroDivisorError("f^c vanishes at q; T_f undefined")
    return v.inverse(eps) * q * v


def quotient_eval(f: SliceSeries, g: SliceSeries, q,
                  eps: float | None = None) -> Quaternion:
    """Value of the star quotient f^{-*} * g at q via the conjugation map.

    Computes f(T_f(q))^{-1} g(T_f(q)); requires q outside the zero set of the
    symmetrization f^s.
    """
    eps = DEFAULT_EPS if eps is None else eps
    q = as_quaternion(q)
    fs = symmetrize(f).eval(q)
    if fs.norm() <= eps:
        raise ZeroDivisorError("q lies on the zero set of f^s; quotient undefined")
    t = t_map(f, q, eps)
    return f.eval(t).inverse(eps) * g.eval(t)


# ---------------------------------------------------------------------------
# Real differential.

@dataclass(frozen=True)
class RealDifferential:
    """The 4x4 real differential of a regular function at one point.

    ``matrix`` maps tangent components; restricted to the slice plane it is
    right multiplication by ``cullen_part``, and on the orthogonal plane right
    multiplication by ``spherical_part`` (None at real points, where the
    Cullen derivative acts on all of the tangent space).
    """

    matrix: np.ndarray
    cullen_part: Quaternion
    spherical_part: Quaternion | None

    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def apply(self, v) -> Quaternion:
        return Quaternion.from_array(self.matrix @ as_quaternion(v).to_array())


def _slice_projector(unit: Quaternion) -> np.ndarray:
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    e2 = unit.to_array()
    return np.outer(e1, e1) + np.outer(e2, e2)


def real_differential(f: SliceSeries, q, eps: float | None = None) -> RealDifferential:
    """Assemble the differential from the Cullen and spherical derivatives."""
    eps = DEFAULT_EPS if eps is None else eps
    q = as_quaternion(q)
    if q.norm() >= f.radius:
        raise DomainError("differential requested outside the ball")
    dc = cullen_derivative(f).eval(q)
    x, y, unit = slice_decompose(q, eps)
    if unit is None:
        return RealDifferential(right_mult_matrix(dc.to_array()), dc, None)
    ds = Quaternion.from_array(
        spherical_derivative_grid(f, np.array(x), np.array(y)))
    p = _slice_projector(unit)
    mat = right_mult_matrix(dc.to_array()) @ p + right_mult_matrix(ds.to_array()) @ (np.eye(4) - p)
    return RealDifferential(mat, dc, ds)


def differential_matrices(f: SliceSeries, points: np.ndarray,
                          eps: float | None = None) -> np.ndarray:
    """Batched real differentials at an (M, 4) array of points, shape (M, 4, 4).

    At (numerically) real points the spherical multiplier is replaced by the
    Cullen derivative, which is its continuous limit, so the assembly is
    uniformly stable in y.
    """
    eps = DEFAULT_EPS if eps is None else eps
    pts = np.asarray(points, dtype=float)
    m = pts.shape[0]
    dc_series = cullen_derivative(f)
    dc = dc_series.eval_many(pts)
    x = pts[:, 0]
    y = np.sqrt(np.einsum("mk,mk->m", pts[:, 1:], pts[:, 1:]))
    ds = spherical_derivative_grid(f, x, y)
    real_mask = y <= eps
    ds[real_mask] = dc[real_mask]
    units = np.zeros((m, 4))
    safe_y = np.where(real_mask, 1.0, y)
    units[:, 1:] = pts[:, 1:] / safe_y[:, None]
    units[real_mask] = QI.to_array()
    e1 = np.zeros((m, 4))
    e1[:, 0] = 1.0
    proj = np.einsum("mi,mj->mij", e1, e1) + np.einsum("mi,mj->mij", units, units)
    comp = np.eye(4)[None, :, :] - proj
    return (np.einsum("mij,mjk->mik", right_mult_matrix(dc), proj)
            + np.einsum("mij,mjk->mik", right_mult_matrix(ds), comp))


def is_singular(f: SliceSeries, q, tol: float | None = None) -> bool:
    """Whether the real differential at q fails to be invertible.

    The default tolerance scales with the fourth power of the Cullen
    derivative, matching the growth of the determinant.
    """
    d = real_differential(f, q)
    if tol is None:
        tol = 1e-8 * (1.0 + d.cullen_part.norm() ** 4)
    return abs(d.det()) < tol


# ---------------------------------------------------------------------------
# Zeros on a sphere and multiplicities.

@dataclass(frozen=True)
class MultiplicityReport:
    """Zero structure of a series on one sphere x + y*S.

    ``spherical_mult`` is the (even) multiplicity 2m of the real quadratic
    factor (q - x)^2 + y^2; ``isolated_mult`` counts the chain of linear star
    factors rooted at ``isolated_point``. ``remainder_min_modulus`` reports
    min |h| over a sphere sample for the final zero-free factor h, certifying
    (to working precision) that the chain is complete.
    """

    sphere: SphereRef
    spherical_mult: int
    isolated_mult: int
    isolated_point: Quaternion | None
    remainder_min_modulus: float

    @property
    def total_mult(self) -> int:
        return self.spherical_mult + self.isolated_mult

    def to_dict(self) -> dict:
        return {
            "sphere": self.sphere.to_dict(),
            "spherical": self.spherical_mult,
            "isolated": self.isolated_mult,
            "point": None if self.isolated_point is None else self.isolated_point.to_list(),
        }


def sphere_affine_parts(f: SliceSeries, sphere: SphereRef,
                        probe: Quaternion = QI) -> tuple[Quaternion, Quaternion]:
    """The pair (b, c) with f(x + yI) = b + I c for every imaginary unit I."""
    q = sphere.point(probe)
    v1 = f.eval(q)
    v2 = f.eval(q.conjugate())
    b = (v1 + v2) * 0.5
    c = -(probe * (v1 - v2)) * 0.5
    return b, c


def divide_sphere_factor(f: SliceSeries, sphere: SphereRef) -> SliceSeries:
    """Quotient of f by the real quadratic (q - x)^2 + y^2 of the sphere.

    The divisor has real coefficients, so ordinary polynomial long division
    applies. Division runs from the top coefficient down, which is the stable
    direction because the divisor's roots lie on the sphere, inside the ball.
    """
    d0 = sphere.x * sphere.x + sphere.y * sphere.y
    d1 = -2.0 * sphere.x
    n = f.order
    if n < 2:
        return SliceSeries(np.zeros((1, 4)), f.radius)
    h = np.zeros((n - 1, 4))
    h[n - 2] = f.coeffs[n]
    if n >= 3:
        h[n - 3] = f.coeffs[n - 1] - d1 * h[n - 2]
    for k in range(n - 4, -1, -1):
        h[k] = f.coeffs[k + 2] - d1 * h[k + 1] - d0 * h[k + 2]
    return SliceSeries(h, f.radius, f.truncated, f.tail_scale, f.tail_ratio)


def find_zero_on_sphere(f: SliceSeries, sphere: SphereRef,
                        tol: float = 1e-8) -> MultiplicityReport:
    """Locate the zero structure of f on the sphere x + y*S.

    Repeatedly strips the real quadratic factor while f vanishes identically
    on the sphere (b = c = 0), then solves b + I c = 0 in closed form via
    I* = -b c^{-1}, accepting I* only when it is an imaginary unit, and
    divides out linear star factors to count the isolated multiplicity.
    """
    if sphere.y <= 0.0:
        raise ValueError("zero search needs a genuine sphere (y > 0)")
    if sphere.x * sphere.x + sphere.y * sphere.y >= f.radius ** 2:
        raise DomainError("sphere not inside the series' ball")
    scale = max(1.0, float(f.coeff_norms().max()))
    zero_tol = tol * scale
    g = f
    m = 0
    while True:
        b, c = sphere_affine_parts(g, sphere)
        if b.norm() <= zero_tol and c.norm() <= zero_tol:
            if g.order < 2 or float(g.coeff_norms().max()) <= zero_tol:
                raise DegenerateSphereError(
                    "series vanishes on the sphere to working order")
            g = divide_sphere_factor(g, sphere)
            m += 1
            continue
        break

    n_isolated = 0
    point = None
    while g.order >= 1:
        b, c = sphere_affine_parts(g, sphere)
        if c.norm() <= zero_tol:
            break
        unit = -(b * c.inverse())
        defect = (unit * unit + Quaternion(1.0)).norm()
        if defect > tol:
            break
        unit = Quaternion(0.0, unit.x, unit.y, unit.z)
        im = unit.im_norm()
        if im <= 0.0:
            break
        unit = Quaternion(0.0, unit.x / im, unit.y / im, unit.z / im)
        p = sphere.point(unit)
        resid = g.eval(p).norm()
        if resid > 10.0 * zero_tol:
            break
        if point is None:
            point = p
        g = star_divide_linear(g, p, eps=max(DEFAULT_EPS, 20.0 * resid + zero_tol))
        n_isolated += 1

    probe_units = [QI, orthogonal_imaginary_unit(QI),
                   QI * orthogonal_imaginary_unit(QI)]
    sample = [g.eval(sphere.point(u)).norm() for u in probe_units]
    sample += [g.eval(sphere.point(-u)).norm() for u in probe_units]
    return MultiplicityReport(sphere, 2 * m, n_isolated, point, min(sample))


# ---------------------------------------------------------------------------
# Recentering onto a slice point.

def recenter_slice(f: SliceSeries, p, order: int = 128,
                   alias_tol: float = 1e-12) -> SliceSeries:
    """The regular function on B(0, radius - |p|) matching z -> f(p + z) on p's slice.

    Coefficients are recovered as Cauchy coefficients: z -> f(p + z) is sampled
    on a circle inside the slice plane L_I of p and transformed with phases
    multiplying on the left, where the slice restriction is exactly a one-sided
    power series. Oversampling by four suppresses aliasing; a warning is issued
    when the top coefficients have not decayed.
    """
    p = as_quaternion(p)
    new_radius = f.radius - p.norm()
    if new_radius <= 0.0:
        raise DomainError("recenter point too close to the boundary")
    x, y, unit = slice_decompose(p)
    if unit is None:
        unit = QI
    rc = 0.8 * new_radius
    n_samp = 4 * max(order, 1)
    theta = 2.0 * np.pi * np.arange(n_samp) / n_samp
    zs = np.zeros((n_samp, 4))
    zs[:, 0] = rc * np.cos(theta)
    s = rc * np.sin(theta)
    zs[:, 1] = s * unit.x
    zs[:, 2] = s * unit.y
    zs[:, 3] = s * unit.z
    vals = f.eval_many(zs + p.to_array())

    # Split values into the slice plane and its J-complement: v = v1 + J v2
    # with v1, v2 complex in L_I; left phases act as e^{-i n t} on v1 and
    # e^{+i n t} on v2, so both parts reduce to ordinary FFTs.
    ju = orthogonal_imaginary_unit(unit)
    ku = as_quaternion(unit) * ju
    frame = np.stack([np.array([1.0, 0, 0, 0]), unit.to_array(),
                      ju.to_array(), ku.to_array()])
    comp = vals @ frame.T           # components (a, b, c, d) in basis (1, I, J, IJ)
    v1 = comp[:, 0] + 1j * comp[:, 1]
    v2 = comp[:, 2] - 1j * comp[:, 3]
    c1 = np.fft.fft(v1) / n_samp
    c2 = np.fft.ifft(v2) * 1.0      # ifft includes the 1/n factor
    ns = np.arange(order + 1)
    radial = rc ** ns.astype(float)
    coeffs = np.zeros((order + 1, 4))
    u1 = c1[ns] / radial
    u2 = c2[ns] / radial
    coeffs += np.real(u1)[:, None] * frame[0]
    coeffs += np.imag(u1)[:, None] * frame[1]
    coeffs += np.real(u2)[:, None] * frame[2]
    coeffs -= np.imag(u2)[:, None] * frame[3]

    norms = np.sqrt(np.einsum("nk,nk->n", coeffs, coeffs))
    top = float(norms[-4:].max()) if order >= 4 else float(norms.max())
    if top > alias_tol * max(1.0, float(norms.max())):
        warnings.warn(f"recentered series top coefficients ~{top:.2e} have not "
                      "decayed; increase the order or shrink the ball", stacklevel=2)
    scale = 10.0 * top
    ratio = 0.9
    dec = norms[norms > 0]
    if dec.size >= 8:
        ratio = float(np.clip((dec[-1] / dec[-8]) ** (1.0 / 7.0), 0.05, 0.999))
    return SliceSeries(coeffs, new_radius, truncated=True,
                       tail_scale=scale, tail_ratio=ratio)
