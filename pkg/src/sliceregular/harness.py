"""Inequality suites: Schwarz-Pick, its non-injective variants, growth bounds,
and the collision-value bound, each run over seeded fixtures.

Every check compares a sampled left-hand side against its majorant and reports
the worst slack together with a truncation budget derived from the series'
tail envelopes; a violation counts as a failure only when it exceeds the
budget, so genuine theorem violations are distinguished from truncation noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisError, ManifestError
from .landau import (
    GridParams,
    certify_self_map,
    extremal_phi,
    generate_self_map,
    landau_rho,
    scan_collisions,
    scan_singular,
)
from .moebius import regular_moebius_series
from .quaternion import ONE, Quaternion, as_quaternion, slice_decompose
from .sampling import ball_points, rng_from_seed, shell_points, unit_quaternions
from .series import (
    SliceSeries,
    conjugate,
    constant,
    cullen_derivative,
    polynomial,
    reciprocal,
    spherical_derivative_at,
    star_mul,
    symmetrize,
)

#: The serious checks run at this series order.
CHECK_ORDER = 256
EQUALITY_TOL = 1e-9


@dataclass
class CheckReport:
    """Outcome of one inequality suite.

    ``worst_slack`` is the minimum of majorant minus left-hand side across all
    sampled instances; the verdict is a pass exactly when it exceeds the
    negated truncation budget. Checks whose witnesses do not exist (for
    example collision checks on injective maps) return ``inconclusive``.
    """

    theorem_id: str
    samples: int
    worst_slack: float
    truncation_budget: float
    verdict: str
    equality_attained: bool = False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"theorem_id": self.theorem_id, "samples": self.samples,
                "worst_slack": self.worst_slack,
                "truncation_budget": self.truncation_budget,
                "verdict": self.verdict,
                "equality_attained": self.equality_attained,
                "details": self.details}


def _verdict(worst_slack: float, budget: float) -> str:
    return "pass" if worst_slack > -budget else "fail"


def _norms(arr: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("mk,mk->m", arr, arr))


def one_minus_conj_star(f: SliceSeries, v: Quaternion) -> SliceSeries:
    """The series 1 - conj(v) * f."""
    return constant(1.0, f.radius) - f.left_const_mul(as_quaternion(v).conjugate())


def build_schwarz_numerator(f: SliceSeries, q0, order: int = CHECK_ORDER) -> SliceSeries:
    """The transformed map (f - f(q0)) * (1 - conj(f(q0)) * f)^{-*}.

    It is again a self-map of the ball and vanishes at q0; comparing its
    modulus against the Moebius majorant is the Schwarz-Pick inequality.
    """
    q0 = as_quaternion(q0)
    v = f.eval(q0)
    recip = reciprocal(one_minus_conj_star(f, v), order=order)
    return star_mul(f.shift_constant(-v), recip, max_order=order)


def check_schwarz_pick(f: SliceSeries, q0, n_samples: int = 500, seed: int = 0,
                       r_max: float = 0.95, order: int = CHECK_ORDER) -> CheckReport:
    """Sampled Schwarz-Pick inequality plus its two derivative forms at q0.

    For each sample q the modulus of the transformed map is required to stay
    below |M_{q0}(q)|; at q0 itself the Cullen-derivative quotient is compared
    against 1/(1-|q0|^2) and, at nonreal q0, the spherical-derivative quotient
    against 1/|1 - conj(q0)^2|. Regular Moebius transformations attain
    equality in all three.
    """
    q0 = as_quaternion(q0)
    certify_self_map(f)
    rng = rng_from_seed(seed)
    v = f.eval(q0)
    one_minus = one_minus_conj_star(f, v)
    recip = reciprocal(one_minus, order=order)
    transformed = star_mul(f.shift_constant(-v), recip, max_order=order)
    majorant = regular_moebius_series(q0, ONE, order=min(order, 192), radius=f.radius)

    pts = ball_points(rng, n_samples, r_max)
    pts = np.concatenate([pts, q0.to_array()[None, :]], axis=0)
    lhs = _norms(transformed.eval_many(pts))
    rhs = _norms(majorant.eval_many(pts))
    slacks = rhs - lhs
    budget = transformed.tail_bound(r_max) + majorant.tail_bound(r_max) + 1e-12

    deriv_series = star_mul(cullen_derivative(f), recip, max_order=order)
    cullen_lhs = deriv_series.eval(q0).norm()
    cullen_rhs = 1.0 / (1.0 - q0.norm_sq())
    cullen_slack = cullen_rhs - cullen_lhs
    details = {"q0": q0.to_list(), "cullen_slack": cullen_slack,
               "value_at_q0": v.to_list()}
    worst = min(float(slacks.min()), cullen_slack)
    eq_candidates = [abs(cullen_slack)]

    x, y, _ = slice_decompose(q0)
    if y > 1e-8:
        ds = spherical_derivative_at(f, q0)
        fs_val = symmetrize(f).eval(q0)
        lhs3 = ds.norm() / (Quaternion(1.0) - fs_val).norm()
        q0c2 = q0.conjugate() * q0.conjugate()
        rhs3 = 1.0 / (Quaternion(1.0) - q0c2).norm()
        spherical_slack = rhs3 - lhs3
        details["spherical_slack"] = spherical_slack
        worst = min(worst, spherical_slack)
        eq_candidates.append(abs(spherical_slack))

    interior = _norms(pts) > 0.05
    if np.any(interior):
        eq_candidates.append(float(np.abs(slacks[interior]).min()))
    equality = min(eq_candidates) < EQUALITY_TOL
    return CheckReport("schwarz_pick", len(pts), worst, budget,
                       _verdict(worst, budget), equality, details)


# ---------------------------------------------------------------------------
# Non-injective variant.

def build_noninjective_fixture(seed: int, placement: str = "generic",
                               degree: int = 3) -> dict:
    """Self-map of the form v + (q - q0) * (q - q1) * g, by construction.

    ``placement`` selects q1 = q0 (vanishing Cullen derivative), q1 = conj(q0)
    (vanishing spherical derivative), or a generic independent q1. The cubic g
    is random and the product is scaled to keep a boundary margin.
    """
    rng = rng_from_seed(seed)
    q0 = Quaternion.from_array(unit_quaternions(rng, 1)[0] * rng.uniform(0.2, 0.5))
    if abs(q0.im_norm()) < 0.05:
        q0 = Quaternion(q0.w, 0.3, q0.y, q0.z)
    if placement == "cullen":
        q1 = q0
    elif placement == "spherical":
        q1 = q0.conjugate()
    elif placement == "generic":
        q1 = Quaternion.from_array(unit_quaternions(rng, 1)[0] * rng.uniform(0.2, 0.55))
    else:
        raise ValueError(f"unknown placement {placement!r}")
    g = polynomial([Quaternion.from_array(row)
                    for row in rng.standard_normal((degree + 1, 4))])
    core = star_mul(star_mul(polynomial([-q0, 1.0]), polynomial([-q1, 1.0])), g)
    v = Quaternion.from_array(unit_quaternions(rng, 1)[0] * rng.uniform(0.05, 0.25))
    sup = float(_norms(core.eval_many(shell_points(rng, 1500, 0.97))).max())
    s = (1.0 - v.norm() - 0.1) / (1.15 * sup)
    f = core.scale(s).shift_constant(v)
    return {"f": f, "q0": q0, "q1": q1, "v": v, "scale": s, "placement": placement}


def variant_conjugation_point(q0: Quaternion, q1: Quaternion) -> Quaternion:
    """The second majorant center (1 - q1 q0)^{-1} q1 (1 - q1 q0), on the sphere of q1."""
    w = Quaternion(1.0) - q1 * q0
    return w.inverse() * q1 * w


def check_variant_noninjective(f: SliceSeries, q0, q1, v, n_samples: int = 500,
                               seed: int = 0, r_max: float = 0.95,
                               order: int = CHECK_ORDER) -> CheckReport:
    """Majorant test for maps that are not injective near the fiber of v.

    With f = v + (q - q0) * (q - q1) * g, the transformed map
    (f - v) * (1 - conj(v) * f)^{-*} is dominated by |M_{q0} * M_{p0}| where
    p0 is the conjugated copy of q1; samples always include q0 and p0, where
    both sides vanish.
    """
    q0, q1, v = as_quaternion(q0), as_quaternion(q1), as_quaternion(v)
    certify_self_map(f)
    rng = rng_from_seed(seed)
    p0 = variant_conjugation_point(q0, q1)
    recip = reciprocal(one_minus_conj_star(f, v), order=order)
    transformed = star_mul(f.shift_constant(-v), recip, max_order=order)
    m0 = regular_moebius_series(q0, ONE, order=min(order // 2, 128), radius=f.radius)
    m1 = regular_moebius_series(p0, ONE, order=min(order // 2, 128), radius=f.radius)
    majorant = star_mul(m0, m1, max_order=order)

    pts = ball_points(rng, n_samples, r_max)
    probes = np.stack([q0.to_array(), p0.to_array(),
                       0.5 * (q0.to_array() + p0.to_array())])
    pts = np.concatenate([pts, probes], axis=0)
    lhs = _norms(transformed.eval_many(pts))
    rhs = _norms(majorant.eval_many(pts))
    slacks = rhs - lhs
    budget = transformed.tail_bound(r_max) + majorant.tail_bound(r_max) + 1e-12
    worst = float(slacks.min())
    details = {"q0": q0.to_list(), "q1": q1.to_list(), "p0": p0.to_list(),
               "v": v.to_list(),
               "lhs_at_q0": float(lhs[-3]), "lhs_at_p0": float(lhs[-2])}
    return CheckReport("noninjective_majorant", len(pts), worst, budget,
                       _verdict(worst, budget), bool(np.abs(slacks).min() < EQUALITY_TOL),
                       details)


# ---------------------------------------------------------------------------
# Collision-value bound.

def check_globaltolocal(f: SliceSeries, grid: GridParams | None = None,
                        seed: int = 0, tol: float = 1e-8) -> CheckReport:
    """Collision pairs of a self-map fixing 0 must have |common value| <= r^2.

    Scans for collisions; when none are found inside the ceiling the verdict
    is inconclusive. For each polished pair the bound uses the larger radius
    r of the two witnesses; the pair is also required to sit near the shell
    where the scan first detected it.
    """
    grid = grid or GridParams()
    if f.coeff(0).norm() > 1e-9:
        raise HypothesisError("collision-value bound needs f(0) = 0")
    a = f.coeff(1).norm()
    certify_self_map(f, n_points=grid.boundary_points, seed=seed)
    singular = scan_singular(f, grid.scan_ceiling, grid, seed)
    collisions = scan_collisions(f, grid.scan_ceiling, grid, seed,
                                 singular_hints=singular)
    if not collisions:
        return CheckReport("collision_value_bound", 0, math.inf, tol,
                           "inconclusive", False,
                           {"collisions": 0, "singular": len(singular),
                            "derivative_modulus": a})
    shell_res = max(grid.scan_ceiling / max(grid.shells, 1), 0.02)
    worst = math.inf
    shell_ok = True
    rows = []
    for c in collisions:
        r = c["radius"]
        value = float(np.linalg.norm(np.array(c["value"])))
        worst = min(worst, r * r - value)
        drift = abs(r - c.get("shell", r))
        shell_ok = shell_ok and drift <= 2.0 * shell_res
        rows.append({"radius": r, "value": value, "shell_drift": drift})
    budget = tol + f.tail_bound(grid.scan_ceiling)
    verdict = _verdict(worst, budget)
    if not shell_ok:
        verdict = "fail"
    return CheckReport("collision_value_bound", len(collisions), worst, budget,
                       verdict, False,
                       {"pairs": rows, "singular": len(singular),
                        "derivative_modulus": a, "landau_rho": landau_rho(a)
                        if 0 < a < 1 else None})


# ---------------------------------------------------------------------------
# Growth bounds.

def check_minmax(f: SliceSeries, n_samples: int = 500, seed: int = 0,
                 r_max: float = 0.95, probes=()) -> CheckReport:
    """Two-sided growth bounds for self-maps fixing the origin.

    |q| (a - |q|)/(1 - a |q|) <= |f(q)| <= |q| (|q| + a)/(1 + a |q|) on every
    sample; attaining either bound within 1e-9 raises the equality flag, which
    marks f as a rotated Moebius product.
    """
    if f.coeff(0).norm() > 1e-9:
        raise HypothesisError("growth bounds need f(0) = 0")
    a = f.coeff(1).norm()
    if not (0.0 < a < 1.0):
        raise HypothesisError(f"derivative modulus {a} outside (0, 1)")
    certify_self_map(f, seed=seed)
    rng = rng_from_seed(seed)
    pts = ball_points(rng, n_samples, r_max, r_min=1e-3)
    if len(probes):
        pts = np.concatenate(
            [pts, np.stack([as_quaternion(p).to_array() for p in probes])], axis=0)
    vals = _norms(f.eval_many(pts))
    r = _norms(pts)
    lower = r * (a - r) / (1.0 - a * r)
    upper = r * (r + a) / (1.0 + a * r)
    slack_low = vals - lower
    slack_up = upper - vals
    worst = float(min(slack_low.min(), slack_up.min()))
    budget = f.tail_bound(r_max) + 1e-12
    equality = bool(min(np.abs(slack_low).min(), np.abs(slack_up).min()) < EQUALITY_TOL)
    details = {"derivative_modulus": a,
               "lower_attained": bool(np.abs(slack_low).min() < EQUALITY_TOL),
               "upper_attained": bool(np.abs(slack_up).min() < EQUALITY_TOL)}
    return CheckReport("modulus_growth_bounds", len(pts), worst, budget,
                       _verdict(worst, budget), equality, details)


# ---------------------------------------------------------------------------
# Manifest plumbing.

def _fixture_from_spec(spec: dict, seed: int):
    """Build a fixture series plus auxiliary data from a manifest fixture spec."""
    kind = spec.get("kind", "self_map")
    rng = rng_from_seed(seed + 10007)
    aux: dict = {"kind": kind}
    if kind == "self_map":
        f = generate_self_map(seed, k=int(spec.get("k", 2)))
    elif kind == "moebius":
        center = Quaternion.from_array(unit_quaternions(rng, 1)[0]
                                       * rng.uniform(0.15, 0.45))
        unit = Quaternion.from_array(unit_quaternions(rng, 1)[0])
        f = regular_moebius_series(center, unit, order=192)
        aux["center"] = center
    elif kind == "extremal":
        a = float(spec.get("a", 0.5))
        unit = Quaternion.from_array(unit_quaternions(rng, 1)[0])
        f = extremal_phi(a, unit, order=192)
        rho = landau_rho(a)
        q_low = -(unit.conjugate() * rho)
        q_up = unit.conjugate() * rho
        aux.update({"a": a, "rho": rho, "probes": [q_low, q_up]})
    elif kind == "rotation":
        unit = Quaternion.from_array(unit_quaternions(rng, 1)[0])
        a = float(spec.get("a", 0.4))
        f = polynomial([Quaternion(), unit * a])
        aux["a"] = a
    else:
        raise ManifestError(f"unknown fixture kind {kind!r}")
    return f, aux


def _corrupt(f: SliceSeries, directive: dict) -> SliceSeries:
    """Perturb one coefficient component; used by the mutation canary."""
    arr = np.array(f.coeffs)
    idx = int(directive.get("index", 1)) % arr.shape[0]
    arr[idx, int(directive.get("component", 0)) % 4] += float(directive.get("delta", 0.05))
    return SliceSeries(arr, f.radius, f.truncated, f.tail_scale, f.tail_ratio)


def run_entry(entry: dict) -> CheckReport:
    """Run one manifest entry and return its report."""
    theorem = entry.get("theorem_id")
    seed = int(entry.get("seed", 0))
    n_samples = int(entry.get("n_samples", 500))
    rng = rng_from_seed(seed + 31)

    if theorem == "schwarz_pick":
        f, aux = _fixture_from_spec(entry.get("fixture", {"kind": "self_map"}), seed)
        if "corrupt" in entry:
            f = _corrupt(f, entry["corrupt"])
        r_cap = 0.45 if aux["kind"] == "moebius" else 0.6
        q0 = Quaternion.from_array(unit_quaternions(rng, 1)[0]
                                   * rng.uniform(0.15, r_cap))
        if q0.im_norm() < 0.05:
            q0 = Quaternion(q0.w, 0.25, q0.x, q0.z)
        r_max = 0.85 if aux["kind"] == "moebius" else 0.95
        report = check_schwarz_pick(f, q0, n_samples, seed, r_max=r_max)
    elif theorem == "noninjective_majorant":
        fixture = build_noninjective_fixture(seed, entry.get("placement", "generic"))
        f = fixture["f"]
        if "corrupt" in entry:
            f = _corrupt(f, entry["corrupt"])
        report = check_variant_noninjective(f, fixture["q0"], fixture["q1"],
                                            fixture["v"], n_samples, seed)
        report.details["placement"] = fixture["placement"]
    elif theorem == "collision_value_bound":
        f, aux = _fixture_from_spec(entry.get("fixture", {"kind": "self_map", "k": 1}),
                                    seed)
        if "corrupt" in entry:
            f = _corrupt(f, entry["corrupt"])
        grid = GridParams(shells=int(entry.get("shells", 16)),
                          points_per_sphere=int(entry.get("points_per_sphere", 300)))
        report = check_globaltolocal(f, grid, seed)
    elif theorem == "modulus_growth_bounds":
        f, aux = _fixture_from_spec(entry.get("fixture", {"kind": "self_map"}), seed)
        if "corrupt" in entry:
            f = _corrupt(f, entry["corrupt"])
        report = check_minmax(f, n_samples, seed, probes=aux.get("probes", ()))
        report.details["fixture"] = aux["kind"]
    else:
        raise ManifestError(f"unknown theorem_id {theorem!r}")
    report.details["seed"] = seed
    report.details.setdefault("fixture", entry.get("fixture", {}).get("kind", ""))
    return report


def run_manifest(manifest: dict) -> list[CheckReport]:
    entries = manifest.get("entries")
    if not isinstance(entries, list):
        raise ManifestError("manifest must carry an 'entries' list")
    return [run_entry(e) for e in entries]


def default_manifest(seeds=tuple(range(20)), n_samples: int = 500) -> dict:
    """The full suite: every check over every seed, extremal and Moebius
    fixtures included so the equality cases are exercised."""
    entries: list[dict] = []
    for s in seeds:
        entries.append({"theorem_id": "schwarz_pick", "seed": s,
                        "n_samples": n_samples,
                        "fixture": {"kind": "self_map", "k": 1 + s % 2}})
        entries.append({"theorem_id": "schwarz_pick", "seed": s,
                        "n_samples": n_samples, "fixture": {"kind": "moebius"}})
        for placement in ("generic", "cullen", "spherical"):
            entries.append({"theorem_id": "noninjective_majorant", "seed": s,
                            "n_samples": n_samples, "placement": placement})
        entries.append({"theorem_id": "modulus_growth_bounds", "seed": s,
                        "n_samples": n_samples,
                        "fixture": {"kind": "self_map", "k": 1 + s % 2}})
        entries.append({"theorem_id": "modulus_growth_bounds", "seed": s,
                        "n_samples": n_samples, "fixture": {"kind": "extremal",
                                                            "a": 0.5}})
        entries.append({"theorem_id": "collision_value_bound", "seed": s,
                        "fixture": {"kind": "extremal", "a": 0.5}})
        entries.append({"theorem_id": "collision_value_bound", "seed": s,
                        "fixture": {"kind": "self_map", "k": 1}})
    return {"version": 1, "entries": entries}


def mutation_canary_manifest(seed: int = 3) -> dict:
    """A fixture corrupted by 0.05 in one coefficient; at least one entry must fail."""
    return {"version": 1, "entries": [
        {"theorem_id": "noninjective_majorant", "seed": seed,
         "n_samples": 200, "placement": "generic",
         "corrupt": {"index": 1, "component": 0, "delta": 0.05}},
    ]}
