"""Constructive optimal first-order laminates realizing the relaxed energy.

Given a unit-determinant target N, produces rank-one connected endpoints
F+, F- on the slip manifolds with N = mu F+ + (1-mu) F- and, on the regions
where the envelope is known, endpoint energies equal to the envelope value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import (DEGENERATE_CONSTANT, Mat, RankOneLine, Vec, det2,
                      frobenius_sq, solve_quadratic, solve_unit_image_times)
from .energy import DEFAULT_TOL, SlipSystem, h, h_perp, h_plus, h_perp_plus
from .errors import DegenerateTangency, OffManifold, PreconditionError

KINDS = ("CaseA", "CaseAPerp", "CaseN1lemN2", "CaseN2", "CaseN1capN2",
         "CaseOnManifold", "UpperBoundOnly")


@dataclass(frozen=True)
class LaminateDecomposition:
    """First-order laminate N = mu f_plus + (1-mu) f_minus.

    direction is the (a, n) pair of the rank-one line N(I + t a (x) n);
    energy is the common endpoint energy, except kind = UpperBoundOnly where
    it is the mu-weighted combination (no optimality claim).
    """

    f_plus: Mat
    f_minus: Mat
    mu: float
    direction: tuple
    energy: float
    kind: str
    degenerate_tie: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown laminate kind {self.kind!r}")


def _w_manifold(f: Mat) -> float:
    """Condensed energy of a matrix assumed to lie on M."""
    return max(frobenius_sq(f) - 2.0, 0.0)


def _single_point(n: Mat, s: SlipSystem, kind: str = "CaseOnManifold") -> LaminateDecomposition:
    return LaminateDecomposition(
        f_plus=n.copy(), f_minus=n.copy(), mu=0.5,
        direction=(s.v3, s.v3_perp), energy=_w_manifold(n), kind=kind,
    )


def _on_manifold(n: Mat, s: SlipSystem, tol: float) -> bool:
    d1 = abs(float(np.linalg.norm(n @ s.v1)) - 1.0)
    d2 = abs(float(np.linalg.norm(n @ s.v2)) - 1.0)
    return min(d1, d2) <= tol


def _pair_decomposition(line: RankOneLine, t_minus: float, t_plus: float,
                        energy: float, kind: str, tie: bool = False) -> LaminateDecomposition:
    mu = -t_minus / (t_plus - t_minus)
    return LaminateDecomposition(
        f_plus=line.point(t_plus), f_minus=line.point(t_minus), mu=mu,
        direction=(line.left, line.normal), energy=energy, kind=kind,
        degenerate_tie=tie,
    )


# ---------------------------------------------------------------------------
# orthogonal construction


def _dot_quadratic_roots(line: RankOneLine, v1: Vec, v2: Vec):
    """Roots of (F_t v1).(F_t v2) = 0 along the line."""
    f, a, n = line.base, line.left, line.normal
    fa, fv1, fv2 = f @ a, f @ v1, f @ v2
    n1, n2 = float(n @ v1), float(n @ v2)
    alpha = n1 * n2 * float(fa @ fa)
    beta = n1 * float(fa @ fv2) + n2 * float(fa @ fv1)
    c0 = float(fv1 @ fv2)
    return solve_quadratic(alpha, beta, c0, scale=max(1.0, frobenius_sq(f)) ** 2)


def _interval_construction(n_mat: Mat, s: SlipSystem, sign: float) -> LaminateDecomposition:
    """Cases with both slip norms above 1: scan the bisector rank-one line.

    sign > 0 handles Nv1.Nv2 > 0 (line direction (v1+v2) (x) (v1-v2));
    sign < 0 the mirrored case.  The admissible parameter set (both norms
    above 1, slip-image dot product of the prescribed sign) is a finite
    union of open intervals containing 0; the laminate endpoints are its
    extreme endpoints.
    """
    if sign > 0:
        a, nn = s.v1 + s.v2, s.v1 - s.v2
    else:
        a, nn = s.v1 - s.v2, s.v1 + s.v2
    line = RankOneLine(n_mat, a, nn)
    roots = []
    for v in (s.v1, s.v2):
        r = solve_unit_image_times(line, v)
        if r is not DEGENERATE_CONSTANT:
            roots.extend(r)
    roots.extend(_dot_quadratic_roots(line, s.v1, s.v2))
    roots = sorted(set(roots))
    if len(roots) < 2:
        raise DegenerateTangency("interval construction found fewer than two roots")

    def admissible(t: float) -> bool:
        ft = line.point(t)
        fv1, fv2 = ft @ s.v1, ft @ s.v2
        return (float(fv1 @ fv1) > 1.0 and float(fv2 @ fv2) > 1.0
                and sign * float(fv1 @ fv2) > 0.0)

    t_lo = math.inf
    t_hi = -math.inf
    for left, right in zip(roots[:-1], roots[1:]):
        if admissible(0.5 * (left + right)):
            t_lo = min(t_lo, left)
            t_hi = max(t_hi, right)
    if not (t_lo <= 0.0 <= t_hi) or t_hi <= t_lo:
        raise DegenerateTangency("target parameter 0 is not inside the admissible set")
    energy = _w_manifold(line.point(t_hi))
    return _pair_decomposition(line, t_lo, t_hi, energy,
                               "CaseA" if sign > 0 else "CaseAPerp")


def decompose_orthogonal(n: Mat, s: SlipSystem, tol: float = DEFAULT_TOL) -> LaminateDecomposition:
    """Optimal laminate for orthogonal slips; energy equals the relaxed density."""
    if not s.is_orthogonal:
        raise PreconditionError("decompose_orthogonal requires orthogonal slips")
    if abs(det2(n) - 1.0) > tol:
        raise OffManifold("target determinant differs from 1 beyond tolerance")
    if _on_manifold(n, s, tol):
        return _single_point(n, s)
    norm1 = float(np.linalg.norm(n @ s.v1))
    norm2 = float(np.linalg.norm(n @ s.v2))
    if norm1 > 1.0 and norm2 > 1.0:
        dot = float((n @ s.v1) @ (n @ s.v2))
        return _interval_construction(n, s, 1.0 if dot >= 0.0 else -1.0)
    # exactly one slip norm below 1: single-slip laminate along that system
    if norm1 < 1.0:
        v, kind = s.v1, "CaseN1lemN2"
    else:
        v, kind = s.v2, "CaseN2"
    from .algebra import perp
    line = RankOneLine(n, perp(v), v)
    roots = solve_unit_image_times(line, v)
    if roots is DEGENERATE_CONSTANT or len(roots) != 2:
        raise DegenerateTangency("single-slip construction requires two distinct roots")
    t_lo, t_hi = roots
    energy = _w_manifold(line.point(t_hi))
    return _pair_decomposition(line, t_lo, t_hi, energy, kind)


# ---------------------------------------------------------------------------
# general-angle construction


def _opposite_sign_equal_energy(line: RankOneLine, roots_a, roots_b, scale: float):
    """Bracketing pair (one root from each list) with equal endpoint energies."""
    best = None
    for ta in roots_a:
        for tb in roots_b:
            lo, hi = min(ta, tb), max(ta, tb)
            if not (lo <= 0.0 <= hi) or hi - lo <= 1e-15:
                continue
            w_lo = _w_manifold(line.point(lo))
            w_hi = _w_manifold(line.point(hi))
            if abs(w_lo - w_hi) > 1e-6 * scale:
                continue
            cand = (max(w_lo, w_hi), lo, hi)
            if best is None or cand[0] < best[0]:
                best = cand
    return best


def _two_roots(line: RankOneLine, v: Vec):
    r = solve_unit_image_times(line, v)
    if r is DEGENERATE_CONSTANT:
        return None
    return r if len(r) == 2 else None


def _general_a_case(n: Mat, s: SlipSystem, perp_case: bool) -> LaminateDecomposition:
    """Both slip norms above 1: laminate across M1 and M2 on the bisector line."""
    if perp_case:
        line = RankOneLine(n, s.v3_perp, s.v3)
        z = float(np.linalg.norm(n @ s.v3_perp))
        energy = h_perp(z, s.theta)
    else:
        line = RankOneLine(n, s.v3, s.v3_perp)
        z = float(np.linalg.norm(n @ s.v3))
        energy = h(z, s.theta)
    scale = max(1.0, frobenius_sq(n))
    r1 = _two_roots(line, s.v1)
    r2 = _two_roots(line, s.v2)
    if r1 is None or r2 is None:
        exc = DegenerateTangency("slip-image roots coincide; laminate degenerates")
        exc.decomposition = _single_point(n, s)
        raise exc
    best = _opposite_sign_equal_energy(line, r1, r2, scale)
    if best is None:
        raise DegenerateTangency("no bracketing equal-energy root pair found")
    value, lo, hi = best
    # degenerate symmetric quadratics make the root choice ambiguous
    tie = (abs(_w_manifold(line.point(r1[0])) - _w_manifold(line.point(r1[1]))) <= 1e-9 * scale
           or abs(_w_manifold(line.point(r2[0])) - _w_manifold(line.point(r2[1]))) <= 1e-9 * scale)
    return _pair_decomposition(line, lo, hi, value,
                               "CaseAPerp" if perp_case else "CaseA", tie=tie)


def _n1capn2_case(n: Mat, s: SlipSystem) -> LaminateDecomposition:
    """Both slip norms below 1: laminate on the v3 (x) v3_perp line."""
    line = RankOneLine(n, s.v3, s.v3_perp)
    scale = max(1.0, frobenius_sq(n))
    r1 = _two_roots(line, s.v1)
    r2 = _two_roots(line, s.v2)
    if r1 is None or r2 is None:
        exc = DegenerateTangency("slip-image roots coincide; laminate degenerates")
        exc.decomposition = _single_point(n, s)
        raise exc
    best = _opposite_sign_equal_energy(line, r1, r2, scale)
    if best is None:
        raise DegenerateTangency("no bracketing equal-energy root pair found")
    value, lo, hi = best
    return _pair_decomposition(line, lo, hi, value, "CaseN1capN2")


def _single_slip_candidate(n: Mat, s: SlipSystem, v: Vec):
    from .algebra import perp
    line = RankOneLine(n, perp(v), v)
    roots = solve_unit_image_times(line, v)
    if roots is DEGENERATE_CONSTANT or len(roots) != 2:
        return None
    t_lo, t_hi = roots
    if not t_lo <= 0.0 <= t_hi:
        return None
    energy = _w_manifold(line.point(t_hi))
    return _pair_decomposition(line, t_lo, t_hi, energy, "UpperBoundOnly")


def _mixed_candidate(n: Mat, s: SlipSystem, inside: Vec, perp_line: bool):
    """Laminate across both manifolds from inside a single compressed region."""
    if perp_line:
        line = RankOneLine(n, s.v3_perp, s.v3)
    else:
        line = RankOneLine(n, s.v3, s.v3_perp)
    outside = s.v2 if inside is s.v1 else s.v1
    r_in = _two_roots(line, inside)
    r_out = _two_roots(line, outside)
    if r_in is None or r_out is None:
        return None
    scale = max(1.0, frobenius_sq(n))
    best = _opposite_sign_equal_energy(line, r_in, r_out, scale)
    if best is None:
        return None
    value, lo, hi = best
    return _pair_decomposition(line, lo, hi, value, "UpperBoundOnly")


def decompose_general(n: Mat, s: SlipSystem, tol: float = DEFAULT_TOL) -> LaminateDecomposition:
    """Laminate construction for non-orthogonal slip systems.

    On the regions where the relaxed density is known the endpoint energies
    match it; in the single compressed regions the best available upper-bound
    laminate is returned with kind = UpperBoundOnly.
    """
    if s.is_orthogonal:
        raise PreconditionError("decompose_general requires a non-orthogonal system")
    if abs(det2(n) - 1.0) > tol:
        raise OffManifold("target determinant differs from 1 beyond tolerance")
    if _on_manifold(n, s, tol):
        return _single_point(n, s)
    norm1 = float(np.linalg.norm(n @ s.v1))
    norm2 = float(np.linalg.norm(n @ s.v2))
    if norm1 > 1.0 and norm2 > 1.0:
        dot = float((n @ s.v1) @ (n @ s.v2))
        return _general_a_case(n, s, perp_case=dot < 0.0)
    if norm1 < 1.0 and norm2 < 1.0:
        return _n1capn2_case(n, s)
    inside = s.v1 if norm1 < 1.0 else s.v2
    candidates = [_single_slip_candidate(n, s, inside),
                  _mixed_candidate(n, s, inside, perp_line=False),
                  _mixed_candidate(n, s, inside, perp_line=True)]
    candidates = [c for c in candidates if c is not None]
    if not candidates:
        raise DegenerateTangency("no admissible laminate found in the compressed region")
    return min(candidates, key=lambda d: d.energy)


def decompose(n: Mat, s: SlipSystem, tol: float = DEFAULT_TOL) -> LaminateDecomposition:
    if s.is_orthogonal:
        return decompose_orthogonal(n, s, tol)
    return decompose_general(n, s, tol)


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class DecompositionReport:
    convex_combination: float
    rank_one: float
    manifold: float
    energy_equality: float
    preserved_vector: float

    def max_residual(self) -> float:
        return max(self.convex_combination, self.rank_one, self.manifold,
                   self.energy_equality, self.preserved_vector)


def verify_decomposition(d: LaminateDecomposition, n: Mat, s: SlipSystem) -> DecompositionReport:
    """Residuals of the defining identities of a laminate decomposition."""
    scale = max(1.0, math.sqrt(frobenius_sq(n)))
    comb = d.mu * d.f_plus + (1.0 - d.mu) * d.f_minus - n
    conv = math.sqrt(frobenius_sq(comb)) / scale
    diff = d.f_plus - d.f_minus
    dn = frobenius_sq(diff)
    rank1 = abs(det2(diff)) / dn if dn > 0.0 else 0.0
    man = 0.0
    for f in (d.f_plus, d.f_minus):
        dev = min(abs(float(np.linalg.norm(f @ s.v1)) - 1.0),
                  abs(float(np.linalg.norm(f @ s.v2)) - 1.0))
        man = max(man, dev)
    wp, wm = _w_manifold(d.f_plus), _w_manifold(d.f_minus)
    if d.kind == "UpperBoundOnly":
        energy_res = abs(d.mu * wp + (1.0 - d.mu) * wm - d.energy)
    else:
        energy_res = max(abs(wp - d.energy), abs(wm - d.energy))
    a = np.asarray(d.direction[0], dtype=float)
    norm_a = float(np.linalg.norm(a))
    pres = 0.0
    if norm_a > 0.0:
        a_hat = a / norm_a
        for f in (d.f_plus, d.f_minus):
            pres = max(pres, float(np.linalg.norm((f - n) @ a_hat)) / scale)
    return DecompositionReport(convex_combination=conv, rank_one=rank1, manifold=man,
                               energy_equality=energy_res, preserved_vector=pres)
