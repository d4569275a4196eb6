"""Scalar energy densities and envelope functions of the two-slip model.

Covers the condensed density W, the plateau function chi, the h-family of
envelope profiles, the convex majorant f, the homogenized density (orthogonal
and general-angle) and the scalar shear form of the homogenized density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

from .algebra import Mat, Vec, det2, frobenius_sq, perp, rotation
from .errors import BranchDisagreement, DomainError, PreconditionError

DEFAULT_TOL = 1e-9

ORTHO_THETA_TOL = 1e-12


# ---------------------------------------------------------------------------
# slip systems


@dataclass(frozen=True)
class SlipSystem:
    """Two unit slip directions with half-angle theta and soft fraction lam.

    (v1, v2) is right-handed with mutual angle 2*theta, theta in [pi/4, pi/2);
    theta = pi/4 is the orthogonal regime.  v3 bisects the larger angle:
    v3 = -(v1 + v2)/|v1 + v2|.
    """

    v1: Vec
    v2: Vec
    theta: float
    v3: Vec
    lam: float

    @classmethod
    def from_vectors(cls, v1, v2, lam: float) -> "SlipSystem":
        v1 = np.asarray(v1, dtype=float)
        v2 = np.asarray(v2, dtype=float)
        if abs(np.linalg.norm(v1) - 1.0) > 1e-12 or abs(np.linalg.norm(v2) - 1.0) > 1e-12:
            raise PreconditionError("slip directions must be unit vectors")
        if float(perp(v1) @ v2) <= 0.0:
            raise PreconditionError("(v1, v2) must be right-handed")
        cos2t = float(np.clip(v1 @ v2, -1.0, 1.0))
        theta = 0.5 * math.acos(cos2t)
        if theta < math.pi / 4 - 1e-12 or theta >= math.pi / 2:
            raise PreconditionError("half-angle must lie in [pi/4, pi/2)")
        if not 0.0 < lam < 1.0:
            raise PreconditionError("soft volume fraction must lie in (0, 1)")
        w = v1 + v2
        v3 = -w / np.linalg.norm(w)
        return cls(v1=v1, v2=v2, theta=theta, v3=v3, lam=lam)

    @classmethod
    def from_theta(cls, theta: float, lam: float) -> "SlipSystem":
        """Canonical frame with the bisector v3 = (0, -1)."""
        s, c = math.sin(theta), math.cos(theta)
        return cls.from_vectors((s, c), (-s, c), lam)

    @classmethod
    def orthogonal(cls, v1=(1.0, 0.0), lam: float = 0.5) -> "SlipSystem":
        v1 = np.asarray(v1, dtype=float)
        return cls.from_vectors(v1, perp(v1), lam)

    @property
    def is_orthogonal(self) -> bool:
        return abs(self.theta - math.pi / 4) <= ORTHO_THETA_TOL

    @property
    def v3_perp(self) -> Vec:
        return perp(self.v3)


# ---------------------------------------------------------------------------
# extended-real energies


@total_ordering
@dataclass(frozen=True)
class ExtendedEnergy:
    """Nonnegative energy value or the distinguished value Infinite."""

    value: float
    infinite: bool = False

    @classmethod
    def finite(cls, value: float) -> "ExtendedEnergy":
        if value < 0.0:
            raise ValueError("finite energies must be nonnegative")
        return cls(value=float(value))

    @classmethod
    def inf(cls) -> "ExtendedEnergy":
        return cls(value=math.inf, infinite=True)

    @property
    def is_finite(self) -> bool:
        return not self.infinite

    def as_float(self) -> float:
        return math.inf if self.infinite else self.value

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtendedEnergy):
            return NotImplemented
        return self.as_float() == other.as_float()

    def __lt__(self, other) -> bool:
        return self.as_float() < other.as_float()


INFINITE = ExtendedEnergy.inf()


# ---------------------------------------------------------------------------
# scalar profiles


def _pos(x: float) -> float:
    return x if x > 0.0 else 0.0


def chi(z: float) -> float:
    """((2 z^2 - 1)_+^{1/2} - 1)_+^2."""
    return _pos(math.sqrt(_pos(2.0 * z * z - 1.0)) - 1.0) ** 2


def h(z: float, theta: float) -> float:
    s, c = math.sin(theta), math.cos(theta)
    return _pos(math.sqrt(_pos(z * z / (s * s) - 1.0)) - c / s) ** 2


def h_perp(z: float, theta: float) -> float:
    s, c = math.sin(theta), math.cos(theta)
    return _pos(math.sqrt(_pos(z * z / (c * c) - 1.0)) - s / c) ** 2


def _sqrt_floor(z: float, floor: float, name: str) -> float:
    # z must not fall below the domain floor beyond 1e-12 slack
    d = z * z - floor * floor
    if d < -1e-12:
        raise DomainError(f"{name} evaluated below its domain floor (z={z})")
    return math.sqrt(_pos(d))


def h_star(z: float, theta: float) -> float:
    s, c = math.sin(theta), math.cos(theta)
    r = _sqrt_floor(z, s, "h_star")
    return (1.0 + z * z - 2.0 * c * r) / (s * s) - 2.0


def h_perp_star(z: float, theta: float) -> float:
    s, c = math.sin(theta), math.cos(theta)
    r = _sqrt_floor(z, c, "h_perp_star")
    return (1.0 + z * z - 2.0 * s * r) / (c * c) - 2.0


def h_plus(z: float, theta: float) -> float:
    s, c = math.sin(theta), math.cos(theta)
    r = _sqrt_floor(z, s, "h_plus")
    return (1.0 + z * z + 2.0 * c * r) / (s * s) - 2.0


def h_perp_plus(z: float, theta: float) -> float:
    s, c = math.sin(theta), math.cos(theta)
    r = _sqrt_floor(z, c, "h_perp_plus")
    return (1.0 + z * z + 2.0 * s * r) / (c * c) - 2.0


_H_FAMILY = {
    "h": h,
    "h_star": h_star,
    "h_perp": h_perp,
    "h_perp_star": h_perp_star,
    "h_plus": h_plus,
    "h_perp_plus": h_perp_plus,
}


def h_family(z: float, theta: float, which: str) -> float:
    """Dispatch over the six envelope profiles by name."""
    try:
        fn = _H_FAMILY[which]
    except KeyError:
        raise ValueError(f"unknown profile {which!r}") from None
    return fn(z, theta)


# ---------------------------------------------------------------------------
# energy densities


def w_condensed(f: Mat, s: SlipSystem, tol: float = DEFAULT_TOL) -> ExtendedEnergy:
    """Condensed two-slip density: |F|^2 - 2 on M = M1 u M2, Infinite off it."""
    if tol <= 0.0:
        raise PreconditionError("membership tolerance must be positive")
    if abs(det2(f) - 1.0) > tol:
        return INFINITE
    d1 = abs(float(np.linalg.norm(f @ s.v1)) - 1.0)
    d2 = abs(float(np.linalg.norm(f @ s.v2)) - 1.0)
    if min(d1, d2) > tol:
        return INFINITE
    return ExtendedEnergy.finite(_pos(frobenius_sq(f) - 2.0))


def f_majorant(f: Mat, s: SlipSystem) -> float:
    """Convex majorant coinciding with W on M and with W_hom on det-1 matrices."""
    z3 = float(np.linalg.norm(f @ s.v3))
    z3p = float(np.linalg.norm(f @ s.v3_perp))
    if s.is_orthogonal:
        n1 = float(f @ s.v1 @ (f @ s.v1))
        n2 = float(f @ s.v2 @ (f @ s.v2))
        return max(_pos(n1 - 1.0), _pos(n2 - 1.0), chi(max(z3, z3p)))
    return max(h(z3, s.theta), h_perp(z3p, s.theta))


def w_hom_orthogonal(f: Mat, s: SlipSystem, tol: float = DEFAULT_TOL) -> ExtendedEnergy:
    """Homogenized density for orthogonal slips (closed form)."""
    if not s.is_orthogonal:
        raise PreconditionError("w_hom_orthogonal requires an orthogonal slip system")
    if abs(det2(f) - 1.0) > tol:
        return INFINITE
    n1 = float(np.linalg.norm(f @ s.v1))
    n2 = float(np.linalg.norm(f @ s.v2))
    if n1 <= 1.0 + tol:
        val = float(np.linalg.norm(f @ perp(s.v1))) ** 2 - 1.0
    elif n2 <= 1.0 + tol:
        val = float(np.linalg.norm(f @ perp(s.v2))) ** 2 - 1.0
    else:
        z = max(float(np.linalg.norm(f @ s.v3)), float(np.linalg.norm(f @ s.v3_perp)))
        val = chi(z)
    return ExtendedEnergy.finite(_pos(val))


@dataclass(frozen=True)
class Known:
    value: ExtendedEnergy


@dataclass(frozen=True)
class Bounds:
    lower: float
    upper: float


def w_hom_general(f: Mat, s: SlipSystem, tol: float = DEFAULT_TOL):
    """Homogenized density for general angle: Known value or two-sided Bounds.

    Known on the closures of A, A_perp, N1 n N2 and on M1, M2; elsewhere the
    envelope is open and lower/upper bounds are returned.  Points within tol
    of a region boundary are evaluated by every adjacent closed-form branch
    and the branches are required to agree within 10*tol.
    """
    if s.is_orthogonal:
        raise PreconditionError("w_hom_general requires theta in (pi/4, pi/2)")
    if abs(det2(f) - 1.0) > tol:
        return Known(INFINITE)
    fv1, fv2 = f @ s.v1, f @ s.v2
    d1 = float(np.linalg.norm(fv1)) - 1.0
    d2 = float(np.linalg.norm(fv2)) - 1.0
    dot = float(fv1 @ fv2)
    scale = max(1.0, frobenius_sq(f))
    tol_s = tol * scale
    z3 = float(np.linalg.norm(f @ s.v3))
    z3p = float(np.linalg.norm(f @ s.v3_perp))

    branch_vals = []
    if abs(d1) <= tol:
        branch_vals.append(float(np.linalg.norm(f @ perp(s.v1))) ** 2 - 1.0)
    if abs(d2) <= tol:
        branch_vals.append(float(np.linalg.norm(f @ perp(s.v2))) ** 2 - 1.0)
    both_ge = d1 >= -tol and d2 >= -tol
    both_le = d1 <= tol and d2 <= tol
    if (both_ge and dot >= -tol_s) or both_le:
        branch_vals.append(h(z3, s.theta))
    if both_ge and dot <= tol_s:
        branch_vals.append(h_perp(z3p, s.theta))

    if branch_vals:
        ref = branch_vals[0]
        for v in branch_vals[1:]:
            if abs(v - ref) > 10.0 * tol * scale:
                raise BranchDisagreement(
                    f"closed-form branches disagree near a region boundary: {branch_vals}"
                )
        return Known(ExtendedEnergy.finite(_pos(ref)))

    # open set N1\N2 or N2\N1: envelope unknown, report bounds
    lower = max(h(z3, s.theta), h_perp(z3p, s.theta))
    uppers = []
    if d1 <= tol:
        uppers.append(float(np.linalg.norm(f @ perp(s.v1))) ** 2 - 1.0)
    if d2 <= tol:
        uppers.append(float(np.linalg.norm(f @ perp(s.v2))) ** 2 - 1.0)
    if z3 >= math.sin(s.theta) - 1e-12:
        uppers.append(h_plus(z3, s.theta))
    if z3p >= math.cos(s.theta) - 1e-12:
        uppers.append(h_perp_plus(z3p, s.theta))
    return Bounds(lower=lower, upper=min(uppers))


def w_hom(f: Mat, s: SlipSystem, tol: float = DEFAULT_TOL):
    """Known/Bounds view of the homogenized density for any slip system."""
    if s.is_orthogonal:
        return Known(w_hom_orthogonal(f, s, tol))
    return w_hom_general(f, s, tol)


def w_hom_scalar(gamma: float, s: SlipSystem) -> float:
    """Homogenized energy of the shear R(I + (gamma/lam) e1 (x) e2).

    Piecewise closed form in gamma; requires orthogonal slips.
    """
    if not s.is_orthogonal:
        raise PreconditionError("scalar form requires an orthogonal slip system")
    a, b = float(s.v1[0]), float(s.v1[1])
    g = gamma / s.lam
    ab = a * b
    if ab > 0.0:
        if 0.0 <= gamma <= 2.0 * s.lam * b / a:
            return 2.0 * ab * g + b * b * g * g
        if -2.0 * s.lam * a / b <= gamma <= 0.0:
            return -2.0 * ab * g + a * a * g * g
    elif ab < 0.0:
        if 2.0 * s.lam * b / a <= gamma <= 0.0:
            return 2.0 * ab * g + b * b * g * g
        if 0.0 <= gamma <= -2.0 * s.lam * a / b:
            return -2.0 * ab * g + a * a * g * g
    # both slip norms exceed 1: chi branch, argument max{|Nv3|, |Nv3_perp|}
    q = 2.0 * (a * a - b * b) * g
    r = g * g
    arg = max(1.0 + q + (1.0 + 2.0 * ab) * r, 1.0 - q + (1.0 - 2.0 * ab) * r)
    return _pos(math.sqrt(_pos(arg)) - 1.0) ** 2


# ---------------------------------------------------------------------------
# Lemma-style comparison of f against |F|^2 - 2 for structured splits F = A + D


def make_fad_pair(gamma1: float, gamma2: float, angle: float, s: SlipSystem, which: int = 2):
    """Build (A, D) with A = R(I + gamma2 v_j (x) v_i) and D = R gamma1 e1 (x) e2."""
    r = rotation(angle)
    if which == 2:
        a = r @ (np.eye(2) + gamma2 * np.outer(s.v2, s.v1))
    else:
        a = r @ (np.eye(2) + gamma2 * np.outer(s.v1, s.v2))
    d = gamma1 * np.outer(r @ np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    return a, d


def lemma_fad_check(a: Mat, d: Mat, c: float, s: SlipSystem) -> bool:
    """True iff f(A+D) <= |A+D|^2 - 2 + c (sqrt|D|+|D|)(sqrt|A|+|A|+sqrt|D|+|D|).

    A must be a rotation times a single-slip shear, D a rotated simple shear
    along e1 (x) e2 with the same rotation; orthogonal slips only.
    """
    if not s.is_orthogonal:
        raise PreconditionError("structured split requires orthogonal slips")
    scale = max(1.0, math.sqrt(frobenius_sq(a)), math.sqrt(frobenius_sq(d)))
    if abs(det2(a) - 1.0) > 1e-10 * scale * scale:
        raise PreconditionError("A must have unit determinant")
    n1 = abs(float(np.linalg.norm(a @ s.v1)) - 1.0)
    n2 = abs(float(np.linalg.norm(a @ s.v2)) - 1.0)
    if min(n1, n2) > 1e-10 * scale:
        raise PreconditionError("A must be a rotated single-slip shear")
    # recover the rotation from the preserved slip direction
    v = s.v2 if n2 <= n1 else s.v1
    rv = a @ v
    ang = math.atan2(rv[1], rv[0]) - math.atan2(v[1], v[0])
    r = rotation(ang)
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    if float(np.linalg.norm(d @ e1)) > 1e-10 * scale:
        raise PreconditionError("D must annihilate e1")
    if abs(float((d @ e2) @ (r @ e2))) > 1e-10 * scale:
        raise PreconditionError("D's image must be parallel to R e1")
    f = a + d
    na, nd = math.sqrt(frobenius_sq(a)), math.sqrt(frobenius_sq(d))
    bound = (
        frobenius_sq(f)
        - 2.0
        + c * (math.sqrt(nd) + nd) * (math.sqrt(na) + na + math.sqrt(nd) + nd)
    )
    return f_majorant(f, s) <= bound + 1e-12 * scale * scale
