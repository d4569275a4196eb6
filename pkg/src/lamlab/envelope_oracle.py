"""Brute-force first-order lamination oracle.

Independently estimates the lamination envelope of the condensed density by
exhaustive search over determinant-preserving rank-one lines through the
target: for each direction the line meets the slip manifolds in at most four
points, every bracketing pair yields a two-point laminate candidate, and the
best direction is refined by golden-section search.  Used to certify the
closed-form envelopes and bounds.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import Mat, det2, frobenius_sq
from .energy import (DEFAULT_TOL, Bounds, ExtendedEnergy, Known, SlipSystem,
                     INFINITE)
from .errors import OffManifold, PreconditionError
from .laminate import LaminateDecomposition
from .regions import RegionCell, region_map

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

_ROOT_EPS = 1e-13


def _direction_best(f: Mat, s: SlipSystem, phi: float):
    """Best two-point laminate on the line F(I + t m (x) m_perp), m = m(phi).

    Returns (energy, t_a, t_b) or None when the line yields no bracketing
    pair of slip-manifold intersections.
    """
    c, sn = math.cos(phi), math.sin(phi)
    fm = (f[0, 0] * c + f[0, 1] * sn, f[1, 0] * c + f[1, 1] * sn)
    fmp = (-f[0, 0] * sn + f[0, 1] * c, -f[1, 0] * sn + f[1, 1] * c)
    am2 = fm[0] * fm[0] + fm[1] * fm[1]
    drift = fm[0] * fmp[0] + fm[1] * fmp[1]
    fro = frobenius_sq(f)
    scale = max(1.0, fro)

    roots = []
    for v in (s.v1, s.v2):
        mv = -sn * v[0] + c * v[1]  # m_perp . v
        fv = (f[0, 0] * v[0] + f[0, 1] * v[1], f[1, 0] * v[0] + f[1, 1] * v[1])
        c0 = fv[0] * fv[0] + fv[1] * fv[1] - 1.0
        alpha = mv * mv * am2
        beta = 2.0 * mv * (fm[0] * fv[0] + fm[1] * fv[1])
        if alpha <= _ROOT_EPS * scale:
            if abs(beta) > _ROOT_EPS * scale:
                roots.append(-c0 / beta)
            continue
        disc = beta * beta - 4.0 * alpha * c0
        if disc < 0.0:
            continue
        sq = math.sqrt(disc)
        q = -(beta + math.copysign(sq, beta)) / 2.0
        if q == 0.0:
            r = math.sqrt(max(-c0 / alpha, 0.0))
            pair = (-r, r)
        else:
            pair = (q / alpha, c0 / q)
        for t in pair:
            # one Newton polish step on the unit-image constraint
            g = alpha * t * t + beta * t + c0
            dg = 2.0 * alpha * t + beta
            if dg != 0.0:
                t -= g / dg
            roots.append(t)

    best = None
    for i, ta in enumerate(roots):
        for tb in roots[i + 1:]:
            lo, hi = (ta, tb) if ta <= tb else (tb, ta)
            if lo > 0.0 or hi < 0.0 or hi - lo <= 1e-15:
                continue
            w_lo = max(fro - 2.0 + 2.0 * lo * drift + lo * lo * am2, 0.0)
            w_hi = max(fro - 2.0 + 2.0 * hi * drift + hi * hi * am2, 0.0)
            mu_lo = hi / (hi - lo)
            energy = mu_lo * w_lo + (1.0 - mu_lo) * w_hi
            if best is None or energy < best[0]:
                best = (energy, lo, hi)
    return best


def _scan_directions(f: Mat, s: SlipSystem, phis: np.ndarray) -> np.ndarray:
    """Vectorized best candidate energy per direction (inf where none)."""
    c, sn = np.cos(phis), np.sin(phis)
    m = np.stack([c, sn], axis=-1)
    mp = np.stack([-sn, c], axis=-1)
    fm = m @ f.T
    fmp = mp @ f.T
    am2 = np.einsum("ki,ki->k", fm, fm)
    drift = np.einsum("ki,ki->k", fm, fmp)
    fro = frobenius_sq(f)
    scale = max(1.0, fro)

    k = phis.shape[0]
    roots = np.full((k, 4), np.nan)
    for j, v in enumerate((s.v1, s.v2)):
        fv = f @ v
        c0 = float(fv @ fv) - 1.0
        mv = mp @ v
        alpha = mv * mv * am2
        beta = 2.0 * mv * (fm @ fv)
        lin = (alpha <= _ROOT_EPS * scale) & (np.abs(beta) > _ROOT_EPS * scale)
        quad = alpha > _ROOT_EPS * scale
        disc = beta * beta - 4.0 * alpha * c0
        ok = quad & (disc >= 0.0)
        sq = np.sqrt(np.where(ok, disc, 0.0))
        q = -(beta + np.copysign(sq, beta)) / 2.0
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = np.where(ok & (q != 0.0), q / alpha, np.nan)
            r2 = np.where(ok & (q != 0.0), c0 / q, np.nan)
            rl = np.where(lin, -c0 / beta, np.nan)
        # symmetric case beta == 0: pm sqrt(-c0/alpha)
        sym = ok & (q == 0.0)
        if np.any(sym):
            r = np.sqrt(np.maximum(-c0 / np.where(sym, alpha, 1.0), 0.0))
            r1 = np.where(sym, -r, r1)
            r2 = np.where(sym, r, r2)
        r1 = np.where(lin, rl, r1)
        for col, t in ((2 * j, r1), (2 * j + 1, r2)):
            g = alpha * t * t + beta * t + c0
            dg = 2.0 * alpha * t + beta
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(np.isfinite(t) & (dg != 0.0), t - g / dg, t)
            roots[:, col] = t

    best = np.full(k, np.inf)
    w0 = fro - 2.0
    for i in range(4):
        ta = roots[:, i]
        for jj in range(i + 1, 4):
            tb = roots[:, jj]
            lo = np.minimum(ta, tb)
            hi = np.maximum(ta, tb)
            valid = np.isfinite(lo) & np.isfinite(hi) & (lo <= 0.0) & (hi >= 0.0) \
                & (hi - lo > 1e-15)
            w_lo = np.maximum(w0 + 2.0 * lo * drift + lo * lo * am2, 0.0)
            w_hi = np.maximum(w0 + 2.0 * hi * drift + hi * hi * am2, 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                mu_lo = hi / (hi - lo)
                cand = mu_lo * w_lo + (1.0 - mu_lo) * w_hi
            best = np.where(valid & (cand < best), cand, best)
    return best


@dataclass(frozen=True)
class OracleResult:
    value: ExtendedEnergy
    best: Optional[LaminateDecomposition]
    directions_scanned: int
    refined_angle: float


def _refine_phi(f: Mat, s: SlipSystem, a: float, b: float, width: float = 1e-8) -> float:
    """Golden-section minimization of the per-direction candidate energy."""

    def value(phi: float) -> float:
        best = _direction_best(f, s, phi)
        return best[0] if best is not None else math.inf

    c = b - (b - a) / GOLDEN
    d = a + (b - a) / GOLDEN
    fc, fd = value(c), value(d)
    while abs(c - d) > width:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) / GOLDEN
            fc = value(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) / GOLDEN
            fd = value(d)
    return 0.5 * (a + b)


def wlc_numeric(f: Mat, s: SlipSystem, n_dirs: int = 720,
                tol: float = DEFAULT_TOL) -> OracleResult:
    """Numeric lamination envelope at a unit-determinant matrix.

    Scans n_dirs uniformly spaced rank-one directions on [0, pi), refines the
    best one by golden-section search, and includes the single-point
    candidate when F itself lies on a slip manifold.
    """
    if n_dirs < 8:
        raise PreconditionError("the direction grid needs at least 8 points")
    if abs(det2(f) - 1.0) > tol:
        raise OffManifold("oracle targets must have unit determinant")

    single = None
    d1 = abs(float(np.linalg.norm(f @ s.v1)) - 1.0)
    d2 = abs(float(np.linalg.norm(f @ s.v2)) - 1.0)
    if min(d1, d2) <= tol:
        single = max(frobenius_sq(f) - 2.0, 0.0)

    phis = np.arange(n_dirs) * (math.pi / n_dirs)
    per_dir = _scan_directions(f, s, phis)
    i_best = int(np.argmin(per_dir))
    step = math.pi / n_dirs
    phi_star = _refine_phi(f, s, phis[i_best] - step, phis[i_best] + step)
    refined = _direction_best(f, s, phi_star)
    coarse = float(per_dir[i_best])
    candidates = [x for x in (coarse, refined[0] if refined else None, single)
                  if x is not None]
    if not candidates:
        return OracleResult(value=INFINITE, best=None,
                            directions_scanned=n_dirs, refined_angle=phi_star)
    value = min(candidates)

    best_dec = None
    if single is not None and single <= value:
        value = single
        best_dec = LaminateDecomposition(
            f_plus=f.copy(), f_minus=f.copy(), mu=0.5,
            direction=(s.v3, s.v3_perp), energy=single, kind="CaseOnManifold")
    else:
        src = refined if (refined and refined[0] <= coarse) else \
            _direction_best(f, s, float(phis[i_best]))
        if src is not None:
            _, lo, hi = src
            phi = phi_star if (refined and refined[0] <= coarse) else float(phis[i_best])
            m = np.array([math.cos(phi), math.sin(phi)])
            mperp = np.array([-m[1], m[0]])
            f_lo = f @ (np.eye(2) + lo * np.outer(m, mperp))
            f_hi = f @ (np.eye(2) + hi * np.outer(m, mperp))
            best_dec = LaminateDecomposition(
                f_plus=f_hi, f_minus=f_lo, mu=-lo / (hi - lo),
                direction=(m, mperp), energy=value, kind="UpperBoundOnly")
    return OracleResult(value=ExtendedEnergy.finite(max(value, 0.0)), best=best_dec,
                        directions_scanned=n_dirs, refined_angle=phi_star)


# ---------------------------------------------------------------------------
# grid certification scan


@dataclass(frozen=True)
class ScanRow:
    b: float
    c: float
    region: str
    skipped: bool
    closed: Optional[float]     # Known envelope value (None on Bounds cells)
    lower: Optional[float]
    upper: Optional[float]
    oracle: Optional[float]
    discrepancy: Optional[float]  # |oracle - closed| on Known cells
    slack_lo: Optional[float]     # oracle - lower on Bounds cells
    slack_hi: Optional[float]     # upper - oracle on Bounds cells


def _worker_count() -> int:
    raw = os.environ.get("LAMLAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _scan_cell(cell: RegionCell, s: SlipSystem, n_dirs: int, tol: float) -> ScanRow:
    if cell.label.on_boundary or cell.label.tag == "OffManifold":
        return ScanRow(b=cell.b, c=cell.c, region=cell.label.tag, skipped=True,
                       closed=None, lower=None, upper=None, oracle=None,
                       discrepancy=None, slack_lo=None, slack_hi=None)
    from .algebra import bc_to_matrix
    f = bc_to_matrix(cell.b, cell.c)
    oracle = wlc_numeric(f, s, n_dirs=n_dirs, tol=tol).value.as_float()
    if isinstance(cell.energy, Known):
        closed = cell.energy.value.as_float()
        return ScanRow(b=cell.b, c=cell.c, region=cell.label.tag, skipped=False,
                       closed=closed, lower=None, upper=None, oracle=oracle,
                       discrepancy=abs(oracle - closed), slack_lo=None, slack_hi=None)
    bounds: Bounds = cell.energy
    return ScanRow(b=cell.b, c=cell.c, region=cell.label.tag, skipped=False,
                   closed=None, lower=bounds.lower, upper=bounds.upper, oracle=oracle,
                   discrepancy=None, slack_lo=oracle - bounds.lower,
                   slack_hi=bounds.upper - oracle)


def envelope_scan(s: SlipSystem, bc_range: float, n: int, n_dirs: int = 720,
                  tol: float = DEFAULT_TOL) -> list:
    """Certify the closed-form envelope against the oracle on a (b, c) grid.

    Returns ScanRow entries in the deterministic row-major grid order;
    boundary-band cells are emitted but marked skipped.
    """
    cells = region_map(s, bc_range, n, tol)
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda cc: _scan_cell(cc, s, n_dirs, tol), cells))
    else:
        rows = [_scan_cell(cc, s, n_dirs, tol) for cc in cells]
    return rows
