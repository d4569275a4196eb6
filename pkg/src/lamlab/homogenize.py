"""Periodic bilayer microstructure energy simulator.

Builds the layered rigid/soft gradient pattern at layer period epsilon with a
simple laminate grafted into the soft layers, evaluates its energy on a
uniform grid, and compares against the homogenized target
lam * |Omega| * sum_i (t_i - t_{i-1})/l * W_hom(N_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import Mat
from .energy import SlipSystem, w_condensed, w_hom_orthogonal, w_hom_general, Known
from .errors import PreconditionError
from .laminate import decompose

CELL_ENERGY_TOL = 1e-6


def shear_from_gamma(gamma: float, lam: float, rotation: Mat) -> Mat:
    """Soft-layer gradient N solving lam N + (1-lam) R = R(I + gamma e1 (x) e2)."""
    return rotation @ (np.eye(2) + (gamma / lam) * np.outer([1.0, 0.0], [0.0, 1.0]))


@dataclass(frozen=True)
class MicrostructureSpec:
    """Layered microstructure: bands of constant shear gamma_i over (0, l).

    gammas lists (gamma_i, t_i) with right band edges 0 < t_1 < ... < t_n = l.
    laminate_period is the laminate repeat h_lam as a fraction of eps*lam.
    """

    slip: SlipSystem
    rotation: Mat
    gammas: tuple
    epsilon: float
    laminate_period: float
    domain_side: float
    grid_n: int

    def __post_init__(self):
        l = self.domain_side
        if not 0.0 < self.epsilon <= l:
            raise PreconditionError("layer period must lie in (0, domain side]")
        if self.laminate_period <= 0.0:
            raise PreconditionError("laminate period fraction must be positive")
        edges = [t for _, t in self.gammas]
        if not edges or abs(edges[-1] - l) > 1e-12 * max(1.0, l):
            raise PreconditionError("band edges must end at the domain side")
        if any(b <= a for a, b in zip([0.0] + edges[:-1], edges)):
            raise PreconditionError("band edges must be strictly increasing")
        lam = self.slip.lam
        finest = min(self.epsilon * lam, self.laminate_period * self.epsilon * lam)
        if self.grid_n < 4.0 * l / finest:
            raise PreconditionError(
                f"grid_n={self.grid_n} resolves the finest feature with fewer than 4 cells")

    @property
    def band_gradients(self):
        return [shear_from_gamma(g, self.slip.lam, self.rotation) for g, _ in self.gammas]


@dataclass(frozen=True)
class GradientField:
    """Cell-centered piecewise-constant gradient pattern."""

    labels: np.ndarray        # (grid_n, grid_n) indices into values
    values: list              # label 0 is the rigid gradient R
    spec: MicrostructureSpec


def build_gradient_field(spec: MicrostructureSpec) -> GradientField:
    """Rasterize the layered pattern with grafted laminates onto the grid."""
    gn, l, eps = spec.grid_n, spec.domain_side, spec.epsilon
    lam = spec.slip.lam
    xs = (np.arange(gn) + 0.5) * (l / gn)
    x1 = xs[None, :]
    x2 = xs[:, None]
    frac2 = np.mod(x2 / eps, 1.0)
    soft = frac2 < lam
    labels = np.zeros((gn, gn), dtype=np.int16)
    values = [spec.rotation.copy()]
    h_abs = spec.laminate_period * eps * lam
    strip_bottom = np.floor(x2 / eps) * eps

    left = 0.0
    for band_index, (gamma, right) in enumerate(spec.gammas):
        n_mat = shear_from_gamma(gamma, lam, spec.rotation)
        dec = decompose(n_mat, spec.slip)
        values.append(dec.f_plus)
        values.append(dec.f_minus)
        lab_plus = 1 + 2 * band_index
        # snap the band to whole layer periods; snapped-out strips stay rigid
        x_lo = math.ceil(left / eps - 1e-9) * eps
        x_hi = math.floor(right / eps + 1e-9) * eps
        left = right
        if x_hi <= x_lo:
            continue
        in_band = soft & (x1 >= x_lo) & (x1 < x_hi)
        normal = np.asarray(dec.direction[1], dtype=float)
        n_hat = normal / np.linalg.norm(normal)
        u = (x1 - x_lo) * n_hat[0] + (x2 - strip_bottom) * n_hat[1]
        plus = np.mod(u / h_abs, 1.0) < dec.mu
        labels = np.where(in_band & plus, lab_plus, labels)
        labels = np.where(in_band & ~plus, lab_plus + 1, labels)
    return GradientField(labels=labels, values=values, spec=spec)


@dataclass(frozen=True)
class EnergyReport:
    epsilon: float
    e_eps: float
    target: float
    rel_error: float
    avg_gradient: Mat
    avg_gradient_target: Mat
    flagged_area: float


def _whom_value(n_mat: Mat, s: SlipSystem) -> float:
    if s.is_orthogonal:
        return w_hom_orthogonal(n_mat, s).as_float()
    result = w_hom_general(n_mat, s)
    if not isinstance(result, Known):
        raise PreconditionError("band gradient lies where the relaxed energy is unknown")
    return result.value.as_float()


def energy_of_field(field: GradientField, spec: MicrostructureSpec) -> EnergyReport:
    """Grid energy of the pattern against the homogenized band-weighted target."""
    gn, l = spec.grid_n, spec.domain_side
    cell_area = (l / gn) ** 2
    counts = np.bincount(field.labels.ravel(), minlength=len(field.values))
    e_eps = 0.0
    for label, value in enumerate(field.values):
        if counts[label] == 0:
            continue
        w = w_condensed(value, spec.slip, tol=CELL_ENERGY_TOL)
        if not w.is_finite:
            raise PreconditionError("pattern cell gradient falls off the slip manifolds")
        e_eps += counts[label] * w.value * cell_area

    # interface cells: any 4-neighbour with a different label
    lab = field.labels
    flagged = np.zeros_like(lab, dtype=bool)
    flagged[1:, :] |= lab[1:, :] != lab[:-1, :]
    flagged[:-1, :] |= lab[:-1, :] != lab[1:, :]
    flagged[:, 1:] |= lab[:, 1:] != lab[:, :-1]
    flagged[:, :-1] |= lab[:, :-1] != lab[:, 1:]
    flagged_area = float(np.count_nonzero(flagged)) * cell_area

    area = l * l
    lam = spec.slip.lam
    target = 0.0
    n_bar = np.zeros((2, 2))
    left = 0.0
    for n_mat, (_, right) in zip(spec.band_gradients, spec.gammas):
        frac = (right - left) / l
        left = right
        target += lam * area * frac * _whom_value(n_mat, spec.slip)
        n_bar = n_bar + frac * n_mat
    rel_error = abs(e_eps - target) / max(target, 1e-12)

    avg = np.zeros((2, 2))
    for label, value in enumerate(field.values):
        avg = avg + (counts[label] / lab.size) * value
    avg_target = lam * n_bar + (1.0 - lam) * spec.rotation
    return EnergyReport(epsilon=spec.epsilon, e_eps=e_eps, target=target,
                        rel_error=rel_error, avg_gradient=avg,
                        avg_gradient_target=avg_target, flagged_area=flagged_area)


def run_sweep(slip: SlipSystem, rotation: Mat, gammas, eps_list, laminate_period: float,
              domain_side: float = 1.0, cells_per_feature: int = 8, grid_cap: int = 4096):
    """Energy reports over a layer-period sweep at fixed feature resolution."""
    reports = []
    for eps in eps_list:
        lam = slip.lam
        finest = min(eps * lam, laminate_period * eps * lam)
        gn = min(int(math.ceil(cells_per_feature * domain_side / finest)), grid_cap)
        spec = MicrostructureSpec(slip=slip, rotation=rotation, gammas=tuple(gammas),
                                  epsilon=eps, laminate_period=laminate_period,
                                  domain_side=domain_side, grid_n=gn)
        reports.append(energy_of_field(build_gradient_field(spec), spec))
    return reports


def averaging_check(g, g_mean: float, eps_list, grid_n: int):
    """Deviation of grid means of g(x/eps) over (0,1)^2 from the cell mean of g.

    g must be 1-periodic in both arguments and accept numpy arrays.
    """
    xs = (np.arange(grid_n) + 0.5) / grid_n
    x1, x2 = np.meshgrid(xs, xs)
    rows = []
    for eps in eps_list:
        vals = g(np.mod(x1 / eps, 1.0), np.mod(x2 / eps, 1.0))
        rows.append((eps, abs(float(np.mean(vals)) - g_mean)))
    return rows
