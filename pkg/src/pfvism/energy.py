"""Free-energy functional, its pointwise ingredients and its variational derivative."""
from __future__ import annotations

from dataclasses import astuple, dataclass

import numba
import numpy as np

from .potentials import PotentialField
from .spectral import SpectralWorkspace


def double_well(phi):
    """W(phi) = 18 (phi^2 - phi)^2."""
    return 18.0 * (phi * phi - phi) ** 2


def dW(phi):
    return 36.0 * (phi * phi - phi) * (2.0 * phi - 1.0)


def _variant(variant: str) -> str:
    v = variant[2:] if variant.startswith("f_") else variant
    if v not in ("new", "old"):
        raise ValueError(f"coupling variant must be 'new' or 'old', got {variant!r}")
    return v


def coupling(phi, variant: str = "new"):
    """Solvent-selecting weight: (phi^2 - 1)^2 for 'new', (phi - 1)^2 for 'old'."""
    if _variant(variant) == "new":
        return (phi * phi - 1.0) ** 2
    return (phi - 1.0) ** 2


def dcoupling(phi, variant: str = "new"):
    if _variant(variant) == "new":
        return 4.0 * phi * (phi * phi - 1.0)
    return 2.0 * (phi - 1.0)


@dataclass(frozen=True)
class EnergyBreakdown:
    f_surf: float
    f_vdw: float
    f_ele: float

    @property
    def f_tot(self) -> float:
        return self.f_surf + self.f_vdw + self.f_ele

    def as_tuple(self) -> tuple[float, float, float, float]:
        return astuple(self) + (self.f_tot,)

    def __add__(self, other: "EnergyBreakdown") -> "EnergyBreakdown":
        return EnergyBreakdown(self.f_surf + other.f_surf, self.f_vdw + other.f_vdw, self.f_ele + other.f_ele)

    def __sub__(self, other: "EnergyBreakdown") -> "EnergyBreakdown":
        return EnergyBreakdown(self.f_surf - other.f_surf, self.f_vdw - other.f_vdw, self.f_ele - other.f_ele)

    def scaled(self, c: float) -> "EnergyBreakdown":
        return EnergyBreakdown(c * self.f_surf, c * self.f_vdw, c * self.f_ele)


def _workspace(pot: PotentialField, ws: SpectralWorkspace | None) -> SpectralWorkspace:
    if ws is None:
        return SpectralWorkspace(pot.grid)
    if ws.grid != pot.grid:
        raise ValueError("workspace and potentials live on different grids")
    return ws


@numba.njit(cache=True)
def _pointwise_sums(phi, u_vdw, u_ele, new_coupling):
    """One pass over the grid: sums of W(phi), f(phi) U_vdW and f(phi) U_ele."""
    sw = 0.0
    sv = 0.0
    se = 0.0
    flat = phi.ravel()
    uv = u_vdw.ravel()
    ue = u_ele.ravel()
    for i in range(flat.shape[0]):
        v = flat[i]
        a = v * v - v
        sw += a * a
        if new_coupling:
            b = v * v - 1.0
            f = b * b
        else:
            f = (v - 1.0) * (v - 1.0)
        sv += f * uv[i]
        se += f * ue[i]
    return 18.0 * sw, sv, se


def energy_from_fields(phi: np.ndarray, phi_hat: np.ndarray, pot: PotentialField, gamma0: float,
                       epsilon: float, variant: str, ws: SpectralWorkspace) -> EnergyBreakdown:
    """Energy when both phi and its transform are already at hand."""
    dv = pot.grid.cell_volume
    grad2 = ws.gradient_sq_integral(phi_hat)
    new = _variant(variant) == "new"
    sw, sv, se = _pointwise_sums(np.ascontiguousarray(phi, dtype=float), pot.u_vdw, pot.u_ele, new)
    f_surf = gamma0 * (0.5 * epsilon * grad2 + dv * sw / epsilon)
    return EnergyBreakdown(f_surf, pot.rho_w * dv * sv, dv * se)


def total_energy(phi: np.ndarray, pot: PotentialField, p, epsilon: float, variant: str = "new",
                 ws: SpectralWorkspace | None = None) -> EnergyBreakdown:
    """Rectangle-rule quadrature of the phase-field free energy; grad phi is spectral."""
    pot.grid.check(phi, "phi")
    ws = _workspace(pot, ws)
    return energy_from_fields(phi, ws.forward(phi), pot, p.gamma0, epsilon, variant, ws)


def variational_derivative(phi: np.ndarray, pot: PotentialField, p, epsilon: float,
                           variant: str = "new", ws: SpectralWorkspace | None = None) -> np.ndarray:
    """Right-hand side of the gradient flow, i.e. -dF/dphi.

    gamma [epsilon Lap(phi) - W'(phi)/epsilon] - f'(phi) (rho_w U_vdW + U_ele)
    """
    pot.grid.check(phi, "phi")
    ws = _workspace(pot, ws)
    lap = ws.laplacian(phi)
    return p.gamma0 * (epsilon * lap - dW(phi) / epsilon) - dcoupling(phi, variant) * pot.combined
