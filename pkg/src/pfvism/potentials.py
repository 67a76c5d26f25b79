"""Truncated solute-solvent potentials and their grid samples.

Potentials are open-boundary (no periodic images) even though the phase
field lives on a periodic grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .params import PhysicalParams, cfa_prefactor
from .solute import SoluteConfig


def lj_pair(r, eps_i: float, sigma_i: float):
    """4 eps [(sigma/r)^12 - (sigma/r)^6]; r must be positive."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("lj_pair needs r > 0")
    s6 = (sigma_i / r) ** 6
    out = 4.0 * eps_i * (s6 * s6 - s6)
    return out if out.ndim else float(out)


def lj_truncated(r, eps_i: float, sigma_i: float, r_cut: float):
    """LJ for r >= r_cut, constant plateau lj_pair(r_cut) below it."""
    r = np.asarray(r, dtype=float)
    out = lj_pair(np.maximum(r, r_cut), eps_i, sigma_i)
    return out


def _as_points(x) -> tuple[np.ndarray, tuple]:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise ValueError("points must have a trailing axis of length 3")
    return x.reshape(-1, 3), x.shape[:-1]


def u_vdw_total(x, solute: SoluteConfig, r_cut: float):
    """Sum of truncated LJ potentials of all atoms at point(s) x [kBT]."""
    pts, shape = _as_points(x)
    out = np.zeros(len(pts))
    for a in solute.atoms:
        r = np.sqrt(((pts - a.position) ** 2).sum(-1))
        out += lj_truncated(r, a.eps_i, a.sigma_i, r_cut)
    out = out.reshape(shape)
    return out if out.ndim else float(out)


def coulomb_field(x, solute: SoluteConfig, r_cut: float | None):
    """sum_i Q_i V(|x - x_i|) (x - x_i)/|x - x_i|, V(r) = 1/r^2 (plateau 1/r_cut^2 inside r_cut).

    With ``r_cut=None`` the field is untruncated. An atom sitting exactly on
    the evaluation point contributes the zero vector.
    """
    pts, shape = _as_points(x)
    E = np.zeros_like(pts)
    for a in solute.atoms:
        if a.charge == 0.0:
            continue
        dx = pts - a.position
        r = np.sqrt((dx**2).sum(-1))
        with np.errstate(divide="ignore", invalid="ignore"):
            if r_cut is None:
                mag = 1.0 / r**3
            else:
                mag = np.where(r >= r_cut, 1.0 / r**3, 1.0 / (r_cut**2 * r))
        mag = np.where(r > 0, mag, 0.0)
        E += a.charge * mag[:, None] * dx
    return E.reshape(shape + (3,))


def u_ele_cfa(x, solute: SoluteConfig, r_cut: float | None, p: PhysicalParams):
    """CFA electrostatic energy density tau0 |E|^2 [kBT/A^3]."""
    E = coulomb_field(x, solute, r_cut)
    out = cfa_prefactor(p) * (E**2).sum(-1)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PotentialField:
    grid: Grid
    u_vdw: np.ndarray
    u_ele: np.ndarray
    nu: float
    rho_w: float

    @property
    def combined(self) -> np.ndarray:
        """rho_w U_vdW + U_ele, the factor multiplying f'(phi) in the flow."""
        return self.rho_w * self.u_vdw + self.u_ele


def sample_on_grid(solute: SoluteConfig, grid: Grid, p: PhysicalParams,
                   nu_safety: float = 1.0) -> PotentialField:
    """Evaluate both truncated potentials at every node; nu is the grid max of |rho_w U_vdW + U_ele|."""
    X, Y, Z = grid.axes()
    u_vdw = np.zeros(grid.shape)
    u_ele = np.zeros(grid.shape)
    # slab over x keeps the temporary per-atom arrays small on large grids
    yz = np.stack(np.meshgrid(Y, Z, indexing="ij"), axis=-1)
    for i, x in enumerate(X):
        pts = np.concatenate([np.full(yz.shape[:-1] + (1,), x), yz], axis=-1)
        if len(solute):
            u_vdw[i] = u_vdw_total(pts, solute, p.r_cut)
            u_ele[i] = u_ele_cfa(pts, solute, p.r_cut, p)
    u_vdw.setflags(write=False)
    u_ele.setflags(write=False)
    nu = float(np.max(np.abs(p.rho_w * u_vdw + u_ele))) * nu_safety if len(solute) else 0.0
    return PotentialField(grid, u_vdw, u_ele, nu, p.rho_w)
