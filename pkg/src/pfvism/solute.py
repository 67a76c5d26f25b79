"""Solute atom collections and geometry generators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import PhysicalParams, SoluteAtom, SoluteSpec


@dataclass(frozen=True)
class SoluteConfig:
    atoms: tuple[SoluteAtom, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        pos = self.positions
        if len(pos) > 1:
            diff = pos[:, None, :] - pos[None, :, :]
            dist = np.sqrt((diff**2).sum(-1))
            np.fill_diagonal(dist, np.inf)
            if np.min(dist) == 0.0:
                raise ValueError("solute atom positions must be pairwise distinct")

    def __len__(self) -> int:
        return len(self.atoms)

    def __add__(self, other: "SoluteConfig") -> "SoluteConfig":
        return SoluteConfig(self.atoms + other.atoms)

    @property
    def positions(self) -> np.ndarray:
        if not self.atoms:
            return np.zeros((0, 3))
        return np.array([a.position for a in self.atoms], dtype=float)

    @property
    def charges(self) -> np.ndarray:
        return np.array([a.charge for a in self.atoms], dtype=float)

    @property
    def eps(self) -> np.ndarray:
        return np.array([a.eps_i for a in self.atoms], dtype=float)

    @property
    def sigma(self) -> np.ndarray:
        return np.array([a.sigma_i for a in self.atoms], dtype=float)

    @property
    def total_charge(self) -> float:
        return float(self.charges.sum()) if self.atoms else 0.0

    def translated(self, shift) -> "SoluteConfig":
        s = np.asarray(shift, dtype=float)
        return SoluteConfig(
            tuple(
                SoluteAtom(tuple(np.asarray(a.position) + s), a.charge, a.eps_i, a.sigma_i)
                for a in self.atoms
            )
        )


def single_ion(charge: float, p: PhysicalParams | None = None, center=(0.0, 0.0, 0.0)) -> SoluteConfig:
    p = p or PhysicalParams()
    return SoluteConfig((SoluteAtom(tuple(center), charge, p.eps_lj, p.sigma_lj),))


def make_plate(n_p: int, d0: float, y: float, q: float, p: PhysicalParams | None = None) -> SoluteConfig:
    """One n_p x n_p square lattice in the plane y = const, centred on the x-z origin."""
    p = p or PhysicalParams()
    if n_p < 1:
        raise ValueError("n_p must be >= 1")
    c = (np.arange(n_p) - 0.5 * (n_p - 1)) * d0
    return SoluteConfig(
        tuple(SoluteAtom((x, y, z), q, p.eps_lj, p.sigma_lj) for x in c for z in c)
    )


def make_plates(n_p: int, d0: float, d: float, q1: float, q2: float,
                p: PhysicalParams | None = None) -> SoluteConfig:
    """Two parallel plates normal to y with centres at y = -d/2 (plate I) and y = +d/2 (plate II)."""
    if not d > 0:
        raise ValueError("plate separation must be positive")
    return make_plate(n_p, d0, -0.5 * d, q1, p) + make_plate(n_p, d0, 0.5 * d, q2, p)


def split_plates(solute: SoluteConfig) -> tuple[SoluteConfig, SoluteConfig]:
    """Split a make_plates result back into (plate I, plate II)."""
    n = len(solute) // 2
    return SoluteConfig(solute.atoms[:n]), SoluteConfig(solute.atoms[n:])


def build_solute(spec: SoluteSpec, p: PhysicalParams | None = None) -> SoluteConfig:
    p = p or PhysicalParams()
    if spec.kind == "none":
        return SoluteConfig()
    if spec.kind == "ion":
        return single_ion(spec.charge, p)
    if spec.kind == "plates":
        return make_plates(spec.n_p, spec.d0, spec.d, spec.q1, spec.q2, p)
    if spec.kind == "atoms":
        return SoluteConfig(
            tuple(SoluteAtom((x, y, z), q, p.eps_lj, p.sigma_lj) for x, y, z, q in spec.atoms)
        )
    raise ValueError(f"unknown solute kind {spec.kind!r}")
