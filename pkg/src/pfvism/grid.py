"""Uniform periodic grid over [-L_x, L_x) x [-L_y, L_y) x [-L_z, L_z).

Scalar fields on the grid are plain ``float64`` arrays of shape
``(N_x, N_y, N_z)`` indexed ``[i, j, k]`` for ``x_ijk = (-L_x + i h_x, ...)``.
Serialized fields use x-fastest ordering (``order="F"``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    L: tuple[float, float, float]
    N: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "L", tuple(float(v) for v in self.L))
        object.__setattr__(self, "N", tuple(int(v) for v in self.N))
        if len(self.L) != 3 or len(self.N) != 3:
            raise ValueError("grid needs three half-lengths and three sizes")
        if any(n % 2 or n < 2 for n in self.N):
            raise ValueError(f"grid sizes must be even, got {self.N}")
        if any(v <= 0 for v in self.L):
            raise ValueError("half-lengths must be positive")

    @classmethod
    def cube(cls, L: float, N: int) -> "Grid":
        return cls((L, L, L), (N, N, N))

    @classmethod
    def from_config(cls, config) -> "Grid":
        return cls(config.L, config.N)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.N

    @property
    def size(self) -> int:
        return self.N[0] * self.N[1] * self.N[2]

    @property
    def h(self) -> tuple[float, float, float]:
        return tuple(2.0 * L / n for L, n in zip(self.L, self.N))

    @property
    def cell_volume(self) -> float:
        hx, hy, hz = self.h
        return hx * hy * hz

    @property
    def volume(self) -> float:
        return 8.0 * self.L[0] * self.L[1] * self.L[2]

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(-L + h * np.arange(n) for L, h, n in zip(self.L, self.h, self.N))

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def check(self, arr: np.ndarray, what: str = "field") -> None:
        if arr.shape != self.shape:
            raise ValueError(f"{what} has shape {arr.shape}, grid expects {self.shape}")
