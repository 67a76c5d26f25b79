"""Fourier machinery on the periodic grid.

Normalization: the forward transform is unscaled and the inverse carries
1/(N_x N_y N_z). Transforms are real-to-complex, so coefficient arrays have
shape ``(N_x, N_y, N_z // 2 + 1)``; eigenvalues are still defined by the
full-index mirror rule and simply sliced to that half.
"""
from __future__ import annotations

import os

import numba
import numpy as np
import scipy.fft

from .grid import Grid


def fft_workers() -> int:
    raw = os.environ.get("PFVISM_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def axis_wavenumbers(L: float, n: int) -> np.ndarray:
    """lambda(i) = pi i / L for i <= n/2 and pi (n - i) / L above."""
    i = np.arange(n)
    return np.where(i <= n // 2, np.pi * i / L, np.pi * (n - i) / L)


def laplacian_spectrum(grid: Grid) -> np.ndarray:
    """Eigenvalues of the Laplacian on the full (N_x, N_y, N_z) index set."""
    kx, ky, kz = (axis_wavenumbers(L, n) for L, n in zip(grid.L, grid.N))
    return -(kx[:, None, None] ** 2 + ky[None, :, None] ** 2 + kz[None, None, :] ** 2)


def linear_spectrum(grid: Grid, p, epsilon: float, kappa: float, mu: float, nu: float) -> np.ndarray:
    """Stabilized linear symbol l = gamma (epsilon lambda - kappa/epsilon) - mu nu (full index set)."""
    if not p.gamma0 > 0:
        raise ValueError("surface tension must be positive")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if kappa < 0 or mu < 0 or nu < 0:
        raise ValueError("kappa, mu and nu must be non-negative")
    lam = laplacian_spectrum(grid)
    l = p.gamma0 * (epsilon * lam - kappa / epsilon) - mu * nu
    if np.any(l >= 0):
        raise ValueError("linear spectrum must be strictly negative")
    return l


def rfft_weights(n_last: int, half: int) -> np.ndarray:
    """Multiplicity of each stored rfft column in the full Hermitian spectrum."""
    w = np.full(half, 2.0)
    w[0] = 1.0
    if n_last % 2 == 0:
        w[-1] = 1.0
    return w


@numba.njit(cache=True)
def _weighted_power(c, weight, w_last):
    """sum_k w_k |c_k|^2 weight_k over the half spectrum."""
    nx, ny, nh = c.shape
    acc = 0.0
    for i in range(nx):
        for j in range(ny):
            for k in range(nh):
                z = c[i, j, k]
                acc += w_last[k] * weight[i, j, k] * (z.real * z.real + z.imag * z.imag)
    return acc


class SpectralWorkspace:
    """Transform plans plus the eigenvalue arrays for one grid.

    Not thread-safe in spirit: one workspace per worker.
    """

    def __init__(self, grid: Grid, workers: int | None = None):
        self.grid = grid
        self.workers = workers or fft_workers()
        nz = grid.N[2]
        self.half = nz // 2 + 1
        self.lam = np.ascontiguousarray(laplacian_spectrum(grid)[:, :, : self.half])
        self._w = rfft_weights(nz, self.half)
        self._neg_lam = np.ascontiguousarray(-self.lam)

    @property
    def coeff_shape(self) -> tuple[int, int, int]:
        return (self.grid.N[0], self.grid.N[1], self.half)

    def forward(self, field: np.ndarray) -> np.ndarray:
        self.grid.check(field)
        return scipy.fft.rfftn(field, workers=self.workers)

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        if coeffs.shape != self.coeff_shape:
            raise ValueError(f"coefficients have shape {coeffs.shape}, expected {self.coeff_shape}")
        return scipy.fft.irfftn(coeffs, s=self.grid.shape, workers=self.workers)

    def laplacian(self, field: np.ndarray) -> np.ndarray:
        return self.inverse(self.lam * self.forward(field))

    def spectral_sum(self, a_hat: np.ndarray, b_hat: np.ndarray | None = None) -> float:
        """sum over the full spectrum of a_hat * conj(b_hat), divided by N (Parseval)."""
        b_hat = a_hat if b_hat is None else b_hat
        prod = (a_hat * b_hat.conj()).real
        return float(np.sum(prod * self._w) / self.grid.size)

    def norm2(self, field_hat: np.ndarray) -> float:
        """h^3 sum |field|^2 evaluated from the coefficients."""
        return self.grid.cell_volume * self.spectral_sum(field_hat)

    def gradient_sq_integral(self, field_hat: np.ndarray) -> float:
        """Integral of |grad field|^2 by spectral differentiation and the rectangle rule."""
        if field_hat.shape != self.coeff_shape:
            raise ValueError(f"coefficients have shape {field_hat.shape}, expected {self.coeff_shape}")
        s = _weighted_power(np.ascontiguousarray(field_hat), self._neg_lam, self._w)
        return self.grid.cell_volume * s / self.grid.size
