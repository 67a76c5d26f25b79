"""Stabilized linear splitting and ETD Runge-Kutta integrators.

The flow is written as d(phi)/dt = L(phi) + N(phi) with

    L(phi) = gamma (epsilon Lap(phi) - kappa phi / epsilon) - mu nu phi
    N(phi) = -gamma/epsilon (W'(phi) - kappa phi) - f'(phi)(rho_w U_vdW + U_ele) + mu nu phi

L is diagonal in Fourier space with symbol l < 0; the step functions act on
Fourier coefficients and take the nonlinearity as a callable mapping
coefficients to the coefficients of N, so they work equally on a scalar
test ODE.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np

from .energy import dcoupling, dW
from .potentials import PotentialField
from .spectral import SpectralWorkspace, linear_spectrum

KAPPA_MIN = 18.0  # half of max W'' on [0, 1]
MU_MIN = 4.0  # half of max f_new'' on [0, 1]


@dataclass(frozen=True)
class SplitOperators:
    pot: PotentialField
    p: object
    epsilon: float
    variant: str = "new"
    kappa: float = KAPPA_MIN
    mu: float = MU_MIN
    nu: float | None = None  # None -> pot.nu

    def __post_init__(self):
        if self.kappa < KAPPA_MIN:
            raise ValueError(f"kappa must be >= {KAPPA_MIN}")
        if self.mu < MU_MIN:
            raise ValueError(f"mu must be >= {MU_MIN}")
        if self.nu is None:
            object.__setattr__(self, "nu", self.pot.nu)
        if self.nu < 0:
            raise ValueError("nu must be non-negative")
        # U combined once; the potentials never change during a run
        object.__setattr__(self, "_U", self.pot.combined)

    @property
    def grid(self):
        return self.pot.grid

    @property
    def U(self) -> np.ndarray:
        return self._U

    def symbol(self, ws: SpectralWorkspace) -> np.ndarray:
        """Linear symbol l on the workspace's half-spectrum layout."""
        l = linear_spectrum(self.grid, self.p, self.epsilon, self.kappa, self.mu, self.nu)
        return np.ascontiguousarray(l[:, :, : ws.half])


def nonlinear_reference(phi: np.ndarray, ops: SplitOperators) -> np.ndarray:
    """Plain-numpy N(phi); the fused kernel below must agree with it."""
    g_e = ops.p.gamma0 / ops.epsilon
    return (-g_e * (dW(phi) - ops.kappa * phi)
            - dcoupling(phi, ops.variant) * ops.U
            + ops.mu * ops.nu * phi)


@numba.njit(cache=True)
def _nonlinear_kernel(phi, U, g_e, kappa, mu_nu, new_coupling, out):
    src = phi.ravel()
    u = U.ravel()
    dst = out.ravel()
    for i in range(src.shape[0]):
        v = src[i]
        dw = 36.0 * (v * v - v) * (2.0 * v - 1.0)
        if new_coupling:
            fp = 4.0 * v * (v * v - 1.0)
        else:
            fp = 2.0 * (v - 1.0)
        dst[i] = -g_e * (dw - kappa * v) - fp * u[i] + mu_nu * v


def nonlinear_term(phi: np.ndarray, ops: SplitOperators) -> np.ndarray:
    ops.grid.check(phi, "phi")
    phi = np.ascontiguousarray(phi, dtype=float)
    out = np.empty_like(phi)
    _nonlinear_kernel(phi, ops.U, ops.p.gamma0 / ops.epsilon, ops.kappa, ops.mu * ops.nu,
                      ops.variant in ("new", "f_new"), out)
    return out


def linear_term(phi: np.ndarray, ops: SplitOperators, ws: SpectralWorkspace) -> np.ndarray:
    return ws.inverse(ops.symbol(ws) * ws.forward(phi))


# ---------------------------------------------------------------------------
# phi-function coefficients

_TAYLOR_RADIUS = 1.0
_TAYLOR_TERMS = 30


def _series_coeffs(offset_weights: dict[int, float]) -> np.ndarray:
    """Coefficients c_n = sum_k w_k / (n + k)! for n < _TAYLOR_TERMS."""
    c = np.zeros(_TAYLOR_TERMS)
    for n in range(_TAYLOR_TERMS):
        c[n] = sum(w / math.factorial(n + k) for k, w in offset_weights.items())
    return c


# g(z) = sum c_n z^n for each combination used by the schemes
_SERIES = {
    "phi1": _series_coeffs({1: 1.0}),
    "phi2": _series_coeffs({2: 1.0}),
    "f1": _series_coeffs({1: 1.0, 2: -3.0, 3: 4.0}),
    "f2": _series_coeffs({2: 1.0, 3: -2.0}),
    "f3": _series_coeffs({2: -1.0, 3: 4.0}),
}


def _direct(name: str, z: np.ndarray) -> np.ndarray:
    ez = np.exp(z)
    if name == "phi1":
        return np.expm1(z) / z
    if name == "phi2":
        return (np.expm1(z) - z) / z**2
    if name == "f1":
        return (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z**3
    if name == "f2":
        return (2.0 + z + ez * (z - 2.0)) / z**3
    if name == "f3":
        return (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z**3
    raise KeyError(name)


def phi_function(name: str, z) -> np.ndarray:
    """Evaluate a phi-type function with a Taylor series for |z| < 1.

    Names: phi1 = (e^z-1)/z, phi2 = (e^z-1-z)/z^2, and the three ETD4RK
    bracket functions f1, f2, f3 (each divided by z^3).
    """
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < _TAYLOR_RADIUS
    if np.any(small):
        zs = z[small]
        acc = np.zeros_like(zs)
        for c in _SERIES[name][::-1]:
            acc = acc * zs + c
        out[small] = acc
    if np.any(~small):
        with np.errstate(over="ignore"):
            out[~small] = _direct(name, z[~small])
    return out


@dataclass(frozen=True)
class EtdCoefficients:
    dt: float
    E: np.ndarray  # e^{l dt}
    E2: np.ndarray  # e^{l dt / 2}
    Q1: np.ndarray  # l^-1 (e^{l dt} - 1)
    Q1h: np.ndarray  # l^-1 (e^{l dt/2} - 1)
    Q2: np.ndarray  # dt^-1 l^-2 (e^{l dt} - 1 - l dt)
    F1: np.ndarray  # ETD4RK weights of N(phi^n), N(A)+N(B) (already doubled), N(C)
    F2: np.ndarray
    F3: np.ndarray


def build_coefficients(l: np.ndarray, dt: float) -> EtdCoefficients:
    if not dt > 0:
        raise ValueError("time step must be positive")
    l = np.asarray(l, dtype=float)
    if np.any(l >= 0):
        raise ValueError("linear symbol must be strictly negative")
    z = l * dt
    return EtdCoefficients(
        dt=dt,
        E=np.exp(z),
        E2=np.exp(0.5 * z),
        Q1=dt * phi_function("phi1", z),
        Q1h=0.5 * dt * phi_function("phi1", 0.5 * z),
        Q2=dt * phi_function("phi2", z),
        F1=dt * phi_function("f1", z),
        F2=2.0 * dt * phi_function("f2", z),
        F3=dt * phi_function("f3", z),
    )


NonlinearHat = Callable[[np.ndarray], np.ndarray]


def etd1rk_step(phi_hat, coeffs: EtdCoefficients, nonlinear_hat: NonlinearHat, n0=None):
    n0 = nonlinear_hat(phi_hat) if n0 is None else n0
    return coeffs.E * phi_hat + coeffs.Q1 * n0


def etd2rk_step(phi_hat, coeffs: EtdCoefficients, nonlinear_hat: NonlinearHat, n0=None):
    n0 = nonlinear_hat(phi_hat) if n0 is None else n0
    a = coeffs.E * phi_hat + coeffs.Q1 * n0
    return a + coeffs.Q2 * (nonlinear_hat(a) - n0)


def etd4rk_step(phi_hat, coeffs: EtdCoefficients, nonlinear_hat: NonlinearHat, n0=None):
    """Cox-Matthews fourth-order stages A, B, C."""
    n0 = nonlinear_hat(phi_hat) if n0 is None else n0
    e2u = coeffs.E2 * phi_hat
    a = e2u + coeffs.Q1h * n0
    na = nonlinear_hat(a)
    b = e2u + coeffs.Q1h * na
    nb = nonlinear_hat(b)
    c = coeffs.E2 * a + coeffs.Q1h * (2.0 * nb - n0)
    nc = nonlinear_hat(c)
    return coeffs.E * phi_hat + coeffs.F1 * n0 + coeffs.F2 * (na + nb) + coeffs.F3 * nc


STEPS = {"ETD1RK": etd1rk_step, "ETD2RK": etd2rk_step, "ETD4RK": etd4rk_step}


class EtdIntegrator:
    """Binds split operators, a workspace and a step size to one scheme."""

    def __init__(self, ops: SplitOperators, ws: SpectralWorkspace, dt: float, scheme: str = "ETD4RK"):
        if scheme not in STEPS:
            raise ValueError(f"unknown scheme {scheme!r}")
        self.ops = ops
        self.ws = ws
        self.scheme = scheme
        self._step = STEPS[scheme]
        self.l = ops.symbol(ws)
        self.coeffs = build_coefficients(self.l, dt)

    @property
    def dt(self) -> float:
        return self.coeffs.dt

    def nonlinear_hat(self, u_hat: np.ndarray) -> np.ndarray:
        return self.ws.forward(nonlinear_term(self.ws.inverse(u_hat), self.ops))

    def step(self, phi_hat: np.ndarray, phi: np.ndarray | None = None) -> np.ndarray:
        """Advance one step; pass the real-space field if already known to save a transform."""
        n0 = None if phi is None else self.ws.forward(nonlinear_term(phi, self.ops))
        return self._step(phi_hat, self.coeffs, self.nonlinear_hat, n0)
