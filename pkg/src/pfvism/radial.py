"""Radially symmetric one-ion problem and its sharp-interface counterpart.

The phase field lives on nodes r_m = m dr, m = 0..M, with phi(R_max) = 0.
The radial Laplacian is the conservative finite-volume form
(r^2 phi')' / r^2, which at r = 0 reduces to 3 phi''(0) = 6 (phi_1 - phi_0) / dr^2.
Energies integrate over [0, inf): the solvent beyond R_max (phi = 0,
f = 1) contributes closed-form tails.

The one-ion functional uses the bare LJ and 1/r^4 potentials. Both are
capped inside a 1 A core only to keep floating point finite; the LJ wall
holds phi = 1 there to round-off, so the cap does not enter the energy.
Truncation at r_cut (as in 3D) is available but removes the Q = 2
bubble: below r_cut the LJ plateau no longer outweighs the electrostatic
gain of wetting the core.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .energy import EnergyBreakdown, coupling, dcoupling, double_well, dW
from .params import PhysicalParams, cfa_prefactor
from .potentials import lj_pair, lj_truncated


@dataclass(frozen=True)
class RadialField:
    values: np.ndarray
    dr: float

    @property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(len(self.values))

    @property
    def r_max(self) -> float:
        return self.dr * (len(self.values) - 1)


@dataclass(frozen=True)
class RadialConfig:
    r_max: float = 5.0
    dr: float = 1e-3
    dt: float | None = None  # None -> explicit-stability estimate
    max_steps: int = 5_000_000
    tol: float = 1e-10
    check_every: int = 500
    coupling: str = "new"
    initial_radius: float | None = None  # None -> sharp-interface minimizer
    truncated: bool = False  # True -> r_cut plateaus as in 3D


PAPER_RADIAL = RadialConfig(dr=5e-4, dt=1e-6)


# ---------------------------------------------------------------------------
# potentials on the radial mesh

CORE_RADIUS = 1.0


def radial_potentials(r: np.ndarray, Q: float, p: PhysicalParams,
                      truncated: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """U_vdW(r) and U_ele(r) = tau0 Q^2 / r^4, held constant below r_c.

    r_c is r_cut for the truncated model and the numerical core radius otherwise.
    """
    rc = p.r_cut if truncated else CORE_RADIUS
    u_vdw = lj_truncated(r, p.eps_lj, p.sigma_lj, rc)
    u_ele = cfa_prefactor(p) * Q**2 / np.maximum(r, rc) ** 4
    return u_vdw, u_ele


def _tails(r_max: float, Q: float, p: PhysicalParams) -> tuple[float, float]:
    """vdW and electrostatic energy of pure solvent beyond r_max (r_max >= r_cut)."""
    s = p.sigma_lj
    vdw = 16.0 * math.pi * p.rho_w * p.eps_lj * (s**12 / (9 * r_max**9) - s**6 / (3 * r_max**3))
    ele = 4.0 * math.pi * cfa_prefactor(p) * Q**2 / r_max
    return vdw, ele


def _trap_weights(n: int, dr: float) -> np.ndarray:
    w = np.full(n, dr)
    w[0] = w[-1] = 0.5 * dr
    return w


def radial_energy(field: RadialField, Q: float, p: PhysicalParams, epsilon: float,
                  variant: str = "new", truncated: bool = False) -> EnergyBreakdown:
    """Composite-rule quadrature of the radial free energy.

    Bulk integrands use the trapezoid rule; |phi'|^2 uses the one-sided
    differences at cell midpoints (midpoint rule), matching the discrete
    Laplacian used by the flow.
    """
    phi = np.asarray(field.values, dtype=float)
    r = field.r
    dr = field.dr
    w = _trap_weights(len(phi), dr) * r**2
    rh = r[:-1] + 0.5 * dr
    grad = np.sum((np.diff(phi) / dr) ** 2 * rh**2) * dr
    f_surf = 4 * math.pi * p.gamma0 * (0.5 * epsilon * grad + np.sum(double_well(phi) * w) / epsilon)
    u_vdw, u_ele = radial_potentials(r, Q, p, truncated)
    f = coupling(phi, variant)
    tail_vdw, tail_ele = _tails(field.r_max, Q, p)
    f_vdw = 4 * math.pi * p.rho_w * np.sum(f * u_vdw * w) + tail_vdw
    f_ele = 4 * math.pi * np.sum(f * u_ele * w) + tail_ele
    return EnergyBreakdown(float(f_surf), float(f_vdw), float(f_ele))


def laplacian_coefficients(n: int, dr: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sub-, main- and super-diagonal of the radial Laplacian on nodes 0..n-1."""
    r = dr * np.arange(n)
    lo = np.zeros(n)
    up = np.zeros(n)
    rm = r[1:] - 0.5 * dr
    rp = r[1:] + 0.5 * dr
    lo[1:] = rm**2 / (r[1:] ** 2 * dr**2)
    up[1:] = rp**2 / (r[1:] ** 2 * dr**2)
    up[0] = 6.0 / dr**2
    return lo, -(lo + up), up


def radial_laplacian(phi: np.ndarray, dr: float) -> np.ndarray:
    """Laplacian with phi = 0 just past the last node."""
    lo, di, up = laplacian_coefficients(len(phi), dr)
    out = di * phi
    out[1:] += lo[1:] * phi[:-1]
    out[:-1] += up[:-1] * phi[1:]
    return out


def radial_forces(field: RadialField, Q: float, p: PhysicalParams, epsilon: float,
                  variant: str = "new", truncated: bool = False) -> dict[str, np.ndarray]:
    """Surface-tension, van der Waals and electrostatic parts of -dF/dphi.

    Their sum is the right-hand side of the radial flow. The last node is the
    Dirichlet boundary and is returned as zero.
    """
    phi = np.asarray(field.values, dtype=float)
    u_vdw, u_ele = radial_potentials(field.r, Q, p, truncated)
    inner = phi[:-1]
    surf = np.zeros_like(phi)
    surf[:-1] = p.gamma0 * (epsilon * radial_laplacian(inner, field.dr) - dW(inner) / epsilon)
    fp = dcoupling(phi, variant)
    vdw = -fp * p.rho_w * u_vdw
    ele = -fp * u_ele
    vdw[-1] = ele[-1] = 0.0
    return {"surface": surf, "vdw": vdw, "ele": ele}


# ---------------------------------------------------------------------------
# Crank-Nicolson flow

def thomas_factor(lo: np.ndarray, di: np.ndarray, up: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward-elimination factors of a tridiagonal matrix (no pivoting)."""
    n = len(di)
    cp = np.zeros(n)
    inv = np.zeros(n)
    inv[0] = 1.0 / di[0]
    cp[0] = up[0] * inv[0]
    for i in range(1, n):
        denom = di[i] - lo[i] * cp[i - 1]
        inv[i] = 1.0 / denom
        cp[i] = up[i] * inv[i]
    return cp, inv


@numba.njit(cache=True)
def thomas_solve(lo, cp, inv, rhs, out):
    n = rhs.shape[0]
    out[0] = rhs[0] * inv[0]
    for i in range(1, n):
        out[i] = (rhs[i] - lo[i] * out[i - 1]) * inv[i]
    for i in range(n - 2, -1, -1):
        out[i] -= cp[i] * out[i + 1]


@numba.njit(cache=True)
def _cn_steps(phi, n_steps, dt, lo, di, up, m_lo, cp, inv, U, c_imp, g_eps, g_over_eps, new_coupling):
    # the stiff part -c_imp (phi - 1) of the reaction is implicit: c_imp sits on
    # the matrix diagonal and c_imp * phi^n is added back on the right.
    n = phi.shape[0]
    rhs = np.empty(n)
    half = 0.5 * dt * g_eps
    for _ in range(n_steps):
        for i in range(n):
            v = phi[i]
            lap = di[i] * v
            if i > 0:
                lap += lo[i] * phi[i - 1]
            if i < n - 1:
                lap += up[i] * phi[i + 1]
            dw = 36.0 * (v * v - v) * (2.0 * v - 1.0)
            if new_coupling:
                fp = 4.0 * v * (v * v - 1.0)
            else:
                fp = 2.0 * (v - 1.0)
            rhs[i] = v + half * lap + dt * (-g_over_eps * dw - fp * U[i] + c_imp[i] * v)
        thomas_solve(m_lo, cp, inv, rhs, phi)
        if not np.isfinite(phi[0]):
            return False
    return True


def stable_dt(Q: float, p: PhysicalParams, epsilon: float, r_max: float = 5.0) -> float:
    """Half the explicit-Euler limit of the reaction terms, with potentials capped at r_cut.

    Inside r_cut phi sits at 1 and the implicit part carries the stiffness.
    """
    r = np.linspace(0.0, r_max, 2001)
    u_vdw, u_ele = radial_potentials(r, Q, p, truncated=True)
    umax = float(np.max(np.abs(p.rho_w * u_vdw + u_ele)))
    return 1.0 / (36.0 * p.gamma0 / epsilon + 8.0 * umax)


@dataclass
class RadialResult:
    field: RadialField
    energy: EnergyBreakdown
    steps: int
    converged: bool
    dt: float

    @property
    def radius(self) -> float:
        return interface_radius(self.field)


def tanh_profile(r: np.ndarray, radius: float, epsilon: float) -> np.ndarray:
    """1/(1 + exp(6 (r - R)/epsilon)), the one-dimensional equilibrium profile."""
    return 0.5 * (1.0 - np.tanh(3.0 * (r - radius) / epsilon))


def radial_flow(config: RadialConfig, Q: float, p: PhysicalParams | None = None,
                epsilon: float = 0.05, init: np.ndarray | None = None) -> RadialResult:
    """Relax phi_t = -dF/dphi; diffusion Crank-Nicolson, everything else explicit."""
    p = p or PhysicalParams()
    n_nodes = int(round(config.r_max / config.dr)) + 1
    dr = config.r_max / (n_nodes - 1)
    if dr > epsilon / 10 * (1 + 1e-9):
        raise ValueError(f"dr={dr} does not resolve epsilon={epsilon} (need dr <= epsilon/10)")
    r = dr * np.arange(n_nodes)
    if init is None:
        radius = config.initial_radius or sharp_oracle(Q, p).R_min
        phi = tanh_profile(r, radius, epsilon)
    else:
        phi = np.array(init, dtype=float)
        if phi.shape != r.shape:
            raise ValueError("initial profile does not match the radial mesh")
    phi[-1] = 0.0
    dt = config.dt or stable_dt(Q, p, epsilon, config.r_max)

    n = n_nodes - 1  # unknowns; the last node is Dirichlet
    lo, di, up = laplacian_coefficients(n, dr)
    g_eps = p.gamma0 * epsilon
    a = -0.5 * dt * g_eps
    u_vdw, u_ele = radial_potentials(r[:n], Q, p, config.truncated)
    U = p.rho_w * u_vdw + u_ele
    new = config.coupling in ("new", "f_new")
    # f''(1) U+ linearizes the coupling force about phi = 1 where U is large
    c_imp = (8.0 if new else 2.0) * np.maximum(U, 0.0)
    cp, inv = thomas_factor(a * lo, 1.0 + a * di + dt * c_imp, a * up)
    work = np.ascontiguousarray(phi[:n])

    def energy():
        full = np.append(work, 0.0)
        return radial_energy(RadialField(full, dr), Q, p, epsilon, config.coupling, config.truncated)

    e_prev = energy()
    steps = 0
    converged = False
    while steps < config.max_steps:
        k = min(config.check_every, config.max_steps - steps)
        ok = _cn_steps(work, k, dt, lo, di, up, a * lo, cp, inv, U, c_imp, g_eps, p.gamma0 / epsilon, new)
        steps += k
        if not ok or not np.all(np.isfinite(work)):
            raise FloatingPointError(f"radial flow diverged by step {steps}")
        e = energy()
        if abs(e.f_tot - e_prev.f_tot) / (k * dt) < config.tol:
            converged = True
            e_prev = e
            break
        e_prev = e
    field = RadialField(np.append(work, 0.0), dr)
    return RadialResult(field, e_prev, steps, converged, dt)


# ---------------------------------------------------------------------------
# sharp interface

@dataclass(frozen=True)
class SharpResult:
    R_min: float
    f_surf: float
    f_vdw: float
    f_elec: float

    @property
    def f_tot(self) -> float:
        return self.f_surf + self.f_vdw + self.f_elec


def sharp_components(R: float, Q: float, p: PhysicalParams) -> tuple[float, float, float]:
    s = p.sigma_lj
    surf = 4 * math.pi * p.gamma0 * R**2
    vdw = 16 * math.pi * p.rho_w * p.eps_lj * (s**12 / (9 * R**9) - s**6 / (3 * R**3))
    ele = Q**2 / (8 * math.pi * p.eps0 * R) * (1 / p.eps_w - 1 / p.eps_m) + 0.0  # no -0.0 for Q = 0
    return surf, vdw, ele


def sharp_energy(R: float, Q: float, p: PhysicalParams) -> float:
    return sum(sharp_components(R, Q, p))


def sharp_denergy(R: float, Q: float, p: PhysicalParams) -> float:
    s = p.sigma_lj
    return (8 * math.pi * p.gamma0 * R
            + 16 * math.pi * p.rho_w * p.eps_lj * (-(s**12) / R**10 + s**6 / R**4)
            - Q**2 / (8 * math.pi * p.eps0 * R**2) * (1 / p.eps_w - 1 / p.eps_m))


def golden_section(fn, a: float, b: float, tol: float = 1e-12, max_iter: int = 500) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if abs(b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def sharp_oracle(Q: float, p: PhysicalParams | None = None) -> SharpResult:
    """Minimize the one-variable sharp-interface energy over R in [0.5 sigma, 3 sigma]."""
    p = p or PhysicalParams()
    lo, hi = 0.5 * p.sigma_lj, 3.0 * p.sigma_lj
    R = golden_section(lambda x: sharp_energy(x, Q, p), lo, hi, tol=1e-9)
    margin = 1e-6 * (hi - lo)
    if R - lo < margin or hi - R < margin:
        raise ValueError("no interior minimum of the sharp-interface energy in the bracket")
    # polish on F'(R) = 0 by bisection
    a, b = R - 1e-3, R + 1e-3
    fa = sharp_denergy(a, Q, p)
    if fa >= 0 or sharp_denergy(b, Q, p) <= 0:
        raise ValueError("sharp-interface minimum is not bracketed by a sign change of F'")
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = sharp_denergy(m, Q, p)
        if abs(fm) < 1e-10 or b - a < 1e-15:
            break
        if fm < 0:
            a = m
        else:
            b = m
    R = 0.5 * (a + b)
    return SharpResult(R, *sharp_components(R, Q, p))


def interface_radius(field: RadialField) -> float:
    """Radius where phi crosses 0.5, by linear interpolation between mesh nodes."""
    phi = np.asarray(field.values, dtype=float)
    s = phi - 0.5
    idx = np.nonzero((s[:-1] > 0) & (s[1:] <= 0) | (s[:-1] < 0) & (s[1:] >= 0))[0]
    # a node exactly at 0.5 would be counted by both neighbouring intervals
    idx = np.array([i for i in idx if not (s[i] == 0 and i - 1 in idx)], dtype=int)
    if len(idx) == 0:
        raise ValueError("no crossing of phi = 0.5")
    if len(idx) > 1:
        raise ValueError(f"{len(idx)} crossings of phi = 0.5, expected exactly one")
    i = int(idx[0])
    if not s[i] > s[i + 1]:
        raise ValueError("phi crosses 0.5 ascending; expected a descending profile")
    t = s[i] / (s[i] - s[i + 1])
    return float(field.dr * (i + t))
