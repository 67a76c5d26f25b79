"""Full 3D gradient-flow runs."""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyBreakdown, energy_from_fields
from .grid import Grid
from .params import RunConfig, validate
from .potentials import PotentialField, sample_on_grid
from .solute import SoluteConfig, build_solute, make_plates  # noqa: F401  (re-exported)
from .spectral import SpectralWorkspace
from .stepper import EtdIntegrator, SplitOperators

log = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    def __init__(self, step: int, max_abs: float):
        super().__init__(f"non-finite phase field at step {step} (max |phi| = {max_abs:g})")
        self.step = step
        self.max_abs = max_abs


# ---------------------------------------------------------------------------
# initial conditions

def smooth_step(t, width: float):
    """(1 + tanh(3 t / width)) / 2, the equilibrium 1D profile; a sharp indicator of t >= 0 for width 0."""
    t = np.asarray(t, dtype=float)
    if width == 0:
        return (t >= 0).astype(float)
    return 0.5 * (1.0 + np.tanh(3.0 * t / width))


def box_field(grid: Grid, half_widths, width: float, center=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Smoothed characteristic function of an axis-aligned box."""
    for hw, c, L in zip(half_widths, center, grid.L):
        if abs(c) + hw > L:
            raise ValueError(f"box half-width {hw} at {c} exceeds domain half-length {L}")
    out = np.ones(grid.shape)
    for axis, (x, hw, c) in enumerate(zip(grid.axes(), half_widths, center)):
        s = smooth_step(hw - np.abs(x - c), width)
        shape = [1, 1, 1]
        shape[axis] = -1
        out = out * s.reshape(shape)
    return out


def loose_half_widths(n_p: int, d0: float, d: float, sigma_lj: float) -> tuple[float, float, float]:
    lateral = (n_p - 1) * d0 + sigma_lj
    return (lateral, 0.5 * d + sigma_lj, lateral)


def loose_initial(n_p: int, d0: float, d: float, grid: Grid, sigma_lj: float = 3.5,
                  smoothing: float = 0.5) -> np.ndarray:
    """One box enclosing both plates."""
    return box_field(grid, loose_half_widths(n_p, d0, d, sigma_lj), smoothing)


def tight_initial(n_p: int, d0: float, d: float, grid: Grid, sigma_lj: float = 3.5,
                  smoothing: float = 0.5) -> np.ndarray:
    """Union of two boxes, one per plate, each reaching sigma_lj beyond its plate plane.

    Falls back to the loose box (with a warning) when the boxes would touch.
    """
    if d <= 2.0 * sigma_lj:
        warnings.warn(f"tight boxes overlap at d={d}; using the loose initial", RuntimeWarning, stacklevel=2)
        return loose_initial(n_p, d0, d, grid, sigma_lj, smoothing)
    lateral = (n_p - 1) * d0 + sigma_lj
    hw = (lateral, sigma_lj, lateral)
    b1 = box_field(grid, hw, smoothing, center=(0.0, -0.5 * d, 0.0))
    b2 = box_field(grid, hw, smoothing, center=(0.0, 0.5 * d, 0.0))
    return np.maximum(b1, b2)


def single_plate_initial(n_p: int, d0: float, grid: Grid, sigma_lj: float = 3.5,
                         smoothing: float = 0.5, y: float = 0.0) -> np.ndarray:
    lateral = (n_p - 1) * d0 + sigma_lj
    return box_field(grid, (lateral, sigma_lj, lateral), smoothing, center=(0.0, y, 0.0))


def sphere_initial(grid: Grid, radius: float, smoothing: float = 0.5, center=(0.0, 0.0, 0.0)) -> np.ndarray:
    X, Y, Z = grid.mesh()
    r = np.sqrt((X - center[0]) ** 2 + (Y - center[1]) ** 2 + (Z - center[2]) ** 2)
    return smooth_step(radius - r, smoothing)


def initial_field(config: RunConfig, grid: Grid | None = None) -> np.ndarray:
    grid = grid or Grid.from_config(config)
    width = config.epsilon if config.smoothing is None else config.smoothing
    sp = config.solute
    sigma = config.physics.sigma_lj
    kind = config.initial
    if kind == "zero":
        return np.zeros(grid.shape)
    if kind == "sphere":
        return sphere_initial(grid, config.initial_radius, width)
    if kind == "checkpoint":
        from .io import read_checkpoint

        phi, meta = read_checkpoint(config.checkpoint)
        grid.check(phi, "checkpoint field")
        return phi
    if kind in ("loose", "tight"):
        if sp.kind != "plates":
            raise ValueError(f"initial '{kind}' needs a plates solute")
        fn = loose_initial if kind == "loose" else tight_initial
        return fn(sp.n_p, sp.d0, sp.d, grid, sigma, width)
    raise ValueError(f"unknown initial kind {kind!r}")


# ---------------------------------------------------------------------------
# runs

@dataclass
class RunResult:
    phi: np.ndarray
    energies: list[EnergyBreakdown]
    log_steps: list[int]
    dt: float
    steps: int
    converged: bool
    scheme: str
    wall_time: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def final_energy(self) -> EnergyBreakdown:
        return self.energies[-1]

    @property
    def times(self) -> list[float]:
        return [s * self.dt for s in self.log_steps]


def solvent_excluded_volume(phi: np.ndarray, grid: Grid) -> float:
    return grid.cell_volume * int(np.count_nonzero(phi > 0.5))


def prepare(config: RunConfig, solute: SoluteConfig | None = None, pot: PotentialField | None = None):
    problems = validate(config)
    if problems:
        raise ValueError("; ".join(f"{v.field}: {v.message}" for v in problems))
    grid = Grid.from_config(config)
    if solute is None:
        solute = build_solute(config.solute, config.physics)
    if pot is None:
        pot = sample_on_grid(solute, grid, config.physics, config.nu_safety)
    elif pot.grid != grid:
        raise ValueError("potential field grid does not match the configuration")
    ops = SplitOperators(pot, config.physics, config.epsilon, config.coupling, config.kappa, config.mu)
    return grid, solute, pot, ops


def run_gradient_flow(config: RunConfig, solute: SoluteConfig | None = None, init=None, *,
                      pot: PotentialField | None = None, ws: SpectralWorkspace | None = None,
                      t_end: float | None = None) -> RunResult:
    """Iterate the configured ETD scheme until |F^{n+1} - F^n| / dt < tol or max_steps.

    ``init`` is an array, or None to build the configured initial condition.
    With ``t_end`` the run instead takes exactly round(t_end / dt) steps and
    ignores the stopping rule.
    """
    t0 = time.perf_counter()
    grid, solute, pot, ops = prepare(config, solute, pot)
    ws = ws or SpectralWorkspace(grid)
    integ = EtdIntegrator(ops, ws, config.dt, config.scheme)
    phi = initial_field(config, grid) if init is None else np.array(init, dtype=float)
    grid.check(phi, "initial field")

    def energy(u, u_hat):
        return energy_from_fields(u, u_hat, pot, config.physics.gamma0, config.epsilon, config.coupling, ws)

    phi_hat = ws.forward(phi)
    e_prev = energy(phi, phi_hat)
    energies = [e_prev]
    log_steps = [0]
    converged = False
    if t_end is not None:
        n_fixed = int(round(t_end / config.dt))
        if abs(n_fixed * config.dt - t_end) > 1e-9 * max(1.0, t_end):
            raise ValueError("t_end must be an integer multiple of dt")
        max_steps = n_fixed
    else:
        max_steps = config.max_steps
    n = 0
    while n < max_steps:
        phi_hat = integ.step(phi_hat, phi)
        phi = ws.inverse(phi_hat)
        n += 1
        e = energy(phi, phi_hat)
        if not np.isfinite(e.f_tot):
            raise DivergenceError(n, float(np.nanmax(np.abs(phi))) if np.isfinite(phi).any() else float("inf"))
        done = t_end is None and abs(e.f_tot - e_prev.f_tot) / config.dt < config.tol
        if n % config.log_every == 0 or done or n == max_steps:
            energies.append(e)
            log_steps.append(n)
        e_prev = e
        if done:
            converged = True
            break
    if t_end is None and max_steps == 0:
        converged = False
    wall = time.perf_counter() - t0
    log.info("run finished: %d steps, converged=%s, F=%.6f, %.1fs", n, converged, e_prev.f_tot, wall)
    return RunResult(phi, energies, log_steps, config.dt, n, converged, config.scheme, wall,
                     {"nu": ops.nu, "epsilon": config.epsilon})
