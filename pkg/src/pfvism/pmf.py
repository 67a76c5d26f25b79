"""Potential of mean force between two plates along their separation d.

G_geo = F_surf[phi_d] - F_surf[phi_inf]
G_vdW = F_vdW[phi_d] - F_vdW[phi_inf] + sum_{I,II} U_LJ(|x_i - x_j|)
G_ele = F_ele[phi_d] - F_ele[phi_inf] + sum_{I,II} Q_i Q_j / (4 pi eps_m eps0 |x_i - x_j|)
        + cross-plate CFA energy of the solvent outside the box

phi_inf is a single plate relaxed in the same box, counted once per plate.
The exterior cross term is evaluated as a surface integral over the box faces
(Green's identity for the harmonic functions 1/|x - x_i|).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .driver import RunResult, run_gradient_flow, single_plate_initial, solvent_excluded_volume
from .energy import EnergyBreakdown
from .grid import Grid
from .params import PhysicalParams, RunConfig, cfa_prefactor
from .potentials import lj_pair, lj_truncated
from .solute import SoluteConfig, make_plate, make_plates

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# direct solute-solute sums

def _cross_distances(a: SoluteConfig, b: SoluteConfig) -> np.ndarray:
    diff = a.positions[:, None, :] - b.positions[None, :, :]
    r = np.sqrt((diff**2).sum(-1))
    if r.size and np.min(r) == 0.0:
        raise ValueError("coincident atoms across the two groups")
    return r


def pair_lj_sum(plate_1: SoluteConfig, plate_2: SoluteConfig) -> float:
    """Untruncated LJ energy between every atom of one group and every atom of the other.

    Unlike parameters are combined by Lorentz-Berthelot rules.
    """
    if not len(plate_1) or not len(plate_2):
        return 0.0
    r = _cross_distances(plate_1, plate_2)
    eps = np.sqrt(plate_1.eps[:, None] * plate_2.eps[None, :])
    sig = 0.5 * (plate_1.sigma[:, None] + plate_2.sigma[None, :])
    s6 = (sig / r) ** 6
    return float(np.sum(4.0 * eps * (s6 * s6 - s6)))


def pair_coulomb_sum(plate_1: SoluteConfig, plate_2: SoluteConfig, p: PhysicalParams) -> float:
    """Coulomb cross energy in the solute dielectric, 1/(4 pi eps_m eps0) sum Q_i Q_j / r_ij."""
    if not len(plate_1) or not len(plate_2):
        return 0.0
    r = _cross_distances(plate_1, plate_2)
    qq = plate_1.charges[:, None] * plate_2.charges[None, :]
    return float(np.sum(qq / r) / (4.0 * math.pi * p.eps_m * p.eps0))


# ---------------------------------------------------------------------------
# exterior of the box

def _box_half(box) -> np.ndarray:
    b = np.broadcast_to(np.asarray(box, dtype=float), (3,)).copy()
    if np.any(b <= 0):
        raise ValueError("box half-lengths must be positive")
    return b


def _check_inside(solute: SoluteConfig, half: np.ndarray) -> None:
    if len(solute) and np.any(np.abs(solute.positions) >= half):
        raise ValueError("every atom must lie strictly inside the box")


def box_face_quadrature(box, order: int = 64) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes, outward normals and weights on the six faces of [-b, b]."""
    half = _box_half(box)
    s, w = np.polynomial.legendre.leggauss(order)
    pts, nrm, wts = [], [], []
    for axis in range(3):
        u, v = [k for k in range(3) if k != axis]
        U, V = np.meshgrid(s * half[u], s * half[v], indexing="ij")
        W = np.outer(w * half[u], w * half[v])
        for sign in (-1.0, 1.0):
            x = np.zeros(U.shape + (3,))
            x[..., axis] = sign * half[axis]
            x[..., u] = U
            x[..., v] = V
            n = np.zeros(3)
            n[axis] = sign
            pts.append(x.reshape(-1, 3))
            nrm.append(np.broadcast_to(n, (U.size, 3)))
            wts.append(W.ravel())
    return np.concatenate(pts), np.concatenate(nrm), np.concatenate(wts)


def _harmonic_sums(x, n, solute: SoluteConfig) -> tuple[np.ndarray, np.ndarray]:
    """A = sum Q_i / r_i and B = sum Q_i n.(x - x_i) / r_i^3 at surface points."""
    A = np.zeros(len(x))
    B = np.zeros(len(x))
    for pos, q in zip(solute.positions, solute.charges):
        if q == 0.0:
            continue
        dx = x - pos
        r = np.sqrt((dx**2).sum(-1))
        A += q / r
        B += q * (dx * n).sum(-1) / r**3
    return A, B


def exterior_ele_correction(plate_1: SoluteConfig, plate_2: SoluteConfig, box, p: PhysicalParams,
                            order: int = 64) -> float:
    """Cross-group CFA energy of the solvent outside the box [-b, b]^3.

    tau0 sum_i sum_j Q_i Q_j  int_dOmega n.[(x-x_i)/r_i^2 + (x-x_j)/r_j^2] / (r_i r_j) dS,
    which per surface point factorizes into B_1 A_2 + A_1 B_2.
    """
    half = _box_half(box)
    _check_inside(plate_1, half)
    _check_inside(plate_2, half)
    if not np.any(plate_1.charges) or not np.any(plate_2.charges):
        return 0.0
    x, n, w = box_face_quadrature(half, order)
    a1, b1 = _harmonic_sums(x, n, plate_1)
    a2, b2 = _harmonic_sums(x, n, plate_2)
    return float(cfa_prefactor(p) * np.sum(w * (b1 * a2 + a1 * b2)))


def sphere_surface_identity(radius: float, order: int = 64) -> float:
    """Half the symmetrized surface integrand for one unit charge on a centred sphere.

    Gauss-Legendre in cos(theta) and the trapezoid rule in the azimuth; the
    exact value is 4 pi / R, the exterior integral of r^-4.
    """
    c, wc = np.polynomial.legendre.leggauss(order)
    az = 2.0 * math.pi * np.arange(2 * order) / (2 * order)
    st = np.sqrt(1.0 - c**2)
    x = radius * np.stack([np.outer(st, np.cos(az)), np.outer(st, np.sin(az)),
                           np.outer(c, np.ones_like(az))], axis=-1).reshape(-1, 3)
    n = x / radius
    w = (radius**2 * np.outer(wc, np.full(az.shape, 2.0 * math.pi / len(az)))).ravel()
    a, b = _harmonic_sums(x, n, SoluteConfig((_unit_atom(),)))
    return float(0.5 * np.sum(w * 2.0 * a * b))


def _unit_atom():
    from .params import SoluteAtom

    return SoluteAtom((0.0, 0.0, 0.0), 1.0)


def _composite_gauss(order: int, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1] split into equal panels."""
    s, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    nodes = np.concatenate([a + 0.5 * (b - a) * (s + 1.0) for a, b in zip(edges, edges[1:])])
    weights = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges, edges[1:])])
    return nodes, weights


def exterior_volume_quadrature(func, box, order: int = 16, panels: int = 4) -> float:
    """Integral of func(points) over R^3 minus the box [-b, b].

    The exterior splits into six truncated pyramids, one per face, swept by
    rays x = t (face point) for t >= 1. With s = 1/t the volume element is
    b_a ds du dv / s^4, so an integrand decaying like r^-4 or faster is smooth
    in s. Each of the three directions uses ``panels`` composite
    Gauss-Legendre panels of ``order`` points.
    """
    half = _box_half(box)
    g, gw = _composite_gauss(order, panels)
    total = 0.0
    for axis in range(3):
        u_ax, v_ax = [k for k in range(3) if k != axis]
        u = -half[u_ax] + 2.0 * half[u_ax] * g
        v = -half[v_ax] + 2.0 * half[v_ax] * g
        wu = 2.0 * half[u_ax] * gw
        wv = 2.0 * half[v_ax] * gw
        U, V = np.meshgrid(u, v, indexing="ij")
        W_face = np.outer(wu, wv).ravel()
        for sign in (-1.0, 1.0):
            face = np.zeros((U.size, 3))
            face[:, axis] = sign * half[axis]
            face[:, u_ax] = U.ravel()
            face[:, v_ax] = V.ravel()
            # one radial node at a time keeps memory flat
            for sk, wk in zip(g, gw):
                vals = func(face / sk)
                total += wk * half[axis] / sk**4 * float(np.sum(W_face * vals))
    return total


def exterior_vdw_correction(solute: SoluteConfig, box, p: PhysicalParams, order: int = 16,
                            panels: int = 4) -> float:
    """int over R^3 minus the box of rho_w U_vdW; cancels in PMF differences, kept for validation."""
    half = _box_half(box)
    _check_inside(solute, half)

    def integrand(x):
        out = np.zeros(len(x))
        for pos, e, s in zip(solute.positions, solute.eps, solute.sigma):
            r = np.sqrt(((x - pos) ** 2).sum(-1))
            out += lj_truncated(r, e, s, p.r_cut)
        return p.rho_w * out

    return exterior_volume_quadrature(integrand, half, order, panels)


def exterior_ele_cross_volume(plate_1: SoluteConfig, plate_2: SoluteConfig, box, p: PhysicalParams,
                              order: int = 16, panels: int = 4) -> float:
    """The same cross term as exterior_ele_correction, integrated over the exterior volume.

    2 tau0 sum_i sum_j Q_i Q_j (x - x_i).(x - x_j) / (r_i^3 r_j^3).
    """
    half = _box_half(box)
    _check_inside(plate_1, half)
    _check_inside(plate_2, half)

    def field(x, solute):
        E = np.zeros_like(x)
        for pos, q in zip(solute.positions, solute.charges):
            dx = x - pos
            E += q * dx / ((dx**2).sum(-1) ** 1.5)[:, None]
        return E

    def integrand(x):
        return 2.0 * cfa_prefactor(p) * (field(x, plate_1) * field(x, plate_2)).sum(-1)

    return exterior_volume_quadrature(integrand, half, order, panels)


# ---------------------------------------------------------------------------
# PMF assembly

@dataclass(frozen=True)
class PmfPoint:
    d: float
    G_geo: float
    G_vdW: float
    G_ele: float
    branch: str
    converged: bool = True
    sev: float = float("nan")
    steps: int = 0
    warm_start: bool = False

    @property
    def G_tot(self) -> float:
        return self.G_geo + self.G_vdW + self.G_ele


@dataclass
class ReferenceState:
    """Single plates relaxed in the full box; ``energy`` is the summed two-plate reference."""
    charges: tuple[float, float]
    fields: dict[float, np.ndarray] = field(default_factory=dict)
    parts: dict[float, EnergyBreakdown] = field(default_factory=dict)
    converged: bool = True

    @property
    def energy(self) -> EnergyBreakdown:
        return self.parts[self._key(self.charges[0])] + self.parts[self._key(self.charges[1])]

    @staticmethod
    def _key(q: float) -> float:
        # the CFA energy depends on Q^2, so plates of opposite charge share a reference
        return abs(q)


def compute_reference(config: RunConfig) -> ReferenceState:
    """Relax one plate centred at y = 0 per distinct |q| with the configured grid, epsilon and scheme."""
    sp = config.solute
    if sp.kind != "plates":
        raise ValueError("the PMF needs a plates solute")
    grid = Grid.from_config(config)
    width = config.epsilon if config.smoothing is None else config.smoothing
    ref = ReferenceState((sp.q1, sp.q2))
    for q in {ReferenceState._key(sp.q1), ReferenceState._key(sp.q2)}:
        plate = make_plate(sp.n_p, sp.d0, 0.0, q, config.physics)
        init = single_plate_initial(sp.n_p, sp.d0, grid, config.physics.sigma_lj, width)
        res = run_gradient_flow(config, plate, init)
        ref.fields[q] = res.phi
        ref.parts[q] = res.final_energy
        ref.converged &= res.converged
    return ref


def pmf_point(res: RunResult, config: RunConfig, ref: ReferenceState, branch: str,
              surface_order: int = 64, warm_start: bool = False) -> PmfPoint:
    sp = config.solute
    p = config.physics
    plate_1 = make_plate(sp.n_p, sp.d0, -0.5 * sp.d, sp.q1, p)
    plate_2 = make_plate(sp.n_p, sp.d0, 0.5 * sp.d, sp.q2, p)
    delta = res.final_energy - ref.energy
    g_vdw = delta.f_vdw + pair_lj_sum(plate_1, plate_2)
    g_ele = (delta.f_ele + pair_coulomb_sum(plate_1, plate_2, p)
             + exterior_ele_correction(plate_1, plate_2, config.L, p, surface_order))
    grid = Grid.from_config(config)
    return PmfPoint(sp.d, delta.f_surf, g_vdw, g_ele, branch, res.converged,
                    solvent_excluded_volume(res.phi, grid), res.steps, warm_start)


def pmf_curve(ds, config: RunConfig, initial: str = "loose", reference: ReferenceState | None = None,
              warm_start: bool = False, surface_order: int = 64) -> list[PmfPoint]:
    """Relax the two plates at each separation and assemble the PMF components.

    Without warm start every point starts from the configured initial kind;
    with it, each point after the first starts from the previous equilibrium.
    A non-converged run is flagged and the sweep continues.
    """
    if initial not in ("loose", "tight"):
        raise ValueError("initial must be 'loose' or 'tight'")
    ref = reference or compute_reference(config)
    out = []
    prev = None
    for d in ds:
        cfg = config.replace(initial=initial, solute=_with_d(config, d))
        init = prev if (warm_start and prev is not None) else None
        res = run_gradient_flow(cfg, init=init)
        pt = pmf_point(res, cfg, ref, initial, surface_order, init is not None)
        log.info("d=%g %s G_tot=%.4f converged=%s", d, initial, pt.G_tot, pt.converged)
        out.append(pt)
        prev = res.phi
    return out


def _with_d(config: RunConfig, d: float):
    from dataclasses import replace

    sp = config.solute
    half_y = 0.5 * d + config.physics.sigma_lj
    if half_y > config.L[1]:
        raise ValueError(f"plates at d={d} do not fit the box")
    make_plates(sp.n_p, sp.d0, d, sp.q1, sp.q2, config.physics)  # validates d
    return replace(sp, d=float(d))


def crossover_distance(points: list[PmfPoint], drop: float = 5.0) -> float | None:
    """Largest sampled d where G_geo lies more than ``drop`` below its value at the largest d."""
    if not points:
        return None
    pts = sorted(points, key=lambda q: q.d)
    plateau = pts[-1].G_geo
    below = [q.d for q in pts if q.G_geo < plateau - drop]
    return max(below) if below else None
