"""Physical constants, solute atoms and run configuration.

Units are fixed throughout the package: energies in kBT, lengths in
Angstrom, charges in units of the elementary charge e.
"""
from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, fields, replace
from typing import NamedTuple

SCHEMES = ("ETD1RK", "ETD2RK", "ETD4RK")
COUPLINGS = ("new", "old")
INITIAL_KINDS = ("loose", "tight", "sphere", "checkpoint", "zero")
SOLUTE_KINDS = ("none", "ion", "plates", "atoms")


@dataclass(frozen=True)
class PhysicalParams:
    gamma0: float = 0.175  # surface tension [kBT/A^2]
    rho_w: float = 0.0333  # solvent density [A^-3]
    eps_lj: float = 0.3  # LJ well depth [kBT]
    sigma_lj: float = 3.5  # LJ zero crossing [A]
    r_cut_factor: float = 0.7  # r_cut = r_cut_factor * sigma_lj
    eps0: float = 1.4321e-4  # vacuum permittivity [e^2/(kBT A)]
    eps_m: float = 1.0
    eps_w: float = 80.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not v > 0:
                raise ValueError(f"{f.name} must be strictly positive, got {v!r}")
        if self.eps_m < 1.0:
            raise ValueError("eps_m must be >= 1")
        if self.eps_w < self.eps_m:
            raise ValueError("eps_w must be >= eps_m")

    @property
    def r_cut(self) -> float:
        return self.r_cut_factor * self.sigma_lj


def default_params() -> PhysicalParams:
    return PhysicalParams()


def cfa_prefactor(p: PhysicalParams) -> float:
    """Constant tau0 multiplying |sum_i Q_i (x - x_i)/|x - x_i|^3|^2 in the CFA density."""
    return (1.0 / (32.0 * math.pi**2 * p.eps0)) * (1.0 / p.eps_w - 1.0 / p.eps_m)


@dataclass(frozen=True)
class SoluteAtom:
    position: tuple[float, float, float]
    charge: float = 0.0
    eps_i: float = 0.3
    sigma_i: float = 3.5

    def __post_init__(self):
        pos = tuple(float(c) for c in self.position)
        if len(pos) != 3:
            raise ValueError("position must have three components")
        object.__setattr__(self, "position", pos)
        if not (self.eps_i > 0 and self.sigma_i > 0):
            raise ValueError("eps_i and sigma_i must be positive")


@dataclass(frozen=True)
class SoluteSpec:
    """Declarative description of the solute, as read from the [solute] section.

    ``atoms`` holds ``(x, y, z, Q)`` rows for ``kind == "atoms"``.
    """

    kind: str = "none"
    charge: float = 0.0
    n_p: int = 6
    d0: float = 2.1945
    d: float = 12.0
    q1: float = 0.0
    q2: float = 0.0
    atoms: tuple[tuple[float, float, float, float], ...] = ()


@dataclass(frozen=True)
class RunConfig:
    L_x: float = 18.0
    L_y: float = 18.0
    L_z: float = 18.0
    N_x: int = 64
    N_y: int = 64
    N_z: int = 64
    epsilon: float = 0.5
    dt: float = 0.05
    max_steps: int = 100000
    tol: float = 1e-3
    scheme: str = "ETD4RK"
    coupling: str = "new"
    initial: str = "loose"
    initial_radius: float = 3.0
    smoothing: float | None = None  # None -> epsilon
    checkpoint: str = ""
    kappa: float = 18.0
    mu: float = 4.0
    nu_safety: float = 1.0
    log_every: int = 1
    physics: PhysicalParams = field(default_factory=PhysicalParams)
    solute: SoluteSpec = field(default_factory=SoluteSpec)

    @property
    def L(self) -> tuple[float, float, float]:
        return (self.L_x, self.L_y, self.L_z)

    @property
    def N(self) -> tuple[int, int, int]:
        return (self.N_x, self.N_y, self.N_z)

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)


class Violation(NamedTuple):
    field: str
    message: str


def validate(config: RunConfig) -> list[Violation]:
    """Return every invariant violation of ``config``; an empty list means valid."""
    out: list[Violation] = []
    for name in ("N_x", "N_y", "N_z"):
        n = getattr(config, name)
        if not isinstance(n, int) or n % 2:
            out.append(Violation(name, "grid size must be even"))
        if isinstance(n, (int, float)) and n < 8:
            out.append(Violation(name, "grid size must be at least 8"))
    for name in ("L_x", "L_y", "L_z"):
        if not getattr(config, name) > 0:
            out.append(Violation(name, "domain half-length must be positive"))
    if not config.epsilon > 0:
        out.append(Violation("epsilon", "interface width must be positive"))
    if not config.dt > 0:
        out.append(Violation("dt", "time step must be positive"))
    if not config.tol > 0:
        out.append(Violation("tol", "stopping tolerance must be positive"))
    if config.max_steps < 0:
        out.append(Violation("max_steps", "max steps must be non-negative"))
    if config.log_every < 1:
        out.append(Violation("log_every", "log interval must be at least 1"))
    if config.scheme not in SCHEMES:
        out.append(Violation("scheme", f"scheme must be one of {', '.join(SCHEMES)}"))
    if config.coupling not in COUPLINGS:
        out.append(Violation("coupling", "coupling must be 'new' or 'old'"))
    if config.initial not in INITIAL_KINDS:
        out.append(Violation("initial", f"initial must be one of {', '.join(INITIAL_KINDS)}"))
    if config.initial == "checkpoint" and not config.checkpoint:
        out.append(Violation("checkpoint", "checkpoint path required for initial=checkpoint"))
    if config.smoothing is not None and config.smoothing < 0:
        out.append(Violation("smoothing", "smoothing width must be non-negative"))
    if config.kappa < 18.0:
        out.append(Violation("kappa", "kappa must be >= 18"))
    if config.mu < 4.0:
        out.append(Violation("mu", "mu must be >= 4"))
    if not config.nu_safety >= 1.0:
        out.append(Violation("nu_safety", "nu safety factor must be >= 1"))
    if config.solute.kind not in SOLUTE_KINDS:
        out.append(Violation("solute.kind", f"solute kind must be one of {', '.join(SOLUTE_KINDS)}"))
    if config.solute.kind == "plates":
        if config.solute.n_p < 1:
            out.append(Violation("solute.n_p", "n_p must be >= 1"))
        if not config.solute.d > 0:
            out.append(Violation("solute.d", "plate separation must be positive"))
    return out


# ---------------------------------------------------------------------------
# key=value configuration files

_SECTIONS = {
    "grid": ("L_x", "L_y", "L_z", "N_x", "N_y", "N_z"),
    "solver": (
        "epsilon", "dt", "max_steps", "tol", "scheme", "coupling", "initial",
        "initial_radius", "smoothing", "checkpoint", "kappa", "mu", "nu_safety",
        "log_every",
    ),
}


class ConfigError(ValueError):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(name: str, raw: str, default):
    raw = raw.strip()
    if name == "smoothing":
        return None if raw == "" else float(raw)
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def _parse_atoms(raw: str) -> tuple[tuple[float, float, float, float], ...]:
    rows = []
    for chunk in raw.replace(";", "\n").splitlines():
        chunk = chunk.strip()
        if not chunk:
            continue
        vals = [float(v) for v in chunk.split()]
        if len(vals) != 4:
            raise ConfigError(f"atom row needs 'x y z Q', got {chunk!r}")
        rows.append(tuple(vals))
    return tuple(rows)


def config_to_text(config: RunConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["physics"] = {f.name: _fmt(getattr(config.physics, f.name)) for f in fields(PhysicalParams)}
    for sec, keys in _SECTIONS.items():
        cp[sec] = {k: _fmt(getattr(config, k)) for k in keys}
    sol = {}
    for f in fields(SoluteSpec):
        v = getattr(config.solute, f.name)
        if f.name == "atoms":
            v = "; ".join(" ".join(repr(float(c)) for c in row) for row in v)
        sol[f.name] = _fmt(v)
    cp["solute"] = sol
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def config_from_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse a configuration; unknown sections or keys raise ``ConfigError``."""
    base = base or RunConfig()
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    known = {"physics", "grid", "solver", "solute"}
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(f"unknown section [{sec}]")

    top = {}
    for sec, keys in _SECTIONS.items():
        if sec in cp:
            for k, raw in cp[sec].items():
                if k not in keys:
                    raise ConfigError(f"unknown key {k!r} in [{sec}]")
                try:
                    top[k] = _coerce(k, raw, getattr(base, k))
                except ValueError as exc:
                    raise ConfigError(f"bad value for {k}: {raw!r}") from exc

    phys = {}
    if "physics" in cp:
        names = {f.name for f in fields(PhysicalParams)}
        for k, raw in cp["physics"].items():
            if k not in names:
                raise ConfigError(f"unknown key {k!r} in [physics]")
            try:
                phys[k] = float(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {k}: {raw!r}") from exc
    sol = {}
    if "solute" in cp:
        names = {f.name for f in fields(SoluteSpec)}
        for k, raw in cp["solute"].items():
            if k not in names:
                raise ConfigError(f"unknown key {k!r} in [solute]")
            try:
                sol[k] = _parse_atoms(raw) if k == "atoms" else _coerce(k, raw, getattr(base.solute, k))
            except ValueError as exc:
                raise ConfigError(f"bad value for {k}: {raw!r}") from exc
    try:
        physics = replace(base.physics, **phys)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return replace(base, physics=physics, solute=replace(base.solute, **sol), **top)


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    with open(path) as fh:
        return config_from_text(fh.read(), base)


def save_config(config: RunConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(config_to_text(config))


def preset(name: str) -> RunConfig:
    """Named configurations.

    ``paper-two-plate`` is the full-resolution two-plate run (256^3, L=18,
    epsilon=0.5, dt=0.05); ``desk-two-plate`` is the same problem on 64^3.
    ``desk-equilibrium`` relaxes plates to equilibrium on 48^3 with a wider
    interface (epsilon=1.5, three cells), since at h = 0.56 an epsilon=0.5
    interface is pinned to the lattice and stops moving before it is relaxed.
    """
    plates = SoluteSpec(kind="plates", n_p=6, d0=2.1945, d=12.0, q1=0.2, q2=0.2)
    if name == "paper-two-plate":
        return RunConfig(N_x=256, N_y=256, N_z=256, solute=plates)
    if name == "desk-two-plate":
        return RunConfig(solute=plates)
    if name == "desk-equilibrium":
        return RunConfig(N_x=48, N_y=48, N_z=48, epsilon=1.5, scheme="ETD1RK", dt=0.05,
                         max_steps=200000, log_every=100, solute=plates)
    raise ConfigError(f"unknown preset {name!r}")


PRESETS = ("paper-two-plate", "desk-two-plate", "desk-equilibrium")
