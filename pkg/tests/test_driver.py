import warnings

import numpy as np
import pytest
from scipy import ndimage

from pfvism.driver import (
    DivergenceError, box_field, initial_field, loose_half_widths, loose_initial, run_gradient_flow,
    single_plate_initial, smooth_step, solvent_excluded_volume, sphere_initial, tight_initial,
)
from pfvism.grid import Grid
from pfvism.params import RunConfig, SoluteSpec, preset
from pfvism.solute import make_plates, single_ion

G = Grid.cube(18.0, 32)


# ---------------------------------------------------------------------------
# geometry and initials

def test_make_plates_geometry():
    s = make_plates(6, 2.1945, 12.0, 0.2, 0.2)
    pos = s.positions
    assert len(s) == 72
    assert s.total_charge == pytest.approx(14.4)
    assert sorted(set(np.round(pos[:, 1], 12))) == [-6.0, 6.0]
    assert np.ptp(pos[:36, 0]) == pytest.approx(5 * 2.1945)
    assert np.allclose(pos[:, [0, 2]].mean(axis=0), 0.0)
    with pytest.raises(ValueError):
        make_plates(6, 2.1945, 0.0, 0, 0)


def test_loose_box_half_widths():
    assert loose_half_widths(6, 2.1945, 12.0, 3.5) == pytest.approx((14.4725, 9.5, 14.4725))


def test_loose_initial_values():
    phi = loose_initial(6, 2.1945, 12.0, G)
    assert phi[16, 16, 16] == pytest.approx(1.0)
    assert phi[0, 0, 0] < 1e-12
    assert phi.min() >= 0.0 and phi.max() <= 1.0


def test_zero_smoothing_is_characteristic_function():
    phi = box_field(G, (5.0, 3.0, 4.0), 0.0)
    X, Y, Z = G.mesh()
    inside = (np.abs(X) <= 5.0) & (np.abs(Y) <= 3.0) & (np.abs(Z) <= 4.0)
    assert np.array_equal(phi, inside.astype(float))


def test_box_must_fit():
    with pytest.raises(ValueError):
        box_field(G, (19.0, 1.0, 1.0), 0.5)


def test_smooth_step_is_equilibrium_profile():
    assert smooth_step(0.0, 0.5) == 0.5
    assert smooth_step(10.0, 0.5) == pytest.approx(1.0)


def test_tight_initial_two_components_at_large_d():
    phi = tight_initial(6, 2.1945, 16.0, G)
    _, n = ndimage.label(phi > 0.5)
    assert n == 2
    _, n_loose = ndimage.label(loose_initial(6, 2.1945, 16.0, G) > 0.5)
    assert n_loose == 1


def test_tight_differs_from_loose_at_d12():
    t = tight_initial(6, 2.1945, 12.0, G)
    lo = loose_initial(6, 2.1945, 12.0, G)
    assert np.count_nonzero(np.abs(t - lo) > 0.5) > 0
    assert np.all(t <= lo + 1e-12)


def test_tight_falls_back_to_loose_when_boxes_touch():
    with pytest.warns(RuntimeWarning):
        t = tight_initial(6, 2.1945, 6.0, G)
    assert np.array_equal(t, loose_initial(6, 2.1945, 6.0, G))


def test_initial_field_dispatch():
    cfg = preset("desk-two-plate").replace(N_x=32, N_y=32, N_z=32)
    assert np.array_equal(initial_field(cfg), loose_initial(6, 2.1945, 12.0, G, 3.5, 0.5))
    assert not initial_field(cfg.replace(initial="zero")).any()
    s = initial_field(cfg.replace(initial="sphere", initial_radius=4.0))
    assert np.array_equal(s, sphere_initial(G, 4.0, 0.5))
    with pytest.raises(ValueError):
        initial_field(cfg.replace(initial="tight", solute=SoluteSpec(kind="ion")))


def test_solvent_excluded_volume_limits():
    g = Grid.cube(3.0, 8)
    assert solvent_excluded_volume(np.ones(g.shape), g) == pytest.approx(6.0**3)
    assert solvent_excluded_volume(np.zeros(g.shape), g) == 0.0


# ---------------------------------------------------------------------------
# runs

def _small(**kw):
    base = dict(L_x=6.0, L_y=6.0, L_z=6.0, N_x=16, N_y=16, N_z=16, epsilon=1.0, dt=0.05, log_every=1)
    base.update(kw)
    return RunConfig(**base)


def test_empty_solute_zero_field_converges_in_one_step():
    res = run_gradient_flow(_small(initial="zero"))
    assert res.converged and res.steps == 1
    assert res.final_energy.f_tot == 0.0


def test_log_length_and_stopping_rule():
    cfg = _small(initial="sphere", initial_radius=3.0, solute=SoluteSpec(kind="ion", charge=1.0),
                 scheme="ETD2RK")
    res = run_gradient_flow(cfg)
    assert len(res.energies) == res.steps + 1 == len(res.log_steps)
    assert res.converged
    assert abs(res.energies[-1].f_tot - res.energies[-2].f_tot) / cfg.dt < cfg.tol
    assert res.times[-1] == pytest.approx(res.steps * cfg.dt)


def test_sparse_logging_keeps_last_step():
    cfg = _small(initial="sphere", initial_radius=3.0, solute=SoluteSpec(kind="ion", charge=1.0),
                 log_every=7, max_steps=30, tol=1e-12)
    res = run_gradient_flow(cfg)
    assert res.log_steps == [0, 7, 14, 21, 28, 30]
    assert not res.converged


def test_fixed_time_runs():
    cfg = _small(initial="sphere", initial_radius=3.0, solute=SoluteSpec(kind="ion", charge=1.0))
    res = run_gradient_flow(cfg, t_end=0.5)
    assert res.steps == 10 and not res.converged
    with pytest.raises(ValueError):
        run_gradient_flow(cfg, t_end=0.52)


def test_etd1rk_energy_is_non_increasing():
    cfg = _small(initial="loose", N_x=24, N_y=24, N_z=24, L_x=9.0, L_y=9.0, L_z=9.0, scheme="ETD1RK",
                 solute=SoluteSpec(kind="plates", n_p=3, d=7.0, q1=0.2, q2=-0.2), max_steps=150, tol=1e-9)
    res = run_gradient_flow(cfg)
    f = np.array([e.f_tot for e in res.energies])
    assert np.all(np.diff(f) <= 1e-8)
    assert f[-1] < f[0]


def test_runs_are_deterministic():
    cfg = _small(initial="sphere", initial_radius=3.0, solute=SoluteSpec(kind="ion", charge=0.5),
                 max_steps=20, scheme="ETD4RK")
    a, b = run_gradient_flow(cfg), run_gradient_flow(cfg)
    assert np.array_equal(a.phi, b.phi)
    assert [e.as_tuple() for e in a.energies] == [e.as_tuple() for e in b.energies]


def test_non_finite_field_aborts():
    cfg = _small(initial="zero")
    init = np.zeros(Grid.from_config(cfg).shape)
    init[3, 4, 5] = np.nan
    with pytest.raises(DivergenceError) as info:
        run_gradient_flow(cfg, init=init)
    assert info.value.step == 1


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        run_gradient_flow(_small(N_x=15))


def test_explicit_solute_overrides_spec():
    cfg = _small(initial="sphere", initial_radius=3.0, max_steps=3)
    res = run_gradient_flow(cfg, single_ion(1.0))
    assert res.final_energy.f_ele < 0


@pytest.mark.slow
def test_single_ion_matches_radial_equilibrium():
    # Q = 1 at epsilon = 0.5: the one-ion radius is 2.798 (radial solver and table)
    cfg = RunConfig(L_x=8.0, L_y=8.0, L_z=8.0, epsilon=0.5, dt=0.05, scheme="ETD1RK", initial="sphere",
                    initial_radius=3.0, solute=SoluteSpec(kind="ion", charge=1.0), log_every=100)
    res = run_gradient_flow(cfg)
    g = Grid.from_config(cfg)
    assert res.converged
    radius = (3 * solvent_excluded_volume(res.phi, g) / (4 * np.pi)) ** (1 / 3)
    assert radius == pytest.approx(2.79823, rel=0.03)
    X, Y, Z = g.mesh()
    far = np.abs(np.sqrt(X**2 + Y**2 + Z**2) - radius) > 5 * cfg.epsilon
    dev = np.minimum(np.abs(res.phi[far]), np.abs(res.phi[far] - 1.0))
    assert dev.max() < 1e-3
    assert -0.1 <= res.phi.min() and res.phi.max() <= 1.1
