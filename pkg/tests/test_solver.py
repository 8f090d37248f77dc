"""Split-step transport: advection kernels, invariants, convergence."""

import numpy as np
import pytest

from hmfp import (
    ConstraintSet,
    DistributionField,
    Potential,
    SolverAbort,
    SolverConfig,
    StepLosses,
    advect_theta,
    advect_v,
    entropy_spec,
    evolve,
    field_from_function,
    make_grid,
    mass,
    momentum,
    self_consistent_solve,
    strang_step,
    weighted_l1_distance,
)

from conftest import default_grid


def wavy_gaussian(grid):
    return field_from_function(
        grid, lambda th, v: np.exp(-0.5 * v * v) * (1.0 + 0.3 * np.cos(th)))


# ---------------------------------------------------------------------------
# advection kernels


def test_advect_theta_zero_dt_is_identity():
    f = wavy_gaussian(default_grid())
    for mode in ("linear", "cubic"):
        out = advect_theta(f, 0.0, mode)
        assert np.array_equal(out.values, f.values)


def test_advect_v_zero_force_is_identity():
    g = default_grid()
    f = wavy_gaussian(g)
    for mode in ("linear", "cubic"):
        out, losses = advect_v(f, np.zeros(g.n_theta), 0.5, mode)
        assert np.array_equal(out.values, f.values)
        assert losses.outflow == 0.0
        assert losses.clipped_mass == 0.0


def test_zero_field_stays_zero():
    g = default_grid()
    z = DistributionField(g, np.zeros((g.n_theta, g.n_v)))
    out, losses = advect_v(z, 0.3 * np.sin(g.theta), 0.4, "cubic")
    assert np.abs(out.values).max() == 0.0
    assert losses.outflow == 0.0
    out2 = advect_theta(z, 0.2, "linear")
    assert np.abs(out2.values).max() == 0.0


def test_node_aligned_theta_shift_is_exact():
    """A row whose displacement is exactly one cell lands on nodes."""
    g = default_grid()
    f = wavy_gaussian(g)
    j = 40
    dt = g.d_theta / g.v[j]
    out = advect_theta(f, dt, "linear")
    err = np.abs(out.values[:, j] - np.roll(f.values[:, j], 1)).max()
    assert err <= 1e-12


def test_advect_v_whole_cell_shift_drains_bottom_column():
    g = default_grid()
    f = wavy_gaussian(g)
    dt = 0.25
    phi_prime = np.full(g.n_theta, g.d_v / dt)
    out, losses = advect_v(f, phi_prime, dt, "linear")
    assert np.array_equal(out.values[:, :-1], f.values[:, 1:])
    assert np.all(out.values[:, -1] == 0.0)
    lost = float(f.values[:, 0].sum()) * g.cell_area
    assert losses.outflow == pytest.approx(lost, rel=1e-13)


def test_theta_advection_conserves_column_mass():
    g = default_grid()
    f = wavy_gaussian(g)
    before = f.values.sum(axis=0)
    for mode, dt in (("linear", 0.17), ("cubic", 0.31)):
        out = advect_theta(f, dt, mode)
        after = out.values.sum(axis=0)
        assert np.abs(after - before).max() <= 1e-13 * before.max()


def test_v_advection_mass_accounting_is_closed():
    """Mass lost by the field equals outflow minus the clipping refund."""
    g = default_grid()
    f = wavy_gaussian(g)
    for mode in ("linear", "cubic"):
        out, losses = advect_v(f, 0.4 * np.cos(g.theta) + 0.2, 0.3, mode)
        gap = mass(f) - mass(out) - (losses.outflow - losses.clipped_mass)
        assert abs(gap) <= 1e-12


def test_linear_advection_is_positive_and_bounded():
    g = default_grid()
    f = wavy_gaussian(g)
    top = f.values.max()
    out = advect_theta(f, 0.23, "linear")
    out2, _ = advect_v(out, 0.5 * np.sin(g.theta), 0.2, "linear")
    for w in (out.values, out2.values):
        assert w.min() >= 0.0
        assert w.max() <= top * (1.0 + 1e-14)


def test_cubic_clipping_is_reported():
    g = default_grid()
    values = np.zeros((g.n_theta, g.n_v))
    values[:, g.n_v // 2] = 1.0
    f = DistributionField(g, values)
    dt = 0.2
    out, losses = advect_v(f, np.full(g.n_theta, 0.5 * g.d_v / dt), dt, "cubic")
    assert losses.clipped_mass > 0.0
    assert out.values.min() >= 0.0


def test_full_period_return_oracle():
    """Exact free transport is matched at the expected interpolation order.

    A row whose speed divides the circle returns to its start after one
    lap; neighbouring rows probe fractional shifts.  The sup error against
    the analytic transport contracts at second order for linear weights
    and fourth order for cubic weights.
    """
    def prof(th, v):
        return np.exp(-0.5 * v * v) * (1.0 + 0.5 * np.cos(th) + 0.2 * np.sin(2 * th))

    errs = {}
    for n in (64, 128):
        g = make_grid(n, n, 6.0)
        f = field_from_function(g, prof)
        T = 2.0 * np.pi / g.v[int(0.8 * n)]
        exact = prof(g.theta[:, None] - g.v[None, :] * T, g.v[None, :])
        for mode in ("linear", "cubic"):
            out = advect_theta(f, T, mode)
            errs[mode, n] = np.abs(out.values - exact).max()
    assert errs["linear", 64] <= 2e-3
    assert errs["cubic", 64] <= 2e-5
    assert errs["linear", 128] <= 0.35 * errs["linear", 64]
    assert errs["cubic", 128] <= 0.15 * errs["cubic", 64]


def test_constant_force_momentum_transfer():
    """A uniform force changes momentum by force times mass times dt."""
    g = make_grid(128, 128, 6.0)
    f = field_from_function(
        g, lambda th, v: np.exp(-0.5 * (v - 0.5) ** 2) * (1.0 + 0.2 * np.cos(th)))
    c, dt = 0.37, 0.2
    for mode in ("linear", "cubic"):
        out, _ = advect_v(f, np.full(g.n_theta, c), dt, mode)
        dP = momentum(out) - momentum(f)
        assert abs(dP + c * dt * mass(f)) <= 1e-6


# ---------------------------------------------------------------------------
# strang steps on steady data


def test_homogeneous_state_is_invariant_per_step():
    g = make_grid(256, 256, 6.0)
    hom = field_from_function(g, lambda th, v: np.exp(-0.5 * v * v) * np.ones_like(th))
    w0 = weighted_l1_distance(hom, DistributionField(g, np.zeros_like(hom.values)))
    for mode in ("linear", "cubic"):
        out, _ = strang_step(hom, 0.05, mode)
        assert np.abs(out.values - hom.values).max() <= 1e-12
        assert weighted_l1_distance(out, hom) / w0 < 1e-6


def test_inhomogeneous_steady_state_drift_is_small_and_third_order():
    """One split step barely moves a converged steady state.

    The splitting defect on a critical point scales like dt cubed, so
    shrinking dt from 0.05 to 0.02 must shrink the drift by about
    (0.02 / 0.05)^3 = 0.064.
    """
    g = make_grid(256, 256, 6.0)
    seed = Potential(g, -0.5 * np.cos(g.theta), 0.5 * np.sin(g.theta))
    res = self_consistent_solve(entropy_spec(), ConstraintSet(m1=2.2 * np.pi), seed)
    f0 = res.field
    w0 = weighted_l1_distance(f0, DistributionField(g, np.zeros_like(f0.values)))
    drift = {}
    for dt in (0.05, 0.02):
        f1, _ = strang_step(f0, dt, "cubic")
        drift[dt] = weighted_l1_distance(f1, f0) / w0
    assert drift[0.05] < 5e-5
    assert drift[0.02] / drift[0.05] <= 0.15


def test_dt_halving_contracts_error_at_second_order():
    g = make_grid(128, 128, 6.0)
    f0 = field_from_function(
        g, lambda th, v: np.exp(-0.5 * v * v) * (1.0 + 0.5 * np.cos(th)))
    ref = evolve(f0, SolverConfig(dt=0.00625, t_end=1.0, interpolation="cubic")).field
    errs = []
    for dt in (0.1, 0.05):
        out = evolve(f0, SolverConfig(dt=dt, t_end=1.0, interpolation="cubic")).field
        errs.append(weighted_l1_distance(out, ref))
    ratio = errs[0] / errs[1]
    assert 2.8 <= ratio <= 5.0


def test_galilean_boost_shifts_the_solution():
    """Boosting the datum by two v cells translates the run accordingly.

    With v_max = 2 pi the boost speed 2 d_v moves the pattern four theta
    cells per unit time, so the boosted run is the unboosted one rolled
    in theta and shifted in v, up to interpolation error.
    """
    n = 64
    g = make_grid(n, n, 2 * np.pi)
    f0 = field_from_function(
        g, lambda th, v: np.exp(-0.5 * v * v) * (1.0 + 0.2 * np.cos(th)))
    shifted0 = DistributionField(g, np.concatenate(
        [np.zeros((n, 2)), f0.values[:, :-2]], axis=1))
    cfg = SolverConfig(dt=0.01, t_end=1.0)
    a = evolve(f0, cfg).field
    b = evolve(shifted0, cfg).field
    pred = np.roll(a.values, 4, axis=0)
    pred = np.concatenate([np.zeros((n, 2)), pred[:, :-2]], axis=1)
    dev = weighted_l1_distance(b, DistributionField(g, pred)) / mass(f0)
    assert dev <= 2e-2


# ---------------------------------------------------------------------------
# evolve driver


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=-0.1, t_end=1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.6, t_end=1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_end=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_end=1.0, interpolation="quintic")
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_end=1.0, record_every=0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_end=1.0, record_every=1.5)


def test_evolve_zero_horizon_returns_the_datum():
    f0 = wavy_gaussian(default_grid())
    res = evolve(f0, SolverConfig(dt=0.1, t_end=0.0), t_start=3.0)
    assert res.steps == 0
    assert res.time == 3.0
    assert np.array_equal(res.field.values, f0.values)
    assert res.boundary_loss == 0.0


def test_evolve_record_cadence_and_times():
    f0 = wavy_gaussian(default_grid())
    rows = []
    res = evolve(f0, SolverConfig(dt=0.1, t_end=1.0, record_every=3),
                 observer=lambda rec, fld: rows.append(rec),
                 casimir=entropy_spec())
    assert res.steps == 10
    assert len(rows) == 10 // 3 + 1
    times = [r.time for r in rows]
    assert times == pytest.approx([0.0, 0.3, 0.6, 0.9])
    assert rows[0].mass == pytest.approx(mass(f0), rel=1e-14)


def test_evolve_keeps_mass_on_the_constraint():
    f0 = wavy_gaussian(default_grid())
    res = evolve(f0, SolverConfig(dt=0.05, t_end=2.0))
    assert abs(mass(res.field) - mass(f0)) <= 1e-12 * mass(f0)
    assert res.time == pytest.approx(2.0)


def test_evolve_observer_needs_a_casimir_spec():
    f0 = wavy_gaussian(default_grid())
    with pytest.raises(ValueError):
        evolve(f0, SolverConfig(dt=0.1, t_end=0.5), observer=lambda r, f: None)


@pytest.mark.filterwarnings("ignore:overflow")
def test_evolve_aborts_on_nonfinite_force():
    g = default_grid()
    f = field_from_function(
        g, lambda th, v: 1e307 * (1.0 + np.cos(th)) * np.exp(-0.5 * v * v))
    with pytest.raises(SolverAbort, match="aborted at step 1"):
        evolve(f, SolverConfig(dt=0.1, t_end=0.5))


def test_step_losses_add_componentwise():
    total = StepLosses(1.0, 2.0) + StepLosses(3.0, 4.5)
    assert total.outflow == 4.0
    assert total.clipped_mass == 6.5
