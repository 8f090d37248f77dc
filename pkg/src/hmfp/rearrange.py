"""Rearrangement machinery: distribution functions, pseudo-inverses, the
sublevel measure of the microscopic energy, and energy-monotone rearranged
fields.

The central object is the sublevel measure of e(theta, v) = v**2/2 + phi,

    a(e) = sum_i 2 sqrt(2 (e - phi_i)_+) d_theta,

which is exact in v (each theta section of the sublevel set is an interval)
and discrete only in theta.  Its inverse is computed by bisection on the
two-sided bound a_inv(s) in [s**2/(32 pi**2) + min phi,
s**2/(32 pi**2) + max phi], which brackets the root for every potential.
Rearranging a field with respect to a potential composes the pseudo-inverse
of its distribution function with this measure, giving a field that is
nonincreasing along level sets of the microscopic energy and equimeasurable
to the original up to level quantization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .grid import DistributionField, PhaseGrid, Potential
from .interaction import solve_potential
from .steady import SteadyStateResult

TWO_PI = 2.0 * np.pi

STEP = "step"
LINEAR = "linear"


# ---------------------------------------------------------------------------
# Monotone profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneProfile:
    """Nonincreasing profile sampled at increasing breakpoints.

    rule selects the evaluation between breakpoints: "step" holds the value
    of the breakpoint at or below the query (right-continuous), "linear"
    interpolates.  Queries outside the breakpoints clamp to the end values.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    rule: str = STEP

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.ndim != 1 or b.shape != v.shape or b.size == 0:
            raise ValueError("breakpoints and values must be matching 1-d vectors")
        if b.size > 1 and not np.all(np.diff(b) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if v.size > 1 and np.any(np.diff(v) > 0):
            raise ValueError("profile values must be nonincreasing")
        if self.rule not in (STEP, LINEAR):
            raise ValueError(f"unknown evaluation rule {self.rule!r}")
        b = b.copy()
        v = v.copy()
        b.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def evaluate(self, x):
        """Evaluate the profile at x (scalar or array)."""
        x = np.asarray(x, dtype=float)
        if self.rule == LINEAR:
            out = np.interp(x, self.breakpoints, self.values)
        else:
            idx = np.searchsorted(self.breakpoints, x, side="right") - 1
            out = self.values[np.clip(idx, 0, self.values.size - 1)]
        return out if out.ndim else float(out)


def save_profile(profile: MonotoneProfile, path) -> None:
    """Write a profile as two-column CSV rows (breakpoint, value)."""
    with open(path, "w") as fh:
        for b, v in zip(profile.breakpoints, profile.values):
            fh.write(f"{b:.17g},{v:.17g}\n")


def load_profile(path, rule: str = STEP) -> MonotoneProfile:
    """Read a two-column CSV profile written by save_profile."""
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    return MonotoneProfile(data[:, 0], data[:, 1], rule)


def level_grid(f: DistributionField, n_levels: int | None = None) -> np.ndarray:
    """Hybrid level ladder for distribution functions of a field.

    Linear coverage of [0, max f] with geometric refinement near 0 and near
    the maximum, at least 4 n_v levels in total, first level 0 and last
    level exactly max f.
    """
    if n_levels is None:
        n_levels = 4 * f.grid.n_v
    n_levels = max(n_levels, 4 * f.grid.n_v)
    fmax = float(f.values.max())
    if fmax == 0.0:
        return np.array([0.0])
    quarter = n_levels // 4
    lin = np.linspace(0.0, fmax, n_levels - 2 * quarter)
    low = fmax * np.geomspace(1e-8, 0.1, quarter)
    high = fmax * (1.0 - np.geomspace(1e-8, 0.1, quarter)[::-1])
    return np.unique(np.concatenate(([0.0, fmax], lin, low, high)))


def distribution_function(f: DistributionField, levels) -> MonotoneProfile:
    """Measure of the strict superlevel sets of f at the given levels.

    mu(s) counts the cells with value strictly above s, weighted by the cell
    area; ties sit below, which keeps the profile right-continuous.
    """
    levels = np.asarray(levels, dtype=float)
    if np.any(levels < 0.0):
        raise ValueError("levels must be nonnegative")
    if levels.size > 1 and not np.all(np.diff(levels) > 0):
        raise ValueError("levels must be strictly increasing")
    flat = np.sort(f.values.ravel())
    counts = flat.size - np.searchsorted(flat, levels, side="right")
    return MonotoneProfile(levels, counts * f.grid.cell_area, STEP)


def pseudo_inverse(mu: MonotoneProfile) -> MonotoneProfile:
    """Generalized inverse of a distribution-function profile.

    Returns the step profile of f#(x) = inf of the levels whose measure is
    at most x; by construction the equivalence f#(x) > t <=> mu(t) > x holds
    exactly at every sample pair.  The level ladder must reach the field
    maximum (final measure 0) so the inverse is defined for every x >= 0.
    """
    if mu.values[-1] != 0.0:
        raise ValueError("distribution profile must reach measure 0 at its top level")
    xs = mu.values[::-1]
    ts = mu.breakpoints[::-1]
    uniq = np.unique(xs)
    # among equal measures keep the smallest level: the last of each block
    last = np.searchsorted(xs, uniq, side="right") - 1
    return MonotoneProfile(uniq, ts[last], STEP)


# ---------------------------------------------------------------------------
# Sublevel measure of the microscopic energy
# ---------------------------------------------------------------------------


def sublevel_measure_a(phi: Potential, e):
    """Phase-space measure of {v**2/2 + phi < e}, exact in v."""
    e = np.asarray(e, dtype=float)
    gap = np.maximum(e[..., np.newaxis] - phi.values, 0.0)
    out = (2.0 * np.sqrt(2.0 * gap)).sum(axis=-1) * phi.grid.d_theta
    return out if out.ndim else float(out)


def inverse_sublevel_measure(phi: Potential, s):
    """Inverse of the sublevel measure by bisection on its exact bracket.

    For every potential, a_inv(s) lies between s**2/(32 pi**2) + min phi and
    s**2/(32 pi**2) + max phi; 90 bisection steps pin the root to relative
    machine precision.
    """
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    base = s * s / (32.0 * np.pi ** 2)
    lo = base + float(phi.values.min())
    hi = base + float(phi.values.max())
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        below = sublevel_measure_a(phi, mid) < s
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class EnergyMeasure:
    """Tabulated sublevel measure of a potential's microscopic energy."""

    potential: Potential
    energies: np.ndarray
    a_values: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        a = np.asarray(self.a_values, dtype=float)
        if e.shape != a.shape or e.ndim != 1:
            raise ValueError("energies and a_values must be matching 1-d vectors")
        if not np.all(np.diff(e) > 0):
            raise ValueError("energy samples must be strictly increasing")
        if np.any(np.diff(a) < 0):
            raise ValueError("sublevel measures must be nondecreasing")
        e = e.copy()
        a = a.copy()
        e.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "a_values", a)

    def a(self, e):
        return sublevel_measure_a(self.potential, e)

    def a_inverse(self, s):
        return inverse_sublevel_measure(self.potential, s)


def energy_measure(phi: Potential, n_samples: int = 256) -> EnergyMeasure:
    """Tabulate a_phi from min phi to the largest grid energy."""
    g = phi.grid
    e = np.linspace(float(phi.values.min()), float(phi.values.max()) + 0.5 * g.v_max ** 2, n_samples)
    return EnergyMeasure(phi, e, sublevel_measure_a(phi, e))


# ---------------------------------------------------------------------------
# Rearrangement
# ---------------------------------------------------------------------------


def _microscopic_energy(grid: PhaseGrid, phi: Potential) -> np.ndarray:
    return 0.5 * grid.v[np.newaxis, :] ** 2 + phi.values[:, np.newaxis]


def rearrange_with_energy(
    f: DistributionField, phi: Potential, n_levels: int | None = None
) -> DistributionField:
    """Rearrangement of f that is nonincreasing in the microscopic energy.

    Composes the pseudo-inverse of the distribution function of f (sampled
    on the hybrid level ladder, n_levels wide) with the sublevel measure of
    v**2/2 + phi(theta), pointwise on the grid.  A denser ladder tightens
    the level quantization of the output; the default keeps it at four
    levels per velocity cell.
    """
    if f.grid != phi.grid:
        raise ValueError("field and potential live on different grids")
    fsharp = pseudo_inverse(distribution_function(f, level_grid(f, n_levels)))
    return compose_profile(fsharp, f.grid, phi)


def compose_profile(
    fsharp: MonotoneProfile, grid: PhaseGrid, phi: Potential
) -> DistributionField:
    """Sample fsharp(a_phi(v**2/2 + phi)) on the grid.

    The sublevel measure is evaluated in chunks so the (cells x n_theta)
    broadcast never materializes for large grids.
    """
    e = _microscopic_energy(grid, phi).ravel()
    out = np.empty_like(e)
    chunk = 8192
    for start in range(0, e.size, chunk):
        out[start : start + chunk] = fsharp.evaluate(
            sublevel_measure_a(phi, e[start : start + chunk])
        )
    return DistributionField(grid, out.reshape(grid.n_theta, grid.n_v))


def microscopic_energy_pairing(f: DistributionField, phi: Potential) -> float:
    """Grid quadrature of (v**2/2 + phi) f."""
    g = f.grid
    kin = 0.5 * float((f.values @ (g.v ** 2)).sum())
    pot = float(phi.values @ f.values.sum(axis=1))
    return (kin + pot) * g.cell_area


def beta_overlap(f: DistributionField, g: DistributionField, t: float) -> float:
    """Measure of the cells where f <= t < g."""
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    if t < 0.0:
        raise ValueError("the level t must be nonnegative")
    return float(np.count_nonzero((f.values <= t) & (g.values > t))) * f.grid.cell_area


def equimeasurability_defect(
    f: DistributionField, g: DistributionField, levels
) -> float:
    """Sup over the levels of |mu_f - mu_g|."""
    mu_f = distribution_function(f, levels)
    mu_g = distribution_function(g, levels)
    return float(np.max(np.abs(mu_f.values - mu_g.values)))


def level_band_defect(
    f: DistributionField, g: DistributionField, levels=None
) -> float:
    """Equimeasurability defect of g against f up to one-cell-band level slack.

    On a grid the boundary of a superlevel set cuts through a band of cells,
    so levels whose gap is smaller than the variation of f across that band
    cannot be distinguished by cell counting: moving the threshold across
    one band shuffles up to a full band of measure between adjacent levels.
    For each level s this compares mu_g(s) against the closed interval of
    mu_f values over [s - delta, s + delta], where delta is the drop of the
    decreasing profile of f across one band of measure on either side of
    mu_f(s), and returns the sup over levels of the distance to that
    interval.  Identical fields give 0; genuine measure discrepancies
    survive at the level of a few cells.

    Only levels whose superlevel sets the velocity box resolves are
    compared.  At level zero the measure is that of the support, and below
    the largest value either field takes on the extreme velocity rows the
    superlevel sets spill over the box edge, where the sublevel measure of
    the energy (defined on the whole velocity line) overcounts what the
    box can hold.  Both regimes are box artifacts, not measure defects, so
    such levels are skipped; choosing v_max generously keeps the skipped
    range in the far tail.
    """
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    grid = f.grid
    area = grid.cell_area
    if levels is None:
        levels = level_grid(f)
    levels = np.asarray(levels, dtype=float)
    edge_rows = (0, grid.n_v - 1)
    floor = max(float(f.values[:, edge_rows].max()),
                float(g.values[:, edge_rows].max()), 0.0)
    levels = levels[levels > floor]
    if levels.size == 0:
        return 0.0

    sorted_f = np.sort(f.values.ravel())
    sorted_g = np.sort(g.values.ravel())
    n_cells = sorted_f.size
    # One cell band in measure: a boundary crossing every theta column.
    band = grid.n_theta * area

    def measure(sorted_values, s):
        return (n_cells - np.searchsorted(sorted_values, s, side="right")) * area

    def quantile(x):
        # Value of the k-th largest cell of f at measure depth x, zero past
        # the support.
        k = np.floor(x / area).astype(np.int64)
        out = np.where(k < n_cells,
                       sorted_f[::-1][np.clip(k, 0, n_cells - 1)], 0.0)
        return out

    mu_f = measure(sorted_f, levels)
    mu_g = measure(sorted_g, levels)
    hi_level = np.maximum(quantile(np.maximum(mu_f - band, 0.0)), levels)
    lo_level = np.minimum(quantile(mu_f + band), levels)
    upper = measure(sorted_f, lo_level)
    lower = measure(sorted_f, hi_level)
    defect = np.maximum(mu_g - upper, lower - mu_g)
    return float(np.maximum(defect, 0.0).max())


# ---------------------------------------------------------------------------
# Energy integrals against profiles (exact in v)
# ---------------------------------------------------------------------------


def _band_energy_integral(phi: Potential, e) -> np.ndarray:
    """T(e) = integral of (v**2/2 + phi) over {v**2/2 + phi < e}, exact in v.

    Per theta the section is |v| < v* = sqrt(2 (e - phi)_+) and the integral
    is v***3/3 + 2 phi v*; T is the common antiderivative structure shared
    with the convex functional B.
    """
    e = np.asarray(e, dtype=float)
    gap = np.maximum(e[..., np.newaxis] - phi.values, 0.0)
    v_star = np.sqrt(2.0 * gap)
    rows = v_star ** 3 / 3.0 + 2.0 * phi.values * v_star
    return rows.sum(axis=-1) * phi.grid.d_theta


def _measure_antiderivative(phi: Potential, e) -> np.ndarray:
    """A(e) with A' = a_phi: sum_i (4 sqrt(2)/3)(e - phi_i)_+**(3/2) d_theta."""
    e = np.asarray(e, dtype=float)
    gap = np.maximum(e[..., np.newaxis] - phi.values, 0.0)
    return (4.0 * np.sqrt(2.0) / 3.0 * gap ** 1.5).sum(axis=-1) * phi.grid.d_theta


def rearranged_energy_integral(fsharp: MonotoneProfile, phi: Potential) -> float:
    """Left side of the profile pairing identity:
    integral of (v**2/2 + phi) f#(a_phi(v**2/2 + phi)) over phase space,
    by exact v-band integrals between consecutive level boundaries."""
    edges = inverse_sublevel_measure(phi, fsharp.breakpoints)
    t_edges = _band_energy_integral(phi, edges)
    top = float(phi.values.max()) + 0.5 * phi.grid.v_max ** 2 + 1.0
    a_top = sublevel_measure_a(phi, top)
    if fsharp.breakpoints[-1] < a_top:
        t_edges = np.append(t_edges, _band_energy_integral(phi, np.array([top]))[0])
    else:
        t_edges = np.append(t_edges, t_edges[-1])
    return float(np.sum(fsharp.values * np.diff(t_edges)))


def profile_pairing_integral(fsharp: MonotoneProfile, phi: Potential) -> float:
    """Right side of the profile pairing identity:
    integral over s of a_phi^{-1}(s) f#(s), integrating a_inv between
    breakpoints by parts with the exact antiderivative of a_phi."""
    x = fsharp.breakpoints
    e = inverse_sublevel_measure(phi, x)
    top = float(phi.values.max()) + 0.5 * phi.grid.v_max ** 2 + 1.0
    a_top = sublevel_measure_a(phi, top)
    if x[-1] < a_top:
        x = np.append(x, a_top)
        e = np.append(e, top)
    segments = (x[1:] * e[1:] - x[:-1] * e[:-1]) - np.diff(
        _measure_antiderivative(phi, e)
    )
    return float(np.sum(fsharp.values[: segments.size] * segments))


def convex_B(phi: Potential, mu: float) -> float:
    """Integral of the microscopic energy over {a_phi(v**2/2 + phi) < mu}.

    Strictly convex in mu with derivative a_inv; closed form mu**3/(96 pi**2)
    for the flat potential.
    """
    if mu < 0.0:
        raise ValueError("mu must be nonnegative")
    if mu == 0.0:
        return 0.0
    return float(_band_energy_integral(phi, np.array([inverse_sublevel_measure(phi, mu)]))[0])


# ---------------------------------------------------------------------------
# Equimeasurable minimization
# ---------------------------------------------------------------------------


def equimeasurable_minimize(
    f0: DistributionField,
    damping: float = 1.0,
    tol: float = 1e-9,
    max_iter: int = 10000,
) -> SteadyStateResult:
    """Minimize the Hamiltonian over the equimeasurable class of f0.

    Damped fixed-point iteration on the potential: each step rearranges f0
    against the current potential and mixes the rearranged field's potential
    back in.  Every iterate shares f0's level profile by construction, and
    the Hamiltonian is nonincreasing along the undamped iteration up to
    level quantization.  The result carries no Lagrange multipliers (the
    constraint here is the full orbit of f0, not scalar moments), so the
    multipliers slot of the result is None.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    g = f0.grid
    fsharp = pseudo_inverse(distribution_function(f0, level_grid(f0)))
    phi = solve_potential(f0)
    for iterations in range(1, max_iter + 1):
        field = compose_profile(fsharp, g, phi)
        phi_f = solve_potential(field)
        defect = float(np.max(np.abs(phi_f.values - phi.values)))
        if defect <= tol:
            return SteadyStateResult(
                field=field,
                potential=phi,
                multipliers=None,
                fixed_point_residual=damping * defect,
                iterations=iterations,
                discarded_tail_mass=0.0,
            )
        phi = Potential(
            g,
            (1.0 - damping) * phi.values + damping * phi_f.values,
            (1.0 - damping) * phi.derivative + damping * phi_f.derivative,
        )
    raise ConvergenceError(
        f"equimeasurable minimization did not converge in {max_iter} steps "
        f"(last defect {defect:g})"
    )
