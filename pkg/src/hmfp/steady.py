"""Variational steady states of the attractive kinetic model.

The constructions all share one object: the profile map that turns a
potential phi and Lagrange multipliers into the candidate minimizer

    F(theta, v) = (j')^{-1}((lambda - v**2/2 - phi(theta))_+ / |mu|)

(power families; |mu| = 1 in the one-constraint problem) or its exponential
cousin exp(lambda - v**2/2 - phi) for the entropy generator.  Because every
builtin generator has monomial or exponential structure, all velocity
integrals of the profile reduce to closed forms in a = (lambda - phi)_+, so
the multiplier equations are solved on exact one-dimensional maps and only
the theta dependence is discrete.  The expensive grid sampling happens once,
when a profile is materialized as a DistributionField.

Multiplier equations are solved by bracketing bisection throughout: the maps
are strictly monotone but their derivatives are kinked, so bisection is the
unconditionally safe choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .casimir import ENTROPY, CasimirSpec, positive_part_inverse_derivative
from .errors import ConvergenceError, SolverAbort
from .functionals import casimir_integral
from .grid import DistributionField, PhaseGrid, Potential
from .interaction import density, solve_potential

TWO_PI = 2.0 * np.pi
SQRT_TWO_PI = math.sqrt(2.0 * math.pi)

# Gauss-Legendre rule for the incomplete support integrals of the tail report.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Multipliers:
    """Lagrange multipliers (lam, mu); mu is None in the one-constraint problem."""

    lam: float
    mu: float | None = None

    def __post_init__(self):
        if self.mu is not None and not self.mu < 0.0:
            raise ValueError(f"mu must be strictly negative, got {self.mu}")


@dataclass(frozen=True)
class ConstraintSet:
    """Mass constraint m1, and optionally the Casimir constraint mj."""

    m1: float
    mj: float | None = None

    def __post_init__(self):
        if not self.m1 > 0.0:
            raise ValueError(f"m1 must be positive, got {self.m1}")
        if self.mj is not None and not self.mj > 0.0:
            raise ValueError(f"mj must be positive, got {self.mj}")


@dataclass(frozen=True)
class SteadyStateResult:
    """Converged self-consistent state with its convergence report."""

    field: DistributionField
    potential: Potential
    multipliers: Multipliers
    fixed_point_residual: float
    iterations: int
    discarded_tail_mass: float


@dataclass(frozen=True)
class ProfileMoments:
    """Velocity integrals of a profile, exact in v, summed over theta nodes.

    mass            integral of F
    casimir         integral of j(F)
    kinetic_moment  integral of v**2 F (not halved)
    inner_product   integral of F j'(F)
    tail_mass       part of the mass outside |v| <= v_max
    """

    mass: float
    casimir: float
    kinetic_moment: float
    inner_product: float
    tail_mass: float


@dataclass(frozen=True)
class OdeProfileResult:
    """Periodic-orbit candidate from the profile ODE and its closure defect."""

    potential: Potential
    defect: float


# ---------------------------------------------------------------------------
# Closed-form velocity integrals
# ---------------------------------------------------------------------------


def _beta_half(m: float) -> float:
    """B(m) = integral of (1-u**2)**m over [0, 1]."""
    return math.sqrt(math.pi) * math.gamma(m + 1.0) / (2.0 * math.gamma(m + 1.5))


def _incomplete_beta_half(k: float, u0: np.ndarray) -> np.ndarray:
    """Integral of (1-u**2)**k over [u0, 1], per entry, by Gauss-Legendre."""
    half = 0.5 * (1.0 - u0)
    u = u0[:, None] + half[:, None] * (_GL_NODES[None, :] + 1.0)
    return (np.maximum(1.0 - u * u, 0.0) ** k) @ _GL_WEIGHTS * half


def profile_moments(
    phi: Potential, spec: CasimirSpec, multipliers: Multipliers
) -> ProfileMoments:
    """Exact-in-v moments of the profile attached to (phi, multipliers).

    The velocity integrals run over the whole line; tail_mass reports how
    much of the mass falls outside the grid's velocity window, which is what
    a grid sampling of the profile would discard.
    """
    g = phi.grid
    lam = multipliers.lam
    d_theta = g.d_theta
    if spec.family == ENTROPY:
        if multipliers.mu is not None:
            raise ValueError("the entropy family carries no mu multiplier")
        rows = SQRT_TWO_PI * np.exp(lam - phi.values)
        mass_rows = rows
        casimir_rows = rows * (lam - phi.values - 0.5)
        kinetic_rows = rows
        inner_rows = casimir_rows + mass_rows
        tail_rows = rows * math.erfc(g.v_max / math.sqrt(2.0))
    else:
        p = spec.p
        k = 1.0 / (p - 1.0)
        s = 1.0 if multipliers.mu is None else -multipliers.mu
        a = np.maximum(lam - phi.values, 0.0)
        b_k = _beta_half(k)
        b_k1 = _beta_half(k + 1.0)
        scale = (p * s) ** (-k)
        root2 = math.sqrt(2.0)
        with np.errstate(over="ignore"):
            a_low = a ** (k + 0.5)
            a_high = a ** (k + 1.5)
            mass_rows = 2.0 * root2 * b_k * scale * a_low
            casimir_rows = 2.0 * root2 * b_k1 * (p * s) ** (-(k + 1.0)) * a_high
            kinetic_rows = 4.0 * root2 * (b_k - b_k1) * scale * a_high
        inner_rows = p * casimir_rows
        edge = np.sqrt(2.0 * a)
        if np.any(edge > g.v_max):
            u0 = np.minimum(g.v_max / np.maximum(edge, 1e-300), 1.0)
            tail_rows = 2.0 * root2 * scale * a_low * _incomplete_beta_half(k, u0)
        else:
            tail_rows = np.zeros_like(a)
    return ProfileMoments(
        mass=float(mass_rows.sum()) * d_theta,
        casimir=float(casimir_rows.sum()) * d_theta,
        kinetic_moment=float(kinetic_rows.sum()) * d_theta,
        inner_product=float(inner_rows.sum()) * d_theta,
        tail_mass=float(tail_rows.sum()) * d_theta,
    )


def _profile_mass(phi: Potential, spec: CasimirSpec, lam: float, s: float | None) -> float:
    """Mass map K: total mass of the profile, exact in v (s = |mu| or None)."""
    if spec.family == ENTROPY:
        return SQRT_TWO_PI * float(np.exp(lam - phi.values).sum()) * phi.grid.d_theta
    k = 1.0 / (spec.p - 1.0)
    a = np.maximum(lam - phi.values, 0.0)
    with np.errstate(over="ignore"):
        total = float((a ** (k + 0.5)).sum())
        return (
            2.0 * math.sqrt(2.0) * _beta_half(k) * (spec.p * (s or 1.0)) ** (-k)
            * total * phi.grid.d_theta
        )


def _profile_casimir(phi: Potential, spec: CasimirSpec, lam: float, s: float) -> float:
    """Casimir map G at fixed multipliers, exact in v (power families)."""
    k = 1.0 / (spec.p - 1.0)
    a = np.maximum(lam - phi.values, 0.0)
    with np.errstate(over="ignore"):
        total = float((a ** (k + 1.5)).sum())
        return (
            2.0 * math.sqrt(2.0) * _beta_half(k + 1.0) * (spec.p * s) ** (-(k + 1.0))
            * total * phi.grid.d_theta
        )


def build_F_phi(
    phi: Potential, spec: CasimirSpec, multipliers: Multipliers
) -> DistributionField:
    """Sample the profile attached to (phi, multipliers) on the grid."""
    g = phi.grid
    e = multipliers.lam - 0.5 * g.v[np.newaxis, :] ** 2 - phi.values[:, np.newaxis]
    if spec.family == ENTROPY:
        if multipliers.mu is not None:
            raise ValueError("the entropy family carries no mu multiplier")
        values = np.exp(e)
    else:
        s = 1.0 if multipliers.mu is None else -multipliers.mu
        values = positive_part_inverse_derivative(spec, e / s)
    return DistributionField(g, values)


# ---------------------------------------------------------------------------
# Bisection plumbing
# ---------------------------------------------------------------------------


def _bisect_increasing(fn, target, lo, hi, grow_lo, grow_hi, rel_tol, what):
    """Root of fn(x) = target for increasing fn, with bracket expansion.

    grow_lo / grow_hi push the endpoints out geometrically until the bracket
    straddles the target; then plain bisection runs until the function value
    is within rel_tol relative of the target, capped at 200 steps each phase.
    """
    f_lo = fn(lo)
    for _ in range(200):
        if f_lo <= target:
            break
        lo = grow_lo(lo)
        f_lo = fn(lo)
    else:
        raise ConvergenceError(f"{what}: could not bracket target from below")
    f_hi = fn(hi)
    for _ in range(200):
        if f_hi >= target:
            break
        hi = grow_hi(hi)
        f_hi = fn(hi)
    else:
        raise ConvergenceError(f"{what}: could not bracket target from above")
    tol = rel_tol * abs(target)
    if abs(f_lo - target) <= tol:
        return lo
    if abs(f_hi - target) <= tol:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if abs(f_mid - target) <= tol:
            return mid
        if f_mid < target:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"{what}: bisection did not reach tolerance {rel_tol:g} in 200 steps "
        f"(residual {abs(f_mid - target):g}); the velocity window may be too "
        f"small or the constraint unreachable"
    )


def _lambda_bracket_growers(min_phi: float):
    """Geometric bracket growth for the lambda solves, shared by both loops.

    Below: step down from min_phi with doubling decrements (the mass map is
    0 below min_phi for power families and decays exponentially for entropy,
    so both directions terminate).  Above: double the offset from min_phi.
    """
    step = [1.0]

    def grow_lo(lo):
        s = step[0]
        step[0] = 2.0 * s
        return lo - s

    def grow_hi(hi):
        return min_phi + 2.0 * (hi - min_phi)

    return grow_lo, grow_hi


def solve_lambda_one(phi: Potential, spec: CasimirSpec, m1: float) -> float:
    """Multiplier of the one-constraint profile: mass(lambda) = m1.

    Bisection on the strictly increasing exact mass map, bracket grown
    geometrically from [min phi + eps, min phi + 1], relative tolerance
    1e-10 on the mass.
    """
    if not m1 > 0.0:
        raise ValueError("m1 must be positive")
    min_phi = float(phi.values.min())
    grow_lo, grow_hi = _lambda_bracket_growers(min_phi)
    return _bisect_increasing(
        lambda lam: _profile_mass(phi, spec, lam, None),
        m1,
        min_phi + 1e-12,
        min_phi + 1.0,
        grow_lo,
        grow_hi,
        rel_tol=1e-10,
        what="solve_lambda_one",
    )


def _lambda_of_mu(phi: Potential, spec: CasimirSpec, m1: float, mu: float) -> float:
    """Inner loop of the two-constraint solve: lambda with mass = m1 at fixed mu."""
    min_phi = float(phi.values.min())
    grow_lo, grow_hi = _lambda_bracket_growers(min_phi)
    return _bisect_increasing(
        lambda lam: _profile_mass(phi, spec, lam, -mu),
        m1,
        min_phi + 1e-12,
        min_phi + 1.0,
        grow_lo,
        grow_hi,
        rel_tol=1e-12,
        what="lambda(mu)",
    )


def solve_multipliers_two(
    phi: Potential, spec: CasimirSpec, constraints: ConstraintSet
) -> Multipliers:
    """Multiplier pair of the two-constraint profile.

    Nested bisections: the inner loop pins lambda(mu) on the mass map, the
    outer loop moves mu < 0 along the strictly increasing Casimir map until
    it hits mj.  The outer bracket starts at [-1, -1e-6] and expands
    geometrically both ways.
    """
    if not spec.h3:
        raise ValueError("the two-constraint solve needs a generator with h3")
    if constraints.mj is None:
        raise ValueError("two-constraint solve requires mj")

    def casimir_of_mu(mu: float) -> float:
        lam = _lambda_of_mu(phi, spec, constraints.m1, mu)
        return _profile_casimir(phi, spec, lam, -mu)

    mu = _bisect_increasing(
        casimir_of_mu,
        constraints.mj,
        -1.0,
        -1e-6,
        lambda lo: 2.0 * lo,
        lambda hi: 0.5 * hi,
        rel_tol=1e-10,
        what="solve_multipliers_two",
    )
    return Multipliers(lam=_lambda_of_mu(phi, spec, constraints.m1, mu), mu=mu)


def solve_state_multipliers(
    phi: Potential, spec: CasimirSpec, constraints: ConstraintSet
) -> Multipliers:
    """Dispatch to the one- or two-constraint multiplier solve."""
    if constraints.mj is None:
        return Multipliers(lam=solve_lambda_one(phi, spec, constraints.m1))
    return solve_multipliers_two(phi, spec, constraints)


# ---------------------------------------------------------------------------
# Auxiliary (dual) energies
# ---------------------------------------------------------------------------


def auxiliary_energy_two(
    phi: Potential, spec: CasimirSpec, multipliers: Multipliers
) -> float:
    """Dual energy of the two-constraint problem at a trial potential:

        integral of (v**2/2 + phi) F^phi  +  (1/2) integral of phi'**2,

    with F^phi sampled on the grid and paired with phi by the same midpoint
    quadrature the Hamiltonian uses, so the gap to hamiltonian(F^phi) is the
    exact half squared L2 distance of the two field derivatives.
    """
    F = build_F_phi(phi, spec, multipliers)
    g = phi.grid
    transport = 0.5 * float((F.values @ (g.v ** 2)).sum()) * g.cell_area
    pairing = float(phi.values @ density(F).values) * g.d_theta
    half_field = 0.5 * float(phi.derivative @ phi.derivative) * g.d_theta
    return transport + pairing + half_field


def auxiliary_energy_one(phi: Potential, spec: CasimirSpec, lam: float) -> float:
    """Dual energy of the one-constraint problem: the two-constraint form
    plus the Casimir integral of the profile."""
    mult = Multipliers(lam=lam)
    F = build_F_phi(phi, spec, mult)
    return auxiliary_energy_two(phi, spec, mult) + casimir_integral(F, spec)


# ---------------------------------------------------------------------------
# Self-consistent construction
# ---------------------------------------------------------------------------


def self_consistent_solve(
    spec: CasimirSpec,
    constraints: ConstraintSet,
    seed_potential: Potential,
    damping: float = 0.5,
    tol: float = 1e-9,
    max_iter: int = 10000,
) -> SteadyStateResult:
    """Damped fixed-point iteration for the self-consistent potential.

    Args:
        spec: Casimir generator.
        constraints: mass (and optional Casimir) constraint values.
        seed_potential: starting guess; multipliers are re-solved each step.
        damping: update weight in (0, 1]; phi_{k+1} = (1-damping) phi_k +
            damping phi_{F^{phi_k}}.
        tol: stop when the self-consistency defect sup|phi_{F^phi} - phi|
            drops to tol (the applied increment is damping times that).
        max_iter: iteration cap, raising ConvergenceError past it.

    Returns:
        SteadyStateResult with the field, its potential, multipliers, the
        final increment sup-norm, the iteration count, and the mass the
        velocity truncation discards.  The state is rolled so the potential
        minimum sits at theta = pi, fixing the translation freedom.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    g = seed_potential.grid
    phi = seed_potential
    for iterations in range(1, max_iter + 1):
        mult = solve_state_multipliers(phi, spec, constraints)
        field = build_F_phi(phi, spec, mult)
        phi_f = solve_potential(field)
        defect = float(np.max(np.abs(phi_f.values - phi.values)))
        if defect <= tol:
            shift = (g.n_theta // 2 - int(np.argmin(phi.values))) % g.n_theta
            tail = profile_moments(phi, spec, mult).tail_mass
            return SteadyStateResult(
                field=DistributionField(g, np.roll(field.values, shift, axis=0)),
                potential=Potential(
                    g,
                    np.roll(phi.values, shift),
                    np.roll(phi.derivative, shift),
                ),
                multipliers=mult,
                fixed_point_residual=damping * defect,
                iterations=iterations,
                discarded_tail_mass=tail,
            )
        phi = Potential(
            g,
            (1.0 - damping) * phi.values + damping * phi_f.values,
            (1.0 - damping) * phi.derivative + damping * phi_f.derivative,
        )
    raise ConvergenceError(
        f"self-consistent iteration did not converge in {max_iter} steps "
        f"(last defect {defect:g}); consider a smaller damping"
    )


# ---------------------------------------------------------------------------
# ODE characterization of one-constraint profiles
# ---------------------------------------------------------------------------


def ode_force(spec: CasimirSpec, m1: float, e):
    """Right-hand side of the profile ODE psi'' = force(psi).

    The force is the exact velocity integral of the shifted profile minus
    the homogeneous background m1/(2 pi).
    """
    e = np.asarray(e, dtype=float)
    if spec.family == ENTROPY:
        out = SQRT_TWO_PI * np.exp(-e) - m1 / TWO_PI
    else:
        k = 1.0 / (spec.p - 1.0)
        c = 2.0 * math.sqrt(2.0) * _beta_half(k) * spec.p ** (-k)
        out = c * np.maximum(-e, 0.0) ** (k + 0.5) - m1 / TWO_PI
    return out if out.ndim else float(out)


def ode_force_primitive(spec: CasimirSpec, m1: float, e):
    """Antiderivative of ode_force, fixing the conserved ODE energy
    (1/2) psi'**2 - primitive(psi)."""
    e = np.asarray(e, dtype=float)
    if spec.family == ENTROPY:
        out = -SQRT_TWO_PI * np.exp(-e) - m1 * e / TWO_PI
    else:
        k = 1.0 / (spec.p - 1.0)
        c = 2.0 * math.sqrt(2.0) * _beta_half(k) * spec.p ** (-k)
        out = -c * np.maximum(-e, 0.0) ** (k + 1.5) / (k + 1.5) - m1 * e / TWO_PI
    return out if out.ndim else float(out)


def ode_profile_solve(
    grid: PhaseGrid,
    spec: CasimirSpec,
    m1: float,
    psi_min: float,
    theta_anchor: float = 0.0,
) -> OdeProfileResult:
    """March the profile ODE once around the circle from a candidate minimum.

    Fixed-step RK4 with the grid spacing as step, starting from
    (psi, psi') = (psi_min, 0) at the node nearest theta_anchor.  The
    returned potential holds the node samples recentred to zero mean with
    the marched derivative; the defect |psi(2 pi) - psi(0)| +
    |psi'(2 pi) - psi'(0)| measures how far the orbit is from periodic,
    and only small-defect profiles are admissible steady states.
    """
    n = grid.n_theta
    h = grid.d_theta
    anchor = int(round(theta_anchor / h)) % n
    psi = np.empty(n + 1)
    dpsi = np.empty(n + 1)
    y, z = float(psi_min), 0.0
    for j in range(n + 1):
        psi[j] = y
        dpsi[j] = z
        if j == n:
            break
        k1y, k1z = z, ode_force(spec, m1, y)
        k2y, k2z = z + 0.5 * h * k1z, ode_force(spec, m1, y + 0.5 * h * k1y)
        k3y, k3z = z + 0.5 * h * k2z, ode_force(spec, m1, y + 0.5 * h * k2y)
        k4y, k4z = z + h * k3z, ode_force(spec, m1, y + h * k3y)
        y = y + h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        z = z + h * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) / 6.0
        if not (math.isfinite(y) and math.isfinite(z)) or abs(y) > 1e8:
            raise SolverAbort(f"profile ODE blew up at step {j + 1}")
    defect = abs(psi[n] - psi[0]) + abs(dpsi[n] - dpsi[0])
    values = np.empty(n)
    deriv = np.empty(n)
    idx = (anchor + np.arange(n)) % n
    values[idx] = psi[:n]
    deriv[idx] = dpsi[:n]
    values -= values.mean()
    return OdeProfileResult(potential=Potential(grid, values, deriv), defect=defect)


# ---------------------------------------------------------------------------
# Constraint renormalization
# ---------------------------------------------------------------------------


def renormalize_to_constraints(
    g: DistributionField, spec: CasimirSpec, constraints: ConstraintSet
) -> DistributionField:
    """Rescale amplitude and dilate velocity so a field meets the constraints.

    The output is gamma * g(theta, (gamma/lam) v) with lam = m1/||g|| and,
    in the two-constraint problem, gamma solving the monotone equation
    ||j(gamma g)|| / gamma = mj ||g|| / m1; the one-constraint form keeps
    gamma = 1.  Velocity resampling is linear with zero extension, followed
    by an exact mass rescale, so the mass is exact and the Casimir value is
    met up to the resampling error.
    """
    grid = g.grid
    total = float(g.values.sum()) * grid.cell_area
    if not total > 0.0:
        raise ValueError("cannot renormalize the zero field")
    lam = constraints.m1 / total
    if constraints.mj is None:
        gamma = 1.0
    else:
        if not spec.h3:
            raise ValueError("the two-constraint renormalization needs h3")
        target = constraints.mj * total / constraints.m1
        j_norm = float(spec.j(g.values).sum()) * grid.cell_area

        def casimir_per_gamma(gamma: float) -> float:
            return float(spec.j(gamma * g.values).sum()) * grid.cell_area / gamma

        ratio = target / j_norm
        lo = min(ratio ** (1.0 / (spec.p - 1.0)), ratio ** (1.0 / (spec.q - 1.0)))
        hi = max(ratio ** (1.0 / (spec.p - 1.0)), ratio ** (1.0 / (spec.q - 1.0)))
        gamma = _bisect_increasing(
            casimir_per_gamma,
            target,
            lo,
            hi,
            lambda x: 0.5 * x,
            lambda x: 2.0 * x,
            rel_tol=1e-10,
            what="renormalize gamma",
        )
    stretch = gamma / lam
    resampled = np.empty_like(g.values)
    sample_at = stretch * grid.v
    for i in range(grid.n_theta):
        resampled[i] = np.interp(sample_at, grid.v, g.values[i], left=0.0, right=0.0)
    resampled *= gamma
    mass = float(resampled.sum()) * grid.cell_area
    if not mass > 0.0:
        raise ValueError("renormalization dilated all mass out of the grid")
    resampled *= constraints.m1 / mass
    return DistributionField(grid, resampled)
