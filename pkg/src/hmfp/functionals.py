"""Conserved and variational scalars of the kinetic flow.

Mass, momentum, kinetic and field energies, Casimir integrals, the free
energy, the shift-minimized weighted L1 distance used by the stability
experiments, and the Csiszar-Kullback pair.  Everything is a pure midpoint
quadrature over a DistributionField; the potential enters only through its
derivative samples, so the sign convention

    hamiltonian = kinetic - potential_energy

is an identity of the implementation, not a numerical coincidence.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .casimir import CasimirSpec
from .grid import DistributionField, Potential, integrate, weighted_l1_distance
from .interaction import solve_potential


def mass(f: DistributionField) -> float:
    """Total integral of the field."""
    return integrate(f)


def momentum(f: DistributionField) -> float:
    """First velocity moment of the field."""
    g = f.grid
    return float((f.values @ g.v).sum()) * g.cell_area


def kinetic_energy(f: DistributionField) -> float:
    """Integral of v**2/2 times the field."""
    g = f.grid
    return 0.5 * float((f.values @ (g.v ** 2)).sum()) * g.cell_area


def potential_energy(f: DistributionField, potential: Potential | None = None) -> float:
    """Half the squared L2 norm of the self-consistent field phi'.

    Pass the potential when the caller already solved it; otherwise it is
    recomputed here.
    """
    if potential is None:
        potential = solve_potential(f)
    g = f.grid
    return 0.5 * float(potential.derivative @ potential.derivative) * g.d_theta


def hamiltonian(f: DistributionField, potential: Potential | None = None) -> float:
    """Kinetic energy minus field energy (the attractive sign convention)."""
    return kinetic_energy(f) - potential_energy(f, potential)


def casimir_integral(f: DistributionField, spec: CasimirSpec) -> float:
    """Integral of j(f); vanishing cells contribute 0 in both families."""
    return float(spec.j(f.values).sum()) * f.grid.cell_area


def free_energy_J(f: DistributionField, spec: CasimirSpec) -> float:
    """Hamiltonian plus Casimir integral."""
    return hamiltonian(f) + casimir_integral(f, spec)


def orbital_distance(
    f: DistributionField, g: DistributionField
) -> tuple[float, float]:
    """Weighted L1 distance minimized over grid-aligned cyclic shifts of f.

    The candidate with shift index s compares f(theta + s*d_theta, v) against
    g; all n_theta candidates are scanned and ties go to the smallest
    nonnegative shift.  Returns (distance, shift angle in [0, 2*pi)).
    """
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    grid = f.grid
    w = 1.0 + grid.v ** 2
    best = np.inf
    best_s = 0
    for s in range(grid.n_theta):
        shifted = np.roll(f.values, -s, axis=0)
        d = float((np.abs(shifted - g.values) @ w).sum()) * grid.cell_area
        if d < best:
            best = d
            best_s = s
    return best, best_s * grid.d_theta


def csiszar_kullback_gap(
    f: DistributionField, f0: DistributionField
) -> tuple[float, float]:
    """Both sides of the relative-entropy control of the L1 distance.

    Returns (lhs, rhs) = (squared L1 distance, 2*M times the relative
    entropy of f against f0); the caller asserts lhs <= rhs.  Raises when f
    charges cells where f0 vanishes or when the masses differ beyond 1e-8
    relative, since the inequality needs both.
    """
    if f.grid != f0.grid:
        raise ValueError("fields live on different grids")
    support = f.values > 0.0
    if np.any(support & (f0.values == 0.0)):
        raise ValueError("f is not supported inside the support of f0")
    m, m0 = integrate(f), integrate(f0)
    if abs(m - m0) > 1e-8 * max(m, m0):
        raise ValueError(f"masses differ: {m!r} vs {m0!r}")
    area = f.grid.cell_area
    lhs = (float(np.abs(f.values - f0.values).sum()) * area) ** 2
    ratio = np.where(support, f.values / np.where(support, f0.values, 1.0), 1.0)
    rhs = 2.0 * m * float((f.values * np.log(ratio)).sum()) * area
    return lhs, rhs


# ---------------------------------------------------------------------------
# Diagnostics rows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One row of scalar diagnostics at a fixed time."""

    time: float
    mass: float
    momentum: float
    kinetic: float
    potential_energy: float
    hamiltonian: float
    casimir: float
    l_infinity: float

    CSV_HEADER = "time,mass,momentum,kinetic,potential_energy,hamiltonian,casimir,l_infinity"

    def to_csv(self) -> str:
        return ",".join(f"{getattr(self, f.name):.17g}" for f in fields(self))


def diagnostics(
    f: DistributionField, spec: CasimirSpec, time: float = 0.0,
    potential: Potential | None = None,
) -> DiagnosticsRecord:
    """Evaluate every diagnostic scalar of a field at the given time."""
    if potential is None:
        potential = solve_potential(f)
    kin = kinetic_energy(f)
    pot = potential_energy(f, potential)
    return DiagnosticsRecord(
        time=time,
        mass=mass(f),
        momentum=momentum(f),
        kinetic=kin,
        potential_energy=pot,
        hamiltonian=kin - pot,
        casimir=casimir_integral(f, spec),
        l_infinity=float(f.values.max()),
    )


def write_diagnostics_csv(records, path) -> None:
    """Write records to CSV with the canonical header line."""
    with open(path, "w") as fh:
        fh.write(DiagnosticsRecord.CSV_HEADER + "\n")
        for rec in records:
            fh.write(rec.to_csv() + "\n")


def read_diagnostics_csv(path) -> list[DiagnosticsRecord]:
    """Read back a diagnostics CSV written by write_diagnostics_csv."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != DiagnosticsRecord.CSV_HEADER:
            raise ValueError(f"{path}: unexpected diagnostics header {header!r}")
        out = []
        for line in fh:
            if line.strip():
                out.append(DiagnosticsRecord(*map(float, line.split(","))))
    return out
