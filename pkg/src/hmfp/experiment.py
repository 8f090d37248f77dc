"""Config-driven experiment runs behind the command-line interface.

Each run resolves its configuration, claims a directory named by the
config hash under output.dir, and writes every artifact there: snapshots,
reports, CSV time series.  All writers format floats with 17 significant
digits, so identical configs and inputs reproduce identical bytes.
"""

import os

import numpy as np

from .errors import ConfigError
from .functionals import (casimir_integral, diagnostics, free_energy_J,
                          hamiltonian, mass, orbital_distance,
                          write_diagnostics_csv)
from .grid import (DistributionField, Potential, load_snapshot, save_snapshot)
from .interaction import solve_potential
from .rearrange import (equimeasurability_defect, level_band_defect,
                        level_grid, rearrange_with_energy)
from .solver import advect_v, evolve
from .steady import renormalize_to_constraints, self_consistent_solve

STABILITY_HEADER = "t,orbital_distance,shift,mass,hamiltonian,casimir"


def run_directory(cfg):
    """Create (if needed) and return the per-run output directory."""
    path = os.path.join(cfg.output_dir, cfg.hash_prefix())
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "config.txt"), "w", encoding="utf-8") as fh:
        fh.write(cfg.canonical_text())
    return path


def _require_input(input_path):
    if input_path is None:
        raise ConfigError("this command needs --input <snapshot>")
    try:
        return load_snapshot(input_path)
    except OSError as exc:
        raise ConfigError("cannot read snapshot %s: %s" % (input_path, exc)) from exc


def seed_potential(grid, amplitude):
    """Single-mode seed well of the given depth, zero mean."""
    return Potential(grid, -amplitude * np.cos(grid.theta),
                     amplitude * np.sin(grid.theta))


def perturb(field, kind, amplitude, seed):
    """Apply one of the perturbation descriptors to a field."""
    if amplitude == 0.0:
        return field
    grid = field.grid
    if kind == "density_bump":
        factor = 1.0 + amplitude * np.cos(grid.theta)
        return DistributionField(grid, field.values * factor[:, None])
    if kind == "velocity_shift":
        shifted, _ = advect_v(field, np.full(grid.n_theta, -amplitude), 1.0)
        return shifted
    if kind == "random_noise":
        rng = np.random.default_rng(seed)
        noise = rng.uniform(1.0 - amplitude, 1.0 + amplitude,
                            size=field.values.shape)
        return DistributionField(grid, np.maximum(field.values * noise, 0.0))
    raise ConfigError("unknown perturbation kind %r" % kind)


def _steady_report(result, cfg, spec):
    lines = ["lambda = %.17g" % result.multipliers.lam]
    if result.multipliers.mu is not None:
        lines.append("mu = %.17g" % result.multipliers.mu)
    lines.append("residual = %.17g" % result.fixed_point_residual)
    lines.append("iterations = %d" % result.iterations)
    lines.append("constraint_m1 = %.17g" % cfg.m1)
    if cfg.mj is not None:
        lines.append("constraint_mj = %.17g" % cfg.mj)
    f = result.field
    lines.append("mass = %.17g" % mass(f))
    lines.append("casimir = %.17g" % casimir_integral(f, spec))
    lines.append("hamiltonian = %.17g" % hamiltonian(f))
    lines.append("free_energy = %.17g" % free_energy_J(f, spec))
    return "\n".join(lines) + "\n"


def run_steady(cfg):
    """Construct the configured ground state; write snapshot and report.

    Returns (run_dir, SteadyStateResult).
    """
    grid = cfg.grid()
    spec = cfg.casimir_spec()
    constraints = cfg.constraints()
    seed = seed_potential(grid, cfg.seed_amplitude)
    result = self_consistent_solve(spec, constraints, seed,
                                   damping=cfg.damping, tol=cfg.tol,
                                   max_iter=cfg.max_iter)
    out = run_directory(cfg)
    save_snapshot(result.field, 0.0, os.path.join(out, "state.snap"))
    with open(os.path.join(out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(_steady_report(result, cfg, spec))
    return out, result


def run_evolve(cfg, input_path):
    """Evolve a snapshot under the configured solver.

    Writes diagnostics.csv, the final snapshot, and optionally a snapshot
    every solver.snapshot_every records.  Returns (run_dir, EvolveResult).
    """
    field, t0 = _require_input(input_path)
    spec = cfg.casimir_spec()
    out = run_directory(cfg)
    records = []
    counter = [0]

    def observer(rec, fld):
        records.append(rec)
        if cfg.snapshot_every > 0 and counter[0] % cfg.snapshot_every == 0:
            name = "snap_%06d.snap" % counter[0]
            save_snapshot(fld, rec.time, os.path.join(out, name))
        counter[0] += 1

    result = evolve(field, cfg.solver_config(), observer=observer,
                    casimir=spec, t_start=t0)
    write_diagnostics_csv(records, os.path.join(out, "diagnostics.csv"))
    save_snapshot(result.field, result.time, os.path.join(out, "final.snap"))
    return out, result


def run_stability(cfg, input_path=None):
    """Perturb a steady state, evolve it, and track the orbital distance.

    The base state comes from --input when given and is otherwise
    constructed in-run from the constraint keys.  Writes stability.csv with
    one row per record and summary.txt with the sup of the distance.
    Returns (run_dir, sup_distance).
    """
    spec = cfg.casimir_spec()
    if input_path is not None:
        base, _ = _require_input(input_path)
    else:
        grid = cfg.grid()
        seed = seed_potential(grid, cfg.seed_amplitude)
        base = self_consistent_solve(spec, cfg.constraints(), seed,
                                     damping=cfg.damping, tol=cfg.tol,
                                     max_iter=cfg.max_iter).field
    start = perturb(base, cfg.kind, cfg.amplitude, cfg.seed)
    if cfg.renormalize:
        start = renormalize_to_constraints(start, spec, cfg.constraints())

    rows = []

    def observer(rec, fld):
        d, shift = orbital_distance(fld, base)
        rows.append((rec.time, d, shift, rec.mass, rec.hamiltonian,
                     rec.casimir))

    out = run_directory(cfg)
    evolve(start, cfg.solver_config(), observer=observer, casimir=spec)
    with open(os.path.join(out, "stability.csv"), "w", encoding="utf-8") as fh:
        fh.write(STABILITY_HEADER + "\n")
        for row in rows:
            fh.write(",".join("%.17g" % x for x in row) + "\n")
    sup = max(row[1] for row in rows)
    with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write("sup_orbital_distance = %.17g\n" % sup)
        fh.write("amplitude = %.17g\n" % cfg.amplitude)
    return out, sup


def run_rearrange(cfg, input_path):
    """Rearrange a snapshot decreasingly in its microscopic energy.

    The potential is the snapshot's own self-consistent field, or zero
    when rearrange.phi = zero.  Writes the rearranged snapshot and a
    report with the raw and band-tolerant equimeasurability defects.
    Returns (run_dir, banded defect).
    """
    field, t0 = _require_input(input_path)
    grid = field.grid
    if cfg.phi_source == "zero":
        phi = Potential(grid, np.zeros(grid.n_theta), np.zeros(grid.n_theta))
    else:
        phi = solve_potential(field)
    n_levels = (grid.n_theta * grid.n_v) // 4
    rearranged = rearrange_with_energy(field, phi, n_levels)
    ladder = level_grid(field, n_levels)
    raw = equimeasurability_defect(field, rearranged, ladder)
    banded = level_band_defect(field, rearranged, ladder)
    out = run_directory(cfg)
    save_snapshot(rearranged, t0, os.path.join(out, "rearranged.snap"))
    with open(os.path.join(out, "rearrange_report.txt"), "w",
              encoding="utf-8") as fh:
        fh.write("sup_level_defect = %.17g\n" % raw)
        fh.write("banded_defect = %.17g\n" % banded)
        fh.write("mass_in = %.17g\n" % mass(field))
        fh.write("mass_out = %.17g\n" % mass(rearranged))
    return out, banded


def run_diag(cfg, input_path):
    """Write and return the diagnostics of a snapshot as one CSV row."""
    field, t0 = _require_input(input_path)
    spec = cfg.casimir_spec()
    rec = diagnostics(field, spec, t0)
    out = run_directory(cfg)
    write_diagnostics_csv([rec], os.path.join(out, "diag.csv"))
    return out, rec
