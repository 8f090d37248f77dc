"""Flat key = value configuration files for the command-line harness.

A config is plain text, one `key = value` per line, `#` starting a comment
and blank lines ignored.  Dots group related keys (grid.*, solver.*, ...).
Unknown keys are rejected so typos fail loudly.  Every run is identified
by the first ten hex digits of the sha256 of its fully resolved config
text, which names the per-run output directory.
"""

import hashlib
from dataclasses import dataclass, replace

from .casimir import parse_casimir
from .errors import ConfigError
from .grid import PhaseGrid
from .solver import SolverConfig
from .steady import ConstraintSet

_PERTURBATION_KINDS = ("density_bump", "velocity_shift", "random_noise")
_PHI_SOURCES = ("self", "zero")


def _parse_bool(text):
    low = text.strip().lower()
    if low == "true":
        return True
    if low == "false":
        return False
    raise ValueError("expected true or false, got %r" % text)


def _positive_int(name):
    def check(v):
        if v < 1:
            raise ValueError("%s must be at least 1" % name)
        return v
    return check


# key -> (attribute, parser, default).  A default of _REQUIRED-like None
# means the key may stay unset; commands that need it complain by name.
_KEYS = {
    "grid.n_theta": ("n_theta", int, 128),
    "grid.n_v": ("n_v", int, 128),
    "grid.v_max": ("v_max", float, 6.0),
    "casimir": ("casimir", str, "entropy"),
    "constraints.m1": ("m1", float, None),
    "constraints.mj": ("mj", float, None),
    "solver.damping": ("damping", float, 0.5),
    "solver.tol": ("tol", float, 1e-9),
    "solver.max_iter": ("max_iter", int, 10000),
    "seed.amplitude": ("seed_amplitude", float, 0.0),
    "solver.dt": ("dt", float, 0.05),
    "solver.t_end": ("t_end", float, 10.0),
    "solver.interpolation": ("interpolation", str, "linear"),
    "solver.record_every": ("record_every", int, 1),
    "solver.snapshot_every": ("snapshot_every", int, 0),
    "perturbation.kind": ("kind", str, "density_bump"),
    "perturbation.amplitude": ("amplitude", float, 0.0),
    "perturbation.seed": ("seed", int, 0),
    "perturbation.renormalize": ("renormalize", _parse_bool, False),
    "rearrange.phi": ("phi_source", str, "self"),
    "output.dir": ("output_dir", str, "runs"),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _, _) in _KEYS.items()}


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved configuration with every key at its final value."""

    n_theta: int = 128
    n_v: int = 128
    v_max: float = 6.0
    casimir: str = "entropy"
    m1: float | None = None
    mj: float | None = None
    damping: float = 0.5
    tol: float = 1e-9
    max_iter: int = 10000
    seed_amplitude: float = 0.0
    dt: float = 0.05
    t_end: float = 10.0
    interpolation: str = "linear"
    record_every: int = 1
    snapshot_every: int = 0
    kind: str = "density_bump"
    amplitude: float = 0.0
    seed: int = 0
    renormalize: bool = False
    phi_source: str = "self"
    output_dir: str = "runs"

    def __post_init__(self):
        try:
            parse_casimir(self.casimir)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.m1 is not None and not self.m1 > 0.0:
            raise ConfigError("constraints.m1 must be positive")
        if self.mj is not None and not self.mj > 0.0:
            raise ConfigError("constraints.mj must be positive")
        if self.kind not in _PERTURBATION_KINDS:
            raise ConfigError("perturbation.kind must be one of %s"
                              % ", ".join(_PERTURBATION_KINDS))
        if self.amplitude < 0.0:
            raise ConfigError("perturbation.amplitude must be nonnegative")
        if self.phi_source not in _PHI_SOURCES:
            raise ConfigError("rearrange.phi must be 'self' or 'zero'")
        if self.snapshot_every < 0:
            raise ConfigError("solver.snapshot_every must be nonnegative")

    def grid(self):
        return PhaseGrid(self.n_theta, self.n_v, self.v_max)

    def casimir_spec(self):
        return parse_casimir(self.casimir)

    def constraints(self):
        if self.m1 is None:
            raise ConfigError("missing key constraints.m1")
        return ConstraintSet(m1=self.m1, mj=self.mj)

    def solver_config(self):
        try:
            return SolverConfig(dt=self.dt, t_end=self.t_end,
                                interpolation=self.interpolation,
                                record_every=self.record_every)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def canonical_text(self):
        """Every key in sorted order at its resolved value."""
        lines = []
        for key in sorted(_KEYS):
            attr, _, _ = _KEYS[key]
            value = getattr(self, attr)
            if value is None:
                continue
            lines.append("%s = %s" % (key, _format_value(value)))
        return "\n".join(lines) + "\n"

    def hash_prefix(self):
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:10]

    def with_value(self, key, raw_value):
        """A copy with one key replaced by a raw string value."""
        if key not in _KEYS:
            raise ConfigError("unknown key %r" % key)
        attr, parser, _ = _KEYS[key]
        try:
            return replace(self, **{attr: parser(raw_value)})
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError("bad value for %s: %s" % (key, exc)) from exc


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def parse_config(text):
    """Parse config text into an ExperimentConfig.

    Raises ConfigError on unknown keys, bad values, or repeated keys.
    """
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line %d is not a key = value pair: %r"
                              % (lineno, raw.strip()))
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            raise ConfigError("unknown key %r on line %d" % (key, lineno))
        if key in seen:
            raise ConfigError("key %r repeated on line %d" % (key, lineno))
        seen[key] = value

    kwargs = {}
    for key, value in seen.items():
        attr, parser, _ = _KEYS[key]
        try:
            kwargs[attr] = parser(value)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError("bad value for %s: %s" % (key, exc)) from exc
    return ExperimentConfig(**kwargs)


def load_config(path):
    """Read and parse a config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc)) from exc
    return parse_config(text)
