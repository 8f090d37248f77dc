"""Convex generators of the conserved Casimir integrals.

Two builtin families cover the steady-state constructions: the entropy
generator j(t) = t*log(t), which drives Maxwell-Boltzmann profiles through
its exponential inverse, and the power generators j(t) = t**p with p > 1,
whose inverse derivative is a positive part raised to 1/(p-1).  Each family
records which structural hypotheses it satisfies: h1 (j'(0) = 0 with a
genuine inverse on [0, inf)), h2 (superlinear growth), h3 (two-sided power
bounds t*j'(t)/j(t) in [p, q]); the multiplier and rearrangement solvers
branch on these flags instead of re-deriving them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ENTROPY = "entropy"
POWER = "power"


@dataclass(frozen=True)
class CasimirSpec:
    """One convex generator with its derived maps and hypothesis flags.

    Attributes:
        family: "entropy" or "power".
        p: growth exponent for the power family (None for entropy).
        q: upper exponent of the two-sided power bound; equals p here.
        h1: j' vanishes at 0 and is invertible on the positive axis.
        h2: j grows superlinearly.
        h3: t*j'(t)/j(t) stays in [p, q] for all t > 0.
    """

    family: str
    p: float | None
    q: float | None
    h1: bool
    h2: bool
    h3: bool

    def j(self, t):
        """Evaluate the generator; j(0) = 0 by continuity in both families."""
        t = np.asarray(t, dtype=float)
        if self.family == POWER:
            out = t ** self.p
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(t > 0.0, t * np.log(np.where(t > 0.0, t, 1.0)), 0.0)
        return out if out.ndim else float(out)

    def j_prime(self, t):
        """Evaluate j'; entropy requires t > 0."""
        t = np.asarray(t, dtype=float)
        if self.family == POWER:
            out = self.p * t ** (self.p - 1.0)
        else:
            out = np.log(t) + 1.0
        return out if out.ndim else float(out)

    def j_double_prime(self, t):
        """Evaluate j''; strictly positive on (0, inf) in both families."""
        t = np.asarray(t, dtype=float)
        if self.family == POWER:
            out = self.p * (self.p - 1.0) * t ** (self.p - 2.0)
        else:
            out = 1.0 / t
        return out if out.ndim else float(out)

    def inverse_derivative(self, s):
        """Evaluate (j')^{-1}; exp(s - 1) for entropy, (s/p)^{1/(p-1)} for power."""
        s = np.asarray(s, dtype=float)
        if self.family == POWER:
            out = (s / self.p) ** (1.0 / (self.p - 1.0))
        else:
            out = np.exp(s - 1.0)
        return out if out.ndim else float(out)


def entropy_spec() -> CasimirSpec:
    """The t*log(t) generator (superlinear, but j'(0) diverges)."""
    return CasimirSpec(family=ENTROPY, p=None, q=None, h1=False, h2=True, h3=False)


def power_spec(p: float) -> CasimirSpec:
    """The t**p generator for p > 1; satisfies all three hypotheses with q = p."""
    p = float(p)
    if not p > 1.0:
        raise ValueError(f"power exponent must exceed 1, got {p}")
    return CasimirSpec(family=POWER, p=p, q=p, h1=True, h2=True, h3=True)


def parse_casimir(text: str) -> CasimirSpec:
    """Parse the config syntax "entropy" or "power:<p>" into a spec.

    Args:
        text: the raw config value, surrounding whitespace ignored.

    Returns:
        The corresponding CasimirSpec.

    Raises:
        ValueError: unknown family, malformed exponent, or p <= 1.
    """
    text = text.strip()
    if text == ENTROPY:
        return entropy_spec()
    if text.startswith(POWER + ":"):
        body = text[len(POWER) + 1 :]
        try:
            p = float(body)
        except ValueError:
            raise ValueError(f"malformed power exponent: {body!r}") from None
        return power_spec(p)
    raise ValueError(f'casimir must be "entropy" or "power:<p>", got {text!r}')


def positive_part_inverse_derivative(spec: CasimirSpec, s):
    """Apply (j')^{-1} to the positive part of s; the profile-building map.

    Args:
        spec: generator with h1 (the entropy family is rejected because its
            inverse derivative never reaches 0 and the exponential branch is
            used instead).
        s: scalar or array argument.

    Returns:
        (j')^{-1}(max(s, 0)); identically 0 where s <= 0.
    """
    if not spec.h1:
        raise ValueError("positive-part inversion needs h1; entropy uses the exponential branch")
    s = np.asarray(s, dtype=float)
    out = (np.maximum(s, 0.0) / spec.p) ** (1.0 / (spec.p - 1.0))
    return out if out.ndim else float(out)


def check_h3_ratio(spec: CasimirSpec, samples) -> tuple[float, float]:
    """Extremes of t*j'(t)/j(t) over positive samples.

    For the power family the ratio is identically p; for entropy it is
    1 + 1/log(t), unbounded near t = 1, which is why h3 is false there.
    """
    t = np.asarray(samples, dtype=float)
    if np.any(t <= 0.0):
        raise ValueError("h3 ratio samples must be positive")
    r = t * spec.j_prime(t) / spec.j(t)
    return float(r.min()), float(r.max())
