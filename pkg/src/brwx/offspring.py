"""Galton-Watson progeny laws with finite support and their generating-function quantities.

A law is a probability table on {0, 1, ..., k_max}. Finite support makes every
generating-function computation exact and guarantees E(Z log+ Z) < infinity, so
the population martingale normalisation is always nondegenerate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ResourceLimitError, SpecParseError

MAX_SUPPORT_DEFAULT = 64

_PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class OffspringLaw:
    """Finitely supported offspring distribution; ``probs[k] = P(Z = k)``."""

    probs: tuple

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("offspring law needs a nonempty probability table")
        if np.any(p < 0.0):
            raise ValueError("offspring probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > _PROB_SUM_TOL:
            raise ValueError(f"offspring probabilities sum to {p.sum()!r}, not 1")

    @classmethod
    def from_map(cls, table: dict, max_support: int = MAX_SUPPORT_DEFAULT) -> "OffspringLaw":
        if not table:
            raise ValueError("empty offspring table")
        ks = sorted(table)
        if ks[0] < 0 or any(int(k) != k for k in ks):
            raise ValueError("offspring counts must be nonnegative integers")
        if ks[-1] > max_support:
            raise ValueError(f"support {ks[-1]} exceeds max_support={max_support}")
        probs = [0.0] * (int(ks[-1]) + 1)
        for k, v in table.items():
            probs[int(k)] = float(v)
        return cls(tuple(probs))

    @classmethod
    def deterministic(cls, m: int) -> "OffspringLaw":
        """Law putting all mass on m children."""
        return cls.from_map({m: 1.0})

    @cached_property
    def mean(self) -> float:
        p = np.asarray(self.probs)
        return float(np.dot(np.arange(p.size), p))

    @cached_property
    def max_support(self) -> int:
        p = np.asarray(self.probs)
        return int(np.nonzero(p)[0][-1]) if np.any(p) else 0

    @cached_property
    def _cum(self) -> np.ndarray:
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        return c

    # -- generating function -------------------------------------------------

    def pgf(self, s: float) -> float:
        """Probability generating function E[s^Z], for s in [0, 1]."""
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"pgf argument {s!r} outside [0, 1]")
        acc = 0.0
        for p in reversed(self.probs):
            acc = acc * s + p
        return acc

    def extinction_probability(self, tol: float = 1e-12, max_iter: int = 10_000_000) -> float:
        """Smallest fixed point of the pgf on [0, 1].

        Fixed-point iteration from 0 is monotone increasing and always converges
        to the smallest root; stops when successive iterates differ by < tol.
        """
        s = 0.0
        for _ in range(max_iter):
            s_next = self.pgf(s)
            if s_next - s < tol:
                return s_next
            s = s_next
        raise ResourceLimitError("extinction fixed-point iteration did not converge", partial=s)

    def survival_curve(self, l_max: int) -> np.ndarray:
        """P(Z_l > 0) for l = 0..l_max; entry l is 1 - pgf iterated l times at 0."""
        if l_max < 0:
            raise ValueError("l_max must be >= 0")
        out = np.empty(l_max + 1)
        q = 0.0  # P(Z_l = 0)
        out[0] = 1.0
        for l in range(1, l_max + 1):
            q = self.pgf(q)
            out[l] = 1.0 - q
        return out

    def truncate(self, bound: int) -> "OffspringLaw":
        """Law of min-like truncation: children above ``bound`` collapse onto ``bound``."""
        if bound < 1:
            raise ValueError("truncation bound must be >= 1")
        p = list(self.probs)
        if bound >= len(p) - 1:
            return self
        lumped = sum(p[bound:])
        out = p[:bound] + [lumped]
        return OffspringLaw(tuple(out))

    # -- sampling -------------------------------------------------------------

    def sample(self, rng: np.random.Generator, size=None):
        """Draw offspring counts by inverse CDF; scalar int when size is None."""
        if size is None:
            return int(np.searchsorted(self._cum, rng.random(), side="right"))
        return np.searchsorted(self._cum, rng.random(size), side="right").astype(np.int64)

    def generation_total(self, l: int, rng: np.random.Generator) -> int:
        """One draw of the generation-l population size Z_l."""
        z = 1
        p = np.asarray(self.probs)
        for _ in range(l):
            if z == 0:
                break
            counts = rng.multinomial(z, p)
            z = int(np.dot(np.arange(p.size), counts))
        return z

    def conditioned_generation_total(self, l: int, rng: np.random.Generator,
                                     max_retries: int = 1_000_000) -> int:
        """Draw Z_l conditioned on Z_l > 0, by rejection."""
        if l == 0:
            return 1
        for _ in range(max_retries):
            z = self.generation_total(l, rng)
            if z > 0:
                return z
        surv = self.survival_curve(l)[l]
        raise ResourceLimitError(
            f"rejection budget exhausted sampling generation {l} total; P(Z_l>0)={surv:.3g}")


@dataclass(frozen=True)
class GwDerived:
    """Bundle of pgf-derived quantities for one law (optionally with a truncated sibling)."""

    mu: float
    p_e: float
    survival: tuple
    mu_truncated: float | None = None
    truncated: OffspringLaw | None = None


def derive(law: OffspringLaw, l_max: int, tol: float = 1e-12,
           branch_bound: int | None = None) -> GwDerived:
    truncated = law.truncate(branch_bound) if branch_bound is not None else None
    return GwDerived(
        mu=law.mean,
        p_e=law.extinction_probability(tol),
        survival=tuple(law.survival_curve(l_max)),
        mu_truncated=truncated.mean if truncated is not None else None,
        truncated=truncated,
    )


def generation_size_pmf(law: OffspringLaw, l: int, cap: int):
    """First ``cap`` probabilities of Z_l plus the lumped mass P(Z_l >= cap).

    Computed by iterating the composition f(g(s)) mod s^cap, where f is the
    one-step pgf polynomial. Composing in this order only ever needs the first
    ``cap`` coefficients of the inner iterate, so each returned probability is
    exact regardless of how large the support of Z_l has grown.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    f = np.asarray(law.probs, dtype=float)
    g = np.zeros(cap)
    if cap > 1:
        g[1] = 1.0  # Z_0 = 1; with cap == 1 the unit atom lives in the lump
    for _ in range(l):
        g = _compose_mod(f, g, cap)
    lump = max(0.0, 1.0 - float(g.sum()))
    return g, lump


def generation_size_pmf_iter(law: OffspringLaw, l_max: int, cap: int):
    """Yield (pmf, lump) for l = 0..l_max, sharing work across levels."""
    f = np.asarray(law.probs, dtype=float)
    g = np.zeros(cap)
    if cap > 1:
        g[1] = 1.0
    for l in range(l_max + 1):
        yield g.copy(), max(0.0, 1.0 - float(g.sum()))
        g = _compose_mod(f, g, cap)


def _compose_mod(f: np.ndarray, g: np.ndarray, cap: int) -> np.ndarray:
    """Coefficients of f(g(s)) mod s^cap, by Horner in g."""
    h = np.zeros(cap)
    h[0] = f[-1]
    for coef in f[-2::-1]:
        h = np.convolve(h, g)[:cap]
        h[0] += coef
    return h


def parse_offspring_spec(text: str) -> OffspringLaw:
    """Parse a ``k:prob`` pair list such as ``"0:0.25,2:0.75"``."""
    table = {}
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            k_str, p_str = token.split(":")
            k = int(k_str)
            p = float(p_str)
        except ValueError:
            raise SpecParseError(f"bad offspring entry {token!r}", token=token) from None
        if k in table:
            raise SpecParseError(f"duplicate offspring count {k}", token=token)
        table[k] = p
    if not table:
        raise SpecParseError(f"empty offspring spec {text!r}", token=text)
    try:
        return OffspringLaw.from_map(table)
    except ValueError as exc:
        raise SpecParseError(str(exc), token=text) from None
