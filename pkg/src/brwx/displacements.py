"""Joint displacement laws for the children of one parent.

Three families:

* ``pareto`` -- children independent, each with an exact two-sided Pareto tail
  P(|X| > t) = (t/x_min)^-alpha split p : (1-p) between right and left tails;
* ``dep-pareto`` -- one Pareto draw copied to every child (limit mass on the
  diagonal, the simplest genuinely dependent jointly heavy-tailed block);
* ``table`` -- a finite light-tailed value table, reserved for the exact
  enumeration oracle.

Sign and magnitude are drawn independently (sign positive with probability p),
so brute-force oracles can mirror the generator exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import SpecParseError, UnsupportedFamilyError


class Family(str, Enum):
    IID_PARETO = "pareto"
    FULLY_DEPENDENT_PARETO = "dep-pareto"
    DISCRETE_TABLE = "table"


@dataclass(frozen=True)
class DisplacementModel:
    family: Family
    alpha: float | None = None
    tail_balance: float | None = None  # P(X > t) / P(|X| > t) in the tail
    x_min: float | None = None
    table: tuple | None = None  # ((value, prob), ...) for DISCRETE_TABLE

    def __post_init__(self):
        if self.family in (Family.IID_PARETO, Family.FULLY_DEPENDENT_PARETO):
            if self.alpha is None or self.alpha <= 0:
                raise ValueError("Pareto family needs tail index alpha > 0")
            if self.tail_balance is None or not 0.0 <= self.tail_balance <= 1.0:
                raise ValueError("tail balance p must lie in [0, 1]")
            if self.x_min is None or self.x_min <= 0:
                raise ValueError("Pareto scale x_min must be > 0")
        else:
            if not self.table:
                raise ValueError("table family needs a nonempty value table")
            total = sum(p for _, p in self.table)
            if any(p < 0 for _, p in self.table) or abs(total - 1.0) > 1e-12:
                raise ValueError("table probabilities must be nonnegative and sum to 1")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def pareto(cls, alpha: float, p: float, x_min: float = 1.0) -> "DisplacementModel":
        return cls(Family.IID_PARETO, alpha=alpha, tail_balance=p, x_min=x_min)

    @classmethod
    def dependent_pareto(cls, alpha: float, p: float, x_min: float = 1.0) -> "DisplacementModel":
        return cls(Family.FULLY_DEPENDENT_PARETO, alpha=alpha, tail_balance=p, x_min=x_min)

    @classmethod
    def discrete_table(cls, table: dict) -> "DisplacementModel":
        items = tuple(sorted((float(v), float(p)) for v, p in table.items()))
        return cls(Family.DISCRETE_TABLE, table=items)

    @property
    def is_pareto(self) -> bool:
        return self.family in (Family.IID_PARETO, Family.FULLY_DEPENDENT_PARETO)

    @cached_property
    def _table_values(self) -> np.ndarray:
        return np.array([v for v, _ in self.table])

    @cached_property
    def _table_cum(self) -> np.ndarray:
        c = np.cumsum([p for _, p in self.table])
        c[-1] = 1.0
        return c

    # -- tail functionals -----------------------------------------------------

    def tail_prob(self, t: float) -> float:
        """P(|X_1| > t) for t > 0."""
        if t <= 0:
            raise ValueError("tail threshold must be > 0")
        if self.is_pareto:
            if t <= self.x_min:
                return 1.0
            return (t / self.x_min) ** (-self.alpha)
        return float(sum(p for v, p in self.table if abs(v) > t))

    def upper_tail_prob(self, t: float) -> float:
        """P(X_1 > t) for t > 0."""
        if t <= 0:
            raise ValueError("tail threshold must be > 0")
        if self.is_pareto:
            # Sign is independent of magnitude, so the balance factor applies
            # below x_min as well.
            return self.tail_balance * self.tail_prob(t)
        return float(sum(p for v, p in self.table if v > t))

    def log_tail_prob(self, log_t: float) -> float:
        """log P(|X_1| > e^log_t); Pareto families only (overflow-safe path)."""
        if not self.is_pareto:
            raise UnsupportedFamilyError("log tail only defined for Pareto families")
        if log_t <= math.log(self.x_min):
            return 0.0
        return -self.alpha * (log_t - math.log(self.x_min))

    # -- sampling -------------------------------------------------------------

    def sample_children(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """One displacement block (X_1, ..., X_count)."""
        if count < 0:
            raise ValueError("count must be >= 0")
        if count == 0:
            return np.empty(0)
        if self.family == Family.DISCRETE_TABLE:
            idx = np.searchsorted(self._table_cum, rng.random(count), side="right")
            return self._table_values[idx]
        if self.family == Family.FULLY_DEPENDENT_PARETO:
            return np.full(count, self._pareto_draw(1, rng)[0])
        return self._pareto_draw(count, rng)

    def _pareto_draw(self, count: int, rng: np.random.Generator) -> np.ndarray:
        mags = self.x_min * (1.0 - rng.random(count)) ** (-1.0 / self.alpha)
        signs = np.where(rng.random(count) < self.tail_balance, 1.0, -1.0)
        return mags * signs

    def conditional_exceedance_sample(self, t: float, rng: np.random.Generator, size=None):
        """Draw X_1 given |X_1| > t: the Pareto tail restarted at t, same balance."""
        if not self.is_pareto:
            raise UnsupportedFamilyError("conditional exceedance sampling needs a Pareto family")
        if t < self.x_min:
            raise ValueError(f"exceedance level {t} below scale x_min={self.x_min}")
        n = 1 if size is None else size
        mags = t * (1.0 - rng.random(n)) ** (-1.0 / self.alpha)
        signs = np.where(rng.random(n) < self.tail_balance, 1.0, -1.0)
        out = mags * signs
        return float(out[0]) if size is None else out

    # -- limit-measure masses ---------------------------------------------------

    def exceedance_union_mass(self, g_size: int) -> float:
        """Limit-measure mass of {some coordinate among the first g_size exceeds 1}.

        Independent children put mass g_size * p on the union of coordinate
        exceedance sets; the fully dependent family concentrates on the
        diagonal, where all coordinates exceed together.
        """
        if g_size < 0:
            raise ValueError("g_size must be >= 0")
        if g_size == 0:
            return 0.0
        if self.family == Family.IID_PARETO:
            return g_size * self.tail_balance
        if self.family == Family.FULLY_DEPENDENT_PARETO:
            return self.tail_balance
        raise UnsupportedFamilyError("no limit measure for the discrete table family")


def parse_displacement_spec(text: str) -> DisplacementModel:
    """Parse ``pareto:alpha=2,p=0.5,xmin=1``, ``dep-pareto:...`` or ``table:-1=0.5,1=0.5``."""
    head, _, body = text.partition(":")
    head = head.strip()
    if head in (Family.IID_PARETO.value, Family.FULLY_DEPENDENT_PARETO.value):
        params = {"xmin": 1.0}
        for token in body.split(","):
            token = token.strip()
            if not token:
                continue
            try:
                key, val = token.split("=")
                params[key.strip()] = float(val)
            except ValueError:
                raise SpecParseError(f"bad displacement parameter {token!r}", token=token) from None
        missing = {"alpha", "p"} - params.keys()
        if missing:
            raise SpecParseError(f"displacement spec missing {sorted(missing)}", token=text)
        ctor = (DisplacementModel.pareto if head == Family.IID_PARETO.value
                else DisplacementModel.dependent_pareto)
        try:
            return ctor(alpha=params["alpha"], p=params["p"], x_min=params["xmin"])
        except ValueError as exc:
            raise SpecParseError(str(exc), token=text) from None
    if head == Family.DISCRETE_TABLE.value:
        table = {}
        for token in body.split(","):
            token = token.strip()
            if not token:
                continue
            try:
                val, prob = token.rsplit("=", 1)
                table[float(val)] = float(prob)
            except ValueError:
                raise SpecParseError(f"bad table entry {token!r}", token=token) from None
        if not table:
            raise SpecParseError("empty displacement table", token=text)
        try:
            return DisplacementModel.discrete_table(table)
        except ValueError as exc:
            raise SpecParseError(str(exc), token=text) from None
    raise SpecParseError(f"unknown displacement family {head!r}", token=head)
