"""Events and test functionals evaluated on scaled exceedance point measures.

Thresholds are in scaled units (multiples of gamma_n). Test functions are
piecewise linear, nonnegative, bounded, and vanish on a neighbourhood of zero,
which keeps Lipschitz constants exact and makes every functional evaluable
without truncation bias on a floored point measure.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import SpecParseError


@dataclass(frozen=True)
class TestFunction:
    """Piecewise-linear function given by knot coordinates, constant beyond them."""

    knots_x: tuple
    knots_y: tuple

    def __post_init__(self):
        xs, ys = self.knots_x, self.knots_y
        if len(xs) != len(ys) or len(xs) < 1:
            raise ValueError("knot arrays must be nonempty and equal length")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("knot abscissae must be strictly increasing")
        if any(y < 0 for y in ys):
            raise ValueError("test functions are nonnegative")
        if self.support_gap <= 0.0:
            raise ValueError("test function must vanish on a neighbourhood of 0")

    @classmethod
    def ramp(cls, a: float, b: float) -> "TestFunction":
        """0 on [0, a], rising linearly to 1 at b, constant 1 after; 0 on negatives."""
        if not 0 < a < b:
            raise ValueError("ramp needs 0 < a < b")
        return cls((0.0, a, b), (0.0, 0.0, 1.0))

    def __call__(self, y):
        return np.interp(y, self.knots_x, self.knots_y)

    @cached_property
    def support_gap(self) -> float:
        """Largest delta such that the function vanishes on [-delta, delta].

        math.inf for the zero function.
        """
        xs = np.asarray(self.knots_x)
        ys = np.asarray(self.knots_y)
        if not np.any(ys > 0):
            return math.inf
        pos = math.inf
        if ys[-1] > 0 or np.any((ys > 0) & (xs > 0)):
            idx = np.nonzero((ys > 0) & (xs > 0))[0]
            first = idx[0] if idx.size else None
            if first is None:
                # positive values only via the constant right extension
                pos = xs[-1]
            elif first == 0 or ys[first - 1] > 0 or xs[first - 1] < 0:
                pos = 0.0 if first == 0 or xs[max(first - 1, 0)] < 0 else xs[first - 1]
            else:
                pos = xs[first - 1]
        neg = math.inf
        if ys[0] > 0 or np.any((ys > 0) & (xs < 0)):
            idx = np.nonzero((ys > 0) & (xs < 0))[0]
            last = idx[-1] if idx.size else None
            if last is None:
                neg = -xs[0]
            elif last == len(xs) - 1 or ys[last + 1] > 0 or xs[last + 1] > 0:
                neg = 0.0 if last == len(xs) - 1 or xs[min(last + 1, len(xs) - 1)] > 0 else -xs[last + 1]
            else:
                neg = -xs[last + 1]
        return min(pos, neg)

    @cached_property
    def lipschitz(self) -> float:
        xs = np.asarray(self.knots_x)
        ys = np.asarray(self.knots_y)
        if xs.size < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(ys) / np.diff(xs))))

    @cached_property
    def sup(self) -> float:
        return float(max(self.knots_y))

    @property
    def right_constant(self) -> float:
        return float(self.knots_y[-1])

    @property
    def left_constant(self) -> float:
        return float(self.knots_y[0])

    def is_zero(self) -> bool:
        return all(y == 0 for y in self.knots_y)


@dataclass(frozen=True)
class HlsFunctional:
    """F(phi) = prod_i (1 - exp(-(phi(g_i) - eps_i)_+)); zero on the null measure."""

    g1: TestFunction
    g2: TestFunction
    eps1: float
    eps2: float

    def __post_init__(self):
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("eps offsets must be > 0")
        gap = min(self.g1.support_gap, self.g2.support_gap)
        if gap <= 0:
            raise ValueError("test functions must vanish near 0")

    @property
    def support_gap(self) -> float:
        return min(self.g1.support_gap, self.g2.support_gap)

    def from_integrals(self, phi_g1: float, phi_g2: float) -> float:
        v1 = -math.expm1(-max(phi_g1 - self.eps1, 0.0))
        v2 = -math.expm1(-max(phi_g2 - self.eps2, 0.0))
        return v1 * v2

    def evaluate(self, positions: np.ndarray) -> float:
        if len(positions) == 0:
            return 0.0
        return self.from_integrals(float(np.sum(self.g1(positions))),
                                   float(np.sum(self.g2(positions))))


@dataclass(frozen=True)
class MaxExceeds:
    """Some scaled position strictly exceeds x."""

    x: float

    def __post_init__(self):
        if self.x <= 0:
            raise ValueError("threshold must be > 0")

    @property
    def min_scale(self) -> float:
        return self.x

    def evaluate(self, positions: np.ndarray) -> float:
        return 1.0 if len(positions) and float(np.max(positions)) > self.x else 0.0

    def label(self) -> str:
        return f"max:x={self.x:g}"


@dataclass(frozen=True)
class CountAtLeast:
    """At least k scaled positions strictly exceed x."""

    x: float
    k: int

    def __post_init__(self):
        if self.x <= 0:
            raise ValueError("threshold must be > 0")
        if self.k < 1:
            raise ValueError("count threshold k must be >= 1")

    @property
    def min_scale(self) -> float:
        return self.x

    def evaluate(self, positions: np.ndarray) -> float:
        if len(positions) == 0:
            return 0.0
        return 1.0 if int(np.count_nonzero(np.asarray(positions) > self.x)) >= self.k else 0.0

    def label(self) -> str:
        return f"count:x={self.x:g},k={self.k}"


@dataclass(frozen=True)
class HlsEvent:
    """Expectation target r_n E*[F(N_n)] for an HLS functional F."""

    functional: HlsFunctional

    @property
    def min_scale(self) -> float:
        return self.functional.support_gap

    def evaluate(self, positions: np.ndarray) -> float:
        return self.functional.evaluate(np.asarray(positions))

    def label(self) -> str:
        f = self.functional
        return (f"hls:eps1={f.eps1:g},eps2={f.eps2:g}")


_RAMP_RE = re.compile(r"ramp\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)")


def parse_test_function(text: str) -> TestFunction:
    """Parse ``ramp(a,b)``."""
    m = _RAMP_RE.fullmatch(text.strip())
    if not m:
        raise SpecParseError(f"bad test function {text!r}", token=text)
    try:
        return TestFunction.ramp(float(m.group(1)), float(m.group(2)))
    except ValueError as exc:
        raise SpecParseError(str(exc), token=text) from None


def parse_event_spec(text: str):
    """Parse ``max:x=1.0``, ``count:x=1.0,k=3`` or ``hls:g1=ramp(..),g2=..,eps1=..,eps2=..``."""
    head, _, body = text.partition(":")
    head = head.strip()
    if head == "max":
        params = _parse_kv(body, text)
        if "x" not in params:
            raise SpecParseError("max event needs x", token=text)
        try:
            return MaxExceeds(float(params["x"]))
        except ValueError as exc:
            raise SpecParseError(str(exc), token=text) from None
    if head == "count":
        params = _parse_kv(body, text)
        if "x" not in params or "k" not in params:
            raise SpecParseError("count event needs x and k", token=text)
        try:
            return CountAtLeast(float(params["x"]), int(float(params["k"])))
        except ValueError as exc:
            raise SpecParseError(str(exc), token=text) from None
    if head == "hls":
        params = _parse_kv(body, text)
        missing = {"g1", "g2", "eps1", "eps2"} - params.keys()
        if missing:
            raise SpecParseError(f"hls event missing {sorted(missing)}", token=text)
        try:
            functional = HlsFunctional(parse_test_function(params["g1"]),
                                       parse_test_function(params["g2"]),
                                       float(params["eps1"]), float(params["eps2"]))
        except ValueError as exc:
            raise SpecParseError(str(exc), token=text) from None
        return HlsEvent(functional)
    raise SpecParseError(f"unknown event kind {head!r}", token=head)


def _parse_kv(body: str, full: str) -> dict:
    # ramp(a,b) values contain commas, so split on commas not inside parens
    params = {}
    depth = 0
    token = []
    tokens = []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            tokens.append("".join(token))
            token = []
        else:
            token.append(ch)
    tokens.append("".join(token))
    for tok in tokens:
        tok = tok.strip()
        if not tok:
            continue
        if "=" not in tok:
            raise SpecParseError(f"bad event parameter {tok!r}", token=tok)
        key, val = tok.split("=", 1)
        params[key.strip()] = val.strip()
    return params
