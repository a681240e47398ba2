"""Normalising sequences for the large-deviation regime.

Three sequences hang together: the weak-limit scale kappa_n = mu^(n/alpha),
a user-chosen large-deviation scale gamma_n growing strictly faster, and the
speed r_n = 1 / (mu^n * P(|X_1| > gamma_n)) under which scaled exceedance
probabilities converge. Values are computed in log space so schemes stay
usable out to n around 60.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidRegimeError, SpecParseError
from .displacements import DisplacementModel

_RATIO_HORIZON_MIN = 40
_RATIO_FLOOR = 10.0


@dataclass(frozen=True)
class ScalingScheme:
    alpha: float
    mu: float
    model: DisplacementModel
    kind: str  # "geom" or "poly"
    base: float = 1.0    # c in gamma_n = c * g^n
    growth: float = 2.0  # g
    boost: float = 1.0   # a in gamma_n = n^a * mu^(n/alpha)
    n_max: int = 0

    # -- sequence values --------------------------------------------------------

    def log_gamma(self, n: int) -> float:
        self._check_range(n)
        if self.kind == "geom":
            return math.log(self.base) + n * math.log(self.growth)
        return self.boost * math.log(n) + (n / self.alpha) * math.log(self.mu)

    def gamma(self, n: int) -> float:
        return math.exp(self.log_gamma(n))

    def kappa(self, n: int) -> float:
        self._check_range(n)
        return math.exp((n / self.alpha) * math.log(self.mu))

    def speed(self, n: int) -> float:
        """r_n, satisfying r_n * mu^n * P(|X_1| > gamma_n) = 1."""
        self._check_range(n)
        if self.model.is_pareto:
            log_tail = self.model.log_tail_prob(self.log_gamma(n))
        else:
            tail = self.model.tail_prob(self.gamma(n))
            if tail == 0.0:
                raise InvalidRegimeError(
                    f"tail probability vanishes at gamma_{n}; speed undefined")
            log_tail = math.log(tail)
        return math.exp(-(n * math.log(self.mu) + log_tail))

    def _check_range(self, n: int):
        lo = 1 if self.kind == "poly" else 0
        if not lo <= n <= self.n_max:
            raise ValueError(f"n={n} outside validated range [{lo}, {self.n_max}]")


def build_scaling(alpha: float, mu: float, model: DisplacementModel,
                  spec, n_max: int) -> ScalingScheme:
    """Construct and validate a scheme from a spec string or dict.

    Accepts ``"geom:c=1,g=2"`` (gamma_n = c * g^n, needs g > mu^(1/alpha)) or
    ``"poly:a=1"`` (gamma_n = n^a * mu^(n/alpha)). Validation checks the
    ratio gamma_n / kappa_n is strictly increasing and clears a fixed floor on
    a horizon of at least ``n_max`` generations, so slowly separating schemes
    are rejected rather than silently producing a vacuous regime.
    """
    if mu <= 1.0:
        raise InvalidRegimeError(f"supercritical law required (mu={mu})")
    if alpha <= 0.0:
        raise ValueError("alpha must be > 0")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    params = parse_scaling_spec(spec) if isinstance(spec, str) else dict(spec)
    kind = params.pop("kind")
    if kind == "geom":
        c = params.get("c", 1.0)
        g = params.get("g")
        if g is None:
            raise SpecParseError("geometric scaling needs g", token="g")
        if c <= 0:
            raise ValueError("scale c must be > 0")
        if g <= mu ** (1.0 / alpha):
            raise InvalidRegimeError(
                f"g={g} does not dominate mu^(1/alpha)={mu ** (1.0 / alpha):.6g}")
        scheme = ScalingScheme(alpha, mu, model, "geom", base=c, growth=g, n_max=n_max)
    elif kind == "poly":
        a = params.get("a")
        if a is None or a <= 0:
            raise InvalidRegimeError("polynomial-boost scaling needs a > 0")
        scheme = ScalingScheme(alpha, mu, model, "poly", boost=a, n_max=n_max)
    else:
        raise SpecParseError(f"unknown scaling kind {kind!r}", token=kind)

    _validate_ratio(scheme)
    return scheme


def _validate_ratio(scheme: ScalingScheme):
    horizon = max(scheme.n_max, _RATIO_HORIZON_MIN)
    lo = 1 if scheme.kind == "poly" else 0
    log_mu_a = math.log(scheme.mu) / scheme.alpha
    prev = -math.inf
    last = None
    for n in range(lo, horizon + 1):
        if scheme.kind == "geom":
            log_ratio = math.log(scheme.base) + n * (math.log(scheme.growth) - log_mu_a)
        else:
            log_ratio = scheme.boost * math.log(n)
        if log_ratio <= prev:
            raise InvalidRegimeError(
                "gamma_n / kappa_n is not strictly increasing; scaling too slow")
        prev = log_ratio
        last = log_ratio
    if last is None or last <= math.log(_RATIO_FLOOR):
        raise InvalidRegimeError(
            f"gamma_n / kappa_n only reaches {math.exp(last):.3g} at n={horizon}; "
            "scaling does not separate from the weak-limit scale")


def parse_scaling_spec(text: str) -> dict:
    """Parse ``"geom:c=1,g=2"`` or ``"poly:a=1"`` into a parameter dict."""
    head, _, body = text.partition(":")
    head = head.strip()
    if head not in ("geom", "poly"):
        raise SpecParseError(f"unknown scaling kind {head!r}", token=head)
    params = {"kind": head}
    for token in body.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            key, val = token.split("=")
            params[key.strip()] = float(val)
        except ValueError:
            raise SpecParseError(f"bad scaling parameter {token!r}", token=token) from None
    return params
