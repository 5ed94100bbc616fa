"""Special means and the four trapezoid-gap propositions built on them.

The propositions are evaluated exactly as displayed, including the two
suspect spots: propositions 3 and 4 compare the arithmetic mean of the
reciprocals against the logarithmic mean itself (not its reciprocal),
and the proposition-3 denominator is read as 2**(((q-1)/q)+1), the same
shape as proposition 1. Holds/fails status is data, not an assertion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

PROPOSITIONS = ("P1", "P2", "P3", "P4")

# slack used by the holds flag: lhs <= bound + this
HOLDS_SLACK = 1e-12


@dataclass(frozen=True)
class MeansReport:
    lhs: float
    bound: float
    proposition: str
    holds: bool


def _require_positive(u: float, v: float):
    if not (u > 0.0 and v > 0.0):
        raise DomainError(f"means require u, v > 0, got u={u!r}, v={v!r}")


def arithmetic_mean(u: float, v: float) -> float:
    _require_positive(u, v)
    return 0.5 * (u + v)


def logarithmic_mean(u: float, v: float) -> float:
    """(v - u) / (ln v - ln u); continuous limit u at u == v."""
    _require_positive(u, v)
    if u == v:
        return u
    lo, hi = min(u, v), max(u, v)
    return (hi - lo) / (math.log(hi) - math.log(lo))


def generalized_log_mean(u: float, v: float, r: int) -> float:
    """[(v**(r+1) - u**(r+1)) / ((v - u)*(r + 1))]**(1/r) for integer
    r outside {-1, 0}."""
    _require_positive(u, v)
    if not (isinstance(r, int) and r not in (-1, 0)):
        raise DomainError(
            f"r must be an integer outside {{-1, 0}}, got {r!r}")
    if not u < v:
        raise DomainError(f"generalized_log_mean requires u < v, got "
                          f"u={u!r}, v={v!r}")
    core = (v ** (r + 1) - u ** (r + 1)) / ((v - u) * (r + 1))
    return core ** (1.0 / r)


def _power_mean_arg(u: float, v: float, expo: float, q: float) -> float:
    """A**(1/q) of (|u|**expo, |v|**expo)."""
    return (0.5 * (abs(u) ** expo + abs(v) ** expo)) ** (1.0 / q)


def check_proposition(idx: str, u: float, v: float, r: int | None = None,
                      q: float = 1.0) -> MeansReport:
    """Evaluate one proposition's two sides exactly as displayed.

    P1/P2 bound |A(u**r, v**r) - L_r(u,v)**r|, need |r| >= 2.
    P3/P4 bound |A(1/u, 1/v) - L(u,v)| and take no r.
    """
    if idx not in PROPOSITIONS:
        raise DomainError(f"proposition must be one of {PROPOSITIONS}, "
                          f"got {idx!r}")
    _require_positive(u, v)
    if not u < v:
        raise DomainError(f"propositions require 0 < u < v, got u={u!r}, "
                          f"v={v!r}")
    if not q >= 1.0:
        raise DomainError(f"q must be >= 1, got {q!r}")

    if idx in ("P1", "P2"):
        if r is None:
            raise DomainError(f"{idx} requires the integer power r")
        if not (isinstance(r, int) and abs(r) >= 2):
            raise DomainError(f"{idx} requires integer |r| >= 2, got {r!r}")
        lhs = abs(arithmetic_mean(u ** r, v ** r)
                  - generalized_log_mean(u, v, r) ** r)
        mean_part = _power_mean_arg(u, v, q * (r - 1), q)
        if idx == "P1":
            bound = (v - u) * abs(r) / 2.0 ** ((q - 1.0) / q + 1.0) * mean_part
        else:
            bound = (v - u) * abs(r) / 2.0 * mean_part
    else:
        if r is not None:
            raise DomainError(f"{idx} takes no r")
        lhs = abs(arithmetic_mean(1.0 / u, 1.0 / v) - logarithmic_mean(u, v))
        mean_part = _power_mean_arg(u, v, -2.0 * q, q)
        if idx == "P3":
            bound = (v - u) / 2.0 ** ((q - 1.0) / q + 1.0) * mean_part
        else:
            bound = (v - u) / 2.0 * mean_part

    return MeansReport(lhs=lhs, bound=bound, proposition=idx,
                       holds=lhs <= bound + HOLDS_SLACK)
