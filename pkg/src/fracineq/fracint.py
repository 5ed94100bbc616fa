"""Katugampola fractional integral operators and parameter validation.

The two operators act on a function psi defined on the transformed
interval [u**rho, v**rho]:

* left:  (rho**(1-a)/Gamma(a)) * integral_u^v (v**rho - t**rho)**(a-1)
  * t**(rho-1) * psi(t**rho) dt
* right: same with kernel (t**rho - u**rho)**(a-1).

The evaluation-point convention is the load-bearing detail: psi is
sampled at t**rho, not at t, which is what makes the trapezoid and
midpoint comparisons in :mod:`fracineq.ineq` line up for every rho.
With rho=1 the operators reduce to Riemann-Liouville.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .expr import Expr, compile_fn
from .quad import QuadResult, QuadSettings, integrate
from .specfun import ln_gamma

_SIDES = ("left", "right")


@dataclass(frozen=True)
class Interval:
    """Base interval [u, v] with the standing hypothesis 0 <= u < v."""

    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise DomainError("interval endpoints must be finite")
        if not 0.0 <= self.u < self.v:
            raise DomainError(
                f"interval requires 0 <= u < v, got u={self.u!r}, v={self.v!r}")


@dataclass(frozen=True)
class FracParams:
    """Order alpha, deformation rho, convexity index s and exponents q, p."""

    alpha: float
    rho: float
    s: float
    q: float = 1.0
    p: float | None = None

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise DomainError(f"alpha must be > 0, got {self.alpha!r}")
        if not self.rho > 0.0:
            raise DomainError(f"rho must be > 0, got {self.rho!r}")
        if not 0.0 < self.s <= 1.0:
            raise DomainError(f"s must lie in (0, 1], got {self.s!r}")
        if not self.q >= 1.0:
            raise DomainError(f"q must be >= 1, got {self.q!r}")
        if self.p is not None:
            if not self.p > 1.0:
                raise DomainError(f"p must be > 1, got {self.p!r}")
            if abs(1.0 / self.p + 1.0 / self.q - 1.0) > 1e-12:
                raise DomainError(
                    f"p={self.p!r} and q={self.q!r} are not conjugate "
                    "(1/p + 1/q must equal 1)")


def conjugate_exponent(q: float) -> float:
    """The Hoelder conjugate p = q/(q-1); requires q > 1."""
    if not q > 1.0:
        raise DomainError(f"conjugate exponent needs q > 1, got {q!r}")
    return q / (q - 1.0)


def katugampola(side: str, psi: Expr, iv: Interval, alpha: float, rho: float,
                settings: QuadSettings | None = None) -> QuadResult:
    """One side of the fractional integral pair applied to psi.

    ``side='left'`` evaluates the ascending operator at v**rho,
    ``side='right'`` the descending one at u**rho. The kernel is
    singular at one endpoint when alpha < 1; the quadrature engine's
    open rule absorbs it.
    """
    if side not in _SIDES:
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")
    if not alpha > 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha!r}")
    if not rho > 0.0:
        raise DomainError(f"rho must be > 0, got {rho!r}")

    u, v = iv.u, iv.v
    u_r = u ** rho
    v_r = v ** rho
    mid = 0.5 * (u + v)
    fn = compile_fn(psi)

    # The kernel is singular at t=v (left) or t=u (right) when
    # alpha < 1. The integral is split at the midpoint and the singular
    # half is rewritten in the offset coordinate y (distance from the
    # singular endpoint), with the kernel difference evaluated through
    # expm1/log1p. This keeps full relative precision arbitrarily close
    # to the singularity, where the direct form v**rho - t**rho would
    # be limited to absolute ulp resolution.

    def smooth_part(t):
        with np.errstate(all="ignore"):
            tr = t ** rho
            diff = (v_r - tr) if side == "left" else (tr - u_r)
            kern = np.power(diff, alpha - 1.0)
            return kern * np.power(t, rho - 1.0) * fn(tr)

    if side == "left":
        def singular_part(y):
            with np.errstate(all="ignore"):
                t = v - y
                drop = -np.expm1(rho * np.log1p(-y / v))
                kern = np.power(v_r * drop, alpha - 1.0)
                return kern * np.power(t, rho - 1.0) * fn(t ** rho)

        lo = integrate(smooth_part, u, mid, settings)
        hi = integrate(singular_part, 0.0, v - mid, settings)
    else:
        if u == 0.0:
            def singular_part(y):
                with np.errstate(all="ignore"):
                    # (y**rho)**(alpha-1) * y**(rho-1) folded into one
                    # power so y**rho cannot underflow first
                    return np.power(y, rho * alpha - 1.0) * fn(y ** rho)
        else:
            def singular_part(y):
                with np.errstate(all="ignore"):
                    t = u + y
                    rise = np.expm1(rho * np.log1p(y / u))
                    kern = np.power(u_r * rise, alpha - 1.0)
                    return kern * np.power(t, rho - 1.0) * fn(t ** rho)

        lo = integrate(singular_part, 0.0, mid - u, settings)
        hi = integrate(smooth_part, mid, v, settings)

    prefactor = math.exp((1.0 - alpha) * math.log(rho) - ln_gamma(alpha))
    return QuadResult(value=prefactor * (lo.value + hi.value),
                      err_estimate=prefactor * (lo.err_estimate
                                                + hi.err_estimate),
                      evaluations=lo.evaluations + hi.evaluations)


def riemann_liouville(side: str, psi: Expr, iv: Interval, alpha: float,
                      settings: QuadSettings | None = None) -> QuadResult:
    """Classical fractional integral; the rho=1 reduction."""
    return katugampola(side, psi, iv, alpha, 1.0, settings)
