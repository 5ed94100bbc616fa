"""Convexity certification, the midpoint/trapezoid sandwich, the
trapezoid-gap identity, and the gap upper bounds with their corollary
reductions.

Every inequality exists in two coefficient variants:

* ``as_printed`` evaluates the displayed constants verbatim, including
  the ones that desk checking shows to be inconsistent;
* ``derivation_consistent`` evaluates the constants obtained by pushing
  the displayed proof steps through without dropping factors.

The two coincide at rho=1, alpha=1. Only the derivation-consistent set
is expected to hold on certified inputs; the printed set is evaluated
and reported as data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .expr import Expr, compile_fn, evaluate, evaluate_dual
from .fracint import FracParams, Interval, katugampola
from .quad import QuadSettings, integrate
from .specfun import beta, beta_rho, ln_gamma

VARIANT_PRINTED = "as_printed"
VARIANT_DERIVED = "derivation_consistent"
VARIANTS = (VARIANT_PRINTED, VARIANT_DERIVED)

# slack added on top of propagated quadrature error in every holds flag
HOLDS_SLACK = 1e-9


@dataclass(frozen=True)
class ConvexityCertificate:
    """Result of empirically checking the generalized s-convexity
    inequality psi(t*a + (1-t)*b) <= t**(alpha*s)*psi(a)
    + (1-t)**(alpha*s)*psi(b) over a lattice plus random triples."""

    is_certified: bool
    worst_violation: float
    witness: tuple[float, float, float] | None
    samples: int


@dataclass(frozen=True)
class SandwichReport:
    lhs: float
    middle: float
    rhs: float
    variant: str
    margin_left: float
    margin_right: float
    holds: tuple[bool, bool]
    quad_err: float


@dataclass(frozen=True)
class LemmaReport:
    side_a: float
    side_b: float
    residual: float
    quad_err: float


@dataclass(frozen=True)
class GapBoundReport:
    gap: float
    bound: float
    theorem: str
    holds: bool
    variant: str
    quad_err: float
    components: tuple[float, float, float] | None = None
    argmin: int | None = None


def _check_variant(variant: str):
    if variant not in VARIANTS:
        raise DomainError(
            f"variant must be one of {VARIANTS}, got {variant!r}")


def _batch_callable(fn):
    if isinstance(fn, Expr):
        return compile_fn(fn)
    if callable(fn):
        return fn
    raise DomainError(f"expected an expression or callable, got {fn!r}")


def certify_s_convex(psi, iv: Interval, s: float, alpha: float,
                     grid: int = 16,
                     rng: np.random.Generator | None = None
                     ) -> ConvexityCertificate:
    """Probe the defining inequality on [iv.u, iv.v] (the psi domain).

    Checks a grid**3 lattice of (a, b, t) triples plus the same number
    of uniform random triples; records the largest left-hand side of
    the rearranged inequality as ``worst_violation`` (<= 0 certifies).
    """
    if grid < 8:
        raise DomainError(f"certification grid must be >= 8, got {grid!r}")
    if not 0.0 < s <= 1.0:
        raise DomainError(f"s must lie in (0, 1], got {s!r}")
    if not alpha > 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha!r}")
    if rng is None:
        rng = np.random.default_rng(0)
    fn = _batch_callable(psi)
    exponent = alpha * s

    lattice = np.linspace(iv.u, iv.v, grid)
    tgrid = np.linspace(0.0, 1.0, grid)
    a = np.repeat(lattice, grid * grid)
    b = np.tile(np.repeat(lattice, grid), grid)
    t = np.tile(tgrid, grid * grid)

    n = grid ** 3
    a = np.concatenate([a, rng.uniform(iv.u, iv.v, n)])
    b = np.concatenate([b, rng.uniform(iv.u, iv.v, n)])
    t = np.concatenate([t, rng.uniform(0.0, 1.0, n)])

    mixed = t * a + (1.0 - t) * b
    with np.errstate(all="ignore"):
        mid_val = fn(mixed)
        left_term = np.power(t, exponent) * fn(a)
        right_term = np.power(1.0 - t, exponent) * fn(b)
        gap = mid_val - left_term - right_term
    if not np.all(np.isfinite(gap)):
        bad = int(np.flatnonzero(~np.isfinite(gap))[0])
        raise DomainError(
            "psi is not finite on the certification domain "
            f"(a={float(a[bad])!r}, b={float(b[bad])!r}, "
            f"t={float(t[bad])!r})")
    # gaps below the rounding resolution of their own evaluation are
    # numerically indistinguishable from zero; recording them as zero
    # keeps exact-equality cases (e.g. alpha*s == 1 with psi linear)
    # from flapping on +-1 ulp noise
    noise = 8.0 * np.finfo(float).eps * (np.abs(mid_val) + np.abs(left_term)
                                         + np.abs(right_term))
    gap = np.where(np.abs(gap) <= noise, 0.0, gap)

    worst_idx = int(np.argmax(gap))
    worst = float(gap[worst_idx])
    certified = worst <= 0.0
    witness = None
    if not certified:
        witness = (float(a[worst_idx]), float(b[worst_idx]),
                   float(t[worst_idx]))
    return ConvexityCertificate(certified, worst, witness, 2 * n)


def _operator_average(psi: Expr, iv: Interval, alpha: float, rho: float,
                      settings: QuadSettings | None):
    """Normalised operator average and its propagated quadrature error."""
    u_r = iv.u ** rho
    v_r = iv.v ** rho
    left = katugampola("left", psi, iv, alpha, rho, settings)
    right = katugampola("right", psi, iv, alpha, rho, settings)
    factor = 0.5 * math.exp(alpha * math.log(rho) + ln_gamma(alpha + 1.0)
                            - alpha * math.log(v_r - u_r))
    value = factor * (left.value + right.value)
    err = factor * (left.err_estimate + right.err_estimate)
    return value, err


def _trapezoid_gap(psi: Expr, iv: Interval, alpha: float, rho: float,
                   settings: QuadSettings | None):
    """side_a of the identity: trapezoid minus operator average."""
    u_r = iv.u ** rho
    v_r = iv.v ** rho
    trap = 0.5 * (evaluate(psi, u_r) + evaluate(psi, v_r))
    avg, err = _operator_average(psi, iv, alpha, rho, settings)
    return trap - avg, err


def hh_sandwich(psi: Expr, iv: Interval, fp: FracParams, variant: str,
                settings: QuadSettings | None = None) -> SandwichReport:
    """The three-member midpoint/operator/trapezoid chain.

    lhs  = C_L * psi((u**rho + v**rho)/2)
    mid  = normalised operator average (by quadrature)
    rhs  = C_R * (psi(u**rho) + psi(v**rho))/2

    with C_L = 2**(alpha*(s-1)) and C_R = 1/(rho*(1+s))
    + alpha*beta(alpha, alpha*s+1) verbatim for ``as_printed``, and
    C_L = 2**(alpha*s-1), C_R = 1/(1+s) + alpha*beta(alpha, alpha*s+1)
    for ``derivation_consistent``.
    """
    _check_variant(variant)
    alpha, rho, s = fp.alpha, fp.rho, fp.s
    u_r = iv.u ** rho
    v_r = iv.v ** rho

    if variant == VARIANT_PRINTED:
        c_left = 2.0 ** (alpha * (s - 1.0))
        c_right = 1.0 / (rho * (1.0 + s)) + alpha * beta(alpha, alpha * s + 1.0)
    else:
        c_left = 2.0 ** (alpha * s - 1.0)
        c_right = 1.0 / (1.0 + s) + alpha * beta(alpha, alpha * s + 1.0)

    lhs = c_left * evaluate(psi, 0.5 * (u_r + v_r))
    rhs = c_right * 0.5 * (evaluate(psi, u_r) + evaluate(psi, v_r))
    middle, quad_err = _operator_average(psi, iv, alpha, rho, settings)

    margin_left = middle - lhs
    margin_right = rhs - middle
    slack = quad_err + HOLDS_SLACK
    return SandwichReport(
        lhs=lhs, middle=middle, rhs=rhs, variant=variant,
        margin_left=margin_left, margin_right=margin_right,
        holds=(margin_left >= -slack, margin_right >= -slack),
        quad_err=quad_err)


def lemma_identity(psi: Expr, iv: Interval, alpha: float, rho: float,
                   settings: QuadSettings | None = None) -> LemmaReport:
    """Both sides of the trapezoid-gap identity, computed independently.

    side_a uses the fractional operators; side_b integrates the
    derivative form over (0, 1). Their agreement is a correctness check
    on the whole operator/quadrature stack.
    """
    u_r = iv.u ** rho
    v_r = iv.v ** rho
    side_a, err_a = _trapezoid_gap(psi, iv, alpha, rho, settings)

    fn = compile_fn(psi)

    def integrand(t):
        with np.errstate(all="ignore"):
            tr = t ** rho
            weight = (1.0 - tr) ** alpha - tr ** alpha
            arg = tr * u_r + (1.0 - tr) * v_r
            _, deriv = fn.dual(arg)
            return weight * np.power(t, rho - 1.0) * deriv

    inner = integrate(integrand, 0.0, 1.0, settings)
    scale = 0.5 * rho * (v_r - u_r)
    side_b = scale * inner.value
    quad_err = err_a + scale * inner.err_estimate
    return LemmaReport(side_a=side_a, side_b=side_b,
                       residual=side_a - side_b, quad_err=quad_err)


def _endpoint_derivative_power_sum(psi: Expr, u_r: float, v_r: float,
                                   q: float):
    du = evaluate_dual(psi, u_r).deriv
    dv = evaluate_dual(psi, v_r).deriv
    return (abs(du) ** q + abs(dv) ** q) ** (1.0 / q)


def _gap_ingredients(psi: Expr, iv: Interval, fp: FracParams,
                     settings: QuadSettings | None):
    u_r = iv.u ** fp.rho
    v_r = iv.v ** fp.rho
    # endpoint derivatives first: their domain errors should surface
    # before any quadrature is spent
    power_sum = _endpoint_derivative_power_sum(psi, u_r, v_r, fp.q)
    side_a, err = _trapezoid_gap(psi, iv, fp.alpha, fp.rho, settings)
    return v_r - u_r, power_sum, abs(side_a), err


def _bracket(fp: FracParams, variant: str) -> float:
    """Common bracket: deformed-beta term plus the tail coefficient.

    Printed variants evaluate the deformed beta by quadrature; the
    derivation-consistent ones use the closed-form beta, keeping the
    two routes independent.
    """
    alpha, rho, s = fp.alpha, fp.rho, fp.s
    dd = alpha * (s + 1.0) + 1.0
    if variant == VARIANT_PRINTED:
        return (beta_rho(alpha * s + 1.0, alpha + 1.0, rho) / rho
                + 1.0 / (dd * rho))
    return (beta(alpha * s + 1.0, alpha + 1.0) + 1.0 / dd) / rho


def _holder_factor(p: float, rho: float) -> float:
    """(1/(p*(rho-1)+1))**(1/p); +inf when the underlying integral
    diverges (p*(rho-1)+1 <= 0), which makes the bound vacuous."""
    den = p * (rho - 1.0) + 1.0
    if den <= 0.0:
        return math.inf
    return (1.0 / den) ** (1.0 / p)


def _report(gap: float, bound: float, theorem: str, variant: str,
            quad_err: float, components=None, argmin=None) -> GapBoundReport:
    holds = gap <= bound + quad_err + HOLDS_SLACK
    return GapBoundReport(gap=gap, bound=bound, theorem=theorem, holds=holds,
                          variant=variant, quad_err=quad_err,
                          components=components, argmin=argmin)


def gap_bound_t2(psi: Expr, iv: Interval, fp: FracParams,
                 settings: QuadSettings | None = None,
                 variant: str = VARIANT_PRINTED) -> GapBoundReport:
    """Power-mean route bound on the trapezoid gap."""
    _check_variant(variant)
    alpha, rho, s, q = fp.alpha, fp.rho, fp.s, fp.q
    delta, power_sum, gap, err = _gap_ingredients(psi, iv, fp, settings)
    if variant == VARIANT_PRINTED:
        first = (1.0 / ((alpha + 1.0) * rho)) ** ((q - 1.0) / q)
        bracket = (beta_rho(alpha * s + 1.0, alpha + 1.0, rho) / rho
                   + 1.0 / (alpha * (s + 1.0) * rho + 1.0))
    else:
        first = (2.0 / ((alpha + 1.0) * rho)) ** ((q - 1.0) / q)
        bracket = _bracket(fp, variant)
    bound = (0.5 * rho * delta) * first * bracket ** (1.0 / q) * power_sum
    return _report(gap, bound, "T2", variant, err)


def gap_bound_t3(psi: Expr, iv: Interval, fp: FracParams,
                 settings: QuadSettings | None = None,
                 variant: str = VARIANT_PRINTED) -> GapBoundReport:
    """Second power-mean route; every rho power cancels in the
    derivation-consistent form."""
    _check_variant(variant)
    rho, q = fp.rho, fp.q
    delta, power_sum, gap, err = _gap_ingredients(psi, iv, fp, settings)
    if variant == VARIANT_PRINTED:
        bound = (0.5 * delta * (1.0 / rho) ** ((q - 1.0) / q)
                 * _bracket(fp, variant) ** (1.0 / q) * power_sum)
    else:
        bound = (0.5 * delta * (rho * _bracket(fp, variant)) ** (1.0 / q)
                 * power_sum)
    return _report(gap, bound, "T3", variant, err)


def gap_bound_t4(psi: Expr, iv: Interval, fp: FracParams,
                 settings: QuadSettings | None = None,
                 variant: str = VARIANT_PRINTED) -> GapBoundReport:
    """Hoelder route bound; requires the conjugate pair (p, q)."""
    _check_variant(variant)
    if fp.p is None:
        raise DomainError("gap_bound_t4 requires fp.p (Hoelder conjugate)")
    rho, q, p = fp.rho, fp.q, fp.p
    delta, power_sum, gap, err = _gap_ingredients(psi, iv, fp, settings)
    bound = (0.5 * rho * delta * _holder_factor(p, rho)
             * _bracket(fp, variant) ** (1.0 / q) * power_sum)
    return _report(gap, bound, "T4", variant, err)


def min_bound(psi: Expr, iv: Interval, fp: FracParams,
              settings: QuadSettings | None = None,
              variant: str = VARIANT_PRINTED) -> GapBoundReport:
    """Minimum of the three route coefficients, scaled by half the
    transformed interval width. Ties report the lowest index."""
    _check_variant(variant)
    if not fp.q > 1.0:
        raise DomainError("min_bound requires q > 1")
    if fp.p is None:
        raise DomainError("min_bound requires fp.p (Hoelder conjugate)")
    alpha, rho, q, p = fp.alpha, fp.rho, fp.q, fp.p
    delta, power_sum, gap, err = _gap_ingredients(psi, iv, fp, settings)

    bracket = _bracket(fp, variant)
    if variant == VARIANT_PRINTED:
        m1 = (rho * (1.0 / (rho * (alpha + 1.0))) ** ((q - 1.0) / q)
              * bracket ** (1.0 / q) * power_sum)
        m2 = ((1.0 / rho) ** ((q - 1.0) / q) * bracket ** (1.0 / q)
              * power_sum)
    else:
        m1 = (rho * (2.0 / (rho * (alpha + 1.0))) ** ((q - 1.0) / q)
              * bracket ** (1.0 / q) * power_sum)
        m2 = (rho * bracket) ** (1.0 / q) * power_sum
    m3 = rho * _holder_factor(p, rho) * bracket ** (1.0 / q) * power_sum

    components = (m1, m2, m3)
    smallest = min(components)
    argmin = next(i for i, m in enumerate(components)
                  if m <= smallest + 1e-12)
    bound = smallest * 0.5 * delta
    return _report(gap, bound, "min_M", variant, err,
                   components=components, argmin=argmin)
