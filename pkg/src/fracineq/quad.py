"""Adaptive one-dimensional quadrature.

The primary rule is tanh-sinh (double-exponential) refinement, which
absorbs integrable endpoint singularities such as ``(1-t)**(a-1)`` with
``a in (0, 1)`` without special-casing. When the tanh-sinh ladder stalls
an adaptive 15-point Gauss-Kronrod scheme on bisected subintervals takes
over. Integrands are vectorised callables ``f(ndarray) -> ndarray`` and
are never asked for the endpoint values themselves (open rule).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import backend
from .errors import ConvergenceError, DomainError, IntegrandError

# Beyond this trapezoid abscissa both the weight and the offset from the
# endpoint underflow; nodes past it contribute nothing representable.
_T_MAX = 6.8


@dataclass(frozen=True)
class QuadSettings:
    """Tolerances and refinement limits for :func:`integrate`."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_levels: int = 10
    fallback_subdivisions: int = 512

    def __post_init__(self):
        if not (self.abs_tol > 0.0 or self.rel_tol > 0.0):
            raise DomainError("QuadSettings requires abs_tol > 0 or rel_tol > 0")
        if not 3 <= self.max_levels <= 12:
            raise DomainError("QuadSettings.max_levels must lie in [3, 12]")
        if self.fallback_subdivisions < 1:
            raise DomainError("QuadSettings.fallback_subdivisions must be >= 1")


@dataclass(frozen=True)
class QuadResult:
    """Value, conservative absolute error estimate and evaluation count."""

    value: float
    err_estimate: float
    evaluations: int


DEFAULT_SETTINGS = QuadSettings()


def _tolerance(settings: QuadSettings, value: float) -> float:
    return max(settings.abs_tol, settings.rel_tol * abs(value))


def _call(f, x: np.ndarray) -> np.ndarray:
    # FP faults surface as NaN/inf and are reported as IntegrandError
    # by the callers, so the warnings themselves are noise
    with np.errstate(all="ignore"):
        y = np.asarray(f(x), dtype=np.float64)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    return y


def _ts_level_nodes(a: float, b: float, h: float, odd_only: bool):
    """Valid node positions and weights for one refinement level.

    Returns (x, w) with the two symmetric node branches interleaved and
    every node strictly inside (a, b); nodes whose abscissa rounds onto
    an endpoint are dropped, their true weight being negligible.
    """
    halfspan = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    kmax = int(math.floor(_T_MAX / h))
    if odd_only:
        t = (np.arange(1, kmax + 1, 2, dtype=np.float64)) * h
    else:
        t = np.arange(0, kmax + 1, dtype=np.float64) * h
    sigma, w = backend.ts_sigma_weight(t)

    offset = halfspan * sigma
    x_plus = b - offset      # nodes for +t, approaching b
    x_minus = a + offset     # nodes for -t, approaching a
    # branch validity is independent: a node that rounds onto one
    # endpoint must not discard its mirror near the other endpoint
    base = (offset > 0.0) & (w > 0.0)
    ok_plus = base & (x_plus < b)
    ok_minus = base & (x_minus > a)

    if not odd_only and t[0] == 0.0:
        # centre node appears in both branches; keep a single copy
        keep_centre = bool(ok_plus[0])
        xs = [np.array([mid])] if keep_centre else []
        ws = [np.array([w[0]])] if keep_centre else []
        ok_plus = ok_plus.copy()
        ok_minus = ok_minus.copy()
        ok_plus[0] = False
        ok_minus[0] = False
    else:
        xs, ws = [], []
    xs.extend([x_plus[ok_plus], x_minus[ok_minus]])
    ws.extend([w[ok_plus], w[ok_minus]])
    return np.concatenate(xs), np.concatenate(ws)


def _tanh_sinh(f, a: float, b: float, settings: QuadSettings):
    """Run the tanh-sinh ladder; returns (result, converged flag)."""
    halfspan = 0.5 * (b - a)
    evaluations = 0
    total = 0.0          # running trapezoid sum of w*f (without h)
    prev_value = math.nan
    err = math.inf
    value = math.nan

    for level in range(settings.max_levels + 1):
        h = 0.5 ** level
        x, w = _ts_level_nodes(a, b, h, odd_only=level > 0)
        if x.size:
            y = _call(f, x)
            if not np.all(np.isfinite(y)):
                bad = float(x[~np.isfinite(y)][0])
                raise IntegrandError(
                    f"integrand returned a non-finite value at x={bad!r}")
            evaluations += x.size
            total += float(np.dot(w, y))
        value = halfspan * h * total
        if level > 0:
            err = abs(value - prev_value)
            if err <= _tolerance(settings, value):
                return QuadResult(value, err, evaluations), True
        prev_value = value
    return QuadResult(value, err, evaluations), False


# 15-point Kronrod extension of 7-point Gauss (nodes ordered, on [-1, 1]).
_GK_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813])
_GK_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529])
_GK_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870])


def _gk15(f, a: float, b: float):
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _GK_NODES
    y = _call(f, x)
    if not np.all(np.isfinite(y)):
        bad = float(x[~np.isfinite(y)][0])
        raise IntegrandError(
            f"integrand returned a non-finite value at x={bad!r}")
    k = half * float(np.dot(_GK_WK, y))
    g = half * float(np.dot(_GK_WG, y[1::2]))
    return k, abs(k - g), 15


def _gauss_kronrod(f, a: float, b: float, settings: QuadSettings):
    val, err, n = _gk15(f, a, b)
    evaluations = n
    heap = [(-err, 0, a, b, val, err)]
    counter = 1
    total_val, total_err = val, err
    while (total_err > _tolerance(settings, total_val)
           and len(heap) < settings.fallback_subdivisions):
        neg_err, _, aa, bb, v, e = heapq.heappop(heap)
        m = 0.5 * (aa + bb)
        v1, e1, n1 = _gk15(f, aa, m)
        v2, e2, n2 = _gk15(f, m, bb)
        evaluations += n1 + n2
        total_val += v1 + v2 - v
        total_err += e1 + e2 - e
        heapq.heappush(heap, (-e1, counter, aa, m, v1, e1))
        heapq.heappush(heap, (-e2, counter + 1, m, bb, v2, e2))
        counter += 2
    converged = total_err <= _tolerance(settings, total_val)
    return QuadResult(total_val, total_err, evaluations), converged


def integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              settings: QuadSettings | None = None) -> QuadResult:
    """Integrate ``f`` over ``(a, b)``.

    Parameters
    ----------
    f : callable
        Vectorised integrand; finite on the open interval, with at most
        integrable blow-up (exponent > -1) at the endpoints.
    a, b : float
        Finite limits with ``a < b``.
    settings : QuadSettings, optional
        Tolerances and refinement depth; defaults to ``DEFAULT_SETTINGS``.

    Returns
    -------
    QuadResult
        Value, conservative error estimate from successive-level
        differences, and the number of integrand evaluations.

    Raises
    ------
    DomainError       if the interval is invalid.
    IntegrandError    if ``f`` returns NaN/inf at an interior node.
    ConvergenceError  if neither the tanh-sinh ladder nor the
                      Gauss-Kronrod fallback reaches tolerance.
    """
    if settings is None:
        settings = DEFAULT_SETTINGS
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integration limits must be finite")
    if not a < b:
        raise DomainError(f"integration requires a < b, got a={a!r}, b={b!r}")

    ts_result, ok = _tanh_sinh(f, a, b, settings)
    if ok:
        return ts_result

    gk_result, ok = _gauss_kronrod(f, a, b, settings)
    evaluations = ts_result.evaluations + gk_result.evaluations
    if ok:
        return QuadResult(gk_result.value, gk_result.err_estimate, evaluations)

    best = min(ts_result, gk_result, key=lambda r: r.err_estimate)
    raise ConvergenceError("quadrature did not converge", best.value,
                           best.err_estimate, evaluations)
