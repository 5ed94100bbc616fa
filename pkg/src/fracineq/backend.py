"""Numerical kernels with a numba fast path and a pure-numpy fallback.

The hot loops of the library are (a) evaluating a compiled expression
tape at a batch of quadrature nodes and (b) generating tanh-sinh
abscissa offsets and weights. Both exist in two implementations:

* ``numba`` - scalar loops JIT-compiled with ``@njit(cache=True, error_model="numpy")``,
* ``numpy`` - vectorised array code, one pass per tape instruction.

Selection happens once at import via the environment variable
``FRACINEQ_BACKEND``:

* ``auto`` (default): numba when importable, numpy otherwise,
* ``numba``: require numba, raise if it cannot be imported,
* ``numpy``: force the fallback (useful for debugging and benchmarks).

``benchmarks/bench_backends.py`` compares the two paths.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .errors import ConfigError

# Tape opcodes. A tape is (ops, args, consts): for each instruction,
# ops[i] is one of the codes below and args[i] indexes into consts for
# OP_CONST, and is -1 otherwise.
OP_CONST = 0
OP_X = 1
OP_NEG = 2
OP_ADD = 3
OP_SUB = 4
OP_MUL = 5
OP_DIV = 6
OP_POW = 7
OP_EXP = 8
OP_LN = 9
OP_SQRT = 10
OP_ABS = 11

_HALF_PI = math.pi / 2.0


def _resolve_backend() -> str:
    choice = os.environ.get("FRACINEQ_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ConfigError(
            f"FRACINEQ_BACKEND must be 'auto', 'numba' or 'numpy', got {choice!r}")
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise ConfigError("FRACINEQ_BACKEND=numba but numba is not importable")
        return "numpy"
    return "numba"


BACKEND = _resolve_backend()


def using_numba() -> bool:
    return BACKEND == "numba"


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def tape_eval_numpy(ops, args, consts, x):
    """Evaluate a tape at every point of ``x``; domain faults become NaN."""
    stack: list[np.ndarray] = []
    with np.errstate(all="ignore"):
        for i in range(ops.shape[0]):
            op = ops[i]
            if op == OP_CONST:
                stack.append(np.full_like(x, consts[args[i]]))
            elif op == OP_X:
                stack.append(x)
            elif op == OP_NEG:
                stack[-1] = -stack[-1]
            elif op == OP_ADD:
                b = stack.pop()
                stack[-1] = stack[-1] + b
            elif op == OP_SUB:
                b = stack.pop()
                stack[-1] = stack[-1] - b
            elif op == OP_MUL:
                b = stack.pop()
                stack[-1] = stack[-1] * b
            elif op == OP_DIV:
                b = stack.pop()
                stack[-1] = stack[-1] / b
            elif op == OP_POW:
                b = stack.pop()
                stack[-1] = np.power(stack[-1], b)
            elif op == OP_EXP:
                stack[-1] = np.exp(stack[-1])
            elif op == OP_LN:
                a = stack[-1]
                stack[-1] = np.where(a > 0.0, np.log(np.where(a > 0.0, a, 1.0)), np.nan)
            elif op == OP_SQRT:
                a = stack[-1]
                stack[-1] = np.where(a >= 0.0, np.sqrt(np.abs(a)), np.nan)
            elif op == OP_ABS:
                stack[-1] = np.abs(stack[-1])
    return np.ascontiguousarray(stack[-1], dtype=np.float64)


def tape_eval_dual_numpy(ops, args, consts, x):
    """Evaluate value and first derivative of a tape at every point of ``x``."""
    vs: list[np.ndarray] = []
    ds: list[np.ndarray] = []
    with np.errstate(all="ignore"):
        for i in range(ops.shape[0]):
            op = ops[i]
            if op == OP_CONST:
                vs.append(np.full_like(x, consts[args[i]]))
                ds.append(np.zeros_like(x))
            elif op == OP_X:
                vs.append(x)
                ds.append(np.ones_like(x))
            elif op == OP_NEG:
                vs[-1] = -vs[-1]
                ds[-1] = -ds[-1]
            elif op == OP_ADD:
                bv, bd = vs.pop(), ds.pop()
                vs[-1] = vs[-1] + bv
                ds[-1] = ds[-1] + bd
            elif op == OP_SUB:
                bv, bd = vs.pop(), ds.pop()
                vs[-1] = vs[-1] - bv
                ds[-1] = ds[-1] - bd
            elif op == OP_MUL:
                bv, bd = vs.pop(), ds.pop()
                av, ad = vs[-1], ds[-1]
                vs[-1] = av * bv
                ds[-1] = ad * bv + av * bd
            elif op == OP_DIV:
                bv, bd = vs.pop(), ds.pop()
                av, ad = vs[-1], ds[-1]
                vs[-1] = av / bv
                ds[-1] = (ad * bv - av * bd) / (bv * bv)
            elif op == OP_POW:
                bv, bd = vs.pop(), ds.pop()
                av, ad = vs[-1], ds[-1]
                val = np.power(av, bv)
                # constant exponent: monomial rule, valid for negative base
                # with integral exponent; otherwise require a positive base.
                mono = bv * np.power(av, bv - 1.0) * ad
                safe = np.where(av > 0.0, av, 1.0)
                gen = val * (bd * np.log(safe) + bv * ad / safe)
                gen = np.where(av > 0.0, gen, np.nan)
                vs[-1] = val
                ds[-1] = np.where(bd == 0.0, mono, gen)
            elif op == OP_EXP:
                vs[-1] = np.exp(vs[-1])
                ds[-1] = ds[-1] * vs[-1]
            elif op == OP_LN:
                a = vs[-1]
                ok = a > 0.0
                safe = np.where(ok, a, 1.0)
                vs[-1] = np.where(ok, np.log(safe), np.nan)
                ds[-1] = np.where(ok, ds[-1] / safe, np.nan)
            elif op == OP_SQRT:
                a = vs[-1]
                ok = a > 0.0
                root = np.sqrt(np.where(ok, a, 1.0))
                vs[-1] = np.where(ok, root, np.where(a == 0.0, 0.0, np.nan))
                ds[-1] = np.where(ok, ds[-1] / (2.0 * root), np.nan)
            elif op == OP_ABS:
                a = vs[-1]
                vs[-1] = np.abs(a)
                ds[-1] = np.where(a != 0.0, ds[-1] * np.sign(a), np.nan)
    return (np.ascontiguousarray(vs[-1], dtype=np.float64),
            np.ascontiguousarray(ds[-1], dtype=np.float64))


def ts_sigma_weight_numpy(t):
    """tanh-sinh offsets and weights for non-negative trapezoid abscissae.

    For g = (pi/2)*sinh(t), returns sigma = 1 - tanh(g) computed in exp
    form (no cancellation near the endpoints) and the transformation
    weight (pi/2)*cosh(t)*sech(g)^2. Both underflow cleanly to 0.
    """
    with np.errstate(over="ignore", under="ignore"):
        g = _HALF_PI * np.sinh(t)
        eg = np.exp(-2.0 * g)
        sigma = 2.0 * eg / (1.0 + eg)
        sech = 2.0 * np.exp(-g) / (1.0 + eg)
        w = _HALF_PI * np.cosh(t) * sech * sech
    return sigma, w


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if BACKEND == "numba":
    from numba import njit

    @njit(cache=True, error_model="numpy")
    def _tape_eval_jit(ops, args, consts, x, depth):  # pragma: no cover
        n = x.shape[0]
        out = np.empty(n, dtype=np.float64)
        stack = np.empty(depth, dtype=np.float64)
        for j in range(n):
            sp = 0
            for i in range(ops.shape[0]):
                op = ops[i]
                if op == OP_CONST:
                    stack[sp] = consts[args[i]]
                    sp += 1
                elif op == OP_X:
                    stack[sp] = x[j]
                    sp += 1
                elif op == OP_NEG:
                    stack[sp - 1] = -stack[sp - 1]
                elif op == OP_ADD:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] + stack[sp]
                elif op == OP_SUB:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] - stack[sp]
                elif op == OP_MUL:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] * stack[sp]
                elif op == OP_DIV:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] / stack[sp]
                elif op == OP_POW:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] ** stack[sp]
                elif op == OP_EXP:
                    stack[sp - 1] = np.exp(stack[sp - 1])
                elif op == OP_LN:
                    a = stack[sp - 1]
                    stack[sp - 1] = np.log(a) if a > 0.0 else np.nan
                elif op == OP_SQRT:
                    a = stack[sp - 1]
                    stack[sp - 1] = np.sqrt(a) if a >= 0.0 else np.nan
                elif op == OP_ABS:
                    stack[sp - 1] = abs(stack[sp - 1])
            out[j] = stack[0]
        return out

    @njit(cache=True, error_model="numpy")
    def _tape_eval_dual_jit(ops, args, consts, x, depth):  # pragma: no cover
        n = x.shape[0]
        out_v = np.empty(n, dtype=np.float64)
        out_d = np.empty(n, dtype=np.float64)
        sv = np.empty(depth, dtype=np.float64)
        sd = np.empty(depth, dtype=np.float64)
        for j in range(n):
            sp = 0
            for i in range(ops.shape[0]):
                op = ops[i]
                if op == OP_CONST:
                    sv[sp] = consts[args[i]]
                    sd[sp] = 0.0
                    sp += 1
                elif op == OP_X:
                    sv[sp] = x[j]
                    sd[sp] = 1.0
                    sp += 1
                elif op == OP_NEG:
                    sv[sp - 1] = -sv[sp - 1]
                    sd[sp - 1] = -sd[sp - 1]
                elif op == OP_ADD:
                    sp -= 1
                    sv[sp - 1] = sv[sp - 1] + sv[sp]
                    sd[sp - 1] = sd[sp - 1] + sd[sp]
                elif op == OP_SUB:
                    sp -= 1
                    sv[sp - 1] = sv[sp - 1] - sv[sp]
                    sd[sp - 1] = sd[sp - 1] - sd[sp]
                elif op == OP_MUL:
                    sp -= 1
                    av = sv[sp - 1]
                    ad = sd[sp - 1]
                    sv[sp - 1] = av * sv[sp]
                    sd[sp - 1] = ad * sv[sp] + av * sd[sp]
                elif op == OP_DIV:
                    sp -= 1
                    av = sv[sp - 1]
                    ad = sd[sp - 1]
                    bv = sv[sp]
                    bd = sd[sp]
                    sv[sp - 1] = av / bv
                    sd[sp - 1] = (ad * bv - av * bd) / (bv * bv)
                elif op == OP_POW:
                    sp -= 1
                    av = sv[sp - 1]
                    ad = sd[sp - 1]
                    bv = sv[sp]
                    bd = sd[sp]
                    val = av ** bv
                    sv[sp - 1] = val
                    if bd == 0.0:
                        sd[sp - 1] = bv * av ** (bv - 1.0) * ad
                    elif av > 0.0:
                        sd[sp - 1] = val * (bd * np.log(av) + bv * ad / av)
                    else:
                        sd[sp - 1] = np.nan
                elif op == OP_EXP:
                    sv[sp - 1] = np.exp(sv[sp - 1])
                    sd[sp - 1] = sd[sp - 1] * sv[sp - 1]
                elif op == OP_LN:
                    a = sv[sp - 1]
                    if a > 0.0:
                        sv[sp - 1] = np.log(a)
                        sd[sp - 1] = sd[sp - 1] / a
                    else:
                        sv[sp - 1] = np.nan
                        sd[sp - 1] = np.nan
                elif op == OP_SQRT:
                    a = sv[sp - 1]
                    if a > 0.0:
                        r = np.sqrt(a)
                        sv[sp - 1] = r
                        sd[sp - 1] = sd[sp - 1] / (2.0 * r)
                    elif a == 0.0:
                        sv[sp - 1] = 0.0
                        sd[sp - 1] = np.nan
                    else:
                        sv[sp - 1] = np.nan
                        sd[sp - 1] = np.nan
                elif op == OP_ABS:
                    a = sv[sp - 1]
                    sv[sp - 1] = abs(a)
                    if a > 0.0:
                        pass
                    elif a < 0.0:
                        sd[sp - 1] = -sd[sp - 1]
                    else:
                        sd[sp - 1] = np.nan
            out_v[j] = sv[0]
            out_d[j] = sd[0]
        return out_v, out_d

    @njit(cache=True, error_model="numpy")
    def _ts_sigma_weight_jit(t):  # pragma: no cover
        n = t.shape[0]
        sigma = np.empty(n, dtype=np.float64)
        w = np.empty(n, dtype=np.float64)
        for j in range(n):
            g = _HALF_PI * np.sinh(t[j])
            eg = np.exp(-2.0 * g)
            sigma[j] = 2.0 * eg / (1.0 + eg)
            sech = 2.0 * np.exp(-g) / (1.0 + eg)
            w[j] = _HALF_PI * np.cosh(t[j]) * sech * sech
        return sigma, w

    def tape_eval(ops, args, consts, x, depth):
        return _tape_eval_jit(ops, args, consts, x, depth)

    def tape_eval_dual(ops, args, consts, x, depth):
        return _tape_eval_dual_jit(ops, args, consts, x, depth)

    def ts_sigma_weight(t):
        return _ts_sigma_weight_jit(t)

else:
    def tape_eval(ops, args, consts, x, depth):
        return tape_eval_numpy(ops, args, consts, x)

    def tape_eval_dual(ops, args, consts, x, depth):
        return tape_eval_dual_numpy(ops, args, consts, x)

    def ts_sigma_weight(t):
        return ts_sigma_weight_numpy(t)
