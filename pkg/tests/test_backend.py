import os
import subprocess
import sys

import numpy as np
import pytest

from corpus import CORPUS
from fracineq import backend
from fracineq.expr import compile_fn, parse


@pytest.mark.skipif(not backend.using_numba(),
                    reason="numba backend not active")
class TestCrossBackendAgreement:
    def test_tape_eval_matches_numpy(self):
        rng = np.random.default_rng(31)
        for text, lo, hi in CORPUS:
            fn = compile_fn(parse(text))
            x = rng.uniform(lo, hi, 257)
            fast = backend.tape_eval(fn.ops, fn.args, fn.consts, x,
                                     fn.stack_depth)
            ref = backend.tape_eval_numpy(fn.ops, fn.args, fn.consts, x)
            # backends may differ by an ulp in pow/exp; cancellation
            # in the tape can amplify that, hence the looser bounds
            np.testing.assert_allclose(fast, ref, rtol=1e-11, atol=1e-13)

    def test_tape_dual_matches_numpy(self):
        rng = np.random.default_rng(37)
        for text, lo, hi in CORPUS:
            fn = compile_fn(parse(text))
            x = rng.uniform(lo, hi, 127)
            fv, fd = backend.tape_eval_dual(fn.ops, fn.args, fn.consts, x,
                                            fn.stack_depth)
            rv, rd = backend.tape_eval_dual_numpy(fn.ops, fn.args,
                                                  fn.consts, x)
            np.testing.assert_allclose(fv, rv, rtol=1e-11, atol=1e-13)
            np.testing.assert_allclose(fd, rd, rtol=1e-11, atol=1e-13)

    def test_node_kernel_matches_numpy(self):
        t = np.linspace(0.0, 6.8, 2001)
        s1, w1 = backend.ts_sigma_weight(t)
        s2, w2 = backend.ts_sigma_weight_numpy(t)
        np.testing.assert_allclose(s1, s2, rtol=1e-13, atol=1e-280)
        np.testing.assert_allclose(w1, w2, rtol=1e-13, atol=1e-280)

    def test_domain_faults_agree(self):
        fn = compile_fn(parse("ln(x) + x^0.5"))
        x = np.array([-2.0, 0.5])
        fast = backend.tape_eval(fn.ops, fn.args, fn.consts, x,
                                 fn.stack_depth)
        ref = backend.tape_eval_numpy(fn.ops, fn.args, fn.consts, x)
        assert np.isnan(fast[0]) and np.isnan(ref[0])
        np.testing.assert_allclose(fast[1], ref[1], rtol=1e-15)


def _run_with_backend(value: str, code: str) -> subprocess.CompletedProcess:
    env = dict(os.environ, FRACINEQ_BACKEND=value)
    return subprocess.run([sys.executable, "-c", code], env=env,
                          capture_output=True, text=True)


class TestEnvFlag:
    def test_numpy_fallback_selected(self):
        proc = _run_with_backend("numpy", (
            "from fracineq import backend\n"
            "assert not backend.using_numba()\n"
            "from fracineq.quad import integrate\n"
            "r = integrate(lambda t: t**-0.5, 0.0, 1.0)\n"
            "assert abs(r.value - 2.0) < 1e-9, r.value\n"
            "from fracineq.expr import parse, evaluate_dual\n"
            "d = evaluate_dual(parse('x^1.5'), 4.0)\n"
            "assert abs(d.deriv - 3.0) < 1e-12\n"
            "print('ok')\n"))
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout.strip() == "ok"

    def test_invalid_value_rejected(self):
        proc = _run_with_backend("fortran", "import fracineq.backend\n")
        assert proc.returncode != 0
        assert "FRACINEQ_BACKEND" in proc.stderr
