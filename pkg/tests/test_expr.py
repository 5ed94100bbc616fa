import math

import numpy as np
import pytest

from corpus import CORPUS
from fracineq.errors import EvaluationError, ParseError
from fracineq.expr import (BinOp, DualValue, Func, Lit, Neg, Var,
                           eval_dual_many, eval_many, evaluate,
                           evaluate_dual, parse, parse_function, to_text)


class TestParse:
    def test_power_structure(self):
        e = parse("x^2")
        assert e == BinOp(op="^", lhs=Var(), rhs=Lit(value=2.0))

    def test_division_structure(self):
        e = parse("1/x")
        assert e == BinOp(op="/", lhs=Lit(value=1.0), rhs=Var())

    def test_dangling_operator_offset(self):
        with pytest.raises(ParseError) as excinfo:
            parse("x +")
        assert excinfo.value.position == 3
        assert "expression" in excinfo.value.expected

    def test_unknown_identifier(self):
        with pytest.raises(ParseError) as excinfo:
            parse("2*y")
        assert excinfo.value.position == 2

    def test_unbalanced_paren(self):
        with pytest.raises(ParseError):
            parse("(x+1")

    def test_power_is_right_associative(self):
        assert evaluate(parse("2^3^2"), 0.0) == 512.0

    def test_unary_minus_binds_below_power(self):
        assert evaluate(parse("-x^2"), 3.0) == -9.0

    def test_pow_call_form(self):
        assert parse("pow(x, 3)") == parse("x^3")

    def test_function_calls(self):
        e = parse("exp(ln(x))")
        assert isinstance(e, Func) and e.name == "exp"
        assert evaluate(e, 2.5) == pytest.approx(2.5, rel=1e-15)


class TestNamedFamilies:
    def test_power_family(self):
        e = parse_function("power(2.5)")
        assert e == BinOp(op="^", lhs=Var(), rhs=Lit(value=2.5))
        assert evaluate_dual(e, 4.0).deriv == pytest.approx(
            2.5 * 4.0 ** 1.5, rel=1e-14)

    def test_recip_family(self):
        e = parse_function("recip")
        assert evaluate(e, 2.0) == 0.5
        assert evaluate_dual(e, 2.0).deriv == -0.25

    def test_affine_family(self):
        e = parse_function("affine(2, 1)")
        assert evaluate(e, 3.0) == 7.0
        assert evaluate_dual(e, 10.0).deriv == 2.0

    def test_plain_text_falls_through(self):
        assert parse_function("x^2") == parse("x^2")


class TestEvaluate:
    @pytest.mark.parametrize("text,x,expected", [
        ("x^2", 3.0, 9.0),
        ("1/x", 2.0, 0.5),
        ("x^0.5", 0.25, 0.5),
    ])
    def test_examples(self, text, x, expected):
        assert evaluate(parse(text), x) == pytest.approx(expected, rel=1e-15)

    def test_ln_domain(self):
        with pytest.raises(EvaluationError) as excinfo:
            evaluate(parse("ln(x)"), -1.0)
        assert excinfo.value.node_kind == "ln"

    def test_division_by_zero(self):
        with pytest.raises(EvaluationError) as excinfo:
            evaluate(parse("1/(x-2)"), 2.0)
        assert excinfo.value.node_kind == "/"

    def test_negative_base_integer_exponent_allowed(self):
        assert evaluate(parse("x^3"), -2.0) == -8.0

    def test_negative_base_fractional_exponent_rejected(self):
        with pytest.raises(EvaluationError):
            evaluate(parse("x^0.5"), -1.0)

    def test_zero_base_negative_exponent_rejected(self):
        with pytest.raises(EvaluationError):
            evaluate(parse("x^-2"), 0.0)


class TestDual:
    @pytest.mark.parametrize("text,x,value,deriv", [
        ("x^2", 3.0, 9.0, 6.0),
        ("1/x", 2.0, 0.5, -0.25),
    ])
    def test_examples(self, text, x, value, deriv):
        d = evaluate_dual(parse(text), x)
        assert d == DualValue(pytest.approx(value, rel=1e-14),
                              pytest.approx(deriv, rel=1e-14))

    def test_three_halves_power_against_central_difference(self):
        e = parse("x^1.5")
        d = evaluate_dual(e, 4.0)
        assert d.value == pytest.approx(8.0, rel=1e-14)
        h = 1e-6
        fd = (evaluate(e, 4.0 + h) - evaluate(e, 4.0 - h)) / (2.0 * h)
        assert d.deriv == pytest.approx(fd, rel=1e-6)
        assert d.deriv == pytest.approx(3.0, rel=1e-13)

    def test_abs_kink_rejected(self):
        with pytest.raises(EvaluationError):
            evaluate_dual(parse("abs(x)"), 0.0)

    def test_corpus_against_central_differences(self):
        rng = np.random.default_rng(2024)
        for text, lo, hi in CORPUS:
            e = parse(text)
            for x in rng.uniform(lo, hi, 100):
                x = float(x)
                d = evaluate_dual(e, x)
                h = 1e-6 * max(1.0, abs(x))
                fd = (evaluate(e, x + h) - evaluate(e, x - h)) / (2.0 * h)
                scale = max(abs(fd), 1.0)
                assert abs(d.deriv - fd) / scale <= 1e-5, (text, x)


class TestPrinting:
    def test_round_trip_is_structural_identity(self):
        for text, _, _ in CORPUS:
            e = parse(text)
            assert parse(to_text(e)) == e

    def test_round_trip_eval_bit_for_bit(self):
        for text, lo, hi in CORPUS:
            e = parse(text)
            e2 = parse(to_text(e))
            for x in np.linspace(lo, hi, 7):
                assert evaluate(e, float(x)) == evaluate(e2, float(x))

    def test_tricky_nestings(self):
        for text in ["-(x+1)^2", "x-(x-1)", "2/(3/x)", "(x^2)^3",
                     "x^(2^3)", "-x*-x", "x--1"]:
            e = parse(text)
            assert parse(to_text(e)) == e
            assert evaluate(parse(to_text(e)), 1.7) == evaluate(e, 1.7)


class TestBatch:
    def test_matches_scalar_walk(self):
        xs = np.linspace(0.4, 3.0, 64)
        for text, lo, hi in CORPUS:
            e = parse(text)
            pts = np.linspace(lo, hi, 64)
            batch = eval_many(e, pts)
            for x, v in zip(pts, batch):
                assert v == pytest.approx(evaluate(e, float(x)), rel=1e-13,
                                          abs=1e-300)

    def test_dual_matches_scalar_walk(self):
        for text, lo, hi in CORPUS:
            e = parse(text)
            pts = np.linspace(lo + 1e-3, hi, 32)
            vals, ders = eval_dual_many(e, pts)
            for x, v, d in zip(pts, vals, ders):
                ref = evaluate_dual(e, float(x))
                assert v == pytest.approx(ref.value, rel=1e-13, abs=1e-300)
                assert d == pytest.approx(ref.deriv, rel=1e-12, abs=1e-300)

    def test_domain_faults_become_nan(self):
        vals = eval_many(parse("ln(x)"), np.array([-1.0, 1.0]))
        assert math.isnan(vals[0]) and vals[1] == 0.0
