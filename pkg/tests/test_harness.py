import dataclasses
import json
import shlex

import pytest

from fracineq import cli
from fracineq.errors import ConfigError
from fracineq.expr import to_text
from fracineq.harness import (CHECKS, SweepConfig, load_config,
                              reproduce_reference, resolve_psi, run_sweep,
                              write_csv, write_json)
from fracineq.ineq import VARIANT_DERIVED, VARIANT_PRINTED


def make_config(**overrides):
    base = dict(
        psi_list=("x^2",), alpha_grid=(1.0,), rho_grid=(1.0,),
        s_grid=(1.0,), q_grid=(1.0,), intervals=((0.0, 1.0),),
        checks=("sandwich",), variants=(VARIANT_DERIVED,), seed=7)
    base.update(overrides)
    return SweepConfig(**base)


class TestConfig:
    def test_loader_round_trip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({
            "psi": ["x^2"], "alpha": [1, 2], "rho": [1], "s": [0.5],
            "q": [1, 2], "intervals": [[0, 1]], "checks": ["lemma"],
            "variants": ["printed"], "seed": 3,
            "tol": {"abs_tol": 1e-9, "rel_tol": 1e-9}}))
        cfg = load_config(str(path))
        assert cfg.alpha_grid == (1.0, 2.0)
        assert cfg.variants == (VARIANT_PRINTED,)
        assert cfg.tol.abs_tol == 1e-9
        assert cfg.seed == 3

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({
            "psi": ["x"], "alpha": [1], "rho": [1], "s": [1], "q": [1],
            "intervals": [[0, 1]], "checks": ["lemma"], "bogus": 1}))
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_missing_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"psi": ["x"]}))
        with pytest.raises(ConfigError):
            load_config(str(path))

    @pytest.mark.parametrize("bad", [
        dict(alpha_grid=()),
        dict(alpha_grid=(-1.0,)),
        dict(s_grid=(1.5,)),
        dict(q_grid=(0.5,)),
        dict(checks=("nope",)),
        dict(variants=("nope",)),
        dict(intervals=((2.0, 1.0),)),
        dict(r_grid=(1,)),
        dict(certify_grid=4),
    ])
    def test_invariants(self, bad):
        with pytest.raises(ConfigError):
            make_config(**bad)

    def test_resolve_psi_family(self):
        e = resolve_psi("power(s*alpha)", 0.5, 2.0)
        assert to_text(e) == "x^1.0"
        e = resolve_psi("x^2", 0.5, 2.0)
        assert to_text(e) == "x^2.0"


class TestRunSweep:
    def test_single_cell_classical_margins(self):
        result = run_sweep(make_config())
        assert len(result.rows) == 1
        row = result.rows[0]
        assert row["margin_left"] == pytest.approx(1.0 / 12.0, abs=1e-9)
        assert row["margin_right"] == pytest.approx(1.0 / 6.0, abs=1e-9)
        assert row["certified"] is True
        assert row["holds"] is True
        assert result.violations == []

    def test_empty_checks_gives_zero_rows(self):
        result = run_sweep(make_config(checks=()))
        assert result.rows == []

    def test_lemma_cell_count_and_residuals(self):
        cfg = make_config(checks=("lemma",), psi_list=("x^2", "x^3"),
                          alpha_grid=(1.0, 2.0), rho_grid=(1.0, 2.0))
        result = run_sweep(cfg)
        assert len(result.rows) == 8
        for row in result.rows:
            assert abs(row["residual"]) <= 1e-7

    def test_row_count_formula(self):
        cfg = make_config(checks=("sandwich", "t2"),
                          psi_list=("x^2", "x"), alpha_grid=(1.0, 2.0),
                          rho_grid=(1.0,), s_grid=(0.5, 1.0),
                          q_grid=(1.0, 2.0), intervals=((0.0, 1.0),),
                          variants=(VARIANT_PRINTED, VARIANT_DERIVED))
        result = run_sweep(cfg)
        sandwich = 2 * 2 * 1 * 2 * 1 * 2          # psi*alpha*rho*s*iv*var
        t2 = 2 * 2 * 1 * 2 * 2 * 1 * 2            # ... * q
        assert len(result.rows) == sandwich + t2

    def test_applicability_filter_for_hoelder_checks(self):
        cfg = make_config(checks=("t4", "min_m"), q_grid=(1.0, 2.0),
                          variants=(VARIANT_DERIVED,))
        result = run_sweep(cfg)
        # q=1 cells are skipped: no conjugate exponent exists
        assert len(result.rows) == 2
        assert all(row["q"] == 2.0 for row in result.rows)

    def test_cell_errors_recorded_not_raised(self):
        # psi = x**(s*alpha) with s*alpha < 1 has no finite derivative
        # at 0, so gap cells on [0, 1] must record the fault in-row
        cfg = make_config(checks=("t2",), psi_list=("power(s*alpha)",),
                          s_grid=(0.5,), alpha_grid=(1.0,))
        result = run_sweep(cfg)
        assert len(result.rows) == 1
        assert result.rows[0]["error"]
        assert result.rows[0]["gap"] is None

    def test_deterministic_rows(self):
        cfg = make_config(checks=("sandwich", "certify", "means"),
                          psi_list=("x^2", "power(s*alpha)"),
                          s_grid=(0.5, 1.0), intervals=((0.0, 1.0),
                                                        (1.0, 3.0)))
        assert run_sweep(cfg).rows == run_sweep(cfg).rows

    def test_jobs_do_not_change_rows(self):
        cfg = make_config(checks=("sandwich", "lemma", "certify"),
                          psi_list=("x^2", "x"), alpha_grid=(0.5, 1.0))
        parallel = dataclasses.replace(cfg, jobs=4)
        assert run_sweep(cfg).rows == run_sweep(parallel).rows


class TestOutputs:
    def test_csv_byte_determinism(self, tmp_path):
        cfg = make_config(checks=("sandwich", "certify"),
                          variants=(VARIANT_PRINTED, VARIANT_DERIVED))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(run_sweep(cfg).rows, str(p1))
        write_csv(run_sweep(cfg).rows, str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_json_nested_by_check(self, tmp_path):
        cfg = make_config(checks=("sandwich", "lemma"))
        path = tmp_path / "out.json"
        write_json(run_sweep(cfg).rows, str(path))
        data = json.loads(path.read_text())
        assert set(data) == {"sandwich", "lemma"}
        assert all("margin_left" in row for row in data["sandwich"])

    def test_csv_17_digit_precision(self, tmp_path):
        cfg = make_config(checks=("lemma",))
        path = tmp_path / "out.csv"
        rows = run_sweep(cfg).rows
        write_csv(rows, str(path))
        header, line = path.read_text().splitlines()
        cols = dict(zip(header.split(","), line.split(",")))
        assert float(cols["side_a"]) == pytest.approx(rows[0]["side_a"],
                                                      rel=1e-15)


class TestViolations:
    def test_printed_variant_violations_are_informative(self):
        # the printed sandwich constants break on the deformed example
        cfg = make_config(psi_list=("power(s*alpha)",), alpha_grid=(1.0,),
                          rho_grid=(2.0,), s_grid=(0.5,),
                          variants=(VARIANT_PRINTED, VARIANT_DERIVED))
        result = run_sweep(cfg)
        severities = {row["variant"]: row["severity"]
                      for row in result.rows}
        assert severities[VARIANT_PRINTED] == "informative"
        assert severities[VARIANT_DERIVED] is None
        assert result.hard_violations == []

    def test_reproduction_command_reruns_to_same_values(self, capsys):
        cfg = make_config(psi_list=("power(s*alpha)",), alpha_grid=(1.0,),
                          rho_grid=(2.0,), s_grid=(0.5,),
                          variants=(VARIANT_PRINTED,))
        result = run_sweep(cfg)
        (record,) = result.violations
        argv = shlex.split(record.command)[1:]
        assert cli.main(argv) == 0
        payload = json.loads(capsys.readouterr().out)
        rerun = payload[VARIANT_PRINTED]
        row = result.rows[0]
        assert abs(rerun["margin_left"] - row["margin_left"]) <= 1e-12
        assert abs(rerun["margin_right"] - row["margin_right"]) <= 1e-12

    def test_means_p34_violations_informative(self):
        cfg = make_config(checks=("means",), intervals=((1.0, 2.0),),
                          q_grid=(1.0,), r_grid=(2,))
        result = run_sweep(cfg)
        p3 = [r for r in result.rows if r["prop"] == "P3"]
        assert p3 and p3[0]["severity"] == "informative"
        assert result.hard_violations == []

    def test_means_reproduction_command(self, capsys):
        cfg = make_config(checks=("means",), intervals=((1.0, 2.0),),
                          q_grid=(1.0,), r_grid=(2,))
        result = run_sweep(cfg)
        record = next(v for v in result.violations if v.check == "means")
        argv = shlex.split(record.command)[1:]
        assert cli.main(argv) == 0
        payload = json.loads(capsys.readouterr().out)
        row = next(r for r in result.rows
                   if r["prop"] == record.params["prop"])
        assert abs(payload["lhs"] - row["lhs"]) <= 1e-12


class TestReferenceAudit:
    def test_first_triple_members(self):
        rows = {(r.triple, r.member): r for r in reproduce_reference()}
        lhs = rows[(1, "lhs")]
        assert lhs.as_printed == pytest.approx(0.25, abs=1e-9)
        assert lhs.status == "match"
        rhs = rows[(1, "rhs")]
        assert rhs.as_printed == pytest.approx(0.5, abs=1e-9)
        assert rhs.status == "match"
        middle = rows[(1, "middle")]
        assert middle.as_printed == pytest.approx(0.5, abs=1e-8)
        assert middle.status == "discrepancy"

    def test_second_triple_flags_discrepancies(self):
        rows = {(r.triple, r.member): r for r in reproduce_reference()}
        assert rows[(2, "lhs")].as_printed == pytest.approx(0.5, abs=1e-8)
        assert rows[(2, "middle")].as_printed == pytest.approx(2.0 / 3.0,
                                                               abs=1e-8)
        assert rows[(2, "lhs")].status == "discrepancy"
        assert rows[(2, "rhs")].status == "discrepancy"
        # derivation-consistent members do satisfy the sandwich
        assert rows[(2, "lhs")].derived <= rows[(2, "middle")].derived
        assert rows[(2, "middle")].derived <= rows[(2, "rhs")].derived \
            + 1e-12


def test_all_checks_smoke():
    cfg = make_config(checks=CHECKS, psi_list=("x^2", "x"),
                      alpha_grid=(1.0, 2.0), rho_grid=(1.0, 2.0),
                      s_grid=(0.5,), q_grid=(1.0, 2.0),
                      intervals=((0.0, 1.0), (1.0, 3.0)),
                      variants=(VARIANT_PRINTED, VARIANT_DERIVED))
    result = run_sweep(cfg)
    assert result.hard_violations == []
    by_check = {c: [r for r in result.rows if r["check"] == c]
                for c in CHECKS}
    assert all(by_check[c] for c in CHECKS)
