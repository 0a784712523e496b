"""End-to-end command-line runs: bundled configs, validation and I/O exit
codes, determinism, and sweeps with per-point failure isolation."""
import json

import pytest

from maxreg.cli import (
    EXIT_IO,
    EXIT_OK,
    EXIT_VALIDATION,
    bundled_config_path,
    main,
)
from maxreg.report import load_report


def run_cli(*args, outdir):
    return main([*args, "--output-dir", str(outdir)])


def write_config(tmp_path, body, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(body))
    return str(path)


class TestBundledConfigs:
    def test_paths_exist(self):
        import os
        for name in ("autonomous-dirichlet", "sqrt-product"):
            assert os.path.exists(bundled_config_path(name))

    def test_autonomous_solve_matches_oracle(self, tmp_path):
        assert run_cli("solve", "autonomous-dirichlet", outdir=tmp_path) == EXIT_OK
        rep = load_report(str(tmp_path / "autonomous-dirichlet.report.json"))
        assert rep.diagnostics["oracle_relative_deviation"] <= 1e-3
        assert rep.diagnostics["residual"] <= 1e-8
        assert rep.ratios["maxreg_alpha_0.5"] > 0
        assert all(v >= 0 for v in rep.norms.values())

    def test_sqrt_product_analyze_bounds(self, tmp_path):
        code = run_cli("analyze", "sqrt-product",
                       "--set", "analysis.resolutions=[512]",
                       outdir=tmp_path)
        assert code == EXIT_OK
        rep = load_report(str(tmp_path / "sqrt-product.report.json"))
        names = {r.functional for r in rep.seminorms}
        assert {"bmo", "scale_invariant_half_sobolev", "holder", "dini",
                "extension_M", "extension_M_natural"} <= names
        dini = next(r for r in rep.seminorms if r.functional == "dini")
        assert dini.divergent_flag is True
        assert rep.diagnostics["reflected_2T_le_3M"] is True
        assert rep.diagnostics["reflected_3T_le_9M"] is True
        assert rep.diagnostics["M_natural_le_bound"] is True


class TestValidation:
    def test_unknown_key_rejected(self, tmp_path):
        cfg = write_config(tmp_path, {"experiment_id": "x",
                                      "solver": {"relaxation": 0.5}})
        assert run_cli("solve", cfg, outdir=tmp_path) == EXIT_VALIDATION

    def test_unknown_override_key_rejected(self, tmp_path):
        code = run_cli("solve", "autonomous-dirichlet",
                       "--set", "solver.warp=1", outdir=tmp_path)
        assert code == EXIT_VALIDATION

    def test_missing_config_file(self, tmp_path):
        assert run_cli("solve", str(tmp_path / "nope.json"),
                       outdir=tmp_path) == EXIT_IO

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert run_cli("solve", str(path), outdir=tmp_path) == EXIT_IO

    def test_bad_coefficient_kind(self, tmp_path):
        code = run_cli("solve", "autonomous-dirichlet",
                       "--set", 'coefficient.kind="fractal"',
                       outdir=tmp_path)
        assert code == EXIT_VALIDATION


class TestSolveBehavior:
    def test_zero_forcing_gives_zero_solution(self, tmp_path):
        code = run_cli("solve", "autonomous-dirichlet",
                       "--set", 'forcing.kind="zero"', outdir=tmp_path)
        assert code == EXIT_OK
        rep = load_report(str(tmp_path / "autonomous-dirichlet.report.json"))
        assert rep.norms["l2h_u"] == 0.0
        assert rep.norms["l2h_f"] == 0.0
        assert rep.ratios == {}  # ratios present iff forcing is nonzero

    def test_determinism(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        for d in (d1, d2):
            assert run_cli("solve", "sqrt-product",
                           "--set", "analysis.resolutions=[]",
                           "--set", "analysis.extension_constants=false",
                           outdir=d) == EXIT_OK
        r1 = load_report(str(d1 / "sqrt-product.report.json"))
        r2 = load_report(str(d2 / "sqrt-product.report.json"))
        assert r1.to_dict() == r2.to_dict()

    def test_extend_writes_field(self, tmp_path):
        code = run_cli("extend", "sqrt-product", outdir=tmp_path)
        assert code == EXIT_OK
        rep = load_report(str(tmp_path / "sqrt-product.report.json"))
        assert rep.diagnostics["M_natural_le_bound"] is True
        prefix = rep.diagnostics["extended_field"]
        import glob
        assert glob.glob(prefix + "*"), "extended coefficient not saved"

    def test_commutator_subcommand(self, tmp_path):
        code = run_cli("commutator", "sqrt-product",
                       "--set", "time.n_points=128",
                       "--set", "analysis.resolutions=[128,256,512]",
                       outdir=tmp_path)
        assert code == EXIT_OK
        rep = load_report(str(tmp_path / "sqrt-product.report.json"))
        row = next(r for r in rep.seminorms if r.functional == "commutator_norm")
        assert row.value > 0
        assert row.divergent_flag is False
        assert len(rep.diagnostics["alpha_0.5"]["estimates"]) == 3


class TestSweep:
    def test_singleton_sweep_matches_solve(self, tmp_path):
        assert run_cli("sweep", "autonomous-dirichlet", "--axis", "resolution",
                       "--values", "128", outdir=tmp_path) == EXIT_OK
        with open(tmp_path / "autonomous-dirichlet.sweep.json") as fh:
            sweep = json.load(fh)
        point = sweep["points"]["128"]
        assert run_cli("solve", "autonomous-dirichlet",
                       "--set", "time.n_points=128", outdir=tmp_path) == EXIT_OK
        solo = load_report(str(tmp_path / "autonomous-dirichlet.report.json"))
        assert point["norms"] == solo.to_dict()["norms"]
        assert point["ratios"] == solo.to_dict()["ratios"]

    def test_partial_failure_is_isolated(self, tmp_path):
        code = run_cli("sweep", "autonomous-dirichlet", "--axis", "family",
                       "--values", "constant,fractal,lipschitz",
                       outdir=tmp_path)
        assert code == EXIT_OK
        with open(tmp_path / "autonomous-dirichlet.sweep.json") as fh:
            sweep = json.load(fh)
        assert "error" in sweep["points"]["fractal"]
        assert sweep["points"]["fractal"]["error_type"]
        for good in ("constant", "lipschitz"):
            assert "norms" in sweep["points"][good]
            assert sweep["points"][good]["norms"]["l2h_u"] > 0
