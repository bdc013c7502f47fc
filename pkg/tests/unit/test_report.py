"""Unit tests for run reports and the oracle check helpers."""

import json
import math

import numpy as np
import pytest

from mera_kit.checks import check_instance, rebuild_like, run_bench, run_oracle_suite, site_sets, timed_rdm
from mera_kit.mera import MeraMode, build_product, build_random
from mera_kit.report import RunReport, to_jsonable, write_document

pytestmark = pytest.mark.unit


class TestToJsonable:
    """Test conversion of numerical results into JSON values."""

    def test_complex_becomes_pair(self):
        """Test complex numbers as [re, im]."""
        assert to_jsonable(1 + 2j) == [1.0, 2.0]
        assert to_jsonable(np.complex128(0.5 - 1j)) == [0.5, -1.0]

    def test_numpy_values(self):
        """Test numpy scalars, arrays and non-string keys."""
        value = {"a": np.arange(3), "b": np.float64(1.5), "c": np.bool_(True), 4: np.int64(7)}
        assert to_jsonable(value) == {"a": [0, 1, 2], "b": 1.5, "c": True, "4": 7}

    def test_infinity_is_a_string(self):
        """Test that inf is written as a string."""
        assert to_jsonable(math.inf) == "inf"

    def test_complex_matrix(self):
        """Test a complex matrix as nested pairs."""
        assert to_jsonable(np.eye(2, dtype=complex))[0] == [[1.0, 0.0], [0.0, 0.0]]


class TestRunReport:
    """Test check bookkeeping and the report document."""

    def test_no_checks_means_no_verdict(self):
        """Test a null verdict without checks."""
        report = RunReport("bench", {})
        assert report.to_document()["pass"] is None

    def test_checks_fold_into_verdict(self):
        """Test that one failing check fails the report."""
        report = RunReport("rdm", {"sites": [0]})
        assert report.check("trace", 1e-13, 1e-10)
        assert not report.check("hermitian", 1e-3, 1e-10)
        report.check("another", 0.0, 1e-10)
        doc = report.to_document()
        assert doc["pass"] is False
        assert doc["results"]["checks"]["hermitian"]["pass"] is False
        assert doc["tolerances"] == {"trace": 1e-10, "hermitian": 1e-10, "another": 1e-10}
        assert doc["command"] == "rdm"
        assert "tool_version" in doc

    def test_phase_records_time(self):
        """Test phase timing."""
        report = RunReport("build", {})
        with report.phase("build"):
            pass
        assert report.timings["build"] >= 0.0

    def test_phase_records_time_on_error(self):
        """Test that a failing phase still records its time."""
        report = RunReport("build", {})
        with pytest.raises(RuntimeError):
            with report.phase("build"):
                raise RuntimeError("boom")
        assert "build" in report.timings

    def test_write_to_file(self, temp_dir):
        """Test writing a report file with parent directories."""
        path = temp_dir / "out" / "report.json"
        write_document({"pass": True}, path)
        assert json.loads(path.read_text()) == {"pass": True}

    def test_write_to_stdout(self, capsys):
        """Test writing a report to stdout."""
        write_document({"command": "validate"})
        assert json.loads(capsys.readouterr().out) == {"command": "validate"}


class TestChecks:
    """Test the oracle cross-check and benchmark helpers."""

    def test_site_sets(self):
        """Test the site sets checked against the oracle."""
        sets = site_sets(8)
        assert len(sets) == 8 + 8 + 1
        assert [7, 0] in sets
        assert sets[-1] == [0, 4]

    def test_instance_check_passes(self, generic_mera):
        """Test one oracle comparison instance."""
        result = check_instance(generic_mera, "input", seed=3)
        assert result.passed
        assert result.n_terms == 8
        assert result.to_dict()["pass"] is True

    def test_rebuild_keeps_structure(self):
        """Test that a rebuilt network keeps dims and mode."""
        m = build_random(16, [2, 3, 2], seed=0, site_dim=2)
        other = rebuild_like(m, seed=9)
        assert [layer.chi_out for layer in other.layers] == [2, 3, 2]
        assert other.mode is m.mode

    def test_suite_keeps_seed_order(self):
        """Test that threaded checks come back in seed order."""
        m = build_product(8)
        results = run_oracle_suite(m, n_seeds=3, base_seed=10, threads=3)
        assert [r.label for r in results] == ["input", "seed=10", "seed=11", "seed=12"]
        assert all(r.passed for r in results)

    def test_timed_rdm(self):
        """Test the per-layer timing of one RDM."""
        m = build_random(64, 2, seed=0, mode=MeraMode.TRANSLATION_INVARIANT)
        total, steps = timed_rdm(m)
        assert len(steps) == m.n_layers
        assert total >= sum(steps)

    def test_bench_fit(self):
        """Test the bench points and fit fields."""
        result = run_bench([16, 32, 64], chi=2, repeats=1)
        assert [p["n_sites"] for p in result["points"]] == [16, 32, 64]
        assert set(result["fit"]) == {"intercept", "slope_per_log2n", "relative_residuals", "max_relative_residual"}
        assert len(result["fit"]["relative_residuals"]) == 3
        assert result["step_time_ratio"] >= 1.0

    def test_bench_single_size_has_no_fit(self):
        """Test that one size gives no fit."""
        result = run_bench([16], chi=2, repeats=1)
        assert "fit" not in result
