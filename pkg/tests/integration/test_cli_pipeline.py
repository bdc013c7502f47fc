"""
Integration test driving the command-line tool end to end:
build a network file, validate it, then cross-check it against the state vector.
"""

import json

import pytest

from mera_kit.main import run


@pytest.mark.integration
class TestCliPipeline:
    """Build → validate → check, as a user would run it."""

    @pytest.mark.parametrize("mode", ["generic", "translation_invariant", "scale_invariant"])
    def test_build_validate_check(self, temp_dir, monkeypatch, capsys, mode):
        """Test the full pipeline for every network mode."""
        monkeypatch.chdir(temp_dir)
        network = temp_dir / f"{mode}.json"

        assert run(["build", "--sites", "16", "--chi", "2", "--seed", "3", "--mode", mode, "--out", str(network)]) == 0
        build_report = json.loads(capsys.readouterr().out)
        assert build_report["results"]["param_count"]["slots"] == 31

        assert run(["validate", "--in", str(network), "--out", str(temp_dir / "validate.json")]) == 0
        validation = json.loads((temp_dir / "validate.json").read_text())
        assert validation["results"]["mode"] == mode

        assert run(["check", "--in", str(network), "--oracle", "--seeds", "3"]) == 0
        check_report = json.loads(capsys.readouterr().out)
        assert check_report["pass"] is True
        assert len(check_report["results"]["instances"]) == 4
        assert all(instance["pass"] for instance in check_report["results"]["instances"])

    def test_threads_from_environment(self, temp_dir, monkeypatch, capsys):
        """Test that MERA_KIT_THREADS does not change the ordered results."""
        monkeypatch.chdir(temp_dir)
        network = temp_dir / "m.json"
        run(["build", "--sites", "8", "--chi", "2", "--seed", "1", "--out", str(network)])
        capsys.readouterr()

        labels = []
        for threads in ("1", "4"):
            monkeypatch.setenv("MERA_KIT_THREADS", threads)
            assert run(["check", "--in", str(network), "--oracle", "--seeds", "4"]) == 0
            labels.append([i["label"] for i in json.loads(capsys.readouterr().out)["results"]["instances"]])
        assert labels[0] == labels[1] == ["input", "seed=0", "seed=1", "seed=2", "seed=3"]
