"""Tests for the version lookup."""

import pytest

import mera_kit.version
from mera_kit.main import run
from mera_kit.report import RunReport
from mera_kit.version import DEV_VERSION, get_version

pytestmark = pytest.mark.unit


@pytest.fixture
def outside_workspace(temp_dir, monkeypatch, mocker):
    """Pretend the package is installed somewhere without a workspace VERSION file."""
    mocker.patch.object(mera_kit.version, "__file__", str(temp_dir / "pkg" / "a" / "b" / "c" / "d" / "version.py"))
    monkeypatch.chdir(temp_dir)
    return temp_dir


class TestVersionFileReading:
    """Test reading version from VERSION file."""

    def test_workspace_version_file(self):
        """Test that the workspace VERSION file is found."""
        version = get_version()
        assert version == DEV_VERSION or version.count(".") == 2

    def test_version_file_in_working_directory(self, outside_workspace):
        """Test the current-directory fallback."""
        (outside_workspace / "VERSION").write_text("2.1.0\n")
        assert get_version() == "2.1.0"

    def test_version_file_missing(self, outside_workspace):
        """Test fallback when no VERSION file exists."""
        assert get_version() == DEV_VERSION

    def test_empty_version_file(self, outside_workspace):
        """Test that a blank VERSION file counts as missing."""
        (outside_workspace / "VERSION").write_text("\n")
        assert get_version() == DEV_VERSION

    def test_unreadable_version_path(self, outside_workspace):
        """Test that a directory named VERSION is skipped."""
        (outside_workspace / "VERSION").mkdir()
        assert get_version() == DEV_VERSION


class TestVersionDisplay:
    """Test where the version shows up."""

    def test_cli_version_flag(self, outside_workspace, capsys):
        """Test that --version prints the tool name and version."""
        (outside_workspace / "VERSION").write_text("3.0.1")
        assert run(["--version"]) == 0
        assert capsys.readouterr().out.strip() == "mera-kit v3.0.1"

    def test_report_carries_version(self, mocker):
        """Test that every report document is stamped with the version."""
        mocker.patch("mera_kit.report.get_version", return_value="9.9.9")
        assert RunReport("bench", {}).to_document()["tool_version"] == "9.9.9"
