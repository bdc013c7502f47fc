"""Tool version shown by --version and stamped into every report."""

from pathlib import Path

DEV_VERSION = "dev"

# src/mera_kit/src/mera_kit/version.py -> workspace root
_WORKSPACE_ROOT_DEPTH = 5


def _candidates() -> list[Path]:
    return [
        Path(__file__).parents[_WORKSPACE_ROOT_DEPTH - 1] / "VERSION",
        Path("VERSION"),
    ]


def get_version() -> str:
    """Version from the workspace VERSION file.

    The current directory is tried when the package runs outside the workspace.

    Returns:
        Version string such as "0.1.0", or "dev" when no readable VERSION file exists
    """
    for path in _candidates():
        try:
            text = path.read_text(encoding="utf-8").strip()
        except OSError:
            continue
        if text:
            return text
    return DEV_VERSION
