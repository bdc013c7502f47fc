"""Run reports written by the command-line tool."""

import json
import sys
import time
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .logger import get_logger
from .version import get_version


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers into plain JSON values.

    Complex numbers become ``[re, im]`` pairs, as in the network file format.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no infinities
        return value if np.isfinite(value) else str(value)
    return value


@dataclass
class RunReport:
    command: str
    inputs: dict[str, Any]
    results: dict[str, Any] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    passed: bool | None = None

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        """Record the wall-clock seconds spent in the block under ``timings[name]``."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = time.perf_counter() - start

    def check(self, name: str, value: float, tolerance: float) -> bool:
        """Record ``value <= tolerance`` as a named check and fold it into ``passed``."""
        ok = bool(value <= tolerance)
        self.tolerances[name] = tolerance
        self.results.setdefault("checks", {})[name] = {"value": value, "tolerance": tolerance, "pass": ok}
        self.passed = ok if self.passed is None else self.passed and ok
        return ok

    def to_document(self) -> dict[str, Any]:
        return to_jsonable(
            {
                "command": self.command,
                "tool_version": get_version(),
                "inputs": self.inputs,
                "results": self.results,
                "timings": self.timings,
                "tolerances": self.tolerances,
                "pass": self.passed,
            }
        )


def write_document(document: dict[str, Any], out: Path | None = None) -> None:
    text = json.dumps(document, indent=2)
    if out is None:
        sys.stdout.write(text + "\n")
        sys.stdout.flush()
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text + "\n", encoding="utf-8")
    get_logger().info(f"Report written to {out}")
