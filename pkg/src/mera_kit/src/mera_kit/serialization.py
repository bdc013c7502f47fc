"""JSON file format for networks.

Document layout (version 1)::

    {
      "version": 1,
      "n_sites": 8, "site_dim": 2, "mode": "generic",
      "layers": [
        {"n_wires_in": 8, "chi_in": 2, "chi_out": 2, "shared": false,
         "disentanglers": [<tensor>, ...], "isometries": [<tensor>, ...],
         "isometry_parents": [<tensor>, ...]},          # optional
        ...
      ],
      "top": <tensor>,
      "top_parent": <tensor>                            # optional
    }

A tensor is ``{"shape": [...], "data": [[re, im], ...]}`` with data in row-major order.
"""

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import LoadError, MeraKitError
from .logger import get_logger
from .mera import (
    T_AXES,
    U_AXES,
    W_AXES,
    W_PARENT_AXES,
    Disentangler,
    Isometry,
    Mera,
    MeraLayer,
    MeraMode,
    TopTensor,
    layer_count,
    validate,
)
from .tensor_core import Tensor

FORMAT_VERSION = 1
LOAD_TOL = 1e-8


def encode_array(array: np.ndarray) -> dict[str, Any]:
    flat = np.asarray(array, dtype=np.complex128).reshape(-1)
    return {
        "shape": list(array.shape),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def decode_array(doc: Any, path: str, shape: tuple[int, ...] | None = None) -> np.ndarray:
    """Decode a tensor document; ``shape`` pins the expected dimensions."""
    if not isinstance(doc, dict) or "shape" not in doc or "data" not in doc:
        raise LoadError(path, "expected an object with 'shape' and 'data'")
    try:
        declared = tuple(int(d) for d in doc["shape"])
    except (TypeError, ValueError) as e:
        raise LoadError(path, f"malformed shape {doc['shape']!r}") from e
    if shape is not None and declared != shape:
        raise LoadError(path, f"shape {list(declared)} does not match expected {list(shape)}")
    try:
        pairs = np.asarray(doc["data"], dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise LoadError(path, "data must be a list of [re, im] pairs") from e
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise LoadError(path, "data must be a list of [re, im] pairs")
    if pairs.shape[0] != math.prod(declared):
        raise LoadError(path, f"{pairs.shape[0]} entries for shape {list(declared)}")
    if not np.all(np.isfinite(pairs)):
        raise LoadError(path, "data contains non-finite values")
    return (pairs[:, 0] + 1j * pairs[:, 1]).reshape(declared)


def serialize(m: Mera) -> dict[str, Any]:
    layers = []
    for layer in m.layers:
        entry: dict[str, Any] = {
            "n_wires_in": layer.n_wires_in,
            "chi_in": layer.chi_in,
            "chi_out": layer.chi_out,
            "shared": layer.shared,
            "disentanglers": [encode_array(u.array) for u in layer.disentanglers],
            "isometries": [encode_array(w.array) for w in layer.isometries],
        }
        if all(w.parent is not None for w in layer.isometries):
            entry["isometry_parents"] = [encode_array(w.parent.data) for w in layer.isometries]
        layers.append(entry)

    doc: dict[str, Any] = {
        "version": FORMAT_VERSION,
        "n_sites": m.n_sites,
        "site_dim": m.site_dim,
        "mode": m.mode.value,
        "layers": layers,
        "top": encode_array(m.top.array),
    }
    if m.top.parent is not None:
        doc["top_parent"] = encode_array(m.top.parent.data)
    return doc


def _read_int(doc: dict, key: str, path: str) -> int:
    value = doc.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise LoadError(f"{path}.{key}" if path else key, f"expected an integer, got {value!r}")
    return value


def _decode_layer(doc: Any, index: int, n_wires: int, chi_in: int) -> MeraLayer:
    path = f"layers[{index}]"
    if not isinstance(doc, dict):
        raise LoadError(path, "expected an object")
    if _read_int(doc, "n_wires_in", path) != n_wires:
        raise LoadError(f"{path}.n_wires_in", f"got {doc['n_wires_in']}, expected {n_wires}")
    if _read_int(doc, "chi_in", path) != chi_in:
        raise LoadError(f"{path}.chi_in", f"got {doc['chi_in']}, expected {chi_in}")
    chi_out = _read_int(doc, "chi_out", path)
    if not 1 <= chi_out <= chi_in * chi_in:
        raise LoadError(f"{path}.chi_out", f"{chi_out} outside 1..{chi_in * chi_in}")
    shared = doc.get("shared", False)
    if not isinstance(shared, bool):
        raise LoadError(f"{path}.shared", f"expected a boolean, got {shared!r}")

    count = 1 if shared else n_wires // 2
    for key in ("disentanglers", "isometries"):
        stored = doc.get(key)
        if not isinstance(stored, list) or len(stored) != count:
            found = len(stored) if isinstance(stored, list) else stored
            raise LoadError(f"{path}.{key}", f"expected {count} tensors, found {found}")

    parents = doc.get("isometry_parents")
    if parents is not None and (not isinstance(parents, list) or len(parents) != count):
        raise LoadError(f"{path}.isometry_parents", f"expected {count} tensors")
    if parents is not None and (chi_in * chi_in) % chi_out:
        raise LoadError(f"{path}.isometry_parents", f"χ_coarse={chi_out} does not divide χ_fine²")

    u_shape = (chi_in,) * 4
    w_shape = (chi_in, chi_in, chi_out)
    us = tuple(
        Disentangler(Tensor(decode_array(d, f"{path}.disentanglers[{j}]", u_shape), U_AXES))
        for j, d in enumerate(doc["disentanglers"])
    )
    ws = []
    for k, d in enumerate(doc["isometries"]):
        w = decode_array(d, f"{path}.isometries[{k}]", w_shape)
        parent = None
        if parents is not None:
            p_shape = w_shape + (chi_in * chi_in // chi_out,)
            parent = Tensor(decode_array(parents[k], f"{path}.isometry_parents[{k}]", p_shape), W_PARENT_AXES)
        ws.append(Isometry(Tensor(w, W_AXES), parent))
    return MeraLayer(n_wires, chi_in, chi_out, us, tuple(ws), shared=shared)


def _share_scale_invariant(layers: list[MeraLayer]) -> list[MeraLayer]:
    """Point every layer equal to the first at the first layer's tensors."""
    first = layers[0]
    u0, w0 = first.disentanglers[0], first.isometries[0]
    shared = [first]
    for layer in layers[1:]:
        u, w = layer.disentanglers[0], layer.isometries[0]
        if layer.shared and np.array_equal(u.array, u0.array) and np.array_equal(w.array, w0.array):
            same_parent = (w.parent is None) == (w0.parent is None) and (
                w.parent is None or np.array_equal(w.parent.data, w0.parent.data)
            )
            if same_parent:
                layer = MeraLayer(layer.n_wires_in, layer.chi_in, layer.chi_out, (u0,), (w0,), shared=True)
        shared.append(layer)
    return shared


def deserialize(doc: Any, tol: float = LOAD_TOL) -> Mera:
    """Rebuild a network from a document, re-validating every constraint at ``tol``.

    Raises:
        LoadError: naming the path of the offending entry
    """
    if not isinstance(doc, dict):
        raise LoadError("$", "document must be a JSON object")
    if doc.get("version") != FORMAT_VERSION:
        raise LoadError("version", f"unsupported version {doc.get('version')!r}, expected {FORMAT_VERSION}")
    n_sites = _read_int(doc, "n_sites", "")
    site_dim = _read_int(doc, "site_dim", "")
    try:
        expected_layers = layer_count(n_sites)
    except MeraKitError as e:
        raise LoadError("n_sites", str(e)) from e
    if site_dim < 1:
        raise LoadError("site_dim", f"must be positive, got {site_dim}")
    try:
        mode = MeraMode(doc.get("mode", MeraMode.GENERIC.value))
    except ValueError as e:
        raise LoadError("mode", f"unknown mode {doc.get('mode')!r}") from e

    raw_layers = doc.get("layers")
    if not isinstance(raw_layers, list):
        raise LoadError("layers", "expected a list")
    if len(raw_layers) != expected_layers:
        missing = min(len(raw_layers), expected_layers)
        raise LoadError(
            f"layers[{missing}]",
            f"n_sites={n_sites} needs {expected_layers} layers, document has {len(raw_layers)}",
        )

    layers = []
    n, chi = n_sites, site_dim
    for index, raw in enumerate(raw_layers):
        layer = _decode_layer(raw, index, n, chi)
        layers.append(layer)
        n, chi = layer.n_wires_out, layer.chi_out
    if mode is MeraMode.SCALE_INVARIANT:
        layers = _share_scale_invariant(layers)

    top = decode_array(doc.get("top"), "top", (chi, chi))
    top_parent = None
    if doc.get("top_parent") is not None:
        top_parent = Tensor(decode_array(doc["top_parent"], "top_parent", (chi,) * 4), U_AXES)

    try:
        m = Mera(n_sites, site_dim, tuple(layers), TopTensor(Tensor(top, T_AXES), top_parent), mode)
    except MeraKitError as e:
        raise LoadError("$", str(e)) from e

    report = validate(m, tol)
    if not report.passed:
        worst = max(report.failures, key=lambda e: e.violation)
        raise LoadError(worst.path, f"{worst.kind} violates its constraint by {worst.violation:.3e} > {tol:.0e}")
    return m


def to_json(m: Mera) -> str:
    return json.dumps(serialize(m))


def from_json(text: str) -> Mera:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise LoadError("$", f"invalid JSON: {e}") from e
    return deserialize(doc)


def save(m: Mera, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json(m), encoding="utf-8")
    get_logger().info(f"✅ Saved N={m.n_sites} network ({m.mode}) to {path}")


def load(path: Path) -> Mera:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise LoadError(str(path), f"cannot read file: {e}") from e
    m = from_json(text)
    get_logger().debug(f"Loaded N={m.n_sites} network ({m.mode}) from {path}")
    return m
