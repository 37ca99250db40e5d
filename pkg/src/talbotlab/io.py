"""Deterministic file emission: CSV tables, PGM heatmaps, JSON records.

Every writer produces byte-identical output for identical inputs.  CSV
files may carry ``#``-prefixed comment lines embedding the resolved
configuration; PGM heatmaps are binary 8-bit with a comment line stating
the intensity that maps to full scale.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .bell import BellResult
from .errors import InvalidSpec
from .fields import BiphotonField, SampledField
from .qudits import QuditState, QuditUnitary

__all__ = [
    "format_float",
    "config_header",
    "write_sampled_csv",
    "write_matrix_csv",
    "write_biphoton_csv",
    "write_pgm",
    "unitary_to_json",
    "unitary_from_json",
    "state_to_json",
    "state_from_json",
    "bell_result_to_json",
    "write_scan_csv",
]


def format_float(x: float) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(x))


def config_header(config: dict | None) -> str:
    if not config:
        return ""
    return "# config: " + json.dumps(config, sort_keys=True, separators=(",", ":")) + "\n"


def write_sampled_csv(field: SampledField, path, config: dict | None = None) -> None:
    """Sampled field as ``x,re,im`` rows."""
    xs = field.x()
    lines = [config_header(config), "x,re,im\n"]
    for x, v in zip(xs, field.values):
        lines.append(f"{format_float(x)},{format_float(v.real)},{format_float(v.imag)}\n")
    Path(path).write_text("".join(lines))


def write_matrix_csv(matrix: np.ndarray, path, config: dict | None = None,
                     columns: str | None = None) -> None:
    """Real matrix as row-major CSV, one matrix row per line."""
    m = np.asarray(matrix, dtype=float)
    lines = [config_header(config)]
    if columns:
        lines.append(columns + "\n")
    for row in m:
        lines.append(",".join(format_float(v) for v in row) + "\n")
    Path(path).write_text("".join(lines))


def write_biphoton_csv(field: BiphotonField, path, config: dict | None = None) -> None:
    """Biphoton density |values|^2 as row-major CSV plus JSON grid sidecar."""
    path = Path(path)
    density = np.abs(field.values) ** 2
    write_matrix_csv(density, path, config=config)
    meta = {
        "x0_1": field.x0_1,
        "dx1": field.dx1,
        "n1": field.values.shape[0],
        "x0_2": field.x0_2,
        "dx2": field.dx2,
        "n2": field.values.shape[1],
        "content": "row-major |amplitude|^2; rows follow axis 1",
    }
    if config:
        meta["config"] = config
    sidecar = path.with_suffix(path.suffix + ".json")
    sidecar.write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")


def write_pgm(matrix: np.ndarray, path, max_value: float | None = None,
              config: dict | None = None) -> None:
    """8-bit binary PGM with linear intensity mapping.

    Comment lines record the intensity mapped to 255 (so the scaling is
    recoverable) and, when given, the resolved configuration.  Not-a-number
    entries are rejected.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise InvalidSpec("PGM needs a 2-D array")
    if not np.isfinite(m).all():
        raise InvalidSpec("PGM input must be finite")
    top = float(m.max()) if max_value is None else float(max_value)
    if top <= 0:
        top = 1.0
    scaled = np.clip(m / top, 0.0, 1.0)
    pixels = np.round(scaled * 255.0).astype(np.uint8)
    header = f"P5\n# full scale = {format_float(top)}\n"
    if config:
        header += config_header(config)
    header += f"{m.shape[1]} {m.shape[0]}\n255\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(pixels.tobytes())


def unitary_to_json(u: QuditUnitary) -> str:
    payload = {
        "D": u.dimension,
        "re": u.matrix.real.tolist(),
        "im": u.matrix.imag.tolist(),
    }
    return json.dumps(payload, sort_keys=True)


def unitary_from_json(text: str) -> QuditUnitary:
    payload = json.loads(text)
    m = np.asarray(payload["re"], dtype=float) + 1j * np.asarray(payload["im"], dtype=float)
    if m.shape != (payload["D"], payload["D"]):
        raise InvalidSpec("serialized unitary has inconsistent dimension")
    return QuditUnitary(m)


def state_to_json(state: QuditState) -> str:
    payload = {
        "D": state.dimension,
        "re": state.amplitudes.real.tolist(),
        "im": state.amplitudes.imag.tolist(),
    }
    return json.dumps(payload, sort_keys=True)


def state_from_json(text: str) -> QuditState:
    payload = json.loads(text)
    v = np.asarray(payload["re"], dtype=float) + 1j * np.asarray(payload["im"], dtype=float)
    if v.shape != (payload["D"],):
        raise InvalidSpec("serialized state has inconsistent dimension")
    return QuditState(v)


def bell_result_to_json(result: BellResult) -> str:
    payload = {
        "D": result.dimension,
        "I": result.value,
        "J": list(result.j_values),
        "convention": result.convention,
        "settings": {
            "alpha1": result.settings.alpha1,
            "alpha2": result.settings.alpha2,
            "beta1": result.settings.beta1,
            "beta2": result.settings.beta2,
        },
        "tables": {
            f"P{a}{b}": result.tables[i].tolist()
            for i, (a, b) in enumerate(((1, 1), (1, 2), (2, 1), (2, 2)))
        },
        "provenance": result.provenance,
    }
    return json.dumps(payload, sort_keys=True, indent=1)


def write_scan_csv(rows, path, config: dict | None = None) -> None:
    """Scan rows as CSV with the fixed header D,kappa_plus,kappa_minus,R,route,I_D."""
    lines = [config_header(config), "D,kappa_plus,kappa_minus,R,route,I_D\n"]
    for r in rows:
        lines.append(
            f"{r.dimension},{format_float(r.kappa_plus)},{format_float(r.kappa_minus)},"
            f"{format_float(r.correlation)},{r.route},{format_float(r.value)}\n"
        )
    Path(path).write_text("".join(lines))
