"""Heatmap artifacts: scalar fields on the square as CSV matrices and
8-bit binary PGM (P5) images.

Image orientation: rows run top to bottom with x2 from +1 down to -1,
columns left to right with x1 from -1 to +1.  Gray levels map [-1, 1]
linearly onto 0..255 with clamping; both facts are recorded in the file
comments so an artifact is self-describing.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .maps import PlanarMap


def field_matrix(f: PlanarMap, component: int, resolution: int = 201) -> np.ndarray:
    """Component values arranged in image orientation (see module docs)."""
    if component not in (1, 2):
        raise ValueError("component must be 1 or 2")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    lin = np.linspace(-1.0, 1.0, resolution)
    g1, g2 = np.meshgrid(lin, lin, indexing="ij")
    pts = np.stack([g1.ravel(), g2.ravel()], axis=1)
    vals = f(pts)[:, component - 1].reshape(resolution, resolution)
    # axis 0 is x1; transpose to rows=x2 and flip so +1 is the top row
    return vals.T[::-1]


def write_matrix_csv(matrix: np.ndarray, path, comments: list[str] | None = None) -> None:
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2:
        raise ValueError("matrix must be 2-dimensional")
    lines = [f"# {c}" for c in (comments or [])]
    lines.append("# rows: x2 from +1 to -1; cols: x1 from -1 to +1")
    for row in mat:
        lines.append(",".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def to_gray(matrix: np.ndarray) -> np.ndarray:
    """Linear [-1,1] -> 0..255 with clamping."""
    mat = np.asarray(matrix, dtype=float)
    scaled = np.clip((mat + 1.0) / 2.0, 0.0, 1.0) * 255.0
    return np.rint(scaled).astype(np.uint8)


def write_pgm(matrix: np.ndarray, path, comments: list[str] | None = None) -> None:
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2:
        raise ValueError("matrix must be 2-dimensional")
    gray = to_gray(mat)
    h, w = gray.shape
    header = ["P5"]
    for c in comments or []:
        header.append(f"# {c}")
    header.append("# gray: linear [-1,1] -> 0..255 clamped")
    header.append(f"{w} {h}")
    header.append("255")
    Path(path).write_bytes(("\n".join(header) + "\n").encode() + gray.tobytes())


def read_pgm(path) -> np.ndarray:
    """Minimal P5 reader for round-trip tests; returns the uint8 matrix."""
    data = Path(path).read_bytes()
    pos = 0
    fields: list[bytes] = []
    while len(fields) < 4:
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(data) and not data[end : end + 1].isspace():
            end += 1
        if end > pos:
            fields.append(data[pos:end])
        pos = end + 1
    if fields[0] != b"P5" or fields[3] != b"255":
        raise ValueError("not an 8-bit P5 file")
    w, h = int(fields[1]), int(fields[2])
    return np.frombuffer(data[pos : pos + w * h], dtype=np.uint8).reshape(h, w)
