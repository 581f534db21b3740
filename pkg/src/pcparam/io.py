"""Readers and writers for clouds (XYZ/CSV), meshes (OBJ/OFF), and tables.

Floats are written with repr so files round-trip bit for bit and identical
runs produce identical bytes.
"""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path

import numpy as np

from .geometry import TriangleMesh, as_cloud

__all__ = [
    "load_cloud",
    "save_cloud",
    "load_mesh",
    "save_mesh",
    "save_table",
    "load_table",
]


def _parse_float_row(parts: list[str], path, lineno: int) -> list[float]:
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ValueError(f"{path}:{lineno}: not a numeric row: {parts!r}") from exc


def load_cloud(path) -> np.ndarray:
    """Read a 2-d or 3-d point cloud from a .xyz or .csv file.

    XYZ is whitespace separated, '#' starts a comment. CSV may carry one
    header line (detected by a non-numeric first field).
    """
    path = Path(path)
    rows: list[list[float]] = []
    if path.suffix.lower() == ".csv":
        with open(path, newline="") as fh:
            for lineno, rec in enumerate(csv.reader(fh), start=1):
                rec = [c.strip() for c in rec if c.strip()]
                if not rec:
                    continue
                if lineno == 1:
                    try:
                        float(rec[0])
                    except ValueError:
                        continue  # header
                rows.append(_parse_float_row(rec, path, lineno))
    else:
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                rows.append(_parse_float_row(line.split(), path, lineno))
    if not rows:
        raise ValueError(f"{path}: no points found")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: inconsistent column counts")
    return as_cloud(np.array(rows))


def save_cloud(path, cloud) -> None:
    """Write a cloud as .xyz (bare floats) or .csv (x,y[,z] header)."""
    cloud = as_cloud(cloud)
    path = Path(path)
    buf = _io.StringIO()
    if path.suffix.lower() == ".csv":
        buf.write(",".join("xyz"[: cloud.shape[1]][k] for k in range(cloud.shape[1])))
        buf.write("\n")
        for row in cloud:
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
    else:
        for row in cloud:
            buf.write(" ".join(repr(float(v)) for v in row) + "\n")
    path.write_text(buf.getvalue())


def _load_obj(path: Path) -> TriangleMesh:
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split("#", 1)[0].split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append(_parse_float_row(parts[1:4], path, lineno))
            elif parts[0] == "f":
                idx = [int(p.split("/", 1)[0]) for p in parts[1:]]
                if len(idx) != 3:
                    raise ValueError(f"{path}:{lineno}: only triangle faces supported")
                faces.append([i - 1 for i in idx])
    if not verts:
        raise ValueError(f"{path}: no vertices")
    return TriangleMesh(np.array(verts), np.array(faces, dtype=np.int64).reshape(-1, 3))


def _load_off(path: Path) -> TriangleMesh:
    with open(path) as fh:
        tokens: list[str] = []
        for line in fh:
            line = line.split("#", 1)[0]
            tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise ValueError(f"{path}: missing OFF header")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4  # skip edge count
    verts = np.array(
        [float(t) for t in tokens[pos : pos + 3 * nv]], dtype=np.float64
    ).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        cnt = int(tokens[pos])
        if cnt != 3:
            raise ValueError(f"{path}: only triangle faces supported, got {cnt}-gon")
        faces.append([int(t) for t in tokens[pos + 1 : pos + 4]])
        pos += 4
    return TriangleMesh(verts, np.array(faces, dtype=np.int64).reshape(-1, 3))


def load_mesh(path) -> TriangleMesh:
    """Read a triangle mesh from .obj or .off."""
    path = Path(path)
    ext = path.suffix.lower()
    if ext == ".obj":
        return _load_obj(path)
    if ext == ".off":
        return _load_off(path)
    raise ValueError(f"{path}: unsupported mesh format {ext!r}")


def save_mesh(path, mesh: TriangleMesh) -> None:
    """Write a mesh as .obj or .off; 2-d vertices get z = 0."""
    path = Path(path)
    verts = mesh.vertices
    if verts.shape[1] == 2:
        verts = np.hstack([verts, np.zeros((len(verts), 1))])
    ext = path.suffix.lower()
    buf = _io.StringIO()
    if ext == ".obj":
        for v in verts:
            buf.write("v " + " ".join(repr(float(c)) for c in v) + "\n")
        for a, b, c in mesh.triangles:
            buf.write(f"f {a + 1} {b + 1} {c + 1}\n")
    elif ext == ".off":
        buf.write("OFF\n")
        buf.write(f"{len(verts)} {len(mesh.triangles)} 0\n")
        for v in verts:
            buf.write(" ".join(repr(float(c)) for c in v) + "\n")
        for a, b, c in mesh.triangles:
            buf.write(f"3 {a} {b} {c}\n")
    else:
        raise ValueError(f"{path}: unsupported mesh format {ext!r}")
    path.write_text(buf.getvalue())


def save_table(path, header: list[str], rows) -> None:
    """CSV with repr-formatted floats; None cells come out empty."""
    buf = _io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        cells = []
        for val in row:
            if val is None:
                cells.append("")
            elif isinstance(val, (float, np.floating)):
                cells.append(repr(float(val)))
            else:
                cells.append(str(val))
        buf.write(",".join(cells) + "\n")
    Path(path).write_text(buf.getvalue())


def load_table(path) -> tuple[list[str], list[list[str]]]:
    """Read a CSV as (header, string rows); empty lines skipped."""
    with open(path, newline="") as fh:
        recs = [rec for rec in csv.reader(fh) if rec]
    if not recs:
        raise ValueError(f"{path}: empty table")
    return recs[0], recs[1:]
