"""File formats: XYZ/CSV clouds, OBJ/OFF meshes, CSV tables."""

import numpy as np
import pytest

from pcparam.geometry import TriangleMesh
from pcparam.io import (
    load_cloud,
    load_mesh,
    load_table,
    save_cloud,
    save_mesh,
    save_table,
)


def _cloud3():
    rng = np.random.default_rng(1)
    return rng.normal(0, 1, (17, 3))


def test_xyz_round_trip_bitwise(tmp_path):
    cloud = _cloud3()
    path = tmp_path / "pts.xyz"
    save_cloud(path, cloud)
    back = load_cloud(path)
    np.testing.assert_array_equal(back, cloud)


def test_csv_round_trip_bitwise(tmp_path):
    for cols in (2, 3):
        cloud = _cloud3()[:, :cols]
        path = tmp_path / f"pts{cols}.csv"
        save_cloud(path, cloud)
        text = path.read_text()
        assert text.splitlines()[0] == ("x,y" if cols == 2 else "x,y,z")
        back = load_cloud(path)
        np.testing.assert_array_equal(back, cloud)


def test_csv_header_sniffing(tmp_path):
    # headerless CSV: first line is data and must not be swallowed
    path = tmp_path / "raw.csv"
    path.write_text("1.5,2.5\n3.0,4.0\n")
    back = load_cloud(path)
    np.testing.assert_array_equal(back, [[1.5, 2.5], [3.0, 4.0]])


def test_xyz_comments_and_blank_lines(tmp_path):
    path = tmp_path / "pts.xyz"
    path.write_text("# a comment\n\n1 2 3\n4 5 6  # trailing note\n")
    back = load_cloud(path)
    np.testing.assert_array_equal(back, [[1, 2, 3], [4, 5, 6]])


def test_cloud_error_messages(tmp_path):
    bad = tmp_path / "bad.xyz"
    bad.write_text("1 2 3\n1 two 3\n")
    with pytest.raises(ValueError, match=r"bad\.xyz:2"):
        load_cloud(bad)
    empty = tmp_path / "empty.csv"
    empty.write_text("x,y\n")
    with pytest.raises(ValueError, match="no points"):
        load_cloud(empty)
    ragged = tmp_path / "ragged.xyz"
    ragged.write_text("1 2 3\n4 5\n")
    with pytest.raises(ValueError, match="inconsistent"):
        load_cloud(ragged)


def _mesh():
    verts = np.array([[0.0, 0.0, 0.1], [1.0, 0.0, 0.2], [1.0, 1.0, 0.3], [0.0, 1.0, 0.4]])
    return TriangleMesh(verts, np.array([[0, 1, 2], [0, 2, 3]]))


def test_obj_round_trip(tmp_path):
    mesh = _mesh()
    path = tmp_path / "m.obj"
    save_mesh(path, mesh)
    back = load_mesh(path)
    np.testing.assert_array_equal(back.vertices, mesh.vertices)
    np.testing.assert_array_equal(back.triangles, mesh.triangles)


def test_off_round_trip(tmp_path):
    mesh = _mesh()
    path = tmp_path / "m.off"
    save_mesh(path, mesh)
    text = path.read_text()
    assert text.startswith("OFF\n4 2 0\n")
    back = load_mesh(path)
    np.testing.assert_array_equal(back.vertices, mesh.vertices)
    np.testing.assert_array_equal(back.triangles, mesh.triangles)


def test_save_mesh_pads_planar_vertices(tmp_path):
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    mesh = TriangleMesh(verts, np.array([[0, 1, 2]]))
    path = tmp_path / "flat.obj"
    save_mesh(path, mesh)
    back = load_mesh(path)
    np.testing.assert_array_equal(back.vertices[:, 2], [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(back.vertices[:, :2], verts)


def test_obj_slash_indices_and_comments(tmp_path):
    path = tmp_path / "tex.obj"
    path.write_text(
        "# exported\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\n"
    )
    mesh = load_mesh(path)
    np.testing.assert_array_equal(mesh.triangles, [[0, 1, 2]])


def test_mesh_error_paths(tmp_path):
    quad = tmp_path / "quad.obj"
    quad.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    with pytest.raises(ValueError, match="triangle"):
        load_mesh(quad)
    noverts = tmp_path / "empty.obj"
    noverts.write_text("# nothing\n")
    with pytest.raises(ValueError, match="no vertices"):
        load_mesh(noverts)
    noheader = tmp_path / "x.off"
    noheader.write_text("3 1 0\n")
    with pytest.raises(ValueError, match="OFF header"):
        load_mesh(noheader)
    quadoff = tmp_path / "q.off"
    quadoff.write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
    with pytest.raises(ValueError, match="4-gon"):
        load_mesh(quadoff)
    with pytest.raises(ValueError, match="unsupported"):
        load_mesh(tmp_path / "m.stl")
    with pytest.raises(ValueError, match="unsupported"):
        save_mesh(tmp_path / "m.ply", _mesh())


def test_table_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    save_table(path, ["name", "value", "note"], [
        ["alpha", 0.1, None],
        ["beta", 2.0, "ok"],
    ])
    header, rows = load_table(path)
    assert header == ["name", "value", "note"]
    assert rows == [["alpha", "0.1", ""], ["beta", "2.0", "ok"]]
    assert float(rows[0][1]) == 0.1  # repr floats round-trip


def test_table_empty_file(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("")
    with pytest.raises(ValueError, match="empty table"):
        load_table(path)
