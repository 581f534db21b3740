"""Recover the two boundary circles of an annulus point cloud.

Triangulate, drop every face with an edge longer than the prune length,
and walk the edges that now border exactly one face. With a sensible
prune length the annulus yields its inner and outer circles; with a huge
one the hole gets bridged and only the outer loop survives.

Usage:
    python3 demos/annulus_boundary.py --out-dir demo_out
"""

import argparse
import pathlib

import numpy as np

from pcparam.geometry import hausdorff_exact
from pcparam.meshing import boundary_edges, delaunay, prune_long_faces
from pcparam.svgplot import scatter_svg


def annulus_cloud(seed: int, rings: int = 10) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = []
    for j in range(rings):
        r = 0.5 + 0.5 * j / (rings - 1)
        m = int(round(2 * np.pi * r / 0.05))
        th = 2 * np.pi * np.arange(m) / m
        ring = np.column_stack([r * np.cos(th), r * np.sin(th)])
        if 0 < j < rings - 1:
            ring += rng.normal(0.0, 0.004, ring.shape)
        pts.append(ring)
    return np.vstack(pts)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="demo_out")
    ap.add_argument("--prune", type=float, default=0.15)
    args = ap.parse_args()
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    cloud = annulus_cloud(21)
    mesh = delaunay(cloud)
    for h, label in ((args.prune, "pruned"), (1e9, "unpruned")):
        loops = boundary_edges(prune_long_faces(mesh, h))
        print(f"h = {h:g}: {len(loops)} loop(s)")
        for k, loop in enumerate(loops):
            loop_pts = cloud[loop]
            radius = float(np.hypot(*loop_pts.T).mean())
            th = 2 * np.pi * np.arange(2000) / 2000
            circle = radius * np.column_stack([np.cos(th), np.sin(th)])
            err = hausdorff_exact(loop_pts, circle)
            print(f"  loop {k}: {len(loop)} vertices, mean radius "
                  f"{radius:.3f}, Hausdorff to that circle {err:.4f}")
        path = out / f"annulus_{label}.svg"
        path.write_text(scatter_svg(cloud, loops=[cloud[l] for l in loops]))
        print(f"  wrote {path}")


if __name__ == "__main__":
    main()
