"""Delaunay triangulation, pruning, boundary loops, mesh generation, lifting.

The triangulator is incremental Bowyer-Watson with a large synthetic bounding
triangle. Orientation and in-circle predicates run a fast float path with a
forward error bound and fall back to exact rational arithmetic (doubles are
dyadic rationals) when the float sign is not certain, so co-circular ties are
decided exactly and then broken deterministically by insertion (= index)
order. The bounding triangle sits 1e10 data-diameters out; hulls that are
collinear to within one part in 1e10 of that could in principle interact
with it, which is far beyond anything the samplers here produce.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .domains import Domain
from .geometry import TriangleMesh, as_cloud, edge_incidence

__all__ = [
    "DuplicatePointsWarning",
    "delaunay",
    "prune_long_faces",
    "boundary_edges",
    "generate_param_mesh",
    "InverseInterpolator",
    "interpolate_inverse",
    "ReconstructionResult",
    "reconstruct_surface",
    "circumcircle",
]


class DuplicatePointsWarning(UserWarning):
    """Raised as a warning record when exact duplicate points are merged."""


# ---------------------------------------------------------------------------
# adaptive-precision predicates
# ---------------------------------------------------------------------------

_ORIENT_BOUND = 3.3306690738754716e-16  # (3 + 16 eps) eps
_INCIRCLE_BOUND = 1.1125369292536007e-15  # (10 + 96 eps) eps


def _orient_exact(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = map(Fraction, (ax, ay, bx, by, cx, cy))
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return int(det > 0) - int(det < 0)


def orient2d(ax, ay, bx, by, cx, cy) -> int:
    """Sign of the signed area of (a, b, c): +1 ccw, -1 cw, 0 collinear."""
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    detsum = abs(detleft) + abs(detright)
    if abs(det) >= _ORIENT_BOUND * detsum:
        return int(det > 0) - int(det < 0)
    return _orient_exact(ax, ay, bx, by, cx, cy)


def _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    ax, ay, bx, by, cx, cy, dx, dy = map(Fraction, (ax, ay, bx, by, cx, cy, dx, dy))
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    det = (
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    )
    return int(det > 0) - int(det < 0)


def incircle(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    """+1 iff d is strictly inside the circumcircle of ccw triangle (a, b, c)."""
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady)
    permanent = (
        (abs(bdxcdy) + abs(cdxbdy)) * alift
        + (abs(cdxady) + abs(adxcdy)) * blift
        + (abs(adxbdy) + abs(bdxady)) * clift
    )
    if abs(det) > _INCIRCLE_BOUND * permanent:
        return int(det > 0) - int(det < 0)
    return _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)


def circumcircle(a, b, c) -> tuple[np.ndarray, float]:
    """Circumcenter and squared circumradius of one triangle (float path)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    d = 2.0 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    if d == 0.0:
        raise ValueError("degenerate triangle has no circumcircle")
    b2 = ((b - a) ** 2).sum()
    c2 = ((c - a) ** 2).sum()
    ux = a[0] + (c[1] - a[1]) * b2 / d - (b[1] - a[1]) * c2 / d
    uy = a[1] + (b[0] - a[0]) * c2 / d - (c[0] - a[0]) * b2 / d
    center = np.array([ux, uy])
    return center, float(((a - center) ** 2).sum())


# ---------------------------------------------------------------------------
# Bowyer-Watson
# ---------------------------------------------------------------------------


class _Triangulator:
    """Incremental Delaunay over a fixed point array plus 3 bounding vertices."""

    def __init__(self, points: np.ndarray):
        n = len(points)
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        center = (lo + hi) / 2.0
        span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-9))
        m = 1e10 * span
        supers = np.array(
            [
                [center[0] - 2.0 * m, center[1] - m],
                [center[0] + 2.0 * m, center[1] - m],
                [center[0], center[1] + 2.0 * m],
            ]
        )
        self.n = n
        self.pts = np.vstack([points, supers])
        s0, s1, s2 = n, n + 1, n + 2
        self.tris: dict[int, tuple[int, int, int]] = {0: (s0, s1, s2)}
        self.edge: dict[tuple[int, int], int] = {(s0, s1): 0, (s1, s2): 0, (s2, s0): 0}
        self.next_tid = 1
        self.last_tid = 0

    def _orient(self, u: int, v: int, px: float, py: float) -> int:
        pu, pv = self.pts[u], self.pts[v]
        return orient2d(pu[0], pu[1], pv[0], pv[1], px, py)

    def _incircle(self, tid: int, px: float, py: float) -> int:
        a, b, c = self.tris[tid]
        pa, pb, pc = self.pts[a], self.pts[b], self.pts[c]
        return incircle(pa[0], pa[1], pb[0], pb[1], pc[0], pc[1], px, py)

    def _locate(self, px: float, py: float) -> int:
        tid = self.last_tid if self.last_tid in self.tris else next(iter(self.tris))
        prev: tuple[int, int] | None = None
        for _ in range(4 * len(self.tris) + 64):
            a, b, c = self.tris[tid]
            moved = False
            for u, v in ((a, b), (b, c), (c, a)):
                if prev == (u, v):
                    continue
                if self._orient(u, v, px, py) < 0:
                    nxt = self.edge.get((v, u))
                    if nxt is None:
                        raise RuntimeError("point escaped the bounding triangle")
                    prev = (v, u)
                    tid = nxt
                    moved = True
                    break
            if not moved:
                return tid
        # degenerate walk; settle by exhaustive scan (still exact)
        for tid in sorted(self.tris):
            a, b, c = self.tris[tid]
            if (
                self._orient(a, b, px, py) >= 0
                and self._orient(b, c, px, py) >= 0
                and self._orient(c, a, px, py) >= 0
            ):
                return tid
        raise RuntimeError("point location failed")

    def insert(self, pi: int) -> None:
        px, py = self.pts[pi]
        seed = self._locate(px, py)
        bad = {seed}
        order = [seed]
        stack = [seed]
        while stack:
            t = stack.pop()
            a, b, c = self.tris[t]
            for u, v in ((b, a), (c, b), (a, c)):
                nt = self.edge.get((u, v))
                if nt is not None and nt not in bad and self._incircle(nt, px, py) > 0:
                    bad.add(nt)
                    order.append(nt)
                    stack.append(nt)
        boundary: list[tuple[int, int]] = []
        for t in order:
            a, b, c = self.tris[t]
            for u, v in ((a, b), (b, c), (c, a)):
                nt = self.edge.get((v, u))
                if nt is None or nt not in bad:
                    boundary.append((u, v))
        for t in order:
            a, b, c = self.tris[t]
            for u, v in ((a, b), (b, c), (c, a)):
                del self.edge[(u, v)]
            del self.tris[t]
        for u, v in boundary:
            tid = self.next_tid
            self.next_tid += 1
            self.tris[tid] = (u, v, pi)
            self.edge[(u, v)] = tid
            self.edge[(v, pi)] = tid
            self.edge[(pi, u)] = tid
            self.last_tid = tid

    def run(self) -> list[tuple[int, int, int]]:
        for pi in range(self.n):
            self.insert(pi)
        out = []
        for a, b, c in self.tris.values():
            if a < self.n and b < self.n and c < self.n:
                out.append((a, b, c))
        return out


def _dedup_points(points: np.ndarray) -> tuple[np.ndarray, bool]:
    _, first = np.unique(points, axis=0, return_index=True)
    if len(first) == len(points):
        return points, False
    keep = np.sort(first)
    return points[keep], True


def delaunay(points) -> TriangleMesh:
    """Delaunay triangulation of a planar cloud.

    Exact duplicates are merged (first occurrence kept) with a
    DuplicatePointsWarning. Triangles come out ccw, rotated so the smallest
    vertex index leads, sorted lexicographically; the whole construction is
    deterministic in the input order. Raises on fewer than 3 distinct points
    or a fully collinear cloud.
    """
    pts = as_cloud(points, dim=2)
    pts, merged = _dedup_points(pts)
    if merged:
        warnings.warn(
            "duplicate points merged before triangulation", DuplicatePointsWarning,
            stacklevel=2,
        )
    if len(pts) < 3:
        raise ValueError(f"need at least 3 distinct points, got {len(pts)}")
    tris = _Triangulator(pts).run()
    if not tris:
        raise ValueError("all points are collinear, no triangulation exists")
    canon = []
    for a, b, c in tris:
        if a <= b and a <= c:
            canon.append((a, b, c))
        elif b <= a and b <= c:
            canon.append((b, c, a))
        else:
            canon.append((c, a, b))
    canon.sort()
    return TriangleMesh(pts, np.array(canon, dtype=np.int64))


def prune_long_faces(mesh: TriangleMesh, h: float) -> TriangleMesh:
    """Drop every face whose longest edge exceeds h; vertices are kept."""
    if not (np.isfinite(h) and h > 0):
        raise ValueError(f"h must be positive, got {h}")
    if len(mesh.triangles) == 0:
        return TriangleMesh(mesh.vertices.copy(), mesh.triangles.copy())
    keep = mesh.edge_lengths().max(axis=1) <= h
    return TriangleMesh(mesh.vertices.copy(), mesh.triangles[keep])


def boundary_edges(mesh: TriangleMesh) -> list[list[int]]:
    """Boundary loops of a pruned mesh, as vertex index cycles.

    An edge is boundary iff exactly one face uses it; an edge on more than
    two faces is an error naming the edge. Loops are walked smallest-vertex
    first, smallest-neighbor next, so the output is canonical.
    """
    inc = edge_incidence(mesh)
    adj: dict[int, list[int]] = {}
    for (i, j), tids in inc.items():
        if len(tids) > 2:
            raise ValueError(f"edge ({i}, {j}) belongs to {len(tids)} faces")
        if len(tids) == 1:
            adj.setdefault(i, []).append(j)
            adj.setdefault(j, []).append(i)
    for v in adj:
        adj[v].sort()
    unused: set[tuple[int, int]] = set()
    for i, nbrs in adj.items():
        for j in nbrs:
            if i < j:
                unused.add((i, j))
    loops: list[list[int]] = []
    for start in sorted(adj):
        while True:
            first = None
            for j in adj[start]:
                key = (start, j) if start < j else (j, start)
                if key in unused:
                    first = j
                    break
            if first is None:
                break
            loop = [start]
            prev, cur = start, first
            unused.discard((start, first) if start < first else (first, start))
            while cur != start:
                loop.append(cur)
                nxt = None
                for j in adj[cur]:
                    key = (cur, j) if cur < j else (j, cur)
                    if key in unused:
                        nxt = j
                        break
                if nxt is None:
                    raise ValueError(f"boundary walk dead-ends at vertex {cur}")
                unused.discard((cur, nxt) if cur < nxt else (nxt, cur))
                prev, cur = cur, nxt
            loops.append(loop)
    return loops


# ---------------------------------------------------------------------------
# parameter-domain mesh generation
# ---------------------------------------------------------------------------


def _boundary_ring(domain: Domain, step_at) -> np.ndarray:
    """March every loop placing points at locally prescribed spacing."""
    ring = []
    for loop in domain.loops:
        dense = np.vstack([seg.polyline(step_at(seg.point_at(0.0)) / 8.0) for seg in loop])
        seg_len = np.linalg.norm(np.diff(np.vstack([dense, dense[:1]]), axis=0), axis=1)
        placed = [dense[0]]
        acc = 0.0
        for i in range(1, len(dense)):
            acc += seg_len[i - 1]
            if acc >= step_at(dense[i]):
                placed.append(dense[i])
                acc = 0.0
        if len(placed) >= 2 and np.linalg.norm(placed[-1] - placed[0]) < 0.5 * step_at(placed[0]):
            placed.pop()
        ring.append(np.array(placed))
    return np.vstack(ring)


def generate_param_mesh(
    domain: Domain,
    mode: str = "uniform",
    target_edge: float = 0.05,
    seed: int = 0,
    lambda_inv_field=None,
) -> TriangleMesh:
    """Mesh the parameter domain with near-target edge lengths.

    mode "uniform": constant-radius Poisson-disk dart throwing. mode
    "lambda_adapted": dart radius proportional to 1/sqrt(lambda_inv_field(p)),
    normalized so the median spacing stays at target_edge; the field is a
    callable (n, 2) -> (n,) of positive values. Points are the boundary ring
    plus accepted darts; faces come from Delaunay, keeping those whose
    centroid lies in the domain.
    """
    if mode not in ("uniform", "lambda_adapted"):
        raise ValueError(f"mode must be 'uniform' or 'lambda_adapted', got {mode!r}")
    if not (np.isfinite(target_edge) and target_edge > 0):
        raise ValueError(f"target_edge must be positive, got {target_edge}")
    lo, hi = domain.bbox
    if target_edge > float(min(hi - lo)):
        raise ValueError(
            f"target_edge {target_edge} exceeds the domain extent {tuple(hi - lo)}"
        )
    rng = np.random.default_rng(seed)

    radius_factor = 0.75
    if mode == "uniform":
        def radius_at(p: np.ndarray) -> np.ndarray:
            p = np.atleast_2d(p)
            return np.full(len(p), radius_factor * target_edge)
    else:
        if lambda_inv_field is None:
            raise ValueError("lambda_adapted mode needs a lambda_inv_field")
        probe = domain.sample_area(256, rng)
        u = np.asarray(lambda_inv_field(probe), dtype=np.float64).ravel()
        if u.shape != (256,) or not (np.isfinite(u).all() and (u > 0).all()):
            raise ValueError("lambda_inv_field must return positive finite values")
        scale = radius_factor * target_edge * float(np.median(np.sqrt(u)))

        def radius_at(p: np.ndarray) -> np.ndarray:
            p = np.atleast_2d(p)
            vals = np.asarray(lambda_inv_field(p), dtype=np.float64).ravel()
            if not (np.isfinite(vals).all() and (vals > 0).all()):
                raise ValueError("lambda_inv_field must return positive finite values")
            return scale / np.sqrt(vals)

    def step_at(p) -> float:
        return float(radius_at(np.asarray(p, dtype=np.float64).reshape(1, 2))[0])

    ring = _boundary_ring(domain, step_at)
    accepted = [ring]
    radii = [radius_at(ring)]
    consecutive_miss = 0
    for _ in range(400):
        cand = domain.sample_area(512, rng)
        crad = radius_at(cand)
        acc = np.vstack(accepted)
        arad = np.concatenate(radii)
        took = 0
        for p, rp in zip(cand, crad):
            d = np.linalg.norm(acc - p, axis=1)
            if (d >= 0.5 * (arad + rp)).all():
                acc = np.vstack([acc, p[None]])
                arad = np.append(arad, rp)
                took += 1
        accepted = [acc]
        radii = [arad]
        if took == 0:
            consecutive_miss += 1
            if consecutive_miss >= 4:
                break
        else:
            consecutive_miss = 0
    points = accepted[0]
    if len(points) < 3:
        raise ValueError("mesh generation produced fewer than 3 points")
    mesh = delaunay(points)
    cent = mesh.vertices[mesh.triangles].mean(axis=1)
    keep = domain.contains_many(cent)
    tris = mesh.triangles[keep]
    if len(tris) == 0:
        raise ValueError("no face centroid lies inside the domain; target_edge too large")
    return TriangleMesh(mesh.vertices, tris)


# ---------------------------------------------------------------------------
# inverse interpolation and reconstruction
# ---------------------------------------------------------------------------


class _MeshLocator:
    """Walk-based point location on a fixed triangulation."""

    def __init__(self, mesh: TriangleMesh):
        self.pts = mesh.vertices
        self.tris = mesh.triangles
        self.edge: dict[tuple[int, int], int] = {}
        for tid, (a, b, c) in enumerate(self.tris):
            for u, v in ((a, b), (b, c), (c, a)):
                self.edge[(int(u), int(v))] = tid
        self.last = 0

    def locate(self, q: np.ndarray) -> int | None:
        if len(self.tris) == 0:
            return None
        tid = self.last
        prev: tuple[int, int] | None = None
        for _ in range(4 * len(self.tris) + 64):
            a, b, c = (int(v) for v in self.tris[tid])
            moved = False
            for u, v in ((a, b), (b, c), (c, a)):
                if prev == (u, v):
                    continue
                pu, pv = self.pts[u], self.pts[v]
                if orient2d(pu[0], pu[1], pv[0], pv[1], q[0], q[1]) < 0:
                    nxt = self.edge.get((v, u))
                    if nxt is None:
                        return None  # walked off the hull
                    prev = (v, u)
                    tid = nxt
                    moved = True
                    break
            if not moved:
                self.last = tid
                return tid
        for tid, (a, b, c) in enumerate(self.tris):
            pa, pb, pc = self.pts[a], self.pts[b], self.pts[c]
            if (
                orient2d(pa[0], pa[1], pb[0], pb[1], q[0], q[1]) >= 0
                and orient2d(pb[0], pb[1], pc[0], pc[1], q[0], q[1]) >= 0
                and orient2d(pc[0], pc[1], pa[0], pa[1], q[0], q[1]) >= 0
            ):
                return tid
        return None


def _barycentric(tri_pts: np.ndarray, q: np.ndarray) -> np.ndarray:
    a, b, c = tri_pts
    m = np.array([b - a, c - a]).T
    try:
        beta, gamma = np.linalg.solve(m, q - a)
    except np.linalg.LinAlgError as exc:
        raise ValueError("degenerate triangle in barycentric solve") from exc
    return np.array([1.0 - beta - gamma, beta, gamma])


class InverseInterpolator:
    """Reusable pullback from the plane to the original cloud.

    Triangulates the mapped cloud once; each query is located by walking and
    combines the corresponding original points barycentrically. Queries
    within 1e-9 of the triangulated region are snapped onto it; queries
    farther outside are flagged out in the returned mask (their output row is
    NaN). A query that coincides bitwise with a mapped point returns its
    original point exactly.
    """

    snap_tolerance = 1e-9

    def __init__(self, mapped, original):
        mapped = as_cloud(mapped, dim=2)
        original = np.asarray(original, dtype=np.float64)
        if original.ndim == 1:
            original = original[:, None]
        if len(mapped) != len(original):
            raise ValueError(
                f"mapped has {len(mapped)} points, original {len(original)}"
            )
        mapped_u, merged = _dedup_points(mapped)
        if merged:
            # keep row correspondence: redo the selection on indices
            _, first = np.unique(mapped, axis=0, return_index=True)
            keep = np.sort(first)
            original = original[keep]
            warnings.warn(
                "duplicate mapped points merged before triangulation",
                DuplicatePointsWarning,
                stacklevel=3,
            )
        self.original = original
        self.mesh = delaunay(mapped_u)
        self._locator = _MeshLocator(self.mesh)
        # exact-match lookup for bitwise vertex hits
        self._exact = {(float(x), float(y)): i for i, (x, y) in enumerate(self.mesh.vertices)}
        self._hull_segments: list[tuple[int, int]] | None = None

    def _snap(self, q: np.ndarray):
        if self._hull_segments is None:
            self._hull_segments = [
                (loop[i], loop[(i + 1) % len(loop)])
                for loop in boundary_edges(self.mesh)
                for i in range(len(loop))
            ]
        best = None
        for u, v in self._hull_segments:
            a, b = self.mesh.vertices[u], self.mesh.vertices[v]
            e = b - a
            t = float(np.clip(((q - a) @ e) / (e @ e), 0.0, 1.0))
            proj = a + t * e
            d = float(np.linalg.norm(q - proj))
            if best is None or d < best[0]:
                best = (d, u, v, proj)
        if best is None or best[0] > self.snap_tolerance:
            return None
        _, u, v, proj = best
        tid = self._locator.edge.get((u, v), self._locator.edge.get((v, u)))
        if tid is None:
            return None
        return tid, proj

    def __call__(self, queries) -> tuple[np.ndarray, np.ndarray]:
        queries = as_cloud(queries, dim=2)
        out = np.full((len(queries), self.original.shape[1]), np.nan)
        ok = np.zeros(len(queries), dtype=bool)
        for qi, q in enumerate(queries):
            hit = self._exact.get((float(q[0]), float(q[1])))
            if hit is not None:
                out[qi] = self.original[hit]
                ok[qi] = True
                continue
            tid = self._locator.locate(q)
            if tid is None:
                snapped = self._snap(q)
                if snapped is None:
                    continue
                tid, q = snapped
            tri = self.mesh.triangles[tid]
            w = _barycentric(self.mesh.vertices[tri], q)
            out[qi] = w @ self.original[tri]
            ok[qi] = True
        return out, ok


def interpolate_inverse(mapped, original, queries) -> tuple[np.ndarray, np.ndarray]:
    """Pull planar query points back to the original cloud.

    One-shot form of InverseInterpolator: returns (points, ok_mask) where
    rows with ok false could not be located (NaN output).
    """
    return InverseInterpolator(mapped, as_cloud(original))(queries)


@dataclass
class ReconstructionResult:
    """Lifted surface mesh plus the parameter mesh it came from.

    kept_vertices marks which parameter-mesh vertices could be located inside
    the mapped cloud's triangulation (others were dropped, with their faces).
    """

    surface: TriangleMesh
    param: TriangleMesh
    kept_vertices: np.ndarray


def reconstruct_surface(
    mapped,
    original,
    domain: Domain,
    mode: str = "uniform",
    target_edge: float = 0.05,
    seed: int = 0,
    lambda_inv_field=None,
) -> ReconstructionResult:
    """Rebuild a surface mesh from a parametrized cloud.

    Generates a parameter-domain mesh, pulls its vertices back through the
    mapped cloud (barycentric inverse interpolation), and reindexes faces
    over the vertices that landed inside the triangulated region.
    """
    param = generate_param_mesh(domain, mode, target_edge, seed, lambda_inv_field)
    lifted, ok = interpolate_inverse(mapped, original, param.vertices)
    if not ok.any():
        raise ValueError("no parameter vertex could be located in the mapped cloud")
    new_index = np.full(len(param.vertices), -1, dtype=np.int64)
    new_index[ok] = np.arange(int(ok.sum()))
    face_ok = ok[param.triangles].all(axis=1)
    faces = new_index[param.triangles[face_ok]]
    if len(faces) == 0:
        raise ValueError("all lifted faces were dropped; mapped cloud too sparse")
    surface = TriangleMesh(lifted[ok], faces)
    return ReconstructionResult(surface=surface, param=param, kept_vertices=ok)
