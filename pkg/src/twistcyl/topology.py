"""Linking of the boundary pair, mesh embeddedness and convex-hull tools."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial.transform import Rotation

from ._geometry import (pairwise_max_distance, point_triangle_distance, segment_intersection_2d,
                        segment_segment_distance, triangle_triangle_distance)

TOUCH_TOL = 1e-6
PHI = (1.0 + math.sqrt(5.0)) / 2.0


class LinkingError(ValueError):
    pass


class HullBoundError(RuntimeError):
    pass


def _closed(P):
    P = np.asarray(P, dtype=float)
    if np.linalg.norm(P[0] - P[-1]) > 0:
        P = np.vstack([P, P[:1]])
    return P


def _points(loop):
    return _closed(loop.samples if hasattr(loop, "samples") else loop)


def _segments(P):
    return P[:-1], P[1:]


def loop_distance(A, B, chunk=512) -> float:
    A, B = _points(A), _points(B)
    a0, a1 = _segments(A)
    b0, b1 = _segments(B)
    best = np.inf
    for i in range(0, len(a0), chunk):
        d = segment_segment_distance(a0[i:i + chunk, None], a1[i:i + chunk, None], b0[None], b1[None])
        best = min(best, float(d.min()))
    return best


@dataclass(frozen=True)
class LinkingResult:
    gauss_value: float
    crossing_value: int

    @property
    def agreed(self) -> bool:
        return round(self.gauss_value) == self.crossing_value and abs(self.gauss_value - round(self.gauss_value)) <= 0.05

    @property
    def is_hopf_candidate(self) -> bool:
        return abs(self.crossing_value) == 1


def linking_number_gauss(F, G, chunk=256, check=True) -> float:
    """Gauss linking integral, summed exactly over segment pairs.

    Each term is the signed solid angle subtended by one segment pair
    (Klenin and Langowski, 2000).
    """
    A, B = _points(F), _points(G)
    if check and loop_distance(A, B) <= TOUCH_TOL:
        raise LinkingError("loops touch; linking number undefined")
    a0, a1 = _segments(A)
    b0, b1 = _segments(B)
    total = 0.0

    def unit(v):
        n = np.linalg.norm(v, axis=-1, keepdims=True)
        return v / np.where(n > 0, n, 1.0)

    def dot(u, v):
        return np.clip(np.einsum("...i,...i->...", u, v), -1.0, 1.0)

    for i in range(0, len(a0), chunk):
        r1 = a0[i:i + chunk, None]
        r2 = a1[i:i + chunk, None]
        r3, r4 = b0[None], b1[None]
        r13, r14, r23, r24 = r3 - r1, r4 - r1, r3 - r2, r4 - r2
        n1 = unit(np.cross(r13, r14))
        n2 = unit(np.cross(r14, r24))
        n3 = unit(np.cross(r24, r23))
        n4 = unit(np.cross(r23, r13))
        omega = (np.arcsin(dot(n1, n2)) + np.arcsin(dot(n2, n3)) + np.arcsin(dot(n3, n4))
                 + np.arcsin(dot(n4, n1)))
        sgn = np.sign(np.einsum("...i,...i->...", np.cross(r4 - r3, r2 - r1), r13))
        total += float((omega * sgn).sum())
    return total / (4.0 * math.pi)


def generic_direction(seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = np.array([1.0, PHI, PHI ** 2]) + 1e-3 * rng.standard_normal(3)
    return v / np.linalg.norm(v)


def _projection_frame(v):
    v = v / np.linalg.norm(v)
    a = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(v, a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(v, e1)
    return e1, e2, v


def _signed_crossings(A, B, v, tol):
    e1, e2, v = _projection_frame(v)
    P = np.stack([A @ e1, A @ e2], axis=-1)
    Q = np.stack([B @ e1, B @ e2], axis=-1)
    hA, hB = A @ v, B @ v
    total = 0
    for i in range(len(P) - 1):
        p, q = P[i], P[i + 1]
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        blo = np.minimum(Q[:-1], Q[1:])
        bhi = np.maximum(Q[:-1], Q[1:])
        cand = np.nonzero(np.all(blo <= hi + tol, axis=1) & np.all(bhi >= lo - tol, axis=1))[0]
        if len(cand) == 0:
            continue
        hit, s, t = segment_intersection_2d(p, q, Q[cand], Q[cand + 1], tol=0.0)
        d = q - p
        for j, sj, tj in zip(cand[hit], s[hit], t[hit]):
            if min(sj, 1 - sj, tj, 1 - tj) < tol:
                return None  # crossing at a vertex: not generic
            e = Q[j + 1] - Q[j]
            cross2 = d[0] * e[1] - d[1] * e[0]
            if abs(cross2) < tol * np.linalg.norm(d) * np.linalg.norm(e):
                return None
            za = hA[i] + sj * (hA[i + 1] - hA[i])
            zb = hB[j] + tj * (hB[j + 1] - hB[j])
            if abs(za - zb) < tol:
                return None
            # right-handed crossing counts +1 (e1, e2, v is a right-handed frame)
            total += int(np.sign(cross2) * np.sign(za - zb))
    return total


def linking_number_crossings(F, G, direction=None, seed: int = 0, tol: float = 1e-12) -> int:
    """Half the signed crossing count of a generic projection."""
    A, B = _points(F), _points(G)
    v = generic_direction(seed) if direction is None else np.asarray(direction, dtype=float)
    rng = np.random.default_rng(seed + 1)
    for _ in range(11):
        n = _signed_crossings(A, B, v, tol)
        if n is not None:
            if n % 2:
                raise LinkingError("odd crossing count between closed loops")
            return n // 2
        v = v + 1e-4 * rng.standard_normal(3)
        v /= np.linalg.norm(v)
    raise LinkingError("no generic projection direction after 10 perturbations")


def linking(F, G, seed: int = 0) -> LinkingResult:
    return LinkingResult(linking_number_gauss(F, G), linking_number_crossings(F, G, seed=seed))


# ---------------------------------------------------------------------------
# self-intersection


@dataclass(frozen=True)
class SelfIntersectionReport:
    intersects: bool
    min_separation: float
    separation_is_lower_bound: bool
    exclusion_radius: float
    n_pairs_tested: int
    worst_pair: tuple | None


def _circumradius_bound(tri):
    c = tri.mean(axis=1)
    return c, np.linalg.norm(tri - c[:, None], axis=-1).max(axis=1)


def self_intersection(mesh, exclusion_radius: float | None = None, reach: float | None = None,
                      tol: float = 1e-12, chunk: int = 200_000) -> SelfIntersectionReport:
    """Triangle-triangle tests over non-adjacent pairs near each other.

    ``intersects`` is set when two faces sharing no vertex come within
    ``tol``. ``min_separation`` is taken over face pairs whose domain
    preimages are at least ``exclusion_radius`` apart (neighbours within a
    layer are trivially close and are skipped). It is exact when below
    ``reach``; otherwise ``reach`` is reported as a lower bound.
    """
    gap = getattr(mesh, "layer_gap", 0.0) or 0.0
    R = 4.0 * gap if exclusion_radius is None else exclusion_radius
    reach = max(2.0 * gap, 10 * tol) if reach is None else reach
    tri = mesh.vertices[mesh.faces]
    c3, r3 = _circumradius_bound(tri)
    dom = mesh.domain[mesh.faces].copy()
    # unwrap faces that straddle the seam
    span = dom[:, :, 0].max(axis=1) - dom[:, :, 0].min(axis=1)
    wrap = span > 0.5 * mesh.lam
    dom[wrap, :, 0] = np.where(dom[wrap, :, 0] < 0.5 * mesh.lam, dom[wrap, :, 0] + mesh.lam, dom[wrap, :, 0])
    cd, rd = _circumradius_bound(dom)
    tree = cKDTree(c3)
    pairs = tree.query_pairs(r=2.0 * r3.max() + reach, output_type="ndarray")
    if len(pairs):
        gap3 = np.linalg.norm(c3[pairs[:, 0]] - c3[pairs[:, 1]], axis=1) - r3[pairs[:, 0]] - r3[pairs[:, 1]]
        pairs = pairs[gap3 <= reach]
    if len(pairs):
        fi, fj = mesh.faces[pairs[:, 0]], mesh.faces[pairs[:, 1]]
        shared = (fi[:, :, None] == fj[:, None, :]).any(axis=(1, 2))
        pairs = pairs[~shared]
    if len(pairs):
        dx = np.abs(cd[pairs[:, 0], 0] - cd[pairs[:, 1], 0])
        dx = np.minimum(dx, mesh.lam - dx)
        dd = np.hypot(dx, cd[pairs[:, 0], 1] - cd[pairs[:, 1], 1]) - rd[pairs[:, 0]] - rd[pairs[:, 1]]
        piece = getattr(mesh, "face_piece", None)
        if piece is not None and R > 0:
            # each chart is injective on its own piece, so nearby faces of
            # one piece cannot meet
            keep = (piece[pairs[:, 0]] != piece[pairs[:, 1]]) | (dd >= R)
            pairs, dd = pairs[keep], dd[keep]
    # lower bound per pair: gap between axis-aligned boxes
    lo, hi = tri.min(axis=1), tri.max(axis=1)
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        lb = np.linalg.norm(np.maximum(0.0, np.maximum(lo[i] - hi[j], lo[j] - hi[i])), axis=1)
    else:
        lb = np.zeros(0)
    far = dd >= R if len(pairs) else np.zeros(0, dtype=bool)
    # pairs that could touch: exact test decides `intersects`
    hit = False
    touch = np.flatnonzero(lb <= tol)
    for s in range(0, len(touch), chunk):
        p = pairs[touch[s:s + chunk]]
        if np.any(triangle_triangle_distance(tri[p[:, 0]], tri[p[:, 1]]) <= tol):
            hit = True
            break
    # separation: visit far pairs by increasing lower bound, stop once the
    # bound exceeds the best exact distance found
    best, worst = np.inf, None
    cand = np.flatnonzero(far)
    cand = cand[np.argsort(lb[cand], kind="stable")]
    step = 4096
    for s in range(0, len(cand), step):
        block = cand[s:s + step]
        if lb[block[0]] > best:
            break
        p = pairs[block]
        d = triangle_triangle_distance(tri[p[:, 0]], tri[p[:, 1]])
        k = int(np.argmin(d))
        if d[k] < best:
            best, worst = float(d[k]), (int(p[k, 0]), int(p[k, 1]))
    lower = best > reach
    return SelfIntersectionReport(hit, float(min(best, reach)), bool(lower), float(R), int(len(pairs)), worst)


# ---------------------------------------------------------------------------
# convex hulls


@dataclass
class HullResult:
    points: np.ndarray
    rank: int
    vertices: np.ndarray  # indices into points
    faces: np.ndarray  # (k, 3) triangles (rank 3), polygon edges (rank 2) or a segment
    diameter_set: float
    diameter_hull: float
    center: np.ndarray
    basis: np.ndarray  # orthonormal rows spanning the affine hull
    equations: np.ndarray | None = None  # rank 3: outward facet planes
    polygon: np.ndarray | None = None  # rank 2: ordered vertex coordinates in the plane basis

    def contains_all(self, tol=1e-10) -> bool:
        return bool(np.all(point_hull_distance(self, self.points) <= tol))


def _affine_rank(P, rel=1e-12):
    c = P.mean(axis=0)
    _, s, Vt = np.linalg.svd(P - c, full_matrices=False)
    scale = max(float(s[0]) if len(s) else 0.0, 1e-300)
    rank = int(np.sum(s > rel * scale * max(1.0, math.sqrt(len(P))))) if s[0] > 1e-14 else 0
    return rank, c, Vt[:rank]


def hull_and_diameter(points) -> HullResult:
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3 or len(P) < 2:
        raise ValueError("need at least two points in R^3")
    rank, c, B = _affine_rank(P)
    eq = poly = None
    if rank == 3:
        h = ConvexHull(P)
        verts, faces, eq = h.vertices, h.simplices, h.equations
    elif rank == 2:
        h = ConvexHull((P - c) @ B.T)
        verts = h.vertices  # counterclockwise
        faces = np.column_stack([verts, np.roll(verts, -1)])
        poly = ((P - c) @ B.T)[verts]
    elif rank == 1:
        t = (P - c) @ B[0]
        verts = np.array([int(np.argmin(t)), int(np.argmax(t))])
        faces = verts[None]
    else:
        verts = np.array([0])
        faces = np.zeros((0, 3), dtype=int)
    return HullResult(P, rank, np.asarray(verts), np.asarray(faces), pairwise_max_distance(P),
                      pairwise_max_distance(P[verts]), c, B, eq, poly)


def _polygon_distance_2d(poly, q):
    """Distance from 2D points to a convex counterclockwise polygon (0 inside)."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    e = b - a
    rel = q[:, None, :] - a[None]
    cross = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
    inside = np.all(cross >= 0, axis=1)
    a3 = np.concatenate([a, np.zeros((len(a), 1))], axis=1)
    b3 = np.concatenate([b, np.zeros((len(b), 1))], axis=1)
    q3 = np.concatenate([q, np.zeros((len(q), 1))], axis=1)
    d = segment_segment_distance(q3[:, None], q3[:, None], a3[None], b3[None]).min(axis=1)
    return np.where(inside, 0.0, d)


def point_hull_distance(hull: HullResult, q, chunk=256) -> np.ndarray:
    """Euclidean distance from each query point to the convex hull."""
    q = np.atleast_2d(np.asarray(q, dtype=float))
    P = hull.points
    if hull.rank == 0:
        return np.linalg.norm(q - P[0], axis=1)
    if hull.rank == 1:
        a, b = P[hull.vertices[0]], P[hull.vertices[1]]
        return segment_segment_distance(q, q, a, b)
    if hull.rank == 2:
        rel = q - hull.center
        inplane = rel @ hull.basis.T
        off = rel - inplane @ hull.basis
        return np.hypot(np.linalg.norm(off, axis=1), _polygon_distance_2d(hull.polygon, inplane))
    out = np.empty(len(q))
    A = P[hull.faces]
    for s in range(0, len(q), chunk):
        qq = q[s:s + chunk]
        signed = qq @ hull.equations[:, :3].T + hull.equations[:, 3]
        inside = np.all(signed <= 0, axis=1)
        d = point_triangle_distance(qq[:, None], A[None, :, 0], A[None, :, 1], A[None, :, 2]).min(axis=1)
        out[s:s + chunk] = np.where(inside, 0.0, d)
    return out


@dataclass(frozen=True)
class HullBoundCertificate:
    x: tuple
    y: tuple
    x_param: float
    y_param: float
    dist_x_hull: float
    dist_xy: float
    diam_G: float
    length_G: float
    tol: float
    step: float

    @property
    def passed(self) -> bool:
        return (self.dist_x_hull <= self.tol and self.dist_xy >= 1 - 0.01 and self.diam_G >= 1 - 0.01
                and self.length_G >= 2 - 1e-9)

    def to_dict(self) -> dict:
        return {"x": list(self.x), "y": list(self.y), "dist_x_hull": self.dist_x_hull, "dist_xy": self.dist_xy,
                "diam_G": self.diam_G, "length_G": self.length_G, "tol": self.tol, "pass": self.passed}


def hull_bound_certificate(F, G, foliation, embedding) -> HullBoundCertificate:
    """Find a point x of F in Hull(G) and the bend from x to y on G.

    Distances are first taken at the samples of F, then the best sample is
    refined by minimizing over the continuous boundary parameter.
    """
    hull = hull_and_diameter(G.samples[:-1])
    step = float(np.mean(np.linalg.norm(np.diff(F.samples, axis=0), axis=1)))
    tol = 1e-3 * step
    d = point_hull_distance(hull, F.samples[:-1])
    i = int(np.argmin(d))
    xs = F.params
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]

    def dist_at(x):
        return float(point_hull_distance(hull, embedding.eval(np.array([[x, 1.0]])))[0])

    best_x, best_d = float(xs[i]), float(d[i])
    if best_d > 0 and hi > lo:
        res = minimize_scalar(dist_at, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
        if res.fun < best_d:
            best_x, best_d = float(res.x), float(res.fun)
    if best_d > tol:
        raise HullBoundError(f"F misses Hull(G): closest approach {best_d:.3g} exceeds tolerance {tol:.3g}")
    xb = float(foliation.bottom_of(best_x))
    x3 = embedding.eval(np.array([best_x, 1.0]))
    y3 = embedding.eval(np.array([xb, 0.0]))
    return HullBoundCertificate(tuple(map(float, x3)), tuple(map(float, y3)), best_x, xb, best_d,
                                float(np.linalg.norm(x3 - y3)), hull.diameter_set, G.total_length, tol, step)


def topology_certificate(F, G, mesh=None, foliation=None, embedding=None, seed: int = 0) -> dict:
    lk = linking(F, G, seed)
    out = {"linking": {"gauss": lk.gauss_value, "crossings": lk.crossing_value, "agreed": lk.agreed}}
    if mesh is not None:
        si = self_intersection(mesh)
        out["embedded"] = {"intersects": si.intersects, "min_separation": si.min_separation,
                           "separation_is_lower_bound": si.separation_is_lower_bound}
    if foliation is not None and embedding is not None:
        out["hull_bound"] = hull_bound_certificate(F, G, foliation, embedding).to_dict()
    return out


# ---------------------------------------------------------------------------
# randomized suites


def hull_diameter_fuzz(trials: int, seed: int, n_points: int = 50, tol: float = 1e-12) -> dict:
    """Set diameter against hull diameter on random point sets."""
    rng = np.random.default_rng(seed)
    worst, violations = 0.0, 0
    for _ in range(trials):
        P = rng.standard_normal((n_points, 3)) * rng.uniform(0.1, 10.0, 3)
        h = hull_and_diameter(P)
        gap = abs(h.diameter_set - h.diameter_hull)
        worst = max(worst, gap)
        violations += int(gap > tol or not h.contains_all())
    return {"trials": trials, "violations": violations, "max_gap": worst}


def hopf_pair(n: int = 96):
    t = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    A = np.column_stack([np.cos(t), np.sin(t), np.zeros(n)])
    B = np.column_stack([1.0 + np.cos(t), np.zeros(n), np.sin(t)])
    return A, B


def hopf_perturbation_suite(trials: int, seed: int, noise: float = 0.05) -> dict:
    """Random motions, scalings and vertex noise of the Hopf pair; both methods must agree."""
    rng = np.random.default_rng(seed)
    disagreements, values = 0, []
    for k in range(trials):
        A, B = hopf_pair(int(rng.integers(48, 129)))
        A = A + noise * rng.standard_normal(A.shape)
        B = B + noise * rng.standard_normal(B.shape)
        if k % 2:
            B = B[::-1]
        R = Rotation.random(random_state=rng).as_matrix()
        if rng.random() < 0.5:
            R = R @ np.diag([1.0, 1.0, -1.0])
        s = rng.uniform(0.2, 5.0)
        t = rng.uniform(-3, 3, 3)
        A, B = s * A @ R.T + t, s * B @ R.T + t
        g = linking_number_gauss(A, B)
        c = linking_number_crossings(A, B, seed=seed + k)
        ok = round(g) == c and abs(g - round(g)) <= 0.05
        disagreements += int(not ok)
        values.append(c)
    return {"trials": trials, "disagreements": disagreements,
            "linking_values": sorted(set(values)) if values else []}
