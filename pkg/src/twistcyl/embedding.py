"""Isometric embedding of the thickened pattern: rigid triangles plus pseudofolds.

Flat triangle ``k`` is placed by a planar isometry at height
``layer_k * layer_gap``. Band ``k`` is a pseudofold whose U-turn starts on
triangle ``k``'s edge, heads away from it and comes back over it, so the
planar part of triangle ``k + 1`` is triangle ``k``'s map composed with the
reflection across the band's centerline.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .flat_domain import CreasePattern, FlatCylinder, ThickenedPattern, thicken
from .pseudofold import PseudofoldChart, UProfile, eval_chart, make_u_profile

DEFAULT_LAYER_FRACTION = 1.0 / 40.0
CONTINUITY_TOL = 1e-9


class BudgetError(ValueError):
    pass


class ContinuityError(RuntimeError):
    pass


@dataclass(frozen=True)
class BandChart:
    chart: PseudofoldChart
    origin: np.ndarray  # domain point on the band's left edge at y = 0
    normal: np.ndarray  # domain unit normal across the band
    direction: np.ndarray  # domain unit vector along the rulings
    width: float


@dataclass
class CylinderEmbedding:
    thickened: ThickenedPattern
    layer_gap: float
    flat_maps: list  # (M 2x2, o 2) per triangle
    heights: list
    bands: list  # BandChart per crease
    ambient: tuple = field(default=(np.eye(3), np.zeros(3)))

    @property
    def domain(self) -> FlatCylinder:
        return self.thickened.domain

    @property
    def lam(self) -> float:
        return self.thickened.lam

    @property
    def epsilon(self) -> float:
        return self.thickened.epsilon

    @property
    def pattern(self) -> CreasePattern:
        return self.thickened.base

    @property
    def smoothness_class(self) -> str:
        classes = {b.chart.profile.smoothness_class for b in self.bands}
        return min(classes) if classes else "C-inf"

    def boundaries(self):
        return self.thickened.boundaries()

    def moved(self, R, t=None) -> "CylinderEmbedding":
        """Same embedding followed by the ambient affine map ``x -> R x + t``."""
        A0, t0 = self.ambient
        R = np.asarray(R, dtype=float)
        t = np.zeros(3) if t is None else np.asarray(t, dtype=float)
        return CylinderEmbedding(self.thickened, self.layer_gap, self.flat_maps, self.heights,
                                 self.bands, (R @ A0, R @ t0 + t))

    def scaled(self, factor: float) -> "CylinderEmbedding":
        return self.moved(factor * np.eye(3))

    # -- evaluation ---------------------------------------------------------

    def locate(self, pts):
        """Piece index (0..7) and seam-reduced copy of each domain point."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        xb, xt = self.boundaries()
        y = pts[:, 1]
        x0 = xb[0] + (xt[0] - xb[0]) * y
        xr = x0 + np.mod(pts[:, 0] - x0, self.lam)
        # guard against mod landing exactly on lam
        xr = np.where(xr >= x0 + self.lam, xr - self.lam, xr)
        X = xb[None, :] + (xt - xb)[None, :] * y[:, None]
        j = np.clip((X <= xr[:, None]).sum(axis=1) - 1, 0, 7)
        return j, np.column_stack([xr, y])

    def eval_piece(self, j: int, pts, want_jacobian=False):
        """Evaluate with the chart of piece ``j`` regardless of membership."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if j % 2 == 0:
            M, o = self.flat_maps[j // 2]
            out = np.column_stack([pts @ M.T + o, np.full(len(pts), self.heights[j // 2])])
            J = np.broadcast_to(np.vstack([M, np.zeros((1, 2))]), (len(pts), 3, 2)).copy()
        else:
            b = self.bands[j // 2]
            rel = pts - b.origin
            s = rel @ b.normal
            r = rel @ b.direction
            s = np.clip(s, 0.0, b.chart.profile.total_length)
            out, Jsr = eval_chart(b.chart, s, r, check=False)
            # (d/ds, d/dr) -> (d/dx, d/dy)
            J = Jsr @ np.vstack([b.normal, b.direction])
        A, t = self.ambient
        out = out @ A.T + t
        if want_jacobian:
            return out, np.einsum("ij,njk->nik", A, J)
        return out

    def _evaluate(self, pts, want_jacobian):
        j, pr = self.locate(pts)
        out = np.empty((len(pr), 3))
        J = np.empty((len(pr), 3, 2))
        for piece in np.unique(j):
            m = j == piece
            res = self.eval_piece(int(piece), pr[m], want_jacobian=True)
            out[m], J[m] = res
        return (out, J) if want_jacobian else out

    def eval(self, p):
        p = np.asarray(p, dtype=float)
        out = self._evaluate(np.atleast_2d(p), False)
        return out[0] if p.ndim == 1 else out

    def eval_differential(self, p):
        p = np.asarray(p, dtype=float)
        _, J = self._evaluate(np.atleast_2d(p), True)
        return J[0] if p.ndim == 1 else J


def _band_profile(separation, width, kind, bump_order, n_samples) -> UProfile:
    if width == 0:
        return UProfile(0.0, 0.0, 0.0, kind, bump_order, n_samples, sharp=True)
    try:
        return make_u_profile(separation, bump_order=bump_order, n_samples=n_samples, kind=kind,
                              total_length=width)
    except ValueError as exc:
        raise BudgetError(f"epsilon budget insufficient for requested layer_gap: {exc}") from None


def assemble(thickened: ThickenedPattern, layer_gap: float | None = None, bump_order: int = 2,
             kind: str = "smooth", n_samples: int = 512) -> CylinderEmbedding:
    """Fold the thickened pattern into R^3 with pseudofolds on every band."""
    eps = thickened.epsilon
    if layer_gap is None:
        layer_gap = eps * DEFAULT_LAYER_FRACTION
    if layer_gap < 0:
        raise ValueError("layer_gap must be nonnegative")
    if eps == 0 and layer_gap != 0:
        raise BudgetError("epsilon budget insufficient for requested layer_gap: epsilon is 0")
    layers = thickened.base.layers
    maps = [(np.eye(2), np.zeros(2))]
    heights = [layers[0] * layer_gap]
    bands = []
    for k in range(4):
        M, o = maps[k]
        z = heights[k]
        origin, n, d = thickened.band_frame(k)
        w = thickened.band_widths[k]
        climb = layers[(k + 1) % 4] - layers[k]
        prof = _band_profile(abs(climb) * layer_gap, w, kind, bump_order, n_samples)
        up = 1.0 if climb >= 0 else -1.0
        origin3 = np.append(M @ origin + o, z)
        e1 = np.append(M @ n, 0.0)
        ruling = np.append(M @ d, 0.0)
        e2 = np.array([0.0, 0.0, up])
        corners = np.asarray(thickened.fold_bands()[k])
        rs = (corners - origin) @ d
        chart = PseudofoldChart(prof, origin3, ruling, e1, e2, (float(rs.min()), float(rs.max())))
        bands.append(BandChart(chart, origin, n, d, w))
        end = prof.end_point() if w > 0 else np.zeros(2)
        # continuation past the band: a reflection across its centerline
        refl = np.outer(d, d) - np.outer(n, n)
        M_next = M @ refl
        o_next = (M @ origin + o) + (end[0] + w) * (M @ n) - M_next @ origin
        maps.append((M_next, o_next))
        heights.append(z + up * end[1])
    # closure: the map after band 3 must reproduce triangle 0 one period over
    probe = np.array([[0.0, 0.0], [0.25, 0.5], [0.9, 0.05]])
    M4, o4 = maps[4]
    M0, o0 = maps[0]
    shifted = probe + [thickened.lam, 0.0]
    defect = max(float(np.abs((shifted @ M4.T + o4) - (probe @ M0.T + o0)).max()),
                 abs(heights[4] - heights[0]))
    if defect > CONTINUITY_TOL:
        raise ContinuityError(f"chart continuity violation at the seam: defect {defect:.3g}")
    return CylinderEmbedding(thickened, float(layer_gap), maps[:4], heights[:4], bands)


def build(pattern: CreasePattern, epsilon: float, layer_gap: float | None = None,
          widths="equal", **kw) -> CylinderEmbedding:
    return assemble(thicken(pattern, epsilon, widths=widths), layer_gap=layer_gap, **kw)


def limit_embedding(pattern: CreasePattern) -> CylinderEmbedding:
    """The right-isosceles cylinder map, packaged as a (degenerate) embedding."""
    return assemble(thicken(pattern, 0.0), layer_gap=0.0)


# ---------------------------------------------------------------------------
# verification reports


def junction_defects(emb: CylinderEmbedding, n: int = 64) -> np.ndarray:
    """Max two-sided disagreement along each of the 8 chart junctions.

    Entry 7 is the seam (band 3 against triangle 0 one period over).
    """
    xb, xt = emb.boundaries()
    y = np.linspace(0.0, 1.0, n)
    out = np.zeros(8)
    for j in range(8):
        jb = j + 1
        pts = np.column_stack([xb[jb] + (xt[jb] - xb[jb]) * y, y])
        left = emb.eval_piece(j, pts)
        if jb == 8:
            right = emb.eval_piece(0, pts - [emb.lam, 0.0])
        else:
            right = emb.eval_piece(jb, pts)
        out[j] = np.abs(left - right).max()
    return out


def seam_defect(emb: CylinderEmbedding, n: int = 64) -> float:
    return float(junction_defects(emb, n)[7])


def _gram_defect(J):
    G = np.einsum("nki,nkj->nij", J, J) - np.eye(2)
    return np.abs(np.linalg.eigvalsh(G)).max(axis=1)


def _band_grid(emb: CylinderEmbedding, n_s: int, n_r: int):
    pts = []
    for b in emb.bands:
        if b.width == 0:
            continue
        s = np.linspace(0.0, b.width, n_s)
        y = np.linspace(0.0, 1.0, n_r)
        S, Y = np.meshgrid(s, y, indexing="ij")
        # points at normal offset s from the left edge, at height y
        x = b.origin[0] + S / b.normal[0] + (Y * b.direction[0] / b.direction[1])
        pts.append(np.column_stack([x.ravel(), Y.ravel()]))
    return np.vstack(pts) if pts else np.zeros((0, 2))


def _fd_jacobian(emb, pts, h):
    """Central differences with one Richardson step."""
    def cd(step):
        cols = []
        for e in (np.array([step, 0.0]), np.array([0.0, step])):
            cols.append((emb.eval(pts + e) - emb.eval(pts - e)) / (2 * step))
        return np.stack(cols, axis=-1)
    return (4 * cd(h / 2) - cd(h)) / 3


def isometry_report(emb: CylinderEmbedding, grid_resolution: int = 64, n_fd: int = 100,
                    fd_step: float = 1e-5, seed: int = 0) -> dict:
    if grid_resolution < 32:
        raise ValueError("grid_resolution must be >= 32 per unit")
    nx = int(math.ceil(grid_resolution * emb.lam))
    xs = (np.arange(nx) + 0.5) * emb.lam / nx
    ys = np.linspace(0.0, 1.0, grid_resolution + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    grid = np.column_stack([X.ravel(), Y.ravel()])
    grid = np.vstack([grid, _band_grid(emb, 64, grid_resolution + 1)])
    J = emb.eval_differential(grid)
    g = _gram_defect(J)
    i = int(np.argmax(g))
    rng = np.random.default_rng(seed)
    fd_pts = np.column_stack([rng.uniform(0, emb.lam, n_fd), rng.uniform(fd_step, 1 - fd_step, n_fd)])
    bgrid = _band_grid(emb, 32, 33)
    bgrid = bgrid[(bgrid[:, 1] > fd_step) & (bgrid[:, 1] < 1 - fd_step)]
    if len(bgrid):
        pick = rng.choice(len(bgrid), size=min(n_fd // 2, len(bgrid)), replace=False)
        fd_pts[: len(pick)] = bgrid[pick]
    Jfd = _fd_jacobian(emb, fd_pts, fd_step)
    Ja = emb.eval_differential(fd_pts)
    rel = np.linalg.norm(Jfd - Ja, axis=(1, 2)) / np.linalg.norm(Ja, axis=(1, 2))
    return {
        "max_gram_defect": float(g[i]),
        "location": [float(v) for v in grid[i]],
        "fd_max_rel_error": float(rel.max()),
        "n_points": int(len(grid)),
    }


# ---------------------------------------------------------------------------
# boundary loops


@dataclass(frozen=True)
class BoundaryLoop:
    samples: np.ndarray  # closed polyline, first == last
    params: np.ndarray  # domain x of each sample (last = first + lam)
    which: str  # "F" (y = 1) or "G" (y = 0)
    lam: float

    @property
    def y(self) -> float:
        return 1.0 if self.which == "F" else 0.0

    @property
    def total_length(self) -> float:
        return float(np.linalg.norm(np.diff(self.samples, axis=0), axis=1).sum())

    def arc_length_between(self, x0: float, x1: float) -> float:
        """Domain arc length from x0 forward to x1 (mod lam)."""
        return float(np.mod(x1 - x0, self.lam))

    def sub_arc(self, emb: CylinderEmbedding, x0: float, x1: float) -> np.ndarray:
        """Polyline of the arc from domain x0 forward to x1, endpoints exact."""
        length = np.mod(x1 - x0, self.lam)
        p = self.params[:-1]
        rel = np.mod(p - x0, self.lam)
        inner = np.sort(rel[(rel > 1e-12) & (rel < length - 1e-12)])
        xs = np.concatenate([[0.0], inner, [length]]) + x0
        return emb.eval(np.column_stack([xs, np.full(len(xs), self.y)]))


def _boundary_params(emb: CylinderEmbedding, y: float, n_samples: int) -> np.ndarray:
    xb, xt = emb.boundaries()
    X = xb + (xt - xb) * y
    widths = np.diff(X)
    is_band = np.arange(8) % 2 == 1
    band_total = widths[is_band].sum()
    flat_total = widths[~is_band].sum()
    n_band = n_samples // 8 if band_total > 0 else 0
    n_flat = n_samples - 4 * n_band
    params = []
    for j in range(8):
        if widths[j] <= 1e-15:
            continue
        if is_band[j]:
            m = max(n_band, 2)
        else:
            m = max(int(round(n_flat * widths[j] / flat_total)), 2)
        params.append(X[j] + widths[j] * np.arange(m) / m)
    return np.concatenate(params)


def boundary_loops(emb: CylinderEmbedding, n_samples: int = 1024):
    if n_samples < 128:
        raise ValueError("n_samples must be >= 128")
    loops = []
    for which, y in (("F", 1.0), ("G", 0.0)):
        x = _boundary_params(emb, y, n_samples)
        x = np.append(x, x[0] + emb.lam)
        pts = emb.eval(np.column_stack([x, np.full(len(x), y)]))
        pts[-1] = pts[0]
        loops.append(BoundaryLoop(pts, x, which, emb.lam))
    return tuple(loops)


# ---------------------------------------------------------------------------
# meshing


@dataclass
class SurfaceMesh:
    vertices: np.ndarray  # (V, 3)
    domain: np.ndarray  # (V, 2) domain tags
    faces: np.ndarray  # (F, 3)
    lam: float
    layer_gap: float = 0.0
    face_piece: np.ndarray | None = None  # piece index (0..7) of each face

    def edges(self) -> np.ndarray:
        e = np.sort(np.vstack([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]]), axis=1)
        return np.unique(e, axis=0)

    def edge_face_counts(self):
        e = np.sort(np.vstack([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]]), axis=1)
        return np.unique(e, axis=0, return_counts=True)

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges()) + len(self.faces)

    def boundary_cycles(self) -> list:
        edges, counts = self.edge_face_counts()
        if np.any(counts > 2):
            raise ValueError("non-manifold edge")
        bnd = edges[counts == 1]
        nbrs: dict = {}
        for a, b in bnd:
            nbrs.setdefault(int(a), []).append(int(b))
            nbrs.setdefault(int(b), []).append(int(a))
        if any(len(v) != 2 for v in nbrs.values()):
            raise ValueError("boundary is not a disjoint union of cycles")
        seen: set = set()
        cycles = []
        for start in nbrs:
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            prev, cur = start, nbrs[start][0]
            while cur != start:
                cyc.append(cur)
                seen.add(cur)
                a, b = nbrs[cur]
                prev, cur = cur, (b if a == prev else a)
            cycles.append(cyc)
        return cycles

    def face_adjacency_pairs(self) -> set:
        """Pairs of faces sharing at least one vertex."""
        from collections import defaultdict

        by_vertex = defaultdict(list)
        for f, tri in enumerate(self.faces):
            for v in tri:
                by_vertex[int(v)].append(f)
        pairs = set()
        for fs in by_vertex.values():
            for i in range(len(fs)):
                for k in range(i + 1, len(fs)):
                    pairs.add((fs[i], fs[k]))
        return pairs

    def edge_distortion(self) -> float:
        """Max relative difference between 3D and domain edge lengths."""
        e = self.edges()
        d3 = np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)
        dd = FlatCylinder(self.lam).distance(self.domain[e[:, 0]], self.domain[e[:, 1]])
        return float(np.max(np.abs(d3 - dd) / np.maximum(dd, 1e-300)))


def column_parameters(emb: CylinderEmbedding, grid_resolution: int, band_columns: int = 48):
    """Column positions (piece index, fraction) for the foliation mesh."""
    xb, xt = emb.boundaries()
    mid = 0.5 * (xb + xt)
    cols = []
    for j in range(8):
        span = mid[j + 1] - mid[j]
        if span <= 1e-15:
            continue
        m = band_columns if j % 2 else max(int(math.ceil(grid_resolution * span)), 2)
        for i in range(m):
            cols.append((j, i / m))
    return cols


def triangulate(emb: CylinderEmbedding, grid_resolution: int = 64, band_columns: int = 48) -> SurfaceMesh:
    """Mesh along the prebend foliation: columns are prebends, rows are heights."""
    xb, xt = emb.boundaries()
    cols = column_parameters(emb, grid_resolution, band_columns)
    ny = grid_resolution
    ys = np.arange(ny + 1) / ny
    lam = emb.lam
    key_index: dict = {}
    dom = []
    grid = np.empty((len(cols), ny + 1), dtype=int)
    for c, (j, f) in enumerate(cols):
        b = (1 - f) * xb[j] + f * xb[j + 1]
        t = (1 - f) * xt[j] + f * xt[j + 1]
        for i, y in enumerate(ys):
            x = b + (t - b) * y
            xm = math.fmod(x, lam)
            if xm < 0:
                xm += lam
            if lam - xm < 1e-11:
                xm = 0.0
            key = (round(xm, 10), round(y, 12))
            idx = key_index.get(key)
            if idx is None:
                idx = len(dom)
                key_index[key] = idx
                dom.append((xm, y))
            grid[c, i] = idx
    faces, piece = [], []
    nc = len(cols)
    for c in range(nc):
        c2 = (c + 1) % nc
        for i in range(ny):
            a, b = grid[c, i], grid[c2, i]
            d, e = grid[c, i + 1], grid[c2, i + 1]
            for tri in ((a, b, e), (a, e, d)):
                if len(set(tri)) == 3:
                    faces.append(tri)
                    piece.append(cols[c][0])
    dom = np.array(dom)
    verts = emb.eval(dom)
    return SurfaceMesh(verts, dom, np.array(faces, dtype=int), lam, emb.layer_gap, np.array(piece))


def write_obj(mesh: SurfaceMesh, fh, loops=()) -> None:
    fh.write("# twisted paper cylinder mesh\n")
    for v in mesh.vertices:
        fh.write(f"v {v[0]:.12g} {v[1]:.12g} {v[2]:.12g}\n")
    for u, w in mesh.domain:
        fh.write(f"vt {u:.12g} {w:.12g}\n")
    for f in mesh.faces + 1:
        fh.write(f"f {f[0]}/{f[0]} {f[1]}/{f[1]} {f[2]}/{f[2]}\n")
    offset = len(mesh.vertices)
    for loop in loops:
        fh.write(f"g boundary_{loop.which}\n")
        pts = loop.samples[:-1]
        for v in pts:
            fh.write(f"v {v[0]:.12g} {v[1]:.12g} {v[2]:.12g}\n")
        idx = list(range(offset + 1, offset + len(pts) + 1)) + [offset + 1]
        fh.write("l " + " ".join(map(str, idx)) + "\n")
        offset += len(pts)


def build_report(emb: CylinderEmbedding, grid_resolution: int = 64, n_loop: int = 1024) -> dict:
    iso = isometry_report(emb, grid_resolution)
    F, G = boundary_loops(emb, n_loop)
    return {
        "pattern": emb.pattern.pattern_id,
        "epsilon": emb.epsilon,
        "layer_gap": emb.layer_gap,
        "smoothness_class": emb.smoothness_class,
        "max_gram_defect": iso["max_gram_defect"],
        "fd_max_rel_error": iso["fd_max_rel_error"],
        "seam_defect": seam_defect(emb),
        "max_junction_defect": float(junction_defects(emb).max()),
        "boundary_lengths": {"F": F.total_length, "G": G.total_length},
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
