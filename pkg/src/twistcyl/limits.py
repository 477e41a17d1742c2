"""Distance to the right-isosceles limit, endgame and bigon certificates, sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import least_squares, minimize, minimize_scalar
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial.transform import Rotation

from ._geometry import point_triangle_distance, segment_segment_distance
from .embedding import (CylinderEmbedding, boundary_loops, build, isometry_report, junction_defects,
                        triangulate)
from .flat_domain import fold_by_reflections, pattern_catalog
from .rulings import (BalancedPairFrame, BendFoliation, balance_defect, bend_foliation, find_balanced_pair,
                      projection_certificate)
from .topology import (LinkingError, hull_bound_certificate, linking, linking_number_crossings, loop_distance,
                       self_intersection)

SCHEMA_VERSION = 1
DEFAULT_EPSILONS = (0.5, 0.2, 0.1, 0.05)


class VerificationError(RuntimeError):
    pass


class BigonError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# right isosceles fit


@dataclass(frozen=True)
class TriangleFit:
    plane_point: np.ndarray
    normal: np.ndarray
    vertex: np.ndarray  # right-angle corner
    legs: np.ndarray  # (2, 3) unit leg directions
    one_sided: float  # samples -> triangle
    hausdorff: float  # symmetric

    @property
    def corners(self) -> np.ndarray:
        return np.vstack([self.vertex, self.vertex + self.legs[0], self.vertex + self.legs[1]])


def _canonical_frame(P):
    c = P.mean(axis=0)
    X = P - c
    _, s, Vt = np.linalg.svd(X, full_matrices=False)
    if len(s) < 2 or s[1] <= 1e-10 * max(s[0], 1e-300):
        raise ValueError("samples degenerate (collinear); cannot fit a triangle")
    axes = []
    for k in range(2):
        e = Vt[k]
        proj = X @ e
        skew = float(np.mean(proj ** 3))
        if abs(skew) < 1e-12 * max(float(np.mean(proj ** 2)) ** 1.5, 1e-300):
            skew = float(proj[np.argmax(np.abs(proj))])
        axes.append(e if skew >= 0 else -e)
    n = np.cross(axes[0], axes[1])
    return c, np.vstack(axes), n


def _local(q, params):
    cx, cy, phi = params
    ct, st = math.cos(phi), math.sin(phi)
    d = q - [cx, cy]
    return np.column_stack([ct * d[:, 0] + st * d[:, 1], -st * d[:, 0] + ct * d[:, 1]])


def _dist_unit_triangle(p2):
    """Planar distance to the triangle (0,0), (1,0), (0,1); zero inside."""
    x, y = p2[:, 0], p2[:, 1]
    d1 = np.hypot(x - np.clip(x, 0.0, 1.0), y)
    d2 = np.hypot(x, y - np.clip(y, 0.0, 1.0))
    t = np.clip(0.5 * (y - x + 1.0), 0.0, 1.0)
    d3 = np.hypot(x - (1.0 - t), y - t)
    inside = (x >= 0) & (y >= 0) & (x + y <= 1)
    return np.where(inside, 0.0, np.minimum(np.minimum(d1, d2), d3))


def _reverse_distance(corners, samples, faces, n_grid=40):
    """Max over a triangle grid of the distance to the sampled surface."""
    i, j = np.meshgrid(np.arange(n_grid + 1), np.arange(n_grid + 1), indexing="ij")
    m = i + j <= n_grid
    u, v = i[m] / n_grid, j[m] / n_grid
    T = corners[0] + u[:, None] * (corners[1] - corners[0]) + v[:, None] * (corners[2] - corners[0])
    if faces is None:
        # point cloud: compare against the convex hull of the cloud in the fit plane
        c = corners[0]
        e1 = corners[1] - c
        e2 = corners[2] - c
        B = np.vstack([e1, e2])
        q = np.linalg.lstsq(B.T, (samples - c).T, rcond=None)[0].T
        hull = ConvexHull(q)
        eq = hull.equations
        t2 = np.column_stack([u, v])
        outside = np.max(t2 @ eq[:, :2].T + eq[:, 2], axis=1)
        return float(max(0.0, outside.max()))
    tri = samples[faces]
    cent = tri.mean(axis=1)
    rmax = float(np.linalg.norm(tri - cent[:, None], axis=-1).max())
    vtree = cKDTree(samples)
    ftree = cKDTree(cent)
    r0, _ = vtree.query(T)
    best = 0.0
    for p, r in zip(T, r0):
        cand = ftree.query_ball_point(p, r + rmax)
        if not cand:
            best = max(best, float(r))
            continue
        t = tri[cand]
        d = point_triangle_distance(p, t[:, 0], t[:, 1], t[:, 2]).min()
        best = max(best, float(d))
    return best


def fit_right_isosceles(samples, faces=None, n_angles: int = 72) -> TriangleFit:
    """Best right isosceles triangle (legs 1) in the sup sense.

    The samples' least-squares plane fixes the normal; the in-plane pose
    is found by a coarse angle scan followed by local refinement of the
    one-sided Hausdorff distance. The reported ``hausdorff`` also includes
    the triangle-to-samples direction (against ``faces`` if given).
    """
    P = np.asarray(samples, dtype=float)
    if len(P) < 100:
        raise ValueError("need at least 100 samples")
    c, axes, n = _canonical_frame(P)
    q = (P - c) @ axes.T
    h2 = ((P - c) @ n) ** 2

    def dists(params):
        return np.sqrt(_dist_unit_triangle(_local(q, params)) ** 2 + h2)

    def sup(params):
        return float(dists(params).max())

    starts = []
    for phi in np.linspace(0.0, 2 * math.pi, n_angles, endpoint=False):
        ct, st = math.cos(phi), math.sin(phi)
        # centroid of the triangle on the centroid of the samples
        cx = -(ct * (1 / 3) - st * (1 / 3))
        cy = -(st * (1 / 3) + ct * (1 / 3))
        starts.append((sup((cx, cy, phi)), (cx, cy, phi)))
    starts.sort(key=lambda s: s[0])
    best_val, best_x = math.inf, None
    for _, x0 in starts[:3]:
        ls = least_squares(lambda p: dists(p), x0, method="trf", xtol=1e-12, ftol=1e-12)
        x1 = ls.x if sup(ls.x) < sup(x0) else np.asarray(x0)
        nm = minimize(sup, x1, method="Nelder-Mead",
                      options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000, "maxfev": 8000})
        nm = minimize(sup, nm.x, method="Nelder-Mead",
                      options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 4000, "maxfev": 8000})
        if nm.fun < best_val:
            best_val, best_x = float(nm.fun), nm.x
    cx, cy, phi = best_x
    ct, st = math.cos(phi), math.sin(phi)
    l1 = ct * axes[0] + st * axes[1]
    l2 = -st * axes[0] + ct * axes[1]
    vertex = c + cx * axes[0] + cy * axes[1]
    legs = np.vstack([l1, l2])
    corners = np.vstack([vertex, vertex + l1, vertex + l2])
    back = _reverse_distance(corners, P, faces)
    return TriangleFit(c, n, vertex, legs, best_val, max(best_val, back))


# ---------------------------------------------------------------------------
# uniform distance to the limit map


def _procrustes(A, B, det_sign):
    ca, cb = A.mean(axis=0), B.mean(axis=0)
    U, _, Vt = np.linalg.svd((A - ca).T @ (B - cb))
    D = np.diag([1.0, 1.0, det_sign * np.sign(np.linalg.det(Vt.T @ U.T)) or 1.0])
    R = Vt.T @ D @ U.T
    return R, cb - R @ ca


def limit_map(pattern, pts, lam: float) -> np.ndarray:
    """Right-isosceles cylinder map precomposed with (x, y) -> (2x/lam, y)."""
    pts = np.asarray(pts, dtype=float)
    scaled = np.column_stack([2.0 * np.mod(pts[:, 0], lam) / lam, pts[:, 1]])
    return fold_by_reflections(pattern, scaled)


def uniform_distance_to_limit(embedding: CylinderEmbedding, nx: int = 64, ny: int = 32,
                              refine: bool = True) -> dict:
    lam = embedding.lam
    xs = lam * np.arange(nx) / nx
    ys = np.linspace(0.0, 1.0, ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    grid = np.column_stack([X.ravel(), Y.ravel()])
    A = embedding.eval(grid)
    B = limit_map(embedding.pattern, grid, lam)
    best = None
    for det_sign in (1.0, -1.0):
        R, t = _procrustes(A, B, det_sign)
        A0 = A @ R.T + t
        cb = B.mean(axis=0)

        def moved(p, A0=A0):
            Rl = Rotation.from_rotvec(p[:3]).as_matrix()
            return (A0 - cb) @ Rl.T + cb + p[3:]

        def sup(p):
            return float(np.linalg.norm(moved(p) - B, axis=1).max())

        val, p = sup(np.zeros(6)), np.zeros(6)
        if refine and val > 0:
            # epigraph form: minimize s subject to |moved_i - B_i|^2 <= s for all i
            res = minimize(lambda z: z[6], np.append(p, val ** 2), method="SLSQP",
                           constraints=[{"type": "ineq",
                                         "fun": lambda z: z[6] - ((moved(z[:6]) - B) ** 2).sum(axis=1)}],
                           options={"ftol": 1e-15, "maxiter": 500})
            if sup(res.x[:6]) < val:
                val, p = sup(res.x[:6]), res.x[:6]
        if best is None or val < best[0]:
            best = (val, det_sign)
    return {"distance": best[0], "orientation": "proper" if best[1] > 0 else "reflected",
            "rescaling": f"(x, y) -> (2x/{lam:.12g}, y)"}


# ---------------------------------------------------------------------------
# endgame and bigon


def _angle(u, v):
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < 1e-9 or nv < 1e-9:
        raise ValueError("degenerate vectors in angle computation")
    return float(math.acos(max(-1.0, min(1.0, float(u @ v) / (nu * nv)))))


def endgame_certificate(frame: BalancedPairFrame, embedding: CylinderEmbedding) -> dict:
    theta = _angle(frame.a - frame.c, frame.d - frame.b)
    theta_alt = _angle(frame.a - frame.c, frame.b - frame.d)
    half = 0.5 * embedding.lam
    len_u = float(np.linalg.norm(frame.u_pre[1] - frame.u_pre[0]))
    len_v = float(np.linalg.norm(frame.v_pre[1] - frame.v_pre[0]))
    sides = [abs(half - 1.0), abs(len_u - 1.0), abs(len_v - 1.0)]
    tilt = max(abs(math.atan(s)) for s in frame.slopes)
    return {"theta": theta, "theta_b_minus_d": theta_alt, "theta_defect": abs(theta - math.pi / 2),
            "square_division_defect": max(sides) + tilt, "side_defect": max(sides), "perpendicularity_defect": tilt,
            "slopes": list(frame.slopes)}


def _set_segment_hausdorff(poly, p, q, n: int = 513):
    """Symmetric Hausdorff distance between a polyline and segment pq."""
    P = np.asarray(poly, dtype=float)
    there = float(segment_segment_distance(P, P, p, q).max())
    s = np.linspace(0.0, 1.0, n)[:, None]
    S = p + s * (q - p)
    back = segment_segment_distance(S[:, None], S[:, None], P[None, :-1], P[None, 1:]).min(axis=1)
    return max(there, float(back.max()))


def bigon_certificate(F, G, foliation: BendFoliation, embedding: CylinderEmbedding, hull_cert) -> dict:
    """Second-proof endgame: G hugs the bigon (y, z), F hugs (w, z)."""
    x = np.asarray(hull_cert.x)
    y = np.asarray(hull_cert.y)
    nrm = x - y
    nrm = nrm / np.linalg.norm(nrm)
    depth = (G.samples[:-1] - x) @ nrm
    i = int(np.argmax(depth))
    if depth[i] < -1e-9:
        raise BigonError(f"G misses the halfspace Z (deepest point {depth[i]:.3g} behind x)")
    ps = G.params
    lo, hi = ps[max(i - 1, 0)], ps[min(i + 1, len(ps) - 1)]
    res = minimize_scalar(lambda s: -float((embedding.eval(np.array([s, 0.0])) - x) @ nrm),
                          bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    xz = float(res.x) if -res.fun > depth[i] else float(ps[i])
    z = embedding.eval(np.array([xz, 0.0]))
    xw = foliation.top_of(xz)
    w = embedding.eval(np.array([xw, 1.0]))
    yz = float(np.linalg.norm(y - z))
    wz = float(np.linalg.norm(w - z))
    return {"y": y.tolist(), "z": z.tolist(), "w": w.tolist(),
            "hausdorff_G": _set_segment_hausdorff(G.samples, y, z),
            "hausdorff_F": _set_segment_hausdorff(F.samples, w, z),
            "yz_length_defect": abs(yz - 1.0), "wz_length_defect": abs(wz - 1.0),
            "yz": yz, "wz": wz}


# ---------------------------------------------------------------------------
# verification bundle


@dataclass
class Tolerances:
    gram: float = 1e-8
    linking: float = 0.05
    separation_fraction: float = 0.5
    chain_slack: float = 0.02
    arc_rel: float = 1e-4
    antisymmetry: float = 1e-10
    straightness: float = 1e-8
    bend_length: float = 1e-9
    bigon_length: float = 1e-9


@dataclass
class RunConfig:
    grid_resolution: int = 64
    mesh_resolution: int = 32
    band_columns: int = 24
    loop_samples: int = 1024
    layer_gap: float | None = None
    seed: int = 0
    tolerances: Tolerances = field(default_factory=Tolerances)


def _bend_checks(fol: BendFoliation, per_piece: int = 32):
    ts = fol.sample_parameters(per_piece)
    straight = max(fol.straightness(t) for t in ts)
    length = min(fol.bend_length(t) for t in ts)
    return straight, length, fol.check_disjoint(ts)


class _Stages:
    """Run named certificate stages, recording failures instead of raising."""

    def __init__(self, out):
        self.out = out
        self.checks: dict = {}

    def run(self, name, fn):
        try:
            report, ok, value = fn()
        except (ValueError, RuntimeError) as exc:
            self.out[name] = {"error": f"{type(exc).__name__}: {exc}"}
            self.checks[name] = False
            return None
        self.out[name] = report
        if ok is not None:
            self.checks[name] = bool(ok)
        return value


def verify_embedding(emb: CylinderEmbedding, config: RunConfig | None = None) -> dict:
    """Run every certificate on one embedding; returns a JSON-ready bundle."""
    cfg = config or RunConfig()
    tol = cfg.tolerances
    out: dict = {"schema_version": SCHEMA_VERSION, "pattern": emb.pattern.pattern_id, "epsilon": emb.epsilon,
                 "lambda": emb.lam, "layer_gap": emb.layer_gap, "smoothness_class": emb.smoothness_class}
    st = _Stages(out)

    def isometry():
        iso = isometry_report(emb, cfg.grid_resolution, seed=cfg.seed)
        jd = junction_defects(emb)
        rep = {**iso, "seam_defect": float(jd[7]), "max_junction_defect": float(jd.max())}
        return rep, iso["max_gram_defect"] <= tol.gram and jd.max() <= 1e-9, None

    st.run("isometry", isometry)
    F, G = boundary_loops(emb, cfg.loop_samples)

    def link():
        lk = linking(F, G, seed=cfg.seed)
        ok = abs(abs(lk.gauss_value) - 1) <= tol.linking and round(lk.gauss_value) == lk.crossing_value
        return {"gauss": lk.gauss_value, "crossings": lk.crossing_value}, ok, None

    st.run("linking", link)

    def embedded():
        mesh = triangulate(emb, cfg.mesh_resolution, cfg.band_columns)
        si = self_intersection(mesh)
        ok = (not si.intersects) and emb.layer_gap > 0 \
            and si.min_separation >= tol.separation_fraction * emb.layer_gap
        return {"intersects": si.intersects, "min_separation": si.min_separation,
                "exclusion_radius": si.exclusion_radius, "pairs_tested": si.n_pairs_tested}, ok, None

    st.run("embedded", embedded)

    def bends():
        fol = bend_foliation(emb)
        straight, blen, disjoint = _bend_checks(fol)
        ok = straight <= tol.straightness and blen >= 1 - tol.bend_length and disjoint
        return {"max_chord_deviation": straight, "min_length": blen, "disjoint": disjoint}, ok, fol

    fol = st.run("bends", bends)

    def balanced():
        frame = find_balanced_pair(fol, loops=(F, G))
        rng = np.random.default_rng(cfg.seed)
        tr = rng.uniform(0.0, emb.lam, 100)
        anti = float(np.abs(balance_defect(fol, tr) + balance_defect(fol, tr + 0.5 * emb.lam)).max())
        arc_err = float(np.abs(np.asarray(frame.arc_lengths) - 0.5 * emb.lam).max())
        rep = {"t_star": frame.t_star, "iterations": frame.iterations, "arc_lengths": list(frame.arc_lengths),
               "max_arc_error": arc_err, "antisymmetry": anti, "slopes": list(frame.slopes)}
        return rep, arc_err <= tol.arc_rel * emb.lam and anti <= tol.antisymmetry, frame

    frame = st.run("balanced_pair", balanced) if fol is not None else None

    proj = hb = None
    if frame is not None:
        def projection():
            pc = projection_certificate(emb, frame, (F, G))
            return pc.to_dict(), pc.passed(tol.chain_slack), pc

        proj = st.run("projection", projection)
        def endgame():
            eg = endgame_certificate(frame, emb)
            # near-vertical prebends: |slope| <= tol(eps) = eps
            return eg, max(abs(v) for v in eg["slopes"]) <= emb.epsilon, None

        st.run("endgame", endgame)

    if fol is not None:
        def hull():
            c = hull_bound_certificate(F, G, fol, emb)
            return c.to_dict(), c.passed, c

        hb = st.run("hull_bound", hull)
    if hb is not None:
        def bigon():
            bg = bigon_certificate(F, G, fol, emb, hb)
            return bg, bg["yz"] >= 1 - tol.bigon_length and bg["wz"] >= 1 - tol.bigon_length, None

        st.run("bigon", bigon)
    if proj is not None and hb is not None:
        # the two proofs' crossing points, compared in the projection plane
        xh = np.asarray(hb.x) @ proj.basis.T
        out["cross_proof_distance"] = float(np.linalg.norm(xh - np.asarray(proj.x)))

    for name in ("balanced_pair", "projection", "endgame", "hull_bound", "bigon"):
        st.checks.setdefault(name, False)
    out["checks"] = {k: bool(v) for k, v in st.checks.items()}
    out["pass"] = all(st.checks.values())
    return out


# ---------------------------------------------------------------------------
# convergence records and sweeps


@dataclass(frozen=True)
class ConvergenceRecord:
    epsilon: float
    pattern_id: str
    hausdorff_to_triangle: float
    uniform_map_distance: float
    theta_defect: float
    square_division_defect: float
    bigon_hausdorff_G: float
    bigon_hausdorff_F: float
    bigon_length_defect: float
    c1_plus_c2: float
    cross_proof_distance: float
    linking: int

    @property
    def bigon_defects(self) -> dict:
        return {"hausdorff_G": self.bigon_hausdorff_G, "hausdorff_F": self.bigon_hausdorff_F,
                "length": self.bigon_length_defect}


METRICS = ("hausdorff_to_triangle", "uniform_map_distance", "theta_defect", "square_division_defect",
           "bigon_hausdorff_G", "bigon_hausdorff_F", "bigon_length_defect", "cross_proof_distance")


def _linking_or_zero(F, G, seed):
    """Crossing linking number, or 0 when the loops touch (degenerate limit)."""
    try:
        return linking_number_crossings(F, G, seed=seed) if loop_distance(F, G) > 1e-6 else 0
    except LinkingError:
        return 0


def _metric_bundle(emb: CylinderEmbedding, cfg: RunConfig) -> dict:
    """The certificate values ``measure`` needs, without the pass/fail checks."""
    F, G = boundary_loops(emb, cfg.loop_samples)
    fol = bend_foliation(emb)
    frame = find_balanced_pair(fol, loops=(F, G))
    proj = projection_certificate(emb, frame, (F, G))
    hb = hull_bound_certificate(F, G, fol, emb)
    xh = np.asarray(hb.x) @ proj.basis.T
    return {"bigon": bigon_certificate(F, G, fol, emb, hb), "endgame": endgame_certificate(frame, emb),
            "projection": proj.to_dict(), "cross_proof_distance": float(np.linalg.norm(xh - np.asarray(proj.x))),
            "linking": {"crossings": _linking_or_zero(F, G, cfg.seed)}}


def measure(emb: CylinderEmbedding, bundle: dict | None = None, config: RunConfig | None = None) -> ConvergenceRecord:
    cfg = config or RunConfig()
    if bundle is None:
        bundle = _metric_bundle(emb, cfg)
    mesh = triangulate(emb, cfg.mesh_resolution, cfg.band_columns)
    fit = fit_right_isosceles(mesh.vertices, mesh.faces)
    ud = uniform_distance_to_limit(emb)
    bg = bundle["bigon"]
    eg = bundle["endgame"]
    return ConvergenceRecord(emb.epsilon, emb.pattern.pattern_id, fit.hausdorff, ud["distance"],
                             eg["theta_defect"], eg["square_division_defect"], bg["hausdorff_G"],
                             bg["hausdorff_F"], max(bg["yz_length_defect"], bg["wz_length_defect"]),
                             bundle["projection"]["chain"]["c1_plus_c2"], bundle["cross_proof_distance"],
                             int(bundle["linking"]["crossings"]))


def run(pattern_id: str, epsilon: float, config: RunConfig | None = None):
    """Build, verify and measure one (pattern, epsilon)."""
    cfg = config or RunConfig()
    emb = build(pattern_catalog(pattern_id), epsilon, layer_gap=cfg.layer_gap)
    bundle = verify_embedding(emb, cfg)
    return emb, bundle, measure(emb, bundle, cfg)


def sweep(pattern_id: str, epsilons=DEFAULT_EPSILONS, config: RunConfig | None = None,
          bundles: dict | None = None) -> list:
    eps = [float(e) for e in epsilons]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be strictly decreasing")
    if any(not 0 < e <= 0.5 for e in eps):
        raise ValueError("each epsilon must lie in (0, 0.5]")
    records = []
    for e in eps:
        _, bundle, rec = run(pattern_id, e, config)
        if not bundle["pass"]:
            failed = [k for k, v in bundle["checks"].items() if not v]
            raise VerificationError(f"verification failed for {pattern_id} at epsilon={e}: {', '.join(failed)}")
        if bundles is not None:
            bundles[(pattern_id, e)] = bundle
        records.append(rec)
    return records


def monotonicity(records, slack: float = 0.1) -> dict:
    """Per metric: nonincreasing within ``slack`` per step, and last < first / 2."""
    out = {}
    for m in METRICS:
        vals = [getattr(r, m) for r in records]
        steps = all(b <= a * (1 + slack) + 1e-12 for a, b in zip(vals, vals[1:]))
        halved = len(vals) < 2 or vals[-1] < 0.5 * vals[0] or vals[0] <= 1e-12
        out[m] = {"values": vals, "nonincreasing": bool(steps), "halved": bool(halved)}
    return out


def fitted_exponent(records, metric: str = "uniform_map_distance"):
    """Least-squares slope of log(metric) against log(epsilon); informational only."""
    e = np.array([r.epsilon for r in records])
    v = np.array([getattr(r, metric) for r in records])
    if len(e) < 2 or np.any(v <= 0):
        return None
    return float(np.polyfit(np.log(e), np.log(v), 1)[0])


def records_csv(records) -> str:
    buf = io.StringIO()
    names = list(ConvergenceRecord.__dataclass_fields__)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in records:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in (getattr(r, n) for n in names)])
    return buf.getvalue()


def sweep_summary(records_by_pattern: dict) -> str:
    out = {"schema_version": SCHEMA_VERSION, "patterns": {}}
    for pid, recs in records_by_pattern.items():
        out["patterns"][pid] = {"records": [asdict(r) for r in recs], "monotonicity": monotonicity(recs),
                                "fitted_exponent_uniform": fitted_exponent(recs)}
    return json.dumps(out, indent=2, sort_keys=True)
