"""Flat cylinders, the folding-pattern catalog and the planar bigon check.

A pattern is four right isosceles triangles (legs 1) listed in strip
order along ``[0, 2] x [0, 1]``. Crease ``k`` is the edge shared by
triangle ``k`` and triangle ``k + 1`` (indices mod 4; the last crease is
the taped seam edge at ``x = 2``). ``stack_order[k]`` is the position of
triangle ``k`` in the folded stack, counted from the bottom starting at 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._geometry import apply_affine, compose, polyline_length, reflection, segment_intersection_2d

PATTERN_IDS = ("P1", "P2", "P1m", "P2m")
MAX_EPSILON = 0.5


class PatternError(ValueError):
    pass


class BandCollisionError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class FlatCylinder:
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"aspect ratio must be positive, got {self.lam}")

    def wrap(self, x):
        return np.mod(x, self.lam)

    def distance(self, p, q):
        """Intrinsic distance on the flat cylinder (seam-aware)."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        dx = np.abs(p[..., 0] - q[..., 0]) % self.lam
        dx = np.minimum(dx, self.lam - dx)
        dy = p[..., 1] - q[..., 1]
        return np.hypot(dx, dy)


@dataclass(frozen=True)
class Crease:
    p0: tuple  # end on y = 0
    p1: tuple  # end on y = 1
    sign: str  # "mountain" | "valley"

    @property
    def direction(self) -> np.ndarray:
        d = np.subtract(self.p1, self.p0).astype(float)
        return d / np.linalg.norm(d)

    @property
    def normal(self) -> np.ndarray:
        """Unit normal pointing toward increasing x."""
        d = self.direction
        return np.array([d[1], -d[0]])

    @property
    def angle(self) -> float:
        """Angle to the strip axis, in (0, pi)."""
        d = self.direction
        return math.atan2(d[1], d[0])


@dataclass(frozen=True)
class CreasePattern:
    pattern_id: str
    triangles: tuple
    creases: tuple
    stack_order: tuple
    lam: float = 2.0

    @property
    def layers(self) -> tuple:
        """Height rank (0 = bottom) of each triangle in strip order."""
        return tuple(k - 1 for k in self.stack_order)

    @property
    def puncture_order(self) -> tuple:
        """Strip indices (1-based) of the faces a needle meets from below."""
        return tuple(int(i) + 1 for i in np.argsort(self.layers))

    def fold_maps(self) -> list:
        """Planar isometry of each triangle: triangle 0 fixed, then reflect."""
        maps = [(np.eye(2), np.zeros(2))]
        for k in range(3):
            c = self.creases[k]
            maps.append(compose(maps[-1], reflection(c.p0, c.normal)))
        return maps

    def to_json(self) -> str:
        return json.dumps(pattern_to_dict(self), indent=2)


def pattern_to_dict(pattern: CreasePattern) -> dict:
    return {
        "pattern_id": pattern.pattern_id,
        "creases": [{"p0": list(c.p0), "p1": list(c.p1), "sign": c.sign} for c in pattern.creases],
        "triangles": [[list(v) for v in tri] for tri in pattern.triangles],
        "stack_order": list(pattern.stack_order),
    }


def pattern_from_json(text: str) -> CreasePattern:
    data = json.loads(text) if isinstance(text, str) else text
    triangles = tuple(tuple(tuple(float(c) for c in v) for v in tri) for tri in data["triangles"])
    built = _build_pattern(data["pattern_id"], triangles, tuple(int(k) for k in data["stack_order"]))
    given = data.get("creases")
    if given is not None:
        for c_given, c_built in zip(given, built.creases):
            same = np.allclose(c_given["p0"], c_built.p0) and np.allclose(c_given["p1"], c_built.p1)
            if not same or c_given["sign"] != c_built.sign:
                raise PatternError(f"crease {c_given} inconsistent with triangles/stack order")
    return built


# P1 layout. Only pictures of the patterns exist; these coordinates are the
# layout whose fold closes up over the seam and whose boundary links.
_P1_TRIANGLES = (
    ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)),
    ((1.0, 0.0), (1.0, 1.0), (0.0, 1.0)),
    ((1.0, 0.0), (2.0, 1.0), (1.0, 1.0)),
    ((1.0, 0.0), (2.0, 0.0), (2.0, 1.0)),
)

_STACKS = {"P1": (1, 2, 4, 3), "P2": (2, 1, 3, 4)}


def _mirror(triangles):
    return tuple(tuple((x, 1.0 - y) for x, y in tri) for tri in triangles)


def _shared_edge(tri_a, tri_b):
    a = [tuple(np.round(v, 12)) for v in tri_a]
    b = [tuple(np.round(v, 12)) for v in tri_b]
    common = [v for v in a if v in b]
    return common


def _crease_sign(fold_map, layer_here, layer_next) -> str:
    # the front face of this triangle points along det(M) * e_z
    front_up = np.linalg.det(fold_map[0]) > 0
    goes_up = layer_next > layer_here
    return "valley" if front_up == goes_up else "mountain"


def _build_pattern(pattern_id, triangles, stack_order) -> CreasePattern:
    validate_tiling(triangles)
    if sorted(stack_order) != [1, 2, 3, 4]:
        raise PatternError(f"stack_order must be a permutation of 1..4, got {stack_order}")
    creases = []
    for k in range(4):
        nxt = triangles[(k + 1) % 4]
        if k == 3:
            nxt = tuple((x + 2.0, y) for x, y in nxt)
        common = _shared_edge(triangles[k], nxt)
        if len(common) != 2:
            raise PatternError(f"triangles {k} and {(k + 1) % 4} do not share an edge")
        p0, p1 = sorted(common, key=lambda v: v[1])
        if not (abs(p0[1]) < 1e-12 and abs(p1[1] - 1.0) < 1e-12):
            raise PatternError("creases must run from y = 0 to y = 1")
        creases.append(Crease(tuple(float(c) for c in p0), tuple(float(c) for c in p1), "valley"))
    draft = CreasePattern(pattern_id, tuple(triangles), tuple(creases), tuple(stack_order))
    maps = draft.fold_maps()
    layers = draft.layers
    signed = tuple(
        Crease(c.p0, c.p1, _crease_sign(maps[k], layers[k], layers[(k + 1) % 4]))
        for k, c in enumerate(creases)
    )
    pattern = CreasePattern(pattern_id, tuple(triangles), signed, tuple(stack_order))
    _check_closure(pattern)
    return pattern


def validate_tiling(triangles) -> None:
    """Four right isosceles triangles with unit legs tiling [0,2]x[0,1]."""
    if len(triangles) != 4:
        raise PatternError("a pattern has exactly four triangles")
    total = Fraction(0)
    for tri in triangles:
        v = np.asarray(tri, dtype=float)
        legs = sorted(np.linalg.norm(v[[1, 2, 0]] - v, axis=1))
        if not (abs(legs[0] - 1) < 1e-12 and abs(legs[1] - 1) < 1e-12 and abs(legs[2] - math.sqrt(2)) < 1e-12):
            raise PatternError(f"triangle {tri} is not right isosceles with unit legs")
        fr = [(Fraction(x).limit_denominator(10**6), Fraction(y).limit_denominator(10**6)) for x, y in tri]
        (x0, y0), (x1, y1), (x2, y2) = fr
        total += abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)) / 2
    if total != 2:
        raise PatternError(f"triangle areas sum to {total}, expected 2")
    # interiors disjoint: centroids of each triangle lie in no other triangle
    for i, tri in enumerate(triangles):
        cen = np.mean(tri, axis=0)
        for j, other in enumerate(triangles):
            if i != j and _inside(np.asarray(other), cen[None, :], tol=-1e-9)[0]:
                raise PatternError(f"triangles {i} and {j} overlap")


def _check_closure(pattern: CreasePattern) -> None:
    maps = pattern.fold_maps()
    last = compose(maps[3], reflection(pattern.creases[3].p0, pattern.creases[3].normal))
    # going once around must bring the fold back to triangle 0 shifted by lam
    if not (np.allclose(last[0], np.eye(2)) and np.allclose(apply_affine(last, [pattern.lam, 0.0]), [0, 0])):
        raise PatternError("fold does not close up across the seam")


def _inside(tri, pts, tol=1e-12):
    a, b, c = tri
    v0, v1 = b - a, c - a
    d = pts - a
    den = v0[0] * v1[1] - v0[1] * v1[0]
    u = (d[:, 0] * v1[1] - d[:, 1] * v1[0]) / den
    v = (v0[0] * d[:, 1] - v0[1] * d[:, 0]) / den
    return (u >= -tol) & (v >= -tol) & (u + v <= 1 + tol)


def pattern_catalog(pattern_id: str) -> CreasePattern:
    if pattern_id not in PATTERN_IDS:
        raise PatternError(f"unknown pattern_id {pattern_id!r}; expected one of {PATTERN_IDS}")
    base = pattern_id.rstrip("m")
    triangles = _P1_TRIANGLES
    if pattern_id.endswith("m"):
        triangles = _mirror(triangles)
    return _build_pattern(pattern_id, triangles, _STACKS[base])


def locate_triangle(pattern: CreasePattern, pts) -> np.ndarray:
    """Index of the triangle containing each point (x taken mod lam)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float)).copy()
    pts[:, 0] = np.mod(pts[:, 0], pattern.lam)
    idx = np.full(len(pts), -1)
    for k, tri in enumerate(pattern.triangles):
        tri = np.asarray(tri)
        for shift in (0.0, pattern.lam):
            hit = (idx < 0) & _inside(tri, pts + [shift, 0.0], tol=1e-12)
            idx[hit] = k
    if np.any(idx < 0):
        raise PatternError("point outside the flat cylinder")
    return idx


def fold_by_reflections(pattern: CreasePattern, p) -> np.ndarray:
    """Right-isosceles cylinder map for ``pattern``: domain -> z = 0 plane."""
    p = np.asarray(p, dtype=float)
    pts = np.atleast_2d(p)
    maps = pattern.fold_maps()
    idx = locate_triangle(pattern, pts)
    wrapped = pts.copy()
    wrapped[:, 0] = np.mod(wrapped[:, 0], pattern.lam)
    out = np.zeros((len(pts), 3))
    for k in range(4):
        m = idx == k
        if not np.any(m):
            continue
        q = wrapped[m]
        tri = np.asarray(pattern.triangles[k])
        # points reported at x ~ 0 may belong to a triangle drawn near x = lam
        moved = ~_inside(tri, q, tol=1e-12)
        q[moved, 0] += pattern.lam
        out[m, :2] = apply_affine(maps[k], q)
    return out[0] if p.ndim == 1 else out


# ---------------------------------------------------------------------------
# thickening


@dataclass(frozen=True)
class ThickenedPattern:
    base: CreasePattern
    epsilon: float
    band_widths: tuple  # perpendicular width per crease
    axial_widths: tuple  # axial length consumed per crease
    offsets: tuple  # x-translation applied to each triangle
    domain: FlatCylinder = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "domain", FlatCylinder(2.0 + self.epsilon))

    @property
    def lam(self) -> float:
        return self.domain.lam

    def boundaries(self) -> tuple:
        """Bottom/top x of the 9 piece-separating segments (last = first + lam).

        Piece ``2k`` is triangle ``k``, piece ``2k + 1`` is band ``k``.
        """
        creases = self.base.creases
        xb, xt = [], []
        for k in range(4):
            prev = creases[k - 1]
            shift_prev = self.offsets[k] - (2.0 if k == 0 else 0.0)
            xb.append(prev.p0[0] + shift_prev)
            xt.append(prev.p1[0] + shift_prev)
            c = creases[k]
            xb.append(c.p0[0] + self.offsets[k])
            xt.append(c.p1[0] + self.offsets[k])
        xb.append(xb[0] + self.lam)
        xt.append(xt[0] + self.lam)
        return np.array(xb), np.array(xt)

    def flat_regions(self) -> list:
        return [tuple((x + self.offsets[k], y) for x, y in tri) for k, tri in enumerate(self.base.triangles)]

    def fold_bands(self) -> list:
        """Corner lists of each band parallelogram."""
        xb, xt = self.boundaries()
        return [((xb[2 * k + 1], 0.0), (xb[2 * k + 2], 0.0), (xt[2 * k + 2], 1.0), (xt[2 * k + 1], 1.0))
                for k in range(4)]

    def band_frame(self, k: int):
        """Origin on the band's left edge (y = 0), unit normal, unit direction."""
        c = self.base.creases[k]
        origin = np.array([c.p0[0] + self.offsets[k], 0.0])
        return origin, c.normal, c.direction

    def piece_maps(self) -> list:
        """Planar isometry of each flat piece: reflect across band centerlines."""
        maps = [(np.eye(2), np.zeros(2))]
        for k in range(3):
            origin, n, _ = self.band_frame(k)
            center = origin + 0.5 * self.band_widths[k] * n
            maps.append(compose(maps[-1], reflection(center, n)))
        return maps

    def closure_defect(self) -> float:
        maps = self.piece_maps()
        origin, n, _ = self.band_frame(3)
        center = origin + 0.5 * self.band_widths[3] * n
        last = compose(maps[3], reflection(center, n))
        probe = np.array([[0.0, 0.0], [0.3, 0.7], [1.0, 0.0]])
        return float(np.abs(apply_affine(last, probe + [self.lam, 0.0]) - probe).max()
                     + np.abs(last[0] - np.eye(2)).max())

    def axial_length(self) -> float:
        return 2.0 + float(sum(self.axial_widths))


def thicken(pattern: CreasePattern, epsilon: float, widths="equal") -> ThickenedPattern:
    """Replace each crease by a band, growing the strip to length 2 + epsilon.

    ``widths`` is ``"equal"`` (same perpendicular width on every crease),
    ``"proportional"`` (width proportional to the number of layers the fold
    spans) or an explicit sequence of four positive weights.
    """
    if not epsilon >= 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    if epsilon > MAX_EPSILON:
        raise BandCollisionError(
            f"bands collide: epsilon={epsilon} exceeds the supported thickening range (0, {MAX_EPSILON}]")
    sines = np.array([abs(math.sin(c.angle)) for c in pattern.creases])
    if isinstance(widths, str):
        if widths == "equal":
            weights = np.ones(4)
        elif widths == "proportional":
            layers = pattern.layers
            weights = np.array([abs(layers[(k + 1) % 4] - layers[k]) for k in range(4)], dtype=float)
        else:
            raise ValueError(f"unknown width rule {widths!r}")
    else:
        weights = np.asarray(widths, dtype=float)
        if weights.shape != (4,) or np.any(weights <= 0):
            raise ValueError("explicit widths need four positive weights")
    # perpendicular width w_k = scale * weight_k; axial use w_k / sin(alpha_k)
    scale = epsilon / float(np.sum(weights / sines)) if epsilon > 0 else 0.0
    band = weights * scale
    axial = band / sines
    offsets = np.concatenate([[0.0], np.cumsum(axial)[:3]])
    tp = ThickenedPattern(pattern, float(epsilon), tuple(float(w) for w in band),
                          tuple(float(a) for a in axial), tuple(float(o) for o in offsets))
    xb, xt = tp.boundaries()
    if np.any(np.diff(xb) < -1e-12) or np.any(np.diff(xt) < -1e-12):
        raise BandCollisionError("bands collide: band footprints overlap in the domain")
    if tp.closure_defect() > 1e-9:
        raise PatternError("width allocation breaks closure of the fold across the seam")
    return tp


# ---------------------------------------------------------------------------
# planar bigon inequality


@dataclass(frozen=True)
class LineCertificate:
    x: tuple
    len_A: float
    len_B: float
    len_C1A: float
    len_C1B: float
    len_C2A: float
    len_C2B: float
    holds: bool

    @property
    def total(self) -> float:
        return self.len_C1A + self.len_C1B + self.len_C2A + self.len_C2B


def _first_crossing(C1, C2, tol):
    """First point of C1 (in arc order) that lies on C2."""
    if len(C1) == 1 or len(C2) == 1:
        pt_poly, other = (C1, C2) if len(C1) == 1 else (C2, C1)
        p = pt_poly[0]
        if len(other) == 1:
            ok = np.linalg.norm(other[0] - p) <= tol
            return (0, 0.0, 0, 0.0) if ok else None
        hit, s, t = segment_intersection_2d(other[:-1], other[1:], p[None, :], p[None, :], tol=tol)
        idx = np.flatnonzero(hit)
        if len(idx) == 0:
            return None
        j = idx[0]
        if len(C1) == 1:
            return 0, 0.0, j, float(s[j])
        return j, float(s[j]), 0, 0.0
    a0, a1 = C1[:-1], C1[1:]
    b0, b1 = C2[:-1], C2[1:]
    hit, s, t = segment_intersection_2d(a0[:, None, :], a1[:, None, :], b0[None, :, :], b1[None, :, :], tol=tol)
    if not hit.any():
        return None
    ii, jj = np.nonzero(hit)
    order = np.lexsort((s[ii, jj], ii))
    i, j = ii[order[0]], jj[order[0]]
    return int(i), float(s[i, j]), int(j), float(t[i, j])


def _split(C, seg, param):
    if len(C) == 1:
        return C[:1], C[:1]
    x = C[seg] + param * (C[seg + 1] - C[seg])
    head = np.vstack([C[: seg + 1], x])
    tail = np.vstack([x, C[seg + 1:]])
    return head, tail


def lemma_line_check(A, B, C1, C2, tol: float = 1e-9) -> LineCertificate:
    """Check l(C1) + l(C2) >= l(A) + l(B) >= 2 through a crossing point.

    ``C1`` runs from an endpoint of ``A`` to an endpoint of ``B``; ``C2``
    joins the other two endpoints. Segment endpoint order is inferred.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    C1 = np.atleast_2d(np.asarray(C1, dtype=float))
    C2 = np.atleast_2d(np.asarray(C2, dtype=float))
    la, lb = float(np.linalg.norm(A[1] - A[0])), float(np.linalg.norm(B[1] - B[0]))
    if la < 1 - tol or lb < 1 - tol:
        raise PreconditionError(f"segments must have length >= 1 (got {la:.6g}, {lb:.6g})")
    ends_ok = (
        min(np.linalg.norm(C1[0] - A[0]), np.linalg.norm(C1[0] - A[1])) <= tol
        and min(np.linalg.norm(C1[-1] - B[0]), np.linalg.norm(C1[-1] - B[1])) <= tol
        and min(np.linalg.norm(C2[0] - A[0]), np.linalg.norm(C2[0] - A[1])) <= tol
        and min(np.linalg.norm(C2[-1] - B[0]), np.linalg.norm(C2[-1] - B[1])) <= tol
    )
    if not ends_ok:
        raise PreconditionError("C1 and C2 must each join an endpoint of A to an endpoint of B")
    found = _first_crossing(C1, C2, tol)
    if found is None:
        raise PreconditionError("C1 and C2 do not intersect; lemma hypothesis violated")
    i, s, j, t = found
    C1A, C1B = _split(C1, i, s)
    C2A, C2B = _split(C2, j, t)
    x = C1A[-1]
    l1a, l1b = polyline_length(C1A), polyline_length(C1B)
    l2a, l2b = polyline_length(C2A), polyline_length(C2B)
    holds = (l1a + l2a >= la - tol) and (l1b + l2b >= lb - tol) and (la + lb >= 2 - tol) \
        and (l1a + l1b + l2a + l2b >= 2 - tol)
    return LineCertificate((float(x[0]), float(x[1])), la, lb, l1a, l1b, l2a, l2b, bool(holds))


def random_line_instance(rng: np.random.Generator, n_way: int = 3):
    """Random valid input for lemma_line_check: unit+ segments, crossing arcs."""
    def seg():
        p = rng.uniform(-2, 2, 2)
        ang = rng.uniform(0, 2 * np.pi)
        length = 1.0 + rng.exponential(0.5)
        return np.array([p, p + length * np.array([np.cos(ang), np.sin(ang)])])

    A, B = seg(), seg()
    x = rng.uniform(-2, 2, 2)

    def arc(start, end):
        w1 = rng.uniform(-3, 3, (rng.integers(0, n_way + 1), 2))
        w2 = rng.uniform(-3, 3, (rng.integers(0, n_way + 1), 2))
        return np.vstack([start, w1, x, w2, end])

    return A, B, arc(A[0], B[0]), arc(A[1], B[1])


def lemma_line_fuzz(trials: int, seed: int, tol: float = 1e-9) -> dict:
    rng = np.random.default_rng(seed)
    violations = 0
    worst = math.inf
    for _ in range(trials):
        A, B, C1, C2 = random_line_instance(rng)
        cert = lemma_line_check(A, B, C1, C2, tol=tol)
        worst = min(worst, cert.total - 2.0)
        violations += not cert.holds
    return {"trials": trials, "violations": violations, "min_slack": None if trials == 0 else worst}


def check_pattern_invariants(pattern: CreasePattern) -> None:
    validate_tiling(pattern.triangles)
    for k, c in enumerate(pattern.creases):
        owners = [i for i, tri in enumerate(pattern.triangles)
                  for sh in (0.0, 2.0)
                  if len(_shared_edge(tuple((x + sh, y) for x, y in tri), (c.p0, c.p1))) == 2]
        if len(owners) != 2:
            raise PatternError(f"crease {k} is not shared by exactly two triangles")
