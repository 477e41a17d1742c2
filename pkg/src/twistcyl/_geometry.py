"""Small vectorized geometry kernels shared by the modules.

All functions accept stacked inputs (leading axis = batch) and never loop
in Python over the batch.
"""

from __future__ import annotations

import numpy as np


def reflection(q, n):
    """Affine reflection across the line through ``q`` with normal ``n``.

    Returns ``(M, o)`` so that the map is ``p -> M @ p + o``.
    """
    q = np.asarray(q, dtype=float)
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    M = np.eye(2) - 2.0 * np.outer(n, n)
    o = 2.0 * np.dot(q, n) * n
    return M, o


def compose(f, g):
    """Affine composition ``f o g`` for ``(M, o)`` pairs."""
    Mf, of = f
    Mg, og = g
    return Mf @ Mg, Mf @ og + of


def apply_affine(f, p):
    M, o = f
    p = np.asarray(p, dtype=float)
    return p @ M.T + o


def polyline_length(points) -> float:
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(points, axis=0), axis=1).sum())


def _clip01(x):
    return np.clip(x, 0.0, 1.0)


def segment_segment_closest(p1, q1, p2, q2):
    """Closest-point parameters ``(s, t, dist)`` of segments ``p1q1``, ``p2q2``.

    After Ericson, Real-Time Collision Detection, section 5.1.9, with the
    degenerate cases handled by masks. Batched over leading axes, any dim.
    """
    p1, q1, p2, q2 = (np.asarray(a, dtype=float) for a in (p1, q1, p2, q2))
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.einsum("...i,...i->...", d1, d1)
    e = np.einsum("...i,...i->...", d2, d2)
    f = np.einsum("...i,...i->...", d2, r)
    c = np.einsum("...i,...i->...", d1, r)
    b = np.einsum("...i,...i->...", d1, d2)
    eps = 1e-300
    denom = a * e - b * b

    s = np.where(denom > 1e-14 * np.maximum(a * e, eps),
                 _clip01((b * f - c * e) / np.where(denom > 0, denom, 1.0)), 0.0)
    t = (b * s + f) / np.where(e > eps, e, 1.0)
    # t outside [0,1]: clamp and recompute s
    s = np.where(t < 0.0, _clip01(-c / np.where(a > eps, a, 1.0)), s)
    s = np.where(t > 1.0, _clip01((b - c) / np.where(a > eps, a, 1.0)), s)
    t = _clip01(t)
    # degenerate segments
    a_small = a <= eps
    e_small = e <= eps
    s = np.where(a_small, 0.0, s)
    t = np.where(a_small & ~e_small, _clip01(f / np.where(e > eps, e, 1.0)), t)
    s = np.where(e_small & ~a_small, _clip01(-c / np.where(a > eps, a, 1.0)), s)
    t = np.where(e_small, 0.0, t)
    c1 = p1 + d1 * s[..., None]
    c2 = p2 + d2 * t[..., None]
    return s, t, np.linalg.norm(c1 - c2, axis=-1)


def segment_segment_distance(p1, q1, p2, q2):
    """Distance between segments ``p1q1`` and ``p2q2`` (batched, any dim)."""
    return segment_segment_closest(p1, q1, p2, q2)[2]


def point_triangle_closest(p, a, b, c):
    """Closest point on triangle ``abc`` to ``p`` (batched, 3D).

    Voronoi-region walk from Ericson, section 5.1.5.
    """
    p, a, b, c = (np.asarray(x, dtype=float) for x in (p, a, b, c))
    p, a, b, c = np.broadcast_arrays(p, a, b, c)
    ab = b - a
    ac = c - a
    ap = p - a
    dot = lambda u, v: np.einsum("...i,...i->...", u, v)  # noqa: E731
    d1 = dot(ab, ap)
    d2 = dot(ac, ap)
    bp = p - b
    d3 = dot(ab, bp)
    d4 = dot(ac, bp)
    cp = p - c
    d5 = dot(ab, cp)
    d6 = dot(ac, cp)

    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    out = np.empty_like(p)
    done = np.zeros(p.shape[:-1], dtype=bool)

    def put(mask, val):
        nonlocal done
        m = mask & ~done
        out[m] = val[m]
        done = done | m

    put((d1 <= 0) & (d2 <= 0), a)
    put((d3 >= 0) & (d4 <= d3), b)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = d1 / (d1 - d3)
        put((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + ab * v[..., None])
        put((d6 >= 0) & (d5 <= d6), c)
        w = d2 / (d2 - d6)
        put((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + ac * w[..., None])
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        put((va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0), b + (c - b) * w[..., None])
        denom = va + vb + vc
        denom = np.where(denom == 0, 1.0, denom)
        v = vb / denom
        w = vc / denom
    put(np.ones_like(done), a + ab * v[..., None] + ac * w[..., None])
    return out


def point_triangle_distance(p, a, b, c):
    q = point_triangle_closest(p, a, b, c)
    return np.linalg.norm(np.asarray(p, dtype=float) - q, axis=-1)


def segment_hits_triangle(p, q, a, b, c, tol=0.0):
    """True where segment ``pq`` crosses triangle ``abc`` (Moller-Trumbore)."""
    p, q, a, b, c = (np.asarray(x, dtype=float) for x in (p, q, a, b, c))
    d = q - p
    e1 = b - a
    e2 = c - a
    h = np.cross(d, e2)
    det = np.einsum("...i,...i->...", e1, h)
    ok = np.abs(det) > 1e-18
    inv = 1.0 / np.where(ok, det, 1.0)
    s = p - a
    u = np.einsum("...i,...i->...", s, h) * inv
    qv = np.cross(s, e1)
    v = np.einsum("...i,...i->...", d, qv) * inv
    t = np.einsum("...i,...i->...", e2, qv) * inv
    return ok & (u >= -tol) & (v >= -tol) & (u + v <= 1 + tol) & (t >= -tol) & (t <= 1 + tol)


def triangle_triangle_distance(T, S):
    """Distance between triangles ``T`` and ``S`` (arrays ``(..., 3, 3)``).

    Zero when they intersect. The minimum over vertex-face and edge-edge
    pairs is exact for disjoint triangles; crossings are detected with
    edge-face ray tests.
    """
    T = np.asarray(T, dtype=float)
    S = np.asarray(S, dtype=float)
    best = None
    for i in range(3):
        d = point_triangle_distance(T[..., i, :], S[..., 0, :], S[..., 1, :], S[..., 2, :])
        best = d if best is None else np.minimum(best, d)
        d = point_triangle_distance(S[..., i, :], T[..., 0, :], T[..., 1, :], T[..., 2, :])
        best = np.minimum(best, d)
    for i in range(3):
        for j in range(3):
            d = segment_segment_distance(T[..., i, :], T[..., (i + 1) % 3, :],
                                         S[..., j, :], S[..., (j + 1) % 3, :])
            best = np.minimum(best, d)
    hit = np.zeros(best.shape, dtype=bool)
    for i in range(3):
        hit |= segment_hits_triangle(T[..., i, :], T[..., (i + 1) % 3, :],
                                     S[..., 0, :], S[..., 1, :], S[..., 2, :])
        hit |= segment_hits_triangle(S[..., i, :], S[..., (i + 1) % 3, :],
                                     T[..., 0, :], T[..., 1, :], T[..., 2, :])
    return np.where(hit, 0.0, best)


def segment_intersection_2d(p1, q1, p2, q2, tol=1e-9):
    """Intersection parameters of 2D segments, batched.

    Returns ``(hit, s, t)`` where the intersection point is
    ``p1 + s (q1 - p1)``. Near-touching pairs (distance <= tol) count as
    hits; ``s``/``t`` are then the closest-point parameters.
    """
    p1, q1, p2, q2 = (np.asarray(a, dtype=float) for a in (p1, q1, p2, q2))
    d1 = q1 - p1
    d2 = q2 - p2
    cross = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
    r = p2 - p1
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (r[..., 0] * d2[..., 1] - r[..., 1] * d2[..., 0]) / cross
        t = (r[..., 0] * d1[..., 1] - r[..., 1] * d1[..., 0]) / cross
    proper = (np.abs(cross) > 1e-300) & (s >= 0) & (s <= 1) & (t >= 0) & (t <= 1)
    s_near, t_near, dist = segment_segment_closest(p1, q1, p2, q2)
    near = dist <= tol
    s = np.where(proper, s, s_near)
    t = np.where(proper, t, t_near)
    return proper | near, s, t


def kabsch(A, B, allow_reflection=False):
    """Rigid motion ``(R, t)`` minimizing ``sum |R a + t - b|^2``.

    With ``allow_reflection`` the best orthogonal map (det = +-1) is
    returned instead of the best rotation.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    ca = A.mean(axis=0)
    cb = B.mean(axis=0)
    H = (A - ca).T @ (B - cb)
    U, _, Vt = np.linalg.svd(H)
    V = Vt.T
    if allow_reflection:
        R = V @ U.T
    else:
        d = np.sign(np.linalg.det(V @ U.T)) or 1.0
        R = V @ np.diag([1.0] * (A.shape[1] - 1) + [d]) @ U.T
    t = cb - R @ ca
    return R, t


def pairwise_max_distance(P, chunk=2048) -> float:
    """Exact diameter of a finite point set by chunked pairwise max."""
    P = np.asarray(P, dtype=float)
    if len(P) < 2:
        return 0.0
    best = 0.0
    for i in range(0, len(P), chunk):
        block = P[i:i + chunk]
        d2 = ((block[:, None, :] - P[None, :, :]) ** 2).sum(-1)
        best = max(best, float(d2.max()))
    return float(np.sqrt(best))
