"""Bend foliation, the slope balance function and the projection chain."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._geometry import polyline_length
from .flat_domain import LineCertificate, PreconditionError, lemma_line_check
from .pseudofold import bisect


class FoliationError(ValueError):
    pass


class BalanceError(RuntimeError):
    pass


class ProjectionError(RuntimeError):
    pass


class BendFoliation:
    """Prebends indexed by their midline crossing ``t`` (mod lambda).

    Between two consecutive piece boundaries both prebend endpoints move
    linearly, so inside a band the prebends are its rulings and across a
    flat piece they fan between the two bounding rulings.
    """

    def __init__(self, embedding):
        self.embedding = embedding
        self.lam = embedding.lam
        xb, xt = embedding.boundaries()
        if np.any(np.diff(xb) < -1e-12) or np.any(np.diff(xt) < -1e-12):
            raise FoliationError("foliation degenerates: piece boundaries cross")
        self.xb, self.xt = xb, xt
        self.mid = 0.5 * (xb + xt)

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        tr = self.mid[0] + np.mod(t - self.mid[0], self.lam)
        tr = np.where(tr >= self.mid[0] + self.lam, tr - self.lam, tr)
        j = np.clip(np.searchsorted(self.mid, tr, side="right") - 1, 0, 7)
        span = self.mid[j + 1] - self.mid[j]
        f = np.where(span > 0, (tr - self.mid[j]) / np.where(span > 0, span, 1.0), 0.0)
        return j, f, t - tr

    def endpoints(self, t):
        """Bottom and top x of prebend(t) (unreduced: shifted back by whole periods)."""
        j, f, shift = self._locate(t)
        b = (1 - f) * self.xb[j] + f * self.xb[j + 1] + shift
        top = (1 - f) * self.xt[j] + f * self.xt[j + 1] + shift
        return b, top

    def prebend(self, t) -> np.ndarray:
        b, top = self.endpoints(float(t))
        return np.array([[float(b), 0.0], [float(top), 1.0]])

    def bend(self, t) -> np.ndarray:
        return self.embedding.eval(self.prebend(t))

    def slope(self, t):
        """Tangent of the angle between prebend(t) and the y-axis."""
        b, top = self.endpoints(t)
        return top - b

    def piece_of(self, t):
        return self._locate(t)[0]

    def bottom_of(self, x_top: float) -> float:
        """Bottom x of the prebend with top endpoint ``x_top``."""
        x0 = self.xt[0]
        xr = x0 + np.mod(x_top - x0, self.lam)
        shift = x_top - xr
        for j in range(8):
            lo, hi = self.xt[j], self.xt[j + 1]
            if hi - lo > 0 and lo <= xr <= hi:
                f = (xr - lo) / (hi - lo)
                return float((1 - f) * self.xb[j] + f * self.xb[j + 1] + shift)
        raise FoliationError(f"no prebend ends at top x = {x_top}")

    def top_of(self, x_bottom: float) -> float:
        """Top x of the prebend with bottom endpoint ``x_bottom``."""
        x0 = self.xb[0]
        xr = x0 + np.mod(x_bottom - x0, self.lam)
        shift = x_bottom - xr
        for j in range(8):
            lo, hi = self.xb[j], self.xb[j + 1]
            if hi - lo > 0 and lo <= xr <= hi:
                f = (xr - lo) / (hi - lo)
                return float((1 - f) * self.xt[j] + f * self.xt[j + 1] + shift)
        raise FoliationError(f"no prebend starts at bottom x = {x_bottom}")

    def straightness(self, t, n: int = 32) -> float:
        """Max distance of interior image samples of bend(t) from its chord."""
        b, top = self.endpoints(float(t))
        y = np.linspace(0.0, 1.0, n + 2)
        pts = self.embedding.eval(np.column_stack([b + (top - b) * y, y]))
        p, q = pts[0], pts[-1]
        d = (q - p) / np.linalg.norm(q - p)
        rel = pts[1:-1] - p
        return float(np.linalg.norm(rel - np.outer(rel @ d, d), axis=1).max())

    def bend_length(self, t) -> float:
        ends = self.bend(t)
        return float(np.linalg.norm(ends[1] - ends[0]))

    def sample_parameters(self, per_piece: int = 32) -> np.ndarray:
        ts = []
        for j in range(8):
            if self.mid[j + 1] > self.mid[j]:
                ts.append(self.mid[j] + (self.mid[j + 1] - self.mid[j]) * np.arange(per_piece) / per_piece)
        return np.concatenate(ts)

    def check_disjoint(self, ts) -> bool:
        """Sampled prebends meet only at shared boundary endpoints."""
        ts = np.sort(np.mod(np.asarray(ts, dtype=float), self.lam))
        b, top = self.endpoints(ts)
        # prebends are graphs over y, so ordering at both ends means disjoint interiors
        return bool(np.all(np.diff(b) >= -1e-12) and np.all(np.diff(top) >= -1e-12)
                    and np.all((np.diff(b) > 1e-15) | (np.diff(top) > 1e-15)))


def bend_foliation(embedding) -> BendFoliation:
    return BendFoliation(embedding)


def balance_defect(foliation: BendFoliation, t):
    return foliation.slope(t) - foliation.slope(np.asarray(t, dtype=float) + 0.5 * foliation.lam)


@dataclass(frozen=True)
class BalancedPairFrame:
    t_star: float
    iterations: int
    u_pre: np.ndarray  # prebend of u, rows (bottom, top)
    v_pre: np.ndarray
    u: np.ndarray  # bend segment (b, a): G end first
    v: np.ndarray
    a: np.ndarray  # F end of u
    b: np.ndarray  # G end of u
    c: np.ndarray  # F end of v
    d: np.ndarray  # G end of v
    arc_lengths: tuple  # F from a to c, F from c to a, G from b to d, G from d to b
    slopes: tuple

    @property
    def a_pre(self):
        return self.u_pre[1]

    @property
    def b_pre(self):
        return self.u_pre[0]

    @property
    def c_pre(self):
        return self.v_pre[1]

    @property
    def d_pre(self):
        return self.v_pre[0]


def _loop_arc(loop, emb, x0, x1):
    return loop.sub_arc(emb, x0, x1)


def find_balanced_pair(foliation: BendFoliation, n_samples: int = 1024, tol: float = 1e-10,
                       loops=None) -> BalancedPairFrame:
    """Root of the balance defect on [0, lambda/2]; the root nearest 0 wins."""
    half = 0.5 * foliation.lam
    ts = np.linspace(0.0, half, n_samples + 1)
    f = balance_defect(foliation, ts)
    zero = np.flatnonzero(np.abs(f) <= 1e-14)
    change = np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)
    t_star, iters = None, 0
    if len(zero) and (not len(change) or zero[0] <= change[0]):
        t_star = float(ts[zero[0]])
    elif len(change):
        i = change[0]
        t_star, iters = bisect(lambda t: float(balance_defect(foliation, t)), ts[i], ts[i + 1], tol=tol)
    if t_star is None:
        raise BalanceError("no sign change found for the balance defect")
    emb = foliation.embedding
    first, second = foliation.prebend(t_star), foliation.prebend(t_star + half)
    # label so that b (G end of u) and c (F end of v) are the nearby pair
    cands = []
    for up, vp in ((first, second), (second, first)):
        U, V = emb.eval(up), emb.eval(vp)
        cands.append((float(np.linalg.norm(U[0] - V[1])), up, vp, U, V))
    _, up, vp, U, V = min(cands, key=lambda c: c[0])
    lam = foliation.lam
    xa, xb_, xc, xd = up[1, 0], up[0, 0], vp[1, 0], vp[0, 0]
    if loops is not None:
        F, G = loops
        arcs = (polyline_length(_loop_arc(F, emb, xa, xc)), polyline_length(_loop_arc(F, emb, xc, xa)),
                polyline_length(_loop_arc(G, emb, xb_, xd)), polyline_length(_loop_arc(G, emb, xd, xb_)))
    else:
        arcs = tuple(float(np.mod(q - p, lam)) for p, q in ((xa, xc), (xc, xa), (xb_, xd), (xd, xb_)))
    slopes = (float(foliation.slope(t_star)), float(foliation.slope(t_star + half)))
    return BalancedPairFrame(t_star, int(iters), up, vp, U, V, U[1], U[0], V[1], V[0], arcs, slopes)


@dataclass(frozen=True)
class ProjectionCertificate:
    direction: np.ndarray
    basis: np.ndarray  # 2x3, rows span the projection plane
    A: np.ndarray
    B: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    pairing: tuple  # which F arc / G arc were used
    line: LineCertificate
    lam: float
    len_F_star: float
    len_G_star: float
    t_star: float
    arc_lengths: tuple

    @property
    def c1_plus_c2(self) -> float:
        return self.line.total

    @property
    def x(self) -> tuple:
        return self.line.x

    def passed(self, tol: float = 0.02) -> bool:
        s = self.c1_plus_c2
        return bool(self.line.holds and self.lam - s >= -1e-6 and s >= 2 - tol)

    def to_dict(self) -> dict:
        return {"t_star": self.t_star, "arc_lengths": list(self.arc_lengths),
                "chain": {"lambda": self.lam, "c1_plus_c2": self.c1_plus_c2,
                          "len_A": self.line.len_A, "len_B": self.line.len_B},
                "x": list(self.x), "pairing": list(self.pairing), "pass": self.passed()}


def _projection_basis(u_dir, v_dir):
    n = np.cross(u_dir, v_dir)
    if np.linalg.norm(n) < 1e-9:
        # parallel bends: any plane containing u works; pick the first axis
        # (in lexicographic order) that is far from u
        axis = np.eye(3)[int(np.argmin(np.abs(u_dir)))]
        n = np.cross(u_dir, axis)
    n = n / np.linalg.norm(n)
    e1 = u_dir / np.linalg.norm(u_dir)
    e2 = np.cross(n, e1)
    return n, np.vstack([e1, e2])


def projection_certificate(embedding, frame: BalancedPairFrame, loops, tol: float = 1e-9) -> ProjectionCertificate:
    """Project along the common normal of u and v and run the planar lemma."""
    F, G = loops
    n, basis = _projection_basis(frame.a - frame.b, frame.c - frame.d)
    P = lambda X: np.asarray(X) @ basis.T  # noqa: E731
    A = P(np.vstack([frame.a, frame.b]))
    B = P(np.vstack([frame.c, frame.d]))
    xa, xb, xc, xd = frame.a_pre[0], frame.b_pre[0], frame.c_pre[0], frame.d_pre[0]
    f_arcs = {"a->c": (xa, xc), "c->a": (xc, xa)}
    g_arcs = {"b->d": (xb, xd), "d->b": (xd, xb)}
    for fk, (f0, f1) in f_arcs.items():
        for gk, (g0, g1) in g_arcs.items():
            Fs = F.sub_arc(embedding, f0, f1)
            Gs = G.sub_arc(embedding, g0, g1)
            try:
                line = lemma_line_check(A, B, P(Fs), P(Gs), tol=tol)
            except PreconditionError:
                continue
            return ProjectionCertificate(n, basis, A, B, P(Fs), P(Gs), (fk, gk), line, embedding.lam,
                                         polyline_length(Fs), polyline_length(Gs), frame.t_star,
                                         frame.arc_lengths)
    raise ProjectionError("no intersecting arc pairing")


def certificate_json(cert: ProjectionCertificate) -> str:
    return json.dumps(cert.to_dict(), indent=2, sort_keys=True)
