"""Smooth U-turn profiles and the ruled pseudofold charts built from them.

A profile is a unit-speed planar curve that leaves the origin along +x,
turns through pi with curvature ``(pi / L) * phi(s / L)`` and comes back
along -x at height ``separation``. ``phi`` is a normalized bump on [0, 1];
straight arms of equal length may pad both ends.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


class RootFindingError(RuntimeError):
    pass


def bisect(f, lo, hi, tol=1e-10, maxiter=200):
    """Plain bisection on a sign change. Returns ``(root, iterations)``."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo, 0
    if fhi == 0:
        return hi, 0
    if np.sign(flo) == np.sign(fhi):
        raise RootFindingError(f"no bracket: f({lo:.6g})={flo:.6g}, f({hi:.6g})={fhi:.6g}")
    it = 0
    while hi - lo > tol and it < maxiter:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        it += 1
        if fm == 0:
            return mid, it
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi), it


def _smooth_bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 1
    out[m] = np.exp(-1.0 / (1.0 - t[m] ** 2))
    return out


@lru_cache(maxsize=None)
def _bump_norm(kind: str, order: int) -> float:
    if kind == "smooth":
        # composite Gauss-Legendre; the bump is flat to all orders at +-1
        edges = np.linspace(-1.0, 1.0, 513)
        a, h = edges[:-1], edges[1] - edges[0]
        q = a[:, None] + 0.5 * h * (_GL_X + 1.0)
        return 0.5 * float((_smooth_bump(q) @ _GL_W).sum() * 0.5 * h)
    return math.gamma(order + 1) ** 2 / math.gamma(2 * order + 2)


def bump(u, kind="smooth", order=2):
    """Normalized bump on [0, 1] (integral 1)."""
    u = np.asarray(u, dtype=float)
    if kind == "smooth":
        raw = _smooth_bump(2.0 * u - 1.0)
    elif kind == "poly":
        v = np.clip(u, 0.0, 1.0)
        raw = (v * (1.0 - v)) ** order
    else:
        raise ValueError(f"unknown bump kind {kind!r}")
    return raw / _bump_norm(kind, order)


class _TurnShape:
    """Unit-length turn: tangent angle pi * Phi(u), positions by nested Gauss-Legendre."""

    def __init__(self, kind: str, order: int, n: int):
        self.kind, self.order, self.n = kind, order, n
        self.nodes = np.linspace(0.0, 1.0, n + 1)
        h = 1.0 / n
        a = self.nodes[:-1]
        q = a[:, None] + 0.5 * h * (_GL_X[None, :] + 1.0)
        cell = 0.5 * h * (bump(q, kind, order) @ _GL_W)
        self.Phi_nodes = np.concatenate([[0.0], np.cumsum(cell)])
        pos = np.zeros((n + 1, 2))
        cellpos = self._integrate_tangent(a, np.full(n, h), np.arange(n))
        pos[1:] = np.cumsum(cellpos, axis=0)
        self.pos_nodes = pos

    def _cell(self, u):
        return np.clip((np.asarray(u) * self.n).astype(int), 0, self.n - 1)

    def Phi(self, u):
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        i = self._cell(u)
        a = self.nodes[i]
        h = u - a
        q = a[..., None] + 0.5 * h[..., None] * (_GL_X + 1.0)
        return self.Phi_nodes[i] + 0.5 * h * (bump(q, self.kind, self.order) @ _GL_W)

    def _integrate_tangent(self, a, h, cells):
        q = a[..., None] + 0.5 * h[..., None] * (_GL_X + 1.0)
        th = math.pi * self._Phi_in_cell(q, cells[..., None])
        w = 0.5 * h[..., None] * _GL_W
        return np.stack([(np.cos(th) * w).sum(-1), (np.sin(th) * w).sum(-1)], axis=-1)

    def _Phi_in_cell(self, q, cells):
        a = self.nodes[cells]
        h = q - a
        qq = a[..., None] + 0.5 * h[..., None] * (_GL_X + 1.0)
        return self.Phi_nodes[cells] + 0.5 * h * (bump(qq, self.kind, self.order) @ _GL_W)

    def position(self, u):
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        i = self._cell(u)
        a = self.nodes[i]
        return self.pos_nodes[i] + self._integrate_tangent(a, u - a, i)

    def angle(self, u):
        return math.pi * self.Phi(u)


@lru_cache(maxsize=32)
def _turn_shape(kind: str, order: int, n: int) -> _TurnShape:
    return _TurnShape(kind, order, n)


@dataclass(frozen=True)
class UProfile:
    separation: float
    width: float  # arc length of the turning region
    arm: float = 0.0
    kind: str = "smooth"
    order: int = 2
    n_samples: int = 512
    sharp: bool = False  # zero-separation limit: a crease at the midpoint
    samples: dict = field(default=None, compare=False, repr=False)

    @property
    def total_length(self) -> float:
        return self.width + 2.0 * self.arm

    @property
    def smoothness_class(self) -> str:
        if self.sharp:
            return "C0"
        # curvature vanishes at the junctions to order `order` for the
        # polynomial bump; the exponential bump is verified to C2 only
        return "C2" if self.kind == "smooth" else f"C{self.order + 1}"

    @property
    def _shape(self) -> _TurnShape:
        return _turn_shape(self.kind, self.order, self.n_samples)

    def _split(self, s):
        s = np.asarray(s, dtype=float)
        return s, np.clip((s - self.arm) / self.width, 0.0, 1.0) if self.width > 0 else np.zeros_like(s)

    def position(self, s):
        s, u = self._split(s)
        if self.sharp:
            half = 0.5 * self.total_length
            x = np.where(s <= half, s, 2 * half - s)
            return np.stack([x, np.zeros_like(x)], axis=-1)
        turn = self._shape.position(u) * self.width
        before = s < self.arm
        after = s > self.arm + self.width
        x = np.where(before, s, self.arm + turn[..., 0])
        y = np.where(before, 0.0, turn[..., 1])
        end = self._shape.pos_nodes[-1] * self.width
        x = np.where(after, self.arm + end[0] - (s - self.arm - self.width), x)
        y = np.where(after, end[1], y)
        return np.stack([x, y], axis=-1)

    def angle(self, s):
        s, u = self._split(s)
        if self.sharp:
            return np.where(s <= 0.5 * self.total_length, 0.0, math.pi)
        return self._shape.angle(u)

    def tangent(self, s):
        th = self.angle(s)
        return np.stack([np.cos(th), np.sin(th)], axis=-1)

    def curvature(self, s):
        s, u = self._split(s)
        if self.sharp or self.width == 0:
            return np.zeros_like(s)
        inside = (s >= self.arm) & (s <= self.arm + self.width)
        return np.where(inside, math.pi / self.width * bump(u, self.kind, self.order), 0.0)

    def end_point(self) -> np.ndarray:
        return self.position(np.array(self.total_length))


def _separation_simpson(L: float, shape: _TurnShape) -> float:
    """Normal offset of the turn's end, Simpson on the arc-length grid."""
    th = math.pi * shape.Phi_nodes
    f = np.sin(th)
    n = len(f) - 1
    h = L / n
    return float(h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum()))


def make_u_profile(separation: float, bump_order: int = 2, n_samples: int = 512,
                   kind: str = "smooth", total_length: float | None = None) -> UProfile:
    """Build a U-turn whose end-lines are ``separation`` apart.

    The turning length is found by bisection on ``[delta, 10 delta + 1]``.
    With ``total_length`` the turn is padded with equal straight arms.
    """
    if n_samples < 64:
        raise ValueError("n_samples must be >= 64")
    if n_samples % 2:
        n_samples += 1
    if separation == 0:
        if total_length is None:
            raise ValueError("a zero-separation profile needs a total length")
        return UProfile(0.0, 0.0, 0.5 * total_length, kind, bump_order, n_samples, sharp=True)
    if not separation > 0:
        raise ValueError(f"separation must be positive, got {separation}")
    shape = _turn_shape(kind, bump_order, n_samples)
    L, _ = bisect(lambda L: _separation_simpson(L, shape) - separation,
                  separation, 10 * separation + 1, tol=1e-10 * max(separation, 1e-300) + 1e-16)
    arm = 0.0
    if total_length is not None:
        if L > total_length:
            raise ValueError(f"turn of length {L:.6g} does not fit in {total_length:.6g}")
        arm = 0.5 * (total_length - L)
    prof = UProfile(float(separation), float(L), float(arm), kind, bump_order, n_samples)
    s = np.linspace(0.0, prof.total_length, n_samples + 1)
    samples = {"s": s, "points": prof.position(s), "tangents": prof.tangent(s),
               "angle": prof.angle(s), "kappa": prof.curvature(s)}
    object.__setattr__(prof, "samples", samples)
    return prof


def profile_csv(profile: UProfile, n: int | None = None) -> str:
    n = n or profile.n_samples
    s = np.linspace(0.0, profile.total_length, n + 1)
    pts = profile.position(s)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["s", "x", "y", "tangent_angle", "kappa"])
    for row in zip(s, pts[:, 0], pts[:, 1], profile.angle(s), profile.curvature(s)):
        w.writerow([f"{v:.17g}" for v in row])
    return buf.getvalue()


@dataclass(frozen=True)
class PseudofoldChart:
    profile: UProfile
    origin: np.ndarray
    ruling: np.ndarray
    e1: np.ndarray  # profile x direction
    e2: np.ndarray  # profile y direction
    band_extent: tuple = (-np.inf, np.inf)

    def __post_init__(self):
        for v in (self.ruling, self.e1, self.e2):
            if abs(np.linalg.norm(v) - 1) > 1e-12:
                raise ValueError("chart frame vectors must be unit length")
        gram = np.array([[np.dot(a, b) for b in (self.ruling, self.e1, self.e2)]
                         for a in (self.ruling, self.e1, self.e2)])
        if np.abs(gram - np.eye(3)).max() > 1e-12:
            raise ValueError("chart frame must be orthonormal")


def eval_chart(chart: PseudofoldChart, s, r, check=True):
    """Point and 3x2 differential (columns d/ds, d/dr) of a pseudofold chart."""
    s = np.asarray(s, dtype=float)
    r = np.asarray(r, dtype=float)
    if check:
        tol = 1e-12 * max(1.0, chart.profile.total_length)
        if np.any(s < -tol) or np.any(s > chart.profile.total_length + tol):
            raise ValueError("profile parameter out of range")
        a, b = chart.band_extent
        if np.any(r < a - 1e-12) or np.any(r > b + 1e-12):
            raise ValueError("ruling parameter out of range")
    P = chart.profile.position(s)
    T = chart.profile.tangent(s)
    point = (chart.origin + P[..., :1] * chart.e1 + P[..., 1:] * chart.e2 + r[..., None] * chart.ruling)
    ds = T[..., :1] * chart.e1 + T[..., 1:] * chart.e2
    dr = np.broadcast_to(chart.ruling, ds.shape)
    J = np.stack([ds, dr], axis=-1)
    return point, J
