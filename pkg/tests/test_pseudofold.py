import math

import numpy as np
import pytest

from twistcyl.pseudofold import (PseudofoldChart, RootFindingError, bisect, bump, eval_chart, make_u_profile,
                                 profile_csv)


def test_bisect():
    r, it = bisect(lambda x: x * x - 2.0, 0.0, 2.0, tol=1e-12)
    assert r == pytest.approx(math.sqrt(2), abs=1e-12) and it <= 60
    with pytest.raises(RootFindingError):
        bisect(lambda x: x * x + 1.0, 0.0, 1.0)


@pytest.mark.parametrize("kind", ["smooth", "poly"])
def test_bump_normalized(kind):
    u = np.linspace(0.0, 1.0, 200001)
    assert np.trapezoid(bump(u, kind), u) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("kind", ["smooth", "poly"])
def test_separation_and_turning(kind):
    prof = make_u_profile(0.1, kind=kind)
    assert abs(prof.end_point()[1] - 0.1) <= 1e-8
    s = np.linspace(0.0, prof.total_length, 4001)
    assert prof.angle(np.array(prof.total_length)) == pytest.approx(math.pi, abs=1e-8)
    assert np.trapezoid(prof.curvature(s), s) == pytest.approx(math.pi, abs=1e-6)
    # unit speed
    p = prof.position(s)
    seg = np.linalg.norm(np.diff(p, axis=0), axis=1)
    assert seg.sum() == pytest.approx(prof.total_length, rel=1e-6)


def _doubled_segment_hausdorff(prof):
    s = np.linspace(0.0, prof.total_length, 20001)
    p = prof.position(s)
    half = 0.5 * prof.total_length
    fwd = np.hypot(p[:, 0] - np.clip(p[:, 0], 0.0, half), p[:, 1]).max()
    q = np.linspace(0.0, half, 2001)
    back = max(np.min(np.hypot(p[:, 0] - x, p[:, 1])) for x in q)
    return max(fwd, back)


def test_degenerates_to_sharp_fold():
    d = [_doubled_segment_hausdorff(make_u_profile(delta, total_length=1.0)) for delta in (0.1, 0.01, 0.001)]
    assert d[0] > d[1] > d[2]
    assert d[2] < 2e-3


def test_padding_and_errors():
    prof = make_u_profile(0.05, total_length=0.5)
    assert prof.total_length == pytest.approx(0.5)
    assert prof.arm > 0
    with pytest.raises(ValueError):
        make_u_profile(-1.0)
    with pytest.raises(ValueError):
        make_u_profile(0.1, total_length=0.01)
    sharp = make_u_profile(0.0, total_length=1.0)
    assert sharp.smoothness_class == "C0"
    assert make_u_profile(0.1).smoothness_class == "C2"


def test_profile_csv_header():
    text = profile_csv(make_u_profile(0.1), n=8)
    lines = text.strip().splitlines()
    assert lines[0] == "s,x,y,tangent_angle,kappa" and len(lines) == 10


def _chart():
    e = np.eye(3)
    prof = make_u_profile(0.05, total_length=0.4)
    return PseudofoldChart(prof, np.array([0.3, -0.2, 1.0]), e[1], e[0], e[2], (0.0, 1.0))


def test_chart_is_isometric():
    ch = _chart()
    rng = np.random.default_rng(3)
    s = rng.uniform(0.0, ch.profile.total_length, 100)
    r = rng.uniform(0.0, 1.0, 100)
    _, J = eval_chart(ch, s, r)
    gram = np.einsum("nki,nkj->nij", J, J)
    assert np.abs(gram - np.eye(2)).max() <= 1e-10


def test_chart_rulings_straight():
    ch = _chart()
    r = np.linspace(0.0, 1.0, 11)
    pts, _ = eval_chart(ch, np.full(11, 0.17), r)
    d = pts - pts[0]
    assert np.abs(np.cross(d[1:], d[-1])).max() <= 1e-14


def test_chart_rejects_bad_frame_and_range():
    e = np.eye(3)
    prof = make_u_profile(0.05)
    with pytest.raises(ValueError):
        PseudofoldChart(prof, np.zeros(3), e[0], e[0], e[2])
    with pytest.raises(ValueError):
        eval_chart(_chart(), np.array([0.1]), np.array([2.0]))
