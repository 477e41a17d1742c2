import json
import math

import numpy as np
import pytest

from twistcyl.flat_domain import (PATTERN_IDS, BandCollisionError, FlatCylinder, PatternError, PreconditionError,
                                  check_pattern_invariants, fold_by_reflections, lemma_line_check, lemma_line_fuzz,
                                  pattern_catalog, pattern_from_json, thicken)


def tri_area(t):
    (a, b), (c, d), (e, f) = t
    return 0.5 * abs((c - a) * (f - b) - (e - a) * (d - b))


def test_p1_layout():
    p = pattern_catalog("P1")
    assert p.triangles[0] == ((0, 0), (1, 0), (0, 1))
    assert p.triangles[3] == ((1, 0), (2, 0), (2, 1))
    ends = [(c.p0, c.p1) for c in p.creases[:3]]
    assert ends == [((1, 0), (0, 1)), ((1, 0), (1, 1)), ((1, 0), (2, 1))]


@pytest.mark.parametrize("pid", PATTERN_IDS)
def test_tiling_arithmetic(pid):
    p = pattern_catalog(pid)
    check_pattern_invariants(p)
    assert sum(tri_area(t) for t in p.triangles) == pytest.approx(2.0)
    for t in p.triangles:
        legs = sorted(math.dist(t[i], t[(i + 1) % 3]) for i in range(3))
        assert legs[:2] == pytest.approx([1.0, 1.0])


def test_mirror_is_y_flip():
    p, m = pattern_catalog("P1"), pattern_catalog("P1m")
    for tp, tm in zip(p.triangles, m.triangles):
        assert sorted((x, 1 - y) for x, y in tp) == sorted(tm)


def test_unknown_pattern():
    with pytest.raises(PatternError):
        pattern_catalog("P3")


def test_json_round_trip():
    p = pattern_catalog("P2m")
    assert pattern_from_json(p.to_json()) == p
    bad = json.loads(p.to_json())
    bad["creases"][0]["sign"] = "valley" if bad["creases"][0]["sign"] == "mountain" else "mountain"
    with pytest.raises(PatternError):
        pattern_from_json(bad)


def test_puncture_order_is_a_permutation():
    for pid in PATTERN_IDS:
        assert sorted(pattern_catalog(pid).puncture_order) == [1, 2, 3, 4]


def test_fold_examples():
    p = pattern_catalog("P1")
    np.testing.assert_allclose(fold_by_reflections(p, [0.5, 0.25]), [0.5, 0.25, 0.0], atol=1e-15)
    np.testing.assert_allclose(fold_by_reflections(p, [1.0, 1.0]), [0.0, 0.0, 0.0], atol=1e-15)
    for y in (0.0, 0.5, 1.0):
        np.testing.assert_allclose(fold_by_reflections(p, [2.0, y]), fold_by_reflections(p, [0.0, y]), atol=1e-15)


def test_flat_cylinder_distance_wraps():
    d = FlatCylinder(2.0)
    assert d.distance([0.1, 0.0], [1.9, 0.0]) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        FlatCylinder(0.0)


def test_thicken_budget():
    tp = thicken(pattern_catalog("P1"), 0.1)
    assert tp.axial_length() == pytest.approx(2.1, abs=1e-15)
    # equal perpendicular widths: w/sin45 on each diagonal, w/sin90 on the vertical
    sines = [abs(math.sin(c.angle)) for c in tp.base.creases]
    assert sum(w / s for w, s in zip(tp.band_widths, sines)) == pytest.approx(0.1, abs=1e-15)
    assert len(set(round(w, 15) for w in tp.band_widths)) == 1
    assert tp.closure_defect() < 1e-12


def test_thicken_limit_and_collision():
    tp = thicken(pattern_catalog("P1"), 0.0)
    assert tp.band_widths == (0.0,) * 4
    with pytest.raises(BandCollisionError, match="bands collide"):
        thicken(pattern_catalog("P1"), 0.6)


def test_line_lemma_square():
    A = np.array([[0, 0], [1, 0]], float)
    B = np.array([[0, 1], [1, 1]], float)
    C1 = np.array([[0, 0], [0.5, 0.5], [0, 1]])
    C2 = np.array([[1, 0], [0.5, 0.5], [1, 1]])
    cert = lemma_line_check(A, B, C1, C2)
    assert cert.holds and cert.total == pytest.approx(2 * math.sqrt(2))


def test_line_lemma_degenerate_equality():
    A = np.array([[0, 0], [1, 0]], float)
    B = np.array([[-1, 0], [0, 0]], float)
    cert = lemma_line_check(A, B, np.array([[0.0, 0.0]]), np.array([[1.0, 0.0], [-1.0, 0.0]]))
    assert cert.holds and cert.total == pytest.approx(2.0)


def test_line_lemma_precondition():
    A = np.array([[0, 0], [1, 0]], float)
    B = np.array([[0, 1], [1, 1]], float)
    with pytest.raises(PreconditionError):
        lemma_line_check(A, B, np.array([[0, 0], [0, 1.0]]), np.array([[1, 0], [1, 1.0]]))


def test_line_lemma_fuzz_small():
    rep = lemma_line_fuzz(200, seed=7)
    assert rep["violations"] == 0 and rep["min_slack"] >= -1e-9
    assert lemma_line_fuzz(0, seed=7) == {"trials": 0, "violations": 0, "min_slack": None}
