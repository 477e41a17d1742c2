import math

import numpy as np
import pytest

from twistcyl.embedding import boundary_loops, build, triangulate
from twistcyl.flat_domain import pattern_catalog
from twistcyl.topology import (LinkingError, hopf_pair, hopf_perturbation_suite, hull_and_diameter,
                               hull_diameter_fuzz, linking, linking_number_crossings, linking_number_gauss,
                               point_hull_distance, self_intersection)


def circle(center, u, v, n=200):
    t = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    return np.asarray(center) + np.outer(np.cos(t), u) + np.outer(np.sin(t), v)


def test_hopf_and_split():
    A, B = hopf_pair(200)
    g = linking_number_gauss(A, B)
    assert abs(abs(g) - 1) <= 1e-2
    assert linking_number_crossings(A, B) == round(g)
    far = circle([10, 0, 0], [1, 0, 0], [0, 0, 1])
    assert abs(linking_number_gauss(A, far)) <= 1e-6
    assert linking_number_crossings(A, far) == 0


def test_orientation_flips_sign():
    A, B = hopf_pair(128)
    assert linking(A, B).crossing_value == -linking(A, B[::-1]).crossing_value


def test_touching_loops_rejected():
    A = circle([0, 0, 0], [1, 0, 0], [0, 1, 0])
    B = circle([2, 0, 0], [1, 0, 0], [0, 1, 0])
    with pytest.raises(LinkingError, match="loops touch"):
        linking_number_gauss(A, B)


def test_hopf_suite_small():
    rep = hopf_perturbation_suite(40, seed=1)
    assert rep["disagreements"] == 0


def test_shipped_boundaries_link(headline):
    F, G = boundary_loops(headline[0], 1024)
    res = linking(F, G)
    assert res.agreed and abs(res.crossing_value) == 1


def test_square_hull():
    sq = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], float)
    h = hull_and_diameter(sq)
    assert h.rank == 2
    assert h.diameter_set == pytest.approx(math.sqrt(2)) and h.diameter_hull == pytest.approx(math.sqrt(2))


def test_interior_point_changes_nothing():
    rng = np.random.default_rng(0)
    P = rng.standard_normal((40, 3))
    h1 = hull_and_diameter(P)
    h2 = hull_and_diameter(np.vstack([P, P.mean(axis=0)]))
    assert sorted(h1.vertices) == sorted(h2.vertices)
    assert h1.diameter_hull == h2.diameter_hull
    assert point_hull_distance(h1, P.mean(axis=0)[None])[0] == 0.0


@pytest.mark.parametrize("pts", [np.array([[0, 0, 0], [0, 0, 0.0]]), np.array([[0, 0, 0], [1, 1, 1], [2, 2, 2.0]])])
def test_low_rank_hulls(pts):
    h = hull_and_diameter(pts)
    assert h.rank <= 1 and h.contains_all()


def test_hull_fuzz_small():
    assert hull_diameter_fuzz(100, seed=5)["violations"] == 0


def test_embedded_and_layer_scaling():
    p = pattern_catalog("P1")
    seps = []
    for gap in (0.1 / 40, 0.1 / 80):
        rep = self_intersection(triangulate(build(p, 0.1, layer_gap=gap), 32, 24))
        assert not rep.intersects and rep.min_separation >= gap / 2
        seps.append(rep.min_separation)
    assert seps[0] / seps[1] == pytest.approx(2.0, rel=1e-3)


def test_coincident_layers_intersect():
    rep = self_intersection(triangulate(build(pattern_catalog("P1"), 0.1, layer_gap=0.0), 16, 8))
    assert rep.intersects


def test_hull_bound_on_headline(headline):
    hb = headline[1]["hull_bound"]
    assert hb["pass"] and hb["dist_x_hull"] <= hb["tol"]
    assert hb["dist_xy"] >= 0.99 and hb["diam_G"] >= 0.99 and hb["length_G"] >= 2
