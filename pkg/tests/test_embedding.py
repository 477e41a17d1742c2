import io

import numpy as np
import pytest

from twistcyl.embedding import (BudgetError, boundary_loops, build, build_report, isometry_report, junction_defects,
                                limit_embedding, seam_defect, triangulate, write_obj)
from twistcyl.flat_domain import pattern_catalog


@pytest.fixture(scope="module")
def emb(headline):
    return headline[0]


def test_slab_thickness(emb):
    z = triangulate(emb, 32, 24).vertices[:, 2]
    assert z.max() - z.min() <= 3 * emb.layer_gap * (1 + 1e-6)


def test_seam_identification(emb):
    y = np.linspace(0.0, 1.0, 7)
    a = emb.eval(np.column_stack([np.zeros(7), y]))
    b = emb.eval(np.column_stack([np.full(7, emb.lam), y]))
    assert np.abs(a - b).max() <= 1e-12
    assert seam_defect(emb) <= 1e-12


def test_junctions_continuous(emb):
    assert junction_defects(emb).max() <= 1e-9


def test_isometry(emb):
    rep = isometry_report(emb, 64)
    assert rep["max_gram_defect"] <= 1e-8
    assert rep["fd_max_rel_error"] <= 1e-6


def test_flat_pieces_exact(emb):
    pts = np.array([[0.2, 0.2], [0.3, 0.5]])
    J = emb.eval_differential(pts)
    assert np.abs(np.einsum("nki,nkj->nij", J, J) - np.eye(2)).max() <= 1e-12


def test_scaled_fixture_detected(emb):
    rep = isometry_report(emb.scaled(1.01), 32)
    assert rep["max_gram_defect"] == pytest.approx(1.01 ** 2 - 1, rel=1e-6)


def test_rigid_motion_keeps_isometry(emb):
    c, s = np.cos(0.7), np.sin(0.7)
    R = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    assert isometry_report(emb.moved(R, [1, 2, 3]), 32)["max_gram_defect"] <= 1e-8


def test_boundary_lengths_converge(emb):
    errs = []
    for n in (256, 512, 1024):
        F, G = boundary_loops(emb, n)
        assert abs(F.total_length - 2.1) <= 0.01 and abs(G.total_length - 2.1) <= 0.01
        errs.append(abs(F.total_length - emb.lam))
    # second order: each doubling divides the error by about 4
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_mesh_topology(emb):
    mesh = triangulate(emb, 32, 24)
    assert mesh.euler_characteristic() == 0
    assert len(mesh.boundary_cycles()) == 2


def test_mesh_distortion_second_order(emb):
    d = [triangulate(emb, n, 2 * n).edge_distortion() for n in (16, 32)]
    assert d[1] <= d[0] / 3


def test_obj_export(emb):
    mesh = triangulate(emb, 16, 8)
    buf = io.StringIO()
    write_obj(mesh, buf, loops=boundary_loops(emb, 128))
    text = buf.getvalue()
    assert text.count("\nf ") == len(mesh.faces)
    assert text.count("\nl ") == 2


def test_budget_error():
    with pytest.raises(BudgetError):
        build(pattern_catalog("P1"), 0.1, layer_gap=1.0)


def test_limit_fixture():
    emb = limit_embedding(pattern_catalog("P1"))
    assert emb.smoothness_class == "C0"
    assert isometry_report(emb, 32)["max_gram_defect"] <= 1e-12
    assert seam_defect(emb) <= 1e-12


def test_build_report(emb):
    rep = build_report(emb, 32, 256)
    assert rep["max_gram_defect"] <= 1e-8 and rep["smoothness_class"] == "C2"
