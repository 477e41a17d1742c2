import numpy as np
import pytest

from twistcyl.embedding import boundary_loops
from twistcyl.rulings import balance_defect, bend_foliation, certificate_json, find_balanced_pair, \
    projection_certificate


@pytest.fixture(scope="module")
def fol(headline):
    return bend_foliation(headline[0])


def test_band_bends_follow_creases(fol):
    emb = fol.embedding
    for k, band in enumerate(emb.bands):
        j = 2 * k + 1
        t = 0.5 * (fol.mid[j] + fol.mid[j + 1])
        seg = fol.bend(t)
        d = (seg[1] - seg[0]) / np.linalg.norm(seg[1] - seg[0])
        assert abs(abs(d @ band.chart.ruling) - 1) <= 1e-12


def test_bends_straight_and_long(fol):
    ts = fol.sample_parameters(32)
    assert max(fol.straightness(t) for t in ts) <= 1e-8
    assert min(fol.bend_length(t) for t in ts) >= 1 - 1e-9
    assert fol.check_disjoint(ts)


def test_top_bottom_inverse_on_bands(fol):
    # inside a triangle a whole fan shares the apex, so only bands invert
    for k in range(4):
        j = 2 * k + 1
        for f in (0.25, 0.5, 0.75):
            x = (1 - f) * fol.xt[j] + f * fol.xt[j + 1]
            assert fol.top_of(fol.bottom_of(x)) == pytest.approx(x, abs=1e-12)


def test_antisymmetry(fol):
    t = np.random.default_rng(0).uniform(0.0, fol.lam, 100)
    assert np.abs(balance_defect(fol, t) + balance_defect(fol, t + 0.5 * fol.lam)).max() <= 1e-10


def test_balanced_pair(fol):
    F, G = boundary_loops(fol.embedding, 1024)
    frame = find_balanced_pair(fol, loops=(F, G))
    assert frame.iterations <= 60
    assert frame.slopes[0] == pytest.approx(frame.slopes[1], abs=1e-9)
    assert np.abs(np.asarray(frame.arc_lengths) - 0.5 * fol.lam).max() <= 1e-4 * fol.lam
    assert np.linalg.norm(frame.b - frame.c) < np.linalg.norm(frame.a - frame.c)


def test_projection_chain(fol):
    emb = fol.embedding
    F, G = boundary_loops(emb, 1024)
    frame = find_balanced_pair(fol, loops=(F, G))
    cert = projection_certificate(emb, frame, (F, G))
    assert cert.passed()
    assert 2 - 0.02 <= cert.c1_plus_c2 <= emb.lam + 1e-6
    assert cert.line.len_A == pytest.approx(np.linalg.norm(frame.a - frame.b), abs=1e-12)
    assert cert.line.len_A >= 1 - 1e-9 and cert.line.len_B >= 1 - 1e-9
    assert cert.len_F_star == pytest.approx(0.5 * emb.lam, abs=1e-3)
    assert '"c1_plus_c2"' in certificate_json(cert)
