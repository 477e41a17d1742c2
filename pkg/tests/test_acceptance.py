"""Acceptance criteria, one check per criterion.

Run under pytest (``pytest tests/test_acceptance.py -v -s``) or directly
(``python tests/test_acceptance.py``); either way one PASS/FAIL line is
printed per criterion.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import cached_run  # noqa: E402
from twistcyl.embedding import isometry_report, junction_defects, limit_embedding, seam_defect  # noqa: E402
from twistcyl.flat_domain import PATTERN_IDS, lemma_line_fuzz, pattern_catalog  # noqa: E402
from twistcyl.limits import DEFAULT_EPSILONS, METRICS, measure, monotonicity  # noqa: E402
from twistcyl.topology import hopf_perturbation_suite, hull_diameter_fuzz  # noqa: E402

EPSILONS = tuple(DEFAULT_EPSILONS)
SEED = 42


def all_runs():
    for pid in PATTERN_IDS:
        for eps in EPSILONS:
            yield pid, eps, cached_run(pid, eps)


def _fail_list(bad):
    return "; ".join(bad[:4]) + (f" (+{len(bad) - 4} more)" if len(bad) > 4 else "")


def criterion_1():
    """Realization: isometric, embedded, boundary is a Hopf link."""
    bad, worst_gram, worst_sep = [], 0.0, np.inf
    for pid, eps, (emb, b, _) in all_runs():
        gram = b["isometry"]["max_gram_defect"]
        emb_rep, lk = b["embedded"], b["linking"]
        sep = emb_rep["min_separation"] / emb.layer_gap
        worst_gram, worst_sep = max(worst_gram, gram), min(worst_sep, sep)
        ok = (gram <= 1e-8 and not emb_rep["intersects"] and sep >= 0.5
              and abs(abs(lk["gauss"]) - 1) <= 0.05 and round(lk["gauss"]) == lk["crossings"])
        if not ok:
            bad.append(f"{pid}@{eps}")
    return not bad, f"16 runs, max gram {worst_gram:.2e}, min sep/gap {worst_sep:.3f}" + (
        f"; failing {_fail_list(bad)}" if bad else "")


def criterion_2():
    """Projection chain: lambda >= l(C1)+l(C2) >= 2 - 0.02; excess over 2 shrinks with epsilon."""
    bad, lines = [], []
    for pid in PATTERN_IDS:
        vals = []
        for eps in EPSILONS:
            emb, b, _ = cached_run(pid, eps)
            s = b["projection"]["chain"]["c1_plus_c2"]
            vals.append(s)
            if not (emb.lam + 1e-6 >= s >= 2 - 0.02):
                bad.append(f"{pid}@{eps}: {s:.4f}")
        excess = [v - 2 for v in vals]
        if not all(b_ < a_ for a_, b_ in zip(excess, excess[1:])):
            bad.append(f"{pid}: excess not shrinking {excess}")
        lines.append(f"{pid} " + "/".join(f"{v:.3f}" for v in vals))
    return not bad, "; ".join(lines) + (f"; failing {_fail_list(bad)}" if bad else "")


def criterion_3():
    """Hull bound: x in Hull(G), |x - y| >= 0.99, diam(G) >= 0.99, l(G) = lambda >= 2."""
    bad, worst = [], 0.0
    for pid, eps, (emb, b, _) in all_runs():
        h = b["hull_bound"]
        if "error" in h:
            bad.append(f"{pid}@{eps}: {h['error']}")
            continue
        worst = max(worst, h["dist_x_hull"] / h["tol"])
        ok = (h["dist_x_hull"] <= h["tol"] and h["dist_xy"] >= 0.99 and h["diam_G"] >= 0.99
              and abs(h["length_G"] - emb.lam) <= 1e-4 * emb.lam and h["length_G"] >= 2 - 1e-4)
        if not ok:
            bad.append(f"{pid}@{eps}")
    return not bad, f"16 runs, max dist/tol {worst:.3g}" + (f"; failing {_fail_list(bad)}" if bad else "")


def criterion_4():
    """Balanced pair: arcs lambda/2 within 1e-4 lambda, antisymmetry <= 1e-10."""
    bad, worst_arc, worst_anti = [], 0.0, 0.0
    for pid, eps, (emb, b, _) in all_runs():
        bp = b["balanced_pair"]
        if "error" in bp:
            bad.append(f"{pid}@{eps}: {bp['error']}")
            continue
        rel = bp["max_arc_error"] / emb.lam
        worst_arc, worst_anti = max(worst_arc, rel), max(worst_anti, bp["antisymmetry"])
        if rel > 1e-4 or bp["antisymmetry"] > 1e-10:
            bad.append(f"{pid}@{eps}")
    return not bad, f"16 runs, max arc error/lambda {worst_arc:.2e}, antisymmetry {worst_anti:.2e}" + (
        f"; failing {_fail_list(bad)}" if bad else "")


def criterion_5():
    """Sweep: every defect nonincreasing within 10% per step and halved from 0.5 to 0.05."""
    bad = []
    for pid in PATTERN_IDS:
        recs = [cached_run(pid, eps)[2] for eps in EPSILONS]
        for m, v in monotonicity(recs, slack=0.1).items():
            if not (v["nonincreasing"] and v["halved"]):
                bad.append(f"{pid}.{m} {['%.3g' % x for x in v['values']]}")
    return not bad, f"{len(PATTERN_IDS)} patterns x {len(METRICS)} metrics" + (
        f"; failing {_fail_list(bad)}" if bad else "")


def criterion_6():
    """Fuzzing: line lemma and hull diameter (1000 each), Hopf agreement (500)."""
    line = lemma_line_fuzz(1000, SEED, tol=1e-9)
    hull = hull_diameter_fuzz(1000, SEED, tol=1e-12)
    hopf = hopf_perturbation_suite(500, SEED)
    ok = line["violations"] == 0 and hull["violations"] == 0 and hopf["disagreements"] == 0
    return ok, (f"line {line['violations']}/1000, hull {hull['violations']}/1000, "
                f"hopf {hopf['disagreements']}/500 disagreements")


def criterion_7():
    """Limit fixture: every metric 0, isometric and closed at the seam."""
    bad, worst = [], 0.0
    for pid in PATTERN_IDS:
        emb = limit_embedding(pattern_catalog(pid))
        rec = measure(emb)
        vals = [getattr(rec, m) for m in METRICS]
        gram = isometry_report(emb, 64)["max_gram_defect"]
        seam = max(seam_defect(emb), float(junction_defects(emb).max()))
        worst = max(worst, *vals)
        if max(vals) > 1e-9 or gram > 1e-12 or seam > 1e-12:
            bad.append(f"{pid}: metric {max(vals):.2e}, gram {gram:.2e}, seam {seam:.2e}")
    return not bad, f"max metric {worst:.2e}" + (f"; failing {_fail_list(bad)}" if bad else "")


def criterion_8():
    """Bends straight to 1e-8 and at least 1 - 1e-9 long."""
    bad, worst_dev, worst_len = [], 0.0, np.inf
    for pid, eps, (_, b, _) in all_runs():
        bd = b["bends"]
        worst_dev, worst_len = max(worst_dev, bd["max_chord_deviation"]), min(worst_len, bd["min_length"])
        if bd["max_chord_deviation"] > 1e-8 or bd["min_length"] < 1 - 1e-9:
            bad.append(f"{pid}@{eps}")
    return not bad, f"max chord deviation {worst_dev:.2e}, min length {worst_len:.16f}" + (
        f"; failing {_fail_list(bad)}" if bad else "")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def report_line(k, ok, detail):
    return f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}"


@pytest.mark.parametrize("k", range(1, 9))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    with capsys.disabled():
        print("\n" + report_line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = [fn() for fn in CRITERIA]
    for k, (ok, detail) in enumerate(results, 1):
        print(report_line(k, ok, detail))
    sys.exit(0 if all(ok for ok, _ in results) else 1)
