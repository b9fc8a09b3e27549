import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from roaddetect.errors import DimensionMismatch, MalformedHeader, MismatchedImageLists
from roaddetect.evaluate import (ConfusionCounts, EvalReport, ImageResult, UNDEFINED_DENOM, batch_eval,
                                 compare_runs, confusion, evaluate_masks, match_directories, rates)
from roaddetect.netpbm import write_pgm

from strategies import masks


def result(name, fnr, fpr):
    return ImageResult(name, ConfusionCounts(0, 0, 0, 0), fnr, fpr)


def test_confusion_examples():
    gt = np.array([[1, 1, 1, 1, 1, 1, 0, 0, 0, 0]], dtype=bool)
    pred = np.array([[1, 1, 1, 1, 1, 0, 1, 1, 0, 0]], dtype=bool)
    c = confusion(pred, gt)
    assert (c.tp, c.fn, c.fp, c.tn) == (5, 1, 2, 2)
    fnr, fpr = rates(c)
    assert fnr == pytest.approx(1 / 6) and fpr == pytest.approx(0.5)
    assert rates(confusion(gt, gt)) == (0.0, 0.0)
    inv = confusion(~gt, gt)
    assert inv.tp == 0 and inv.tn == 0


def test_undefined_rates():
    c = confusion(np.ones((2, 2), bool), np.ones((2, 2), bool))
    assert rates(c) == (0.0, UNDEFINED_DENOM)
    assert rates(ConfusionCounts(0, 1, 3, 0))[0] is UNDEFINED_DENOM


def test_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        confusion(np.zeros((2, 2), bool), np.zeros((2, 3), bool))


def test_group_average_and_trailing_group():
    rep = EvalReport([result("a", 0.1, 0.0), result("b", 0.2, 0.0), result("c", 0.3, 0.0),
                      result("d", 0.5, 0.1)], 3)
    g = rep.groups
    assert len(g) == 2
    assert g[0].fnr == pytest.approx(0.2)
    assert g[1].names == ("d",) and g[1].fnr == 0.5
    assert rep.overall[0] == pytest.approx(0.275)


def test_undefined_excluded_from_averages():
    rep = EvalReport([result("a", 0.2, None), result("b", 0.4, 0.1)], 3)
    assert rep.groups[0].fpr == 0.1
    assert rep.undefined == ["a"]
    assert "undefined rates" in rep.render_text()


def test_thirty_perfect_predictions(tmp_path):
    m = np.zeros((4, 4), bool)
    m[1:3] = True
    (tmp_path / "p").mkdir()
    (tmp_path / "g").mkdir()
    for k in range(30):
        write_pgm(tmp_path / "p" / f"f{k:02d}.pgm", m)
        write_pgm(tmp_path / "g" / f"f{k:02d}.pgm", m)
    rep = batch_eval(match_directories(tmp_path / "p", tmp_path / "g"))
    assert len(rep.groups) == 10
    assert all(g.fnr == 0 and g.fpr == 0 for g in rep.groups)
    assert rep.overall == (0.0, 0.0)


def test_batch_eval_errors_name_path(tmp_path):
    write_pgm(tmp_path / "a.pgm", np.zeros((2, 2), bool))
    write_pgm(tmp_path / "b.pgm", np.zeros((3, 2), bool))
    (tmp_path / "bad.pgm").write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(DimensionMismatch, match="a.pgm"):
        batch_eval([(tmp_path / "a.pgm", tmp_path / "b.pgm")])
    with pytest.raises(MalformedHeader, match="bad.pgm"):
        batch_eval([(tmp_path / "bad.pgm", tmp_path / "a.pgm")])


def test_match_directories_names_first_unmatched(tmp_path):
    (tmp_path / "p").mkdir()
    (tmp_path / "g").mkdir()
    for name in ("a", "b", "c"):
        write_pgm(tmp_path / "g" / f"{name}.pgm", np.zeros((2, 2), bool))
    for name in ("a", "c"):
        write_pgm(tmp_path / "p" / f"{name}.pgm", np.zeros((2, 2), bool))
    with pytest.raises(MismatchedImageLists, match="b.pgm"):
        match_directories(tmp_path / "p", tmp_path / "g")


def test_csv_round_trip():
    rep = evaluate_masks([("x", np.eye(3, dtype=bool), np.eye(3, dtype=bool)),
                          ("y", np.ones((3, 3), bool), np.ones((3, 3), bool))],
                         metadata={"config_digest": "abc"})
    back = EvalReport.from_csv(rep.to_csv())
    assert back.images == rep.images
    assert back.metadata == {"config_digest": "abc"}
    assert back.group_size == 3


def test_report_files(tmp_path):
    rep = evaluate_masks([("x", np.eye(3, dtype=bool), np.eye(3, dtype=bool))])
    txt, csv_path = rep.write(tmp_path / "run")
    assert txt.name == "run.report.txt" and csv_path.name == "run.report.csv"
    assert "overall" in txt.read_text()


def test_compare_examples():
    a = EvalReport([result("i", 0.1, 0.2)], 3)
    b = EvalReport([result("i", 0.3, 0.2)], 3)
    s = compare_runs(a, b, "with", "without")
    assert s.deltas[0] == pytest.approx(-0.2)
    assert s.verdicts == {"fnr": "with", "fpr": "tie"}
    same = compare_runs(a, a)
    assert same.deltas == (0.0, 0.0)
    assert all(g[3] == 0 and g[6] == 0 for g in same.groups)
    assert "lower overall error" in s.render_text()
    with pytest.raises(MismatchedImageLists):
        compare_runs(a, EvalReport([result("j", 0.1, 0.1)], 3))


# -- properties --------------------------------------------------------------

@settings(max_examples=600)
@given(masks(), st.data())
def test_counts_and_rate_ranges(pred, data):
    gt = data.draw(hnp.arrays(np.bool_, pred.shape))
    c = confusion(pred, gt)
    assert c.total == pred.size
    for r in rates(c):
        assert r is None or 0.0 <= r <= 1.0
    s = confusion(gt, pred)
    assert (s.tp, s.tn, s.fn, s.fp) == (c.tp, c.tn, c.fp, c.fn)


@settings(max_examples=500)
@given(masks(min_side=2))
def test_self_comparison_is_perfect(m):
    if m.all() or not m.any():
        return
    assert rates(confusion(m, m)) == (0.0, 0.0)


@settings(max_examples=300)
@given(st.lists(st.tuples(masks(max_side=4, min_side=4), masks(max_side=4, min_side=4)),
                min_size=1, max_size=8), st.randoms(use_true_random=False))
def test_permutation_covariance(pairs, rnd):
    items = [(f"i{k}", p, g) for k, (p, g) in enumerate(pairs)]
    perm = list(range(len(items)))
    rnd.shuffle(perm)
    a = evaluate_masks(items)
    b = evaluate_masks([items[k] for k in perm])
    assert b.images == [a.images[k] for k in perm]
