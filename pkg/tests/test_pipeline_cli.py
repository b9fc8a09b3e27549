import filecmp

import numpy as np
import pytest

from roaddetect.cli import cli_main
from roaddetect.config import PipelineConfig
from roaddetect.errors import PipelineError
from roaddetect.evaluate import EvalReport
from roaddetect.netpbm import load_pgm_bytes, load_ppm, read_mask, write_ppm
from roaddetect.pipeline import dump_intermediates, run_pipeline
from roaddetect.synth import make_frame


@pytest.fixture(scope="module")
def frame():
    return make_frame("shadow", 0)


@pytest.fixture(scope="module")
def image_file(tmp_path_factory, frame):
    path = tmp_path_factory.mktemp("img") / "road.ppm"
    write_ppm(path, frame.degraded)
    return path


def test_constant_image_completes():
    img = np.full((200, 200, 3), (120, 110, 100), dtype=np.uint8)
    res = run_pipeline(img)
    assert res.road_mask.all() or not res.road_mask.any()


def test_deterministic(frame):
    a = run_pipeline(frame.degraded)
    b = run_pipeline(frame.degraded.copy())
    np.testing.assert_array_equal(a.road_mask, b.road_mask)
    for key in a.intermediates:
        np.testing.assert_array_equal(a.intermediates[key], b.intermediates[key])


def test_stage_context_on_failure():
    with pytest.raises(PipelineError) as info:
        run_pipeline(np.zeros((8, 8, 3), dtype=np.uint8))
    assert info.value.stage == "seeds"


def test_filters_follow_configured_order(frame):
    cfg = PipelineConfig(order=("specular", "rainsnow", "shadow"), rainsnow=False)
    res = run_pipeline(frame.degraded, cfg)
    assert "post_rainsnow" not in res.intermediates
    assert list(res.intermediates)[:4] == ["highlight_mask", "post_specular", "shadow_mask", "post_shadow"]


def test_pretrained_model_is_used(frame):
    first = run_pipeline(frame.degraded)
    again = run_pipeline(make_frame("shadow", 1).degraded, model=first.model)
    assert again.model is first.model


def test_intermediate_dumps_are_valid_netpbm(frame, tmp_path):
    res = run_pipeline(frame.degraded)
    paths = dump_intermediates(res, tmp_path, "f")
    names = {p.name for p in paths}
    for stage in ("post_shadow.ppm", "post_rainsnow.ppm", "post_specular.ppm", "svm_mask.pgm", "final_mask.pgm"):
        assert f"f.{stage}" in names
    for p in paths:
        data = p.read_bytes()
        (load_ppm if p.suffix == ".ppm" else load_pgm_bytes)(data)


# -- command line --------------------------------------------------------------

def test_detect_writes_mask(image_file, tmp_path, frame):
    out = tmp_path / "out.pgm"
    assert cli_main(["detect", str(image_file), "-o", str(out)]) == 0
    np.testing.assert_array_equal(read_mask(out), run_pipeline(frame.degraded).road_mask)


def test_no_filters_flag_matches_config(image_file, tmp_path):
    cfg = tmp_path / "off.cfg"
    cfg.write_text("filters.shadow = off\nfilters.rainsnow = off\nfilters.specular = off\n")
    a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
    assert cli_main(["detect", str(image_file), "--no-filters", "-o", str(a)]) == 0
    assert cli_main(["detect", str(image_file), "--config", str(cfg), "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_dump_masks_option(image_file, tmp_path):
    d = tmp_path / "dump"
    assert cli_main(["detect", str(image_file), "--dump-masks", str(d), "-o", str(tmp_path / "m.pgm")]) == 0
    assert (d / "road.final_mask.pgm").exists() and (d / "road.post_shadow.ppm").exists()


def test_train_then_detect_with_model(image_file, tmp_path):
    model = tmp_path / "m.svm"
    assert cli_main(["train", str(image_file), "-o", str(model)]) == 0
    assert model.read_text().startswith("svm-linear v1\n")
    assert cli_main(["detect", str(image_file), "--model", str(model), "-o", str(tmp_path / "x.pgm")]) == 0


def test_synth_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert cli_main(["synth", "--kind", "rain", "--seed", "7", "--count", "2", "-o", str(d)]) == 0
    cmp = filecmp.dircmp(a, b)
    assert sorted(cmp.common_dirs) == ["clean", "degraded", "gt", "noise"]
    for sub in cmp.common_dirs:
        files = sorted(p.name for p in (a / sub).iterdir())
        assert len(files) == 2
        match, mismatch, errors = filecmp.cmpfiles(a / sub, b / sub, files, shallow=False)
        assert not mismatch and not errors


def test_eval_and_compare(tmp_path, capsys):
    pred = tmp_path / "pred"
    assert cli_main(["synth", "--kind", "shadow", "--seed", "1", "--count", "2", "-o", str(tmp_path / "c")]) == 0
    gt = tmp_path / "c" / "gt"
    pred.mkdir()
    for p in sorted((tmp_path / "c" / "degraded").iterdir()):
        assert cli_main(["detect", str(p), "-o", str(pred / (p.stem + ".pgm"))]) == 0
    assert cli_main(["eval", "--pred-dir", str(pred), "--gt-dir", str(gt), "-o", str(tmp_path / "run")]) == 0
    rep = EvalReport.from_csv((tmp_path / "run.report.csv").read_text())
    assert rep.names == ["shadow_000", "shadow_001"]
    assert cli_main(["compare", str(tmp_path / "run.report.csv"), str(tmp_path / "run")]) == 0
    assert "lower overall error" in capsys.readouterr().out


def test_eval_mismatch_exit_2(tmp_path, capsys):
    cli_main(["synth", "--kind", "rain", "--seed", "0", "--count", "2", "-o", str(tmp_path / "c")])
    pred = tmp_path / "pred"
    pred.mkdir()
    (pred / "rain_000.pgm").write_bytes((tmp_path / "c" / "gt" / "rain_000.pgm").read_bytes())
    code = cli_main(["eval", "--pred-dir", str(pred), "--gt-dir", str(tmp_path / "c" / "gt"), "-o", str(tmp_path / "r")])
    assert code == 2
    assert "rain_001.pgm" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["bogus"], ["detect"], ["eval", "--pred-dir", "x"],
                                  ["synth", "--kind", "fog", "-o", "x"],
                                  ["eval", "--pred-dir", "a", "--gt-dir", "b", "--group-size", "0", "-o", "r"]])
def test_usage_errors_exit_1(argv, capsys):
    assert cli_main(argv) == 1
    assert "usage" in capsys.readouterr().err


def test_data_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.ppm"
    bad.write_bytes(b"P3\n1 1\n255\n0 0 0\n")
    assert cli_main(["detect", str(bad), "-o", str(tmp_path / "o.pgm")]) == 2
    assert cli_main(["detect", str(tmp_path / "missing.ppm"), "-o", str(tmp_path / "o.pgm")]) == 2
    cfg = tmp_path / "c.cfg"
    cfg.write_text("nope.key = 1\n")
    assert cli_main(["train", str(bad), "--config", str(cfg), "-o", str(tmp_path / "m")]) == 2
    assert "nope.key" in capsys.readouterr().err
