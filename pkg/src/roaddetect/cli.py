"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error (bad files, bad config,
pipeline failure).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import PipelineConfig, load_config
from .errors import RoadDetectError
from .evaluate import EvalReport, batch_eval, compare_runs, match_directories
from .netpbm import read_ppm, write_pgm, write_ppm
from .pipeline import dump_intermediates, run_pipeline, train_model, apply_filters
from .svm import dumps_model, loads_model
from .synth import KINDS, make_frame

log = logging.getLogger("roaddetect")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _config(path) -> PipelineConfig:
    return load_config(path) if path else PipelineConfig()


def cmd_detect(args) -> int:
    cfg = _config(args.config)
    if args.no_filters:
        cfg = cfg.without_filters()
    model = loads_model(Path(args.model).read_text()) if args.model else None
    img = read_ppm(args.image)
    result = run_pipeline(img, cfg, model)
    write_pgm(args.output, result.road_mask)
    dump_dir = args.dump_masks
    if dump_dir is None and cfg.dump_masks:
        dump_dir = Path(args.output).parent
    if dump_dir is not None:
        dump_intermediates(result, dump_dir, Path(args.image).stem)
    log.info("wrote %s (%d road pixels)", args.output, int(result.road_mask.sum()))
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args.config)
    filtered = apply_filters(read_ppm(args.image), cfg)
    model = train_model(filtered, cfg)
    Path(args.output).write_text(dumps_model(model))
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.group_size < 1:
        raise _UsageError("--group-size must be >= 1")
    pairs = match_directories(args.pred_dir, args.gt_dir)
    meta = {"pred_dir": args.pred_dir, "gt_dir": args.gt_dir}
    if args.config:
        meta["config_digest"] = load_config(args.config).digest()
    report = batch_eval(pairs, args.group_size, meta)
    txt, _ = report.write(args.output)
    sys.stdout.write(txt.read_text())
    return EXIT_OK


def _read_report(path) -> EvalReport:
    p = Path(path)
    if not p.exists() and Path(str(p) + ".report.csv").exists():
        p = Path(str(p) + ".report.csv")
    return EvalReport.from_csv(p.read_text())


def cmd_compare(args) -> int:
    a, b = _read_report(args.a), _read_report(args.b)
    summary = compare_runs(a, b, args.label_a, args.label_b)
    sys.stdout.write(summary.render_text())
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.count < 1:
        raise _UsageError("--count must be >= 1")
    root = Path(args.output)
    for sub in ("degraded", "clean", "noise", "gt"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        fr = make_frame(args.kind, i, args.seed)
        write_ppm(root / "degraded" / f"{fr.name}.ppm", fr.degraded)
        write_ppm(root / "clean" / f"{fr.name}.ppm", fr.clean)
        write_pgm(root / "noise" / f"{fr.name}.pgm", fr.noise)
        write_pgm(root / "gt" / f"{fr.name}.pgm", fr.road)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="roaddetect", description="Road segmentation with weather filters.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("detect", help="segment the road in one P6 image")
    d.add_argument("image")
    d.add_argument("--config")
    d.add_argument("--no-filters", action="store_true", help="skip all three filters")
    d.add_argument("--dump-masks", metavar="DIR", help="write intermediate images and masks here")
    d.add_argument("--model", help="use a pre-trained model instead of per-image training")
    d.add_argument("-o", "--output", required=True)
    d.set_defaults(func=cmd_detect)

    t = sub.add_parser("train", help="fit the classifier on one image's seed regions")
    t.add_argument("image")
    t.add_argument("--config")
    t.add_argument("-o", "--output", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="score predicted masks against ground truth")
    e.add_argument("--pred-dir", required=True)
    e.add_argument("--gt-dir", required=True)
    e.add_argument("--group-size", type=int, default=3)
    e.add_argument("--config", help="record this config's digest in the report")
    e.add_argument("-o", "--output", required=True, help="report base path")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("compare", help="with/without table from two report CSVs")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--label-a", default="A")
    c.add_argument("--label-b", default="B")
    c.set_defaults(func=cmd_compare)

    s = sub.add_parser("synth", help="generate a degraded synthetic corpus")
    s.add_argument("--kind", choices=KINDS, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=10)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_synth)
    return p


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"roaddetect: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RoadDetectError, OSError, ValueError) as exc:
        print(f"roaddetect: {exc}", file=sys.stderr)
        return EXIT_DATA


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
