"""``dnt`` command-line entry point.

Exit codes: 0 success, 1 a verification check failed, 2 usage, config or IO
error. Every command is non-interactive and writes only to its output or run
directory plus stdout/stderr.
"""

import argparse
import csv
import logging
import os
import sys
from contextlib import ExitStack

from threadpoolctl import threadpool_limits

from . import __version__
from .config import RunConfig
from .data.augment import AugmentationConfig
from .data.manifest import DatasetManifest
from .data.netpbm import load_image
from .data.synth import synth_texture_dataset
from .errors import DntError
from .lbp import DEFAULT_CONFIGS, LbpConfig, texture_descriptor

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("dnt")


class CliError(DntError):
    """Usage problem detected by the CLI itself."""


def _warn(msg):
    print(f"dnt: warning: {msg}", file=sys.stderr)


def _run_config(args):
    cfg = RunConfig.load(getattr(args, "config", None), getattr(args, "override", None) or (),
                         getattr(args, "preset_config", None))
    if args.seed is not None:
        cfg.set("run.seed", args.seed)
    if args.deterministic:
        cfg.set("run.deterministic", True)
    if args.threads is not None:
        cfg.set("run.threads", args.threads)
    return cfg


def _manifest(path):
    if not path:
        raise CliError("no manifest given (use --manifest or data.manifest in the config)")
    try:
        return DatasetManifest.read(path)
    except OSError as exc:
        raise CliError(f"{path}: cannot read manifest ({exc.strerror})") from None


def _run_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise CliError(f"{path}: cannot create run directory ({exc.strerror})") from None
    return path


def _write_resolved(cfg, run_dir):
    with open(os.path.join(run_dir, "resolved-config"), "w", encoding="utf-8") as fh:
        fh.write(cfg.dumps())


# ----- commands ---------------------------------------------------------------------------
def cmd_synth(args):
    seed = args.seed if args.seed is not None else 1
    try:
        path = synth_texture_dataset(args.out, args.classes, args.per_class, args.size, args.sigma,
                                     seed, args.split)
    except OSError as exc:
        raise CliError(f"{args.out}: cannot write dataset ({exc.strerror or exc})") from None
    manifest = DatasetManifest.read(path)
    n_train, n_test = len(manifest.split("train")), len(manifest.split("test"))
    print(path)
    print(f"{len(manifest.records)} images in {manifest.num_classes} classes "
          f"({n_train} train, {n_test} test)")
    return EXIT_OK


def cmd_extract_lbp(args):
    configs = [LbpConfig.parse(c) for c in args.configs] if args.configs else list(DEFAULT_CONFIGS)
    if args.manifest:
        manifest = _manifest(args.manifest)
        paths = [(r.path, manifest.resolve(r)) for r in manifest.records]
    else:
        paths = [(p, p) for p in args.images]
    if not paths:
        raise CliError("no images given (pass image paths or --manifest)")
    width = 256 * len(configs)
    rows, failed = [], 0
    for shown, real in paths:
        try:
            desc = texture_descriptor(load_image(real), configs, normalize=not args.no_normalize)
        except DntError as exc:
            _warn(f"skipping {shown}: {exc}")
            failed += 1
            continue
        rows.append([shown] + [repr(float(v)) for v in desc.values])
    if not rows:
        raise CliError(f"all {failed} images failed to decode")
    out = sys.stdout if args.out in (None, "-") else None
    try:
        fh = out or open(args.out, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise CliError(f"{args.out}: cannot write ({exc.strerror})") from None
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["path"] + [f"f{j}" for j in range(width)])
        writer.writerows(rows)
    finally:
        if out is None:
            fh.close()
    if out is None:
        print(f"{len(rows)} descriptors x {width} columns -> {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_train(args):
    from .model import DntModel
    from .train import train, evaluate

    cfg = _run_config(args)
    if args.manifest:
        cfg.set("data.manifest", args.manifest)
    manifest = _manifest(cfg["data"]["manifest"])
    model_cfg = cfg.model_config(manifest.num_classes)
    run_dir = _run_dir(args.run_dir)
    _write_resolved(cfg, run_dir)
    model = DntModel(model_cfg)
    aug = cfg.augmentation_config()
    epoch_log = train(model, manifest, cfg.train_config(), aug, run_dir)
    last = epoch_log.rows[-1]
    print(f"trained {len(epoch_log.rows)} epochs: final loss {last[2]:.4f}, "
          f"train acc {last[3]:.2f}%")
    if manifest.split("test") and not args.no_eval:
        report = evaluate(model, manifest, aug_cfg=aug, run_dir=run_dir)
        print(f"test top1 {report.top1_accuracy:.2f}%")
    print(run_dir)
    return EXIT_OK


def cmd_eval(args):
    from .model import load
    from .train import evaluate

    path = args.checkpoint
    if os.path.isdir(path):
        path = os.path.join(path, "checkpoint.dnt")
    if not os.path.isfile(path):
        raise CliError(f"{args.checkpoint}: no checkpoint found")
    model = load(path)
    manifest = _manifest(args.manifest)
    if manifest.num_classes != model.config.num_classes:
        raise CliError(f"checkpoint has {model.config.num_classes} classes, manifest has "
                       f"{manifest.num_classes}")
    run_dir = _run_dir(args.run_dir or os.path.dirname(os.path.abspath(path)))
    aug = AugmentationConfig(crop_size=model.config.input_size)
    report = evaluate(model, manifest, args.split, aug_cfg=aug, run_dir=run_dir)
    print(f"top1 {report.top1_accuracy:.2f}%  macro precision {report.macro_precision:.2f}%  "
          f"macro recall {report.macro_recall:.2f}%")
    print(os.path.join(run_dir, "metrics.json"))
    return EXIT_OK


def cmd_ablation(args):
    from .train.ablation import preset, run_ablation, ablation_csv

    cfg = _run_config(args)
    if args.manifest:
        cfg.set("data.manifest", args.manifest)
    rows = preset(args.preset)
    manifest = _manifest(cfg["data"]["manifest"])
    run_dir = _run_dir(args.run_dir)
    _write_resolved(cfg, run_dir)
    results = run_ablation(rows, cfg.model_config(manifest.num_classes), cfg.train_config(),
                           cfg.augmentation_config(), manifest, run_dir, log=log.info)
    sys.stdout.write(ablation_csv(results))
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_suite

    results = run_suite(args.suite)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed} passed, {failed} failed")
    return EXIT_OK if failed == 0 else EXIT_CHECK


# ----- parser -----------------------------------------------------------------------------
def build_parser():
    p = argparse.ArgumentParser(prog="dnt", description="DNT texture classifier toolkit.")
    p.add_argument("--version", action="version", version=f"dnt {__version__}")
    p.add_argument("--seed", type=int, default=None, help="override run.seed")
    p.add_argument("--deterministic", action="store_true",
                   help="single-threaded BLAS so runs repeat bit for bit")
    p.add_argument("--threads", type=int, default=None, help="BLAS thread limit")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic texture dataset")
    s.add_argument("--classes", type=int, default=4)
    s.add_argument("--per-class", type=int, default=70)
    s.add_argument("--size", type=int, default=64)
    s.add_argument("--sigma", type=float, default=20.0)
    s.add_argument("--split", type=float, default=0.6, help="train fraction per class")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("extract-lbp", help="write LBP texture descriptors as CSV")
    s.add_argument("images", nargs="*")
    s.add_argument("--manifest")
    s.add_argument("--configs", nargs="+", metavar="P,R", help="default: 8,1 8,2 16,1 16,2")
    s.add_argument("--no-normalize", action="store_true")
    s.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    s.set_defaults(func=cmd_extract_lbp)

    def run_args(s):
        s.add_argument("--config", help="config file")
        s.add_argument("--override", action="append", metavar="SECTION.KEY=VALUE")
        s.add_argument("--preset-config", help="named config preset (desk, paper-geometry)")
        s.add_argument("--manifest", help="overrides data.manifest")
        s.add_argument("--run-dir", required=True)

    s = sub.add_parser("train", help="train a model")
    run_args(s)
    s.add_argument("--no-eval", action="store_true", help="skip the test-split evaluation")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="evaluate a checkpoint")
    s.add_argument("--checkpoint", required=True, help="checkpoint file or run directory")
    s.add_argument("--manifest", required=True)
    s.add_argument("--split", default="test", choices=["train", "test"])
    s.add_argument("--run-dir", help="default: the checkpoint's directory")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("ablation", help="run an ablation preset")
    run_args(s)
    s.add_argument("--preset", default="abln-paper")
    s.set_defaults(func=cmd_ablation)

    s = sub.add_parser("verify", help="run the self-check suites")
    s.add_argument("--suite", default="all", choices=["lbp", "grad", "invariants", "all"])
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be >= 1")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    threads = 1 if args.deterministic else args.threads
    try:
        with ExitStack() as stack:
            if threads:
                stack.enter_context(threadpool_limits(limits=threads))
            return args.func(args)
    except (DntError, OSError) as exc:
        print(f"dnt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
