"""``huf`` command-line entry point: synth, train, eval, analyze."""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from pathlib import Path

import numpy as np

from .analysis import (evaluate, export_plot_data, fir_equivalence_check, frequency_response,
                       sample_paths)
from .data import (apply_split, generate_synthetic, split_subjects, write_corpus_csv,
                   write_ground_truth)
from .errors import (CheckpointError, ConfigError, DataError, DimensionError, FreezeViolation,
                     NumericError, UsageError)
from .model import (HufCheckpoint, HufClassifier, HufFeatureExtractor, huf_forward,
                    load_checkpoint, save_checkpoint)
from .model.config import AXES
from .model.huf import STAGES
from .runconfig import RunConfig, load_dataset

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC, EXIT_CHECKPOINT = 0, 2, 3, 4, 5
FIR_TOLERANCE = 1e-9

log = logging.getLogger("hufae")


_FORMAT = logging.Formatter("%(asctime)s %(levelname)s %(message)s")


def _setup_logging():
    log.setLevel(logging.INFO)
    for h in list(log.handlers):
        log.removeHandler(h)
        h.close()
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(_FORMAT)
    log.addHandler(stream)


def _log_to(out, command):
    """Mirror the log into ``<out>/<command>.log``; called once inputs are validated."""
    Path(out).mkdir(parents=True, exist_ok=True)
    fh = logging.FileHandler(Path(out) / f"{command}.log", mode="w", encoding="utf-8")
    fh.setFormatter(_FORMAT)
    log.addHandler(fh)


def _run_config(args):
    """Config file (if any) with command-line flags layered on top."""
    data = {}
    if args.config:
        data = RunConfig.load(args.config).to_dict()
    if args.seed is not None:
        data["seed"] = args.seed
    if getattr(args, "jobs", None) is not None:
        data["jobs"] = args.jobs
    return RunConfig.from_dict(data)


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _split(rc, batch):
    plan = split_subjects(np.unique(batch.subject_ids), rc.split_fraction, rc.split_seed)
    return plan, *apply_split(batch, plan)


def _slug(name):
    return name.replace("/", "_")


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def cmd_synth(args):
    rc = _run_config(args)
    syn = dict(rc.synthetic)
    for key in ("n_units", "classes", "windows_per_class", "window_size"):
        val = getattr(args, key)
        if val is not None:
            syn[key] = val
    if args.noise_std is not None:
        syn["noise_std"] = args.noise_std
    if args.seed is not None:
        syn["seed"] = args.seed
    rc.synthetic = syn
    cfg = rc.synthetic_config()  # validates before anything touches the disk
    out = Path(args.out)
    batch, truth = generate_synthetic(cfg)
    _log_to(out, "synth")
    write_corpus_csv(batch, out / "synthetic.csv")
    write_ground_truth(truth, out / "ground_truth.json")
    log.info("synth windows=%d rows=%d out=%s", len(batch), len(batch) * cfg.window_size, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

def _export_curves(out, extractor, classifier):
    curves = Path(out) / "curves"
    curves.mkdir(parents=True, exist_ok=True)
    for block, hist in sorted(getattr(extractor, "history_", {}).items()):
        if "stages" in hist:
            for s in hist["stages"]:
                export_plot_data("loss_curve", s["curve"],
                                 curves / f"loss_{_slug(block)}_stage{s['stage']}.csv")
        else:
            export_plot_data("loss_curve", hist["curve"], curves / f"loss_{_slug(block)}.csv")
    if classifier is not None:
        export_plot_data("loss_curve", classifier.loss_curve_, curves / "loss_classifier.csv")


def cmd_train(args):
    rc = _run_config(args)
    out = Path(args.out)
    _log_to(out, "train")
    if args.config:
        shutil.copyfile(args.config, out / "config.input.json")
    _write_json(out / "run_config.json", rc.to_dict())
    batch = load_dataset(rc)
    plan, train, _ = _split(rc, batch)
    _write_json(out / "split.json", plan.to_dict())
    log.info("train windows=%d units=%d active=%s", len(train), batch.layout.n_units,
             list(batch.layout.active_mask))

    start = args.stage or "dr_sae"
    until = args.until or "classifier"
    if STAGES.index(until) < STAGES.index(start):
        raise UsageError(f"--until {until} comes before --stage {start}")
    if start != "dr_sae":
        if not args.resume:
            raise UsageError(f"--stage {start} needs --resume <checkpoint>")
        est = load_checkpoint(args.resume).to_estimator()
        extractor = est.extractor_ if isinstance(est, HufClassifier) else est
        if extractor.model_.layout.to_dict() != batch.layout.to_dict():
            raise ConfigError("checkpoint layout does not match the run configuration")
        extractor.n_jobs = rc.jobs
        extractor.verify_frozen = rc.verify_frozen
    else:
        extractor = HufFeatureExtractor(batch.layout, rc.huf_config(), rc.seed, rc.jobs,
                                        rc.verify_frozen)
    for stage in STAGES[STAGES.index(start):STAGES.index(until) + 1]:
        if stage == "classifier":
            continue
        if stage == "gff" and batch.layout.n_units == 1:
            log.info("stage=gff skipped (single unit)")
            extractor.model_.trained["gff"] = True
            continue
        log.info("stage=%s start", stage)
        extractor.fit_stage(train.windows, stage)
    clf = None
    if until == "classifier":
        est = HufClassifier(batch.layout, extractor.model_.config, rc.classifier_config().to_dict(),
                            rc.seed)
        est.extractor_ = extractor
        log.info("stage=classifier start")
        est.fit_classifier(train.windows, train.labels)
        clf = est.classifier_
        ckpt = HufCheckpoint.from_estimator(est, run_config=rc.to_dict())
    else:
        ckpt = HufCheckpoint.from_estimator(extractor, run_config=rc.to_dict())
    if args.resume and start != "dr_sae":
        prior = load_checkpoint(args.resume).metadata.get("training", {})
        ckpt.metadata["training"] = {**prior, **ckpt.metadata.get("training", {})}
    ckpt.metadata["seed"] = rc.seed
    save_checkpoint(ckpt, out / "checkpoint")
    _export_curves(out, extractor, clf)
    log.info("train done checkpoint=%s", out / "checkpoint")
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _checkpoint_run_config(args, ckpt):
    if args.config:
        return _run_config(args)
    if not ckpt.run_config:
        raise ConfigError("checkpoint carries no run config; pass --config")
    return RunConfig.from_dict(ckpt.run_config)


def cmd_eval(args):
    ckpt = load_checkpoint(args.checkpoint)
    est = ckpt.to_estimator()
    if not isinstance(est, HufClassifier):
        raise UsageError("checkpoint has no trained classifier")
    rc = _checkpoint_run_config(args, ckpt)
    layout = est.extractor_.model_.layout
    mask = None
    if args.mask_unit is not None:
        if not 0 <= args.mask_unit < layout.n_units:
            raise ConfigError(f"--mask-unit {args.mask_unit} out of range "
                              f"(layout has {layout.n_units} units)")
        mask = [j != args.mask_unit for j in range(layout.n_units)]
    batch = load_dataset(rc)
    if batch.layout.to_dict() != layout.to_dict():
        raise ConfigError("data layout does not match the checkpoint")
    _, train, test = _split(rc, batch)
    part = {"train": train, "test": test, "all": batch}[args.split]
    pred = est.predict(part.windows, mask=mask)
    report = evaluate(pred, part.labels, classes=list(est.classes_))
    out = Path(args.out)
    _log_to(out, "eval")
    suffix = f"_mask{args.mask_unit}" if args.mask_unit is not None else ""
    export_plot_data("report", report, out / f"report_{args.split}{suffix}.json")
    export_plot_data("confusion", report, out / f"confusion_{args.split}{suffix}.json")
    with (out / f"confusion_{args.split}{suffix}.csv").open("w", encoding="utf-8") as fh:
        fh.write("true\\pred," + ",".join(report.class_names) + "\n")
        for name, row in zip(report.class_names, report.confusion):
            fh.write(name + "," + ",".join(str(int(v)) for v in row) + "\n")
    print(f"accuracy={report.accuracy:.6f} split={args.split} windows={len(part)}"
          + (f" masked_unit={args.mask_unit}" if mask else ""))
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def _dr_block(model, block):
    keys = model.dr_keys()
    block = block or keys[0]
    if block not in model.dr_saes:
        raise ConfigError(f"unknown DR-SAE block {block!r}; choose from {keys}")
    if not model.trained["dr_sae"]:
        raise UsageError("the DR-SAE block is not trained in this checkpoint")
    return block, model.dr_saes[block]


def cmd_analyze(args):
    ckpt = load_checkpoint(args.checkpoint)
    model = ckpt.model
    block, net = _dr_block(model, args.block)
    out = Path(args.out)
    _log_to(out, "analyze")
    if args.what == "fir":
        rng = np.random.default_rng(args.seed or 0)
        if args.check:
            x = rng.normal(size=args.length)
            dev = fir_equivalence_check(net, x)
            print(f"max_deviation={dev:.3e} block={block}")
            return EXIT_OK if dev < FIR_TOLERANCE else EXIT_NUMERIC
        paths = sample_paths(net, args.paths, args.seed or 0, "composed")
        _write_json(out / f"fir_{_slug(block)}_seed{args.seed or 0}.json",
                    {"block": block, "paths": [
                        {"indices": list(p.indices), "kernel": p.kernel.tolist()}
                        for p in paths]})
    elif args.what == "spectrum":
        seed = args.seed or 0
        paths = sample_paths(net, args.paths, seed, args.mode)
        rate = ckpt.run_config.get("sample_rate_hz", 1.0) if ckpt.run_config else 1.0
        for i, p in enumerate(paths):
            resp = frequency_response(p, args.n_fft, rate)
            export_plot_data("freq_response", resp,
                             out / f"spectrum_{_slug(block)}_{args.mode}_seed{seed}_path{i}.csv")
        print(f"spectra={len(paths)} block={block}")
    elif args.what == "features":
        rc = _checkpoint_run_config(args, ckpt)
        batch = load_dataset(rc)
        if not 0 <= args.window < len(batch):
            raise ConfigError(f"--window {args.window} out of range ({len(batch)} windows)")
        unit, axis = _block_channel(model, block)
        feats = huf_forward(batch.windows[args.window:args.window + 1], model)
        codes = feats.per_axis_codes[0, 6 * unit + axis]
        if not 1 <= args.channels <= codes.shape[0]:
            raise ConfigError(f"--channels must be between 1 and {codes.shape[0]}")
        chans = list(range(args.channels))
        raw = batch.windows[args.window, 6 * unit + axis]
        export_plot_data("feature_dump", {"raw": raw, "codes": codes[chans], "channels": chans},
                         out / f"features_{_slug(block)}_window{args.window}.csv")
    return EXIT_OK


def _block_channel(model, block):
    if model.config.share_axis_weights:
        unit = int(np.flatnonzero(model.resolve_mask())[0])
        return unit, AXES.index(block)
    unit_name, axis = block.split("/")
    return model.layout.unit_names.index(unit_name), AXES.index(axis)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _shared(p, out_required=True):
    p.add_argument("--config", help="run configuration JSON")
    p.add_argument("--seed", type=int, help="seed (overrides the config)")
    p.add_argument("--out", required=out_required, help="output directory")
    p.add_argument("--jobs", type=int, help="worker processes for independent blocks")


def build_parser():
    parser = argparse.ArgumentParser(prog="huf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write the synthetic corpus as CSV")
    _shared(p)
    p.add_argument("--n-units", dest="n_units", type=int)
    p.add_argument("--classes", type=int)
    p.add_argument("--windows-per-class", dest="windows_per_class", type=int)
    p.add_argument("--window-size", dest="window_size", type=int)
    p.add_argument("--noise-std", dest="noise_std", type=float)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the feature hierarchy and classifier")
    _shared(p)
    p.add_argument("--stage", choices=STAGES, help="first stage to run (needs --resume)")
    p.add_argument("--until", choices=STAGES, help="last stage to run")
    p.add_argument("--resume", help="checkpoint directory to continue from")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint")
    _shared(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split", choices=("train", "test", "all"), default="test")
    p.add_argument("--mask-unit", dest="mask_unit", type=int,
                   help="zero this unit's fused code at evaluation time")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze", help="FIR / spectrum / feature exports")
    _shared(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--block", help="DR-SAE block key (default: the first)")
    asub = p.add_subparsers(dest="what", required=True)
    seed_flag = argparse.ArgumentParser(add_help=False)
    seed_flag.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    a = asub.add_parser("fir", parents=[seed_flag])
    a.add_argument("--check", action="store_true", help="verify path-sum equivalence")
    a.add_argument("--paths", type=int, default=6)
    a.add_argument("--length", type=int, default=128)
    a = asub.add_parser("spectrum", parents=[seed_flag])
    a.add_argument("--paths", type=int, default=6)
    a.add_argument("--n-fft", dest="n_fft", type=int, default=512)
    a.add_argument("--mode", choices=("composed", "code_kernel"), default="composed")
    a = asub.add_parser("features", parents=[seed_flag])
    a.add_argument("--window", type=int, default=0)
    a.add_argument("--channels", type=int, default=6)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging()
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (DataError, DimensionError) as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA
    except (NumericError, FreezeViolation) as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    except CheckpointError as exc:
        log.error("checkpoint error: %s", exc)
        return EXIT_CHECKPOINT
    finally:
        for h in list(log.handlers):
            h.flush()


if __name__ == "__main__":
    sys.exit(main())
