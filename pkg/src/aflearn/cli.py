"""Command-line entry points: dataset generation, training, evaluation, and
single-file echo cancellation.

Exit codes
    0  success
    2  configuration error (bad config/field, unsupported format, bad usage)
    3  numeric failure (divergence, undefined metric)
    4  I/O error (missing/corrupt files)

CSV schemas
    training curve   epoch,train_loss,val_serle_db,lr,seconds
    per-scene eval   scene,seed,split,algorithm,serle_db,erle_db,frames
    eval summary     algorithm,split,scenes,mean_serle_db,ci_lo_db,ci_hi_db
    sweep            checkpoint,structure,hidden_size,scenes,mean_serle_db,
                     ci_lo_db,ci_hi_db,flops_per_frame

Telemetry (``--telemetry``) is JSON lines, one object per processed frame:
{"frame": int, "erle_db": float, "residual_power": float}.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .errors import ConfigError, MetricUndefinedError, NumericError
from .flops import flops_per_frame
from .metrics import bootstrap_mean_ci, serle_db
from .ols import OlsConfig
from .scenes import (
    SceneSpec,
    desk_spec,
    gen_scene,
    load_scene,
    read_wav,
    save_scene,
    spec_from_json,
    spec_to_json,
    write_wav,
)
from .session import CLASSIC_ALGORITHMS, run_classic_session, run_learned_session
from .structures import DependencyStructure
from .training import TrainSchedule, train_update_rule

__all__ = ["main", "build_parser", "validate_train_config", "TRAIN_DEFAULTS"]

_SCHEDULE_DEFAULTS = {
    "lr": TrainSchedule.lr,
    "lr_decay": TrainSchedule.decay,
    "plateau_patience": TrainSchedule.plateau_patience,
    "stop_patience": TrainSchedule.stop_patience,
    "clip": TrainSchedule.clip_norm,
}

TRAIN_DEFAULTS = {
    "structure": "diagonal",
    "hidden_size": 16,
    "dft_size": 512,
    "hop": None,  # dft_size // 2 when omitted
    "sample_rate": 16000,
    "scenes": {"preset": "desk", "overrides": {}, "manifest": None},
    "train_scenes": 200,
    "val_scenes": 20,
    "seed": 0,
    "epochs": 20,
    "batch_size": 8,
    "unroll": 20,
    "schedule": dict(_SCHEDULE_DEFAULTS),
    "checkpoint": "aflearn.ckpt",
    "curve_csv": None,
    "resume": None,
}

_VAL_SEED_OFFSET = 1_000_000  # keeps validation scene seeds out of the train range


def _require(condition, field, message):
    if not condition:
        raise ConfigError(field, message)


def _check_number(value, field, kind=float, minimum=None):
    if kind is int:
        _require(isinstance(value, int) and not isinstance(value, bool), field,
                 f"expected an integer, got {value!r}")
    else:
        _require(isinstance(value, (int, float)) and not isinstance(value, bool),
                 field, f"expected a number, got {value!r}")
    if minimum is not None:
        _require(value >= minimum, field, f"must be >= {minimum}, got {value}")
    return kind(value)


def validate_train_config(raw):
    """Merge ``raw`` over the defaults and validate every field.

    Returns the canonical config dict; raises ConfigError naming the
    offending field otherwise.
    """
    _require(isinstance(raw, dict), "config", "top level must be a JSON object")
    for key in raw:
        _require(key in TRAIN_DEFAULTS, key, "unknown field")

    out = json.loads(json.dumps(TRAIN_DEFAULTS))  # deep copy
    for key, value in raw.items():
        if key in ("scenes", "schedule"):
            _require(isinstance(value, dict), key, "must be an object")
            for sub in value:
                _require(sub in out[key], f"{key}.{sub}", "unknown field")
            out[key].update(value)
        else:
            out[key] = value

    _require(isinstance(out["structure"], str), "structure", "must be a string")
    structure = DependencyStructure.parse(out["structure"])

    out["hidden_size"] = _check_number(out["hidden_size"], "hidden_size", int, 1)
    out["dft_size"] = _check_number(out["dft_size"], "dft_size", int, 2)
    if out["hop"] is None:
        out["hop"] = out["dft_size"] // 2
    out["hop"] = _check_number(out["hop"], "hop", int, 1)
    out["sample_rate"] = _check_number(out["sample_rate"], "sample_rate", int, 1)
    try:
        OlsConfig(out["dft_size"], out["hop"], out["sample_rate"])
    except ValueError as exc:
        raise ConfigError("dft_size", str(exc)) from None
    structure.group_count(out["dft_size"])  # names the offending width field

    scenes = out["scenes"]
    if scenes["manifest"] is None:
        _require(scenes["preset"] in ("desk", "default"), "scenes.preset",
                 f"expected 'desk' or 'default', got {scenes['preset']!r}")
        _require(isinstance(scenes["overrides"], dict), "scenes.overrides",
                 "must be an object")
        try:
            _resolve_spec_preset(scenes["preset"], scenes["overrides"])
        except (TypeError, ConfigError) as exc:
            raise ConfigError("scenes.overrides", str(exc)) from None
    else:
        _require(isinstance(scenes["manifest"], str), "scenes.manifest",
                 "must be a path string")

    out["train_scenes"] = _check_number(out["train_scenes"], "train_scenes", int, 1)
    out["val_scenes"] = _check_number(out["val_scenes"], "val_scenes", int, 1)
    out["seed"] = _check_number(out["seed"], "seed", int, 0)
    out["epochs"] = _check_number(out["epochs"], "epochs", int, 1)
    out["batch_size"] = _check_number(out["batch_size"], "batch_size", int, 1)
    out["unroll"] = _check_number(out["unroll"], "unroll", int, 1)
    _require(out["train_scenes"] < _VAL_SEED_OFFSET, "train_scenes",
             f"must stay below {_VAL_SEED_OFFSET}")

    sched = out["schedule"]
    sched["lr"] = _check_number(sched["lr"], "schedule.lr", float, 0.0)
    sched["lr_decay"] = _check_number(sched["lr_decay"], "schedule.lr_decay", float, 0.0)
    _require(sched["lr_decay"] <= 1.0, "schedule.lr_decay", "must be <= 1")
    sched["plateau_patience"] = _check_number(
        sched["plateau_patience"], "schedule.plateau_patience", int, 1
    )
    sched["stop_patience"] = _check_number(
        sched["stop_patience"], "schedule.stop_patience", int, 1
    )
    sched["clip"] = _check_number(sched["clip"], "schedule.clip", float, 0.0)

    _require(isinstance(out["checkpoint"], str) and out["checkpoint"],
             "checkpoint", "must be a path string")
    if out["curve_csv"] is not None:
        _require(isinstance(out["curve_csv"], str), "curve_csv", "must be a path string")
    if out["resume"] is not None:
        _require(isinstance(out["resume"], str), "resume", "must be a path string")
    return out


def _resolve_spec_preset(preset, overrides):
    overrides = {key: tuple(v) if isinstance(v, list) else v for key, v in overrides.items()}
    if preset == "desk":
        return desk_spec(**overrides)
    return SceneSpec(**overrides)


def _load_json(path, field):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(field, f"{path}: invalid JSON ({exc})") from None


def _load_spec_argument(spec_arg):
    if spec_arg in ("desk", "default"):
        return _resolve_spec_preset(spec_arg, {})
    raw = _load_json(spec_arg, "spec")
    try:
        return spec_from_json(raw)
    except TypeError as exc:
        raise ConfigError("spec", f"{spec_arg}: {exc}") from None


def _split_counts(count, ratios):
    """Largest-remainder allocation of ``count`` scenes over the ratios."""
    total = sum(ratios)
    exact = [count * r / total for r in ratios]
    base = [int(x) for x in exact]
    for _ in range(count - sum(base)):
        idx = max(range(len(ratios)), key=lambda i: (exact[i] - base[i], -i))
        base[idx] += 1
    return base


# ---------------------------------------------------------------------------
# gen-data


def cmd_gen_data(args):
    spec = _load_spec_argument(args.spec)
    try:
        ratios = [int(x) for x in args.split.split(",")]
        if len(ratios) != 3 or any(r < 0 for r in ratios) or sum(ratios) == 0:
            raise ValueError
    except ValueError:
        raise ConfigError("split", f"expected three ratios like 8,1,1, got {args.split!r}")
    if args.count < 1:
        raise ConfigError("count", "must be at least 1")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_train, n_val, n_test = _split_counts(args.count, ratios)
    splits = ["train"] * n_train + ["val"] * n_val + ["test"] * n_test

    entries = []
    for i, split in enumerate(splits):
        seed = args.seed + i
        stem = f"scene_{i:05d}"
        save_scene(gen_scene(spec, seed), out_dir, stem)
        entries.append({"stem": stem, "seed": seed, "split": split})

    manifest = {
        "schema": 1,
        "seed": args.seed,
        "spec": spec_to_json(spec),
        "split_counts": {"train": n_train, "val": n_val, "test": n_test},
        "scenes": entries,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(path)
    return 0


# ---------------------------------------------------------------------------
# train


def _manifest_seeds(manifest_path):
    manifest = _load_json(manifest_path, "scenes.manifest")
    spec = spec_from_json(manifest["spec"])
    by_split = {"train": [], "val": [], "test": []}
    for entry in manifest["scenes"]:
        by_split[entry["split"]].append(entry["seed"])
    return spec, by_split


_ARTIFACT_KEYS = ("resume", "checkpoint", "curve_csv")  # not part of the run identity


def _checkpoint_metadata(config, state=None):
    meta = {
        "hop": config["hop"],
        "sample_rate": config["sample_rate"],
        "config": {k: v for k, v in config.items() if k not in _ARTIFACT_KEYS},
    }
    if state is not None:
        meta["schedule_state"] = state
    return meta


def cmd_train(args):
    raw = _load_json(args.config, "config")
    config = validate_train_config(raw)
    structure = DependencyStructure.parse(config["structure"])
    cfg = OlsConfig(config["dft_size"], config["hop"], config["sample_rate"])
    schedule = TrainSchedule(
        lr=config["schedule"]["lr"],
        decay=config["schedule"]["lr_decay"],
        plateau_patience=config["schedule"]["plateau_patience"],
        stop_patience=config["schedule"]["stop_patience"],
        clip_norm=config["schedule"]["clip"],
    )

    if config["scenes"]["manifest"] is not None:
        spec, by_split = _manifest_seeds(config["scenes"]["manifest"])
        train_seeds = by_split["train"]
        val_seeds = by_split["val"] or by_split["test"]
        _require(train_seeds, "scenes.manifest", "manifest has no train scenes")
        _require(val_seeds, "scenes.manifest", "manifest has no val/test scenes")
        if spec.sample_rate != config["sample_rate"]:
            raise ConfigError("sample_rate",
                              f"manifest scenes are {spec.sample_rate} Hz")
    else:
        spec = _resolve_spec_preset(config["scenes"]["preset"],
                                    config["scenes"]["overrides"])
        base = config["seed"]
        train_seeds = [base + i for i in range(config["train_scenes"])]
        val_seeds = [base + _VAL_SEED_OFFSET + i for i in range(config["val_scenes"])]

    resume = None
    if config["resume"]:
        params, header = load_checkpoint(config["resume"])
        if params.structure != structure or params.hidden_size != config["hidden_size"]:
            raise ConfigError(
                "resume",
                f"checkpoint is {params.structure.label}/H={params.hidden_size}, "
                f"config wants {structure.label}/H={config['hidden_size']}",
            )
        state = header.get("metadata", {}).get("schedule_state")
        _require(state is not None, "resume", "checkpoint has no schedule state")
        resume = {"params": params, **state}

    ckpt_path = Path(config["checkpoint"])
    if ckpt_path.parent != Path("."):
        ckpt_path.parent.mkdir(parents=True, exist_ok=True)

    curve = None
    writer = None
    if config["curve_csv"]:
        Path(config["curve_csv"]).parent.mkdir(parents=True, exist_ok=True)
        curve = open(config["curve_csv"], "w", newline="")
        writer = csv.DictWriter(
            curve, fieldnames=["epoch", "train_loss", "val_serle_db", "lr", "seconds"]
        )
        writer.writeheader()

    def log_row(row):
        print(
            f"epoch {row['epoch']:3d}  loss {row['train_loss']:+.4f}  "
            f"val SERLE {row['val_serle_db']:6.2f} dB  lr {row['lr']:.2e}  "
            f"{row['seconds']:.1f}s"
        )
        if writer:
            writer.writerow(row)
            curve.flush()

    def save_progress(best_params, state):
        save_checkpoint(ckpt_path, best_params, dft_size=cfg.dft_size,
                        metadata=_checkpoint_metadata(config, state))

    try:
        best, history = train_update_rule(
            structure,
            config["hidden_size"],
            cfg,
            spec,
            train_seeds,
            val_seeds,
            schedule=schedule,
            epochs=config["epochs"],
            batch_size=config["batch_size"],
            unroll=config["unroll"],
            init_seed=config["seed"],
            log=log_row,
            checkpoint_cb=save_progress,
            resume=resume,
        )
    except NumericError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        if ckpt_path.exists():
            print(f"last good checkpoint kept at {ckpt_path}", file=sys.stderr)
        return 3
    finally:
        if curve:
            curve.close()

    print(ckpt_path)
    return 0


# ---------------------------------------------------------------------------
# eval


def _target_kind(target):
    return "baseline" if target in CLASSIC_ALGORITHMS else "checkpoint"


def _session_config_for(target, dft_size, sample_rate):
    if _target_kind(target) == "baseline":
        return OlsConfig(dft_size, dft_size // 2, sample_rate), None
    params, header = load_checkpoint(target)
    k = header.get("dft_size") or dft_size
    hop = header.get("metadata", {}).get("hop", k // 2)
    rate = header.get("metadata", {}).get("sample_rate", sample_rate)
    return OlsConfig(k, hop, rate), params


def _eval_scene_task(task):
    """Evaluate one scene; module-level so --jobs workers can pickle it."""
    (directory, stem, seed, split, target, hyper, dft_size, sample_rate) = task
    cfg, params = _session_config_for(target, dft_size, sample_rate)
    scene = load_scene(directory, stem)
    if scene.spec.sample_rate != cfg.sample_rate:
        raise ConfigError("sample_rate",
                          f"{stem}: scene is {scene.spec.sample_rate} Hz, "
                          f"session expects {cfg.sample_rate} Hz")
    if params is None:
        result = run_classic_session(target, scene.far_end, scene.mic, cfg, hyper=hyper)
        label = target
    else:
        result = run_learned_session(params, scene.far_end, scene.mic, cfg)
        label = Path(target).stem
    n = result.output.size
    echo = scene.echo[:n]
    try:
        serle = round(serle_db(echo, echo - result.output, cfg.hop), 4)
    except MetricUndefinedError:
        serle = ""
    return {
        "scene": stem,
        "seed": seed,
        "split": split,
        "algorithm": label,
        "serle_db": serle,
        "erle_db": round(result.mean_erle_db, 4),
        "frames": result.frames,
    }


EVAL_COLUMNS = ["scene", "seed", "split", "algorithm", "serle_db", "erle_db", "frames"]
SUMMARY_COLUMNS = ["algorithm", "split", "scenes", "mean_serle_db", "ci_lo_db", "ci_hi_db"]
SWEEP_COLUMNS = [
    "checkpoint", "structure", "hidden_size", "scenes",
    "mean_serle_db", "ci_lo_db", "ci_hi_db", "flops_per_frame",
]


def _manifest_entries(manifest_arg, split):
    path = Path(manifest_arg)
    if path.is_dir():
        path = path / "manifest.json"
    manifest = _load_json(path, "manifest")
    entries = [e for e in manifest["scenes"] if split in ("all", e["split"])]
    if not entries:
        raise ConfigError("split", f"no scenes in split {split!r}")
    return path.parent, entries


def _run_eval(directory, entries, target, hyper, args):
    tasks = [
        (str(directory), e["stem"], e["seed"], e["split"], target, hyper,
         args.dft_size, args.sample_rate)
        for e in entries
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_eval_scene_task, tasks))
    else:
        rows = [_eval_scene_task(task) for task in tasks]
    return rows


def _summarize(rows, split):
    values = [row["serle_db"] for row in rows if row["serle_db"] != ""]
    if not values:
        raise MetricUndefinedError("no scene produced a defined echo-suppression score")
    mean, lo, hi = bootstrap_mean_ci(np.array(values, dtype=float))
    return {
        "algorithm": rows[0]["algorithm"],
        "split": split,
        "scenes": len(values),
        "mean_serle_db": round(mean, 4),
        "ci_lo_db": round(lo, 4),
        "ci_hi_db": round(hi, 4),
    }


def _write_csv(path, columns, rows):
    path = Path(path)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def cmd_eval(args):
    hyper = json.loads(args.hyper) if args.hyper else {}
    directory, entries = _manifest_entries(args.manifest, args.split)

    if args.sweep:
        checkpoints = sorted(Path(args.target).glob("*.ckpt"))
        if not checkpoints:
            raise FileNotFoundError(f"no *.ckpt files in {args.target}")
        sweep_rows = []
        for ckpt in checkpoints:
            params, header = load_checkpoint(ckpt)
            rows = _run_eval(directory, entries, str(ckpt), hyper, args)
            summary = _summarize(rows, args.split)
            k = header.get("dft_size") or args.dft_size
            sweep_rows.append({
                "checkpoint": ckpt.stem,
                "structure": params.structure.label,
                "hidden_size": params.hidden_size,
                "scenes": summary["scenes"],
                "mean_serle_db": summary["mean_serle_db"],
                "ci_lo_db": summary["ci_lo_db"],
                "ci_hi_db": summary["ci_hi_db"],
                "flops_per_frame": flops_per_frame(params.structure, k, params.hidden_size),
            })
            print(f"{ckpt.stem}: {summary['mean_serle_db']:.2f} dB "
                  f"[{summary['ci_lo_db']:.2f}, {summary['ci_hi_db']:.2f}]")
        _write_csv(args.out_csv, SWEEP_COLUMNS, sweep_rows)
        print(args.out_csv)
        return 0

    if _target_kind(args.target) == "checkpoint" and not Path(args.target).exists():
        raise FileNotFoundError(f"no such checkpoint or baseline: {args.target}")
    rows = _run_eval(directory, entries, args.target, hyper, args)
    _write_csv(args.out_csv, EVAL_COLUMNS, rows)
    summary = _summarize(rows, args.split)
    summary_path = Path(args.out_csv).with_suffix(".summary.csv")
    _write_csv(summary_path, SUMMARY_COLUMNS, [summary])
    print(f"{summary['algorithm']} on {summary['scenes']} {args.split} scene(s): "
          f"mean SERLE {summary['mean_serle_db']:.2f} dB "
          f"[{summary['ci_lo_db']:.2f}, {summary['ci_hi_db']:.2f}] 95% CI")
    print(args.out_csv)
    return 0


# ---------------------------------------------------------------------------
# cancel


def cmd_cancel(args):
    hyper = json.loads(args.hyper) if args.hyper else {}
    rate_u, u = read_wav(args.farend)
    rate_d, d = read_wav(args.mic)
    if rate_u != rate_d:
        raise ConfigError("sample_rate", f"far end is {rate_u} Hz, mic is {rate_d} Hz")
    if u.size != d.size:
        raise ConfigError("length", f"far end has {u.size} samples, mic has {d.size}")
    cfg, params = _session_config_for(args.target, args.dft_size, args.sample_rate)
    if rate_u != cfg.sample_rate:
        raise ConfigError("sample_rate",
                          f"unsupported sample rate {rate_u} Hz; expected {cfg.sample_rate}")

    kwargs = {"telemetry_path": args.telemetry} if args.telemetry else {}
    if params is None:
        result = run_classic_session(args.target, u, d, cfg, hyper=hyper, **kwargs)
    else:
        result = run_learned_session(params, u, d, cfg, **kwargs)

    out = np.array(d)  # unprocessed tail (partial hop) passes through
    out[: result.error.size] = result.error
    write_wav(args.out, out, rate_u)
    print(f"{args.out}: {result.frames} frames, mean ERLE {result.mean_erle_db:.2f} dB")
    return 0


# ---------------------------------------------------------------------------
# print-config / plot-script


def cmd_print_config(args):
    raw = _load_json(args.config, "config") if args.config else {}
    config = validate_train_config(raw)
    print(json.dumps(config, indent=2, sort_keys=True))
    return 0


_GNUPLOT_PREAMBLE = """\
set datafile separator comma
set key autotitle columnhead
set grid
set term pngcairo size 900,540
"""


def cmd_plot_script(args):
    with open(args.csv, newline="") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise ConfigError("csv", f"{args.csv}: empty file")

    png = str(Path(args.csv).with_suffix(".png"))
    if "epoch" in header:
        body = (
            f"set output '{png}'\n"
            "set xlabel 'epoch'\nset ylabel 'validation SERLE (dB)'\n"
            "set y2label 'training loss'\nset y2tics\n"
            f"plot '{args.csv}' using 'epoch':'val_serle_db' with linespoints, \\\n"
            f"     '{args.csv}' using 'epoch':'train_loss' axes x1y2 with lines\n"
        )
    elif "flops_per_frame" in header:
        body = (
            f"set output '{png}'\n"
            "set logscale x\nset xlabel 'multiply-accumulates per frame'\n"
            "set ylabel 'mean SERLE (dB)'\n"
            f"plot '{args.csv}' using 'flops_per_frame':'mean_serle_db':'structure' "
            "with labels point pt 7 offset char 1,0.5 notitle\n"
        )
    elif "mean_serle_db" in header:
        body = (
            f"set output '{png}'\n"
            "set style data histogram\nset style fill solid 0.6\n"
            "set ylabel 'mean SERLE (dB)'\n"
            f"plot '{args.csv}' using 'mean_serle_db':xtic(1) notitle, \\\n"
            f"     '' using 0:'mean_serle_db':'ci_lo_db':'ci_hi_db' "
            "with yerrorbars notitle\n"
        )
    else:
        raise ConfigError("csv", f"{args.csv}: unrecognized schema {header}")

    Path(args.out).write_text(_GNUPLOT_PREAMBLE + body)
    print(args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aflearn",
        description="Frequency-domain echo cancellation with learned adaptive-filter "
                    "update rules.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("gen-data", help="draw scenes and write a dataset manifest")
    p.add_argument("spec", help="'desk', 'default', or a scene-spec JSON file")
    p.add_argument("out_dir", help="directory for scene files and manifest.json")
    p.add_argument("--count", type=int, default=10, help="number of scenes")
    p.add_argument("--seed", type=int, default=0, help="base scene seed")
    p.add_argument("--split", default="8,1,1", help="train,val,test ratio")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="meta-train an update rule from a JSON config")
    p.add_argument("config", help="training config (see print-config)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint or baseline over a dataset")
    p.add_argument("target", help="checkpoint path, nlms/rls/kf, or a directory "
                                  "of checkpoints with --sweep")
    p.add_argument("manifest", help="dataset directory or manifest.json path")
    p.add_argument("out_csv", help="per-scene CSV (plus .summary.csv), or sweep CSV")
    p.add_argument("--split", default="test", choices=["train", "val", "test", "all"])
    p.add_argument("--jobs", type=int, default=1, help="parallel scene workers")
    p.add_argument("--sweep", action="store_true",
                   help="evaluate every *.ckpt in the target directory")
    p.add_argument("--hyper", help="baseline hyperparameters as JSON")
    p.add_argument("--dft-size", type=int, default=512, dest="dft_size",
                   help="DFT size for baselines (checkpoints carry their own)")
    p.add_argument("--sample-rate", type=int, default=16000, dest="sample_rate")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cancel", help="cancel echo in one WAV pair, write the residual")
    p.add_argument("farend", help="loudspeaker/far-end WAV")
    p.add_argument("mic", help="microphone WAV (same rate and length)")
    p.add_argument("target", help="checkpoint path or nlms/rls/kf")
    p.add_argument("out", help="output WAV for the residual signal")
    p.add_argument("--hyper", help="baseline hyperparameters as JSON")
    p.add_argument("--dft-size", type=int, default=512, dest="dft_size")
    p.add_argument("--sample-rate", type=int, default=16000, dest="sample_rate")
    p.add_argument("--telemetry", help="write per-frame JSON-lines telemetry here")
    p.set_defaults(func=cmd_cancel)

    p = sub.add_parser("print-config", help="validate and canonicalize a train config")
    p.add_argument("config", nargs="?", help="config file; omit for the defaults")
    p.set_defaults(func=cmd_print_config)

    p = sub.add_parser("plot-script", help="emit a gnuplot script for an emitted CSV")
    p.add_argument("csv", help="curve, summary, or sweep CSV")
    p.add_argument("out", help="output .gp path")
    p.set_defaults(func=cmd_plot_script)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except ConfigError as exc:
        print(f"aflearn: config error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"aflearn: config error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, MetricUndefinedError) as exc:
        print(f"aflearn: numeric failure: {exc}", file=sys.stderr)
        return 3
    except (OSError, CheckpointError) as exc:
        print(f"aflearn: i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
