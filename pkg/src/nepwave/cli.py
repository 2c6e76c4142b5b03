"""Command-line driver: train / eval / gradcheck / sweep.

Configuration is resolved as task defaults < --config TOML < NEPWAVE_* environment
variables < command-line flags, and the result is written to the run directory
as config.toml. Environment overrides use NEPWAVE_<SECTION>_<KEY>, e.g.
NEPWAVE_TRAIN_EPOCHS=10 or NEPWAVE_GPE_G=0.01.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
import tomli
import tomli_w

from .dynamics import CostKind, GpeParams, Nonlinearity, Trainables
from .oracle import ORACLE_RELAX, OracleInvalid, compare_nep_to_oracle, jacobian_condition_residual
from .relax import RelaxConfig
from .tasks import (DEFAULT_MNIST_IMAGES, DEFAULT_MNIST_LABELS, PcaModel, Sample, TaskSpec, build_mnist_task,
                    build_xor_task, load_idx)
from .trainer import TrainConfig, TrainingError, evaluate, free_phase, train

log = logging.getLogger("nepwave")

CHECKPOINT_FORMAT = "nepwave-checkpoint/1"
ENV_PREFIX = "NEPWAVE_"
TASKS = ("xor9", "xor9-v", "xor7", "mnist5", "mnist10")
SWEEP_PARAMS = ("g", "beta", "lr", "train_flags")

EXIT_OK, EXIT_USAGE, EXIT_FAILED, EXIT_DIVERGED, EXIT_THRESHOLD = 0, 2, 1, 3, 4


class ConfigError(ValueError):
    pass


class CheckpointMismatch(RuntimeError):
    pass


# ---------------------------------------------------------------- configuration

def default_config(task: str) -> dict:
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}; choose from {', '.join(TASKS)}")
    cfg = {
        "run": {"task": task, "seed": 0, "out_dir": f"runs/{task}", "threads": 1},
        "task": {"v_noise": 0.0},
        "gpe": {"nonlinearity": "saturation", "g": 0.1, "gamma": 0.1, "v_block": 20.0},
        "relax": {"dt": 0.1, "max_steps": 5000, "residual_tol": 1e-9},
        "train": {"beta": 0.01, "lr_V": 0.1, "lr_w": 0.1, "batch_size": 4, "epochs": 50,
                  "train_V": True, "train_w": True, "symmetric": False, "frozen_nudge": False},
        "gradcheck": {"gammas": [0.01, 0.1, 0.5], "seeds": 3, "v_range": 0.2, "beta": 1e-4, "eps": 1e-4,
                      "thresholds": {"0.01": 0.99, "0.1": 0.90}},
    }
    if task == "xor9-v":
        cfg["train"]["train_w"] = False
    if task.startswith("mnist"):
        cfg["task"].update({
            "digits": [0, 1, 3, 6, 9] if task == "mnist5" else list(range(10)),
            "samples_per_digit": 100, "n_val": 0, "n_test": 0, "cell_edge": 5, "n_components": 25,
            "input_scale": 4.0, "separators": True,
            "images": str(DEFAULT_MNIST_IMAGES), "labels": str(DEFAULT_MNIST_LABELS)})
        cfg["gpe"].update({"nonlinearity": "density", "g": 0.001})
        cfg["train"].update({"batch_size": 8, "epochs": 30})
    return cfg


def _merge(base: dict, over: dict, where="config") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "thresholds":
            out[k] = _merge(out[k], v, f"{where}.{k}")
        else:
            out[k] = v
    return out


def _parse_scalar(text: str):
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def env_overrides(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out = {}
    for key, val in environ.items():
        if not key.startswith(ENV_PREFIX) or key.count("_") < 2:
            continue
        section, name = key[len(ENV_PREFIX):].split("_", 1)
        out.setdefault(section.lower(), {})[_env_key(section.lower(), name)] = _parse_scalar(val)
    return out


def _env_key(section, name):
    # keep mixed-case keys such as lr_V / train_w reachable from upper-case env names
    for k in default_config("xor9").get(section, {}):
        if k.lower() == name.lower():
            return k
    return name.lower()


def validate_config(cfg: dict) -> dict:
    try:
        task = cfg["run"]["task"]
        ref = default_config(task)
        for section, body in cfg.items():
            if section not in ref:
                raise ConfigError(f"unknown config section [{section}]")
            for k in body:
                if k not in ref[section]:
                    raise ConfigError(f"unknown key {section}.{k}")
        Nonlinearity(cfg["gpe"]["nonlinearity"])
        gpe_params(cfg)
        relax_config(cfg)
        train_config(cfg)
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError) as e:
        raise ConfigError(f"invalid configuration: {e}") from None
    return cfg


def resolve_config(task, config_file=None, environ=None, flags=None) -> dict:
    cfg = default_config(task)
    if config_file:
        with open(config_file, "rb") as fh:
            loaded = tomli.load(fh)
        if loaded.get("run", {}).get("task", task) != task:
            cfg = default_config(loaded["run"]["task"])
        cfg = _merge(cfg, loaded)
    cfg = _merge(cfg, env_overrides(environ))
    cfg = _merge(cfg, flags or {})
    return validate_config(cfg)


def config_digest(cfg: dict) -> str:
    """Hash of everything that defines the model and its data (not schedule or paths)."""
    key = {"task": cfg["run"]["task"], "seed": cfg["run"]["seed"], "task_opts": cfg["task"], "gpe": cfg["gpe"]}
    return hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()


def gpe_params(cfg) -> GpeParams:
    g = cfg["gpe"]
    return GpeParams(Nonlinearity(g["nonlinearity"]), g=float(g["g"]), gamma=float(g["gamma"]),
                     v_block=float(g["v_block"]))


def relax_config(cfg) -> RelaxConfig:
    r = cfg["relax"]
    return RelaxConfig(float(r["dt"]), int(r["max_steps"]), float(r["residual_tol"]))


def train_config(cfg) -> TrainConfig:
    t = cfg["train"]
    return TrainConfig(beta=float(t["beta"]), lr_V=float(t["lr_V"]), lr_w=float(t["lr_w"]),
                       batch_size=int(t["batch_size"]), epochs=int(t["epochs"]), train_V=bool(t["train_V"]),
                       train_w=bool(t["train_w"]), rng_seed=int(cfg["run"]["seed"]),
                       symmetric=bool(t["symmetric"]), frozen_nudge=bool(t["frozen_nudge"]))


def build_task(cfg) -> tuple[TaskSpec, GpeParams, Trainables]:
    """Task, GPE parameters (with any frozen V-noise) and initial trainables."""
    name = cfg["run"]["task"]
    seed = int(cfg["run"]["seed"])
    t = cfg["task"]
    if name.startswith("xor"):
        variant = {"xor9": "nine", "xor9-v": "nine-v-only", "xor7": "seven-asym"}[name]
        task = build_xor_task(variant)
    else:
        images, labels = load_idx(t["images"], t["labels"])
        task = build_mnist_task(images, labels, digits=t["digits"], cell_edge=int(t["cell_edge"]),
                                samples_per_digit=int(t["samples_per_digit"]),
                                n_components=int(t["n_components"]),
                                n_val=int(t["n_val"]) or None, n_test=int(t["n_test"]) or None,
                                seed=seed, separators=bool(t["separators"]),
                                input_scale=float(t["input_scale"]))
    params = gpe_params(cfg)
    sigma = float(t.get("v_noise", 0.0))
    if sigma:
        noise = np.random.default_rng([seed, 1]).uniform(-sigma, sigma, task.lattice.size)
        params = params.with_(background=noise)
    trainables = Trainables.initial(task.lattice, task.w_init)
    return task, params, trainables


# ---------------------------------------------------------------- checkpoints

def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def save_checkpoint(path, trainables: Trainables, epoch: int, rng_state: dict, digest: str, pca_digest=None):
    doc = {"format": CHECKPOINT_FORMAT, "epoch": int(epoch), "V": trainables.V.tolist(),
           "w": np.asarray(trainables.w, float).tolist(), "rng_state": rng_state,
           "config_digest": digest, "pca": pca_digest}
    Path(path).write_text(_dumps(doc))


def load_checkpoint(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ConfigError(f"{path}: not a {CHECKPOINT_FORMAT} file")
    return doc


def pca_digest(pca: PcaModel | None):
    if pca is None:
        return None
    return hashlib.sha256(_dumps(pca.to_dict()).encode()).hexdigest()


# ---------------------------------------------------------------- commands

METRIC_FIELDS = ["epoch", "train_loss", "val_loss", "val_accuracy", "wall_time"]


def run_training(cfg, out_dir: Path) -> dict:
    """Train one configuration into out_dir; returns a summary row. Raises TrainingError on divergence."""
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.toml").write_text(tomli_w.dumps(cfg))
    task, params, trainables = build_task(cfg)
    tcfg, rcfg = train_config(cfg), relax_config(cfg)
    digest = config_digest(cfg)
    pdig = pca_digest(task.pca)
    if task.pca is not None:
        (out_dir / "pca.json").write_text(_dumps(task.pca.to_dict()))
    val = task.val
    with open(out_dir / "metrics.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRIC_FIELDS)
        fh.flush()

        def on_epoch(m, tr, rng):
            writer.writerow([m.epoch, repr(m.train_loss), repr(m.val_loss), repr(m.val_accuracy),
                             f"{m.wall_time:.3f}"])
            fh.flush()
            save_checkpoint(out_dir / "checkpoint.json", tr, m.epoch, rng.bit_generator.state, digest, pdig)
            log.info("epoch %d  train_loss %.5f  val_acc %.4f", m.epoch, m.train_loss, m.val_accuracy)

        trainables, history = train(task.train, trainables, params, task.lattice, tcfg, task.cost_kind, rcfg,
                                    val=val, on_epoch=on_epoch)
    if not history:
        save_checkpoint(out_dir / "checkpoint.json", trainables, 0, np.random.default_rng(tcfg.rng_seed)
                        .bit_generator.state, digest, pdig)
    last = history[-1] if history else None
    ev = evaluate(task.train, trainables, params, task.lattice, task.cost_kind, rcfg)
    lines = [f"task {task.name}", f"epochs {len(history)}",
             f"final train_loss {ev.loss:.6f}  train_accuracy {ev.accuracy:.4f}"]
    if last is not None and val is not None:
        lines.append(f"final val_loss {last.val_loss:.6f}  val_accuracy {last.val_accuracy:.4f}")
    if task.cost_kind is CostKind.MSE:
        lines.append(_xor_table(task.train, ev.readouts))
    (out_dir / "report.txt").write_text("\n".join(lines) + "\n")
    return {"train_loss": ev.loss, "train_accuracy": ev.accuracy,
            "val_loss": last.val_loss if last else float("nan"),
            "val_accuracy": last.val_accuracy if last else float("nan"), "epochs": len(history)}


def _xor_table(data, readouts):
    rows = ["input      target  output"]
    for x, t, r in zip(data.X, data.targets, readouts):
        rows.append(f"{tuple(int(v) for v in x)!s:10} {t[0]:6.2f}  {r[0]:6.3f}")
    return "\n".join(rows)


def cmd_train(cfg) -> int:
    out_dir = Path(cfg["run"]["out_dir"])
    try:
        summary = run_training(cfg, out_dir)
    except TrainingError as e:
        print(f"error: training diverged: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    print((out_dir / "report.txt").read_text(), end="")
    print(json.dumps(summary))
    return EXIT_OK


def cmd_eval(cfg, checkpoint, force=False, split="test") -> int:
    doc = load_checkpoint(checkpoint)
    digest = config_digest(cfg)
    if doc["config_digest"] != digest and not force:
        raise CheckpointMismatch(
            f"checkpoint was trained under config digest {doc['config_digest'][:12]}, current config is "
            f"{digest[:12]} (task/data/GPE settings differ); pass --force to evaluate anyway")
    task, params, _ = build_task(cfg)
    if doc.get("pca") != pca_digest(task.pca) and not force:
        raise CheckpointMismatch("PCA model rebuilt from the config differs from the one the checkpoint used; "
                                 "pass --force to evaluate anyway")
    trainables = Trainables(np.array(doc["V"]), np.array(doc["w"]))
    data = {"train": task.train, "val": task.val, "test": task.test}[split]
    if data is None:
        split, data = "train", task.train   # XOR has only its four training patterns
    ev = evaluate(data, trainables, params, task.lattice, task.cost_kind, relax_config(cfg))
    out_dir = Path(cfg["run"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"task {task.name}  split {split}  n {len(data)}", f"loss {ev.loss:.6f}",
             f"accuracy {ev.accuracy:.4f}"]
    result = {"loss": ev.loss, "accuracy": ev.accuracy, "n": len(data), "epoch": doc["epoch"]}
    if task.cost_kind is CostKind.CCE:
        k = task.train.targets.shape[1]
        conf = np.zeros((k, k), dtype=np.int64)
        np.add.at(conf, (data.labels, ev.predictions), 1)
        digits = task.meta.get("digits", list(range(k)))
        with open(out_dir / "confusion.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["true\\pred", *digits])
            for d, row in zip(digits, conf):
                w.writerow([d, *row.tolist()])
        result["confusion"] = conf.tolist()
    else:
        lines.append(_xor_table(data, ev.readouts))
        result["outputs"] = ev.readouts[:, 0].tolist()
    (out_dir / "eval_report.txt").write_text("\n".join(lines) + "\n")
    (out_dir / "eval.json").write_text(_dumps(result))
    print("\n".join(lines))
    return EXIT_OK


def gradcheck(cfg) -> tuple[list, bool]:
    """NEP-vs-FD cosine over a gamma sweep on random real V; returns (rows, thresholds_ok)."""
    gc = cfg["gradcheck"]
    task, params, trainables = build_task(cfg)
    lat = task.lattice
    sample = Sample(task.train.X, task.train.targets)
    if len(task.train) > 16:
        sample = Sample(task.train.X[:16], task.train.targets[:16])
    rows = []
    for gamma in gc["gammas"]:
        p = params.with_(gamma=float(gamma))
        for s in range(int(gc["seeds"])):
            rng = np.random.default_rng([int(cfg["run"]["seed"]), s])
            tr = Trainables(rng.uniform(-gc["v_range"], gc["v_range"], lat.size), trainables.w)
            try:
                rep = compare_nep_to_oracle(lat, p, tr, sample, task.cost_kind, beta=float(gc["beta"]),
                                            eps=float(gc["eps"]), relax_config=ORACLE_RELAX,
                                            max_params=64)
                psi = free_phase(sample.x[-1], tr, p, lat, ORACLE_RELAX).psi
                sym, asym = jacobian_condition_residual(psi, p, tr, lat)
                rows.append({"gamma": gamma, "seed": s, "cosine": rep.cosine_similarity,
                             "max_abs_err": rep.max_abs_err, "rel_err_l2": rep.rel_err_l2,
                             "sym_residual": sym, "asym_residual": asym, "status": "ok"})
            except OracleInvalid as e:
                rows.append({"gamma": gamma, "seed": s, "status": f"invalid: {e}"})
    ok = True
    by_gamma = {}
    for r in rows:
        if r["status"] != "ok":
            ok = False
            continue
        by_gamma.setdefault(float(r["gamma"]), []).append(r["cosine"])
    for g_str, bar in gc["thresholds"].items():
        vals = by_gamma.get(float(g_str), [])
        if not vals or min(vals) < bar:
            ok = False
    means = [np.mean(by_gamma[g]) for g in sorted(by_gamma)]
    if any(b > a for a, b in zip(means, means[1:])):
        ok = False
    return rows, ok


def cmd_gradcheck(cfg) -> int:
    rows, ok = gradcheck(cfg)
    out_dir = Path(cfg["run"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"{'gamma':>7} {'seed':>4} {'cosine':>9} {'rel_err':>9} {'sym_res':>9} {'asym_res':>9}"]
    for r in rows:
        if r["status"] == "ok":
            lines.append(f"{r['gamma']:7.3g} {r['seed']:4d} {r['cosine']:9.5f} {r['rel_err_l2']:9.2e} "
                         f"{r['sym_residual']:9.2e} {r['asym_residual']:9.2e}")
        else:
            lines.append(f"{r['gamma']:7.3g} {r['seed']:4d} {r['status']}")
    lines.append(f"thresholds {cfg['gradcheck']['thresholds']}: {'met' if ok else 'VIOLATED'}")
    (out_dir / "gradcheck.txt").write_text("\n".join(lines) + "\n")
    (out_dir / "gradcheck.json").write_text(_dumps(rows))
    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_THRESHOLD


def sweep_overrides(param: str, value) -> dict:
    if param == "g":
        return {"gpe": {"g": float(value)}}
    if param == "beta":
        return {"train": {"beta": float(value)}}
    if param == "lr":
        return {"train": {"lr_V": float(value), "lr_w": float(value)}}
    if param == "train_flags":
        flags = str(value).replace(" ", "").split("+")
        if not set(flags) <= {"V", "w"} or not flags:
            raise ConfigError(f"train_flags value {value!r}: use V, w or V+w")
        return {"train": {"train_V": "V" in flags, "train_w": "w" in flags}}
    raise ConfigError(f"cannot sweep {param!r}; choose from {', '.join(SWEEP_PARAMS)}")


def cmd_sweep(cfg, param: str, values) -> int:
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"cannot sweep {param!r}; choose from {', '.join(SWEEP_PARAMS)}")
    values = list(values)
    if not values:
        print("empty value list: nothing to sweep")
        return EXIT_OK
    root = Path(cfg["run"]["out_dir"])
    root.mkdir(parents=True, exist_ok=True)
    results = []
    for v in values:
        sub = root / f"{param}={v}"
        row = {"value": v, "status": "ok"}
        try:
            run_cfg = validate_config(_merge(cfg, sweep_overrides(param, v)))
            run_cfg["run"]["out_dir"] = str(sub)
            row.update(run_training(run_cfg, sub))
        except Exception as e:  # a failed sub-run must not stop the sweep
            row["status"] = f"failed: {type(e).__name__}: {e}"
            log.warning("sweep %s=%s failed: %s", param, v, e)
        results.append(row)
    cols = ["value", "status", "epochs", "train_loss", "val_loss", "val_accuracy"]
    with open(root / "sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, cols, extrasaction="ignore")
        w.writeheader()
        w.writerows(results)
    print(f"{param:>12} {'val_acc':>8} {'val_loss':>9} {'train_loss':>10}  status")
    for r in results:
        print(f"{r['value']!s:>12} {r.get('val_accuracy', float('nan')):8.4f} {r.get('val_loss', float('nan')):9.4f} "
              f"{r.get('train_loss', float('nan')):10.5f}  {r['status']}")
    return EXIT_OK if all(r["status"] == "ok" for r in results) else EXIT_FAILED


# ---------------------------------------------------------------- argument parsing

def _flag_overrides(args) -> dict:
    over = {"run": {}, "task": {}, "gpe": {}, "relax": {}, "train": {}}
    pairs = [("run", "seed", args.seed), ("run", "out_dir", args.out_dir), ("run", "threads", args.threads),
             ("task", "v_noise", args.v_noise), ("task", "samples_per_digit", args.samples_per_digit),
             ("task", "input_scale", args.input_scale), ("task", "images", args.images),
             ("task", "labels", args.labels),
             ("gpe", "g", args.g), ("gpe", "gamma", args.gamma), ("gpe", "nonlinearity", args.nonlinearity),
             ("relax", "dt", args.dt), ("relax", "max_steps", args.max_steps),
             ("train", "beta", args.beta), ("train", "lr_V", args.lr_V), ("train", "lr_w", args.lr_w),
             ("train", "batch_size", args.batch_size), ("train", "epochs", args.epochs)]
    for section, key, val in pairs:
        if val is not None:
            over[section][key] = val
    if args.no_train_w:
        over["train"]["train_w"] = False
    if args.no_train_V:
        over["train"]["train_V"] = False
    return {k: v for k, v in over.items() if v}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--task", choices=TASKS, help="benchmark (default xor9, or the one in --config)")
    common.add_argument("--config", help="TOML file with config overrides")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--threads", type=int, help="accepted for compatibility; relaxation is single-threaded")
    common.add_argument("--v-noise", dest="v_noise", type=float, help="amplitude of frozen uniform V noise")
    common.add_argument("--samples-per-digit", dest="samples_per_digit", type=int)
    common.add_argument("--input-scale", dest="input_scale", type=float)
    common.add_argument("--images")
    common.add_argument("--labels")
    common.add_argument("--g", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--nonlinearity", choices=[n.value for n in Nonlinearity])
    common.add_argument("--dt", type=float)
    common.add_argument("--max-steps", dest="max_steps", type=int)
    common.add_argument("--beta", type=float)
    common.add_argument("--lr-V", dest="lr_V", type=float)
    common.add_argument("--lr-w", dest="lr_w", type=float)
    common.add_argument("--batch-size", dest="batch_size", type=int)
    common.add_argument("--epochs", type=int)
    common.add_argument("--no-train-w", dest="no_train_w", action="store_true")
    common.add_argument("--no-train-V", dest="no_train_V", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="nepwave", description="NEP training of driven-dissipative lattice GPE networks")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("train", parents=[common], help="train and write metrics, checkpoint, report")
    e = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--split", choices=["train", "val", "test"], default="test")
    e.add_argument("--force", action="store_true", help="evaluate even if the config digest differs")
    sub.add_parser("gradcheck", parents=[common], help="compare NEP gradients with finite differences")
    s = sub.add_parser("sweep", parents=[common], help="one training run per parameter value")
    s.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    s.add_argument("--values", default="", help="comma-separated values, e.g. 0.001,0.01 or V+w,V")
    return p


def _task_name(args):
    if args.task:
        return args.task
    if args.config:
        with open(args.config, "rb") as fh:
            return tomli.load(fh).get("run", {}).get("task", "xor9")
    return "xor9"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = resolve_config(_task_name(args), args.config, flags=_flag_overrides(args))
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "eval":
            return cmd_eval(cfg, args.checkpoint, args.force, args.split)
        if args.command == "gradcheck":
            return cmd_gradcheck(cfg)
        values = [_parse_scalar(v) if args.param != "train_flags" else v
                  for v in (x.strip() for x in args.values.split(",")) if v]
        return cmd_sweep(cfg, args.param, values)
    except (ConfigError, CheckpointMismatch, OSError, tomli.TOMLDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE if isinstance(e, ConfigError) else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
