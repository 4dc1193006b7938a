"""Command-line driver.

    pqdetect [global flags] <command> [options]

Commands: generate, transform, features, split, tune, train, evaluate,
kfold, classify, report, experiment. Every command writes under ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import fileio, harness, optimizers, svm
from .features import apply_normalizer, feature_matrix, fit_normalizer
from .models import generate_dataset
from .transform import WindowCoefficients, sogw_st


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # Subcommand copies must not overwrite values given before the subcommand.
    def dflt(v):
        return argparse.SUPPRESS if suppress else v

    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=dflt(None), help="master seed (default 0)")
    g.add_argument("--out", type=Path, default=dflt(Path("out")), help="output directory")
    g.add_argument("--config", type=Path, default=dflt(None), help="experiment config JSON")
    g.add_argument("--snr", default=dflt(None), help="'clean' or an SNR in dB")
    g.add_argument("--window", default=dflt(None),
                   help="window coefficients a,b,c (default 6,12,0.08)")
    g.add_argument("--freq-mode", choices=("hz", "normalized"), default=dflt(None))
    g.add_argument("-v", "--verbose", action="store_true", default=dflt(False))
    return p


def _config(args) -> harness.ExperimentConfig:
    d = fileio.read_json(args.config) if args.config else {}
    if args.seed is not None:
        d["seed"] = args.seed
    if args.snr is not None:
        d["snr_list"] = [args.snr]
    if args.window is not None:
        d["window"] = list(WindowCoefficients.parse(args.window).as_tuple())
    if args.freq_mode is not None:
        d["freq_mode"] = args.freq_mode
    if getattr(args, "n_per_class", None) is not None:
        d["n_per_class"] = args.n_per_class
    return harness.ExperimentConfig.from_dict(d)


def _snr(cfg: harness.ExperimentConfig) -> float:
    return fileio.parse_snr(cfg.snr_list[0])


def _split(path):
    s = fileio.read_json(path)
    return [np.asarray(s[k], dtype=int) for k in ("train", "validation", "test")]


def _rows(ids, wanted):
    pos = {int(i): n for n, i in enumerate(ids)}
    return np.array([pos[int(i)] for i in wanted], dtype=int)


def cmd_generate(args, cfg, out):
    signals = generate_dataset(cfg.n_per_class, cfg.grid, _snr(cfg), cfg.seed)
    path = out / "dataset.csv"
    fileio.write_dataset(path, signals)
    return f"wrote {len(signals)} signals to {path}"


def cmd_transform(args, cfg, out):
    ids, signals = fileio.read_dataset(args.dataset, cfg.grid)
    sig = signals[ids.index(args.id)]
    st = sogw_st(sig, cfg.coeffs, freq_mode=cfg.freq_mode)
    if args.voice_step > 1:
        st = dataclasses.replace(st, values=st.values[::args.voice_step],
                                 voice_freqs_hz=st.voice_freqs_hz[::args.voice_step])
    mag, phase = fileio.write_st_dump(out / f"st_{args.id}", st)
    return f"wrote {mag} and {phase}"


def cmd_features(args, cfg, out):
    ids, signals = fileio.read_dataset(args.dataset, cfg.grid)
    X, y = feature_matrix(signals, cfg.coeffs, cfg.freq_mode, args.second)
    path = out / "features.csv"
    fileio.write_features(path, ids, X, y)
    return f"wrote {len(y)} feature rows to {path}"


def cmd_split(args, cfg, out):
    ids, X, y = fileio.read_features(args.features)
    parts = harness.split_dataset(y, cfg.split, cfg.seed)
    obj = {k: ids[p].tolist() for k, p in zip(("train", "validation", "test"), parts)}
    fileio.write_json(out / "split.json", obj)
    return "split sizes " + ", ".join(f"{k}={len(v)}" for k, v in obj.items())


def _normalized_parts(args):
    ids, X, y = fileio.read_features(args.features)
    tr, va, te = (_rows(ids, p) for p in _split(args.split))
    stats = fit_normalizer(X[tr])
    Z = apply_normalizer(stats, X)
    return stats, Z, y, tr, va, te


def cmd_tune(args, cfg, out):
    stats, Z, y, tr, va, _ = _normalized_parts(args)
    oc = optimizers.OptimizerConfig(algorithm=args.algorithm, n_agents=args.agents or cfg.n_agents,
                                    max_iters=args.iters or cfg.max_iters, seed=cfg.seed)
    hp, run = optimizers.tune_svm((Z[tr], y[tr]), (Z[va], y[va]), args.algorithm, oc,
                                  optimizers.svm_space(cfg.log_search))
    meta = run.metadata(oc, wall_time=run.diagnostics.get("wall_time"))
    meta["hyperparams"] = {"c": hp.c, "gamma": hp.gamma}
    fileio.write_json(out / f"run_{args.algorithm}.json", meta)
    fileio.write_convergence(out / f"convergence_{args.algorithm}.csv", run.convergence)
    (out / "normalizer.json").write_text(stats.to_json())
    return f"{args.algorithm}: validation accuracy {run.best_fitness:.4f} at C={hp.c:.6g}, gamma={hp.gamma:.6g}"


def cmd_train(args, cfg, out):
    stats, Z, y, tr, _, _ = _normalized_parts(args)
    if args.run:
        hp = svm.SVMHyperparams(**fileio.read_json(args.run)["hyperparams"])
    elif args.c and args.gamma:
        hp = svm.SVMHyperparams(args.c, args.gamma)
    else:
        raise ValueError("give --c and --gamma, or --run with a tuning record")
    model = svm.train_multiclass(Z[tr], y[tr], hp, cfg.seed, normalizer=stats)
    path = out / "model.json"
    path.write_text(harness._model_json(model, cfg))
    return f"wrote {path} ({len(model.machines)} machines, converged={model.converged})"


def cmd_evaluate(args, cfg, out):
    model, _ = harness.load_model(args.model)
    ids, X, y = fileio.read_features(args.features)
    te = _rows(ids, _split(args.split)[2])
    pred = svm.predict(model, X[te], normalized=False)
    cm = svm.confusion(y[te], pred, harness.CLASSES)
    fileio.write_confusion(out / "confusion.csv", cm.counts, cm.classes)
    fileio.write_json(out / "evaluation.json", {
        "accuracy": cm.accuracy, "correct": cm.correct, "total": cm.total,
        "formatted": harness.format_accuracy(cm.correct, cm.total),
        "per_class": {str(k): v for k, v in cm.per_class().items()}})
    return f"accuracy {harness.format_accuracy(cm.correct, cm.total)} ({cm.correct}/{cm.total})"


def cmd_kfold(args, cfg, out):
    ids, X, y = fileio.read_features(args.features)
    if args.split:
        tr = _rows(ids, _split(args.split)[0])
        X, y = X[tr], y[tr]
    res = harness.kfold_validate(X, y, args.k or cfg.k_folds,
                                 svm.SVMHyperparams(args.c, args.gamma), cfg.seed)
    fileio.write_json(out / "kfold.json", {"mean_accuracy": res.mean_accuracy,
                                           "fold_accuracies": res.fold_accuracies})
    return f"{len(res.fold_accuracies)}-fold mean accuracy {res.mean_accuracy:.4f}"


def cmd_classify(args, cfg, out):
    coeffs = WindowCoefficients.parse(args.window) if args.window else None
    res = harness.classify_external(args.waveform, args.model, coeffs, args.sample_rate,
                                    args.freq_mode)
    path = out / f"{Path(args.waveform).stem}_contour.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "magnitude"])
        for j, v in enumerate(res.magnitude_contour):
            w.writerow([fileio.fmt(j / res.sample_rate_hz), fileio.fmt(v)])
    note = " (record extended by repeating cycles)" if res.padded else ""
    return f"{res.label.label} {res.label.name}{note}; contour written to {path}"


def cmd_report(args, cfg, out):
    d = fileio.read_json(args.report)
    report = harness.ExperimentReport(config=d["config"], notes=d.get("notes", []))
    # report.json stores results with sorted keys; restore the configured order
    order = list(d["config"].get("algorithms", harness.ALGORITHMS))
    rank = {a: i for i, a in enumerate(order)}
    for c in d["conditions"]:
        cond = harness.ConditionResult(snr=c["snr"])
        for algo in sorted(c["results"], key=lambda a: (rank.get(a, len(order)), a)):
            r = c["results"][algo]
            cond.results[algo] = harness.AlgorithmResult(
                algo, svm.SVMHyperparams(**r["hyperparams"]), r["validation_accuracy"],
                svm.ConfusionMatrix(np.asarray(r["confusion"], dtype=int), harness.CLASSES),
                None if r["convergence"] is None else np.asarray(r["convergence"]),
                r["evaluations"], r.get("wall_time", 0.0))
        report.conditions.append(cond)
    harness.report_render(report, out)
    return (out / "summary.txt").read_text()


def cmd_experiment(args, cfg, out):
    report = harness.run_experiment(cfg, out)
    return (out / "summary.txt").read_text()


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    p = argparse.ArgumentParser(prog="pqdetect", description="Power-quality disturbance "
                                "detection and classification pipeline.",
                                parents=[_global_flags(suppress=False)])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(func=func)
        return sp

    sp = add("generate", cmd_generate, "synthesise a labelled dataset CSV")
    sp.add_argument("--n-per-class", type=int)

    sp = add("transform", cmd_transform, "dump |S| and phase of one signal")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--id", type=int, default=0)
    sp.add_argument("--voice-step", type=int, default=1, help="keep every n-th voice")

    sp = add("features", cmd_features, "extract f1..f4 for a dataset")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--second", choices=("frequency", "phase"), default="frequency")

    sp = add("split", cmd_split, "stratified train/validation/test split")
    sp.add_argument("--features", required=True)

    sp = add("tune", cmd_tune, "tune (C, gamma) with a metaheuristic")
    sp.add_argument("--features", required=True)
    sp.add_argument("--split", required=True)
    sp.add_argument("--algorithm", choices=("WOA", "PSO", "GA"), default="WOA")
    sp.add_argument("--agents", type=int)
    sp.add_argument("--iters", type=int)

    sp = add("train", cmd_train, "train a multiclass SVM on the training partition")
    sp.add_argument("--features", required=True)
    sp.add_argument("--split", required=True)
    sp.add_argument("--c", type=float)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--run", help="tuning record from 'tune'")

    sp = add("evaluate", cmd_evaluate, "confusion matrix on the test partition")
    sp.add_argument("--model", required=True)
    sp.add_argument("--features", required=True)
    sp.add_argument("--split", required=True)

    sp = add("kfold", cmd_kfold, "stratified k-fold accuracy")
    sp.add_argument("--features", required=True)
    sp.add_argument("--split", help="restrict to the training partition")
    sp.add_argument("--k", type=int)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--gamma", type=float, required=True)

    sp = add("classify", cmd_classify, "classify a recorded waveform CSV")
    sp.add_argument("waveform")
    sp.add_argument("--model", required=True)
    sp.add_argument("--sample-rate", type=float)

    sp = add("report", cmd_report, "re-render report files from report.json")
    sp.add_argument("--report", required=True)

    add("experiment", cmd_experiment, "run the full pipeline")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        print(args.func(args, cfg, out))
    except harness.StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error [{args.command}] {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
