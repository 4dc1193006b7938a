"""End-to-end pipeline: generate, transform, featurise, split, tune, evaluate, report."""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import fileio, optimizers, svm
from .features import (FeatureVector, apply_normalizer, extract_features,
                       feature_matrix, fit_normalizer, magnitude_contour)
from .models import DisturbanceClass, SamplingGrid, generate_dataset
from .transform import WindowCoefficients, sogw_st

log = logging.getLogger(__name__)

CLASSES = tuple(int(c) for c in DisturbanceClass)
ALGORITHMS = ("manual", "GA", "PSO", "WOA")

# Hand-search ranges quoted for the manual baseline: C in [1, 9000], gamma in [1, 1000].
NARROW_MANUAL_RANGES = ((1.0, 9000.0), (1.0, 1000.0))


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class ExperimentConfig:
    sample_rate_hz: float = 3200.0
    n_samples: int = 640
    fundamental_hz: float = 50.0
    n_per_class: int = 100
    snr_list: tuple = ("clean", 30.0)
    split: tuple = (0.7, 0.1, 0.2)
    k_folds: int = 7
    algorithms: tuple = ALGORITHMS
    seed: int = 0
    window: tuple = (6.0, 12.0, 0.08)
    freq_mode: str = "normalized"
    feature_second: str = "frequency"
    n_agents: int = 10
    max_iters: int = 100
    manual_grid: int = 10
    manual_preset: str = "full"
    log_search: bool = True
    save_signals: bool = False

    def __post_init__(self):
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must sum to 1, got {self.split}")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ValueError(f"unknown algorithms {bad}; choose from {ALGORITHMS}")
        if self.manual_preset not in ("full", "narrow"):
            raise ValueError("manual_preset must be 'full' or 'narrow'")

    @property
    def grid(self) -> SamplingGrid:
        return SamplingGrid(self.sample_rate_hz, self.n_samples, self.fundamental_hz)

    @property
    def coeffs(self) -> WindowCoefficients:
        return WindowCoefficients(*self.window)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["snr_list"] = [fileio.snr_text(fileio.parse_snr(s)) for s in self.snr_list]
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})


# -- splitting and cross-validation -----------------------------------------

def _class_rng(seed: int, cls: int, salt: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(cls), salt]))


def split_dataset(y, ratios: Sequence[float] = (0.7, 0.1, 0.2), seed: int = 0):
    """Stratified split of row indices into (train, validation, test).

    Every class must divide exactly into the requested shares.
    """
    y = np.asarray(y, dtype=int)
    if abs(sum(ratios) - 1.0) > 1e-9 or any(r < 0 for r in ratios):
        raise ValueError(f"ratios must be non-negative and sum to 1, got {ratios}")
    parts = [[] for _ in ratios]
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        shares = [len(idx) * r for r in ratios]
        if any(abs(s - round(s)) > 1e-9 for s in shares):
            raise ValueError(
                f"class {c} has {len(idx)} rows, which do not split into {tuple(ratios)}")
        idx = idx[_class_rng(seed, c, 1).permutation(len(idx))]
        bounds = np.cumsum([0] + [round(s) for s in shares])
        for p, lo, hi in zip(parts, bounds[:-1], bounds[1:]):
            p.extend(idx[lo:hi].tolist())
    return tuple(np.array(sorted(p), dtype=int) for p in parts)


def stratified_folds(y, k: int, seed: int = 0) -> np.ndarray:
    """Fold number per row; each class is dealt round-robin over the k folds."""
    y = np.asarray(y, dtype=int)
    fold = np.empty(y.size, dtype=int)
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        if idx.size < k:
            raise ValueError(f"class {c} has {idx.size} rows, fewer than k={k}")
        idx = idx[_class_rng(seed, c, 2).permutation(idx.size)]
        fold[idx] = np.arange(idx.size) % k
    return fold


@dataclass
class KFoldResult:
    mean_accuracy: float
    fold_accuracies: list[float]
    folds: np.ndarray


def kfold_validate(X, y, k: int = 7, hp: svm.SVMHyperparams = svm.SVMHyperparams(1.0, 1.0),
                   seed: int = 0) -> KFoldResult:
    """Stratified k-fold accuracy on raw features (normaliser refit per fold)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    folds = stratified_folds(y, k, seed)
    accs = []
    for f in range(k):
        tr, va = folds != f, folds == f
        stats = fit_normalizer(X[tr])
        model = svm.train_multiclass(apply_normalizer(stats, X[tr]), y[tr], hp, seed)
        accs.append(float(np.mean(svm.predict(model, apply_normalizer(stats, X[va])) == y[va])))
    return KFoldResult(float(np.mean(accs)), accs, folds)


# -- the experiment ----------------------------------------------------------

@dataclass
class AlgorithmResult:
    algorithm: str
    hyperparams: svm.SVMHyperparams
    validation_accuracy: float
    confusion: svm.ConfusionMatrix
    convergence: np.ndarray | None = None
    evaluations: int = 0
    wall_time: float = 0.0

    @property
    def accuracy(self) -> float:
        return self.confusion.accuracy

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "hyperparams": {"c": self.hyperparams.c, "gamma": self.hyperparams.gamma},
            "validation_accuracy": self.validation_accuracy,
            "accuracy": self.accuracy,
            "correct": self.confusion.correct,
            "total": self.confusion.total,
            "confusion": self.confusion.counts.tolist(),
            "per_class": {str(k): v for k, v in self.confusion.per_class().items()},
            "convergence": None if self.convergence is None else self.convergence.tolist(),
            "evaluations": self.evaluations,
            "wall_time": self.wall_time,
        }


@dataclass
class ConditionResult:
    snr: str
    results: dict = field(default_factory=dict)
    audit: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"snr": self.snr,
                "results": {k: v.to_dict() for k, v in self.results.items()},
                "audit": {k: list(map(int, v)) for k, v in self.audit.items()}}


@dataclass
class ExperimentReport:
    config: dict
    conditions: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def accuracy(self, snr: str, algorithm: str) -> float:
        for c in self.conditions:
            if c.snr == snr:
                return c.results[algorithm].accuracy
        raise KeyError(snr)

    def to_dict(self) -> dict:
        return {"config": self.config, "notes": self.notes,
                "conditions": [c.to_dict() for c in self.conditions]}


def _manual_grid(config: ExperimentConfig):
    if config.manual_preset == "narrow":
        (c_lo, c_hi), (g_lo, g_hi) = NARROW_MANUAL_RANGES
    else:
        c_lo = g_lo = optimizers.C_GAMMA_BOUNDS[0]
        c_hi = g_hi = optimizers.C_GAMMA_BOUNDS[1]
    n = config.manual_grid
    return np.logspace(math.log10(c_lo), math.log10(c_hi), n), \
        np.logspace(math.log10(g_lo), math.log10(g_hi), n)


def run_condition(config: ExperimentConfig, snr, out_dir: Path | None = None) -> ConditionResult:
    """One noise condition: train and test on data generated at ``snr``."""
    snr_db = fileio.parse_snr(snr)
    tag = fileio.snr_text(snr_db)
    cond = ConditionResult(snr=tag)
    stage = "generate"
    try:
        signals = generate_dataset(config.n_per_class, config.grid, snr_db, config.seed)
        if out_dir is not None and config.save_signals:
            fileio.write_dataset(out_dir / f"dataset_{tag}.csv", signals)

        stage = "features"
        X, y = feature_matrix(signals, config.coeffs, config.freq_mode, config.feature_second)
        ids = np.arange(len(y))
        if out_dir is not None:
            fileio.write_features(out_dir / f"features_{tag}.csv", ids, X, y)

        stage = "split"
        tr, va, te = split_dataset(y, config.split, config.seed)
        if out_dir is not None:
            fileio.write_json(out_dir / f"split_{tag}.json",
                              {"train": tr.tolist(), "validation": va.tolist(), "test": te.tolist()})

        stage = "normalize"
        stats = fit_normalizer(X[tr])
        cond.audit["normalize"] = tr
        Z = apply_normalizer(stats, X)
        cond.audit["tune"] = np.concatenate([tr, va])
        cond.audit["evaluate"] = te
        train, val = (Z[tr], y[tr]), (Z[va], y[va])

        for algo in config.algorithms:
            stage = f"tune:{algo}"
            t0 = time.perf_counter()
            if algo == "manual":
                cs, gs = _manual_grid(config)
                hp, val_acc, _ = optimizers.grid_search(train, val, cs, gs)
                run = None
            else:
                oc = optimizers.OptimizerConfig(algorithm=algo, n_agents=config.n_agents,
                                                max_iters=config.max_iters, seed=config.seed)
                hp, run = optimizers.tune_svm(train, val, algo, oc,
                                              optimizers.svm_space(config.log_search))
                val_acc = run.best_fitness
            stage = f"evaluate:{algo}"
            model = svm.train_multiclass(train[0], train[1], hp, config.seed, normalizer=stats)
            cm = svm.evaluate(model, Z[te], y[te], CLASSES)
            res = AlgorithmResult(algo, hp, float(val_acc), cm,
                                  None if run is None else run.convergence,
                                  0 if run is None else run.evaluations,
                                  time.perf_counter() - t0)
            cond.results[algo] = res
            log.info("snr=%s %s: test accuracy %.4f (C=%.4g, gamma=%.4g)",
                     tag, algo, res.accuracy, hp.c, hp.gamma)
            if out_dir is not None:
                (out_dir / f"model_{tag}_{algo}.json").write_text(_model_json(model, config))
                if run is not None:
                    oc_meta = run.metadata(oc, wall_time=res.wall_time)
                    fileio.write_json(out_dir / f"run_{tag}_{algo}.json", oc_meta)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, f"snr={tag}: {exc}") from exc
    return cond


def _model_json(model: svm.SVMModel, config: ExperimentConfig) -> str:
    d = json.loads(model.to_json())
    d["pipeline"] = {"sample_rate_hz": config.sample_rate_hz, "n_samples": config.n_samples,
                     "fundamental_hz": config.fundamental_hz, "window": list(config.window),
                     "freq_mode": config.freq_mode, "feature_second": config.feature_second}
    return json.dumps(d)


def run_experiment(config: ExperimentConfig, out_dir=None) -> ExperimentReport:
    """Run every noise condition and algorithm; persist artefacts under ``out_dir``."""
    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        fileio.write_json(out / "config.json", config.to_dict())
    report = ExperimentReport(config=config.to_dict())
    test_share = round(config.n_per_class * config.split[2])
    report.notes.append(
        f"test signals per class: {test_share}; a confusion table with 40 per class would "
        f"need 200 generated per class at a 20% test share")
    for snr in config.snr_list:
        report.conditions.append(run_condition(config, snr, out))
    if out is not None:
        report_render(report, out)
    return report


# -- reporting ----------------------------------------------------------------

def format_accuracy(correct: int, total: int) -> str:
    return f"{100.0 * correct / total:.2f}%" if total else "n/a"


def summary_rows(report: ExperimentReport) -> list[dict]:
    rows = []
    for cond in report.conditions:
        for algo, res in cond.results.items():
            rows.append({"snr": cond.snr, "algorithm": algo,
                         "accuracy": format_accuracy(res.confusion.correct, res.confusion.total),
                         "note": f"{res.confusion.correct}/{res.confusion.total}",
                         "c": res.hyperparams.c, "gamma": res.hyperparams.gamma,
                         "validation_accuracy": res.validation_accuracy})
    return rows


def report_render(report: ExperimentReport, out_dir) -> list[Path]:
    """Write confusion CSVs, convergence CSVs, ``summary.json``, ``summary.txt`` and ``report.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for cond in report.conditions:
        for algo, res in cond.results.items():
            p = out / f"confusion_{cond.snr}_{algo}.csv"
            fileio.write_confusion(p, res.confusion.counts, res.confusion.classes)
            written.append(p)
            if res.convergence is not None:
                p = out / f"convergence_{cond.snr}_{algo}.csv"
                fileio.write_convergence(p, res.convergence)
                written.append(p)
    rows = summary_rows(report)
    fileio.write_json(out / "summary.json", {"rows": rows, "notes": report.notes})
    lines = [f"{'snr':>8}  {'algorithm':>9}  {'accuracy':>9}  {'correct':>9}  {'C':>11}  {'gamma':>11}"]
    for r in rows:
        lines.append(f"{r['snr']:>8}  {r['algorithm']:>9}  {r['accuracy']:>9}  {r['note']:>9}  "
                     f"{r['c']:>11.4g}  {r['gamma']:>11.4g}")
    (out / "summary.txt").write_text("\n".join(lines + [""] + report.notes) + "\n")
    fileio.write_json(out / "report.json", report.to_dict())
    written += [out / "summary.json", out / "summary.txt", out / "report.json"]
    return written


def strip_wall_times(obj):
    """Copy of a report dict with every ``wall_time`` field removed."""
    if isinstance(obj, dict):
        return {k: strip_wall_times(v) for k, v in obj.items() if k != "wall_time"}
    if isinstance(obj, list):
        return [strip_wall_times(v) for v in obj]
    return obj


# -- external waveforms -------------------------------------------------------

@dataclass
class ExternalClassification:
    label: DisturbanceClass
    magnitude_contour: np.ndarray
    features: FeatureVector
    sample_rate_hz: float
    padded: bool = False


def load_model(path) -> tuple[svm.SVMModel, dict]:
    text = Path(path).read_text()
    return svm.SVMModel.from_json(text), json.loads(text).get("pipeline", {})


def prepare_waveform(samples, sample_rate_hz: float, grid: SamplingGrid) -> tuple[np.ndarray, bool]:
    """Resample to the grid rate (linear interpolation) and fit to the grid length.

    Longer records are truncated; shorter ones are extended by repeating
    their whole cycles, which is reported through the returned flag.
    """
    x = np.asarray(samples, dtype=float)
    if not sample_rate_hz or sample_rate_hz <= 0:
        raise ValueError("a positive sample rate is required")
    if x.size / sample_rate_hz < grid.period - 1e-12:
        raise ValueError("record is shorter than one fundamental cycle")
    if abs(sample_rate_hz - grid.sample_rate_hz) > 1e-6 * grid.sample_rate_hz:
        t_in = np.arange(x.size) / sample_rate_hz
        n_out = int(math.floor(t_in[-1] * grid.sample_rate_hz)) + 1
        x = np.interp(np.arange(n_out) / grid.sample_rate_hz, t_in, x)
    padded = False
    if x.size < grid.n_samples:
        spc = grid.samples_per_cycle
        whole = x[: (x.size // spc) * spc]
        x = np.resize(whole, grid.n_samples)
        padded = True
    return x[: grid.n_samples], padded


def classify_external(waveform_csv, model_file, coeffs: WindowCoefficients | None = None,
                      sample_rate_hz: float | None = None,
                      freq_mode: str | None = None) -> ExternalClassification:
    """Classify a recorded waveform with a saved model.

    Window coefficients and frequency mode default to those stored with the
    model. All-zero records are rejected.
    """
    model, pipe = load_model(model_file)
    grid = SamplingGrid(pipe.get("sample_rate_hz", 3200.0), pipe.get("n_samples", 640),
                        pipe.get("fundamental_hz", 50.0))
    coeffs = coeffs or WindowCoefficients(*pipe.get("window", (6.0, 12.0, 0.08)))
    freq_mode = freq_mode or pipe.get("freq_mode", "hz")
    samples, fs = fileio.read_waveform_csv(waveform_csv, sample_rate_hz)
    x, padded = prepare_waveform(samples, fs, grid)
    if not np.any(x):
        raise ValueError("record has zero power; refusing to classify")
    st = sogw_st(x, coeffs, sample_rate_hz=grid.sample_rate_hz, freq_mode=freq_mode)
    fv = extract_features(st, second=pipe.get("feature_second", "frequency"))
    label = svm.predict(model, fv.as_array(), normalized=False)
    return ExternalClassification(DisturbanceClass(label), magnitude_contour(st), fv,
                                  grid.sample_rate_hz, padded)
