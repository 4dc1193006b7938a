"""CSV/JSON readers and writers for datasets, features, splits and ST dumps."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .models import DisturbanceClass, DisturbanceParams, SamplingGrid, WaveformSignal
from .transform import STMatrix


def fmt(x: float) -> str:
    return repr(float(x))


def snr_text(snr_db: float) -> str:
    return "clean" if snr_db == math.inf else fmt(snr_db)


def parse_snr(text) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    return math.inf if str(text).strip().lower() in ("clean", "inf") else float(text)


def write_dataset(path, signals: list[WaveformSignal]) -> None:
    """``id,class_id,snr_db,param_json,s0..s{N-1}``, floats at full precision."""
    n = signals[0].grid.n_samples if signals else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "class_id", "snr_db", "param_json"] + [f"s{i}" for i in range(n)])
        for i, sig in enumerate(signals):
            w.writerow([i, int(sig.label), snr_text(sig.snr_db),
                        json.dumps(sig.params.to_dict(), sort_keys=True)]
                       + [fmt(v) for v in sig.samples])


def read_dataset(path, grid: SamplingGrid | None = None) -> tuple[list[int], list[WaveformSignal]]:
    ids, signals = [], []
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows)
        n = len(header) - 4
        if grid is None:
            grid = SamplingGrid(n_samples=n)
        for row in rows:
            ids.append(int(row[0]))
            signals.append(WaveformSignal(
                samples=np.array([float(v) for v in row[4:]]), grid=grid,
                label=DisturbanceClass(int(row[1])),
                params=DisturbanceParams.from_dict(json.loads(row[3])),
                snr_db=parse_snr(row[2])))
    return ids, signals


def write_features(path, ids, X: np.ndarray, y: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "class_id", "f1", "f2", "f3", "f4"])
        for i, row, label in zip(ids, X, y):
            w.writerow([int(i), int(label)] + [fmt(v) for v in row])


def read_features(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0].astype(int), data[:, 2:6], data[:, 1].astype(int)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_convergence(path, curve) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "best_fitness"])
        for t, v in enumerate(curve, start=1):
            w.writerow([t, fmt(v)])


def write_confusion(path, counts: np.ndarray, classes) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["true\\pred"] + [f"C{c}" for c in classes])
        for c, row in zip(classes, counts):
            w.writerow([f"C{c}"] + [int(v) for v in row])


def write_st_dump(prefix, st: STMatrix) -> tuple[Path, Path]:
    """``<prefix>_mag.csv`` and ``<prefix>_phase.csv``: one row per time sample,
    one column per voice, header row of voice frequencies."""
    prefix = str(prefix)
    header = ["t"] + [fmt(f) for f in st.voice_freqs_hz]
    t = np.arange(st.n_samples) / st.sample_rate_hz
    paths = []
    for name, arr in (("mag", np.abs(st.values)), ("phase", np.angle(st.values))):
        p = Path(f"{prefix}_{name}.csv")
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for j in range(st.n_samples):
                w.writerow([fmt(t[j])] + [fmt(v) for v in arr[:, j]])
        paths.append(p)
    return tuple(paths)


def read_waveform_csv(path, sample_rate_hz: float | None = None) -> tuple[np.ndarray, float]:
    """Read ``time,value`` pairs or a single sample column.

    A header row is optional. Two-column files infer the sample rate from the
    median time step unless ``sample_rate_hz`` is given; one-column files
    require it.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        rows = rows[1:]
    data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError(f"{path}: no numeric rows")
    if data.shape[1] >= 2:
        t, v = data[:, 0], data[:, 1]
        if sample_rate_hz is None:
            dt = np.median(np.diff(t)) if t.size > 1 else 0.0
            if not dt > 0:
                raise ValueError(f"{path}: cannot infer a sample rate from the time column")
            sample_rate_hz = 1.0 / dt
        return v, float(sample_rate_hz)
    if sample_rate_hz is None:
        raise ValueError(f"{path}: single-column waveform needs an explicit sample rate")
    return data[:, 0], float(sample_rate_hz)


def write_waveform_csv(path, samples, sample_rate_hz: float) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "value"])
        for i, v in enumerate(samples):
            w.writerow([fmt(i / sample_rate_hz), fmt(v)])
