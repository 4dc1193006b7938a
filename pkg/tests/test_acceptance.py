"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records a one-line verdict (see conftest.record) that is echoed in
the terminal summary. The end-to-end criteria run at full scale and take
roughly half an hour on one core.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import record
from oracles import brute_force_st, qp_dual
from pqdetect import harness, optimizers, svm
from pqdetect.cli import main
from pqdetect.features import extract_features
from pqdetect.models import DisturbanceClass, SamplingGrid, generate_dataset, generate_signal, \
    sample_params
from pqdetect.transform import STANDARD_ST, WindowCoefficients, inverse_check, sogw_st

SEEDS = (0, 1, 2, 3, 4)
DEFAULT = WindowCoefficients()


# -- 1 ----------------------------------------------------------------------

def test_c01_transform_invertibility():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for mode in ("hz", "normalized"):
        for _ in range(50):
            x = rng.normal(size=128)
            rec = inverse_check(sogw_st(x, DEFAULT, 3200.0, mode))
            worst = max(worst, np.linalg.norm(rec - x) / np.linalg.norm(x))
        grid = SamplingGrid()
        for cls in DisturbanceClass:
            sig = generate_signal(cls, sample_params(cls, grid, int(cls)), grid)
            rec = inverse_check(sogw_st(sig, DEFAULT, freq_mode=mode))
            worst = max(worst, np.linalg.norm(rec - sig.samples) / np.linalg.norm(sig.samples))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 10
    record(1, ok, f"max relative L2 error {worst:.2e} (< 1e-8), {elapsed:.2f} s (< 10 s)")
    assert ok


# -- 2 ----------------------------------------------------------------------

ORACLE_CASES = [
    # (coeffs, fs, freq_mode, voices, span)
    ((6, 12, 0.08), 3200.0, "normalized", None, 12.0),
    ((6, 12, 0.08), 64.0, "hz", None, 12.0),
    # literal Hz widths at 3200 Hz exceed 300 s; only the lowest voices are
    # affordable to sum image by image
    ((6, 12, 0.08), 3200.0, "hz", [1, 2, 3, 4], 6.0),
    ((0, 1, 0), 3200.0, "hz", None, 12.0),
    ((0, 1, 0), 3200.0, "normalized", None, 12.0),
]


def test_c02_transform_matches_direct_sum():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for coeffs, fs, mode, voices, span in ORACLE_CASES:
        for _ in range(3):
            x = rng.normal(size=64)
            ref = brute_force_st(x, fs, coeffs, mode, voices, span)
            got = sogw_st(x, WindowCoefficients(*coeffs), fs, mode).values
            rows = slice(None) if voices is None else [0] + voices
            rel = np.abs(got[rows] - ref[rows]) / np.abs(ref[rows])
            worst = max(worst, float(rel.max()))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 30
    record(2, ok, f"max entrywise relative error {worst:.2e} (< 1e-6) over "
                  f"{len(ORACLE_CASES)} window/mode cases, {elapsed:.1f} s (< 30 s)")
    assert ok


# -- 3 ----------------------------------------------------------------------

def test_c03_standard_st_regression():
    sig = generate_signal(DisturbanceClass.PURE_SINE)
    spc = sig.grid.samples_per_cycle
    k50 = 10
    fractions = {}
    for name, coeffs in (("(0,1,0)", WindowCoefficients(0, 1, 0)), ("(0,0,1)", STANDARD_ST)):
        mag = sogw_st(sig, coeffs, freq_mode="hz").magnitude[:, spc:-spc]
        fractions[name] = float(np.mean(np.argmax(mag, axis=0) == k50))
    ok = fractions["(0,1,0)"] >= 0.95
    record(3, ok, "50 Hz voice is the column maximum on "
                  + ", ".join(f"{v:.1%} of interior columns for {k}" for k, v in fractions.items())
                  + " (gate: (0,1,0) >= 95%)")
    assert ok


# -- 4 ----------------------------------------------------------------------

def test_c04_svm_dual_oracle():
    rng = np.random.default_rng(99)
    worst_obj = 0.0
    agree = total = 0
    for _ in range(25):
        n = int(rng.integers(4, 21))
        d = int(rng.integers(2, 5))
        X = rng.normal(size=(n, d))
        y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        y[:2] = (1.0, -1.0)
        hp = svm.SVMHyperparams(10 ** rng.uniform(-1, 2), 10 ** rng.uniform(-1, 1))
        K = svm.kernel_matrix(X, X, hp.gamma)
        alpha, _, _, _ = svm.solve_dual(K, y, hp.c)
        ref_alpha, ref_bias, ref_obj = qp_dual(K, y, hp.c)
        worst_obj = max(worst_obj, abs(svm.dual_objective(alpha, y, K) - ref_obj) / abs(ref_obj))
        model = svm.train_binary(X, y, hp, K=K)
        probes = rng.uniform(X.min(0) - 0.5, X.max(0) + 0.5, size=(200, d))
        ref_f = svm.kernel_matrix(probes, X, hp.gamma) @ (ref_alpha * y) + ref_bias
        agree += int(np.sum(np.sign(svm.decision_function(model, probes)) == np.sign(ref_f)))
        total += probes.shape[0]
    ok = worst_obj < 1e-4 and agree / total >= 0.99
    record(4, ok, f"worst dual objective relative gap {worst_obj:.2e} (< 1e-4), "
                  f"decision sign agreement {agree}/{total} = {agree / total:.2%} (>= 99%)")
    assert ok


# -- 5 ----------------------------------------------------------------------

def test_c05_optimizer_sanity():
    box = optimizers.SearchSpace((-10.0, -10.0), (10.0, 10.0))

    def sphere(x):
        return -float(np.sum(x * x))

    thresholds = {"WOA": -1e-2, "PSO": -1e-2, "GA": -1e-1}
    hits, monotone = {}, {}
    for algo, thr in thresholds.items():
        hits[algo] = monotone[algo] = 0
        for seed in range(20):
            cfg = optimizers.OptimizerConfig(algorithm=algo, n_agents=10, max_iters=100,
                                             seed=seed)
            run = optimizers.optimize(sphere, box, cfg)
            hits[algo] += run.best_fitness >= thr
            monotone[algo] += bool(np.all(np.diff(run.convergence) >= 0))
    ok = all(hits[a] >= 18 for a in hits) and all(monotone[a] == 20 for a in monotone)
    record(5, ok, "; ".join(f"{a} {hits[a]}/20 reach {thresholds[a]:g}, "
                            f"{monotone[a]}/20 monotone" for a in thresholds))
    assert ok


# -- 6, 7, 8: full-scale experiments ------------------------------------------

@pytest.fixture(scope="session")
def clean_runs(tmp_path_factory):
    """Noiseless default pipeline, every algorithm, one run per seed."""
    out = tmp_path_factory.mktemp("clean_runs")
    t0 = time.perf_counter()
    reports = {}
    for seed in SEEDS:
        cfg = harness.ExperimentConfig(seed=seed, snr_list=("clean",))
        reports[seed] = harness.run_experiment(cfg, out / f"seed{seed}")
    return reports, time.perf_counter() - t0


def test_c06_end_to_end_accuracy(clean_runs):
    reports, elapsed = clean_runs
    woa = {s: r.accuracy("clean", "WOA") for s, r in reports.items()}
    manual = {s: r.accuracy("clean", "manual") for s, r in reports.items()}
    good = [s for s in SEEDS if woa[s] >= 0.97 and woa[s] >= manual[s]]
    ok = len(good) >= 4 and elapsed < 30 * 60
    record(6, ok, "WOA test accuracy per seed "
                  + ", ".join(f"{woa[s]:.2%}" for s in SEEDS)
                  + "; manual " + ", ".join(f"{manual[s]:.2%}" for s in SEEDS)
                  + f"; {len(good)}/5 seeds meet WOA >= 97% and WOA >= manual (need 4); "
                    f"{elapsed / 60:.1f} min for all four tuners (target < 30 min)")
    assert ok


def test_c07_noise_robustness(clean_runs, tmp_path):
    cfg = harness.ExperimentConfig(seed=0, snr_list=(30.0,))
    noisy = harness.run_experiment(cfg, tmp_path)
    clean = clean_runs[0][0]
    acc30 = {a: noisy.accuracy("30.0", a) for a in harness.ALGORITHMS}
    acc0 = {a: clean.accuracy("clean", a) for a in harness.ALGORITHMS}
    ordered = all(acc0[a] >= acc30[a] for a in harness.ALGORITHMS)
    ok = acc30["WOA"] >= 0.94 and ordered
    record(7, ok, f"30 dB WOA accuracy {acc30['WOA']:.2%} (>= 94%); clean vs 30 dB "
                  + ", ".join(f"{a} {acc0[a]:.2%}/{acc30[a]:.2%}" for a in harness.ALGORITHMS)
                  + f"; clean >= noisy for every tuner: {ordered}")
    assert ok


def test_c08_ordering(clean_runs):
    reports, _ = clean_runs
    med = {a: float(np.median([r.accuracy("clean", a) for r in reports.values()]))
           for a in harness.ALGORITHMS}
    ok = med["manual"] <= med["WOA"]
    four_way = med["manual"] <= med["GA"] <= med["PSO"] <= med["WOA"]
    record(8, ok, "median accuracy " + ", ".join(f"{a} {med[a]:.2%}" for a in harness.ALGORITHMS)
                  + f"; manual <= WOA gated; full ordering (reported only): {four_way}")
    assert ok


# -- 9 ----------------------------------------------------------------------

def test_c09_feature_separability():
    cfg = harness.ExperimentConfig()
    batch = generate_dataset(100, cfg.grid, master_seed=0)
    f2 = {}
    for cls in (DisturbanceClass.INTERRUPTION, DisturbanceClass.SWELL):
        f2[cls] = np.mean([extract_features(sogw_st(s, cfg.coeffs, freq_mode=cfg.freq_mode))
                           .f2_energy_mag for s in batch if s.label is cls])
    ok = f2[DisturbanceClass.INTERRUPTION] < f2[DisturbanceClass.SWELL]
    record(9, ok, f"class-mean f2: C6 {f2[DisturbanceClass.INTERRUPTION]:.4g} < "
                  f"C4 {f2[DisturbanceClass.SWELL]:.4g}")
    assert ok


# -- 10 ---------------------------------------------------------------------

def _canonical_outputs(d: Path) -> dict:
    out = {}
    for p in sorted(d.iterdir()):
        if p.suffix == ".json":
            out[p.name] = json.dumps(harness.strip_wall_times(json.loads(p.read_text())),
                                     sort_keys=True).encode()
        else:
            out[p.name] = p.read_bytes()
    return out


def test_c10_replay_determinism(tmp_path):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"n_per_class": 10, "n_agents": 4, "max_iters": 4,
                               "manual_grid": 4, "seed": 11}))
    first = tmp_path / "run0"
    assert main(["--out", str(first), "--config", str(cfg), "experiment"]) == 0
    ref = _canonical_outputs(first)
    same = 0
    for i in range(1, 4):
        replay = tmp_path / f"run{i}"
        assert main(["--out", str(replay), "--config", str(first / "config.json"),
                     "experiment"]) == 0
        same += _canonical_outputs(replay) == ref
    ok = same == 3
    record(10, ok, f"{same}/3 replays from the persisted config reproduce all {len(ref)} "
                   f"output files byte for byte (wall-time fields excluded)")
    assert ok
