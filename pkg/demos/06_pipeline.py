"""End-to-end classification.

Runs a reduced experiment (30 signals per class, short tuner budgets) for
the noiseless and 30 dB conditions, prints the accuracy table, then
classifies a waveform CSV with the saved WOA model. The full-size run is
``pqdetect --out out experiment``.

    python3 demos/06_pipeline.py [out_dir]
"""

import sys
from pathlib import Path

from pqdetect import fileio, harness
from pqdetect.models import DisturbanceClass, SamplingGrid, generate_signal, sample_params

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out") / "pipeline"
cfg = harness.ExperimentConfig(n_per_class=30, n_agents=6, max_iters=10, manual_grid=6)
report = harness.run_experiment(cfg, out)
print((out / "summary.txt").read_text())

# A recorded swell, here synthesised and stored at 10 kHz to exercise resampling.
grid = SamplingGrid(sample_rate_hz=10000.0, n_samples=2000)
swell = generate_signal(DisturbanceClass.SWELL,
                        sample_params(DisturbanceClass.SWELL, grid, 5), grid)
wav = out / "recorded_swell.csv"
fileio.write_waveform_csv(wav, swell.samples, grid.sample_rate_hz)
res = harness.classify_external(wav, out / "model_clean_WOA.json")
print(f"{wav.name}: classified as {res.label.label} {res.label.name}")
