"""Synthetic disturbance waveforms.

Draws one signal of each of the fifteen classes, prints its parameters and a
few amplitude statistics, and writes the records as plot-ready CSV.

    python3 demos/01_disturbance_models.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from pqdetect import fileio
from pqdetect.models import DisturbanceClass, SamplingGrid, add_noise, generate_signal, \
    sample_params

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)
grid = SamplingGrid()
print(f"grid: {grid.sample_rate_hz:g} Hz, {grid.n_samples} samples, "
      f"{grid.samples_per_cycle} per cycle, {grid.duration:g} s")

# One draw per class. Parameters are a pure function of the seed.
for cls in DisturbanceClass:
    params = sample_params(cls, grid, rng_seed=int(cls))
    sig = generate_signal(cls, params, grid)
    rms = np.sqrt(np.mean(sig.samples ** 2))
    print(f"{cls.label:>4} {cls.name:<28} rms {rms:.3f}  peak {np.abs(sig.samples).max():.3f}"
          f"  {params.to_dict()}")
    fileio.write_waveform_csv(out / f"wave_{cls.label}.csv", sig.samples, grid.sample_rate_hz)

# The same sag with white noise at 30 dB and 20 dB.
sag = generate_signal(DisturbanceClass.SAG, sample_params(DisturbanceClass.SAG, grid, 2), grid)
for snr in (30.0, 20.0):
    noisy = add_noise(sag, snr, rng_seed=0)
    err = noisy.samples - sag.samples
    measured = 10 * np.log10(np.mean(sag.samples ** 2) / np.mean(err ** 2))
    print(f"sag at {snr:g} dB: measured SNR {measured:.2f} dB")
