"""Synthetic power-quality disturbance waveforms.

Fifteen disturbance classes are modelled on a uniform sampling grid. Every
generator is a pure function of its parameters, and parameter draws are a
pure function of the seed, so a dataset can be rebuilt bit-for-bit.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

CLEAN = math.inf


class DisturbanceClass(enum.IntEnum):
    PURE_SINE = 1
    SAG = 2
    SAG_HARMONICS = 3
    SWELL = 4
    SWELL_HARMONICS = 5
    INTERRUPTION = 6
    INTERRUPTION_HARMONICS = 7
    OSCILLATORY_TRANSIENT = 8
    FLICKER = 9
    FLICKER_HARMONICS = 10
    SPIKE = 11
    SWELL_INTERRUPTION = 12
    SWELL_SAG = 13
    SAG_INTERRUPTION = 14
    SAG_HARMONICS_INTERRUPTION = 15

    @property
    def label(self) -> str:
        return f"C{self.value}"


HARMONIC_CLASSES = frozenset({
    DisturbanceClass.SAG_HARMONICS,
    DisturbanceClass.SWELL_HARMONICS,
    DisturbanceClass.INTERRUPTION_HARMONICS,
    DisturbanceClass.FLICKER_HARMONICS,
    DisturbanceClass.SAG_HARMONICS_INTERRUPTION,
})

# Classes whose disturbance is a piecewise-constant multiplicative envelope.
ENVELOPE_CLASSES = frozenset({
    DisturbanceClass.SAG,
    DisturbanceClass.SWELL,
    DisturbanceClass.INTERRUPTION,
    DisturbanceClass.SWELL_INTERRUPTION,
    DisturbanceClass.SWELL_SAG,
    DisturbanceClass.SAG_INTERRUPTION,
})


@dataclass(frozen=True)
class SamplingGrid:
    """Uniform sampling grid.

    The defaults give 64 samples per 50 Hz cycle and ten cycles (0.2 s),
    long enough to hold the longest (nine cycle) event.
    """

    sample_rate_hz: float = 3200.0
    n_samples: int = 640
    fundamental_hz: float = 50.0
    amplitude_pu: float = 1.0

    def __post_init__(self):
        if self.sample_rate_hz <= 0 or self.fundamental_hz <= 0 or self.amplitude_pu <= 0:
            raise ValueError("sample rate, fundamental and amplitude must be positive")
        spc = self.sample_rate_hz / self.fundamental_hz
        if abs(spc - round(spc)) > 1e-9 or round(spc) < 16:
            raise ValueError(
                f"sample_rate_hz / fundamental_hz must be an integer >= 16, got {spc}")
        if self.n_samples < 1 or self.n_samples % round(spc) != 0:
            raise ValueError(
                f"n_samples={self.n_samples} must span a whole number of cycles "
                f"({round(spc)} samples each)")

    @property
    def samples_per_cycle(self) -> int:
        return round(self.sample_rate_hz / self.fundamental_hz)

    @property
    def period(self) -> float:
        return 1.0 / self.fundamental_hz

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate_hz

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.fundamental_hz

    def time(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sample_rate_hz


@dataclass(frozen=True)
class DisturbanceParams:
    """Parameters of one disturbance draw; fields unused by a class stay None.

    ``depth_alpha`` is the magnitude of the first event (sag/swell/interruption
    depth, transient amplitude), ``depth_alpha2`` that of the second event in
    the two-event classes. Times are in seconds.
    """

    depth_alpha: Optional[float] = None
    depth_alpha2: Optional[float] = None
    event_window: Optional[tuple[float, float]] = None
    event_window2: Optional[tuple[float, float]] = None
    harmonic_amps: Optional[tuple[float, float, float, float]] = None
    flicker: Optional[tuple[float, float]] = None
    transient: Optional[tuple[float, float]] = None
    spike: Optional[tuple[float, float, float]] = None

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in dataclasses.asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "DisturbanceParams":
        return cls(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in d.items()})


@dataclass(frozen=True)
class WaveformSignal:
    samples: np.ndarray
    grid: SamplingGrid
    label: DisturbanceClass
    params: DisturbanceParams = field(default_factory=DisturbanceParams)
    snr_db: float = CLEAN

    def __post_init__(self):
        if self.samples.shape != (self.grid.n_samples,):
            raise ValueError(
                f"expected {self.grid.n_samples} samples, got shape {self.samples.shape}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")


# Which optional fields each class requires.
_REQUIRED = {
    DisturbanceClass.PURE_SINE: (),
    DisturbanceClass.SAG: ("depth_alpha", "event_window"),
    DisturbanceClass.SAG_HARMONICS: ("depth_alpha", "event_window", "harmonic_amps"),
    DisturbanceClass.SWELL: ("depth_alpha", "event_window"),
    DisturbanceClass.SWELL_HARMONICS: ("depth_alpha", "event_window", "harmonic_amps"),
    DisturbanceClass.INTERRUPTION: ("depth_alpha", "event_window"),
    DisturbanceClass.INTERRUPTION_HARMONICS: ("depth_alpha", "event_window", "harmonic_amps"),
    DisturbanceClass.OSCILLATORY_TRANSIENT: ("depth_alpha", "event_window", "transient"),
    DisturbanceClass.FLICKER: ("flicker",),
    DisturbanceClass.FLICKER_HARMONICS: ("flicker", "harmonic_amps"),
    DisturbanceClass.SPIKE: ("spike",),
    DisturbanceClass.SWELL_INTERRUPTION: ("depth_alpha", "depth_alpha2", "event_window", "event_window2"),
    DisturbanceClass.SWELL_SAG: ("depth_alpha", "depth_alpha2", "event_window", "event_window2"),
    DisturbanceClass.SAG_INTERRUPTION: ("depth_alpha", "depth_alpha2", "event_window", "event_window2"),
    DisturbanceClass.SAG_HARMONICS_INTERRUPTION: (
        "depth_alpha", "depth_alpha2", "event_window", "event_window2", "harmonic_amps"),
}

# Closed ranges of event depth per class: (first event, second event).
_DEPTH_RANGES = {
    DisturbanceClass.SAG: ((0.1, 0.9),),
    DisturbanceClass.SAG_HARMONICS: ((0.1, 0.9),),
    DisturbanceClass.SWELL: ((0.1, 0.8),),
    DisturbanceClass.SWELL_HARMONICS: ((0.1, 0.9),),
    DisturbanceClass.INTERRUPTION: ((0.9, 1.0),),
    DisturbanceClass.INTERRUPTION_HARMONICS: ((0.9, 1.0),),
    DisturbanceClass.OSCILLATORY_TRANSIENT: ((0.1, 0.8),),
    DisturbanceClass.SWELL_INTERRUPTION: ((0.1, 0.8), (0.9, 1.0)),
    DisturbanceClass.SWELL_SAG: ((0.1, 0.8), (0.1, 0.8)),
    DisturbanceClass.SAG_INTERRUPTION: ((0.1, 0.8), (0.9, 1.0)),
    DisturbanceClass.SAG_HARMONICS_INTERRUPTION: ((0.1, 0.8), (0.9, 1.0)),
}

HARMONIC_RANGE = (0.05, 0.15)
FLICKER_DEPTH_RANGE = (0.1, 0.2)
FLICKER_FREQ_RANGE_HZ = (5.0, 20.0)
TRANSIENT_TAU_RANGE = (0.008, 0.040)
TRANSIENT_FREQ_RANGE = (300.0, 900.0)
SPIKE_K_RANGE = (0.1, 0.4)


def unit_step(x: np.ndarray) -> np.ndarray:
    """u(x) = 1 for x >= 0, else 0."""
    return (np.asarray(x) >= 0).astype(float)


def _box(t, t_on, t_off):
    return unit_step(t - t_on) - unit_step(t - t_off)


def _harmonic_amps(rng: np.random.Generator) -> tuple[float, float, float, float]:
    a3, a5, a7 = rng.uniform(*HARMONIC_RANGE, size=3)
    a1 = math.sqrt(1.0 - a3 * a3 - a5 * a5 - a7 * a7)
    return (a1, float(a3), float(a5), float(a7))


def _one_event(rng, duration, lo, hi):
    length = rng.uniform(lo, hi)
    start = rng.uniform(0.0, duration - length)
    return (start, start + length)


def _two_events(rng, duration, lo, hi):
    d1 = rng.uniform(lo, hi)
    d2 = rng.uniform(lo, hi)
    t1 = rng.uniform(0.0, duration - d1 - d2)
    t3 = rng.uniform(t1 + d1, duration - d2)
    return (t1, t1 + d1), (t3, t3 + d2)


def sample_params(cls: DisturbanceClass, grid: SamplingGrid = SamplingGrid(),
                  rng_seed=0) -> DisturbanceParams:
    """Draw disturbance parameters uniformly from the class's ranges.

    ``rng_seed`` is anything accepted by :func:`numpy.random.default_rng`.
    Event windows are placed uniformly over the starts that keep the whole
    event inside the record.
    """
    cls = DisturbanceClass(cls)
    rng = np.random.default_rng(rng_seed)
    T, D = grid.period, grid.duration
    C = DisturbanceClass
    if 9 * T > D:
        raise ValueError(f"record of {D} s is too short for nine-cycle events")

    if cls is C.PURE_SINE:
        return DisturbanceParams()

    if cls in (C.SAG, C.SAG_HARMONICS, C.SWELL, C.SWELL_HARMONICS,
               C.INTERRUPTION, C.INTERRUPTION_HARMONICS):
        alpha = rng.uniform(*_DEPTH_RANGES[cls][0])
        window = _one_event(rng, D, T, 9 * T)
        harm = _harmonic_amps(rng) if cls in HARMONIC_CLASSES else None
        return DisturbanceParams(depth_alpha=alpha, event_window=window, harmonic_amps=harm)

    if cls is C.OSCILLATORY_TRANSIENT:
        alpha = rng.uniform(*_DEPTH_RANGES[cls][0])
        window = _one_event(rng, D, 0.5 * T, 3 * T)
        tau = rng.uniform(*TRANSIENT_TAU_RANGE)
        fn = rng.uniform(*TRANSIENT_FREQ_RANGE)
        return DisturbanceParams(depth_alpha=alpha, event_window=window, transient=(tau, fn))

    if cls in (C.FLICKER, C.FLICKER_HARMONICS):
        flick = (rng.uniform(*FLICKER_DEPTH_RANGE), rng.uniform(*FLICKER_FREQ_RANGE_HZ))
        harm = _harmonic_amps(rng) if cls in HARMONIC_CLASSES else None
        return DisturbanceParams(flicker=flick, harmonic_amps=harm)

    if cls is C.SPIKE:
        k = rng.uniform(*SPIKE_K_RANGE)
        width = rng.uniform(0.01 * T, 0.05 * T)
        t1 = rng.uniform(0.0, 0.5 * T - width)
        return DisturbanceParams(spike=(k, t1, t1 + width))

    # two-event classes
    (r1, r2) = _DEPTH_RANGES[cls]
    a1 = rng.uniform(*r1)
    a2 = rng.uniform(*r2)
    w1, w2 = _two_events(rng, D, T, 4 * T)
    harm = _harmonic_amps(rng) if cls in HARMONIC_CLASSES else None
    return DisturbanceParams(depth_alpha=a1, depth_alpha2=a2, event_window=w1,
                             event_window2=w2, harmonic_amps=harm)


def _check_params(cls: DisturbanceClass, params: DisturbanceParams) -> None:
    required = set(_REQUIRED[cls])
    present = {k for k, v in dataclasses.asdict(params).items() if v is not None}
    if present != required:
        raise ValueError(
            f"{cls.label} expects parameters {sorted(required)}, got {sorted(present)}")
    for name in ("event_window", "event_window2"):
        w = getattr(params, name)
        if w is not None and not w[0] < w[1]:
            raise ValueError(f"{name} must satisfy start < end, got {w}")
    if params.event_window2 is not None and params.event_window2[0] < params.event_window[1]:
        raise ValueError("second event must start after the first one ends")


def generate_signal(cls: DisturbanceClass, params: DisturbanceParams = DisturbanceParams(),
                    grid: SamplingGrid = SamplingGrid()) -> WaveformSignal:
    """Evaluate the class's waveform model at t = i / sample_rate_hz."""
    cls = DisturbanceClass(cls)
    _check_params(cls, params)
    C = DisturbanceClass
    t = grid.time()
    w = grid.omega
    base = np.sin(w * t)

    if cls is C.PURE_SINE:
        v = base
    elif cls in (C.SAG, C.SAG_HARMONICS, C.INTERRUPTION, C.INTERRUPTION_HARMONICS):
        v = (1.0 - params.depth_alpha * _box(t, *params.event_window)) * base
    elif cls in (C.SWELL, C.SWELL_HARMONICS):
        v = (1.0 + params.depth_alpha * _box(t, *params.event_window)) * base
    elif cls is C.OSCILLATORY_TRANSIENT:
        t1, t2 = params.event_window
        tau, fn = params.transient
        burst = np.exp(-(t - t1) / tau) * np.sin(2 * math.pi * fn * (t - t1))
        v = base + params.depth_alpha * burst * _box(t, t1, t2)
    elif cls in (C.FLICKER, C.FLICKER_HARMONICS):
        af, beta = params.flicker
        v = (1.0 + af * np.sin(2 * math.pi * beta * t)) * base
    elif cls is C.SPIKE:
        k, t1, t2 = params.spike
        T = grid.period
        pulses = sum(_box(t, t1 + T * n, t2 + T * n) for n in range(10))
        v = base + np.sign(base) * k * pulses
    elif cls in (C.SWELL_INTERRUPTION, C.SWELL_SAG):
        v = (1.0 + params.depth_alpha * _box(t, *params.event_window)
             - params.depth_alpha2 * _box(t, *params.event_window2)) * base
    else:  # SAG_INTERRUPTION, SAG_HARMONICS_INTERRUPTION
        v = (1.0 - params.depth_alpha * _box(t, *params.event_window)
             - params.depth_alpha2 * _box(t, *params.event_window2)) * base

    if cls in HARMONIC_CLASSES:
        a1, a3, a5, a7 = params.harmonic_amps
        v = v * (a1 * np.sin(w * t) + a3 * np.sin(3 * w * t)
                 + a5 * np.sin(5 * w * t) + a7 * np.sin(7 * w * t))

    return WaveformSignal(samples=grid.amplitude_pu * v, grid=grid, label=cls, params=params)


def add_noise(signal: WaveformSignal, snr_db: float, rng_seed=0) -> WaveformSignal:
    """Add white Gaussian noise at ``snr_db`` relative to the mean-square power.

    ``snr_db = inf`` (:data:`CLEAN`) returns the signal unchanged.
    """
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise ValueError(f"snr_db must be finite or +inf, got {snr_db}")
    if signal.samples.size == 0:
        raise ValueError("cannot add noise to an empty signal")
    if snr_db == math.inf:
        return signal
    power = float(np.mean(signal.samples ** 2))
    if power == 0.0:
        raise ValueError("signal has zero power; SNR is undefined")
    rng = np.random.default_rng(rng_seed)
    sigma = math.sqrt(power / 10.0 ** (snr_db / 10.0))
    noisy = signal.samples + rng.normal(0.0, sigma, size=signal.samples.shape)
    return dataclasses.replace(signal, samples=noisy, snr_db=float(snr_db))


def signal_seed(master_seed: int, cls: int, index: int, stream: int = 0) -> np.random.SeedSequence:
    """Sub-seed for one signal; ``stream`` 0 draws parameters, 1 draws noise."""
    return np.random.SeedSequence([int(master_seed), int(cls), int(index), int(stream)])


def generate_dataset(n_per_class: int, grid: SamplingGrid = SamplingGrid(),
                     snr_db: float = CLEAN, master_seed: int = 0) -> list[WaveformSignal]:
    """Generate ``n_per_class`` signals of every class, ordered by class then index."""
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    out = []
    for cls in DisturbanceClass:
        for i in range(n_per_class):
            params = sample_params(cls, grid, signal_seed(master_seed, cls, i, 0))
            sig = generate_signal(cls, params, grid)
            out.append(add_noise(sig, snr_db, signal_seed(master_seed, cls, i, 1)))
    return out
