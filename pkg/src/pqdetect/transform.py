"""Stockwell transform with a second-order Gaussian window.

The window standard deviation is a quadratic-over-linear function of the
analysis frequency, ``sigma(f) = (a f**2 + b f + c) / f``. ``(0, 0, 1)``
gives the classic S-transform width ``1/f``.

The discrete transform uses the usual frequency-domain route: one FFT of the
record, then for each voice k a circular spectral shift by k bins, a
multiply by the window's Fourier transform and an inverse FFT. Everything is
circular, so the result equals the time-domain definition evaluated on the
periodic extension of the record with a periodised, unit-sum window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from .models import SamplingGrid, WaveformSignal

FreqMode = Literal["hz", "normalized"]


@dataclass(frozen=True)
class WindowCoefficients:
    a: float = 6.0
    b: float = 12.0
    c: float = 0.08

    @classmethod
    def parse(cls, text: str) -> "WindowCoefficients":
        """Parse ``"a,b,c"``."""
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated numbers, got {text!r}")
        return cls(*parts)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


STANDARD_ST = WindowCoefficients(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class STMatrix:
    """Complex S-transform, one row per voice (0 .. N//2), one column per sample."""

    values: np.ndarray
    voice_freqs_hz: np.ndarray
    sample_rate_hz: float
    window: WindowCoefficients
    freq_mode: str = "hz"

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


def window_sigma(f, coeffs: WindowCoefficients = WindowCoefficients()):
    """Window standard deviation (a f^2 + b f + c) / f for f > 0."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ValueError("window_sigma is defined for f > 0 only")
    sigma = (coeffs.a * f * f + coeffs.b * f + coeffs.c) / f
    if np.any(sigma <= 0):
        raise ValueError(f"window coefficients {coeffs} give a non-positive width")
    return sigma if sigma.ndim else float(sigma)


def time_window(t_minus_tau, f, coeffs: WindowCoefficients = WindowCoefficients()):
    """Unit-area Gaussian of standard deviation ``window_sigma(f)``."""
    sigma = window_sigma(f, coeffs)
    x = np.asarray(t_minus_tau, dtype=float)
    return np.exp(-x * x / (2.0 * sigma * sigma)) / (sigma * np.sqrt(2.0 * np.pi))


def voice_sigmas(n: int, sample_rate_hz: float, coeffs: WindowCoefficients,
                 freq_mode: FreqMode = "hz") -> np.ndarray:
    """Window widths in seconds for voices 1 .. n//2.

    In ``"normalized"`` mode the coefficients are applied with f in cycles
    per sample and sigma in samples, then converted back to seconds.
    """
    k = np.arange(1, n // 2 + 1)
    if freq_mode == "hz":
        return window_sigma(k * sample_rate_hz / n, coeffs)
    if freq_mode == "normalized":
        return window_sigma(k / n, coeffs) / sample_rate_hz
    raise ValueError(f"unknown freq_mode {freq_mode!r}")


def _gaussian_spectrum(n: int, sample_rate_hz: float, sigmas: np.ndarray) -> np.ndarray:
    """Fourier transform of the sampled, periodised window, normalised to G(0) = 1.

    Sampling aliases the continuous transform exp(-2 pi^2 nu^2 sigma^2) at
    multiples of the sample rate; images up to +-2 fs are kept.
    """
    nu = np.fft.fftfreq(n, d=1.0 / sample_rate_hz)
    s2 = (2.0 * np.pi ** 2) * sigmas[:, None] ** 2
    images = np.arange(-2, 3) * sample_rate_hz
    g = sum(np.exp(-s2 * (nu[None, :] + p) ** 2) for p in images)
    g0 = sum(np.exp(-s2 * p * p) for p in images)
    return g / g0


def _as_samples(signal) -> tuple[np.ndarray, float]:
    if isinstance(signal, WaveformSignal):
        return signal.samples, signal.grid.sample_rate_hz
    raise TypeError("pass a WaveformSignal, or samples together with sample_rate_hz")


def sogw_st(signal: Union[WaveformSignal, np.ndarray],
            coeffs: WindowCoefficients = WindowCoefficients(),
            sample_rate_hz: float | None = None,
            freq_mode: FreqMode = "hz") -> STMatrix:
    """Second-order Gaussian window S-transform.

    Parameters
    ----------
    signal : WaveformSignal or array_like
        Real record. A bare array needs ``sample_rate_hz``.
    coeffs : WindowCoefficients
        Window coefficients (a, b, c).
    freq_mode : {"hz", "normalized"}
        Frequency convention used when evaluating sigma(f).

    Returns
    -------
    STMatrix
        ``values[k, j]`` for voice ``k`` (frequency ``k * fs / N``) and time
        index ``j``. Row 0 is the record mean repeated along time.
    """
    if sample_rate_hz is None:
        x, fs = _as_samples(signal)
    else:
        x, fs = np.asarray(signal, dtype=float), float(sample_rate_hz)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("sogw_st needs a non-empty 1-D record")
    n = x.size
    n_voices = n // 2 + 1

    spectrum = np.fft.fft(x)
    st = np.empty((n_voices, n), dtype=complex)
    st[0, :] = x.mean()
    if n_voices > 1:
        sigmas = voice_sigmas(n, fs, coeffs, freq_mode)
        gauss = _gaussian_spectrum(n, fs, sigmas)
        k = np.arange(1, n_voices)
        shifted = spectrum[(np.arange(n)[None, :] + k[:, None]) % n]
        st[1:, :] = np.fft.ifft(shifted * gauss, axis=1)

    freqs = np.arange(n_voices) * fs / n
    return STMatrix(values=st, voice_freqs_hz=freqs, sample_rate_hz=fs,
                    window=coeffs, freq_mode=freq_mode)


def stockwell(signal, sample_rate_hz: float | None = None) -> STMatrix:
    """Classic S-transform (window width 1/f)."""
    return sogw_st(signal, STANDARD_ST, sample_rate_hz=sample_rate_hz, freq_mode="hz")


def inverse_check(st: STMatrix) -> np.ndarray:
    """Rebuild the record from an S-transform.

    Summing a voice over time gives the DFT at that voice's frequency; the
    remaining bins follow from conjugate symmetry of a real record.
    """
    half = st.values.sum(axis=1)
    return np.fft.irfft(half, n=st.n_samples)
