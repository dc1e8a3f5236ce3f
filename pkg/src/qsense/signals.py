"""Deterministic tones, noise spectral densities, and record synthesis.

Spectral conventions (used everywhere in the package):

* PSDs are two-sided functions of angular frequency, S(omega) = S(-omega),
  normalised so the process variance is (1/2pi) * integral S(omega) domega
  over the whole line.
* A white PSD S0 sampled at step dt therefore has per-sample variance
  S0/dt: band-limiting to the sampling Nyquist pi/dt is implicit.
* Autocorrelation and PSD form a Wiener-Khinchin pair,
  G(t) = (1/2pi) * integral S(omega) exp(i omega t) domega.

Synthesis draws independent complex Gaussian Fourier coefficients with
|X_k|^2 scaled to N S(omega_k)/dt and inverts with a Hermitian-symmetric
irfft, producing stationary, Gaussian, zero-mean records whose Welch
estimate reproduces S(omega) bin by bin.  Records built this way are
circularly correlated, so synthesis pads each draw by several coherence
times (each PSD reports its ``coherence_time``) and keeps the leading
samples; otherwise the autocovariance of a record comparable in length to
the coherence time wraps around and overstates long-lag correlations.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import welch


class AliasingError(ValueError):
    """PSD has appreciable weight beyond the sampling Nyquist frequency."""


@dataclass(frozen=True)
class ToneSpec:
    """Deterministic tone v_pk * cos(2 pi f_ac t + alpha)."""

    v_pk: float
    f_ac: float
    alpha: float = 0.0

    def __post_init__(self):
        if self.v_pk < 0:
            raise ValueError("v_pk must be non-negative")
        if self.f_ac < 0:
            raise ValueError("f_ac must be non-negative")


def sample_waveform(tones, times) -> np.ndarray:
    """Sum of tones evaluated on a time grid."""
    if isinstance(tones, ToneSpec):
        tones = [tones]
    t = np.asarray(times, dtype=float)
    out = np.zeros_like(t)
    for tone in tones:
        out += tone.v_pk * np.cos(2.0 * math.pi * tone.f_ac * t + tone.alpha)
    return out


@dataclass(frozen=True)
class WhitePSD:
    """Flat two-sided PSD S(omega) = s0.

    White noise is defined relative to the sampling grid (flat out to the
    grid Nyquist), so it is exempt from the aliasing guard; per-sample
    variance is s0/dt.
    """

    s0: float

    def __post_init__(self):
        if self.s0 < 0:
            raise ValueError("s0 must be non-negative")

    def value(self, omega) -> np.ndarray:
        return np.full_like(np.asarray(omega, dtype=float), self.s0)

    def check_sampling(self, nyquist: float) -> None:
        return None

    def suggested_nyquist(self) -> float:
        return 0.0

    def coherence_time(self) -> float:
        return 0.0

    def feature_points(self) -> tuple:
        return ()


@dataclass(frozen=True)
class LorentzianPSD:
    """Lorentzian line of half-width ``half_width`` centred at ``omega_c``.

    S(omega) = (s0/2) [L(omega - omega_c) + L(omega + omega_c)] with
    L(x) = 1/(1 + (x/half_width)^2); the symmetrisation keeps S even.  For
    omega_c = 0 this is an Ornstein-Uhlenbeck spectrum: autocorrelation
    (s0 half_width / 2) exp(-half_width |t|), correlation time
    1/half_width.
    """

    s0: float
    half_width: float
    omega_c: float = 0.0

    def __post_init__(self):
        if self.s0 < 0:
            raise ValueError("s0 must be non-negative")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.omega_c < 0:
            raise ValueError("omega_c must be non-negative")

    def value(self, omega) -> np.ndarray:
        w = np.asarray(omega, dtype=float)
        lo = 1.0 / (1.0 + ((w - self.omega_c) / self.half_width) ** 2)
        hi = 1.0 / (1.0 + ((w + self.omega_c) / self.half_width) ** 2)
        return 0.5 * self.s0 * (lo + hi)

    def check_sampling(self, nyquist: float) -> None:
        peak = self.value(self.omega_c)
        if self.value(nyquist) > 0.01 * peak:
            raise AliasingError(
                "Lorentzian tail at the Nyquist frequency exceeds 1% of the "
                f"peak; decrease dt (need S(pi/dt) <= 0.01 S_max, nyquist={nyquist:g})"
            )

    def suggested_nyquist(self) -> float:
        # must satisfy check_sampling: the mirrored line at -omega_c
        # lifts the tail above the one-sided estimate when omega_c is
        # only a few half-widths, so walk out until the 1% bound holds
        x = self.omega_c + 10.0 * self.half_width
        peak = float(self.value(self.omega_c))
        while float(self.value(x)) > 0.01 * peak:
            x += 0.5 * self.half_width
        return x

    def coherence_time(self) -> float:
        # the envelope decay scale, independent of the carrier
        return 1.0 / self.half_width

    def feature_points(self) -> tuple:
        pts = (self.omega_c - self.half_width, self.omega_c, self.omega_c + self.half_width)
        return tuple(p for p in pts if p > 0)


@dataclass(frozen=True)
class PowerLawPSD:
    """Power-law PSD  S = amplitude * |omega|^exponent on [omega_min, omega_max].

    Hard band edges are mandatory: a 1/f-type law without cutoffs has no
    finite variance, so unbounded supports are rejected outright.
    """

    amplitude: float
    exponent: float
    omega_min: float
    omega_max: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if not 0.0 < self.omega_min < self.omega_max:
            raise ValueError(
                "power-law spectra require explicit cutoffs 0 < omega_min < omega_max"
            )
        if not math.isfinite(self.omega_max):
            raise ValueError("omega_max must be finite")

    def value(self, omega) -> np.ndarray:
        w = np.abs(np.asarray(omega, dtype=float))
        out = self.amplitude * np.power(
            np.where(w > 0, w, 1.0), self.exponent
        )
        out = np.where((w >= self.omega_min) & (w <= self.omega_max), out, 0.0)
        return out

    def check_sampling(self, nyquist: float) -> None:
        if self.omega_max >= nyquist:
            raise AliasingError(
                f"power-law support extends to {self.omega_max:g} rad/s, at or "
                f"beyond the sampling Nyquist {nyquist:g} rad/s"
            )

    def suggested_nyquist(self) -> float:
        return 1.05 * self.omega_max

    def coherence_time(self) -> float:
        return 1.0 / self.omega_min

    def feature_points(self) -> tuple:
        return (self.omega_min, self.omega_max)


SpectralDensity = WhitePSD | LorentzianPSD | PowerLawPSD


@dataclass(frozen=True)
class NoiseTrace:
    """Uniformly sampled noise record plus the seed that produced it."""

    dt: float
    samples: np.ndarray
    seed: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if len(self.samples) < 2:
            raise ValueError("a trace needs at least two samples")

    @property
    def duration(self) -> float:
        return self.dt * len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.samples))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_s", "value"])
            for t, v in zip(self.times, self.samples):
                w.writerow([repr(float(t)), repr(float(v))])

    @classmethod
    def from_csv(cls, path, seed: int = -1) -> "NoiseTrace":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        t, v = data[:, 0], data[:, 1]
        dt = float(t[1] - t[0])
        if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=1e-12 * dt):
            raise ValueError("trace times are not uniformly spaced")
        return cls(dt=dt, samples=v, seed=seed)


def _spectral_amplitudes(psd: SpectralDensity, n: int, dt: float) -> np.ndarray:
    """Target rms of |X_k| for the rfft bins of an n-sample record."""
    omega = 2.0 * math.pi * np.fft.rfftfreq(n, d=dt)
    return np.sqrt(n * psd.value(omega) / dt)


def _draw_periodic(psd: SpectralDensity, n: int, dt: float, rng,
                   count: int) -> np.ndarray:
    """(count, n) circularly-stationary Gaussian records with PSD `psd`."""
    amp = _spectral_amplitudes(psd, n, dt)
    nb = amp.size
    coeff = np.empty((count, nb), dtype=complex)
    # Interior bins carry half the power in each of two mirrored lines.
    re = rng.standard_normal((count, nb))
    im = rng.standard_normal((count, nb))
    coeff[:] = (re + 1j * im) * (amp / math.sqrt(2.0))
    coeff[:, 0] = re[:, 0] * amp[0]
    if n % 2 == 0:
        coeff[:, -1] = re[:, -1] * amp[-1]
    return np.fft.irfft(coeff, n=n, axis=1)


def _draw_records(psd: SpectralDensity, n: int, dt: float, rng,
                  count: int) -> np.ndarray:
    """(count, n) stationary Gaussian records with two-sided PSD `psd`.

    Draws are padded by several coherence times (capped at 16x the record
    length) and truncated, which suppresses the wrap-around correlations
    of the underlying circulant construction.
    """
    pad_t = min(8.0 * psd.coherence_time(), 16.0 * n * dt)
    pad = int(math.ceil(pad_t / dt)) if pad_t > 0 else 0
    return _draw_periodic(psd, n + pad, dt, rng, count)[:, :n]


def synthesize_noise(psd: SpectralDensity, duration: float, dt: float,
                     rng) -> NoiseTrace:
    """Generate a Gaussian noise record with the requested two-sided PSD.

    ``duration``/``dt`` must be an integer number of samples, at least 64.
    ``rng`` may be an integer seed or a numpy Generator; the stored seed
    reproduces the trace either way.  Raises :class:`AliasingError` when the
    PSD carries weight beyond the sampling Nyquist pi/dt (white spectra are
    exempt; see :class:`WhitePSD`).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    ratio = duration / dt
    n = int(round(ratio))
    if abs(ratio - n) > 1e-9 or n < 64:
        raise ValueError(
            "duration must be an integer multiple of dt and at least 64 samples;"
            f" got {ratio:g}"
        )
    psd.check_sampling(math.pi / dt)
    if isinstance(rng, (int, np.integer)):
        seed = int(rng)
    else:
        seed = int(rng.integers(0, 2**63 - 1))
    gen = np.random.default_rng(seed)
    x = _draw_records(psd, n, dt, gen, 1)[0]
    return NoiseTrace(dt=dt, samples=x, seed=seed)


def estimate_autocorrelation(trace: NoiseTrace, max_lag: int) -> tuple:
    """Unbiased lag products G[l] = sum_i x_i x_{i+l} / (N - l).

    No mean subtraction: records are zero-mean by construction, and keeping
    the raw product makes the estimator exact for deterministic inputs (a
    constant record c yields G = c^2 at every lag).  ``max_lag`` must stay
    below a quarter of the record so the high-lag estimates keep decent
    statistics.  Returns (lag_times, values).
    """
    x = np.asarray(trace.samples, dtype=float)
    n = x.size
    if not 0 < max_lag < n // 4:
        raise ValueError("max_lag must be positive and below N/4")
    # One FFT of size >= 2n gives all raw lag sums at once.
    nfft = 1 << int(math.ceil(math.log2(2 * n)))
    f = np.fft.rfft(x, nfft)
    raw = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1]
    counts = n - np.arange(max_lag + 1)
    g = raw / counts
    return trace.dt * np.arange(max_lag + 1), g


def estimate_psd(trace: NoiseTrace, nperseg: int | None = None) -> tuple:
    """Welch PSD estimate: Hann window, 50% overlap, two-sided.

    Returns (omega, S) sorted by angular frequency, in the package's
    two-sided density normalisation (a white record of PSD S0 averages to
    S0 across bins).
    """
    x = np.asarray(trace.samples, dtype=float)
    if nperseg is None:
        nperseg = max(64, min(1024, x.size // 8))
    f, p = welch(
        x,
        fs=1.0 / trace.dt,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    omega = 2.0 * math.pi * f
    order = np.argsort(omega)
    # welch returns per-Hz density; with angular-frequency axis the
    # two-sided value matches S(omega) directly.
    return omega[order], p[order]
