"""Sensing protocol definitions and their closed-form responses.

Sequences are described by :class:`SequenceSpec`; one field may hold an
array, making it the sweep axis for :func:`qsense.montecarlo.simulate_protocol`.
The closed forms here are the analytic references the Monte-Carlo engine is
tested against:

* Ramsey fringe and decaying-coherence envelope,
* Rabi flopping of a resonantly or detuned driven qubit,
* tone phases acquired through echo and multipulse modulation,
* quasi-static slope/variance detection,
* correlation readout between two separated multipulse blocks,
* aliased frequency identification from stroboscopic sampling.

Phase conventions: deterministic tones are ``v_pk cos(2 pi f t + alpha)``
exactly as in :class:`qsense.signals.ToneSpec`, except for
:func:`spin_echo_phase`, whose ``alpha`` is referenced to the echo's
antisymmetric quadrature (see its docstring).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np
from scipy.special import i0, j0

from .filters import weighting_function
from .signals import ToneSpec, sample_waveform

_SWEEPABLE = ("t", "tau", "n_pulses", "t_gap")


@dataclass(frozen=True)
class SequenceSpec:
    """One pulse-sequence configuration.

    Exactly one of the time-like fields (t, tau, n_pulses, t_gap) may be an
    array; it is then the sweep axis.  Use the per-kind constructors rather
    than filling fields by hand.
    """

    kind: str
    t: object = None
    tau: object = None
    n_pulses: object = None
    t_gap: object = None
    omega1: float | None = None
    delta_omega: float = 0.0

    # -- constructors ------------------------------------------------

    @classmethod
    def ramsey(cls, t) -> "SequenceSpec":
        return cls(kind="ramsey", t=_non_negative("t", t))

    @classmethod
    def rabi(cls, t, omega1: float) -> "SequenceSpec":
        if omega1 <= 0:
            raise ValueError("omega1 must be positive")
        return cls(kind="rabi", t=_non_negative("t", t), omega1=omega1)

    @classmethod
    def spin_echo(cls, t) -> "SequenceSpec":
        return cls(kind="spin_echo", t=_non_negative("t", t))

    @classmethod
    def cp(cls, n_pulses, tau) -> "SequenceSpec":
        return cls(
            kind="cp",
            n_pulses=_pulse_count(n_pulses),
            tau=_positive("tau", tau),
        )

    @classmethod
    def pdd(cls, n_pulses, tau) -> "SequenceSpec":
        return cls(
            kind="pdd",
            n_pulses=_pulse_count(n_pulses),
            tau=_positive("tau", tau),
        )

    @classmethod
    def correlation(cls, n_pulses: int, tau: float, t_gap) -> "SequenceSpec":
        """Two n-pulse CP blocks of period tau separated by a free gap."""
        return cls(
            kind="correlation",
            n_pulses=_pulse_count(n_pulses),
            tau=_positive("tau", tau),
            t_gap=_non_negative("t_gap", t_gap),
        )

    @classmethod
    def spin_lock(cls, t, omega1: float, delta_omega: float = 0.0) -> "SequenceSpec":
        if omega1 <= 0:
            raise ValueError("omega1 must be positive")
        return cls(
            kind="spin_lock",
            t=_non_negative("t", t),
            omega1=omega1,
            delta_omega=delta_omega,
        )

    @classmethod
    def t1_relaxation(cls, t) -> "SequenceSpec":
        return cls(kind="t1", t=_non_negative("t", t))

    # -- structure ---------------------------------------------------

    @property
    def sweep_field(self) -> str | None:
        """Name of the array-valued field, or None for a point sequence."""
        arrays = [f for f in _SWEEPABLE if isinstance(getattr(self, f), np.ndarray)]
        if len(arrays) > 1:
            raise ValueError("only one field may be swept at a time")
        return arrays[0] if arrays else None

    @property
    def sweep_values(self) -> np.ndarray:
        field = self.sweep_field
        if field is None:
            raise ValueError("sequence has no sweep axis")
        return getattr(self, field)

    def at(self, value) -> "SequenceSpec":
        """Point sequence with the sweep field pinned to ``value``."""
        field = self.sweep_field
        if field is None:
            raise ValueError("sequence has no sweep axis")
        if field == "n_pulses":
            value = int(value)
        return replace(self, **{field: value})

    @property
    def total_time(self):
        """Sequence duration; free-precession span for correlation."""
        if self.kind in ("ramsey", "rabi", "spin_echo", "spin_lock", "t1"):
            return self.t
        if self.kind in ("cp", "pdd"):
            return self.n_pulses * self.tau
        if self.kind == "correlation":
            return 2.0 * self.n_pulses * self.tau + self.t_gap
        raise ValueError(f"unknown kind {self.kind!r}")

    def pulse_times(self) -> tuple:
        """pi-pulse times for the dephasing-type kinds."""
        if self.kind == "spin_echo":
            return (self.t / 2.0,)
        if self.kind == "cp":
            return tuple(
                (2 * j - 1) * self.tau / 2.0 for j in range(1, self.n_pulses + 1)
            )
        if self.kind == "pdd":
            return tuple(j * self.tau for j in range(1, self.n_pulses + 1))
        if self.kind == "ramsey":
            return ()
        raise ValueError(f"kind {self.kind!r} has no pi-pulse pattern")


def _positive(name, v):
    arr = np.asarray(v, dtype=float)
    if np.any(arr <= 0):
        raise ValueError(f"{name} must be positive")
    return float(arr) if arr.ndim == 0 else arr


def _non_negative(name, v):
    arr = np.asarray(v, dtype=float)
    if np.any(arr < 0):
        raise ValueError(f"{name} must be non-negative")
    return float(arr) if arr.ndim == 0 else arr


def _pulse_count(n):
    arr = np.asarray(n)
    if arr.ndim == 0:
        n = int(arr)
        if n < 1:
            raise ValueError("n_pulses must be >= 1")
        return n
    if np.any(arr < 1):
        raise ValueError("n_pulses must be >= 1")
    return arr.astype(int)


# -- closed-form responses -------------------------------------------


def ramsey_probability(omega0: float, t) -> np.ndarray:
    """Ramsey fringe p = sin^2(omega0 t / 2) (both pi/2 pulses about y)."""
    return np.sin(omega0 * np.asarray(t, dtype=float) / 2.0) ** 2


def ramsey_decay_probability(omega0: float, t, chi) -> np.ndarray:
    """Ramsey fringe with a dephasing envelope exp(-chi(t)).

    ``chi`` may be a scalar, an array matching t, or a callable chi(t).
    """
    t = np.asarray(t, dtype=float)
    x = chi(t) if callable(chi) else np.asarray(chi, dtype=float)
    return 0.5 * (1.0 - np.exp(-x) * np.cos(omega0 * t))


def rabi_probability(omega0: float, omega1: float, t) -> np.ndarray:
    """Upper-level population under the generator omega0*sz + omega1*sx.

    p(t) = omega1^2/(omega1^2 + omega0^2) * sin^2(sqrt(omega1^2+omega0^2) t)
    starting from the lower level.  Note the full-Pauli convention: in the
    sigma/2 units of :func:`qsense.qubit.evolve` this corresponds to field
    components (2 omega1, 0, 2 omega0), and a transverse drive of Rabi rate
    Omega in those units flips population as sin^2(Omega t / 2).
    """
    t = np.asarray(t, dtype=float)
    w2 = omega0**2 + omega1**2
    if w2 == 0.0:
        return np.zeros_like(t)
    return (omega1**2 / w2) * np.sin(np.sqrt(w2) * t) ** 2


def slope_detection_probability(gamma: float, v: float, t) -> np.ndarray:
    """Linearised slope-readout response p ~= 1/2 + gamma v t / 2.

    Valid for |gamma v t| << 1; the result is clipped to [0, 1] so larger
    excursions saturate instead of leaving the probability simplex.
    """
    t = np.asarray(t, dtype=float)
    return np.clip(0.5 + 0.5 * gamma * v * t, 0.0, 1.0)


def variance_detection_probability(gamma: float, v_rms: float, t) -> np.ndarray:
    """Gaussian-averaged variance response p = (1 - exp(-(gamma v t)^2/2))/2."""
    t = np.asarray(t, dtype=float)
    return 0.5 * (1.0 - np.exp(-0.5 * (gamma * v_rms * t) ** 2))


def spin_echo_phase(tone: ToneSpec, total_time: float,
                    gamma: float = 1.0) -> float:
    """Phase a tone imprints across a spin echo of duration ``total_time``.

    The tone's ``alpha`` is referenced to the echo's antisymmetric (sine)
    quadrature: the integrand is v_pk cos(2 pi f t' + alpha - pi/2), so
    alpha = 0 aligns the tone with the odd-about-the-midpoint component the
    echo locks onto, giving the maximal phase (2/pi) gamma v_pk t at
    f = 1/t, while alpha = pi/2 (the even quadrature) gives zero.  A tone
    whose phase alpha' is quoted against the plain cosine convention
    corresponds to alpha = alpha' + pi/2.
    """
    t = float(total_time)
    if t <= 0:
        raise ValueError("total_time must be positive")
    shifted = ToneSpec(tone.v_pk, tone.f_ac, tone.alpha - math.pi / 2.0)

    def signal(x):
        return sample_waveform(shifted, x)

    first = _gl_integral(signal, 0.0, t / 2.0, tone.f_ac)
    second = _gl_integral(signal, t / 2.0, t, tone.f_ac)
    return gamma * (first - second)


def _gl_integral(f, a: float, b: float, f_char: float) -> float:
    """Composite Gauss-Legendre with >= 16 panels per tone period."""
    n_panels = max(8, int(math.ceil(16.0 * f_char * (b - a))))
    nodes, weights = np.polynomial.legendre.leggauss(12)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    pts = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    vals = np.asarray(f(pts)).reshape(n_panels, -1)
    return float(np.sum(half * (vals @ weights)))


def multipulse_phase(tones, seq: SequenceSpec, gamma: float = 1.0) -> float:
    """Net phase from deterministic tones across a Ramsey/CP/PDD sequence.

    phi = sum_m gamma v_m t W(f_m, alpha_m) with the cosine-referenced
    weighting function of :mod:`qsense.filters`; Ramsey (no pi pulses) uses
    the direct integral of each tone.  CP/PDD require even pulse numbers.
    """
    if isinstance(tones, ToneSpec):
        tones = [tones]
    if seq.kind == "ramsey":
        t = seq.t
        phi = 0.0
        for tone in tones:
            w = 2.0 * math.pi * tone.f_ac
            if w == 0.0:
                phi += gamma * tone.v_pk * t * math.cos(tone.alpha)
            else:
                phi += gamma * tone.v_pk * (
                    math.sin(w * t + tone.alpha) - math.sin(tone.alpha)
                ) / w
        return phi
    if seq.kind not in ("cp", "pdd"):
        raise ValueError(
            "multipulse_phase handles ramsey, cp, and pdd sequences; for a "
            "single-pulse echo use spin_echo_phase"
        )
    t = seq.total_time
    phi = 0.0
    for tone in tones:
        w = weighting_function(seq.kind, tone.f_ac, tone.alpha, seq.n_pulses, seq.tau)
        phi += gamma * tone.v_pk * t * w
    return phi


def multipulse_response(seq: SequenceSpec, tone: ToneSpec, gamma: float = 1.0,
                        amplitude_model: str = "fixed") -> float:
    """Transition probability after a CP/PDD block with a final pi/2 pulse.

    amplitude_model selects the tone statistics:

    * ``fixed``: deterministic tone, p = (1 - cos phi)/2 with
      phi = gamma v_pk t W(f, alpha);
    * ``random_phase``: alpha uniform shot to shot, tone amplitude quoted
      as rms, p = (1 - J0(2 Wbar(f) gamma v_rms t))/2;
    * ``random_amplitude``: Gaussian amplitude and uniform phase,
      p = (1 - exp(-z/2) I0(z/2))/2 with z = (Wbar gamma v_rms t)^2 / k^2
      and k the probed odd harmonic (meaningful on resonance; the k = 1
      resonance is the validated regime).
    """
    if seq.kind not in ("cp", "pdd"):
        raise ValueError("response formulas apply to cp/pdd sequences")
    t = seq.total_time
    if amplitude_model == "fixed":
        phi = multipulse_phase(tone, seq, gamma)
        return 0.5 * (1.0 - math.cos(phi))
    wbar_sq = averaged_weighting_sq_of(seq, tone.f_ac)
    if amplitude_model == "random_phase":
        arg = 2.0 * math.sqrt(wbar_sq) * gamma * tone.v_pk * t
        return 0.5 * (1.0 - float(j0(arg)))
    if amplitude_model == "random_amplitude":
        k = max(1, int(round(2.0 * tone.f_ac * seq.tau)))
        z = wbar_sq * (gamma * tone.v_pk * t) ** 2 / k**2
        return 0.5 * (1.0 - math.exp(-z / 2.0) * float(i0(z / 2.0)))
    raise ValueError(
        "amplitude_model must be 'fixed', 'random_phase', or 'random_amplitude'"
    )


def averaged_weighting_sq_of(seq: SequenceSpec, f_ac) -> float:
    """Wbar^2(f) for a CP/PDD sequence spec (thin wrapper over filters)."""
    from .filters import averaged_weighting_sq

    return averaged_weighting_sq(seq.kind, f_ac, seq.n_pulses, seq.tau)


def correlation_response(phase_amp: float, f_ac: float, t_gap,
                         phase_model: str = "fixed",
                         alpha: float = 0.0) -> np.ndarray:
    """Correlation readout between two phase-accumulation blocks.

    Each block imprints phi_i = phase_amp * cos(alpha_i) where alpha_2
    lags alpha_1 by the tone advance 2 pi f t_gap over the storage gap;
    the projective correlator returns

        p = (1 - sin(phi_1) sin(phi_2)) / 2.

    ``fixed`` evaluates that expression at the given alpha; for
    ``random_phase`` (alpha uniform shot to shot) the small-phase average
    p ~= (1 - (phase_amp^2/2) cos(2 pi f t_gap)) / 2 is returned, whose
    oscillation in t_gap survives the phase randomisation.
    """
    tg = np.asarray(t_gap, dtype=float)
    advance = 2.0 * math.pi * f_ac * tg
    if phase_model == "fixed":
        return 0.5 * (
            1.0
            - np.sin(phase_amp * math.cos(alpha))
            * np.sin(phase_amp * np.cos(alpha + advance))
        )
    if phase_model == "random_phase":
        return 0.5 * (1.0 - 0.5 * phase_amp**2 * np.cos(advance))
    raise ValueError("phase_model must be 'fixed' or 'random_phase'")


@dataclass(frozen=True)
class SamplingEstimate:
    """Outcome of stroboscopic signal sampling."""

    f_estimate: float
    resolution: float
    frequencies: np.ndarray
    power: np.ndarray


def continuous_sampling_estimate(tones, t_sample: float, duration: float,
                                 gamma: float = 1.0,
                                 probe_time: float | None = None) -> SamplingEstimate:
    """Identify a tone frequency from equally spaced phase samples.

    Each sample converts the instantaneous signal into a probability
    p_k = (1 + sin(gamma V(k t_sample) t_probe))/2; the dominant non-DC
    bin of the record's discrete spectrum gives the frequency estimate,
    folded into the Nyquist band [0, 1/(2 t_sample)] -- a tone above the
    sampling Nyquist aliases to |f - round(f t_sample)/t_sample|.  The
    resolution is the Fourier limit 1/duration; a constant record returns
    f_estimate = 0.
    """
    if t_sample <= 0 or duration <= 0:
        raise ValueError("t_sample and duration must be positive")
    n = int(duration / t_sample)
    if n < 8:
        raise ValueError("need at least 8 samples")
    tp = probe_time if probe_time is not None else 0.1 * t_sample
    tk = t_sample * np.arange(n)
    v = sample_waveform(tones, tk)
    p = 0.5 * (1.0 + np.sin(gamma * v * tp))

    spec = np.fft.rfft(p - p.mean())
    power = np.abs(spec) ** 2
    freqs = np.fft.rfftfreq(n, d=t_sample)
    resolution = 1.0 / (n * t_sample)
    if np.max(power[1:]) <= 1e-24 * max(1.0, np.sum(power)):
        return SamplingEstimate(0.0, resolution, freqs, power)
    peak = 1 + int(np.argmax(power[1:]))
    return SamplingEstimate(float(freqs[peak]), resolution, freqs, power)
