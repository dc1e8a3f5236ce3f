"""Pulse-sequence filter functions, acquired-phase weights, and dephasing.

The pi-pulse pattern of a sequence defines a +-1 modulation y(t') that
multiplies the field during phase accumulation.  Three linked views of it
live here:

* the weighting function W(f, alpha): phase picked up from a unit tone,
  phi = gamma v_pk t W;
* the filter function Y(omega) = (1/2) int_0^t y(t') exp(i omega t') dt',
  normalised so free evolution gives |Y|^2 = sin^2(omega t/2)/omega^2;
* the dephasing exponent chi(t) = (2/pi) int_0^inf gamma^2 S(omega)
  |Y(omega)|^2 domega, so coherence decays as exp(-chi).

With this normalisation white noise dephases free evolution at rate
gamma^2 S0 / 2, and for n-pulse trains of period tau the filter collapses
onto odd harmonics  omega_k = k pi / tau,  giving the spectroscopy
approximation  chi ~= (4 t / pi^2) sum_odd gamma^2 S(omega_k)/k^2  that
:func:`reconstruct_psd` inverts.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .signals import SpectralDensity

_POLE_WINDOW = 1e-6


@dataclass(frozen=True)
class ModulationFunction:
    """Piecewise +-1 modulation starting at +1, flipping at each switch time.

    Switch times must be strictly increasing and strictly inside
    (0, total_time): a flip at the boundary has zero measure and is
    excluded (relevant for PDD, whose last pi pulse sits exactly at the
    sequence end).
    """

    switch_times: tuple
    total_time: float

    def __post_init__(self):
        t = self.total_time
        if t <= 0:
            raise ValueError("total_time must be positive")
        s = self.switch_times
        if any(not 0.0 < a < t for a in s):
            raise ValueError("switch times must lie strictly inside (0, total_time)")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError("switch times must be strictly increasing")

    @classmethod
    def free_evolution(cls, total_time: float) -> "ModulationFunction":
        return cls((), total_time)

    @classmethod
    def spin_echo(cls, total_time: float) -> "ModulationFunction":
        return cls((total_time / 2.0,), total_time)

    @classmethod
    def cp_train(cls, n_pulses: int, tau: float) -> "ModulationFunction":
        """CP pattern: pulses at (2j-1) tau/2, j = 1..n, total time n tau."""
        if n_pulses < 1:
            raise ValueError("need at least one pulse")
        times = tuple((2 * j - 1) * tau / 2.0 for j in range(1, n_pulses + 1))
        return cls(times, n_pulses * tau)

    @classmethod
    def pdd_train(cls, n_pulses: int, tau: float) -> "ModulationFunction":
        """PDD pattern: pulses at j tau, j = 1..n; the boundary pulse at
        n tau does not switch the modulation."""
        if n_pulses < 1:
            raise ValueError("need at least one pulse")
        times = tuple(j * tau for j in range(1, n_pulses))
        return cls(times, n_pulses * tau)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flips = np.zeros_like(t)
        for s in self.switch_times:
            flips += t >= s
        return np.where((t < 0) | (t > self.total_time), 0.0, (-1.0) ** flips)

    def segments(self) -> list:
        """(start, end, sign) triples covering [0, total_time]."""
        edges = (0.0, *self.switch_times, self.total_time)
        return [
            (a, b, float((-1) ** k))
            for k, (a, b) in enumerate(zip(edges, edges[1:]))
        ]


def filter_function(y: ModulationFunction, omega) -> np.ndarray:
    """Complex filter Y(omega) = (1/2) int y(t') exp(i omega t') dt'.

    Evaluated segment-analytically, so it is exact for any switch pattern.
    At omega = 0 the limit (1/2) sum sign * length is used.
    """
    w = np.asarray(omega, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w).astype(complex)
    out = np.zeros_like(w)
    zero = np.abs(w) == 0.0
    wn = np.where(zero, 1.0, w)
    for a, b, sign in y.segments():
        out += sign * (np.exp(1j * wn * b) - np.exp(1j * wn * a)) / (1j * wn)
        out[zero] += sign * (b - a) - sign * (
            np.exp(1j * 1.0 * b) - np.exp(1j * 1.0 * a)
        ) / (1j * 1.0)
    out *= 0.5
    return complex(out[0]) if scalar else out


@dataclass(frozen=True)
class FilterFunctionCurve:
    """|Y(omega)|^2 sampled on a frequency grid."""

    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.omegas) != len(self.values):
            raise ValueError("omegas and values must have equal length")


def filter_curve(y: ModulationFunction, omegas) -> FilterFunctionCurve:
    yv = filter_function(y, omegas)
    return FilterFunctionCurve(np.asarray(omegas, float), np.abs(yv) ** 2)


def _switch_times(kind: str, n_pulses: int, tau: float) -> tuple:
    if kind == "cp":
        y = ModulationFunction.cp_train(n_pulses, tau)
    elif kind == "pdd":
        y = ModulationFunction.pdd_train(n_pulses, tau)
    else:
        raise ValueError("kind must be 'cp' or 'pdd'")
    return y.switch_times


def _weighting_sum(kind: str, f_ac: float, alpha: float, n_pulses: int,
                   tau: float) -> float:
    """Exact switch-time sum for W; pole-free at any frequency."""
    t = n_pulses * tau
    w = 2.0 * math.pi * f_ac
    if abs(w * t) < 1e-12:
        return 0.0
    switches = _switch_times(kind, n_pulses, tau)
    m = len(switches)
    acc = -math.sin(alpha) + (-1.0) ** m * math.sin(w * t + alpha)
    for j, s in enumerate(switches, start=1):
        acc -= 2.0 * (-1.0) ** j * math.sin(w * s + alpha)
    return acc / (w * t)


def _check_even(n_pulses: int) -> None:
    if n_pulses < 2 or n_pulses % 2:
        raise ValueError(
            "closed-form weighting requires an even pulse number >= 2"
        )


def weighting_function(kind: str, f_ac, alpha: float, n_pulses: int,
                       tau: float):
    """Tone-phase weight W(f, alpha) for an even CP or PDD train.

    The acquired phase of a tone v_pk cos(2 pi f t' + alpha) across the
    sequence is phi = gamma v_pk t W.  Closed forms (x = pi f n tau,
    theta = pi f tau):

        CP:  sinc(x) (1 - sec theta) cos(alpha + x)
        PDD: sinc(x) tan(theta)      sin(alpha + x)

    Within 1e-6 of the sec/tan poles (theta at odd multiples of pi/2) the
    exact switch-time sum is used instead.  On resonance f = k/(2 tau),
    odd k, the alpha-maximised weight has magnitude 2/(k pi).
    """
    _check_even(n_pulses)
    if kind not in ("cp", "pdd"):
        raise ValueError("kind must be 'cp' or 'pdd'")
    if tau <= 0:
        raise ValueError("tau must be positive")
    f = np.asarray(f_ac, dtype=float)
    scalar = f.ndim == 0
    f = np.atleast_1d(f)
    if np.any(f < 0):
        raise ValueError("f_ac must be non-negative")

    x = math.pi * f * n_pulses * tau
    theta = math.pi * f * tau
    # Distance to nearest odd multiple of pi/2.
    pole_dist = np.abs(
        theta - (np.round(theta / math.pi - 0.5) + 0.5) * math.pi
    )
    near_pole = pole_dist < _POLE_WINDOW

    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "cp":
            vals = np.sinc(f * n_pulses * tau) * (1.0 - 1.0 / np.cos(theta)) * np.cos(alpha + x)
        else:
            vals = np.sinc(f * n_pulses * tau) * np.tan(theta) * np.sin(alpha + x)
    for i in np.flatnonzero(near_pole | ~np.isfinite(vals)):
        vals[i] = _weighting_sum(kind, float(f[i]), alpha, n_pulses, tau)
    return float(vals[0]) if scalar else vals


def averaged_weighting_sq(kind: str, f_ac, n_pulses: int, tau: float):
    """Phase-averaged squared weight Wbar^2(f) = <W^2>_alpha.

    Since W = A(f) cos(alpha + x) for CP (sin for PDD), the average over a
    uniform random tone phase is A^2/2, computed here from two quadratures
    so it remains valid in the pole windows.  On resonance the peak value
    is 2/(k pi)^2.
    """
    w0 = np.atleast_1d(weighting_function(kind, f_ac, 0.0, n_pulses, tau))
    w1 = np.atleast_1d(weighting_function(kind, f_ac, math.pi / 2.0, n_pulses, tau))
    out = 0.5 * (w0**2 + w1**2)
    return float(out[0]) if np.asarray(f_ac).ndim == 0 else out


def _boundary_weight(y: ModulationFunction) -> float:
    """sum |c_j|^2 of the filter's boundary phasors; ends count 1, switches 2."""
    return 2.0 + 4.0 * len(y.switch_times)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _panel_integral(func, breaks: np.ndarray, max_width: float) -> float:
    """Composite 24-point Gauss-Legendre between breakpoints.

    Each region is subdivided to panels no wider than ``max_width`` so one
    filter-function oscillation never spans a panel; a 24-point rule is
    then far inside its convergence regime.
    """
    edges = [breaks[0]]
    for a, b in zip(breaks, breaks[1:]):
        n = max(1, int(math.ceil((b - a) / max_width)))
        edges.extend(np.linspace(a, b, n + 1)[1:])
    edges = np.asarray(edges)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    # nodes: (n_panels, n_gl) flattened for one vectorised evaluation
    pts = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    vals = func(pts).reshape(len(half), -1)
    return float(np.sum(half * (vals @ _GL_WEIGHTS)))


def decoherence_from_psd(psd: SpectralDensity, y: ModulationFunction,
                         gamma: float = 1.0) -> float:
    """Gaussian dephasing exponent chi for a modulation and noise PSD.

    chi = (2/pi) int_0^infinity gamma^2 S(omega) |Y(omega)|^2 domega,
    evaluated by oscillation-aligned composite Gauss-Legendre on
    [0, Omega] with PSD features as hard breakpoints, plus the analytic
    high-frequency remainder sum|c|^2 S(Omega)/(4 Omega) * (2/pi) gamma^2
    (|Y|^2 averages to sum|c|^2/(4 omega^2) at large omega).  The
    remainder is exact for white noise; a warning is raised when it
    exceeds 1% of the total, signalling a PSD that decays too slowly for
    the default cutoff.
    """
    t = y.total_time
    support = psd.suggested_nyquist()
    # The filter's weight extends to harmonics of the shortest inter-pulse
    # gap, so the cutoff must scale with 1/min_gap, not 1/t.
    min_gap = min(b - a for a, b, _ in y.segments())
    omega_max = max(100.0 / min_gap, 10.0 * support)

    breaks = sorted(
        {0.0, omega_max}
        | {p for p in psd.feature_points() if 0.0 < p < omega_max}
    )

    def integrand(w):
        return psd.value(w) * np.abs(filter_function(y, w)) ** 2

    val = _panel_integral(integrand, np.asarray(breaks), math.pi / (2.0 * t))
    chi = (2.0 / math.pi) * gamma**2 * val
    tail = (
        (2.0 / math.pi)
        * gamma**2
        * float(psd.value(omega_max))
        * _boundary_weight(y)
        / (4.0 * omega_max)
    )
    if tail > 0.01 * (chi + tail):
        warnings.warn(
            "high-frequency remainder exceeds 1% of chi; the PSD decays too "
            "slowly for the default cutoff",
            stacklevel=2,
        )
    return chi + tail


def harmonic_chi(psd: SpectralDensity, gamma: float, n_pulses: int,
                 tau: float, k_max: int = 41) -> float:
    """Odd-harmonic approximation of chi for an n-pulse train of period tau.

    chi ~= (4 t / pi^2) sum_{k odd <= k_max} gamma^2 S(k pi / tau) / k^2,
    with t = n tau.  Exact in the large-n limit where the filter collapses
    onto delta spikes; for white noise the infinite sum reproduces
    chi = gamma^2 S0 t / 2 exactly.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    t = n_pulses * tau
    ks = np.arange(1, k_max + 1, 2)
    s = psd.value(ks * math.pi / tau)
    return float((4.0 * t / math.pi**2) * gamma**2 * np.sum(s / ks**2))


def reconstruct_psd(measurements: Iterable, gamma: float = 1.0,
                    k_max: int = 5) -> tuple:
    """Invert a set of CP dephasing measurements into PSD samples.

    ``measurements`` is an iterable of (tau, n_pulses, chi) triples.  Each
    measurement probes its first harmonic omega = pi/tau, with corrections
    from harmonics k <= k_max (odd) mapped onto the first-harmonic grid by
    linear interpolation in omega (zero beyond the grid, where the
    sequences carry no information).  The resulting linear system is
    solved with a small Tikhonov ridge (1e-8 relative to the mean
    diagonal), so well-posed designs are recovered essentially exactly.

    Returns (omega_grid, psd_values), sorted ascending in omega.
    """
    rows = [(float(tau), int(n), float(chi)) for tau, n, chi in measurements]
    if not rows:
        raise ValueError("need at least one measurement")
    if k_max < 1 or k_max % 2 == 0:
        raise ValueError("k_max must be a positive odd integer")
    taus = np.array([r[0] for r in rows])
    if np.unique(taus).size != taus.size:
        raise ValueError("tau values must be distinct")

    grid = np.sort(math.pi / taus)
    nb = grid.size
    a = np.zeros((len(rows), nb))
    chi_vec = np.empty(len(rows))
    for i, (tau, n, chi) in enumerate(rows):
        chi_vec[i] = chi
        t = n * tau
        for k in range(1, k_max + 1, 2):
            wk = k * math.pi / tau
            coeff = 4.0 * t * gamma**2 / (math.pi**2 * k**2)
            if wk > grid[-1] + 1e-12:
                continue  # beyond the probed band: treated as zero
            j = int(np.searchsorted(grid, wk))
            if j == 0 or abs(grid[min(j, nb - 1)] - wk) < 1e-12 * wk:
                a[i, min(j, nb - 1)] += coeff
            else:
                lo, hi = j - 1, j
                frac = (wk - grid[lo]) / (grid[hi] - grid[lo])
                a[i, lo] += coeff * (1.0 - frac)
                a[i, hi] += coeff * frac

    ata = a.T @ a
    lam = 1e-8 * np.trace(ata) / nb
    s = np.linalg.solve(ata + lam * np.eye(nb), a.T @ chi_vec)
    return grid, s


def golden_rule_rate(matrix_element_sq: float, psd: SpectralDensity,
                     gamma: float = 1.0, omega01: float = 0.0) -> float:
    """Weak-coupling transition rate between two levels split by omega01.

    Gamma = 2 gamma^2 S(omega01) * |<1| sigma_V / 2 |0>|^2, with the
    squared matrix element passed in directly (1/4 for a transverse
    coupling axis, 0 for a parallel one).
    """
    m2 = float(matrix_element_sq)
    if not 0.0 <= m2 <= 1.0:
        raise ValueError("matrix_element_sq must lie in [0, 1]")
    return 2.0 * gamma**2 * float(psd.value(omega01)) * m2


#: Relaxometry rate kinds understood by :func:`relaxation_rate`.
RELAXATION_KINDS = ("t1", "t2star", "spin_lock_resonant", "spin_lock_detuned")


def relaxation_rate(kind: str, psd_par: SpectralDensity | None = None,
                    psd_perp: SpectralDensity | None = None,
                    gamma: float = 1.0, omega0: float = 0.0,
                    omega1: float = 0.0, delta_omega: float = 0.0) -> float:
    """Decay-rate constant probed by a steady-state relaxometry protocol.

    ``psd_perp`` is the total transverse spectral density (the sum of
    the two transverse axes), ``psd_par`` the density along the qubit
    axis; a missing density contributes nothing.  All rates are the
    exponential constants of the corresponding decay laws:

    * ``"t1"``: population decay, (1/2) gamma^2 S_perp(omega0).
    * ``"t2star"``: free-evolution coherence decay,
      (1/4) gamma^2 S_perp(omega0) + (1/2) gamma^2 S_par(0).
    * ``"spin_lock_resonant"``: decay of a spin locked along a resonant
      drive of Rabi frequency omega1; the parallel density is probed at
      omega1 instead of zero.
    * ``"spin_lock_detuned"``: drive detuned by delta_omega, probing
      S_par at omega_eff = sqrt(omega1^2 + delta_omega^2) with weight
      (omega1/omega_eff)^2, while the transverse term picks up the
      complementary tilt factor.

    The spin-lock kinds require omega1 > 0.
    """
    if kind not in RELAXATION_KINDS:
        raise ValueError(f"unknown relaxometry kind {kind!r}; "
                         f"expected one of {RELAXATION_KINDS}")

    def s_par(w: float) -> float:
        return float(psd_par.value(w)) if psd_par is not None else 0.0

    def s_perp(w: float) -> float:
        return float(psd_perp.value(w)) if psd_perp is not None else 0.0

    g2 = gamma**2
    if kind == "t1":
        return 0.5 * g2 * s_perp(omega0)
    if kind == "t2star":
        return 0.25 * g2 * s_perp(omega0) + 0.5 * g2 * s_par(0.0)
    if omega1 <= 0.0:
        raise ValueError("spin-lock kinds need a positive drive omega1")
    if kind == "spin_lock_resonant":
        return 0.25 * g2 * s_perp(omega0) + 0.5 * g2 * s_par(omega1)
    omega_eff = math.hypot(omega1, delta_omega)
    tilt = (delta_omega / omega_eff) ** 2
    return (0.25 * (1.0 + tilt) * g2 * s_perp(omega0)
            + 0.5 * (omega1 / omega_eff) ** 2 * g2 * s_par(omega_eff))
