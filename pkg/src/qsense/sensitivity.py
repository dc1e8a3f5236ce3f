"""Sensitivity figures of merit: SNR, minimum detectable signal, Allan
variance, and dynamic range.

A measurement converts a signal change ``delta_v`` into a probability
change ``delta_p = (delta_v)^q |d^q p / dV^q| / q!`` with q = 1 on the
slope of a fringe and q = 2 at a fringe extremum (variance detection).
Decoherence multiplies the observed change by ``exp(-chi(t))`` with
``chi(t) = (t / t_coherence)^decay_exponent``, and readout contributes an
efficiency factor C through the total uncertainty ``1/(2 C sqrt(N))`` per
estimate.  From these ingredients:

* :func:`snr` for N = T/(t + t_overhead) repetitions,
* :func:`minimum_detectable_signal` optimizes the unit-SNR signal over
  the free-evolution time (per root-Hz figure),
* :func:`integrated_minimum_signal` rescales it to a total time T, which
  improves as T^-1/2 for slope and only T^-1/4 for variance detection,
* :func:`allan_variance` characterizes stability against drifts,
* :func:`dynamic_range` divides the phase-wrapping ceiling pi/(gamma t)
  by the noise floor, for a single sensing time or a doubling schedule.

For slope detection of the Ramsey family the probability derivative is
``gamma t / 2``; for variance detection the effective second-order
coefficient is ``gamma^2 t^2 / 4`` (the Taylor 1/2! folded in).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = [
    "SensitivityInputs",
    "MinimumSignal",
    "AllanSeries",
    "DynamicRange",
    "snr",
    "unit_snr_signal",
    "minimum_detectable_signal",
    "integrated_minimum_signal",
    "psd_detection_floor",
    "allan_variance",
    "allan_curve",
    "dynamic_range",
]


@dataclass(frozen=True)
class SensitivityInputs:
    """Static description of one sensing configuration.

    ``t_coherence`` is the 1/e time of the relevant decay (free-induction,
    echo, or population, depending on the protocol), ``decay_exponent``
    its stretching power, ``t_overhead`` the dead time per shot, and
    ``readout_efficiency`` the C factor in (0, 1] that inflates the
    projection noise to ``1/(2 C sqrt(N))``.
    """

    gamma: float
    readout_efficiency: float = 1.0
    t_coherence: float = 1.0
    t_overhead: float = 0.0
    decay_exponent: float = 1.0
    detection_order: int = 1

    def __post_init__(self):
        if self.gamma <= 0 or self.t_coherence <= 0:
            raise ValueError("gamma and t_coherence must be positive")
        if not 0.0 < self.readout_efficiency <= 1.0:
            raise ValueError("readout_efficiency must lie in (0, 1]")
        if self.t_overhead < 0:
            raise ValueError("t_overhead must be non-negative")
        if self.decay_exponent <= 0:
            raise ValueError("decay_exponent must be positive")
        if self.detection_order not in (1, 2):
            raise ValueError("detection_order must be 1 (slope) or 2 "
                             "(variance)")

    def chi(self, t: float) -> float:
        return (t / self.t_coherence) ** self.decay_exponent

    def _slope_coefficient(self, t: float) -> float:
        # |d^q p / dV^q| / q! for the sinusoidal fringe
        if self.detection_order == 1:
            return 0.5 * self.gamma * t
        return 0.25 * self.gamma**2 * t**2


def snr(inputs: SensitivityInputs, delta_v: float, t: float,
        total_time: float,
        chi_of_t: Callable[[float], float] | None = None) -> float:
    """Signal-to-noise ratio for repeated sensing over ``total_time``.

    SNR = delta_p(t) e^-chi(t) * 2C * sqrt(T/(t + t_overhead)), where
    delta_p is the q-th order probability response to ``delta_v``.  A
    custom decay exponent function ``chi_of_t`` overrides the power-law
    built from ``inputs``.
    """
    if t <= 0:
        raise ValueError("sensing time must be positive")
    if total_time < t + inputs.t_overhead:
        raise ValueError("total_time must cover at least one shot")
    chi = chi_of_t(t) if chi_of_t is not None else inputs.chi(t)
    q = inputs.detection_order
    delta_p = abs(delta_v) ** q * inputs._slope_coefficient(t)
    shots = total_time / (t + inputs.t_overhead)
    return (delta_p * math.exp(-chi)
            * 2.0 * inputs.readout_efficiency * math.sqrt(shots))


@dataclass(frozen=True)
class MinimumSignal:
    """Unit-SNR signal per root-Hz and the sensing time that attains it.

    ``at_boundary`` flags a degenerate optimization whose minimum sits on
    the search-bracket edge rather than at an interior optimum.
    """

    v_min: float
    t_optimal: float
    at_boundary: bool = False


def unit_snr_signal(inputs: SensitivityInputs, t: float,
                    chi_of_t: Callable[[float], float] | None = None
                    ) -> float:
    """Signal reaching SNR = 1 in one second, sensed at a fixed time t.

    v_min(t)^q = e^chi(t) sqrt(t + t_overhead) / (2C * coeff_q(t)), with
    coeff_1 = gamma t / 2 and coeff_2 = gamma^2 t^2 / 4.  The customary
    variance-detection figure quotes this at t = t_coherence, where it
    reads sqrt(2e)/(gamma sqrt(C) t_coherence^(3/4)); the true optimum
    sits slightly later (see :func:`minimum_detectable_signal`).
    """
    if t <= 0:
        raise ValueError("sensing time must be positive")
    chi = chi_of_t(t) if chi_of_t is not None else inputs.chi(t)
    vq = (math.exp(chi) * math.sqrt(t + inputs.t_overhead)
          / (2.0 * inputs.readout_efficiency
             * inputs._slope_coefficient(t)))
    return vq ** (1.0 / inputs.detection_order)


def minimum_detectable_signal(
        inputs: SensitivityInputs,
        chi_of_t: Callable[[float], float] | None = None) -> MinimumSignal:
    """Minimize the unit-SNR signal over the sensing time.

    For exponential dephasing with no overhead the slope optimum is
    analytic, t = t_coherence/2 with v_min = sqrt(2e)/(gamma C
    sqrt(t_coherence)); the bounded scalar minimization reproduces it and
    covers every other (decay_exponent, t_overhead) combination.
    """
    # chi caps the useful time at a few coherence times; the wide bracket
    # keeps pathological inputs on a reported boundary instead of failing.
    lo = 1e-4 * inputs.t_coherence
    hi = 50.0 * inputs.t_coherence
    res = minimize_scalar(
        lambda u: unit_snr_signal(inputs, math.exp(u), chi_of_t),
        bounds=(math.log(lo), math.log(hi)),
        method="bounded",
        options={"xatol": 1e-12},
    )
    t_opt = math.exp(res.x)
    at_edge = t_opt < 1.05 * lo or t_opt > hi / 1.05
    return MinimumSignal(unit_snr_signal(inputs, t_opt, chi_of_t), t_opt,
                         at_boundary=at_edge)


def integrated_minimum_signal(inputs: SensitivityInputs,
                              total_time: float) -> float:
    """Minimum detectable signal after integrating for ``total_time``.

    V_min(T) = v_min T^(-1/2) for slope detection; the square root in
    v_min^q makes variance detection improve only as T^(-1/4).
    """
    if total_time <= 0:
        raise ValueError("total_time must be positive")
    base = minimum_detectable_signal(inputs)
    return base.v_min * total_time ** (-0.5 / inputs.detection_order)


def psd_detection_floor(inputs: SensitivityInputs) -> float:
    """Smallest detectable noise spectral density, e/(gamma^2 C sqrt(Tx)).

    Valid in the variance-detection regime at sensing times near the
    coherence time, where the probability response to a stochastic signal
    is (1/2) gamma^2 S t.
    """
    return math.e / (inputs.gamma**2 * inputs.readout_efficiency
                     * math.sqrt(inputs.t_coherence))


@dataclass(frozen=True)
class AllanSeries:
    """Evenly sampled sensor readings x_j = x(j t_s)."""

    samples: np.ndarray
    t_s: float

    def __post_init__(self):
        object.__setattr__(self, "samples",
                           np.asarray(self.samples, dtype=float))
        if self.samples.ndim != 1 or self.samples.size < 3:
            raise ValueError("need a 1-d series of at least 3 samples")
        if self.t_s <= 0:
            raise ValueError("t_s must be positive")


def allan_variance(series: AllanSeries, m: int = 1) -> float:
    """Two-sample variance at grouping time m*t_s.

    sigma_X^2(m t_s) = sum_{j=1}^{N-2m} (x_{j+m} - x_j)^2
                       / (2 (N-2m) m^2 t_s^2).

    The grouping must leave at least one difference, N - 2m >= 1.
    """
    x = series.samples
    n = x.size
    if m < 1:
        raise ValueError("grouping m must be >= 1")
    if n - 2 * m < 1:
        raise ValueError(f"series of {n} samples supports groupings up to "
                         f"m = {(n - 1) // 2}")
    d = x[m:n - m] - x[:n - 2 * m]
    return float(np.sum(d * d) / (2.0 * (n - 2 * m) * m**2 * series.t_s**2))


def allan_curve(series: AllanSeries,
                groupings: Sequence[int] | None = None
                ) -> tuple[np.ndarray, np.ndarray]:
    """Allan variance against grouping time, for stability plots.

    Defaults to octave groupings 1, 2, 4, ... up to the largest valid m.
    Returns (tau_values, sigma_sq) with tau = m * t_s.
    """
    n = series.samples.size
    if groupings is None:
        groupings = []
        m = 1
        while n - 2 * m >= 1:
            groupings.append(m)
            m *= 2
    ms = np.asarray(list(groupings), dtype=int)
    var = np.array([allan_variance(series, int(m)) for m in ms])
    return ms * series.t_s, var


@dataclass(frozen=True)
class DynamicRange:
    """Unambiguous ceiling, noise floor, and their ratio."""

    v_max: float
    v_min: float

    @property
    def ratio(self) -> float:
        return self.v_max / self.v_min


def dynamic_range(t0: float, total_time: float, readout_efficiency: float,
                  t_coherence: float, gamma: float = 1.0,
                  mode: str = "fixed_time") -> DynamicRange:
    """Signal range between phase wrapping and the noise floor.

    A fringe only identifies the signal uniquely within half a period, so
    V_max = pi/(gamma t) for the shortest sensing time t in play.

    * ``"fixed_time"``: every shot senses for t0 (best chosen near the
      coherence time).  V_min = 2/(gamma C sqrt(t_coherence T)), giving a
      ratio that grows as sqrt(T).
    * ``"exponential_schedule"``: sensing times double, t_m = 2^m t0, with
      as many doublings as fit the time budget (sum 2^m t0 <= T).  The
      shortest time keeps V_max = pi/(gamma t0) while the longest sets
      V_min = 2/(gamma C sqrt(t_M T)); the ratio then grows linearly in T.
    """
    if t0 <= 0 or total_time <= 0 or t_coherence <= 0:
        raise ValueError("times must be positive")
    if not 0.0 < readout_efficiency <= 1.0:
        raise ValueError("readout_efficiency must lie in (0, 1]")
    v_max = math.pi / (gamma * t0)
    if mode == "fixed_time":
        v_min = 2.0 / (gamma * readout_efficiency
                       * math.sqrt(t_coherence * total_time))
    elif mode == "exponential_schedule":
        if total_time < t0:
            raise ValueError("total_time must accommodate the base step")
        n_steps = math.floor(math.log2(total_time / t0 + 1.0))
        t_longest = 2.0 ** (n_steps - 1) * t0
        v_min = 2.0 / (gamma * readout_efficiency
                       * math.sqrt(t_longest * total_time))
    else:
        raise ValueError("mode must be 'fixed_time' or "
                         "'exponential_schedule'")
    return DynamicRange(v_max, v_min)
