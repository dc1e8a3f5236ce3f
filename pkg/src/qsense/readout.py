"""Readout models: ideal projective, thresholded single-shot, and averaged.

A measurement record is a real number x per shot.  The upper level |1> is
detected with efficiency ``beta``; the two outcomes produce records centred
at ``xbar1`` and ``xbar0`` with common Gaussian width ``sigma_x``.

Figures of merit follow the variance budget of a differential measurement:

* single-shot:  kappa_i = (1/2) erfc(|xbar_i - x_threshold| / (sqrt(2) sigma_x)),
  R = 2 sqrt(kappa_bar), C = 1 / sqrt(1 + 4 kappa_bar);
* averaged:     R = 2 sigma_x / |xbar1 - xbar0| per shot, C = 1 / sqrt(1 + R^2).

C is the factor by which readout noise inflates the minimum detectable
signal relative to projection-noise-limited detection (C = 1 is ideal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .qubit import QubitState


@dataclass(frozen=True)
class IdealReadout:
    """Noiseless projective readout; records are exactly xbar0 or xbar1."""

    xbar0: float = 0.0
    xbar1: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        _check_common(self)


@dataclass(frozen=True)
class SingleShotReadout:
    """Gaussian records thresholded shot by shot.

    ``threshold`` defaults to the midpoint between the two record means.
    """

    xbar0: float
    xbar1: float
    sigma_x: float
    beta: float = 1.0
    threshold: float | None = None

    def __post_init__(self):
        _check_common(self)
        if self.sigma_x <= 0:
            raise ValueError("sigma_x must be positive")

    @property
    def x_threshold(self) -> float:
        if self.threshold is not None:
            return self.threshold
        return 0.5 * (self.xbar0 + self.xbar1)


@dataclass(frozen=True)
class AveragedReadout:
    """Gaussian records averaged without thresholding (e.g. photon counts)."""

    xbar0: float
    xbar1: float
    sigma_x: float
    beta: float = 1.0

    def __post_init__(self):
        _check_common(self)
        if self.sigma_x <= 0:
            raise ValueError("sigma_x must be positive")


ReadoutModel = IdealReadout | SingleShotReadout | AveragedReadout


def _check_common(model):
    if not 0.0 < model.beta <= 1.0:
        raise ValueError("beta must be in (0, 1]")
    if model.xbar0 == model.xbar1:
        raise ValueError("xbar0 and xbar1 must differ")


@dataclass(frozen=True)
class ReadoutParameters:
    """Misassignment probabilities and derived figures of merit."""

    kappa0: float
    kappa1: float
    noise_ratio: float
    contrast: float


def readout_parameters(model: ReadoutModel) -> ReadoutParameters:
    """Misassignment (kappa0, kappa1), noise-to-signal ratio R, contrast C."""
    if isinstance(model, IdealReadout):
        return ReadoutParameters(0.0, 0.0, 0.0, 1.0)
    delta = abs(model.xbar1 - model.xbar0)
    if isinstance(model, SingleShotReadout):
        xt = model.x_threshold
        k0 = 0.5 * erfc(abs(model.xbar0 - xt) / (np.sqrt(2) * model.sigma_x))
        k1 = 0.5 * erfc(abs(model.xbar1 - xt) / (np.sqrt(2) * model.sigma_x))
        kbar = 0.5 * (k0 + k1)
        r = 2.0 * np.sqrt(kbar)
        c = 1.0 / np.sqrt(1.0 + 4.0 * kbar)
        return ReadoutParameters(float(k0), float(k1), float(r), float(c))
    # Averaged: kappas quoted against the midpoint, as a diagnostic only.
    k = 0.5 * erfc(delta / (2.0 * np.sqrt(2) * model.sigma_x))
    r = 2.0 * model.sigma_x / delta
    c = 1.0 / np.sqrt(1.0 + r * r)
    return ReadoutParameters(float(k), float(k), float(r), float(c))


def readout_sample(state: QubitState, model: ReadoutModel, rng, n_shots: int = 1):
    """Draw ``n_shots`` measurement records from a state.

    Detection efficiency beta scales the probability of registering |1>.
    """
    p1 = model.beta * state.population(1)
    return sample_records(p1, model, rng, n_shots)


def sample_records(p1: float, model: ReadoutModel, rng, n_shots: int = 1):
    """Measurement records for a given upper-level detection probability."""
    if not 0.0 <= p1 <= 1.0 + 1e-12:
        raise ValueError(f"p1 must be a probability, got {p1}")
    return draw_readings(np.full(n_shots, min(p1, 1.0)), model, rng)


def draw_readings(p1, model: ReadoutModel, rng):
    """One measurement record per entry of ``p1`` (shot i at probability i)."""
    p = np.asarray(p1, dtype=float)
    if p.size and (p.min() < -1e-12 or p.max() > 1.0 + 1e-12):
        raise ValueError("p1 entries must be probabilities")
    hits = rng.random(p.shape) < np.clip(p, 0.0, 1.0)
    x = np.where(hits, model.xbar1, model.xbar0).astype(float)
    if isinstance(model, (SingleShotReadout, AveragedReadout)):
        x += model.sigma_x * rng.standard_normal(p.shape)
    return x


def estimate_probability(readings, model: ReadoutModel) -> tuple[float, float]:
    """Estimate (p_hat, sigma_p) for the |1> occupation from raw records.

    The returned sigma_p includes both the readout-noise term and the
    projection-noise term p(1-p)/N evaluated at the estimate.
    """
    x = np.asarray(readings, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("need at least one reading")
    sign = 1.0 if model.xbar1 > model.xbar0 else -1.0

    if isinstance(model, IdealReadout):
        xt = 0.5 * (model.xbar0 + model.xbar1)
        p = float(np.mean(sign * (x - xt) > 0))
        var = p * (1.0 - p) / n
        return p, float(np.sqrt(var))

    if isinstance(model, SingleShotReadout):
        xt = model.x_threshold
        p = float(np.mean(sign * (x - xt) > 0))
        pars = readout_parameters(model)
        var = (
            pars.kappa1 * (1.0 - pars.kappa1) * p
            + pars.kappa0 * (1.0 - pars.kappa0) * (1.0 - p)
            + p * (1.0 - p)
        ) / n
        return p, float(np.sqrt(var))

    delta = model.xbar1 - model.xbar0
    p = float((np.mean(x) - model.xbar0) / delta)
    proj = max(p * (1.0 - p), 0.0)
    var = model.sigma_x**2 / (n * delta**2) + proj / n
    return p, float(np.sqrt(var))
