"""Config-driven experiment runs with reproducible on-disk artifacts.

A run is described by one JSON document:

    {"experiment": "ramsey",
     "parameters": {"omega0": 6.0, "t_max": 2.0},
     "seed": 7, "trials": 2000, "output_dir": "runs/demo"}

:func:`validate_config` turns such a document into a typed
:class:`ExperimentConfig`, reporting every violation at once (with
spelling suggestions for unknown keys); :func:`run_experiment` dispatches
to the library, then writes ``<experiment>.csv``, ``summary.json`` and
``manifest.json`` into the output directory.  All numbers are formatted
with shortest round-trip precision and every random draw derives from the
config seed, so a (config, seed) pair pins the CSV and summary bytes
exactly.  The manifest additionally records wall-clock time and per-file
checksums, and is written last, only after the data files are in place.

Nothing here computes physics; runners delegate to the library modules
and only assemble tables and headline scalars.
"""

from __future__ import annotations

import difflib
import hashlib
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .collective import (
    ghz_probability,
    qcrb_ghz,
    qcrb_uncorrelated,
    twisting_scan,
)
from .filters import decoherence_from_psd, ModulationFunction, reconstruct_psd
from .filters import relaxation_rate
from .montecarlo import simulate_protocol
from .phase_estimation import scaling_benchmark
from .protocols import (
    SequenceSpec,
    correlation_response,
    continuous_sampling_estimate,
    multipulse_response,
    averaged_weighting_sq_of,
    rabi_probability,
    ramsey_probability,
)
from .qubit import InternalHamiltonian
from .sensitivity import (
    AllanSeries,
    SensitivityInputs,
    allan_curve,
    dynamic_range,
    minimum_detectable_signal,
    unit_snr_signal,
)
from .signals import LorentzianPSD, ToneSpec, sample_waveform
from .walsh import walsh_coefficients, walsh_reconstruct

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ParamSpec",
    "TableResult",
    "validate_config",
    "list_experiments",
    "run_experiment",
    "registry_names",
]


class ConfigError(ValueError):
    """Invalid config document; ``violations`` lists every problem."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    parameters: dict
    seed: int = 0
    trials: int = 500
    output_dir: str = "runs"


@dataclass(frozen=True)
class ParamSpec:
    """Schema for one experiment parameter."""

    kind: str  # "float" | "int" | "str" | "bool"
    doc: str
    required: bool = False
    default: object = None
    minimum: object = None
    maximum: object = None
    exclusive_min: bool = False
    choices: tuple = ()
    even: bool = False
    power_of_two: bool = False

    def describe(self) -> dict:
        out = {"type": self.kind, "required": self.required,
               "doc": self.doc}
        if not self.required:
            out["default"] = self.default
        if self.minimum is not None:
            out["min"] = self.minimum
            out["exclusive_min"] = self.exclusive_min
        if self.maximum is not None:
            out["max"] = self.maximum
        if self.choices:
            out["choices"] = list(self.choices)
        if self.even:
            out["even"] = True
        if self.power_of_two:
            out["power_of_two"] = True
        return out


@dataclass(frozen=True)
class TableResult:
    """One experiment's tabular output plus headline scalars."""

    columns: tuple
    rows: list
    summary: dict


@dataclass(frozen=True)
class Experiment:
    name: str
    doc: str
    uses_trials: bool
    params: dict
    runner: Callable
    cross_check: Callable | None = None


def _f(doc, required=False, default=None, minimum=None, maximum=None,
       exclusive_min=False, choices=()):
    return ParamSpec("float", doc, required, default, minimum, maximum,
                     exclusive_min, choices)


def _i(doc, required=False, default=None, minimum=None, maximum=None,
       even=False, power_of_two=False):
    return ParamSpec("int", doc, required, default, minimum, maximum,
                     even=even, power_of_two=power_of_two)


def _s(doc, choices, default=None):
    return ParamSpec("str", doc, required=default is None, default=default,
                     choices=tuple(choices))


def _lorentzian_params():
    return {
        "s0": _f("peak two-sided noise density", required=True,
                 minimum=0.0, exclusive_min=True),
        "half_width": _f("Lorentzian half width (rad/s)", required=True,
                         minimum=0.0, exclusive_min=True),
        "omega_c": _f("center frequency (rad/s)", default=0.0,
                      minimum=0.0),
    }


def _fit_rate(ts, amplitude, t_start):
    """Late-time exponential rate of a decaying positive record."""
    mask = (ts >= t_start) & (amplitude > 0.0)
    if np.count_nonzero(mask) < 2:
        raise ValueError("fit window holds fewer than 2 usable points; "
                         "lower fit_start or raise trials")
    slope = np.polyfit(ts[mask], np.log(amplitude[mask]), 1)[0]
    return -float(slope), int(np.count_nonzero(mask))


def _spectral_peak_frequency(values, spacing):
    """Frequency of the dominant non-DC bin of a real record."""
    spectrum = np.abs(np.fft.rfft(values - np.mean(values)))
    freqs = np.fft.rfftfreq(len(values), d=spacing)
    return float(freqs[1 + int(np.argmax(spectrum[1:]))])


# --------------------------------------------------------------------
# runners: (parameters, seed, trials) -> TableResult


def _run_ramsey(p, seed, trials):
    ts = np.linspace(0.0, p["t_max"], p["n_points"])
    res = simulate_protocol(SequenceSpec.ramsey(ts), n_trials=trials,
                            seed=seed, h0=InternalHamiltonian(p["omega0"]))
    analytic = ramsey_probability(p["omega0"], ts)
    rows = [(t, ph, sp, pa) for t, ph, sp, pa in
            zip(ts, res.p_hat, res.sigma_p, analytic)]
    dev = np.abs(res.p_hat - analytic)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(res.sigma_p > 0, dev / res.sigma_p, 0.0)
    return TableResult(
        ("t_s", "p_hat", "sigma_p", "p_analytic"), rows,
        {"max_abs_deviation": float(dev.max()),
         "max_sigma_deviation": float(z.max()),
         "n_trials": int(trials)})


def _run_rabi(p, seed, trials):
    ts = np.linspace(0.0, p["t_max"], p["n_points"])
    delta = p["detuning"]
    res = simulate_protocol(SequenceSpec.rabi(ts, p["omega1"]),
                            n_trials=trials, seed=seed,
                            h0=InternalHamiltonian(-2.0 * delta))
    analytic = rabi_probability(delta, p["omega1"], ts)
    rows = [(t, ph, sp, pa) for t, ph, sp, pa in
            zip(ts, res.p_hat, res.sigma_p, analytic)]
    contrast = p["omega1"] ** 2 / (p["omega1"] ** 2 + delta**2)
    return TableResult(
        ("t_s", "p_hat", "sigma_p", "p_analytic"), rows,
        {"max_abs_deviation": float(np.abs(res.p_hat - analytic).max()),
         "analytic_contrast": float(contrast),
         "n_trials": int(trials)})


def _run_multipulse(p, seed, trials):
    seq_cls = SequenceSpec.cp if p["kind"] == "cp" else SequenceSpec.pdd
    seq = seq_cls(p["n_pulses"], p["tau"])
    fs = np.linspace(p["f_min"], p["f_max"], p["n_points"])
    rows = []
    for f in fs:
        tone = ToneSpec(p["v_pk"], float(f), p["alpha"])
        prob = multipulse_response(seq, tone, p["gamma"],
                                   p["amplitude_model"])
        rows.append((float(f), prob, averaged_weighting_sq_of(seq,
                                                              float(f))))
    wbar = np.array([r[2] for r in rows])
    return TableResult(
        ("f_ac", "p", "wbar_sq"), rows,
        {"f_peak": float(fs[int(np.argmax(wbar))]),
         "f_resonance": 1.0 / (2.0 * p["tau"]),
         "wbar_sq_peak": float(wbar.max()),
         # value the resonance approaches as the train grows long
         "wbar_sq_resonance_limit": 2.0 / math.pi**2})


def _run_correlation(p, seed, trials):
    gaps = np.linspace(0.0, p["gap_max"], p["n_points"], endpoint=False)
    probs = correlation_response(p["phase_amp"], p["f_ac"], gaps,
                                 p["phase_model"], p["alpha"])
    f_rec = _spectral_peak_frequency(probs, gaps[1] - gaps[0])
    return TableResult(
        ("t_gap", "p"), list(zip(gaps, probs)),
        {"f_recovered": f_rec, "f_true": p["f_ac"],
         "rel_error": abs(f_rec - p["f_ac"]) / p["f_ac"]})


def _run_walsh(p, seed, trials):
    tone = ToneSpec(p["v_pk"], p["f_ac"], p["alpha"])
    total = p["total_time"]

    def signal(t):
        return sample_waveform(tone, t)

    coeffs = walsh_coefficients(signal, p["n_terms"], total)
    series = walsh_reconstruct(coeffs)
    s_grid = (np.arange(512) + 0.5) / 512.0
    truth = signal(s_grid * total)
    err = series(s_grid) - truth
    rms_err = float(np.sqrt(np.mean(err**2)))
    rms_sig = float(np.sqrt(np.mean(truth**2)))
    return TableResult(
        ("n", "coefficient"), list(enumerate(coeffs)),
        {"rms_reconstruction_error": rms_err,
         "signal_rms": rms_sig,
         "relative_rms_error": rms_err / rms_sig if rms_sig else 0.0})


def _run_continuous_sampling(p, seed, trials):
    tone = ToneSpec(p["v_pk"], p["f_signal"], p["alpha"])
    probe = p["probe_time"] if p["probe_time"] > 0 else None
    est = continuous_sampling_estimate(tone, p["t_sample"], p["duration"],
                                       p["gamma"], probe)
    folded = abs(p["f_signal"] - round(p["f_signal"] * p["t_sample"])
                 / p["t_sample"])
    return TableResult(
        ("frequency", "power"),
        list(zip(est.frequencies, est.power)),
        {"f_estimate": est.f_estimate,
         "f_alias_expected": folded,
         "resolution": est.resolution})


def _run_noise_spectroscopy(p, seed, trials):
    psd = LorentzianPSD(s0=p["s0"], half_width=p["half_width"],
                        omega_c=p["omega_c"])
    taus = np.geomspace(p["tau_min"], p["tau_max"], p["n_taus"])
    n, gamma = p["n_pulses"], p["gamma"]
    children = np.random.SeedSequence(seed).spawn(len(taus))
    measurements = []
    for tau, child in zip(taus, children):
        if p["method"] == "formula":
            chi = decoherence_from_psd(
                psd, ModulationFunction.cp_train(n, float(tau)), gamma)
        else:
            res = simulate_protocol(
                SequenceSpec.cp(n, float(tau)), psd, gamma=gamma,
                n_trials=trials, seed=int(child.generate_state(1)[0]))
            # composite readout: p = (1 - exp(-chi))/2
            coherence = max(1.0 - 2.0 * float(res.p_hat[0]), 1e-12)
            chi = -math.log(coherence)
        measurements.append((float(tau), n, chi))
    omega, s_rec = reconstruct_psd(measurements, gamma=gamma)
    s_true = psd.value(omega)
    rel = (s_rec - s_true) / s_true
    rows = list(zip(omega, s_true, s_rec, rel))
    return TableResult(
        ("omega", "s_true", "s_recovered", "rel_error"), rows,
        {"mean_abs_rel_error": float(np.mean(np.abs(rel))),
         "max_abs_rel_error": float(np.max(np.abs(rel))),
         "n_bins": int(omega.size)})


def _run_relaxometry(p, seed, trials):
    psd = LorentzianPSD(s0=p["s0"], half_width=p["half_width"],
                        omega_c=p["omega_c"])
    ts = np.linspace(0.0, p["t_max"], p["n_points"])
    gamma = p["gamma"]
    fit_start = p["fit_start"] if p["fit_start"] > 0 else p["t_max"] / 3.0
    if p["kind"] == "t1":
        res = simulate_protocol(SequenceSpec.t1_relaxation(ts),
                                {"perp": psd}, gamma=gamma,
                                h0=p["omega0"], n_trials=trials, seed=seed)
        record = 2.0 * res.p_hat - 1.0
        # the drive applies the density to each transverse axis, so the
        # total transverse density seen by the formula is twice psd
        formula = 2.0 * relaxation_rate("t1", psd_perp=psd, gamma=gamma,
                                        omega0=p["omega0"])
    else:
        res = simulate_protocol(SequenceSpec.spin_lock(ts, p["omega1"]),
                                psd, gamma=gamma, n_trials=trials,
                                seed=seed)
        record = 1.0 - 2.0 * res.p_hat
        formula = relaxation_rate("spin_lock_resonant", psd_par=psd,
                                  gamma=gamma, omega1=p["omega1"])
    fitted, n_fit = _fit_rate(ts, record, fit_start)
    rows = list(zip(ts, res.p_hat, res.sigma_p))
    return TableResult(
        ("t_s", "p_hat", "sigma_p"), rows,
        {"fitted_rate": fitted, "formula_rate": float(formula),
         "rel_error": abs(fitted - formula) / formula,
         "fit_start": float(fit_start), "n_fit_points": n_fit})


def _run_sensitivity(p, seed, trials):
    inputs = SensitivityInputs(
        gamma=p["gamma"], readout_efficiency=p["readout_efficiency"],
        t_coherence=p["t_coherence"], t_overhead=p["t_overhead"],
        decay_exponent=p["decay_exponent"],
        detection_order=p["detection_order"])
    ts = np.geomspace(p["t_min"], p["t_max"], p["n_points"])
    rows = [(float(t), unit_snr_signal(inputs, float(t))) for t in ts]
    best = minimum_detectable_signal(inputs)
    slope_ref = math.sqrt(2.0 * math.e) / (
        p["gamma"] * p["readout_efficiency"] * math.sqrt(p["t_coherence"]))
    return TableResult(
        ("t_s", "v_unit_snr"), rows,
        {"v_min": best.v_min, "t_optimal": best.t_optimal,
         "at_boundary": best.at_boundary,
         # closed form for slope readout, unit decay exponent, no overhead
         "slope_reference_v_min": slope_ref})


def _run_allan(p, seed, trials):
    n, t_s, amp = p["n_samples"], p["t_s"], p["amplitude"]
    if p["signal"] == "white":
        steps = np.random.default_rng(seed).normal(0.0, amp, size=n)
        samples = np.cumsum(steps) if p["integrate"] else steps
        expected_first = amp**2 / 2.0 if p["integrate"] else amp**2 / t_s**2
    elif p["signal"] == "ramp":
        samples = amp * np.arange(n) * t_s
        expected_first = amp**2 / 2.0
    else:  # alternating
        samples = amp * (-1.0) ** np.arange(n)
        expected_first = 2.0 * amp**2 / t_s**2
    groupings, variances = allan_curve(AllanSeries(samples, t_s))
    slope = float(np.polyfit(np.log(groupings), np.log(variances), 1)[0])
    return TableResult(
        ("t_grouping", "allan_variance"),
        list(zip(groupings, variances)),
        {"fitted_slope": slope,
         "first_value": float(variances[0]),
         "expected_first_value": float(expected_first)})


def _run_phase_estimation(p, seed, trials):
    curve = scaling_benchmark(
        p["estimator"], range(p["bits_min"], p["bits_max"] + 1),
        trials=trials, seed=seed, contrast=p["contrast"], t0=p["t0"],
        base_repeats=p["base_repeats"], decrement=p["decrement"])
    rows = [(float(t), float(me), float(lo), float(hi), curve.estimator)
            for t, me, lo, hi in zip(curve.total_times,
                                     curve.median_errors,
                                     curve.quantile_10,
                                     curve.quantile_90)]
    return TableResult(
        ("T_total", "median_error", "quantile_10", "quantile_90",
         "estimator"), rows,
        {"fitted_exponent": curve.fitted_exponent(),
         "estimator": curve.estimator})


def _run_dynamic_range(p, seed, trials):
    rows = []
    for k in range(p["k_min"], p["k_max"] + 1):
        total = 2.0**k * p["t0"]
        dr = dynamic_range(p["t0"], total, p["readout_efficiency"],
                           p["t_coherence"], p["gamma"], p["mode"])
        rows.append((total, dr.v_max, dr.v_min, dr.ratio))
    totals = np.array([r[0] for r in rows])
    ratios = np.array([r[3] for r in rows])
    slope = float(np.polyfit(np.log(totals), np.log(ratios), 1)[0])
    return TableResult(
        ("t_total", "v_max", "v_min", "range_ratio"), rows,
        {"fitted_exponent": slope, "mode": p["mode"]})


def _run_ghz(p, seed, trials):
    m = p["num_spins"]
    phases = np.linspace(0.0, 2.0 * math.pi, p["phase_points"],
                         endpoint=False)
    p_ghz = np.array([ghz_probability(m, ph) for ph in phases])
    p_one = np.array([ghz_probability(1, ph) for ph in phases])
    rows = list(zip(phases, p_ghz, p_one))
    # fringe count per full turn of single-spin phase
    spectrum = np.abs(np.fft.rfft(p_ghz - p_ghz.mean()))
    fringes = 1 + int(np.argmax(spectrum[1:]))
    plain = qcrb_uncorrelated(p["gamma"], p["t"], m, p["n_shots"],
                              p["chi"])
    ghz = qcrb_ghz(p["gamma"], p["t"], m, p["n_shots"], p["chi"])
    return TableResult(
        ("phase", "p_ghz", "p_single"), rows,
        {"fringe_count": fringes, "num_spins": int(m),
         "qcrb_ratio": plain / ghz,
         "expected_qcrb_ratio": math.sqrt(m)})


def _run_squeezing(p, seed, trials):
    angles = np.linspace(0.0, p["twist_max"], p["n_points"])
    scan = twisting_scan(p["num_spins"], angles)
    rows = list(zip(scan.twist_angles, scan.xi, scan.xi_r,
                    scan.polarization))
    best = int(np.argmin(scan.xi_r))
    return TableResult(
        ("twist_angle", "xi", "xi_r", "polarization"), rows,
        {"min_xi_r": float(scan.xi_r[best]),
         "optimal_twist": float(scan.twist_angles[best]),
         "css_xi_r": float(scan.xi_r[0])})


# --------------------------------------------------------------------
# registry


def _sweep_params(default_points, max_points=100_000):
    return {
        "t_max": _f("sweep end time (s)", required=True, minimum=0.0,
                    exclusive_min=True),
        "n_points": _i("number of sweep points", default=default_points,
                       minimum=2, maximum=max_points),
    }


_REGISTRY = {
    "ramsey": Experiment(
        "ramsey",
        "Free-precession fringe vs evolution time, sampled by Monte Carlo "
        "and compared with the closed form.",
        True,
        {"omega0": _f("precession frequency (rad/s)", required=True),
         **_sweep_params(20)},
        _run_ramsey),
    "rabi": Experiment(
        "rabi",
        "Driven oscillation vs pulse length at fixed drive and detuning.",
        True,
        {"omega1": _f("drive amplitude (rad/s)", required=True,
                      minimum=0.0, exclusive_min=True),
         "detuning": _f("drive detuning (rad/s)", default=0.0),
         **_sweep_params(40)},
        _run_rabi),
    "multipulse": Experiment(
        "multipulse",
        "Pulse-train response and averaged weighting across a band of "
        "tone frequencies.",
        False,
        {"kind": _s("pulse train family", ("cp", "pdd"), default="cp"),
         "n_pulses": _i("number of pi pulses", default=8, minimum=2,
                        even=True),
         "tau": _f("inter-pulse period (s)", required=True, minimum=0.0,
                   exclusive_min=True),
         "v_pk": _f("tone amplitude", required=True, minimum=0.0),
         "alpha": _f("tone phase (rad)", default=0.0),
         "f_min": _f("lowest tone frequency (Hz)", required=True,
                     minimum=0.0, exclusive_min=True),
         "f_max": _f("highest tone frequency (Hz)", required=True,
                     minimum=0.0, exclusive_min=True),
         "n_points": _i("number of frequencies", default=101, minimum=2,
                        maximum=100_000),
         "gamma": _f("coupling (rad/s per signal unit)", default=1.0,
                     minimum=0.0, exclusive_min=True),
         "amplitude_model": _s(
             "tone statistics",
             ("fixed", "random_phase", "random_amplitude"),
             default="fixed")},
        _run_multipulse,
        cross_check=lambda p: (
            ["parameters.f_max: must exceed f_min"]
            if p["f_max"] <= p["f_min"] else [])),
    "correlation": Experiment(
        "correlation",
        "Two-block correlation readout vs storage gap; recovers the tone "
        "frequency from the gap oscillation.",
        False,
        {"phase_amp": _f("per-block phase amplitude (rad)", required=True,
                         minimum=0.0),
         "f_ac": _f("tone frequency (Hz)", required=True, minimum=0.0,
                    exclusive_min=True),
         "gap_max": _f("largest storage gap (s)", required=True,
                       minimum=0.0, exclusive_min=True),
         "n_points": _i("number of gaps", default=128, minimum=8,
                        maximum=100_000),
         "alpha": _f("tone phase for the fixed model (rad)", default=0.0),
         "phase_model": _s("tone phase statistics",
                           ("fixed", "random_phase"), default="fixed")},
        _run_correlation),
    "walsh": Experiment(
        "walsh",
        "Walsh-basis expansion of a tone and partial-sum reconstruction "
        "error.",
        False,
        {"f_ac": _f("tone frequency (Hz)", required=True, minimum=0.0),
         "v_pk": _f("tone amplitude", required=True, minimum=0.0),
         "alpha": _f("tone phase (rad)", default=0.0),
         "n_terms": _i("number of Walsh terms", default=16, minimum=2,
                       maximum=1024, power_of_two=True),
         "total_time": _f("expansion window (s)", required=True,
                          minimum=0.0, exclusive_min=True)},
        _run_walsh),
    "continuous_sampling": Experiment(
        "continuous_sampling",
        "Stroboscopic sampling of a tone; spectrum of the sample record "
        "and the aliased frequency estimate.",
        False,
        {"f_signal": _f("tone frequency (Hz)", required=True, minimum=0.0,
                        exclusive_min=True),
         "v_pk": _f("tone amplitude", required=True, minimum=0.0),
         "alpha": _f("tone phase (rad)", default=0.0),
         "t_sample": _f("sampling period (s)", required=True, minimum=0.0,
                        exclusive_min=True),
         "duration": _f("record length (s)", required=True, minimum=0.0,
                        exclusive_min=True),
         "gamma": _f("coupling (rad/s per signal unit)", default=1.0),
         "probe_time": _f("per-sample probe time (s); 0 = auto",
                          default=0.0, minimum=0.0)},
        _run_continuous_sampling),
    "noise_spectroscopy": Experiment(
        "noise_spectroscopy",
        "Recover a Lorentzian spectral density from pulse-train "
        "decoherence, by formula or by Monte Carlo.",
        True,
        {**_lorentzian_params(),
         "n_pulses": _i("pulses per train", default=16, minimum=2,
                        even=True),
         "tau_min": _f("shortest inter-pulse period (s)", required=True,
                       minimum=0.0, exclusive_min=True),
         "tau_max": _f("longest inter-pulse period (s)", required=True,
                       minimum=0.0, exclusive_min=True),
         "n_taus": _i("number of periods (log spaced)", default=10,
                      minimum=2, maximum=1000),
         "gamma": _f("coupling (rad/s per signal unit)", default=1.0,
                     minimum=0.0, exclusive_min=True),
         "method": _s("chi source", ("formula", "mc"),
                      default="formula")},
        _run_noise_spectroscopy,
        cross_check=lambda p: (
            ["parameters.tau_max: must exceed tau_min"]
            if p["tau_max"] <= p["tau_min"] else [])),
    "relaxometry": Experiment(
        "relaxometry",
        "Monte-Carlo population or locked-spin decay with the fitted "
        "rate checked against the weak-coupling formula.",
        True,
        {**_lorentzian_params(),
         "kind": _s("decay channel", ("t1", "spin_lock"), default="t1"),
         "omega0": _f("level splitting (rad/s), t1 kind", default=0.0),
         "omega1": _f("lock drive (rad/s), spin_lock kind", default=0.0,
                      minimum=0.0),
         "gamma": _f("coupling (rad/s per signal unit)", default=1.0,
                     minimum=0.0, exclusive_min=True),
         "fit_start": _f("start of the rate-fit window (s); 0 = auto",
                         default=0.0, minimum=0.0),
         **_sweep_params(13)},
        _run_relaxometry,
        cross_check=lambda p: (
            ["parameters.omega1: spin_lock kind needs omega1 > 0"]
            if p["kind"] == "spin_lock" and p["omega1"] <= 0 else [])),
    "sensitivity": Experiment(
        "sensitivity",
        "Unit-SNR signal vs interrogation time and the optimized minimum "
        "detectable signal.",
        False,
        {"gamma": _f("coupling (rad/s per signal unit)", default=1.0,
                     minimum=0.0, exclusive_min=True),
         "readout_efficiency": _f("readout efficiency factor in (0, 1]",
                                  default=1.0, minimum=0.0,
                                  exclusive_min=True, maximum=1.0),
         "t_coherence": _f("coherence time (s)", default=1.0, minimum=0.0,
                           exclusive_min=True),
         "t_overhead": _f("dead time per shot (s)", default=0.0,
                          minimum=0.0),
         "decay_exponent": _f("stretch of the coherence decay",
                              default=1.0, minimum=0.0,
                              exclusive_min=True),
         "detection_order": _i("1 = slope, 2 = variance readout",
                               default=1, minimum=1, maximum=2),
         "t_min": _f("shortest interrogation time (s)", required=True,
                     minimum=0.0, exclusive_min=True),
         "t_max": _f("longest interrogation time (s)", required=True,
                     minimum=0.0, exclusive_min=True),
         "n_points": _i("number of times (log spaced)", default=64,
                        minimum=2, maximum=100_000)},
        _run_sensitivity,
        cross_check=lambda p: (
            ["parameters.t_max: must exceed t_min"]
            if p["t_max"] <= p["t_min"] else [])),
    "allan": Experiment(
        "allan",
        "Allan variance of a synthesized sample record across octave "
        "groupings.",
        False,
        {"signal": _s("record type", ("white", "ramp", "alternating"),
                      default="white"),
         "amplitude": _f("step deviation / ramp slope / alternation",
                         default=1.0, minimum=0.0, exclusive_min=True),
         "integrate": ParamSpec("bool", "accumulate white steps into a "
                                "random walk", default=True),
         "n_samples": _i("record length", default=4096, minimum=16,
                         maximum=1_000_000),
         "t_s": _f("sampling interval (s)", required=True, minimum=0.0,
                   exclusive_min=True)},
        _run_allan),
    "phase_estimation": Experiment(
        "phase_estimation",
        "Median error vs total sensing time for one phase estimator "
        "(trials sets the repetitions per point).",
        True,
        {"estimator": _s("estimation strategy",
                         ("adaptive", "bayesian", "fixed_time"),
                         default="adaptive"),
         "bits_min": _i("smallest register size", default=2, minimum=1,
                        maximum=16),
         "bits_max": _i("largest register size", default=10, minimum=1,
                        maximum=16),
         "contrast": _f("fringe contrast in (0, 1]", default=1.0,
                        minimum=0.0, exclusive_min=True, maximum=1.0),
         "t0": _f("base exposure (s)", default=1.0, minimum=0.0,
                  exclusive_min=True),
         "base_repeats": _i("repeats at the longest exposure", default=5,
                            minimum=1),
         "decrement": _i("extra repeats per shorter exposure", default=2,
                         minimum=0)},
        _run_phase_estimation,
        cross_check=lambda p: (
            ["parameters.bits_max: must be >= bits_min"]
            if p["bits_max"] < p["bits_min"] else [])),
    "dynamic_range": Experiment(
        "dynamic_range",
        "Resolvable-range ratio vs total averaging time on a doubling "
        "ladder, for fixed or exponentially scheduled interrogation.",
        False,
        {"t0": _f("shortest interrogation time (s)", required=True,
                  minimum=0.0, exclusive_min=True),
         "k_min": _i("smallest doubling exponent", default=2, minimum=0),
         "k_max": _i("largest doubling exponent", default=12, minimum=0),
         "mode": _s("interrogation schedule",
                    ("fixed_time", "exponential_schedule"),
                    default="fixed_time"),
         "gamma": _f("coupling (rad/s per signal unit)", default=1.0,
                     minimum=0.0, exclusive_min=True),
         "readout_efficiency": _f("readout efficiency factor in (0, 1]",
                                  default=1.0, minimum=0.0,
                                  exclusive_min=True, maximum=1.0),
         "t_coherence": _f("coherence time (s)", default=1.0, minimum=0.0,
                           exclusive_min=True)},
        _run_dynamic_range,
        cross_check=lambda p: (
            ["parameters.k_max: must be >= k_min"]
            if p["k_max"] < p["k_min"] else [])),
    "ghz": Experiment(
        "ghz",
        "Entangled-ensemble fringe vs single-spin phase and the "
        "resolution-bound ratio against independent sensors.",
        False,
        {"num_spins": _i("ensemble size", required=True, minimum=1,
                         maximum=100_000),
         "phase_points": _i("phases per full turn", default=256,
                            minimum=16, maximum=100_000),
         "gamma": _f("coupling (rad/s per signal unit)", default=1.0,
                     minimum=0.0, exclusive_min=True),
         "t": _f("interrogation time (s)", default=1.0, minimum=0.0,
                 exclusive_min=True),
         "n_shots": _i("repetitions", default=1, minimum=1),
         "chi": _f("coherence exponent at time t", default=0.0,
                   minimum=0.0)},
        _run_ghz),
    "squeezing": Experiment(
        "squeezing",
        "Squeezing parameters of a twisted coherent ensemble across "
        "twist angles.",
        False,
        {"num_spins": _i("ensemble size", required=True, minimum=2,
                         maximum=2000),
         "twist_max": _f("largest twist angle (rad)", required=True,
                         minimum=0.0, exclusive_min=True),
         "n_points": _i("number of angles", default=61, minimum=2,
                        maximum=10_000)},
        _run_squeezing),
}


def registry_names() -> tuple:
    return tuple(sorted(_REGISTRY))


# --------------------------------------------------------------------
# validation


_TOP_LEVEL = ("experiment", "parameters", "seed", "trials", "output_dir")


def _suggest(key, options):
    close = difflib.get_close_matches(str(key), list(options), n=1)
    return f" (did you mean {close[0]!r}?)" if close else ""


def _check_value(path, spec: ParamSpec, value, errors):
    if spec.kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{path}: expected a number, got "
                          f"{type(value).__name__}")
            return None
        out = float(value)
        if not math.isfinite(out):
            errors.append(f"{path}: must be finite")
            return None
    elif spec.kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{path}: expected an integer, got "
                          f"{type(value).__name__}")
            return None
        out = int(value)
    elif spec.kind == "bool":
        if not isinstance(value, bool):
            errors.append(f"{path}: expected true or false")
            return None
        out = value
    else:
        if not isinstance(value, str):
            errors.append(f"{path}: expected a string")
            return None
        out = value
    if spec.choices and out not in spec.choices:
        errors.append(f"{path}: must be one of {list(spec.choices)}"
                      + _suggest(out, spec.choices))
        return None
    if spec.minimum is not None:
        if spec.exclusive_min and out <= spec.minimum:
            errors.append(f"{path}: must be > {spec.minimum}")
            return None
        if not spec.exclusive_min and out < spec.minimum:
            errors.append(f"{path}: must be >= {spec.minimum}")
            return None
    if spec.maximum is not None and out > spec.maximum:
        errors.append(f"{path}: must be <= {spec.maximum}")
        return None
    if spec.even and out % 2 != 0:
        errors.append(f"{path}: must be even")
        return None
    if spec.power_of_two and (out < 1 or out & (out - 1)):
        errors.append(f"{path}: must be a power of two")
        return None
    return out


def validate_config(raw) -> ExperimentConfig:
    """Typed config from a parsed JSON document, or every violation.

    Raises :class:`ConfigError` carrying the complete list of problems;
    unknown keys come with a closest-match suggestion.
    """
    if not isinstance(raw, dict):
        raise ConfigError(["config document must be a JSON object"])
    errors = []
    for key in raw:
        if key not in _TOP_LEVEL:
            errors.append(f"unknown key {key!r}"
                          + _suggest(key, _TOP_LEVEL))

    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        errors.append("seed: expected a non-negative integer")
        seed = 0
    trials = raw.get("trials", 500)
    if isinstance(trials, bool) or not isinstance(trials, int) \
            or trials < 1:
        errors.append("trials: expected a positive integer")
        trials = 1
    output_dir = raw.get("output_dir", "runs")
    if not isinstance(output_dir, str) or not output_dir:
        errors.append("output_dir: expected a nonempty path string")
        output_dir = "runs"

    name = raw.get("experiment")
    if name is None:
        errors.append("experiment: required")
        raise ConfigError(errors)
    if not isinstance(name, str) or name not in _REGISTRY:
        errors.append(f"experiment: unknown experiment {name!r}"
                      + _suggest(name, _REGISTRY))
        raise ConfigError(errors)
    exp = _REGISTRY[name]

    raw_params = raw.get("parameters", {})
    if not isinstance(raw_params, dict):
        errors.append("parameters: expected an object")
        raise ConfigError(errors)
    params = {}
    for key, value in raw_params.items():
        if key not in exp.params:
            errors.append(f"parameters.{key}: unknown parameter"
                          + _suggest(key, exp.params))
            continue
        checked = _check_value(f"parameters.{key}", exp.params[key],
                               value, errors)
        if checked is not None:
            params[key] = checked
    for key, spec in exp.params.items():
        if key in params:
            continue
        if key in raw_params:
            continue  # present but invalid; already reported
        if spec.required:
            errors.append(f"parameters.{key}: required ({spec.doc})")
        else:
            params[key] = spec.default
    if not errors and exp.cross_check is not None:
        errors.extend(exp.cross_check(params))
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(experiment=name, parameters=params, seed=seed,
                            trials=trials, output_dir=output_dir)


def list_experiments() -> dict:
    """JSON-ready registry dump: name -> description and schema."""
    out = {}
    for name in sorted(_REGISTRY):
        exp = _REGISTRY[name]
        out[name] = {
            "description": exp.doc,
            "trials_used": exp.uses_trials,
            "parameters": {k: spec.describe()
                           for k, spec in sorted(exp.params.items())},
        }
    return out


# --------------------------------------------------------------------
# execution


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _format_csv(result: TableResult) -> bytes:
    lines = [",".join(result.columns)]
    for row in result.rows:
        lines.append(",".join(_format_cell(v) for v in row))
    return ("\n".join(lines) + "\n").encode()


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _write_atomic(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_experiment(config: ExperimentConfig) -> dict:
    """Execute one validated config; returns {kind: path} of outputs.

    Writes ``<experiment>.csv`` and ``summary.json`` first, then a
    ``manifest.json`` carrying the config echo, toolkit version, seed,
    wall-clock time, and a sha256 per output file.  On any error the
    files written so far are removed, so a directory never holds a
    partial run.
    """
    exp = _REGISTRY[config.experiment]
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    written = []
    try:
        result = exp.runner(dict(config.parameters), config.seed,
                            config.trials)
        csv_path = out_dir / f"{config.experiment}.csv"
        csv_bytes = _format_csv(result)
        _write_atomic(csv_path, csv_bytes)
        written.append(csv_path)

        summary = {"experiment": config.experiment,
                   **_jsonable(result.summary)}
        summary_bytes = (json.dumps(summary, indent=2, sort_keys=True)
                         + "\n").encode()
        summary_path = out_dir / "summary.json"
        _write_atomic(summary_path, summary_bytes)
        written.append(summary_path)

        manifest = {
            "config": {
                "experiment": config.experiment,
                "parameters": _jsonable(config.parameters),
                "seed": config.seed,
                "trials": config.trials,
                "output_dir": config.output_dir,
            },
            "version": __version__,
            "seed": config.seed,
            "wall_clock_seconds": round(time.monotonic() - started, 6),
            "outputs": {
                csv_path.name: "sha256:"
                + hashlib.sha256(csv_bytes).hexdigest(),
                summary_path.name: "sha256:"
                + hashlib.sha256(summary_bytes).hexdigest(),
            },
        }
        manifest_path = out_dir / "manifest.json"
        _write_atomic(manifest_path,
                      (json.dumps(manifest, indent=2, sort_keys=True)
                       + "\n").encode())
        written.append(manifest_path)
        return {"csv": csv_path, "summary": summary_path,
                "manifest": manifest_path}
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
