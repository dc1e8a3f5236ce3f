"""Monte-Carlo propagation of pulse protocols over stochastic field records.

Trials advance in fixed-size chunks, each chunk seeded by a child of one
root SeedSequence, so a result depends only on (seed, n_trials) and never
on threading or batch boundaries.  The Bloch stepper selected in
:mod:`qsense._kernels` does the heavy lifting; QSENSE_THREADS bounds the
compiled backend's thread count (default: all cores).

Sweeps that share a trajectory prefix (free-evolution times, pulse counts
at fixed spacing) are simulated once per trial with state snapshots at the
sweep points; geometry-changing sweeps (echo time, pulse spacing) rerun per
point.  Sweep values are snapped to the step grid and the effective values
are reported back in the result.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ._kernels import evolve_bloch
from .qubit import InternalHamiltonian, SignalHamiltonian, rotate_bloch
from .readout import ReadoutModel, draw_readings, estimate_probability
from .signals import ToneSpec, _draw_records
from .protocols import SequenceSpec

__all__ = ["ToneEnsemble", "ProtocolResult", "simulate_protocol"]

# Trials per batch.  Fixed (not a parameter) so that the per-chunk seed
# schedule, and with it every sampled number, is reproducible.
_CHUNK = 512

_X_AXIS = np.array([1.0, 0.0, 0.0])

# Initial Bloch vector after the (virtual) preparation pulse, and the
# component whose decrease the closing measurement registers.
_START = {
    "ramsey": (1.0, 0.0, 0.0),
    "spin_echo": (1.0, 0.0, 0.0),
    "cp": (1.0, 0.0, 0.0),
    "pdd": (1.0, 0.0, 0.0),
    "spin_lock": (1.0, 0.0, 0.0),
    "rabi": (0.0, 0.0, 1.0),
    "t1": (0.0, 0.0, -1.0),
}
_MEAS_COLUMN = {
    "ramsey": 0,
    "spin_echo": 0,
    "cp": 0,
    "pdd": 0,
    "spin_lock": 0,
    "rabi": 2,
    "t1": 2,
}


def _thread_count() -> int:
    try:
        n = int(os.environ.get("QSENSE_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _normalize_seed(seed) -> int:
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.generate_state(1, np.uint64)[0])
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(0, 2**63 - 1))
    raise TypeError("seed must be an int, SeedSequence, or Generator")


@dataclass(frozen=True)
class ToneEnsemble:
    """Tone whose phase and/or amplitude is redrawn every trial.

    ``amplitude`` is the peak value, or the standard deviation of the
    zero-mean Gaussian amplitude when ``gaussian_amplitude`` is set.
    ``alpha`` is used only when the phase is not randomized.
    """

    amplitude: float
    f_ac: float
    random_phase: bool = True
    gaussian_amplitude: bool = False
    alpha: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if self.f_ac < 0:
            raise ValueError("f_ac must be non-negative")

    @property
    def randomized(self) -> bool:
        return self.random_phase or self.gaussian_amplitude


@dataclass(frozen=True)
class ProtocolResult:
    """Estimated excited-state probability along one sweep axis."""

    sweep_name: str | None
    sweep_values: np.ndarray
    p_hat: np.ndarray
    sigma_p: np.ndarray
    n_trials: int
    seed: int

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sweep_value", "p_hat", "sigma_p", "n_trials"])
            for v, p, s in zip(self.sweep_values, self.p_hat, self.sigma_p):
                w.writerow([repr(float(v)), repr(float(p)), repr(float(s)),
                            self.n_trials])


@dataclass
class _Drive:
    signal: SignalHamiltonian | None = None
    par_psd: object = None
    perp_psd: object = None
    ensemble: ToneEnsemble | None = None
    gamma: float = 1.0
    char_rates: tuple = field(default_factory=tuple)

    @property
    def stochastic(self) -> bool:
        if self.par_psd is not None or self.perp_psd is not None:
            return True
        return self.ensemble is not None and self.ensemble.randomized

    @property
    def needs_psd_grid(self) -> bool:
        return self.par_psd is not None or self.perp_psd is not None


def _is_psd(obj) -> bool:
    return hasattr(obj, "value") and hasattr(obj, "check_sampling")


def _resolve_drive(drive, gamma: float) -> _Drive:
    if drive is None:
        return _Drive(gamma=gamma)
    if isinstance(drive, SignalHamiltonian):
        return _Drive(signal=drive, gamma=gamma)
    if isinstance(drive, ToneSpec):
        v, f, a = drive.v_pk, drive.f_ac, drive.alpha
        sig = SignalHamiltonian(
            gamma, v_par=lambda t: v * np.cos(2.0 * math.pi * f * t + a)
        )
        return _Drive(signal=sig, gamma=gamma, char_rates=(2.0 * math.pi * f,))
    if isinstance(drive, ToneEnsemble):
        return _Drive(ensemble=drive, gamma=gamma)
    if _is_psd(drive):
        return _Drive(par_psd=drive, gamma=gamma)
    if isinstance(drive, dict):
        extra = set(drive) - {"par", "perp"}
        if extra:
            raise ValueError(f"unknown drive keys {sorted(extra)}")
        for v in drive.values():
            if not _is_psd(v):
                raise TypeError("dict drives map 'par'/'perp' to spectra")
        return _Drive(par_psd=drive.get("par"), perp_psd=drive.get("perp"),
                      gamma=gamma)
    raise TypeError(f"unsupported drive {type(drive).__name__}")


def _target_dt(total: float, drv: _Drive, seq: SequenceSpec,
               omega0: float) -> float:
    rates = [abs(omega0)]
    if seq.kind == "rabi":
        rates.append(2.0 * seq.omega1)
    elif seq.kind == "spin_lock":
        rates.append(seq.omega1)
        rates.append(abs(seq.delta_omega))
    if drv.ensemble is not None:
        rates.append(2.0 * math.pi * drv.ensemble.f_ac)
        # three sigma covers the Gaussian-amplitude tail
        rates.append(3.0 * drv.gamma * drv.ensemble.amplitude)
    if drv.signal is not None and total > 0:
        probe = drv.signal.sample(np.linspace(0.0, total, 257))
        rates.append(float(np.linalg.norm(probe, axis=1).max()))
    rates.extend(drv.char_rates)
    cands = [total / 256.0] if total > 0 else [1.0]
    rmax = max(rates)
    if rmax > 0:
        cands.append(2.0 * math.pi / rmax / 128.0)
    for psd in (drv.par_psd, drv.perp_psd):
        if psd is not None and psd.suggested_nyquist() > 0:
            cands.append(math.pi / psd.suggested_nyquist())
    return min(cands)


def _check_sampling(drv: _Drive, dt: float) -> None:
    for psd in (drv.par_psd, drv.perp_psd):
        if psd is not None:
            psd.check_sampling(math.pi / dt)


def _grid_for_times(values, dt_target: float, need_min: bool):
    """Step grid hitting every sweep time; returns (dt, n, idx, effective)."""
    ts = np.asarray(values, dtype=float)
    total = float(ts.max())
    if total <= 0.0:
        return dt_target, 0, np.zeros(ts.shape, dtype=int), ts.astype(float)
    bounds = np.unique(np.concatenate(([0.0], ts[ts > 0])))
    segs = np.diff(bounds)
    if np.allclose(segs, segs[0], rtol=1e-9, atol=0.0):
        k = max(1, math.ceil(segs[0] / dt_target - 1e-12))
        n_steps = k * segs.size
    else:
        n_steps = max(1, math.ceil(total / dt_target - 1e-12))
    if need_min and n_steps < 64:
        n_steps *= math.ceil(64 / n_steps)
    dt = total / n_steps
    idx = np.rint(ts / dt).astype(int)
    return dt, n_steps, idx, idx * dt


def _unit_steps(unit: float, n_units: int, dt_target: float,
                need_min: bool) -> int:
    """Steps per segment of length ``unit`` (record total: n_units * m)."""
    m = max(1, math.ceil(unit / dt_target - 1e-12))
    if need_min:
        while n_units * m < 64:
            m *= 2
    return m


def _ensemble_records(ens: ToneEnsemble, count: int, n: int, dt: float,
                      gen) -> np.ndarray:
    if ens.random_phase:
        alpha = gen.uniform(0.0, 2.0 * math.pi, count)
    else:
        alpha = np.full(count, ens.alpha)
    if ens.gaussian_amplitude:
        amp = ens.amplitude * gen.standard_normal(count)
    else:
        amp = np.full(count, ens.amplitude)
    mid = (np.arange(n) + 0.5) * dt
    return amp[:, None] * np.cos(
        2.0 * math.pi * ens.f_ac * mid[None, :] + alpha[:, None]
    )


def _assemble_fields(drv: _Drive, count: int, n: int, dt: float,
                     omega0: float, seq: SequenceSpec, gen) -> np.ndarray:
    """(count, n, 3) field samples; axis 2 carries -(omega0 + gamma Vz)."""
    fields = np.zeros((count, n, 3))
    fields[:, :, 2] = -omega0
    if n > 0:
        if drv.signal is not None:
            g = drv.signal.sample((np.arange(n) + 0.5) * dt)
            fields[:, :, 0] += g[:, 0]
            fields[:, :, 1] += g[:, 1]
            fields[:, :, 2] -= g[:, 2]
        if drv.par_psd is not None:
            fields[:, :, 2] -= drv.gamma * _draw_records(
                drv.par_psd, n, dt, gen, count)
        if drv.perp_psd is not None:
            fields[:, :, 0] += drv.gamma * _draw_records(
                drv.perp_psd, n, dt, gen, count)
            fields[:, :, 1] += drv.gamma * _draw_records(
                drv.perp_psd, n, dt, gen, count)
        if drv.ensemble is not None:
            fields[:, :, 2] -= drv.gamma * _ensemble_records(
                drv.ensemble, count, n, dt, gen)
    if seq.kind == "rabi":
        # full-Pauli drive convention: omega1 sigma_x has field 2 omega1
        fields[:, :, 0] += 2.0 * seq.omega1
    elif seq.kind == "spin_lock":
        fields[:, :, 0] += seq.omega1
        fields[:, :, 2] -= seq.delta_omega
    return fields


def _propagate(bloch: np.ndarray, fields: np.ndarray, dt: float,
               events, threads: int) -> dict:
    """Advance through (index, order, payload) events; snapshots by key."""
    snaps = {}
    pos = 0
    for idx, order, payload in sorted(events, key=lambda e: (e[0], e[1])):
        if idx > pos:
            evolve_bloch(bloch, fields, dt, threads, pos, idx)
            pos = idx
        if order == 0:
            bloch[:] = rotate_bloch(bloch, _X_AXIS, math.pi)
        else:
            snaps[payload] = bloch.copy()
    return snaps


def _measure(bloch: np.ndarray, kind: str) -> np.ndarray:
    col = _MEAS_COLUMN[kind]
    return np.clip(0.5 * (1.0 - bloch[:, col]), 0.0, 1.0)


class _Estimator:
    """Per-point accumulation of trial probabilities or readout records."""

    def __init__(self, n_points: int, readout: ReadoutModel | None, rd_gen):
        self.readout = readout
        self.rd_gen = rd_gen
        self.bins = [[] for _ in range(n_points)]

    def add(self, point: int, p_trials: np.ndarray) -> None:
        if self.readout is None:
            self.bins[point].append(np.asarray(p_trials, dtype=float))
        else:
            p_det = self.readout.beta * np.asarray(p_trials, dtype=float)
            self.bins[point].append(
                draw_readings(p_det, self.readout, self.rd_gen))

    def add_deterministic(self, point: int, p: float, n_trials: int) -> None:
        if self.readout is None:
            self.bins[point].append(np.array([p]))
        else:
            self.add(point, np.full(n_trials, p))

    def finalize(self) -> tuple[np.ndarray, np.ndarray]:
        p_hat = np.empty(len(self.bins))
        sigma = np.empty(len(self.bins))
        for i, parts in enumerate(self.bins):
            x = np.concatenate(parts)
            if self.readout is None:
                p_hat[i] = float(np.mean(x))
                sigma[i] = (float(np.std(x, ddof=1) / math.sqrt(x.size))
                            if x.size > 1 else 0.0)
            else:
                p_hat[i], sigma[i] = estimate_probability(x, self.readout)
        return p_hat, sigma


def _run_segmented(seq, drv, readout, n_trials, noise_ss, rd_gen, omega0,
                   dt, n_steps, pulse_idx, snap_items, threads):
    """One pulse pattern, any number of snapshot points, chunked trials."""
    events = [(int(i), 0, None) for i in pulse_idx]
    events += [(int(idx), 1, key) for key, idx in snap_items]
    start = np.array(_START[seq.kind])
    est = _Estimator(len(snap_items), readout, rd_gen)

    if not drv.stochastic:
        fields = _assemble_fields(drv, 1, n_steps, dt, omega0, seq, None)
        bloch = start.reshape(1, 3).copy()
        snaps = _propagate(bloch, fields, dt, events, threads)
        for key, _ in snap_items:
            p = float(_measure(snaps[key], seq.kind)[0])
            est.add_deterministic(key, p, n_trials)
        return est.finalize()

    n_chunks = math.ceil(n_trials / _CHUNK)
    chunk_seeds = noise_ss.spawn(n_chunks)
    for c in range(n_chunks):
        count = min(_CHUNK, n_trials - c * _CHUNK)
        gen = np.random.default_rng(chunk_seeds[c])
        fields = _assemble_fields(drv, count, n_steps, dt, omega0, seq, gen)
        bloch = np.tile(start, (count, 1))
        snaps = _propagate(bloch, fields, dt, events, threads)
        for key, _ in snap_items:
            est.add(key, _measure(snaps[key], seq.kind))
    return est.finalize()


def _run_correlation(seq, drv, readout, n_trials, noise_ss, rd_gen,
                     dt_target):
    if drv.perp_psd is not None:
        raise ValueError("correlation runs model parallel records only")
    if seq.sweep_field == "t_gap":
        gaps = np.asarray(seq.sweep_values, dtype=float)
    else:
        gaps = np.array([seq.t_gap])
    n, tau = seq.n_pulses, seq.tau
    unit = tau / 2.0
    m = _unit_steps(unit, 4 * n, dt_target, drv.needs_psd_grid)
    dt = unit / m
    block = 2 * n * m
    gap_idx = np.rint(gaps / dt).astype(int)
    n_steps = 2 * block + int(gap_idx.max())
    _check_sampling(drv, dt)

    # modulation sign of each sample within a block (switches at pulses)
    flips = np.zeros(block)
    for j in range(1, n + 1):
        flips[(2 * j - 1) * m:] += 1
    y = (-1.0) ** flips

    def records(count, gen):
        if drv.signal is not None:
            mid = (np.arange(n_steps) + 0.5) * dt
            return drv.signal.sample(mid)[:, 2][None, :]
        if drv.par_psd is not None:
            return drv.gamma * _draw_records(drv.par_psd, n_steps, dt, gen,
                                             count)
        if drv.ensemble is not None:
            return drv.gamma * _ensemble_records(drv.ensemble, count,
                                                 n_steps, dt, gen)
        return np.zeros((1, n_steps))

    est = _Estimator(len(gaps), readout, rd_gen)
    if not drv.stochastic:
        v = records(1, None)
        phi1 = np.sum(v[:, :block] * y, axis=1) * dt
        for i, g in enumerate(gap_idx):
            phi2 = np.sum(v[:, block + g:2 * block + g] * y, axis=1) * dt
            p = 0.5 * (1.0 - np.sin(phi1) * np.sin(phi2))
            est.add_deterministic(i, float(np.clip(p[0], 0, 1)), n_trials)
    else:
        n_chunks = math.ceil(n_trials / _CHUNK)
        chunk_seeds = noise_ss.spawn(n_chunks)
        for c in range(n_chunks):
            count = min(_CHUNK, n_trials - c * _CHUNK)
            gen = np.random.default_rng(chunk_seeds[c])
            v = records(count, gen)
            phi1 = np.sum(v[:, :block] * y, axis=1) * dt
            for i, g in enumerate(gap_idx):
                phi2 = np.sum(v[:, block + g:2 * block + g] * y, axis=1) * dt
                est.add(i, np.clip(0.5 * (1 - np.sin(phi1) * np.sin(phi2)),
                                   0, 1))
    p_hat, sigma = est.finalize()
    name = seq.sweep_field
    return ProtocolResult(name, gap_idx * dt, p_hat, sigma, n_trials, -1)


def simulate_protocol(seq: SequenceSpec, drive=None,
                      readout: ReadoutModel | None = None,
                      n_trials: int = 512, seed=0, gamma: float = 1.0,
                      h0: InternalHamiltonian | float | None = None,
                      step: float | None = None) -> ProtocolResult:
    """Monte-Carlo estimate of the excited-state probability for ``seq``.

    ``drive`` may be None, a :class:`~qsense.qubit.SignalHamiltonian`
    (which carries its own coupling), a :class:`~qsense.signals.ToneSpec`,
    a :class:`ToneEnsemble`, a spectral density (parallel noise), or a
    dict with "par"/"perp" spectra; ``gamma`` scales everything except a
    SignalHamiltonian.  ``h0`` adds a static splitting (rotating-frame
    detuning).  ``step`` overrides the automatic step-size target.

    With a readout model, one record is drawn per trial and the estimate
    is of the detected probability (beta folds in); without one, the
    ensemble mean of the projection probability is returned with its
    standard error.  Results are reproducible from (seed, n_trials) alone.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    drv = _resolve_drive(drive, gamma)
    if isinstance(h0, InternalHamiltonian):
        omega0 = h0.omega0
    else:
        omega0 = 0.0 if h0 is None else float(h0)
    seed_int = _normalize_seed(seed)
    noise_ss, readout_ss = np.random.SeedSequence(seed_int).spawn(2)
    rd_gen = np.random.default_rng(readout_ss)
    threads = _thread_count()
    kind, sweep = seq.kind, seq.sweep_field

    if kind == "correlation":
        if sweep not in (None, "t_gap"):
            raise ValueError("correlation sweeps only over t_gap")
        res = _run_correlation(seq, drv, readout, n_trials, noise_ss,
                               rd_gen, step if step is not None else
                               _target_dt(2 * seq.n_pulses * seq.tau
                                          + float(np.max(seq.t_gap)),
                                          drv, seq, omega0))
        return ProtocolResult(res.sweep_name, res.sweep_values, res.p_hat,
                              res.sigma_p, n_trials, seed_int)

    def run_one_pattern(dt, n_steps, pulse_idx, snap_items, child_ss):
        return _run_segmented(seq, drv, readout, n_trials, child_ss,
                              rd_gen, omega0, dt, n_steps, pulse_idx,
                              snap_items, threads)

    if kind in ("ramsey", "rabi", "spin_lock", "t1"):
        ts = (np.asarray(seq.sweep_values, dtype=float) if sweep
              else np.array([seq.t]))
        target = step if step is not None else _target_dt(
            float(ts.max()), drv, seq, omega0)
        dt, n_steps, idx, eff = _grid_for_times(ts, target,
                                                drv.needs_psd_grid)
        if n_steps > 0:
            _check_sampling(drv, dt)
        snap_items = [(i, idx[i]) for i in range(len(ts))]
        p_hat, sigma = run_one_pattern(dt, n_steps, (), snap_items, noise_ss)
        return ProtocolResult(sweep, eff, p_hat, sigma, n_trials, seed_int)

    if kind == "spin_echo":
        ts = (np.asarray(seq.sweep_values, dtype=float) if sweep
              else np.array([seq.t]))
        point_ss = noise_ss.spawn(len(ts))
        p_hat = np.empty(len(ts))
        sigma = np.empty(len(ts))
        eff = np.empty(len(ts))
        for i, t in enumerate(ts):
            if t <= 0:
                eff[i] = 0.0
                p, s = run_one_pattern(1.0, 0, (), [(0, 0)], point_ss[i])
            else:
                target = step if step is not None else _target_dt(
                    t, drv, seq, omega0)
                m = _unit_steps(t / 2, 2, target, drv.needs_psd_grid)
                dt = (t / 2) / m
                _check_sampling(drv, dt)
                eff[i] = t
                p, s = run_one_pattern(dt, 2 * m, (m,), [(0, 2 * m)],
                                       point_ss[i])
            p_hat[i], sigma[i] = p[0], s[0]
        return ProtocolResult(sweep, eff, p_hat, sigma, n_trials, seed_int)

    if kind in ("cp", "pdd"):
        half = kind == "cp"
        if sweep in (None, "n_pulses"):
            ns = (np.asarray(seq.sweep_values, dtype=int) if sweep
                  else np.array([seq.n_pulses]))
            n_max = int(ns.max())
            unit = seq.tau / 2 if half else seq.tau
            per = 2 if half else 1
            target = step if step is not None else _target_dt(
                n_max * seq.tau, drv, seq, omega0)
            m = _unit_steps(unit, per * n_max, target, drv.needs_psd_grid)
            dt = unit / m
            _check_sampling(drv, dt)
            if half:
                pulses = [(2 * j - 1) * m for j in range(1, n_max + 1)]
                snaps = [(i, 2 * int(n) * m) for i, n in enumerate(ns)]
            else:
                pulses = [j * m for j in range(1, n_max + 1)]
                snaps = [(i, int(n) * m) for i, n in enumerate(ns)]
            p_hat, sigma = run_one_pattern(dt, per * n_max * m, pulses,
                                           snaps, noise_ss)
            return ProtocolResult(sweep, ns.astype(float), p_hat, sigma,
                                  n_trials, seed_int)
        if sweep == "tau":
            taus = np.asarray(seq.sweep_values, dtype=float)
            point_ss = noise_ss.spawn(len(taus))
            p_hat = np.empty(len(taus))
            sigma = np.empty(len(taus))
            for i, tau in enumerate(taus):
                unit = tau / 2 if half else tau
                n = seq.n_pulses
                per = 2 * n if half else n
                target = step if step is not None else _target_dt(
                    n * tau, drv, seq, omega0)
                m = _unit_steps(unit, per, target, drv.needs_psd_grid)
                dt = unit / m
                _check_sampling(drv, dt)
                if half:
                    pulses = [(2 * j - 1) * m for j in range(1, n + 1)]
                else:
                    pulses = [j * m for j in range(1, n + 1)]
                p, s = run_one_pattern(dt, per * m, pulses, [(0, per * m)],
                                       point_ss[i])
                p_hat[i], sigma[i] = p[0], s[0]
            return ProtocolResult(sweep, taus, p_hat, sigma, n_trials,
                                  seed_int)
        raise ValueError(f"{kind} sweeps over n_pulses or tau, not {sweep}")

    raise ValueError(f"cannot simulate kind {seq.kind!r}")
