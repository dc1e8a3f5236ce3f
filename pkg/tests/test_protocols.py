"""Closed-form protocol responses against quadrature and averaging oracles."""

import math

import numpy as np
import pytest

from qsense.filters import weighting_function
from qsense.protocols import (
    SequenceSpec,
    continuous_sampling_estimate,
    correlation_response,
    multipulse_phase,
    multipulse_response,
    rabi_probability,
    ramsey_decay_probability,
    ramsey_probability,
    slope_detection_probability,
    spin_echo_phase,
    variance_detection_probability,
)
from qsense.qubit import InternalHamiltonian, QubitState, SignalHamiltonian, evolve
from qsense.signals import ToneSpec


class TestSequenceSpec:
    def test_sweep_detection(self):
        seq = SequenceSpec.ramsey(np.linspace(0.1, 1, 5))
        assert seq.sweep_field == "t"
        assert len(seq.sweep_values) == 5
        point = seq.at(0.3)
        assert point.sweep_field is None
        assert point.t == 0.3

    def test_no_sweep(self):
        seq = SequenceSpec.cp(4, 0.5)
        assert seq.sweep_field is None
        with pytest.raises(ValueError):
            _ = seq.sweep_values

    def test_total_time(self):
        assert SequenceSpec.ramsey(2.0).total_time == 2.0
        assert SequenceSpec.cp(4, 0.5).total_time == 2.0
        assert SequenceSpec.correlation(4, 0.5, 1.5).total_time == 5.5

    def test_pulse_times(self):
        assert SequenceSpec.spin_echo(2.0).pulse_times() == (1.0,)
        assert SequenceSpec.cp(2, 1.0).pulse_times() == (0.5, 1.5)
        # PDD keeps its boundary pulse; only the modulation drops it.
        assert SequenceSpec.pdd(2, 1.0).pulse_times() == (1.0, 2.0)

    def test_n_sweep_becomes_int(self):
        seq = SequenceSpec.cp(np.array([2, 4, 8]), 0.3)
        assert seq.sweep_field == "n_pulses"
        assert isinstance(seq.at(4).n_pulses, int)

    def test_validation(self):
        with pytest.raises(ValueError):
            SequenceSpec.ramsey(-1.0)
        with pytest.raises(ValueError):
            SequenceSpec.cp(0, 0.5)
        with pytest.raises(ValueError):
            SequenceSpec.cp(4, 0.0)
        with pytest.raises(ValueError):
            SequenceSpec.rabi(1.0, omega1=0.0)
        with pytest.raises(ValueError):
            SequenceSpec.correlation(4, 0.5, -0.1)


class TestRamseyRabi:
    def test_ramsey_fringe(self):
        t = np.linspace(0, 2, 9)
        assert np.allclose(ramsey_probability(math.pi, t), np.sin(math.pi * t / 2) ** 2)

    def test_ramsey_decay_envelope(self):
        p = ramsey_decay_probability(0.0, 1.0, chi=0.7)
        assert p == pytest.approx(0.5 * (1 - math.exp(-0.7)))
        p = ramsey_decay_probability(2.0, 1.0, chi=lambda t: t)
        assert p == pytest.approx(0.5 * (1 - math.exp(-1.0) * math.cos(2.0)))

    def test_rabi_resonant_flopping(self):
        t = np.linspace(0, 3, 13)
        assert np.allclose(rabi_probability(0.0, 2.0, t), np.sin(2.0 * t) ** 2)

    def test_rabi_detuning_reduces_amplitude(self):
        w0, w1 = 3.0, 1.0
        t = np.linspace(0, 5, 400)
        p = rabi_probability(w0, w1, t)
        assert np.max(p) == pytest.approx(w1**2 / (w0**2 + w1**2), rel=1e-3)

    def test_rabi_against_evolution_oracle(self):
        # Same physics through the generic evolver: generator
        # omega0*sz + omega1*sx maps to field (2 w1, 0, 2 w0) in sigma/2
        # units, i.e. v_perp_x = 2 w1, internal omega0 = -2 w0.
        w0, w1, t = 1.3, 0.9, 1.7
        hv = SignalHamiltonian(1.0, v_perp_x=2 * w1)
        s = evolve(
            QubitState.ground(), InternalHamiltonian(-2 * w0), hv, t, step=1e-4
        )
        assert s.population(1) == pytest.approx(
            float(rabi_probability(w0, w1, t)), abs=1e-6
        )

    def test_slope_detection(self):
        assert slope_detection_probability(2.0, 0.1, 1.0) == pytest.approx(0.6)
        # saturates instead of leaving [0, 1]
        assert slope_detection_probability(2.0, 10.0, 1.0) == 1.0

    def test_variance_detection(self):
        g, v, t = 1.5, 0.3, 2.0
        expected = 0.5 * (1 - math.exp(-0.5 * (g * v * t) ** 2))
        assert variance_detection_probability(g, v, t) == pytest.approx(expected)
        assert variance_detection_probability(1.0, 100.0, 10.0) == pytest.approx(0.5)


def sine_referenced_echo_oracle(tone, t, gamma):
    from scipy.integrate import quad

    def v(tt):
        return tone.v_pk * math.cos(2 * math.pi * tone.f_ac * tt + tone.alpha - math.pi / 2)

    first, _ = quad(v, 0, t / 2, limit=200)
    second, _ = quad(v, t / 2, t, limit=200)
    return gamma * (first - second)


class TestEchoPhase:
    def test_matched_tone_maximum(self):
        # f = 1/t, alpha = 0: phi = (2/pi) gamma v t.
        v, t, gamma = 0.7, 2.0, 1.3
        phi = spin_echo_phase(ToneSpec(v, 1 / t, 0.0), t, gamma)
        assert phi == pytest.approx(2 / math.pi * gamma * v * t, rel=1e-9)

    def test_quadrature_tone_rejected(self):
        t = 2.0
        phi = spin_echo_phase(ToneSpec(1.0, 1 / t, math.pi / 2), t)
        assert abs(phi) < 1e-12

    def test_dc_rejected(self):
        assert spin_echo_phase(ToneSpec(1.0, 0.0, 0.0), 1.7) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_generic_frequency_against_quadrature(self, rng):
        for _ in range(5):
            tone = ToneSpec(
                rng.uniform(0.1, 2), rng.uniform(0.05, 3), rng.uniform(-3, 3)
            )
            t = rng.uniform(0.5, 3)
            got = spin_echo_phase(tone, t, 1.1)
            want = sine_referenced_echo_oracle(tone, t, 1.1)
            assert got == pytest.approx(want, abs=2e-6)


def numeric_modulated_phase(switches, t, tone, gamma):
    from scipy.integrate import quad

    def v(tt):
        return tone.v_pk * math.cos(2 * math.pi * tone.f_ac * tt + tone.alpha)

    edges = [0.0, *switches, t]
    total, sign = 0.0, 1.0
    for a, b in zip(edges[:-1], edges[1:]):
        seg, _ = quad(v, a, b, limit=200)
        total += sign * seg
        sign = -sign
    return gamma * total


class TestMultipulsePhase:
    def test_ramsey_dc(self):
        phi = multipulse_phase(ToneSpec(2.0, 0.0, 0.3), SequenceSpec.ramsey(1.5), 1.2)
        assert phi == pytest.approx(1.2 * 2.0 * 1.5 * math.cos(0.3), rel=1e-12)

    def test_ramsey_tone(self):
        tone = ToneSpec(1.0, 0.8, 0.5)
        t = 1.3
        phi = multipulse_phase(tone, SequenceSpec.ramsey(t), 1.0)
        w = 2 * math.pi * 0.8
        assert phi == pytest.approx(
            (math.sin(w * t + 0.5) - math.sin(0.5)) / w, rel=1e-12
        )

    @pytest.mark.parametrize("kind", ["cp", "pdd"])
    def test_matches_direct_quadrature(self, kind, rng):
        n, tau = 4, 0.6
        seq = SequenceSpec.cp(n, tau) if kind == "cp" else SequenceSpec.pdd(n, tau)
        if kind == "cp":
            switches = seq.pulse_times()
        else:
            switches = seq.pulse_times()[:-1]
        for _ in range(4):
            tone = ToneSpec(rng.uniform(0.2, 1), rng.uniform(0.05, 2), rng.uniform(-3, 3))
            got = multipulse_phase(tone, seq, 0.9)
            want = numeric_modulated_phase(switches, n * tau, tone, 0.9)
            assert got == pytest.approx(want, abs=2e-5)

    def test_tone_superposition(self):
        seq = SequenceSpec.cp(4, 0.5)
        tones = [ToneSpec(0.5, 1.0, 0.0), ToneSpec(0.3, 0.7, 1.0)]
        total = multipulse_phase(tones, seq)
        parts = sum(multipulse_phase(t, seq) for t in tones)
        assert total == pytest.approx(parts, rel=1e-12)

    def test_odd_n_rejected(self):
        with pytest.raises(ValueError):
            multipulse_phase(ToneSpec(1, 1), SequenceSpec.cp(3, 0.5))

    def test_echo_redirected(self):
        with pytest.raises(ValueError, match="spin_echo_phase"):
            multipulse_phase(ToneSpec(1, 1), SequenceSpec.spin_echo(1.0))


class TestMultipulseResponse:
    def test_fixed_resonant(self):
        n, tau, gamma, v = 8, 0.25, 1.0, 0.4
        seq = SequenceSpec.cp(n, tau)
        t = n * tau
        p = multipulse_response(seq, ToneSpec(v, 1 / (2 * tau), 0.0), gamma, "fixed")
        phi = 2 / math.pi * gamma * v * t
        assert p == pytest.approx(0.5 * (1 - math.cos(phi)), rel=1e-9)

    def test_random_phase_matches_angle_average(self, rng):
        # Identity oracle: averaging the fixed-tone response over a dense
        # uniform phase grid must reproduce the Bessel form at ANY
        # frequency (amplitude: v_pk = sqrt(2) v_rms).
        n, tau, gamma, v_rms = 4, 0.5, 1.2, 0.35
        seq = SequenceSpec.cp(n, tau)
        for f in [1.0, 0.37, 1.9]:
            alphas = np.linspace(0, 2 * np.pi, 20000, endpoint=False)
            ps = [
                multipulse_response(
                    seq, ToneSpec(math.sqrt(2) * v_rms, f, a), gamma, "fixed"
                )
                for a in alphas[::40]
            ]
            avg = float(np.mean(ps))
            got = multipulse_response(seq, ToneSpec(v_rms, f), gamma, "random_phase")
            assert got == pytest.approx(avg, abs=2e-3)

    def test_random_phase_resonant_form(self):
        # On resonance the Bessel argument reduces to 2 sqrt(2) g v t/(k pi).
        n, tau, gamma, v_rms = 8, 0.25, 1.0, 0.3
        seq = SequenceSpec.cp(n, tau)
        t = n * tau
        from scipy.special import j0

        for k in (1, 3):
            got = multipulse_response(
                seq, ToneSpec(v_rms, k / (2 * tau)), gamma, "random_phase"
            )
            want = 0.5 * (1 - j0(2 * math.sqrt(2) * gamma * v_rms * t / (k * math.pi)))
            assert got == pytest.approx(want, rel=1e-9)

    def test_random_amplitude_matches_gaussian_average(self):
        # At the k = 1 resonance the printed law equals the true average
        # over Gaussian amplitude and uniform phase.
        n, tau, gamma, v_rms = 4, 0.5, 1.0, 0.4
        seq = SequenceSpec.cp(n, tau)
        f = 1 / (2 * tau)
        t = n * tau
        # Gauss-Hermite over amplitude, trapezoid over phase.
        nodes, weights = np.polynomial.hermite_e.hermegauss(64)
        alphas = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        acc = 0.0
        for a in alphas:
            w_val = weighting_function("cp", f, a, n, tau)
            phi = gamma * (v_rms * nodes) * t * w_val
            acc += np.sum(weights * 0.5 * (1 - np.cos(phi)))
        avg = acc / (len(alphas) * math.sqrt(2 * math.pi))
        got = multipulse_response(seq, ToneSpec(v_rms, f), gamma, "random_amplitude")
        assert got == pytest.approx(avg, rel=1e-6)

    def test_probabilities_in_range(self, rng):
        seq = SequenceSpec.cp(6, 0.4)
        for model in ("fixed", "random_phase", "random_amplitude"):
            for _ in range(20):
                tone = ToneSpec(rng.uniform(0, 5), rng.uniform(0, 3), rng.uniform(0, 6))
                p = multipulse_response(seq, tone, 1.0, model)
                assert 0.0 <= p <= 1.0

    def test_bad_model(self):
        with pytest.raises(ValueError):
            multipulse_response(SequenceSpec.cp(4, 0.5), ToneSpec(1, 1), 1.0, "nope")


class TestCorrelation:
    def test_fixed_quadrature_values(self):
        phi = 0.3
        p0 = correlation_response(phi, 1.0, 0.0, "fixed")
        assert p0 == pytest.approx(0.5 * (1 - math.sin(phi) ** 2))
        # Half a tone period later the second block sees the inverted tone.
        p_half = correlation_response(phi, 1.0, 0.5, "fixed")
        assert p_half == pytest.approx(0.5 * (1 + math.sin(phi) ** 2))

    def test_random_phase_small_amplitude_average(self):
        # The law truncates at second order in the accumulated phase, so
        # keep it small enough that the quartic remainder is negligible.
        phi, f = 0.03, 0.7
        t_gap = np.linspace(0, 3, 7)
        alphas = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
        for tg in t_gap:
            adv = 2 * np.pi * f * tg
            direct = np.mean(
                0.5
                * (1 - np.sin(phi * np.cos(alphas)) * np.sin(phi * np.cos(alphas + adv)))
            )
            got = float(correlation_response(phi, f, tg, "random_phase"))
            assert got == pytest.approx(float(direct), abs=2e-7)

    def test_oscillation_frequency_is_tone_frequency(self):
        # The t_gap oscillation of the correlation signal tracks f_ac.
        f = 1.3
        tg = np.linspace(0, 4, 512)
        p = correlation_response(0.2, f, tg, "random_phase")
        spec = np.abs(np.fft.rfft(p - p.mean()))
        freqs = np.fft.rfftfreq(tg.size, d=tg[1] - tg[0])
        assert freqs[np.argmax(spec)] == pytest.approx(f, abs=freqs[1])

    def test_bad_model(self):
        with pytest.raises(ValueError):
            correlation_response(0.1, 1.0, 0.0, "gaussian")


class TestContinuousSampling:
    def test_recovers_slow_tone(self):
        est = continuous_sampling_estimate(
            ToneSpec(0.5, 3.0), t_sample=0.05, duration=40.0
        )
        assert est.f_estimate == pytest.approx(3.0, abs=est.resolution)
        assert est.resolution == pytest.approx(1 / 40.0)

    def test_aliases_fast_tone(self):
        # f = 0.9/ts folds to 0.1/ts.
        ts = 1.0
        est = continuous_sampling_estimate(ToneSpec(0.5, 0.9), ts, duration=200.0)
        assert est.f_estimate == pytest.approx(0.1, abs=est.resolution)

    def test_dc_returns_zero(self):
        est = continuous_sampling_estimate(ToneSpec(0.5, 0.0), 0.1, 20.0)
        assert est.f_estimate == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            continuous_sampling_estimate(ToneSpec(1, 1), 0.0, 10.0)
        with pytest.raises(ValueError):
            continuous_sampling_estimate(ToneSpec(1, 1), 1.0, 3.0)
