"""Symmetric-sector states against product-space and algebraic oracles."""

import math
from functools import reduce

import numpy as np
import pytest

from qsense.collective import (
    CollectiveSpinState,
    collective_operators,
    css,
    expectation,
    ghz_probability,
    one_axis_twisting,
    qcrb_ghz,
    qcrb_uncorrelated,
    rotate,
    squeezing_parameters,
    twisting_scan,
    variance,
)


def random_state(num_spins, rng):
    amps = rng.normal(size=num_spins + 1) + 1j * rng.normal(
        size=num_spins + 1)
    return CollectiveSpinState(num_spins, amps / np.linalg.norm(amps))


class TestOperators:
    def test_single_spin_is_half_pauli(self):
        ops = collective_operators(1)
        np.testing.assert_allclose(ops.jx, [[0, 0.5], [0.5, 0]], atol=1e-15)
        np.testing.assert_allclose(ops.jy, [[0, -0.5j], [0.5j, 0]],
                                   atol=1e-15)
        np.testing.assert_allclose(ops.jz, [[0.5, 0], [0, -0.5]],
                                   atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 7])
    def test_angular_momentum_algebra(self, n):
        jx, jy, jz = collective_operators(n)
        np.testing.assert_allclose(jx @ jy - jy @ jx, 1j * jz, atol=1e-12)
        np.testing.assert_allclose(jy @ jz - jz @ jy, 1j * jx, atol=1e-12)
        j = 0.5 * n
        total = jx @ jx + jy @ jy + jz @ jz
        np.testing.assert_allclose(total, j * (j + 1) * np.eye(n + 1),
                                   atol=1e-12)

    def test_cached_arrays_are_frozen(self):
        ops = collective_operators(3)
        with pytest.raises(ValueError):
            ops.jz[0, 0] = 99.0


class TestCoherentState:
    def test_aligned_state_is_top_dicke_level(self):
        state = css(5)
        want = np.zeros(6)
        want[0] = 1.0
        np.testing.assert_allclose(state.amplitudes, want, atol=1e-15)

    def test_equatorial_moments(self):
        state = css(20, polar=0.5 * math.pi, azimuth=0.0)
        jx, jy, jz = collective_operators(20)
        assert expectation(state, jx) == pytest.approx(10.0, rel=1e-10)
        assert expectation(state, jy) == pytest.approx(0.0, abs=1e-10)
        assert expectation(state, jz) == pytest.approx(0.0, abs=1e-10)
        # isotropic transverse noise J/2
        assert variance(state, jy) == pytest.approx(5.0, rel=1e-10)
        assert variance(state, jz) == pytest.approx(5.0, rel=1e-10)

    def test_rotation_weights_are_binomial(self):
        # |<J, m| J/2-turn about y |J, J>|^2 = C(2J, J-m) / 2^(2J)
        state = css(4, polar=0.5 * math.pi, azimuth=0.0)
        want = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
        np.testing.assert_allclose(np.abs(state.amplitudes) ** 2, want,
                                   atol=1e-12)

    def test_squeezing_parameters_are_unity(self):
        report = squeezing_parameters(css(20, polar=0.5 * math.pi))
        assert report.xi == pytest.approx(1.0, abs=1e-9)
        assert report.xi_r == pytest.approx(1.0, abs=1e-9)

    def test_azimuth_steers_mean_spin(self):
        state = css(8, polar=0.5 * math.pi, azimuth=0.25 * math.pi)
        report = squeezing_parameters(state)
        want = 4.0 * np.array([math.cos(0.25 * math.pi),
                               math.sin(0.25 * math.pi), 0.0])
        np.testing.assert_allclose(report.mean_spin, want, atol=1e-9)


class TestTwisting:
    def test_identity_at_zero_angle(self):
        state = css(6, polar=0.5 * math.pi)
        np.testing.assert_array_equal(
            one_axis_twisting(state, 0.0).amplitudes, state.amplitudes)

    def test_preserves_norm_and_total_spin(self):
        rng = np.random.default_rng(3)
        state = random_state(9, rng)
        jx, jy, jz = collective_operators(9)
        j2 = jx @ jx + jy @ jy + jz @ jz
        for angle in rng.uniform(0, 2, size=5):
            twisted = one_axis_twisting(state, angle)
            assert np.linalg.norm(twisted.amplitudes) == pytest.approx(
                1.0, abs=1e-12)
            assert expectation(twisted, j2) == pytest.approx(
                4.5 * 5.5, rel=1e-12)
            np.testing.assert_allclose(np.abs(twisted.amplitudes),
                                       np.abs(state.amplitudes), atol=1e-14)

    @pytest.mark.parametrize("twist", [0.0, 0.05, 0.15, 0.4])
    def test_matches_full_product_space(self, twist):
        # Oracle: the same protocol on the full 2^N space, no Dicke basis.
        n = 4
        sx = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
        sy = 0.5 * np.array([[0, -1j], [1j, 0]])
        sz = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
        eye = np.eye(2)

        def collective(single):
            total = np.zeros((2**n, 2**n), dtype=complex)
            for k in range(n):
                factors = [single if i == k else eye for i in range(n)]
                total += reduce(np.kron, factors)
            return total

        bx, by, bz = collective(sx), collective(sy), collective(sz)
        plus = np.full(2, 1.0 / math.sqrt(2.0))
        psi = reduce(np.kron, [plus] * n).astype(complex)
        psi = np.exp(-1j * twist * np.diag(bz) ** 2) * psi

        def moment(op):
            return float(np.real(np.vdot(psi, op @ psi)))

        state = one_axis_twisting(css(n, polar=0.5 * math.pi), twist)
        jx, jy, jz = collective_operators(n)
        for big, small in ((bx, jx), (by, jy), (bz, jz)):
            assert expectation(state, small) == pytest.approx(
                moment(big), abs=1e-10)
            assert variance(state, small) == pytest.approx(
                moment(big @ big) - moment(big) ** 2, abs=1e-10)


class TestSqueezing:
    def test_min_direction_attains_min_variance(self):
        state = one_axis_twisting(css(12, polar=0.5 * math.pi), 0.1)
        report = squeezing_parameters(state)
        jx, jy, jz = collective_operators(12)
        u = report.min_direction
        op = u[0] * jx + u[1] * jy + u[2] * jz
        assert variance(state, op) == pytest.approx(report.min_variance,
                                                    rel=1e-10)
        # transverse to the mean spin
        assert abs(np.dot(u, report.mean_spin)) < 1e-9
        assert np.linalg.norm(u) == pytest.approx(1.0, rel=1e-12)

    def test_min_is_global_over_transverse_directions(self):
        state = one_axis_twisting(css(12, polar=0.5 * math.pi), 0.1)
        report = squeezing_parameters(state)
        jx, jy, jz = collective_operators(12)
        n = report.mean_spin / np.linalg.norm(report.mean_spin)
        e1 = report.min_direction
        e2 = np.cross(n, e1)
        for theta in np.linspace(0.0, math.pi, 181):
            u = math.cos(theta) * e1 + math.sin(theta) * e2
            op = u[0] * jx + u[1] * jy + u[2] * jz
            assert variance(state, op) >= report.min_variance - 1e-10

    def test_twisting_squeezes_twenty_spins(self):
        scan = twisting_scan(20, np.linspace(0.0, 0.3, 61))
        assert scan.xi_r[0] == pytest.approx(1.0, abs=1e-9)
        assert scan.polarization[0] == pytest.approx(1.0, rel=1e-9)
        assert scan.xi_r.min() < 1.0
        # xi_r pays the contrast cost, so it never beats xi
        assert np.all(scan.xi <= scan.xi_r + 1e-12)

    def test_uncertainty_relation_on_random_states(self):
        rng = np.random.default_rng(11)
        jx, jy, jz = collective_operators(5)
        triples = ((jx, jy, jz), (jy, jz, jx), (jz, jx, jy))
        for _ in range(100):
            state = random_state(5, rng)
            for a, b, c in triples:
                lhs = math.sqrt(max(variance(state, a), 0.0)) * math.sqrt(
                    max(variance(state, b), 0.0))
                assert lhs >= 0.5 * abs(expectation(state, c)) - 1e-10

    def test_vanishing_mean_spin_rejected(self):
        amps = np.zeros(5)
        amps[0] = amps[4] = 1.0 / math.sqrt(2.0)
        with pytest.raises(ValueError, match="mean spin"):
            squeezing_parameters(CollectiveSpinState(4, amps))


class TestGhz:
    def test_single_spin_fringe(self):
        assert ghz_probability(1, math.pi) == pytest.approx(1.0)
        assert ghz_probability(1, 0.0) == 0.0
        assert ghz_probability(1, 0.5 * math.pi) == pytest.approx(0.5)

    @pytest.mark.parametrize("m", [2, 3, 5, 10])
    def test_fringe_count_scales_with_spins(self, m):
        phases = np.linspace(0.0, 2.0 * math.pi, 256, endpoint=False)
        p = np.array([ghz_probability(m, ph) for ph in phases])
        spectrum = np.abs(np.fft.rfft(p))
        assert int(np.argmax(spectrum[1:])) + 1 == m

    @pytest.mark.parametrize("m", [2, 3, 5, 10])
    def test_qcrb_gain_is_square_root_of_spins(self, m):
        plain = qcrb_uncorrelated(gamma=2.0, t=0.3, num_spins=m,
                                  n_shots=50)
        ghz = qcrb_ghz(gamma=2.0, t=0.3, num_spins=m, n_shots=50)
        assert plain / ghz == pytest.approx(math.sqrt(m), rel=1e-12)

    def test_faster_dephasing_cancels_the_gain(self):
        # independent per-spin dephasing: chi_GHZ = N chi_1
        m, chi_1 = 10, 0.5
        ghz = qcrb_ghz(gamma=1.0, t=1.0, num_spins=m, chi=m * chi_1)
        plain = qcrb_uncorrelated(gamma=1.0, t=1.0, num_spins=m, chi=chi_1)
        assert ghz / plain == pytest.approx(
            math.exp((m - 1) * chi_1) / math.sqrt(m), rel=1e-12)
        assert ghz > plain
        # break-even point: chi_1 = ln(N) / (2(N-1))
        even = math.log(m) / (2.0 * (m - 1))
        ghz_even = qcrb_ghz(gamma=1.0, t=1.0, num_spins=m, chi=m * even)
        plain_even = qcrb_uncorrelated(gamma=1.0, t=1.0, num_spins=m,
                                       chi=even)
        assert ghz_even == pytest.approx(plain_even, rel=1e-9)


class TestValidation:
    def test_state_checks(self):
        with pytest.raises(ValueError, match="normalized"):
            CollectiveSpinState(2, np.array([1.0, 1.0, 0.0]))
        with pytest.raises(ValueError, match="count"):
            CollectiveSpinState(2, np.array([1.0, 0.0]))
        with pytest.raises(ValueError, match="spin"):
            CollectiveSpinState(0, np.array([1.0]))

    def test_rotation_axis_checks(self):
        state = css(3)
        with pytest.raises(ValueError, match="axis"):
            rotate(state, 1.0, (0.0, 0.0, 0.0))
        with pytest.raises(ValueError, match="axis"):
            rotate(state, 1.0, (1.0, 2.0))

    def test_bound_checks(self):
        with pytest.raises(ValueError, match="positive"):
            qcrb_uncorrelated(gamma=0.0, t=1.0, num_spins=2)
        with pytest.raises(ValueError, match=">= 1"):
            qcrb_ghz(gamma=1.0, t=1.0, num_spins=0)
        with pytest.raises(ValueError, match="spin"):
            ghz_probability(0, 1.0)
