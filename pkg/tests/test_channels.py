import math

import mpmath
import numpy as np
import pytest

from ringqec.channels import (
    NoiseParams,
    amplitude_damping,
    amplitude_phase,
    depolarizing_1q,
    depolarizing_2q,
    gamma_amplitude,
    gamma_phase,
    ideal_params,
    measurement_flip,
    phase_damping,
    reset_to_zero_channel,
)
from ringqec.density import noisy_gate

DEVICE = NoiseParams()  # bundled hardware figures


def random_density(n, rng):
    dim = 2 ** n
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


class TestKrausForms:
    def test_amplitude_damping_ops(self):
        ch = amplitude_damping(DEVICE.Tg, DEVICE.T1)
        g = gamma_amplitude(DEVICE.Tg, DEVICE.T1)
        assert np.allclose(ch.ops[0], np.diag([1, math.sqrt(1 - g)]))
        assert np.allclose(ch.ops[1], [[0, math.sqrt(g)], [0, 0]])

    def test_phase_damping_ops(self):
        ch = phase_damping(DEVICE.Tg, DEVICE.T1, DEVICE.T2)
        g = gamma_phase(DEVICE.Tg, DEVICE.T1, DEVICE.T2)
        assert np.allclose(ch.ops[0], np.diag([1, math.sqrt(1 - g)]))
        assert np.allclose(ch.ops[1], np.diag([0, math.sqrt(g)]))

    def test_zero_duration_is_identity(self):
        for ch in (amplitude_damping(0.0, DEVICE.T1),
                   phase_damping(0.0, DEVICE.T1, DEVICE.T2)):
            assert np.allclose(ch.ops[0], np.eye(2))
            assert np.allclose(ch.ops[1], 0)

    def test_t2_equals_2t1_no_dephasing(self):
        assert gamma_phase(1e-6, 50e-6, 100e-6) == pytest.approx(0.0, abs=1e-18)

    def test_full_decay(self):
        # gamma_a = 1: |1><1| maps to |0><0|
        ch = amplitude_damping(1e6 * 50e-6, 50e-6)
        rho = np.diag([0.0, 1.0]).astype(complex)
        out = ch.apply(rho)
        assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)

    def test_depolarizing_counts(self):
        assert len(depolarizing_1q(0.3).ops) == 4
        assert len(depolarizing_2q(0.3).ops) == 16

    def test_fully_depolarizing_1q(self):
        ch = depolarizing_1q(1.0)
        rng = np.random.default_rng(3)
        for _ in range(5):
            out = ch.apply(random_density(1, rng))
            assert np.allclose(out, np.eye(2) / 2, atol=1e-12)

    def test_measurement_flip_extremes(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        assert np.allclose(measurement_flip(0.0).apply(rho), rho)
        assert np.allclose(measurement_flip(1.0).apply(rho), np.diag([0.0, 1.0]))

    def test_reset_channel(self):
        rng = np.random.default_rng(4)
        out = reset_to_zero_channel().apply(random_density(1, rng))
        assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            depolarizing_1q(1.5)
        with pytest.raises(ValueError):
            depolarizing_2q(-0.1)
        with pytest.raises(ValueError):
            measurement_flip(2.0)
        with pytest.raises(ValueError):
            amplitude_damping(1e-9, 0.0)


class TestCompleteness:
    @pytest.mark.parametrize("seed", range(5))
    def test_random_parameters(self, seed):
        rng = np.random.default_rng(seed)
        tg = float(rng.uniform(1e-9, 1e-6))
        t1 = float(rng.uniform(1e-6, 1e-4))
        t2 = float(rng.uniform(1e-6, 2 * t1))
        p = float(rng.uniform(0, 1))
        for ch in (amplitude_damping(tg, t1), phase_damping(tg, t1, t2),
                   amplitude_phase(tg, t1, t2), depolarizing_1q(p),
                   depolarizing_2q(p), measurement_flip(p), reset_to_zero_channel()):
            assert ch.completeness_defect() < 1e-12, ch.name


class TestGammaFormulas:
    def test_against_high_precision(self):
        """Direct evaluation oracle at the bundled device parameters."""
        mpmath.mp.dps = 50
        tg, t1, t2 = DEVICE.Tg, DEVICE.T1, DEVICE.T2
        ga_ref = float(1 - mpmath.e ** (-mpmath.mpf(tg) / mpmath.mpf(t1)))
        gp_ref = float(1 - mpmath.e ** (-2 * mpmath.mpf(tg)
                                        * (1 / mpmath.mpf(t2) - 1 / (2 * mpmath.mpf(t1)))))
        assert abs(gamma_amplitude(tg, t1) - ga_ref) <= 1e-12 * abs(ga_ref)
        assert abs(gamma_phase(tg, t1, t2) - gp_ref) <= 1e-12 * abs(gp_ref)


class TestNoiseParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseParams(T1=-1.0)
        with pytest.raises(ValueError):
            NoiseParams(pm=1.5)

    def test_unphysical_dephasing_warns_only(self):
        with pytest.warns(UserWarning):
            p = NoiseParams(T1=10e-6, T2=30e-6)
        assert p.T2 == 30e-6

    def test_per_qubit_overrides(self):
        p = NoiseParams(per_qubit={2: {"T1": 1e-6}})
        assert p.relaxation(2) == (1e-6, p.T2)
        assert p.relaxation(0) == (p.T1, p.T2)


class TestNoisyGateComposition:
    def test_single_qubit_order(self):
        ng = noisy_gate("H", (0,), DEVICE, DEVICE.Tg)
        assert [lbl for lbl, _ in ng.steps] == ["AP", "D1", "U", "AP", "M"]

    def test_idle_has_no_unitary(self):
        ng = noisy_gate("ID", (0,), DEVICE, DEVICE.Tg)
        assert [lbl for lbl, _ in ng.steps] == ["AP", "D1", "AP", "M"]

    def test_two_qubit_order(self):
        ng = noisy_gate("CNS", (0, 1), DEVICE, DEVICE.tau_factor * DEVICE.Tg)
        assert [lbl for lbl, _ in ng.steps] == ["AP", "D1", "D2", "U", "AP", "M"]

    def test_flag_drops_readout_channel(self):
        ng = noisy_gate("CNS", (0, 1), DEVICE, 1e-7, measurement_flip_on_gates=False)
        assert [lbl for lbl, _ in ng.steps] == ["AP", "D1", "D2", "U", "AP"]

    def test_zero_noise_identity(self):
        ng = noisy_gate("ID", (0,), ideal_params(), 0.0)
        assert np.allclose(ng.superop(), np.eye(4), atol=1e-14)

    @pytest.mark.parametrize("seed", range(4))
    def test_trace_preservation(self, seed):
        rng = np.random.default_rng(100 + seed)
        params = NoiseParams(T1=float(rng.uniform(1e-5, 1e-4)),
                             T2=float(rng.uniform(1e-5, 1e-4)),
                             Tg=float(rng.uniform(1e-8, 1e-7)),
                             p1=float(rng.uniform(0, 0.05)),
                             p2=float(rng.uniform(0, 0.1)),
                             pm=float(rng.uniform(0, 0.1)))
        for kind, targets in (("H", (0,)), ("ID", (0,)), ("CNS", (0, 1)),
                              ("ISWAP", (0, 1))):
            tau = params.Tg if len(targets) == 1 else params.tau_factor * params.Tg
            s = noisy_gate(kind, targets, params, tau).superop()
            dim = 2 ** len(targets)
            rho = random_density(len(targets), rng)
            out = (s @ rho.reshape(dim * dim)).reshape(dim, dim)
            assert abs(np.trace(out) - 1.0) < 1e-9
