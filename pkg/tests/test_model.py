import numpy as np
import pytest

from cascade_sim import AdiabaticityWarning, AmplitudeState, \
    InvalidParameterError, PulseDomainError, PulseShape, SystemParams, \
    derive_effective_coupling, excited_node1, ground_state, \
    pulse_consistency_residual, rabi_from_coupling, \
    spontaneous_emission_estimate, stark_shift


def make_params(**kwargs):
    return SystemParams(**kwargs)


class TestSystemParams:
    @pytest.mark.parametrize("bad", [
        {"kappa": 0.0}, {"kappa": -1.0}, {"kappa_prime": -0.1},
        {"gamma": -1e-3}, {"t_max": 0.0}, {"grid": 0.0}, {"grid": -5},
        {"g_vacuum": -1.0},
    ])
    def test_invalid_parameters(self, bad):
        with pytest.raises(InvalidParameterError):
            make_params(**bad)

    def test_defaults_are_adiabatic(self):
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("error", AdiabaticityWarning)
            make_params()

    def test_marginal_detuning_warns(self):
        with pytest.warns(AdiabaticityWarning):
            make_params(g_vacuum=100.0, delta_big=500.0)

    def test_grid_step_from_node_count(self):
        assert make_params(grid=2000).grid_step() == pytest.approx(0.005)
        assert make_params(grid=0.01).grid_step() == 0.01

    def test_raman_detuning_default_cancels_cavity_stark(self):
        p = make_params(gamma=8.0)
        assert p.raman_detuning() == pytest.approx(np.real(p.cavity_stark))
        assert make_params(delta_raman=1.25).raman_detuning() == 1.25


class TestEffectiveCoupling:
    def test_zero_drive(self, params):
        assert derive_effective_coupling(0.0, params) == 0

    def test_identity_case(self):
        p = make_params(g_vacuum=1.0, delta_big=1.0, adiabatic_factor=0.1)
        assert derive_effective_coupling(2.0, p) == pytest.approx(1.0)

    def test_complex_detuning(self):
        p = make_params(g_vacuum=1.0, delta_big=1.0, gamma=0.02,
                        adiabatic_factor=0.1)
        assert derive_effective_coupling(2.0, p) == \
            pytest.approx(1.0 / (1.0 + 0.01j))

    def test_real_when_lossless(self, params):
        assert derive_effective_coupling(3.0, params).imag == 0.0

    def test_errors(self):
        p = make_params(delta_big=0.0)
        with pytest.raises(InvalidParameterError):
            derive_effective_coupling(1.0, p)
        with pytest.raises(InvalidParameterError):
            derive_effective_coupling(-1.0, make_params())

    def test_inverse_relation(self, params):
        omega = rabi_from_coupling(0.7, params)
        assert derive_effective_coupling(omega, params) == \
            pytest.approx(0.7)


class TestStarkShift:
    def test_zero_drive(self, params):
        assert stark_shift(0.0, params) == 0

    def test_identity_case(self):
        p = make_params(g_vacuum=1.0, delta_big=1.0, adiabatic_factor=0.1)
        assert stark_shift(2.0, p) == pytest.approx(1.0)

    def test_complex_detuning(self):
        p = make_params(delta_big=1.0, gamma=0.1, adiabatic_factor=1e-3)
        assert stark_shift(2.0, p) == pytest.approx(1.0 / (1.0 + 0.05j))

    def test_zero_detuning_rejected(self):
        with pytest.raises(InvalidParameterError):
            stark_shift(1.0, make_params(delta_big=0.0))

    def test_consistency_with_coupling(self, params):
        # stark * g^2 == Delta * g_eff^2 in the lossless case
        omega = 12.0
        g_eff = derive_effective_coupling(omega, params).real
        shift = stark_shift(omega, params).real
        assert shift * params.g_vacuum ** 2 == \
            pytest.approx(params.delta_big * g_eff ** 2)


def constant_pulse(level, t_max, stark_scale, n=100):
    times = (t_max / n) * np.arange(-n, n + 1)
    g = np.full_like(times, level)
    stark = stark_scale * g ** 2
    phase = stark * (times - times[0])
    return PulseShape(times=times, g_eff=g, phase=phase, stark=stark)


class TestEmissionEstimate:
    def setup_method(self):
        # geometry: g = Delta/10, kappa = g, drive at Omega = 2 g
        self.params = make_params(kappa=10.0, g_vacuum=10.0,
                                  delta_big=100.0, gamma=1.0,
                                  adiabatic_factor=1.0)
        # g_eff = g * Omega / (2 Delta) = 1
        self.pulse = constant_pulse(1.0, 10.0, self.params.stark_scale)

    def test_lossless_is_zero(self, params, synth):
        assert spontaneous_emission_estimate(params, synth.pulse1) == 0.0

    def test_stated_geometry(self):
        # Gamma (Omega^2 + 4 g^2) / (8 Delta^2) * max(1/kappa, 1/g_max)
        est = spontaneous_emission_estimate(self.params, self.pulse)
        assert est == pytest.approx(0.01, rel=1e-12)

    def test_linear_in_gamma(self):
        p5 = make_params(kappa=10.0, g_vacuum=10.0, delta_big=100.0,
                         gamma=5.0, adiabatic_factor=1.0)
        est = spontaneous_emission_estimate(p5, self.pulse)
        assert est == pytest.approx(0.05, rel=1e-12)

    def test_zero_pulse(self):
        silent = constant_pulse(0.0, 10.0, self.params.stark_scale)
        assert spontaneous_emission_estimate(self.params, silent) == 0.0


class TestPulseShape:
    def test_validation(self):
        t = np.linspace(0, 1, 5)
        z = np.zeros(5)
        with pytest.raises(InvalidParameterError):
            PulseShape(times=t[::-1], g_eff=z, phase=z, stark=z)
        with pytest.raises(InvalidParameterError):
            PulseShape(times=t, g_eff=z[:-1], phase=z, stark=z)
        with pytest.raises(InvalidParameterError):
            PulseShape(times=np.array([0, 0.1, 0.5, 0.7, 1.0]),
                       g_eff=z, phase=z, stark=z)

    def test_interpolation_hits_samples(self, synth):
        p = synth.pulse1
        idx = [0, len(p.times) // 3, -1]
        assert p.coupling_at(p.times[idx]) == pytest.approx(p.g_eff[idx])

    def test_domain_error(self, synth):
        with pytest.raises(PulseDomainError):
            synth.pulse1.coupling_at(synth.pulse1.times[-1] + 1.0)

    def test_double_reversal_roundtrip(self, synth):
        p = synth.pulse1
        back = p.reversed_in_time().reversed_in_time()
        assert np.array_equal(back.times, p.times)
        assert np.array_equal(back.g_eff, p.g_eff)
        assert np.array_equal(back.phase, p.phase)

    def test_arrays_frozen(self, synth):
        with pytest.raises(ValueError):
            synth.pulse1.g_eff[0] = 1.0

    def test_consistency_residual(self, params, synth):
        assert pulse_consistency_residual(synth.pulse1, params) < 1e-12


class TestAmplitudeState:
    def test_symmetric_antisymmetric(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            vec = rng.normal(size=5) + 1j * rng.normal(size=5)
            s = AmplitudeState.from_vector(vec)
            root2 = np.sqrt(2.0)
            assert s.beta_s == pytest.approx((vec[3] + vec[4]) / root2)
            assert s.beta_a == pytest.approx((vec[4] - vec[3]) / root2)
            assert s.norm_sq == pytest.approx(np.sum(np.abs(vec) ** 2))

    def test_factories(self):
        assert excited_node1().alpha1 == 1.0
        assert excited_node1().norm_sq == pytest.approx(1.0)
        assert ground_state().c_gg == 1.0

    def test_linear_combination(self):
        a = AmplitudeState(alpha1=1.0)
        b = AmplitudeState(beta1=1.0)
        mix = 0.6 * a + 0.8j * b
        assert mix.alpha1 == pytest.approx(0.6)
        assert mix.beta1 == pytest.approx(0.8j)
        assert mix.norm_sq == pytest.approx(1.0)
