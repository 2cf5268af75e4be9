import numpy as np
import pytest

from cascade_sim import AdiabaticityWarning, DegenerateSynthesisError, \
    InvalidParameterError, SynthesisInconsistencyError, SynthesisSpec, \
    SystemParams, TruncationWarning, initial_amplitudes, integrate_forward, \
    synthesize
from cascade_sim.synthesis import ForwardSolution, _first_half_couplings

SQRT2 = np.sqrt(2.0)


def spiral_oracle(t, kappa=1.0):
    """Closed-form jump-free solution for the constant tail g1 = kappa.

    Solves d(alpha1)/dt = kappa beta_a / sqrt(2), d(beta_a)/dt =
    -kappa beta_a - sqrt(2) kappa alpha1 with the midpoint values
    alpha1(0) = 1/2, beta_a(0) = -1/sqrt(2): an underdamped spiral at
    frequency sqrt(3) kappa / 2 decaying at kappa / 2.
    """
    w = np.sqrt(3.0) * kappa / 2.0
    damp = np.exp(-kappa * t / 2.0)
    alpha1 = damp * (0.5 * np.cos(w * t) - np.sin(w * t) / (2 * np.sqrt(3)))
    beta_a = -SQRT2 * damp * (0.5 * np.cos(w * t) +
                              np.sin(w * t) / (2 * np.sqrt(3)))
    return alpha1, beta_a


class TestInitialAmplitudes:
    def test_no_coupling(self):
        a, b = initial_amplitudes(0.0, 1.0)
        assert a == pytest.approx(1 / SQRT2)
        assert b == 0.0

    def test_reference_values(self):
        a, b = initial_amplitudes(1.0, 1.0)
        assert a == pytest.approx(0.5, abs=1e-12)
        assert b == pytest.approx(-0.7071067811865476, abs=1e-12)

    @pytest.mark.parametrize("g0,kappa", [(1.0, 1.0), (0.3, 1.0),
                                          (2.5, 0.7), (0.0, 2.0)])
    def test_defining_conditions(self, g0, kappa):
        a, b = initial_amplitudes(g0, kappa)
        assert 2 * a ** 2 + b ** 2 == pytest.approx(1.0, abs=1e-14)
        assert SQRT2 * g0 * a + kappa * b == pytest.approx(0.0, abs=1e-14)
        assert a > 0 and b <= 0

    def test_symmetric_photon_amplitude_vanishes(self):
        # beta_s = 0 holds by construction of the basis split
        a, b = initial_amplitudes(1.0, 1.0)
        beta1, beta2 = -b / SQRT2, b / SQRT2
        assert beta1 + beta2 == 0.0

    def test_invalid_kappa(self):
        with pytest.raises(InvalidParameterError):
            initial_amplitudes(1.0, 0.0)


class TestIntegrateForward:
    def test_matches_spiral_oracle(self, params):
        fwd = integrate_forward(SynthesisSpec(tail=1.0, params=params))
        alpha1, beta_a = spiral_oracle(fwd.times)
        assert np.max(np.abs(fwd.alpha1 - alpha1)) < 1e-8
        assert np.max(np.abs(fwd.beta_a - beta_a)) < 1e-8

    def test_zero_tail_is_stationary(self, params):
        fwd = integrate_forward(SynthesisSpec(tail=0.0, params=params))
        assert np.max(np.abs(fwd.alpha1 - 1 / SQRT2)) < 1e-12
        assert np.max(np.abs(fwd.beta_a)) < 1e-12
        assert np.max(np.abs(fwd.alpha2 - 1 / SQRT2)) < 1e-12

    def test_complete_transfer_limit(self, params):
        fwd = integrate_forward(SynthesisSpec(tail=1.0, params=params))
        assert abs(fwd.alpha1[-1]) < 0.01
        assert fwd.alpha2[-1] > 0.999
        assert abs(fwd.beta_a[-1]) < 0.01
        longer = integrate_forward(SynthesisSpec(
            tail=1.0, params=SystemParams(t_max=20.0)))
        assert abs(longer.alpha1[-1]) < abs(fwd.alpha1[-1])
        assert longer.alpha2[-1] > fwd.alpha2[-1]

    def test_normalization_identity(self, params):
        rng = np.random.default_rng(5)
        knots = np.linspace(0, params.t_max, 41)
        tail = (knots, 1.5 * rng.random(41))
        fwd = integrate_forward(SynthesisSpec(tail=tail, params=params))
        total = fwd.alpha1 ** 2 + fwd.alpha2 ** 2 + fwd.beta_a ** 2
        assert np.max(np.abs(total - 1.0)) < 1e-13


class TestSynthesize:
    def test_continuity_at_midpoint(self, synth, params):
        kappa = params.kappa
        assert synth.continuity_residual < 1e-12
        # hand evaluation with the midpoint amplitudes
        a0, b0 = initial_amplitudes(kappa, kappa)
        a2_0 = a0
        g_left = -(SQRT2 * kappa * b0 + kappa * a0) / a2_0
        assert g_left == pytest.approx(kappa, abs=1e-12)
        assert synth.pulse1.coupling_at(-1e-9) == \
            pytest.approx(kappa, abs=1e-6)

    def test_receiver_is_sample_reversed_sender(self, synth):
        assert np.array_equal(synth.pulse2.g_eff, synth.pulse1.g_eff[::-1])
        assert np.array_equal(synth.pulse2.times, synth.pulse1.times)

    def test_first_half_matches_spiral_oracle(self, synth, params):
        p1 = synth.pulse1
        neg = p1.times < 0
        t = -p1.times[neg]
        alpha1, beta_a = spiral_oracle(t)
        alpha2 = np.sqrt(1.0 - alpha1 ** 2 - beta_a ** 2)
        expected = -(SQRT2 * params.kappa * beta_a + 1.0 * alpha1) / alpha2
        assert np.max(np.abs(p1.g_eff[neg] - expected)) < 1e-8

    def test_oscillating_sign_of_first_half(self, synth):
        # underdamped tail: the synthesized half has genuine negative lobes
        assert synth.min_coupling == pytest.approx(-0.1049, abs=2e-3)

    def test_zero_tail_synthesizes_zero(self, params):
        result = synthesize(SynthesisSpec(tail=0.0, params=params))
        assert np.max(np.abs(result.pulse1.g_eff)) == 0.0

    def test_dark_identity_on_grid(self, synth, params):
        times, alpha1, alpha2, beta_a = synth.ideal_solution()
        g1 = synth.pulse1.g_eff
        g2 = synth.pulse2.g_eff
        residual = (g1 * alpha1 + g2 * alpha2) / SQRT2 + \
            params.kappa * beta_a
        assert np.max(np.abs(residual)) < 1e-8 * params.kappa

    def test_boundary_amplitudes(self, synth):
        times, alpha1, alpha2, _ = synth.ideal_solution()
        assert alpha1[0] >= 1 - 1e-4
        assert alpha2[-1] >= 1 - 1e-4

    def test_initial_state_is_dark_and_normalized(self, synth):
        state = synth.initial_state()
        assert state.beta_s == 0
        assert state.norm_sq == pytest.approx(1.0, abs=1e-12)
        assert abs(state.alpha1) > 0.9999

    def test_phase_conventions(self, synth):
        p1, p2 = synth.pulse1, synth.pulse2
        assert p1.phase[0] == 0.0
        assert p2.phase[-1] == 0.0
        assert np.allclose(p2.phase, -p1.phase[::-1], atol=1e-14)

    def test_phase_integrates_stark(self, synth):
        from scipy.integrate import trapezoid
        p1 = synth.pulse1
        quad = trapezoid(p1.stark[:5001], p1.times[:5001])
        assert p1.phase[5000] - p1.phase[0] == pytest.approx(quad, abs=1e-9)

    def test_stark_consistent_with_coupling(self, synth, params):
        expected = params.stark_scale * synth.pulse1.g_eff ** 2
        assert np.allclose(synth.pulse1.stark, expected, atol=0, rtol=1e-15)

    def test_truncation_warning_fires_at_default_window(self, params):
        with pytest.warns(TruncationWarning):
            synthesize(SynthesisSpec(tail=params.kappa, params=params))
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("error", TruncationWarning)
            synthesize(SynthesisSpec(tail=params.kappa, params=params,
                                     truncation_threshold=1e-2))

    def test_marginal_drive_warns(self):
        # construction-time check passes but the synthesized drive is large
        params = SystemParams(g_vacuum=15.0, delta_big=400.0)
        with pytest.warns(AdiabaticityWarning):
            synthesize(SynthesisSpec(tail=params.kappa, params=params,
                                     truncation_threshold=1.0))

    def test_invalid_tails(self, params):
        for tail in (-1.0, (np.array([0.0, 5.0]), np.array([1.0, -0.5])),
                     (np.linspace(0, 5, 6), np.ones(6))):
            with pytest.raises(InvalidParameterError):
                synthesize(SynthesisSpec(tail=tail, params=params))

    def test_result_unpacks_as_pair(self, synth):
        p1, p2 = synth
        assert p1 is synth.pulse1 and p2 is synth.pulse2


class TestGuards:
    def make_forward(self, alpha2):
        n = len(alpha2)
        times = np.linspace(0.0, 1.0, n)
        return ForwardSolution(times=times, alpha1=np.full(n, 0.1),
                               alpha2=np.asarray(alpha2, dtype=float),
                               beta_a=np.full(n, -0.1))

    def test_degenerate_denominator(self):
        fwd = self.make_forward([0.5, 0.5, 1e-13, 0.5])
        with pytest.raises(DegenerateSynthesisError) as err:
            _first_half_couplings(fwd, np.ones(4), 1.0)
        assert err.value.time == pytest.approx(2.0 / 3.0)

    def test_non_finite_coupling(self):
        fwd = self.make_forward([0.5, 0.5, 0.5, 0.5])
        bad_tail = np.array([1.0, 1.0, np.nan, 1.0])
        with pytest.raises(SynthesisInconsistencyError):
            _first_half_couplings(fwd, bad_tail, 1.0)
