"""Cross-checks between the compiled kernel, the python kernel and scipy."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from cascade_sim import AmplitudeState, available_backends, backend_name, \
    evolve, set_backend
from cascade_sim import _core_py
from cascade_sim.dynamics import _kernel_problem, kernel_coefficients


needs_compiled = pytest.mark.skipif(
    "compiled" not in available_backends(),
    reason="compiled kernel not built")


def scipy_reference(config, t_eval, rtol=1e-9, atol=1e-12):
    problem = _kernel_problem(config)

    def rhs(t, y):
        return _core_py._rhs(t, y, *problem)

    sol = solve_ivp(rhs, (-config.params.t_max, config.params.t_max),
                    config.initial.to_vector(), method="DOP853",
                    rtol=rtol, atol=atol, t_eval=t_eval, dense_output=True)
    assert sol.success
    return sol


class TestBackendAgreement:
    def test_backend_selection(self):
        for name in available_backends():
            set_backend(name)
            assert backend_name() == name

    @needs_compiled
    def test_records_agree(self, ideal_config):
        set_backend("compiled")
        compiled = evolve(ideal_config)
        set_backend("python")
        fallback = evolve(ideal_config)
        set_backend("compiled")
        assert np.max(np.abs(compiled.amplitudes -
                             fallback.amplitudes)) < 1e-9
        assert compiled.fidelity == pytest.approx(fallback.fidelity,
                                                  abs=1e-10)

    @needs_compiled
    def test_lossy_runs_agree(self, synth):
        from cascade_sim import EvolutionConfig, SystemParams
        params = SystemParams(kappa_prime=0.03, gamma=16.0)
        config = EvolutionConfig(params=params,
                                 pulses=(synth.pulse1, synth.pulse2),
                                 initial=synth.initial_state())
        set_backend("compiled")
        compiled = evolve(config)
        set_backend("python")
        fallback = evolve(config)
        set_backend("compiled")
        assert np.max(np.abs(compiled.amplitudes -
                             fallback.amplitudes)) < 1e-9


class TestAgainstScipy:
    def test_dense_output_matches_library_integrator(self, ideal_config,
                                                     backend):
        record = evolve(ideal_config)
        ref = scipy_reference(ideal_config, record.times)
        assert np.max(np.abs(record.amplitudes - ref.y.T)) < 1e-6

    def test_lossy_final_state(self, mismatched_config, backend):
        record = evolve(mismatched_config)
        ref = scipy_reference(mismatched_config,
                              record.times[-1:])
        assert np.max(np.abs(record.amplitudes[-1] - ref.y[:, -1])) < 1e-6

    def test_threshold_event_location(self, mismatched_config, backend):
        from cascade_sim.dynamics import integrate_amplitudes
        threshold = 0.5
        status, t_event, y_event, _ = integrate_amplitudes(
            mismatched_config, np.empty(0), threshold=threshold)
        assert status == _core_py.STATUS_EVENT
        assert np.sum(np.abs(y_event) ** 2) == pytest.approx(threshold,
                                                             abs=1e-12)
        ref = scipy_reference(mismatched_config, None)

        def norm_minus_threshold(t):
            return float(np.sum(np.abs(ref.sol(t)) ** 2)) - threshold

        t_ref = brentq(norm_minus_threshold, -10.0, 10.0, xtol=1e-12)
        assert t_event == pytest.approx(t_ref, abs=1e-6)


class TestKernelPieces:
    def test_cubic_table_matches_pchip(self, synth):
        pulse = synth.pulse1
        t0, h, coef = pulse._table
        rng = np.random.default_rng(7)
        queries = rng.uniform(pulse.times[0], pulse.times[-1], 200)
        direct = pulse.coupling_at(queries)
        table = [_core_py._cubic(t0, h, coef, t) for t in queries]
        assert np.max(np.abs(direct - table)) < 1e-13

    def test_python_rhs_matches_effective_rhs(self, ideal_config):
        from cascade_sim import effective_rhs
        problem = _kernel_problem(ideal_config)
        rng = np.random.default_rng(17)
        for _ in range(5):
            vec = rng.normal(size=5) + 1j * rng.normal(size=5)
            t = float(rng.uniform(-9.9, 9.9))
            kernel_d = _core_py._rhs(t, vec, *problem)
            model_d = effective_rhs(AmplitudeState.from_vector(vec), t,
                                    ideal_config).to_vector()
            assert np.max(np.abs(kernel_d - model_d)) < 1e-12

    def test_coefficients_match_single_op_formulas(self):
        from cascade_sim import SystemParams, derive_effective_coupling, \
            rabi_from_coupling
        params = SystemParams(gamma=24.0)
        kappa, lam, ac, bc = kernel_coefficients(params)
        # lam scales a design coupling exactly like the elimination formula
        g_design = 0.8
        omega = rabi_from_coupling(g_design, params)
        assert lam * g_design == pytest.approx(
            derive_effective_coupling(omega, params), abs=1e-15)
        # lossless limit: no atomic self term, photon decay -kappa
        kappa0, lam0, ac0, bc0 = kernel_coefficients(SystemParams())
        assert lam0 == 1.0 and ac0 == 0.0
        assert bc0 == pytest.approx(-1.0)

    @needs_compiled
    def test_status_constants_mirror(self):
        from cascade_sim import _core
        for name in ("STATUS_DONE", "STATUS_EVENT", "STATUS_UNDERFLOW",
                     "STATUS_MAX_STEPS", "COMPILED"):
            assert hasattr(_core, name)
            if name != "COMPILED":
                assert getattr(_core, name) == getattr(_core_py, name)

def test_max_steps_guard(ideal_config, monkeypatch):
    """Exhausting the step budget raises with the failure time attached."""
    from cascade_sim import NumericFailureError
    from cascade_sim.dynamics import integrate_amplitudes
    kernel = __import__("cascade_sim._backend", fromlist=["_backend"])
    original = kernel.active_kernel().integrate

    def tiny_budget(*args, **kwargs):
        kwargs["max_steps"] = 3
        return original(*args, **kwargs)

    monkeypatch.setattr(kernel.active_kernel(), "integrate", tiny_budget,
                        raising=True)
    with pytest.raises(NumericFailureError) as err:
        integrate_amplitudes(ideal_config, np.empty(0))
    assert err.value.time is not None
