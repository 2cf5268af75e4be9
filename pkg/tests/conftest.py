import warnings

import numpy as np
import pytest

from cascade_sim import EvolutionConfig, PulseShape, SynthesisSpec, \
    SystemParams, TruncationWarning, available_backends, evolve, \
    set_backend, synthesize


@pytest.fixture(scope="session")
def params():
    return SystemParams()


@pytest.fixture(scope="session")
def synth(params):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return synthesize(SynthesisSpec(tail=params.kappa, params=params))


@pytest.fixture(scope="session")
def ideal_config(params, synth):
    return EvolutionConfig(params=params,
                           pulses=(synth.pulse1, synth.pulse2),
                           initial=synth.initial_state())


@pytest.fixture(scope="session")
def ideal_record(ideal_config):
    return evolve(ideal_config)


@pytest.fixture(scope="session")
def mismatched_config(params, synth):
    return EvolutionConfig(params=params,
                           pulses=(synth.pulse1, synth.pulse1),
                           initial=synth.initial_state())


@pytest.fixture(params=sorted(available_backends()))
def backend(request):
    name = request.param
    set_backend(name)
    yield name
    set_backend("compiled" if "compiled" in available_backends()
                else "python")


def make_zero_pulse(t_max, step=0.05):
    n = int(round(t_max / step))
    times = (t_max / n) * np.arange(-n, n + 1)
    zeros = np.zeros_like(times)
    return PulseShape(times=times, g_eff=zeros, phase=zeros, stark=zeros)


def make_random_pulse(rng, params, step=0.25, amplitude=2.0):
    """Random nonnegative coupling samples with consistent Stark/phase."""
    from scipy.integrate import cumulative_trapezoid

    t = params.t_max
    n = int(round(t / step))
    times = (t / n) * np.arange(-n, n + 1)
    g = amplitude * rng.random(len(times))
    stark = params.stark_scale * g ** 2
    phase = cumulative_trapezoid(stark, times, initial=0.0)
    return PulseShape(times=times, g_eff=g, phase=phase, stark=stark)
