"""Monte Carlo quantum-jump unraveling of the cascaded evolution.

A detector monitors the output of the second cavity.  Between clicks the
state follows the conditional no-jump evolution and its squared norm decays
at the total loss rate; a click applies the collective annihilation
(beta1 + beta2 -> ground) and resets the norm.  Each trajectory draws a
uniform threshold r, integrates until the squared norm reaches r, decides
which loss channel fired from the instantaneous rates, and continues to the
end of the window.

Only the channel output is observed.  Mirror absorption (kappa_prime) and
Raman scattering (gamma) are unobserved: they collapse the excitation to
the ground manifold without producing a click record.  In the
single-excitation sector every collapse lands on the absorbing ground
state, so click statistics are exact despite the simplification.

Randomness comes from a counter-based generator keyed by (seed, trajectory
index); batches are reproducible bit for bit and order-independent, so the
trajectories can run on any number of threads.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend, _core_py
from .dynamics import _kernel_problem
from .errors import InvalidParameterError, NumericFailureError
from .model import AmplitudeState

THREADS_ENV = "CASCADE_SIM_THREADS"


def jump_rate(state, kappa):
    """Detector click rate 2 kappa |beta1 + beta2|^2.

    Normalized so that, with no extra losses, the rate equals the decay
    rate of the squared norm under the no-jump evolution.
    """
    if kappa <= 0:
        raise InvalidParameterError("kappa must be > 0")
    return 2.0 * kappa * abs(state.beta1 + state.beta2) ** 2


def apply_jump(state):
    """Collapse after a click: both photon amplitudes annihilate to ground."""
    amp = state.beta1 + state.beta2
    if abs(amp) == 0.0:
        raise ValueError("cannot apply a jump to a state with zero "
                         "emission amplitude")
    return AmplitudeState(c_gg=amp / abs(amp))


@dataclass(frozen=True)
class TrajectoryBatch:
    """Aggregate of a trajectory ensemble.

    jump_times holds one tuple of detector click times per trajectory.
    """

    n_traj: int
    seed: int
    jump_times: tuple
    jump_fraction: float
    final_fidelities: np.ndarray
    final_fidelity_mean: float
    final_fidelity_var: float

    def __post_init__(self):
        arr = np.array(self.final_fidelities, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "final_fidelities", arr)
        if not 0.0 <= self.jump_fraction <= 1.0:
            raise InvalidParameterError("jump_fraction must lie in [0, 1]")
        if len(self.jump_times) != self.n_traj or len(arr) != self.n_traj:
            raise InvalidParameterError("per-trajectory records mismatch")


def _worker_count(n_tasks):
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise InvalidParameterError(f"{THREADS_ENV} must be an integer")
        if cap < 1:
            raise InvalidParameterError(f"{THREADS_ENV} must be >= 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_tasks))


def _rates(y, t, problem):
    """(click rate, total norm-loss rate) at the current state."""
    t10, h1, c1, t20, h2, c2, kappa, lam, ac, bc = problem
    f = _core_py._rhs(t, y, t10, h1, c1, t20, h2, c2, kappa, lam, ac, bc)
    total = -2.0 * float(np.real(np.vdot(y, f)))
    click = 2.0 * kappa * abs(y[3] + y[4]) ** 2
    return click, total


def _run_one(index, seed, y_start, t_max, problem, rtol, atol, max_jumps):
    rng = np.random.Generator(np.random.Philox(
        key=np.array([seed, index], dtype=np.uint64)))
    kernel = _backend.active_kernel()
    empty_t = np.empty(0, dtype=float)
    empty_s = np.empty((0, 5), dtype=np.complex128)

    y = y_start.copy()
    t = -t_max
    clicks = []
    while True:
        r = rng.random()
        while r == 0.0:
            r = rng.random()
        status, t, y, _, _ = kernel.integrate(
            y, t, t_max, *problem, rtol, atol, empty_t, empty_s, r)
        if status == _core_py.STATUS_UNDERFLOW:
            raise NumericFailureError(
                f"step size underflow at t = {t:g}", time=t)
        if status == _core_py.STATUS_MAX_STEPS:
            raise NumericFailureError(
                f"step budget exhausted at t = {t:g}", time=t)
        if status == _core_py.STATUS_DONE:
            break
        # a loss event: decide the channel from the instantaneous rates
        click, total = _rates(y, t, problem)
        if len(clicks) >= max_jumps:
            raise NumericFailureError(
                f"jump budget exhausted at t = {t:g}", time=t)
        if total <= 0.0 or rng.random() * total < click:
            clicks.append(float(t))
            amp = y[3] + y[4]
            phase = amp / abs(amp) if abs(amp) > 0 else 1.0
        else:
            phase = 1.0  # unobserved loss; collapse phase is irrelevant
        y = np.zeros(5, dtype=np.complex128)
        y[0] = phase

    norm = float(np.sum(np.abs(y) ** 2))
    fidelity = abs(y[2]) ** 2 / norm if norm > 0 else 0.0
    return tuple(clicks), float(fidelity)


def run_trajectories(config, n, seed, max_jumps=1000):
    """Simulate n photodetection trajectories of the configured evolution."""
    if n < 1:
        raise InvalidParameterError("need n >= 1 trajectories")
    seed = int(seed)
    if seed < 0:
        raise InvalidParameterError("seed must be a nonnegative integer")
    problem = _kernel_problem(config)
    rtol, atol = config.tolerances
    y_start = config.initial.to_vector()
    t_max = config.params.t_max

    def task(index):
        return _run_one(index, seed, y_start, t_max, problem, rtol, atol,
                        max_jumps)

    workers = _worker_count(n)
    if workers == 1:
        results = [task(i) for i in range(n)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, range(n)))

    jump_times = tuple(clicks for clicks, _ in results)
    fidelities = np.array([fid for _, fid in results])
    jumped = sum(1 for clicks in jump_times if clicks)
    var = float(np.var(fidelities, ddof=1)) if n > 1 else 0.0
    return TrajectoryBatch(
        n_traj=n,
        seed=seed,
        jump_times=jump_times,
        jump_fraction=jumped / n,
        final_fidelities=fidelities,
        final_fidelity_mean=float(np.mean(fidelities)),
        final_fidelity_var=var,
    )
