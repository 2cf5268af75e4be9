"""Construction of the ideal transmission pulse pair.

The sender's coupling g1(t) is prescribed for t >= 0 (the tail).  Demanding
that the collective emission amplitude stays exactly zero, and that the
three-amplitude solution stays normalized, closes the problem:

  * at t = 0 the two conditions fix alpha1(0) = kappa / sqrt(2 (g1(0)^2 +
    kappa^2)) and beta_a(0) = -sqrt(2) g1(0) alpha1(0) / kappa,
  * for t >= 0 the pair (alpha1, beta_a) obeys a closed two-variable linear
    system, alpha2 follows from normalization,
  * the first half of the pulse is then algebraic:
    g1(-t) = -(sqrt(2) kappa beta_a(t) + g1(t) alpha1(t)) / alpha2(t).

The receiver plays the whole pulse time-reversed, g2(t) = g1(-t), which
makes the photon wavepacket symmetric in time and the transfer exact.

For an underdamped tail (g1 > kappa/2, including the reference constant
tail at kappa) the forward solution spirals, so the synthesized first half
oscillates and changes sign; the sign lives in the drive phase and the
construction stays exact.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp
from scipy.interpolate import PchipInterpolator

from .errors import DegenerateSynthesisError, InvalidParameterError, \
    NumericFailureError, SynthesisInconsistencyError, TruncationWarning
from .model import AmplitudeState, PulseShape, SQRT2, rabi_from_coupling

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12

# below this receiver amplitude the pulse formula is abandoned, not
# extrapolated
EPS_DENOMINATOR = 1e-12


@dataclass(frozen=True)
class SynthesisSpec:
    """Inputs of a pulse synthesis.

    tail: the sender coupling for t >= 0, as a constant level, a
          (times, values) sample pair covering [0, t_max], or a callable.
    grid_step: synthesis sample spacing; defaults to params.grid.
    truncation_threshold: warn when |g1(-T)| exceeds this value times kappa.
    """

    tail: object
    params: object
    grid_step: float | None = None
    truncation_threshold: float = 1e-6

    def step(self):
        step = self.grid_step if self.grid_step is not None \
            else self.params.grid_step()
        if step <= 0 or step > self.params.t_max:
            raise InvalidParameterError("grid_step must lie in (0, t_max]")
        return step


def _tail_function(tail, t_max):
    """Normalize the tail description to a scalar-or-vector callable."""
    if callable(tail):
        return tail
    if np.isscalar(tail):
        level = float(tail)
        if not np.isfinite(level) or level < 0:
            raise InvalidParameterError("constant tail must be finite, >= 0")
        return lambda t: np.full_like(np.asarray(t, dtype=float), level) \
            if np.ndim(t) else level
    try:
        times, values = tail
    except (TypeError, ValueError):
        raise InvalidParameterError(
            "tail must be a level, a (times, values) pair, or a callable")
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or times.shape != values.shape or len(times) < 2:
        raise InvalidParameterError("tail samples must be two equal 1-d arrays")
    if np.any(np.diff(times) <= 0):
        raise InvalidParameterError("tail times must be strictly increasing")
    if times[0] > 0 or times[-1] < t_max:
        raise InvalidParameterError("tail samples must cover [0, t_max]")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise InvalidParameterError("tail values must be finite and >= 0")
    return PchipInterpolator(times, values)


def initial_amplitudes(g1_at_0, kappa):
    """Amplitudes at the pulse midpoint forced by darkness + normalization.

    Solves sqrt(2) g1(0) alpha1(0) + kappa beta_a(0) = 0 together with
    2 alpha1(0)^2 + beta_a(0)^2 = 1 and alpha1(0) > 0.  The emission-free
    branch requires beta_a(0) <= 0 for a nonnegative coupling.
    """
    if kappa <= 0:
        raise InvalidParameterError("kappa must be > 0")
    if g1_at_0 < 0:
        raise InvalidParameterError("tail value at t=0 must be >= 0")
    alpha1_0 = kappa / np.sqrt(2.0 * (g1_at_0 ** 2 + kappa ** 2))
    beta_a_0 = -SQRT2 * g1_at_0 * alpha1_0 / kappa
    return float(alpha1_0), float(beta_a_0)


@dataclass(frozen=True)
class ForwardSolution:
    """Jump-free amplitudes on the forward half-window [0, T]."""

    times: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    beta_a: np.ndarray

    def boundary_state(self):
        """Five-amplitude state of the ideal transfer at t = -T.

        By the time-reversal symmetry of the construction, the state at -T
        mirrors the forward endpoint: alpha1(-T) = alpha2(T), alpha2(-T) =
        alpha1(T), beta_a(-T) = beta_a(T), with beta_s = 0.
        """
        ba = self.beta_a[-1]
        return AmplitudeState(
            alpha1=complex(self.alpha2[-1]),
            alpha2=complex(self.alpha1[-1]),
            beta1=complex(-ba / SQRT2),
            beta2=complex(ba / SQRT2),
        )


def integrate_forward(spec):
    """Integrate the closed (alpha1, beta_a) system over [0, T].

    alpha2 is recovered from normalization (positive branch).
    """
    params = spec.params
    kappa = params.kappa
    step = spec.step()
    n = max(1, int(round(params.t_max / step)))
    step = params.t_max / n
    times = step * np.arange(n + 1)
    tail = _tail_function(spec.tail, params.t_max)

    g0 = float(tail(0.0))
    if not np.isfinite(g0):
        raise InvalidParameterError("tail value at t=0 must be finite")
    a1_0, ba_0 = initial_amplitudes(g0, kappa)

    def deriv(t, y):
        g1 = float(tail(t))
        return [g1 * y[1] / SQRT2, -kappa * y[1] - SQRT2 * g1 * y[0]]

    sol = solve_ivp(deriv, (0.0, params.t_max), [a1_0, ba_0],
                    method="DOP853", rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
                    t_eval=times)
    if not sol.success:
        t_fail = float(sol.t[-1]) if len(sol.t) else 0.0
        raise NumericFailureError(
            f"forward synthesis integration failed: {sol.message}",
            time=t_fail)

    alpha1, beta_a = sol.y
    residual = 1.0 - alpha1 ** 2 - beta_a ** 2
    alpha2 = np.sqrt(np.clip(residual, 0.0, None))
    return ForwardSolution(times=times, alpha1=alpha1, alpha2=alpha2,
                           beta_a=beta_a)


@dataclass(frozen=True)
class SynthesisResult:
    """Pulse pair plus the constructed jump-free solution.

    Unpacks as ``pulse1, pulse2 = synthesize(spec)``.
    """

    pulse1: PulseShape
    pulse2: PulseShape
    forward: ForwardSolution
    params: object
    continuity_residual: float
    edge_coupling: float
    min_coupling: float

    def __iter__(self):
        return iter((self.pulse1, self.pulse2))

    def initial_state(self):
        return self.forward.boundary_state()

    def ideal_solution(self):
        """(times, alpha1, alpha2, beta_a) of the transfer on [-T, T]."""
        f = self.forward
        times = np.concatenate([-f.times[::-1][:-1], f.times])
        alpha1 = np.concatenate([f.alpha2[::-1][:-1], f.alpha1])
        alpha2 = np.concatenate([f.alpha1[::-1][:-1], f.alpha2])
        beta_a = np.concatenate([f.beta_a[::-1][:-1], f.beta_a])
        return times, alpha1, alpha2, beta_a


def _first_half_couplings(forward, g_tail, kappa):
    """g1 at time -t for t > 0, from the emission-free condition."""
    times_f = forward.times
    low = forward.alpha2 <= EPS_DENOMINATOR
    if np.any(low):
        t_bad = float(times_f[np.argmax(low)])
        raise DegenerateSynthesisError(
            f"receiver amplitude below {EPS_DENOMINATOR:g} at t = {t_bad:g}",
            time=t_bad)
    g_left = -(SQRT2 * kappa * forward.beta_a +
               g_tail * forward.alpha1) / forward.alpha2
    if not np.all(np.isfinite(g_left)):
        t_bad = float(times_f[np.argmax(~np.isfinite(g_left))])
        raise SynthesisInconsistencyError(
            f"non-finite synthesized coupling at t = {-t_bad:g}")
    return g_left


def synthesize(spec):
    """Build the sender pulse on [-T, T] and its time-reversed receiver.

    The second half of the sender pulse is the prescribed tail; the first
    half comes from the emission-free condition applied to the forward
    solution.  Compensating phases integrate the Stark samples with the
    conventions phase1(-T) = 0 and phase2(+T) = 0.
    """
    params = spec.params
    kappa = params.kappa
    forward = integrate_forward(spec)
    times_f = forward.times
    tail = _tail_function(spec.tail, params.t_max)
    g_tail = np.asarray(tail(times_f), dtype=float)
    g_left = _first_half_couplings(forward, g_tail, kappa)

    times = np.concatenate([-times_f[::-1][:-1], times_f])
    g1 = np.concatenate([g_left[::-1][:-1], g_tail])
    stark1 = params.stark_scale * g1 ** 2
    phase1 = cumulative_trapezoid(stark1, times, initial=0.0)

    pulse1 = PulseShape(times=times, g_eff=g1, phase=phase1, stark=stark1)
    pulse2 = pulse1.reversed_in_time()

    params.check_adiabaticity(abs(rabi_from_coupling(
        float(np.max(np.abs(g1))), params)))
    edge = float(abs(g1[0]))
    if edge > spec.truncation_threshold * kappa:
        warnings.warn(
            f"synthesized pulse is {edge:.3g} kappa at t = -T "
            f"(threshold {spec.truncation_threshold:g} kappa); enlarge "
            "t_max if the window must capture the full pulse",
            TruncationWarning, stacklevel=2)

    return SynthesisResult(
        pulse1=pulse1,
        pulse2=pulse2,
        forward=forward,
        params=params,
        continuity_residual=float(abs(g_left[0] - g_tail[0])),
        edge_coupling=edge,
        min_coupling=float(np.min(g1)),
    )
