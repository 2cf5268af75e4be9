"""Physical parameters, pulse shapes and the single-excitation basis.

Two atom-cavity nodes are chained by a one-way photonic channel.  Each node
holds a three-level atom whose excited state is adiabatically eliminated,
leaving a Jaynes-Cummings coupling g_i(t) = g * Omega_i(t) / (2 Delta)
between the ground-state qubit and the cavity mode, plus an AC-Stark shift
d_omega_i(t) = Omega_i(t)^2 / (4 Delta) that the laser phase is chirped to
cancel.  Spontaneous emission from the eliminated level is modelled by the
replacement Delta -> Delta + i Gamma / 2, which makes both derived
quantities complex.

All rates are in units of the cavity field decay kappa (kappa = 1 by
convention), times in 1/kappa.
"""

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import AdiabaticityWarning, InvalidParameterError, \
    PulseDomainError

SQRT2 = np.sqrt(2.0)


def _frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemParams:
    """Rates and detunings of the two-node cascaded system.

    Defaults satisfy g_vacuum^2 = 2 kappa delta_big, so a constant drive at
    Omega = g_vacuum gives the reference tail g_1(t>=0) = kappa with Stark
    shift kappa/2.

    kappa        cavity field decay rate (the time unit)
    kappa_prime  extra mirror/propagation loss rate
    g_vacuum     vacuum Rabi coupling g
    delta_big    Raman detuning Delta (laser minus atomic transition)
    gamma        decay rate of the eliminated excited level
    delta_raman  two-photon detuning; None selects Re[g^2/(Delta+iGamma/2)],
                 which cancels the cavity Stark shift exactly
    t_max        half-width T of the simulation window [-T, T]
    grid         synthesis grid: step size (float) or intervals per [0, T]
    """

    kappa: float = 1.0
    kappa_prime: float = 0.0
    g_vacuum: float = 40.0
    delta_big: float = 800.0
    gamma: float = 0.0
    delta_raman: float | None = None
    t_max: float = 10.0
    grid: float | int = 1e-3
    adiabatic_factor: float = 10.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParameterError("kappa must be > 0")
        if self.kappa_prime < 0:
            raise InvalidParameterError("kappa_prime must be >= 0")
        if self.gamma < 0:
            raise InvalidParameterError("gamma must be >= 0")
        if not self.t_max > 0:
            raise InvalidParameterError("t_max must be > 0")
        if self.grid_step() <= 0 or self.grid_step() > self.t_max:
            raise InvalidParameterError("grid step must lie in (0, t_max]")
        if self.g_vacuum < 0:
            raise InvalidParameterError("g_vacuum must be >= 0")
        if self.delta_big != 0 and \
                abs(self.delta_big) <= self.adiabatic_factor * self.g_vacuum:
            warnings.warn(
                f"|delta_big| = {abs(self.delta_big):g} does not exceed "
                f"{self.adiabatic_factor:g} * g_vacuum; adiabatic "
                "elimination is marginal", AdiabaticityWarning, stacklevel=2)

    def grid_step(self):
        if isinstance(self.grid, int):
            if self.grid <= 0:
                raise InvalidParameterError("grid node count must be > 0")
            return self.t_max / self.grid
        return float(self.grid)

    @property
    def complex_detuning(self):
        """Delta + i Gamma / 2."""
        return self.delta_big + 0.5j * self.gamma

    @property
    def coupling_reduction(self):
        """Delta / (Delta + i Gamma / 2); multiplies every design coupling."""
        return self.delta_big / self.complex_detuning

    @property
    def cavity_stark(self):
        """g^2 / (Delta + i Gamma / 2) acting on a cavity photon."""
        return self.g_vacuum ** 2 / self.complex_detuning

    @property
    def stark_scale(self):
        """Delta / g^2: converts g_i(t)^2 into the laser Stark shift."""
        return self.delta_big / self.g_vacuum ** 2

    def raman_detuning(self):
        """Two-photon detuning actually applied by the laser."""
        if self.delta_raman is not None:
            return self.delta_raman
        return float(np.real(self.cavity_stark))

    def check_adiabaticity(self, omega_max):
        """Warn when |Delta| is not large against the peak drive."""
        limit = self.adiabatic_factor * max(omega_max, self.g_vacuum)
        if abs(self.delta_big) <= limit:
            warnings.warn(
                f"|delta_big| = {abs(self.delta_big):g} does not exceed "
                f"{self.adiabatic_factor:g} * max(Omega, g_vacuum) = "
                f"{limit:g}", AdiabaticityWarning, stacklevel=2)


def derive_effective_coupling(omega_rabi, params):
    """Effective coupling g * Omega / (2 (Delta + i Gamma / 2)).

    Purely real when gamma = 0.
    """
    if params.delta_big == 0:
        raise InvalidParameterError("delta_big must be nonzero")
    if omega_rabi < 0:
        raise InvalidParameterError("omega_rabi must be >= 0")
    return params.g_vacuum * omega_rabi / (2.0 * params.complex_detuning)


def stark_shift(omega_rabi, params):
    """AC-Stark shift Omega^2 / (4 (Delta + i Gamma / 2)) of the qubit level.

    The imaginary part (gamma > 0) is the scattering channel that damps the
    atomic amplitudes during evolution.
    """
    if params.delta_big == 0:
        raise InvalidParameterError("delta_big must be nonzero")
    if omega_rabi < 0:
        raise InvalidParameterError("omega_rabi must be >= 0")
    return omega_rabi ** 2 / (4.0 * params.complex_detuning)


def rabi_from_coupling(g_eff, params):
    """Drive amplitude Omega that produces the design coupling g_eff."""
    if params.delta_big == 0 or params.g_vacuum == 0:
        raise InvalidParameterError("need delta_big != 0 and g_vacuum > 0")
    return 2.0 * params.delta_big * g_eff / params.g_vacuum


def spontaneous_emission_estimate(params, pulse):
    """Order-of-magnitude scattering probability for one pulse.

    Gamma (Omega_max^2 + 4 g^2) / (8 Delta^2) * tau with the effective pulse
    duration tau = max(1/kappa, 1/max|g_i|).  Diagnostic only; never enters
    the dynamics.  Returns 0 for gamma = 0 or an all-zero pulse.
    """
    if params.gamma == 0:
        return 0.0
    g_max = float(np.max(np.abs(pulse.g_eff)))
    if g_max == 0:
        return 0.0
    omega_max = abs(rabi_from_coupling(g_max, params))
    tau = max(1.0 / params.kappa, 1.0 / g_max)
    return params.gamma * (omega_max ** 2 + 4.0 * params.g_vacuum ** 2) / \
        (8.0 * params.delta_big ** 2) * tau


@dataclass(frozen=True)
class PulseShape:
    """Sampled drive for one node: coupling, compensating phase, Stark shift.

    Samples live on a uniform, strictly increasing time grid; off-grid
    queries use monotone cubic interpolation.
    """

    times: np.ndarray
    g_eff: np.ndarray
    phase: np.ndarray
    stark: np.ndarray

    def __post_init__(self):
        times = _frozen_array(self.times)
        g_dtype = complex if np.iscomplexobj(self.g_eff) else float
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "g_eff", _frozen_array(self.g_eff, g_dtype))
        object.__setattr__(self, "phase", _frozen_array(self.phase))
        object.__setattr__(self, "stark", _frozen_array(self.stark))
        if times.ndim != 1 or len(times) < 2:
            raise InvalidParameterError("need at least two samples")
        for name in ("g_eff", "phase", "stark"):
            if getattr(self, name).shape != times.shape:
                raise InvalidParameterError(f"{name} length mismatch")
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise InvalidParameterError("times must be strictly increasing")
        h = (times[-1] - times[0]) / (len(times) - 1)
        if not np.allclose(steps, h, rtol=1e-9, atol=0):
            raise InvalidParameterError("times must be uniformly spaced")

    @property
    def domain(self):
        return float(self.times[0]), float(self.times[-1])

    def _check_domain(self, t):
        t0, t1 = self.domain
        slack = 1e-9 * (t1 - t0)
        if np.any(np.asarray(t) < t0 - slack) or \
                np.any(np.asarray(t) > t1 + slack):
            raise PulseDomainError(
                f"t outside pulse domain [{t0:g}, {t1:g}]")

    @cached_property
    def _g_interp(self):
        return PchipInterpolator(self.times, self.g_eff)

    @cached_property
    def _phase_interp(self):
        return PchipInterpolator(self.times, self.phase)

    @cached_property
    def _stark_interp(self):
        return PchipInterpolator(self.times, self.stark)

    def coupling_at(self, t):
        self._check_domain(t)
        return self._g_interp(t)

    def phase_at(self, t):
        self._check_domain(t)
        return self._phase_interp(t)

    def stark_at(self, t):
        self._check_domain(t)
        return self._stark_interp(t)

    @cached_property
    def _table(self):
        """(t0, h, coef) piecewise-cubic table consumed by the kernels."""
        if np.iscomplexobj(self.g_eff):
            raise InvalidParameterError(
                "kernel tables require a real design coupling")
        coef = np.ascontiguousarray(self._g_interp.c)
        h = (self.times[-1] - self.times[0]) / (len(self.times) - 1)
        return float(self.times[0]), float(h), coef

    def reversed_in_time(self):
        """The time-reversed pulse g(-t) for the receiving node.

        The phase is mapped to -phase(-t), which keeps d(phase)/dt equal to
        the reversed Stark shift and moves the zero reference to the other
        end of the window.
        """
        return PulseShape(
            times=-self.times[::-1],
            g_eff=self.g_eff[::-1].copy(),
            phase=-self.phase[::-1],
            stark=self.stark[::-1].copy(),
        )


def pulse_consistency_residual(pulse, params):
    """Max |stark - Delta g_eff^2 / g^2| over the grid, in units of kappa.

    Zero (to roundoff) for any synthesized pulse; the Stark samples of a
    hand-built pulse must satisfy the same relation before a gamma > 0 run.
    """
    expected = params.stark_scale * np.abs(pulse.g_eff) ** 2
    return float(np.max(np.abs(pulse.stark - expected))) / params.kappa


@dataclass(frozen=True)
class AmplitudeState:
    """Amplitudes over the single-excitation basis plus the ground component.

    c_gg   |g>_1 |g>_2 |00>     (invariant under the dynamics)
    alpha1 |e>_1 |g>_2 |00>
    alpha2 |g>_1 |e>_2 |00>
    beta1  |g>_1 |g>_2 |10>
    beta2  |g>_1 |g>_2 |01>
    """

    c_gg: complex = 0.0 + 0.0j
    alpha1: complex = 0.0 + 0.0j
    alpha2: complex = 0.0 + 0.0j
    beta1: complex = 0.0 + 0.0j
    beta2: complex = 0.0 + 0.0j

    @property
    def beta_s(self):
        """Symmetric photon amplitude (beta1 + beta2) / sqrt(2).

        Vanishes identically on the dark (jump-free) trajectory.
        """
        return (self.beta1 + self.beta2) / SQRT2

    @property
    def beta_a(self):
        """Antisymmetric photon amplitude (beta2 - beta1) / sqrt(2)."""
        return (self.beta2 - self.beta1) / SQRT2

    @property
    def norm_sq(self):
        return (abs(self.c_gg) ** 2 + abs(self.alpha1) ** 2 +
                abs(self.alpha2) ** 2 + abs(self.beta1) ** 2 +
                abs(self.beta2) ** 2)

    def to_vector(self):
        return np.array([self.c_gg, self.alpha1, self.alpha2,
                         self.beta1, self.beta2], dtype=np.complex128)

    @classmethod
    def from_vector(cls, vec):
        return cls(*(complex(v) for v in vec))

    def __add__(self, other):
        return AmplitudeState.from_vector(self.to_vector() +
                                          other.to_vector())

    def __mul__(self, scalar):
        return AmplitudeState.from_vector(scalar * self.to_vector())

    __rmul__ = __mul__


def excited_node1():
    """Excitation fully in atom 1 (the idealized sender boundary state)."""
    return AmplitudeState(alpha1=1.0)


def ground_state():
    return AmplitudeState(c_gg=1.0)


@dataclass(frozen=True)
class TransferRecord:
    """Full time series of one conditional evolution.

    ``amplitudes`` has one row per sample time with columns (c_gg, alpha1,
    alpha2, beta1, beta2).
    """

    times: np.ndarray
    pulses: tuple
    amplitudes: np.ndarray
    fidelity: float
    jump_probability: float

    def __post_init__(self):
        object.__setattr__(self, "times", _frozen_array(self.times))
        object.__setattr__(self, "amplitudes",
                           _frozen_array(self.amplitudes, complex))
        if self.amplitudes.shape != (len(self.times), 5):
            raise InvalidParameterError("amplitude series shape mismatch")
        if not 0.0 <= self.fidelity <= 1.0:
            raise InvalidParameterError("fidelity must lie in [0, 1]")
        if not 0.0 <= self.jump_probability <= 1.0:
            raise InvalidParameterError("jump_probability must lie in [0, 1]")
        if self.fidelity + self.jump_probability > 1.0 + 1e-6:
            raise InvalidParameterError(
                "fidelity + jump_probability exceeds 1")

    @property
    def c_gg(self):
        return self.amplitudes[:, 0]

    @property
    def alpha1(self):
        return self.amplitudes[:, 1]

    @property
    def alpha2(self):
        return self.amplitudes[:, 2]

    @property
    def beta1(self):
        return self.amplitudes[:, 3]

    @property
    def beta2(self):
        return self.amplitudes[:, 4]

    @property
    def beta_s(self):
        return (self.beta1 + self.beta2) / SQRT2

    @property
    def beta_a(self):
        return (self.beta2 - self.beta1) / SQRT2

    @property
    def dark_residual(self):
        """|beta_s(t)|: distance from the jump-free manifold."""
        return np.abs(self.beta_s)

    @property
    def norm(self):
        """Squared norm of the conditional state at each sample."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    @property
    def states(self):
        return [AmplitudeState.from_vector(row) for row in self.amplitudes]

    def state_at(self, index):
        return AmplitudeState.from_vector(self.amplitudes[index])
