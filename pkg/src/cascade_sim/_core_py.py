"""Pure-python evolution kernel (fallback for the compiled extension).

Integrates the conditional no-jump dynamics of the two-node cascaded system
in the single-excitation basis (c_gg, alpha1, alpha2, beta1, beta2) with an
adaptive Dormand-Prince 5(4) stepper.  Pulses enter as piecewise-cubic
coefficient tables on a uniform grid, so off-grid queries cost a single
polynomial evaluation.

The compiled kernel in ``_core.pyx`` implements the same algorithm with the
same tableau; results agree to integration tolerance and the test suite
cross-checks both against scipy.
"""

import numpy as np

from ._tableau import A, B, C, E, P, SAFETY, MIN_FACTOR, MAX_FACTOR, \
    ERROR_EXPONENT

COMPILED = False

STATUS_DONE = 0
STATUS_EVENT = 1
STATUS_UNDERFLOW = -1
STATUS_MAX_STEPS = -2

_N_BISECT = 60


def _cubic(t0, h, coef, t):
    """Evaluate a piecewise cubic with uniform breakpoints at time t."""
    k = int((t - t0) / h)
    n = coef.shape[1]
    if k < 0:
        k = 0
    elif k >= n:
        k = n - 1
    x = t - (t0 + k * h)
    return ((coef[0, k] * x + coef[1, k]) * x + coef[2, k]) * x + coef[3, k]


def _rhs(t, y, g1_t0, g1_h, g1_c, g2_t0, g2_h, g2_c, kappa, lam, ac, bc):
    g1 = _cubic(g1_t0, g1_h, g1_c, t)
    g2 = _cubic(g2_t0, g2_h, g2_c, t)
    return np.array([
        0.0,
        ac * g1 * g1 * y[1] - lam * g1 * y[3],
        ac * g2 * g2 * y[2] - lam * g2 * y[4],
        lam * g1 * y[1] + bc * y[3],
        lam * g2 * y[2] + bc * y[4] - 2.0 * kappa * y[3],
    ], dtype=np.complex128)


def _norm_sq(y):
    return float(np.real(y @ np.conj(y)))


def _rms(v, scale):
    return float(np.sqrt(np.mean((np.abs(v) / scale) ** 2)))


def _initial_step(t0, t1, y0, f0, rtol, atol, rhs_args):
    scale = atol + np.abs(y0) * rtol
    d0 = float(np.sqrt(np.mean((np.abs(y0) / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((np.abs(f0) / scale) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = _rhs(t0 + h0, y1, *rhs_args)
    d2 = float(np.sqrt(np.mean((np.abs(f1 - f0) / scale) ** 2))) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, t1 - t0)


def _dense(y_old, h, q, x):
    # q is (5, 4): stage matrix contracted with the dense-output polynomial
    p = np.array([x, x * x, x ** 3, x ** 4])
    return y_old + h * (q @ p)


def integrate(y0, t0, t1,
              g1_t0, g1_h, g1_c, g2_t0, g2_h, g2_c,
              kappa, lam, ac, bc,
              rtol, atol, out_times, out_states,
              threshold=-1.0, max_steps=10_000_000):
    """Step from t0 to t1, sampling at out_times via dense output.

    If ``threshold`` >= 0 the integration stops at the first time where the
    squared norm of the state drops to the threshold (located by bisection
    on the dense interpolant).

    Returns ``(status, t_end, y_end, n_filled, n_steps)``.
    """
    rhs_args = (g1_t0, g1_h, g1_c, g2_t0, g2_h, g2_c, kappa, lam, ac, bc)
    y = np.asarray(y0, dtype=np.complex128).copy()
    t = float(t0)
    n_out = len(out_times)
    ptr = 0
    while ptr < n_out and out_times[ptr] <= t:
        out_states[ptr] = y
        ptr += 1

    if threshold >= 0.0 and _norm_sq(y) <= threshold:
        return STATUS_EVENT, t, y, ptr, 0

    f = _rhs(t, y, *rhs_args)
    h_abs = _initial_step(t, t1, y, f, rtol, atol, rhs_args)
    K = np.empty((7, 5), dtype=np.complex128)
    n_steps = 0
    step_rejected = False

    while t < t1:
        if n_steps >= max_steps:
            return STATUS_MAX_STEPS, t, y, ptr, n_steps
        min_step = 10.0 * abs(np.nextafter(t, t1) - t)
        if h_abs < min_step:
            h_abs = min_step
        h = min(h_abs, t1 - t)

        K[0] = f
        for s in range(1, 6):
            ys = y + h * (A[s, :s] @ K[:s])
            K[s] = _rhs(t + C[s] * h, ys, *rhs_args)
        y_new = y + h * (B @ K[:6])
        t_new = t + h
        f_new = _rhs(t_new, y_new, *rhs_args)
        K[6] = f_new

        scale = atol + np.maximum(np.abs(y), np.abs(y_new)) * rtol
        err = _rms(h * (E @ K), scale)
        n_steps += 1

        if err < 1.0:
            factor = MAX_FACTOR if err == 0.0 else \
                min(MAX_FACTOR, SAFETY * err ** ERROR_EXPONENT)
            if step_rejected:
                factor = min(1.0, factor)
            h_abs = h * factor
            step_rejected = False
        else:
            if h <= min_step:
                return STATUS_UNDERFLOW, t, y, ptr, n_steps
            h_abs = h * max(MIN_FACTOR, SAFETY * err ** ERROR_EXPONENT)
            step_rejected = True
            continue

        q = K.T @ P

        event = threshold >= 0.0 and _norm_sq(y_new) <= threshold
        if event:
            lo, hi = 0.0, 1.0
            for _ in range(_N_BISECT):
                mid = 0.5 * (lo + hi)
                if _norm_sq(_dense(y, h, q, mid)) > threshold:
                    lo = mid
                else:
                    hi = mid
            x_ev = hi
            t_ev = t + x_ev * h
            while ptr < n_out and out_times[ptr] <= t_ev:
                out_states[ptr] = _dense(y, h, q, (out_times[ptr] - t) / h)
                ptr += 1
            y_ev = _dense(y, h, q, x_ev)
            return STATUS_EVENT, t_ev, y_ev, ptr, n_steps

        while ptr < n_out and out_times[ptr] <= t_new:
            out_states[ptr] = _dense(y, h, q, (out_times[ptr] - t) / h)
            ptr += 1

        t, y, f = t_new, y_new, f_new

    while ptr < n_out:  # out_times at t1 within roundoff
        out_states[ptr] = y
        ptr += 1
    return STATUS_DONE, t, y, ptr, n_steps
