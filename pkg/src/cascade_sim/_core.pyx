# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled evolution kernel.

Same algorithm, tableau and return contract as ``_core_py.integrate``; the
stepping loop runs without the GIL so trajectory batches and sweeps can use
real threads.
"""

import numpy as np

from libc.math cimport sqrt, fabs, pow, nextafter

from . import _tableau

COMPILED = True

STATUS_DONE = 0
STATUS_EVENT = 1
STATUS_UNDERFLOW = -1
STATUS_MAX_STEPS = -2

cdef int _DONE = 0
cdef int _EVENT = 1
cdef int _UNDERFLOW = -1
cdef int _MAX_STEPS = -2

ctypedef double complex cplx

cdef int NBISECT = 60

cdef double A_c[6][5]
cdef double B_c[6]
cdef double C_c[6]
cdef double E_c[7]
cdef double P_c[7][4]
cdef double SAFETY = _tableau.SAFETY
cdef double MIN_FACTOR = _tableau.MIN_FACTOR
cdef double MAX_FACTOR = _tableau.MAX_FACTOR
cdef double ERR_EXP = _tableau.ERROR_EXPONENT

for _i in range(6):
    C_c[_i] = _tableau.C[_i]
    B_c[_i] = _tableau.B[_i]
    for _j in range(5):
        A_c[_i][_j] = _tableau.A[_i, _j]
for _i in range(7):
    E_c[_i] = _tableau.E[_i]
    for _j in range(4):
        P_c[_i][_j] = _tableau.P[_i, _j]


cdef struct Problem:
    double g1_t0
    double g1_h
    int g1_n
    const double *g1_c
    double g2_t0
    double g2_h
    int g2_n
    const double *g2_c
    double kappa
    cplx lam
    cplx ac
    cplx bc


cdef inline double cubic(double t0, double h, const double *c, int n,
                         double t) noexcept nogil:
    cdef int k = <int>((t - t0) / h)
    cdef double x
    if k < 0:
        k = 0
    elif k >= n:
        k = n - 1
    x = t - (t0 + k * h)
    return ((c[k] * x + c[n + k]) * x + c[2 * n + k]) * x + c[3 * n + k]


cdef inline void rhs(double t, const cplx *y, cplx *out,
                     const Problem *p) noexcept nogil:
    cdef double g1 = cubic(p.g1_t0, p.g1_h, p.g1_c, p.g1_n, t)
    cdef double g2 = cubic(p.g2_t0, p.g2_h, p.g2_c, p.g2_n, t)
    out[0] = 0
    out[1] = p.ac * g1 * g1 * y[1] - p.lam * g1 * y[3]
    out[2] = p.ac * g2 * g2 * y[2] - p.lam * g2 * y[4]
    out[3] = p.lam * g1 * y[1] + p.bc * y[3]
    out[4] = p.lam * g2 * y[2] + p.bc * y[4] - 2.0 * p.kappa * y[3]


cdef inline double norm_sq(const cplx *y) noexcept nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(5):
        s += y[i].real * y[i].real + y[i].imag * y[i].imag
    return s


cdef inline double rms_scaled(const cplx *v, const double *scale) noexcept nogil:
    cdef double s = 0.0
    cdef double a
    cdef int i
    for i in range(5):
        a = sqrt(v[i].real * v[i].real + v[i].imag * v[i].imag) / scale[i]
        s += a * a
    return sqrt(s / 5.0)


cdef inline void dense_eval(const cplx *y_old, double h, const cplx *q,
                            double x, cplx *out) noexcept nogil:
    # q is the 5x4 stage/polynomial contraction, stored row-major
    cdef double p1 = x
    cdef double p2 = x * x
    cdef double p3 = p2 * x
    cdef double p4 = p3 * x
    cdef int i
    for i in range(5):
        out[i] = y_old[i] + h * (q[4 * i] * p1 + q[4 * i + 1] * p2 +
                                 q[4 * i + 2] * p3 + q[4 * i + 3] * p4)


cdef double initial_step(double t0, double t1, const cplx *y0, const cplx *f0,
                         double rtol, double atol, const Problem *p) noexcept nogil:
    cdef double scale[5]
    cdef cplx y1[5]
    cdef cplx f1[5]
    cdef cplx d[5]
    cdef double d0 = 0.0, d1 = 0.0, d2 = 0.0, a, h0, h1
    cdef int i
    for i in range(5):
        a = sqrt(y0[i].real * y0[i].real + y0[i].imag * y0[i].imag)
        scale[i] = atol + a * rtol
        a = a / scale[i]
        d0 += a * a
        a = sqrt(f0[i].real * f0[i].real + f0[i].imag * f0[i].imag) / scale[i]
        d1 += a * a
    d0 = sqrt(d0 / 5.0)
    d1 = sqrt(d1 / 5.0)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    for i in range(5):
        y1[i] = y0[i] + h0 * f0[i]
    rhs(t0 + h0, y1, f1, p)
    for i in range(5):
        d[i] = f1[i] - f0[i]
        a = sqrt(d[i].real * d[i].real + d[i].imag * d[i].imag) / scale[i]
        d2 += a * a
    d2 = sqrt(d2 / 5.0) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = 1e-6 if 1e-6 > h0 * 1e-3 else h0 * 1e-3
    else:
        h1 = pow(0.01 / (d1 if d1 > d2 else d2), 0.2)
    h0 = 100.0 * h0
    if h1 < h0:
        h0 = h1
    if t1 - t0 < h0:
        h0 = t1 - t0
    return h0


cdef int run(cplx *y, double *t_io, double t1, const Problem *p,
             double rtol, double atol,
             const double *out_times, int n_out, cplx *out_states,
             int *ptr_io, double threshold, long max_steps,
             long *steps_io) noexcept nogil:
    cdef double t = t_io[0]
    cdef int ptr = ptr_io[0]
    cdef cplx K[7][5]
    cdef cplx q[20]
    cdef cplx f[5]
    cdef cplx ys[5]
    cdef cplx y_new[5]
    cdef cplx err_v[5]
    cdef cplx y_ev[5]
    cdef cplx acc
    cdef double scale[5]
    cdef double h_abs, h, t_new, min_step, err, factor, a, b
    cdef double lo, hi, mid, x_ev, t_ev
    cdef long n_steps = 0
    cdef bint step_rejected = False
    cdef int i, s, j

    while ptr < n_out and out_times[ptr] <= t:
        for i in range(5):
            out_states[5 * ptr + i] = y[i]
        ptr += 1

    if threshold >= 0.0 and norm_sq(y) <= threshold:
        t_io[0] = t
        ptr_io[0] = ptr
        steps_io[0] = 0
        return _EVENT

    rhs(t, y, f, p)
    h_abs = initial_step(t, t1, y, f, rtol, atol, p)

    while t < t1:
        if n_steps >= max_steps:
            t_io[0] = t
            ptr_io[0] = ptr
            steps_io[0] = n_steps
            return _MAX_STEPS
        min_step = 10.0 * fabs(nextafter(t, t1) - t)
        if h_abs < min_step:
            h_abs = min_step
        h = h_abs
        if t1 - t < h:
            h = t1 - t

        for i in range(5):
            K[0][i] = f[i]
        for s in range(1, 6):
            for i in range(5):
                acc = 0
                for j in range(s):
                    acc = acc + A_c[s][j] * K[j][i]
                ys[i] = y[i] + h * acc
            rhs(t + C_c[s] * h, ys, K[s], p)
        for i in range(5):
            acc = 0
            for j in range(6):
                acc = acc + B_c[j] * K[j][i]
            y_new[i] = y[i] + h * acc
        t_new = t + h
        rhs(t_new, y_new, K[6], p)

        for i in range(5):
            a = sqrt(y[i].real * y[i].real + y[i].imag * y[i].imag)
            b = sqrt(y_new[i].real * y_new[i].real + y_new[i].imag * y_new[i].imag)
            scale[i] = atol + (a if a > b else b) * rtol
            acc = 0
            for j in range(7):
                acc = acc + E_c[j] * K[j][i]
            err_v[i] = h * acc
        err = rms_scaled(err_v, scale)
        n_steps += 1

        if err < 1.0:
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * pow(err, ERR_EXP)
                if factor > MAX_FACTOR:
                    factor = MAX_FACTOR
            if step_rejected and factor > 1.0:
                factor = 1.0
            h_abs = h * factor
            step_rejected = False
        else:
            if h <= min_step:
                t_io[0] = t
                ptr_io[0] = ptr
                steps_io[0] = n_steps
                return _UNDERFLOW
            factor = SAFETY * pow(err, ERR_EXP)
            if factor < MIN_FACTOR:
                factor = MIN_FACTOR
            h_abs = h * factor
            step_rejected = True
            continue

        for i in range(5):
            for j in range(4):
                acc = 0
                for s in range(7):
                    acc = acc + K[s][i] * P_c[s][j]
                q[4 * i + j] = acc

        if threshold >= 0.0 and norm_sq(y_new) <= threshold:
            lo = 0.0
            hi = 1.0
            for s in range(NBISECT):
                mid = 0.5 * (lo + hi)
                dense_eval(y, h, q, mid, y_ev)
                if norm_sq(y_ev) > threshold:
                    lo = mid
                else:
                    hi = mid
            x_ev = hi
            t_ev = t + x_ev * h
            while ptr < n_out and out_times[ptr] <= t_ev:
                dense_eval(y, h, q, (out_times[ptr] - t) / h, ys)
                for i in range(5):
                    out_states[5 * ptr + i] = ys[i]
                ptr += 1
            dense_eval(y, h, q, x_ev, y_ev)
            for i in range(5):
                y[i] = y_ev[i]
            t_io[0] = t_ev
            ptr_io[0] = ptr
            steps_io[0] = n_steps
            return _EVENT

        while ptr < n_out and out_times[ptr] <= t_new:
            dense_eval(y, h, q, (out_times[ptr] - t) / h, ys)
            for i in range(5):
                out_states[5 * ptr + i] = ys[i]
            ptr += 1

        t = t_new
        for i in range(5):
            y[i] = y_new[i]
            f[i] = K[6][i]

    while ptr < n_out:
        for i in range(5):
            out_states[5 * ptr + i] = y[i]
        ptr += 1
    t_io[0] = t
    ptr_io[0] = ptr
    steps_io[0] = n_steps
    return _DONE


def integrate(y0, double t0, double t1,
              double g1_t0, double g1_h, double[:, ::1] g1_c,
              double g2_t0, double g2_h, double[:, ::1] g2_c,
              double kappa, lam, ac, bc,
              double rtol, double atol, out_times, out_states,
              double threshold=-1.0, long max_steps=10_000_000):
    """See ``_core_py.integrate``; identical contract."""
    cdef Problem p
    cdef cplx y[5]
    cdef double t = t0
    cdef int ptr = 0
    cdef long n_steps = 0
    cdef int status, i

    y_arr = np.ascontiguousarray(y0, dtype=np.complex128)
    if y_arr.shape != (5,):
        raise ValueError("state must have 5 amplitudes")
    times_arr = np.ascontiguousarray(out_times, dtype=np.float64)
    cdef double[::1] times_mv = times_arr
    cdef cplx[:, ::1] states_mv = out_states
    cdef cplx[::1] y_mv = y_arr
    cdef int n_out = times_mv.shape[0]
    if out_states.shape[0] < n_out or out_states.shape[1] != 5:
        raise ValueError("output buffer shape mismatch")

    p.g1_t0 = g1_t0
    p.g1_h = g1_h
    p.g1_n = g1_c.shape[1]
    p.g1_c = &g1_c[0, 0]
    p.g2_t0 = g2_t0
    p.g2_h = g2_h
    p.g2_n = g2_c.shape[1]
    p.g2_c = &g2_c[0, 0]
    p.kappa = kappa
    p.lam = lam
    p.ac = ac
    p.bc = bc

    for i in range(5):
        y[i] = y_mv[i]

    cdef const double *times_ptr = NULL
    cdef cplx *states_ptr = NULL
    if n_out > 0:
        times_ptr = &times_mv[0]
        states_ptr = &states_mv[0, 0]

    with nogil:
        status = run(y, &t, t1, &p, rtol, atol, times_ptr, n_out,
                     states_ptr, &ptr, threshold, max_steps, &n_steps)

    y_end = np.empty(5, dtype=np.complex128)
    for i in range(5):
        y_end[i] = y[i]
    return status, t, y_end, ptr, n_steps
