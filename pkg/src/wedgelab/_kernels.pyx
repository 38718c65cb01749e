# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: map orbits, the 4D flow, and Benettin spectra.

Statement-for-statement mirror of _kernels_py.py, compiled without
-ffast-math or FMA contraction so both backends agree on every trajectory.
Keep edits synchronized.
"""

from libc.math cimport sin, cos, log, sqrt, pow, floor, ceil, fabs, NAN, INFINITY

cdef double TWO_PI = 6.283185307179586476925286766559
cdef double _LOG_FLOOR = -690.7755278982137


def map_orbit(double x0, double y0, double A, double lam, double omega,
              double K, double delta, long n, long transient, double conv_tol):
    """See _kernels_py.map_orbit: same contract, same arithmetic."""
    cdef double x, y, q11, q21, q12, q22, acc1, acc2, dd, kw
    cdef double s, cx, col, a11, a12, a21, a22, xu, turns, xn, yn
    cdef double b11, b21, b12, b22, r1, proj, w1, w2, r2, lr1, lr2, dx, dy
    cdef double le1, le2
    cdef long long winding = 0
    cdef long window = 0, status = 0, esc = -1, completed = 0, k
    with nogil:
        x = x0 - TWO_PI * floor(x0 / TWO_PI)
        y = y0
        q11 = 1.0
        q21 = 0.0
        q12 = 0.0
        q22 = 1.0
        acc1 = 0.0
        acc2 = 0.0
        dd = INFINITY
        kw = K * omega
        for k in range(1, n + 1):
            if fabs(y) > 1.0:
                status = 3
                esc = k - 1
                break
            s = y + A + lam * sin(x)
            if not s > 0.0:
                status = 2
                esc = k - 1
                break
            cx = cos(x)
            col = delta * pow(s, delta - 1.0)
            a11 = 1.0 - kw * lam * cx / s
            a12 = -kw / s
            a21 = col * lam * cx
            a22 = col
            xu = x - kw * log(s)
            turns = floor(xu / TWO_PI)
            xn = xu - TWO_PI * turns
            if xn < 0.0:
                xn += TWO_PI
                turns -= 1.0
            yn = pow(s, delta)
            b11 = a11 * q11 + a12 * q21
            b21 = a21 * q11 + a22 * q21
            b12 = a11 * q12 + a12 * q22
            b22 = a21 * q12 + a22 * q22
            r1 = sqrt(b11 * b11 + b21 * b21)
            if r1 > 1e-300:
                q11 = b11 / r1
                q21 = b21 / r1
                lr1 = log(r1)
            else:
                q11 = 1.0
                q21 = 0.0
                lr1 = _LOG_FLOOR
            proj = q11 * b12 + q21 * b22
            w1 = b12 - proj * q11
            w2 = b22 - proj * q21
            r2 = sqrt(w1 * w1 + w2 * w2)
            if r2 > 1e-300:
                q12 = w1 / r2
                q22 = w2 / r2
                lr2 = log(r2)
            else:
                q12 = -q21
                q22 = q11
                lr2 = _LOG_FLOOR
            if k > transient:
                acc1 += lr1
                acc2 += lr2
                window += 1
            dx = xn - x
            dx -= TWO_PI * floor(dx / TWO_PI + 0.5)
            dy = yn - y
            dd = sqrt(dx * dx + dy * dy)
            x = xn
            y = yn
            winding += <long long> turns
            completed = k
        if status == 0 and dd < conv_tol:
            status = 1
        if window > 0:
            le1 = acc1 / window
            le2 = acc2 / window
            if le2 > le1:
                le1, le2 = le2, le1
        else:
            le1 = NAN
            le2 = NAN
    return status, completed, esc, x, y, winding, le1, le2, window, dd


# -- 4D flow -----------------------------------------------------------------


cdef void _field(double* z, double* f, double alpha, double beta, double omega,
                 double tau1, double tau2, int field_id,
                 double a1, double a2, double a3, double a4) noexcept nogil:
    cdef double x1 = z[0]
    cdef double x2 = z[1]
    cdef double x3 = z[2]
    cdef double x4 = z[3]
    cdef double r2, g
    if field_id == 1:
        f[0] = a1 * x1
        f[1] = a2 * x2
        f[2] = a3 * x3
        f[3] = a4 * x4
        return
    r2 = x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4
    g = 1.0 - r2
    f[0] = x1 * g - omega * x2 - alpha * x1 * x4 + beta * x1 * x4 * x4 + tau2 * x1 * x3 * x4
    f[1] = x2 * g + omega * x1 - alpha * x2 * x4 + beta * x2 * x4 * x4
    f[2] = (
        x3 * g + alpha * x3 * x4 + beta * x3 * x4 * x4
        + tau1 * x4 * x4 * x4 - tau2 * x1 * x1 * x4
    )
    f[3] = (
        x4 * g - alpha * (x3 * x3 - x1 * x1 - x2 * x2)
        - beta * x4 * (x1 * x1 + x2 * x2 + x3 * x3) - tau1 * x3 * x4 * x4
    )


cdef void _jacobian(double* z, double* j, double alpha, double beta, double omega,
                    double tau1, double tau2, int field_id,
                    double a1, double a2, double a3, double a4) noexcept nogil:
    cdef double x1 = z[0]
    cdef double x2 = z[1]
    cdef double x3 = z[2]
    cdef double x4 = z[3]
    cdef double r2, g
    cdef int i
    if field_id == 1:
        for i in range(16):
            j[i] = 0.0
        j[0] = a1
        j[5] = a2
        j[10] = a3
        j[15] = a4
        return
    r2 = x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4
    g = 1.0 - r2
    j[0] = g - 2.0 * x1 * x1 - alpha * x4 + beta * x4 * x4 + tau2 * x3 * x4
    j[1] = -2.0 * x1 * x2 - omega
    j[2] = -2.0 * x1 * x3 + tau2 * x1 * x4
    j[3] = -2.0 * x1 * x4 - alpha * x1 + 2.0 * beta * x1 * x4 + tau2 * x1 * x3
    j[4] = -2.0 * x2 * x1 + omega
    j[5] = g - 2.0 * x2 * x2 - alpha * x4 + beta * x4 * x4
    j[6] = -2.0 * x2 * x3
    j[7] = -2.0 * x2 * x4 - alpha * x2 + 2.0 * beta * x2 * x4
    j[8] = -2.0 * x3 * x1 - 2.0 * tau2 * x1 * x4
    j[9] = -2.0 * x3 * x2
    j[10] = g - 2.0 * x3 * x3 + alpha * x4 + beta * x4 * x4
    j[11] = (
        -2.0 * x3 * x4 + alpha * x3 + 2.0 * beta * x3 * x4
        + 3.0 * tau1 * x4 * x4 - tau2 * x1 * x1
    )
    j[12] = -2.0 * x4 * x1 + 2.0 * alpha * x1 - 2.0 * beta * x4 * x1
    j[13] = -2.0 * x4 * x2 + 2.0 * alpha * x2 - 2.0 * beta * x4 * x2
    j[14] = -2.0 * x4 * x3 - 2.0 * alpha * x3 - 2.0 * beta * x4 * x3 - tau1 * x4 * x4
    j[15] = g - 2.0 * x4 * x4 - beta * (x1 * x1 + x2 * x2 + x3 * x3) - 2.0 * tau1 * x3 * x4


cdef void _rhs(double* z, double* f, int ndim, double alpha, double beta,
               double omega, double tau1, double tau2, int field_id,
               double a1, double a2, double a3, double a4) noexcept nogil:
    cdef double j[16]
    cdef int v, i, base
    _field(z, f, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4)
    if ndim == 4:
        return
    _jacobian(z, j, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4)
    for v in range(4):
        base = 4 + 4 * v
        for i in range(4):
            f[base + i] = (
                j[4 * i] * z[base]
                + j[4 * i + 1] * z[base + 1]
                + j[4 * i + 2] * z[base + 2]
                + j[4 * i + 3] * z[base + 3]
            )
    if ndim == 21:
        f[20] = j[0] + j[5] + j[10] + j[15]


cdef double _C2 = 0.2
cdef double _C3 = 0.3
cdef double _C4 = 0.8
cdef double _C5 = 8.0 / 9.0
cdef double _A21 = 0.2
cdef double _A31 = 3.0 / 40.0
cdef double _A32 = 9.0 / 40.0
cdef double _A41 = 44.0 / 45.0
cdef double _A42 = -56.0 / 15.0
cdef double _A43 = 32.0 / 9.0
cdef double _A51 = 19372.0 / 6561.0
cdef double _A52 = -25360.0 / 2187.0
cdef double _A53 = 64448.0 / 6561.0
cdef double _A54 = -212.0 / 729.0
cdef double _A61 = 9017.0 / 3168.0
cdef double _A62 = -355.0 / 33.0
cdef double _A63 = 46732.0 / 5247.0
cdef double _A64 = 49.0 / 176.0
cdef double _A65 = -5103.0 / 18656.0
cdef double _B1 = 35.0 / 384.0
cdef double _B3 = 500.0 / 1113.0
cdef double _B4 = 125.0 / 192.0
cdef double _B5 = -2187.0 / 6784.0
cdef double _B6 = 11.0 / 84.0
cdef double _E1 = 71.0 / 57600.0
cdef double _E3 = -71.0 / 16695.0
cdef double _E4 = 71.0 / 1920.0
cdef double _E5 = -17253.0 / 339200.0
cdef double _E6 = 22.0 / 525.0
cdef double _E7 = -1.0 / 40.0


cdef int _advance(double* z, int ndim, double t0, double t1, double tol,
                  double* h_io, double* t_out, double alpha, double beta,
                  double omega, double tau1, double tau2, int field_id,
                  double a1, double a2, double a3, double a4) noexcept nogil:
    cdef double t = t0
    cdef double h = h_io[0]
    cdef double k1[21]
    cdef double k2[21]
    cdef double k3[21]
    cdef double k4[21]
    cdef double k5[21]
    cdef double k6[21]
    cdef double k7[21]
    cdef double w[21]
    cdef double y5[21]
    cdef double errsum, e, ay, ay5, sc, q, err, fac, tmax
    cdef int i
    _rhs(z, k1, ndim, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4)
    while t < t1:
        if h > t1 - t:
            h = t1 - t
        tmax = 1.0 if fabs(t) < 1.0 else fabs(t)
        if h < 1e-14 * tmax:
            h_io[0] = h
            t_out[0] = t
            return 1
        for i in range(ndim):
            w[i] = z[i] + h * (_A21 * k1[i])
        _rhs(w, k2, ndim, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4)
        for i in range(ndim):
            w[i] = z[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        _rhs(w, k3, ndim, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4)
        for i in range(ndim):
            w[i] = z[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _rhs(w, k4, ndim, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4)
        for i in range(ndim):
            w[i] = z[i] + h * (
                _A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i]
            )
        _rhs(w, k5, ndim, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4)
        for i in range(ndim):
            w[i] = z[i] + h * (
                _A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                + _A64 * k4[i] + _A65 * k5[i]
            )
        _rhs(w, k6, ndim, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4)
        for i in range(ndim):
            y5[i] = z[i] + h * (
                _B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i]
                + _B5 * k5[i] + _B6 * k6[i]
            )
        _rhs(y5, k7, ndim, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4)
        errsum = 0.0
        for i in range(ndim):
            e = h * (
                _E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i]
                + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i]
            )
            ay = fabs(z[i])
            ay5 = fabs(y5[i])
            sc = tol + tol * (ay if ay > ay5 else ay5)
            q = e / sc
            errsum += q * q
        err = sqrt(errsum / ndim)
        if err <= 1.0:
            t = t + h
            for i in range(ndim):
                z[i] = y5[i]
                k1[i] = k7[i]
            fac = 5.0 if err == 0.0 else 0.9 * pow(err, -0.2)
            if fac > 5.0:
                fac = 5.0
            h = h * fac
        else:
            fac = 0.9 * pow(err, -0.2)
            if fac < 0.2:
                fac = 0.2
            h = h * fac
    h_io[0] = h
    t_out[0] = t
    return 0


def ode_final(s0, double alpha, double beta, double omega, double tau1,
              double tau2, double t_final, double tol):
    """See _kernels_py.ode_final."""
    cdef double z[4]
    cdef double h = 1e-4
    cdef double t = 0.0
    cdef int status
    z[0] = s0[0]
    z[1] = s0[1]
    z[2] = s0[2]
    z[3] = s0[3]
    with nogil:
        status = _advance(z, 4, 0.0, t_final, tol, &h, &t,
                          alpha, beta, omega, tau1, tau2, 0, 0.0, 0.0, 0.0, 0.0)
    return status, t, (z[0], z[1], z[2], z[3])


def ode_sample(s0, double alpha, double beta, double omega, double tau1,
               double tau2, double[::1] times, double[:, ::1] out, double tol):
    """See _kernels_py.ode_sample."""
    cdef double z[4]
    cdef double h = 1e-4
    cdef double t = 0.0
    cdef double target
    cdef int status = 0
    cdef Py_ssize_t row, i, nrows = times.shape[0]
    z[0] = s0[0]
    z[1] = s0[1]
    z[2] = s0[2]
    z[3] = s0[3]
    with nogil:
        for row in range(nrows):
            target = times[row]
            if target > t:
                status = _advance(z, 4, t, target, tol, &h, &t,
                                  alpha, beta, omega, tau1, tau2,
                                  0, 0.0, 0.0, 0.0, 0.0)
                if status != 0:
                    break
            for i in range(4):
                out[row, i] = z[i]
    return status, t


def ode_spectrum(s0, double alpha, double beta, double omega, double tau1,
                 double tau2, double t_final, double renorm_dt,
                 double transient, double tol, int field_id,
                 double a1, double a2, double a3, double a4):
    """See _kernels_py.ode_spectrum: same contract, same arithmetic."""
    cdef double z[21]
    cdef double acc[4]
    cdef double les[4]
    cdef double t = 0.0
    cdef double h = 1e-4
    cdef double div_ref = 0.0
    cdef double t_ref
    cdef double min_pole = INFINITY
    cdef double target, nrm, dot, d_plus, d_minus, d, span, div_avg
    cdef int status = 0
    cdef long n_seg, seg
    cdef int v, u, i, base, ob
    cdef bint started
    for i in range(21):
        z[i] = 0.0
    z[0] = s0[0]
    z[1] = s0[1]
    z[2] = s0[2]
    z[3] = s0[3]
    z[4] = 1.0
    z[9] = 1.0
    z[14] = 1.0
    z[19] = 1.0
    acc[0] = 0.0
    acc[1] = 0.0
    acc[2] = 0.0
    acc[3] = 0.0
    t_ref = 0.0 if transient <= 0.0 else -1.0
    with nogil:
        n_seg = <long> ceil(t_final / renorm_dt - 1e-9)
        for seg in range(1, n_seg + 1):
            target = seg * renorm_dt
            if target > t_final:
                target = t_final
            status = _advance(z, 21, t, target, tol, &h, &t,
                              alpha, beta, omega, tau1, tau2, field_id,
                              a1, a2, a3, a4)
            if status != 0:
                break
            started = t_ref >= 0.0
            for v in range(4):
                base = 4 + 4 * v
                nrm = sqrt(
                    z[base] * z[base] + z[base + 1] * z[base + 1]
                    + z[base + 2] * z[base + 2] + z[base + 3] * z[base + 3]
                )
                if started:
                    acc[v] += log(nrm)
                for i in range(4):
                    z[base + i] /= nrm
                for u in range(v + 1, 4):
                    ob = 4 + 4 * u
                    dot = (
                        z[ob] * z[base] + z[ob + 1] * z[base + 1]
                        + z[ob + 2] * z[base + 2] + z[ob + 3] * z[base + 3]
                    )
                    for i in range(4):
                        z[ob + i] -= dot * z[base + i]
            if not started and t >= transient - 1e-9:
                t_ref = t
                div_ref = z[20]
            if t_ref >= 0.0:
                d_plus = sqrt(
                    z[0] * z[0] + z[1] * z[1] + z[2] * z[2]
                    + (z[3] - 1.0) * (z[3] - 1.0)
                )
                d_minus = sqrt(
                    z[0] * z[0] + z[1] * z[1] + z[2] * z[2]
                    + (z[3] + 1.0) * (z[3] + 1.0)
                )
                d = d_plus if d_plus < d_minus else d_minus
                if d < min_pole:
                    min_pole = d
    if t_ref < 0.0 or t <= t_ref:
        return status, t, (NAN, NAN, NAN, NAN), NAN, min_pole, 0.0
    span = t - t_ref
    for v in range(4):
        les[v] = acc[v] / span
    # insertion sort, descending
    for v in range(1, 4):
        d = les[v]
        u = v - 1
        while u >= 0 and les[u] < d:
            les[u + 1] = les[u]
            u -= 1
        les[u + 1] = d
    div_avg = (z[20] - div_ref) / span
    return status, t, (les[0], les[1], les[2], les[3]), div_avg, min_pole, span
