"""Interpreted kernels: map orbits, the 4D flow, and Benettin spectra.

This is the fallback backend.  The compiled extension mirrors these
routines statement for statement, through the same libm entry points and
without reassociation or FMA contraction, so both backends produce the
same trajectories.  Keep edits synchronized with _kernels.pyx.
"""

import math

TWO_PI = 6.283185307179586476925286766559


_LOG_FLOOR = -690.7755278982137  # log(1e-300), used when a stretch underflows


def map_orbit(x0, y0, A, lam, omega, K, delta, n, transient, conv_tol):
    """Iterate the truncated return map with a QR tangent frame.

    The angle is stored reduced to [0, 2*pi) with an integer winding count,
    which keeps sin/cos at full precision over arbitrarily many turns; the
    lift is x_red + 2*pi*winding.

    Returns (status, completed, esc_idx, x_red, y, winding, le1, le2,
    window, last_step) where status is 0 bounded / 1 converged / 2 escaped
    with s <= 0 / 3 escaped through |y| > 1, esc_idx the index of the first
    point violating the domain (-1 if none), le1 >= le2 the per-iterate
    exponents over the post-transient window (nan when empty), and
    last_step the final consecutive displacement in reduced coordinates.
    """
    x = x0 - TWO_PI * math.floor(x0 / TWO_PI)
    y = y0
    winding = 0
    q11 = 1.0
    q21 = 0.0
    q12 = 0.0
    q22 = 1.0
    acc1 = 0.0
    acc2 = 0.0
    window = 0
    status = 0
    esc = -1
    dd = math.inf
    kw = K * omega
    completed = 0
    for k in range(1, n + 1):
        if abs(y) > 1.0:
            status = 3
            esc = k - 1
            break
        s = y + A + lam * math.sin(x)
        if not s > 0.0:
            status = 2
            esc = k - 1
            break
        cx = math.cos(x)
        col = delta * s ** (delta - 1.0)
        a11 = 1.0 - kw * lam * cx / s
        a12 = -kw / s
        a21 = col * lam * cx
        a22 = col
        xu = x - kw * math.log(s)
        turns = math.floor(xu / TWO_PI)
        xn = xu - TWO_PI * turns
        if xn < 0.0:
            xn += TWO_PI
            turns -= 1.0
        yn = s**delta
        b11 = a11 * q11 + a12 * q21
        b21 = a21 * q11 + a22 * q21
        b12 = a11 * q12 + a12 * q22
        b22 = a21 * q12 + a22 * q22
        r1 = math.sqrt(b11 * b11 + b21 * b21)
        if r1 > 1e-300:
            q11 = b11 / r1
            q21 = b21 / r1
            lr1 = math.log(r1)
        else:
            q11 = 1.0
            q21 = 0.0
            lr1 = _LOG_FLOOR
        proj = q11 * b12 + q21 * b22
        w1 = b12 - proj * q11
        w2 = b22 - proj * q21
        r2 = math.sqrt(w1 * w1 + w2 * w2)
        if r2 > 1e-300:
            q12 = w1 / r2
            q22 = w2 / r2
            lr2 = math.log(r2)
        else:
            q12 = -q21
            q22 = q11
            lr2 = _LOG_FLOOR
        if k > transient:
            acc1 += lr1
            acc2 += lr2
            window += 1
        dx = xn - x
        dx -= TWO_PI * math.floor(dx / TWO_PI + 0.5)
        dy = yn - y
        dd = math.sqrt(dx * dx + dy * dy)
        x = xn
        y = yn
        winding += int(turns)
        completed = k
    if status == 0 and dd < conv_tol:
        status = 1
    if window > 0:
        le1 = acc1 / window
        le2 = acc2 / window
        if le2 > le1:
            le1, le2 = le2, le1
    else:
        le1 = math.nan
        le2 = math.nan
    return status, completed, esc, x, y, winding, le1, le2, window, dd


# -- 4D flow -----------------------------------------------------------------


def _field(z, f, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4):
    x1 = z[0]
    x2 = z[1]
    x3 = z[2]
    x4 = z[3]
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


def _jacobian(z, j, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4):
    """Row-major 4x4 derivative of the field into the 16-slot list j."""
    if field_id == 1:
        for i in range(16):
            j[i] = 0.0
        j[0] = a1
        j[5] = a2
        j[10] = a3
        j[15] = a4
        return
    x1 = z[0]
    x2 = z[1]
    x3 = z[2]
    x4 = z[3]
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


def _rhs(z, f, ndim, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4):
    """Velocity of the augmented system: state, optional 4 tangent vectors,
    optional divergence accumulator (layout [state, V row-major, D])."""
    _field(z, f, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4)
    if ndim == 4:
        return
    j = [0.0] * 16
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


# Dormand-Prince 5(4) tableau
_C2 = 0.2
_C3 = 0.3
_C4 = 0.8
_C5 = 8.0 / 9.0
_A21 = 0.2
_A31 = 3.0 / 40.0
_A32 = 9.0 / 40.0
_A41 = 44.0 / 45.0
_A42 = -56.0 / 15.0
_A43 = 32.0 / 9.0
_A51 = 19372.0 / 6561.0
_A52 = -25360.0 / 2187.0
_A53 = 64448.0 / 6561.0
_A54 = -212.0 / 729.0
_A61 = 9017.0 / 3168.0
_A62 = -355.0 / 33.0
_A63 = 46732.0 / 5247.0
_A64 = 49.0 / 176.0
_A65 = -5103.0 / 18656.0
_B1 = 35.0 / 384.0
_B3 = 500.0 / 1113.0
_B4 = 125.0 / 192.0
_B5 = -2187.0 / 6784.0
_B6 = 11.0 / 84.0
_E1 = 71.0 / 57600.0
_E3 = -71.0 / 16695.0
_E4 = 71.0 / 1920.0
_E5 = -17253.0 / 339200.0
_E6 = 22.0 / 525.0
_E7 = -1.0 / 40.0


def _advance(z, ndim, t0, t1, tol, h_start,
             alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4):
    """Adaptive DP54 from t0 to exactly t1.  Returns (status, t, h_next);
    status 1 means step-size underflow at time t.  z is updated in place."""
    t = t0
    h = h_start
    k1 = [0.0] * ndim
    k2 = [0.0] * ndim
    k3 = [0.0] * ndim
    k4 = [0.0] * ndim
    k5 = [0.0] * ndim
    k6 = [0.0] * ndim
    k7 = [0.0] * ndim
    w = [0.0] * ndim
    y5 = [0.0] * ndim
    _rhs(z, k1, ndim, alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4)
    while t < t1:
        if h > t1 - t:
            h = t1 - t
        if h < 1e-14 * max(1.0, abs(t)):
            return 1, t, h
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
            ay = abs(z[i])
            ay5 = abs(y5[i])
            sc = tol + tol * (ay if ay > ay5 else ay5)
            q = e / sc
            errsum += q * q
        err = math.sqrt(errsum / ndim)
        if err <= 1.0:
            t = t + h
            for i in range(ndim):
                z[i] = y5[i]
                k1[i] = k7[i]
            fac = 5.0 if err == 0.0 else 0.9 * err**-0.2
            if fac > 5.0:
                fac = 5.0
            h = h * fac
        else:
            fac = 0.9 * err**-0.2
            if fac < 0.2:
                fac = 0.2
            h = h * fac
    return 0, t, h


def ode_final(s0, alpha, beta, omega, tau1, tau2, t_final, tol):
    """Integrate the flow to t_final.  Returns (status, t_reached, state)."""
    z = [s0[0], s0[1], s0[2], s0[3]]
    status, t, _ = _advance(
        z, 4, 0.0, t_final, tol, 1e-4,
        alpha, beta, omega, tau1, tau2, 0, 0.0, 0.0, 0.0, 0.0,
    )
    return status, t, (z[0], z[1], z[2], z[3])


def ode_sample(s0, alpha, beta, omega, tau1, tau2, times, out, tol):
    """Integrate and record the state at each time in `times` (increasing,
    starting >= 0) into out[len(times)][4].  Returns (status, t_reached)."""
    z = [s0[0], s0[1], s0[2], s0[3]]
    t = 0.0
    h = 1e-4
    for row, target in enumerate(times):
        if target > t:
            status, t, h = _advance(
                z, 4, t, target, tol, h,
                alpha, beta, omega, tau1, tau2, 0, 0.0, 0.0, 0.0, 0.0,
            )
            if status != 0:
                return status, t
        for i in range(4):
            out[row][i] = z[i]
    return 0, t


def ode_spectrum(s0, alpha, beta, omega, tau1, tau2, t_final, renorm_dt,
                 transient, tol, field_id, a1, a2, a3, a4):
    """Benettin spectrum of the flow from s0.

    Integrates state, four tangent vectors under the analytic variational
    equations, and a divergence quadrature variable; modified Gram-Schmidt
    renormalization every renorm_dt, log-stretches accumulated at the
    boundaries past the transient.  Returns (status, t_reached,
    (le sorted descending), div_avg, min_pole_dist, window_time): div_avg
    is the average divergence over the same window (the exponent sum must
    match it), min_pole_dist tracks how close the orbit came to the two
    unit poles (0,0,0,+-1) after the transient.
    """
    z = [0.0] * 21
    z[0] = s0[0]
    z[1] = s0[1]
    z[2] = s0[2]
    z[3] = s0[3]
    z[4] = 1.0
    z[9] = 1.0
    z[14] = 1.0
    z[19] = 1.0
    acc = [0.0, 0.0, 0.0, 0.0]
    t = 0.0
    h = 1e-4
    div_ref = 0.0
    t_ref = 0.0 if transient <= 0.0 else -1.0
    min_pole = math.inf
    status = 0
    n_seg = int(math.ceil(t_final / renorm_dt - 1e-9))
    for seg in range(1, n_seg + 1):
        target = seg * renorm_dt
        if target > t_final:
            target = t_final
        status, t, h = _advance(
            z, 21, t, target, tol, h,
            alpha, beta, omega, tau1, tau2, field_id, a1, a2, a3, a4,
        )
        if status != 0:
            break
        started = t_ref >= 0.0
        # modified Gram-Schmidt on the four tangent vectors; stretches count
        # only for segments that began inside the measurement window
        for v in range(4):
            base = 4 + 4 * v
            nrm = math.sqrt(
                z[base] * z[base] + z[base + 1] * z[base + 1]
                + z[base + 2] * z[base + 2] + z[base + 3] * z[base + 3]
            )
            if started:
                acc[v] += math.log(nrm)
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
            # the window opens at this boundary; the frame was just reset
            t_ref = t
            div_ref = z[20]
        if t_ref >= 0.0:
            d_plus = math.sqrt(
                z[0] * z[0] + z[1] * z[1] + z[2] * z[2]
                + (z[3] - 1.0) * (z[3] - 1.0)
            )
            d_minus = math.sqrt(
                z[0] * z[0] + z[1] * z[1] + z[2] * z[2]
                + (z[3] + 1.0) * (z[3] + 1.0)
            )
            d = d_plus if d_plus < d_minus else d_minus
            if d < min_pole:
                min_pole = d
    if t_ref < 0.0 or t <= t_ref:
        les = (math.nan, math.nan, math.nan, math.nan)
        return status, t, les, math.nan, min_pole, 0.0
    span = t - t_ref
    les = sorted((a / span for a in acc), reverse=True)
    div_avg = (z[20] - div_ref) / span
    return status, t, tuple(les), div_avg, min_pole, span
