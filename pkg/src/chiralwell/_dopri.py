"""Compiled Dormand-Prince 8(5,3) core shared by every time integration.

State buffers hold up to four reals: ``[z, theta]`` in the reduced chart
(mode 0) or ``[Re a_R, Im a_R, Re a_L, Im a_L]`` in the amplitude chart
(mode 1). A reduced run may detour through the amplitude chart near the
poles and come back.

Parameter vector layout: ``[omega, capital_omega, eps_c2, eta_c2, mu, zeta, drive]``.
"""

import math

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _coef

OK = 0
POLE = 1
MAX_STEPS = 2
STOPPED = 3
UNDERFLOW = 4

PHASE = 0
AMPLITUDE = 1

# Dormand-Prince 8(5,3) tableau, error weights and 7th-order interpolant.
A = _coef.A
B = _coef.B
C = _coef.C
D = _coef.D
E3 = _coef.E3
E5 = _coef.E5
NS = _coef.N_STAGES
NSX = _coef.N_STAGES_EXTENDED

SWITCH_IN = 1e-6
SWITCH_OUT = 1e-3
POLE_GUARD = 1e-9


@njit(cache=True, nogil=True, error_model="numpy")
def wrap(x):
    w = x - 2.0 * math.pi * math.floor((x + math.pi) / (2.0 * math.pi))
    if w <= -math.pi:
        w += 2.0 * math.pi
    elif w > math.pi:
        w -= 2.0 * math.pi
    return w


@njit(cache=True, nogil=True, error_model="numpy")
def rhs(mode, y, p, out):
    omega = p[0]
    drive = p[6]
    if mode == PHASE:
        z = y[0]
        th = y[1]
        s = math.sqrt(1.0 - z * z) if z * z <= 1.0 else math.nan
        sn = math.sin(th)
        cs = math.cos(th)
        zeta = p[5]
        out[0] = omega * 2.0 * s * (sn - zeta * z * cs)
        out[1] = omega * (-2.0 * z / s * (cs + zeta * z * sn) + 2.0 * p[4] * z) + drive
    else:
        xr, yr, xl, yl = y[0], y[1], y[2], y[3]
        z = (xr * xr - xl * xl) + (yr * yr - yl * yl)  # paired: exact zero for a_R == a_L
        big_w = p[1]
        nl = p[2] * z
        diss = p[3] * z
        hd = 0.5 * drive
        # i da_R = (W + nl - hd) a_R - omega a_L + i diss a_L, likewise for a_L.
        gr = big_w + nl - hd
        gl = big_w - nl + hd
        re_r = gr * xr - omega * xl - diss * yl
        im_r = gr * yr - omega * yl + diss * xl
        re_l = gl * xl - omega * xr + diss * yr
        im_l = gl * yl - omega * yr - diss * xr
        # da = -i * (re + i im) = im - i re
        out[0] = im_r
        out[1] = -re_r
        out[2] = im_l
        out[3] = -re_l


@njit(cache=True, nogil=True, error_model="numpy")
def _z_of(mode, y):
    if mode == PHASE:
        return y[0]
    return (y[0] * y[0] - y[2] * y[2]) + (y[1] * y[1] - y[3] * y[3])


@njit(cache=True, nogil=True, error_model="numpy")
def _theta_of_amp(y):
    # arg(a_R conj(a_L))
    re = y[0] * y[2] + y[1] * y[3]
    im = y[1] * y[2] - y[0] * y[3]
    return math.atan2(im, re)


@njit(cache=True, nogil=True, error_model="numpy")
def _stages(mode, y, h, p, K, n, ytmp, ynew):
    """Fill ``K[1:NS]``, ``ynew`` and ``K[NS] = f(ynew)``; ``K[0]`` must hold ``f(y)``."""
    for s in range(1, NS):
        for i in range(n):
            acc = 0.0
            for j in range(s):
                acc += A[s, j] * K[j, i]
            ytmp[i] = y[i] + h * acc
        rhs(mode, ytmp, p, K[s])
    for i in range(n):
        acc = 0.0
        for j in range(NS):
            acc += B[j] * K[j, i]
        ynew[i] = y[i] + h * acc
    rhs(mode, ynew, p, K[NS])


@njit(cache=True, nogil=True, error_model="numpy")
def _error_norm(mode, y, ynew, h, K, n, rtol, atol, omega):
    """Local error relative to tolerance, per unit of dimensionless time ``omega h``."""
    e5 = 0.0
    e3 = 0.0
    for i in range(n):
        a5 = 0.0
        a3 = 0.0
        for j in range(NS + 1):
            a5 += E5[j] * K[j, i]
            a3 += E3[j] * K[j, i]
        if mode == PHASE and i == 1:
            # theta grows without bound while beating; scale it by its period
            sc = atol + rtol
        else:
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        e5 += (a5 / sc) ** 2
        e3 += (a3 / sc) ** 2
    if e5 == 0.0 and e3 == 0.0:
        return 0.0
    return abs(h) * e5 / math.sqrt((e5 + 0.01 * e3) * n) / min(1.0, omega * abs(h))


@njit(cache=True, nogil=True, error_model="numpy")
def _prepare_dense(mode, y, ynew, h, p, K, n, ytmp, F):
    for s in range(NS + 1, NSX):
        for i in range(n):
            acc = 0.0
            for j in range(s):
                acc += A[s, j] * K[j, i]
            ytmp[i] = y[i] + h * acc
        rhs(mode, ytmp, p, K[s])
    for i in range(n):
        dy = ynew[i] - y[i]
        F[0, i] = dy
        F[1, i] = h * K[0, i] - dy
        F[2, i] = 2.0 * dy - h * (K[NS, i] + K[0, i])
        for r in range(4):
            acc = 0.0
            for j in range(NSX):
                acc += D[r, j] * K[j, i]
            F[3 + r, i] = h * acc


@njit(cache=True, nogil=True, error_model="numpy")
def _dense(y, F, n, x, out):
    for i in range(n):
        acc = 0.0
        for r in range(6, -1, -1):
            acc += F[r, i]
            if (6 - r) % 2 == 0:
                acc *= x
            else:
                acc *= 1.0 - x
        out[i] = y[i] + acc


@njit(cache=True, nogil=True, error_model="numpy")
def _emit(mode, y, theta_ref, row):
    """Write ``[z, theta, charge, Re a_R, Im a_R, Re a_L, Im a_L]`` for state y."""
    if mode == PHASE:
        row[0] = y[0]
        row[1] = y[1]
        row[2] = 1.0
        for i in range(3, 7):
            row[i] = math.nan
    else:
        row[0] = _z_of(mode, y)
        row[1] = theta_ref + wrap(_theta_of_amp(y) - theta_ref)
        row[2] = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]
        for i in range(4):
            row[3 + i] = y[i]


@njit(cache=True, nogil=True, error_model="numpy")
def _to_amp(z, th, y):
    ar = math.sqrt(0.5 * (1.0 + z)) if z > -1.0 else 0.0
    al = math.sqrt(0.5 * (1.0 - z)) if z < 1.0 else 0.0
    y[0] = ar * math.cos(0.5 * th)
    y[1] = ar * math.sin(0.5 * th)
    y[2] = al * math.cos(-0.5 * th)
    y[3] = al * math.sin(-0.5 * th)


@njit(cache=True, nogil=True, error_model="numpy")
def _kick(mode, y, dth):
    """Shift the relative phase by ``dth``; populations are untouched."""
    if mode == PHASE:
        y[1] += dth
    else:
        cr = math.cos(0.5 * dth)
        sr = math.sin(0.5 * dth)
        xr, yr, xl, yl = y[0], y[1], y[2], y[3]
        y[0] = xr * cr - yr * sr
        y[1] = xr * sr + yr * cr
        y[2] = xl * cr + yl * sr
        y[3] = -xl * sr + yl * cr


@njit(cache=True, nogil=True, error_model="numpy")
def integrate(mode0, y0, t0, t_end, p, rtol, atol, fixed_h, sample_times,
              kick_times, kick_dtheta, allow_switch, stop_points, stop_tol,
              max_steps, h_max, crossing_tol):
    """Integrate from ``t0`` to ``t_end``.

    ``fixed_h > 0`` selects fixed steps; otherwise steps are adapted to
    ``rtol``/``atol``. Kicks shift the relative phase at ``kick_times``.
    The run stops early once within ``stop_tol`` (max-norm on z and wrapped
    theta) of any row of ``stop_points``.

    Returns ``(samples, n_filled, status, n_cross, first_cross, t, y, mode,
    theta, n_steps, n_rejected, stop_index)``.
    """
    ns = sample_times.shape[0]
    samples = np.full((ns, 7), np.nan)
    y = np.zeros(4)
    ynew = np.zeros(4)
    ytmp = np.zeros(4)
    ydense = np.zeros(4)
    K = np.zeros((NSX, 4))
    F = np.zeros((7, 4))
    row = np.zeros(7)
    mode = mode0
    for i in range(4):
        y[i] = y0[i]
    detour = False
    theta0 = 0.0
    if mode == PHASE and allow_switch and abs(y[0]) > 1.0 - SWITCH_IN:
        theta0 = y[1]
        _to_amp(y[0], y[1], y)
        mode = AMPLITUDE
        detour = True
    n = 2 if mode == PHASE else 4
    if detour:
        theta_ref = theta0
    else:
        theta_ref = y[1] if mode == PHASE else _theta_of_amp(y)

    t = t0
    k_next = 0
    s_next = 0
    n_steps = 0
    n_rej = 0
    n_cross = 0
    first_cross = math.nan
    status = OK
    stop_index = -1

    z0 = _z_of(mode, y)
    last_sign = 0.0
    if z0 > 0.0:
        last_sign = 1.0
    elif z0 < 0.0:
        last_sign = -1.0

    while s_next < ns and sample_times[s_next] <= t:
        _emit(mode, y, theta_ref, row)
        samples[s_next, :] = row
        s_next += 1

    adaptive = fixed_h <= 0.0
    if adaptive:
        h = min(1e-3 * math.pi / p[0], h_max)
    else:
        h = fixed_h
    rhs(mode, y, p, K[0])
    rejected_last = False

    while t < t_end:
        # kicks due at the current time
        while k_next < kick_times.shape[0] and kick_times[k_next] <= t:
            _kick(mode, y, kick_dtheta[k_next])
            theta_ref += kick_dtheta[k_next]
            k_next += 1
            rhs(mode, y, p, K[0])

        if n_steps >= max_steps:
            status = MAX_STEPS
            break

        t_target = t_end
        if k_next < kick_times.shape[0] and kick_times[k_next] < t_target:
            t_target = kick_times[k_next]
        clamped = t_target - t <= h * (1.0 + 1e-12)
        step = t_target - t if clamped else h

        _stages(mode, y, step, p, K, n, ytmp, ynew)

        finite = True
        for i in range(n):
            if not math.isfinite(ynew[i]) or not math.isfinite(K[NS, i]):
                finite = False

        if adaptive:
            err = _error_norm(mode, y, ynew, step, K, n, rtol, atol, p[0]) if finite else math.inf
            if err > 1.0:
                n_rej += 1
                if mode == PHASE and allow_switch and abs(y[0]) > 1.0 - SWITCH_OUT:
                    theta_ref = y[1]
                    _to_amp(y[0], y[1], ytmp)
                    for i in range(4):
                        y[i] = ytmp[i]
                    mode = AMPLITUDE
                    n = 4
                    detour = True
                    rhs(mode, y, p, K[0])
                    continue
                fac = 0.2 if not math.isfinite(err) else max(0.2, 0.9 * err ** (-1.0 / 7.0))
                h = step * fac
                rejected_last = True
                if h < 1e-14 * max(1.0, abs(t)):
                    status = POLE if (mode == PHASE and abs(y[0]) > 1.0 - SWITCH_OUT) else UNDERFLOW
                    break
                continue
        elif not finite:
            if mode == PHASE and allow_switch:
                # a fixed step overshot the pole; redo it in the regular chart
                theta_ref = y[1]
                _to_amp(y[0], y[1], ytmp)
                for i in range(4):
                    y[i] = ytmp[i]
                mode = AMPLITUDE
                n = 4
                detour = True
                rhs(mode, y, p, K[0])
                continue
            status = POLE if mode == PHASE else UNDERFLOW
            break

        # accepted step: samples in (t, t + step]
        t_new = t_target if clamped else t + step
        dense_ready = False
        while s_next < ns and sample_times[s_next] <= t_new:
            if not dense_ready:
                _prepare_dense(mode, y, ynew, step, p, K, n, ytmp, F)
                dense_ready = True
            x = (sample_times[s_next] - t) / step
            _dense(y, F, n, x, ydense)
            _emit(mode, ydense, theta_ref, row)
            samples[s_next, :] = row
            s_next += 1

        z_new = _z_of(mode, ynew)
        if last_sign != 0.0 and z_new * last_sign < 0.0:
            n_cross += 1
            if n_cross == 1:
                if not dense_ready:
                    _prepare_dense(mode, y, ynew, step, p, K, n, ytmp, F)
                    dense_ready = True
                lo = 0.0
                hi = 1.0
                while (hi - lo) * step > crossing_tol:
                    mid = 0.5 * (lo + hi)
                    _dense(y, F, n, mid, ydense)
                    if _z_of(mode, ydense) * last_sign > 0.0:
                        lo = mid
                    else:
                        hi = mid
                first_cross = t + hi * step
        if z_new > 0.0:
            last_sign = 1.0
        elif z_new < 0.0:
            last_sign = -1.0

        t = t_new
        for i in range(n):
            y[i] = ynew[i]
            K[0, i] = K[NS, i]
        n_steps += 1
        if mode == AMPLITUDE:
            theta_ref = theta_ref + wrap(_theta_of_amp(y) - theta_ref)
        else:
            theta_ref = y[1]

        if adaptive:
            if err == 0.0:
                fac = 10.0
            else:
                fac = min(10.0, 0.9 * err ** (-1.0 / 7.0))
            if rejected_last:
                fac = min(fac, 1.0)
            rejected_last = False
            if not clamped or step >= h:
                h = min(step * fac, h_max)

        # chart switching
        if mode == PHASE and abs(y[0]) > 1.0 - SWITCH_IN:
            if allow_switch:
                _to_amp(y[0], y[1], ytmp)
                for i in range(4):
                    y[i] = ytmp[i]
                mode = AMPLITUDE
                n = 4
                detour = True
                rhs(mode, y, p, K[0])
            elif abs(y[0]) >= 1.0 - POLE_GUARD:
                status = POLE
                break
        elif detour and abs(_z_of(mode, y)) < 1.0 - SWITCH_OUT:
            zz = _z_of(mode, y)
            y[0] = zz
            y[1] = theta_ref
            y[2] = 0.0
            y[3] = 0.0
            mode = PHASE
            n = 2
            detour = False
            rhs(mode, y, p, K[0])

        if stop_points.shape[0] > 0:
            zz = _z_of(mode, y)
            th = wrap(theta_ref)
            for q in range(stop_points.shape[0]):
                if abs(zz - stop_points[q, 0]) < stop_tol and abs(wrap(th - stop_points[q, 1])) < stop_tol:
                    stop_index = q
                    break
            if stop_index >= 0:
                status = STOPPED
                break

    # kicks scheduled exactly at t_end still apply
    while status == OK and k_next < kick_times.shape[0] and kick_times[k_next] <= t:
        _kick(mode, y, kick_dtheta[k_next])
        theta_ref += kick_dtheta[k_next]
        k_next += 1

    return (samples, s_next, status, n_cross, first_cross, t, y, mode,
            theta_ref, n_steps, n_rej, stop_index)
