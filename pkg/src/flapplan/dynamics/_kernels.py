"""Compiled right-hand side and fixed-step RK4 integrator.

Everything here works on flat float64 arrays so numba can compile it in
nopython mode. The public, typed wrappers live in :mod:`flapplan.dynamics.model`
and :mod:`flapplan.dynamics.aero`.

Parameter vector layout (see ``VehicleParams.as_array``)::

    0 M_nd   1 Lambda  2 L_nd   3 R_HL   4 chi    5 C_D0   6 C_D0t
    7 AR     8 AR_t    9 Li    10 eps   11 h0    12 lw    13 lt
   14 stall_wing [rad]  15 stall_tail [rad]  16 aero switch (1 on, 0 off)

State layout: x, z, u, w, theta, q (all nondimensional).
"""

import math

import numpy as np
from numba import njit

N_PARAMS = 17
AERO_SWITCH = 16

ALPHA_DOT_CONSISTENT = 0
ALPHA_DOT_LAGGED = 1

# status codes returned by the integrators
OK = 0
DIVERGED = 1
DEGENERATE = 2

_TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _clamp(value, limit):
    if value > limit:
        return limit
    if value < -limit:
        return -limit
    return value


@njit(cache=True)
def theodorsen_lookup(table, k):
    """Linear interpolation of tabulated (F, G, F1, G1) in s = k / (1 + k)."""
    s = k / (1.0 + k)
    n = table.shape[1]
    pos = s * (n - 1)
    i = int(pos)
    if i >= n - 1:
        return table[0, n - 1], table[1, n - 1], table[2, n - 1], table[3, n - 1]
    frac = pos - i
    F = table[0, i] + frac * (table[0, i + 1] - table[0, i])
    G = table[1, i] + frac * (table[1, i + 1] - table[1, i])
    F1 = table[2, i] + frac * (table[2, i + 1] - table[2, i])
    G1 = table[3, i] + frac * (table[3, i + 1] - table[3, i])
    return F, G, F1, G1


@njit(cache=True)
def glide_lift(alpha, alpha_dot, q, Ub, P):
    ar = P[7]
    angle = alpha + (1.5 * alpha_dot - P[12] * q) / Ub
    angle = _clamp(angle, P[14])
    return _TWO_PI * angle * ar / (ar + 2.0)


@njit(cache=True)
def flap_lift_thrust(alpha, f_nd, t, Ub, P, F, G, F1, G1):
    """Flapping lift and thrust for given Theodorsen values.

    The added-mass term is folded into an equivalent angle so that the stall
    clamp acts on the whole lift expression.
    """
    ar = P[7]
    h0 = P[11]
    k = _TWO_PI * f_nd / Ub
    phase = _TWO_PI * f_nd * t
    c = math.cos(phase)
    s = math.sin(phase)
    kh = k * h0
    circ = ar / (ar + 2.0)
    added = ar / (ar + 1.0)
    angle = kh * (G * c + F * s) + alpha + 0.5 * k * k * h0 * c * added / circ
    angle = _clamp(angle, P[14])
    CL = _TWO_PI * angle * circ
    CT = 4.0 * kh * kh * s * (F1 * c - G1 * s) * circ - alpha * CL
    return CL, CT


@njit(cache=True)
def tail_lift(alpha, delta, alpha_dot, q, Ub, P):
    angle = (1.0 - P[10]) * alpha + delta + (1.5 * alpha_dot - P[13] * q) / Ub
    angle = _clamp(angle, P[15])
    return 0.5 * math.pi * P[8] * angle


@njit(cache=True)
def coefficients(y, delta, f_nd, t, alpha_dot, P, table):
    """Return (C_L, C_T, C_D, C_Lt, C_Dt, alpha, U_b)."""
    u = y[2]
    w = y[3]
    q = y[5]
    Ub = math.sqrt(u * u + w * w)
    alpha = math.atan2(w, u)
    if P[AERO_SWITCH] == 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0, alpha, Ub
    if f_nd > 0.0:
        k = _TWO_PI * f_nd / Ub
        F, G, F1, G1 = theodorsen_lookup(table, k)
        CL, CT = flap_lift_thrust(alpha, f_nd, t, Ub, P, F, G, F1, G1)
    else:
        CL = glide_lift(alpha, alpha_dot, q, Ub, P)
        CT = 0.0
    CLt = tail_lift(alpha, delta, alpha_dot, q, Ub, P)
    CD = P[5] + CL * CL / (math.pi * P[7])
    CDt = P[6] + CLt * CLt / (math.pi * P[8])
    return CL, CT, CD, CLt, CDt, alpha, Ub


@njit(cache=True)
def derivative(y, delta, f_nd, t, alpha_dot, P, table, out):
    """Write dy/dt into ``out``; returns alpha for the finite-difference lag."""
    CL, CT, CD, CLt, CDt, alpha, Ub = coefficients(y, delta, f_nd, t, alpha_dot, P, table)
    u = y[2]
    w = y[3]
    theta = y[4]
    q = y[5]
    M2 = 2.0 * P[0]
    lam = P[1]
    ca = math.cos(alpha)
    sa = math.sin(alpha)
    ct = math.cos(theta)
    st = math.sin(theta)
    U2 = Ub * Ub
    lift = CL + lam * CLt
    if P[AERO_SWITCH] == 0.0:
        axial = 0.0
    else:
        axial = CT - CD - P[9] - lam * CDt
    out[0] = u * ct + w * st
    out[1] = -u * st + w * ct
    out[2] = (U2 * (lift * sa + axial * ca) - st) / M2 - q * w
    out[3] = (U2 * (-lift * ca + axial * sa) + ct) / M2 + q * u
    net = CT - CD
    moment = (CL * ca - net * sa
              + P[2] * lam * (CLt * ca + CDt * sa)
              - P[3] * (CL * sa + net * ca))
    out[5] = P[4] * U2 * moment
    out[4] = q
    return alpha


@njit(cache=True)
def consistent_alpha_dot(y, delta, f_nd, t, P, table, guess, work):
    """Solve a = (u*dw/dt - w*du/dt)/U_b^2 where the rates depend on a.

    Secant iteration; the map is piecewise linear with slope magnitude well
    below one, so two or three steps reach machine precision.
    """
    u = y[2]
    w = y[3]
    U2 = u * u + w * w
    a0 = guess
    derivative(y, delta, f_nd, t, a0, P, table, work)
    r0 = a0 - (u * work[3] - w * work[2]) / U2
    if r0 == 0.0:
        return a0
    a1 = a0 - r0
    for _ in range(30):
        derivative(y, delta, f_nd, t, a1, P, table, work)
        r1 = a1 - (u * work[3] - w * work[2]) / U2
        if r1 == 0.0 or abs(r1) <= 1e-15 * (1.0 + abs(a1)):
            return a1
        denom = r1 - r0
        if denom == 0.0:
            return a1
        a2 = a1 - r1 * (a1 - a0) / denom
        a0 = a1
        r0 = r1
        a1 = a2
    return a1


@njit(cache=True)
def _stage(y, delta, f_nd, t, adot_mode, adot_lag, P, table, out, work):
    if adot_mode == ALPHA_DOT_CONSISTENT:
        a = consistent_alpha_dot(y, delta, f_nd, t, P, table, adot_lag, work)
    else:
        a = adot_lag
    derivative(y, delta, f_nd, t, a, P, table, out)
    return a


@njit(cache=True)
def _finite(y):
    for i in range(y.shape[0]):
        if not math.isfinite(y[i]):
            return False
    return True


@njit(cache=True)
def rk4_segment(y0, delta, f_nd, duration, n_sub, P, table, adot_mode, record):
    """Integrate one maneuver. Returns (final state, status, history).

    ``history`` holds every substep state when ``record`` is true, otherwise
    only the final one.
    """
    h = duration / n_sub
    y = y0.copy()
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    tmp = np.empty(6)
    work = np.empty(6)
    if record:
        hist = np.empty((n_sub + 1, 6))
        hist[0] = y
    else:
        hist = np.empty((1, 6))
    adot = 0.0
    alpha_prev = math.atan2(y[3], y[2])
    status = OK
    for n in range(n_sub):
        if y[2] == 0.0 and y[3] == 0.0:
            status = DEGENERATE
            break
        t = n * h
        a = _stage(y, delta, f_nd, t, adot_mode, adot, P, table, k1, work)
        for i in range(6):
            tmp[i] = y[i] + 0.5 * h * k1[i]
        _stage(tmp, delta, f_nd, t + 0.5 * h, adot_mode, a, P, table, k2, work)
        for i in range(6):
            tmp[i] = y[i] + 0.5 * h * k2[i]
        _stage(tmp, delta, f_nd, t + 0.5 * h, adot_mode, a, P, table, k3, work)
        for i in range(6):
            tmp[i] = y[i] + h * k3[i]
        _stage(tmp, delta, f_nd, t + h, adot_mode, a, P, table, k4, work)
        for i in range(6):
            y[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if not _finite(y):
            status = DIVERGED
            break
        alpha = math.atan2(y[3], y[2])
        if adot_mode == ALPHA_DOT_LAGGED:
            adot = (alpha - alpha_prev) / h
        else:
            # warm start for the next secant solve
            adot = a
        alpha_prev = alpha
        if record:
            hist[n + 1] = y
    if not record:
        hist[0] = y
    return y, status, hist


@njit(cache=True)
def rk4_batch(Y0, deltas, f_nds, durations, n_subs, P, table, adot_mode):
    n = Y0.shape[0]
    out = np.empty((n, 6))
    status = np.empty(n, dtype=np.int64)
    for j in range(n):
        y, st, _ = rk4_segment(Y0[j], deltas[j], f_nds[j], durations[j], n_subs[j],
                               P, table, adot_mode, False)
        out[j] = y
        status[j] = st
    return out, status
