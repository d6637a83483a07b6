"""Jitted inner loops for the solver and the functional quadratures.

Everything here works on plain float64 arrays.  Model functions arrive as
term tables produced by ``basis.as_table`` (columns: coef, power, trig code,
frequency).  The Python-facing modules own all validation; kernels assume
clean inputs.

Only the profile s and its derivative s' are resampled when the shift gamma
moves; every derived quantity (eta(s), Q(s), the weight a and its
derivatives, ...) is evaluated pointwise on the resampled values.  That
keeps the relative quantities eta(u|s), Q(u|s), F(u;s) consistent to
machine precision, so e.g. the weighted relative entropy can never go
negative by interpolation mismatch.
"""

import math

import numpy as np
from numba import njit

# stack rows fed to the shifted sampler
ROW_S, ROW_SPRIME = 0, 1
N_STACK_ROWS = 2

# status codes returned by evolve_chunk
OK, BLOWUP, RADIUS, MONOTONICITY, GAMMA_CAP = 0, 1, 2, 3, 4


@njit(cache=True)
def eval_table(tab, u, out):
    nt = tab.shape[0]
    n = u.shape[0]
    for i in range(n):
        ui = u[i]
        acc = 0.0
        for t in range(nt):
            c = tab[t, 0]
            if c == 0.0:
                continue
            p = int(tab[t, 1])
            m = c
            for _ in range(p):
                m *= ui
            tr = int(tab[t, 2])
            if tr == 1:
                m *= math.sin(tab[t, 3] * ui)
            elif tr == 2:
                m *= math.cos(tab[t, 3] * ui)
            acc += m
        out[i] = acc


@njit(cache=True)
def eval_table_scalar(tab, x):
    acc = 0.0
    for t in range(tab.shape[0]):
        c = tab[t, 0]
        if c == 0.0:
            continue
        p = int(tab[t, 1])
        m = c
        for _ in range(p):
            m *= x
        tr = int(tab[t, 2])
        if tr == 1:
            m *= math.sin(tab[t, 3] * x)
        elif tr == 2:
            m *= math.cos(tab[t, 3] * x)
        acc += m
    return acc


@njit(cache=True)
def rhs_stage(v, dx, qtab, q1tab, e1tab, use_llf, out, qbuf, gbuf, q1buf):
    """Conservative-flux tendency; returns the boundary mass rate.

    out[i] = -(F[i+1/2]-F[i-1/2])/dx + (g[i+1]-2 g[i]+g[i-1])/dx^2 with
    g = eta'(v) and F either the plain central flux or local Lax-Friedrichs
    with alpha the local max of |Q'|.  End tendencies are zero (Dirichlet
    clamp).  The returned scalar is the time derivative of the trapezoid
    mass, which telescopes to pure boundary terms.
    """
    n = v.shape[0]
    eval_table(qtab, v, qbuf)
    eval_table(e1tab, v, gbuf)
    if use_llf:
        eval_table(q1tab, v, q1buf)
    dx2 = dx * dx
    out[0] = 0.0
    out[n - 1] = 0.0
    fprev = 0.5 * (qbuf[0] + qbuf[1])
    if use_llf:
        a0 = abs(q1buf[0])
        a1 = abs(q1buf[1])
        al = a0 if a0 > a1 else a1
        fprev -= 0.5 * al * (v[1] - v[0])
    ffirst = fprev
    for i in range(1, n - 1):
        fcur = 0.5 * (qbuf[i] + qbuf[i + 1])
        if use_llf:
            a0 = abs(q1buf[i])
            a1 = abs(q1buf[i + 1])
            al = a0 if a0 > a1 else a1
            fcur -= 0.5 * al * (v[i + 1] - v[i])
        out[i] = -(fcur - fprev) / dx + (gbuf[i + 1] - 2.0 * gbuf[i] + gbuf[i - 1]) / dx2
        fprev = fcur
    mass_rate = -(fprev - ffirst) + ((gbuf[n - 1] - gbuf[n - 2]) - (gbuf[1] - gbuf[0])) / dx
    return mass_rate


@njit(cache=True)
def rk4_step(u, dx, dt, bcl, bcr, qtab, q1tab, e1tab, use_llf, kbuf, vbuf,
             qbuf, gbuf, q1buf):
    """One explicit RK4 step in place; returns the RK4-weighted mass rate."""
    n = u.shape[0]
    r1 = rhs_stage(u, dx, qtab, q1tab, e1tab, use_llf, kbuf[0], qbuf, gbuf, q1buf)
    for i in range(n):
        vbuf[i] = u[i] + 0.5 * dt * kbuf[0, i]
    vbuf[0] = bcl
    vbuf[n - 1] = bcr
    r2 = rhs_stage(vbuf, dx, qtab, q1tab, e1tab, use_llf, kbuf[1], qbuf, gbuf, q1buf)
    for i in range(n):
        vbuf[i] = u[i] + 0.5 * dt * kbuf[1, i]
    vbuf[0] = bcl
    vbuf[n - 1] = bcr
    r3 = rhs_stage(vbuf, dx, qtab, q1tab, e1tab, use_llf, kbuf[2], qbuf, gbuf, q1buf)
    for i in range(n):
        vbuf[i] = u[i] + dt * kbuf[2, i]
    vbuf[0] = bcl
    vbuf[n - 1] = bcr
    r4 = rhs_stage(vbuf, dx, qtab, q1tab, e1tab, use_llf, kbuf[3], qbuf, gbuf, q1buf)
    for i in range(n):
        u[i] += dt / 6.0 * (kbuf[0, i] + 2.0 * kbuf[1, i] + 2.0 * kbuf[2, i] + kbuf[3, i])
    u[0] = bcl
    u[n - 1] = bcr
    return (r1 + 2.0 * r2 + 2.0 * r3 + r4) / 6.0


@njit(cache=True)
def shift_sample(stack, gamma, dx, out):
    """Sample all stack rows at grid positions x_i + gamma.

    The grid is uniform, so every query point has the same fractional offset;
    cubic Lagrange interpolation then reduces to four shifted copies with
    scalar weights.  Indices are clamped: the profile rows are constant to
    machine precision in the tails.
    """
    m, n = stack.shape
    p = gamma / dx
    kf = math.floor(p)
    th = p - kf
    k = int(kf)
    w0 = -th * (th - 1.0) * (th - 2.0) / 6.0
    w1 = (th * th - 1.0) * (th - 2.0) / 2.0
    w2 = -th * (th + 1.0) * (th - 2.0) / 2.0
    w3 = th * (th * th - 1.0) / 6.0
    for r in range(m):
        for i in range(n):
            b = i + k - 1
            j0 = 0 if b < 0 else (n - 1 if b > n - 1 else b)
            b += 1
            j1 = 0 if b < 0 else (n - 1 if b > n - 1 else b)
            b += 1
            j2 = 0 if b < 0 else (n - 1 if b > n - 1 else b)
            b += 1
            j3 = 0 if b < 0 else (n - 1 if b > n - 1 else b)
            out[r, i] = (w0 * stack[r, j0] + w1 * stack[r, j1]
                         + w2 * stack[r, j2] + w3 * stack[r, j3])


@njit(cache=True)
def _eval_sides(u, sv, etab, e1tab, e2tab, qtab, q1tab, gtab, ubuf, sbuf, wbuf):
    """Fill the u-side rows (eta, eta', Q, G of u) and the s-side rows
    (eta, eta', eta'', Q, Q', G of the shifted profile) plus w = eta'(u)-eta'(s)."""
    eval_table(etab, u, ubuf[0])
    eval_table(e1tab, u, ubuf[1])
    eval_table(qtab, u, ubuf[2])
    eval_table(gtab, u, ubuf[3])
    eval_table(etab, sv, sbuf[0])
    eval_table(e1tab, sv, sbuf[1])
    eval_table(e2tab, sv, sbuf[2])
    eval_table(qtab, sv, sbuf[3])
    eval_table(q1tab, sv, sbuf[4])
    eval_table(gtab, sv, sbuf[5])
    n = u.shape[0]
    for i in range(n):
        wbuf[i] = ubuf[1, i] - sbuf[1, i]


@njit(cache=True)
def functionals_x(u, sh, dx, lam_eps,
                  etab, e1tab, e2tab, qtab, q1tab, gtab, ubuf, sbuf, wbuf):
    """Weighted relative entropy E and the x-space Y, B, D, plus int w^2 dy.

    With the weight a = 1 - (lam/eps) eta'(s) and w = eta'(u) - eta'(s):

        E = int a eta(u|s)
        Y = int a' eta(u|s) - int a s' eta''(s)(u - s)
        D = int a |dx w|^2
        B = int a' F(u;s) - int a eta''(s) s' Q(u|s) + int a''/2 w^2
            + int a eta'(u|s) dxQ(s)

    a' = -(lam/eps) eta''(s) s' and a'' = -(lam/eps) Q'(s) s' are analytic.
    """
    n = u.shape[0]
    sv = sh[ROW_S]
    _eval_sides(u, sv, etab, e1tab, e2tab, qtab, q1tab, gtab, ubuf, sbuf, wbuf)
    E = 0.0
    Y = 0.0
    B = 0.0
    D = 0.0
    wl2 = 0.0
    for i in range(n):
        wt = dx if 0 < i < n - 1 else 0.5 * dx
        sp = sh[ROW_SPRIME, i]
        y = sbuf[1, i]
        e2 = sbuf[2, i]
        q1s = sbuf[4, i]
        a = 1.0 - lam_eps * y
        a1 = -lam_eps * e2 * sp
        a2 = -lam_eps * q1s * sp
        du = u[i] - sv[i]
        w = wbuf[i]
        erel = ubuf[0, i] - sbuf[0, i] - y * du
        qrel = ubuf[2, i] - sbuf[3, i] - q1s * du
        e1rel = w - e2 * du
        frel = ubuf[3, i] - sbuf[5, i] - y * (ubuf[2, i] - sbuf[3, i])
        if i == 0:
            dxw = (wbuf[1] - wbuf[0]) / dx
        elif i == n - 1:
            dxw = (wbuf[n - 1] - wbuf[n - 2]) / dx
        else:
            dxw = (wbuf[i + 1] - wbuf[i - 1]) / (2.0 * dx)
        E += wt * a * erel
        Y += wt * (a1 * erel - a * sp * e2 * du)
        B += wt * (a1 * frel - a * e2 * sp * qrel + 0.5 * a2 * w * w
                   + a * e1rel * q1s * sp)
        D += wt * a * dxw * dxw
        wl2 += wt * w * w * (-e2 * sp)
    return E, Y, B, D, wl2


@njit(cache=True)
def functionals_y(u, sh, dx, lam_eps,
                  etab, e1tab, e2tab, qtab, q1tab, gtab, ubuf, sbuf, wbuf):
    """Entropic-variable forms of Y, B, D plus int w^2 dy.

    Integrals in y = eta'(s) are evaluated as x-integrals with the
    change-of-variables weight dy = -eta''(s) s' dx (no resampling):

        Y = lam/eps int eta(u|s) dy + int a (u-s) dy
        D = -int a eta''(s) s' |dy w|^2 dy
        B = lam/eps int F(u;s) dy + int a Q(u|s) dy
            + lam/eps int Q'(s)/(2 eta''(s)) w^2 dy
            - int a Q'(s)/eta''(s) eta'(u|s) dy
    """
    n = u.shape[0]
    sv = sh[ROW_S]
    _eval_sides(u, sv, etab, e1tab, e2tab, qtab, q1tab, gtab, ubuf, sbuf, wbuf)
    Y = 0.0
    B = 0.0
    D = 0.0
    wl2 = 0.0
    for i in range(n):
        wt = dx if 0 < i < n - 1 else 0.5 * dx
        sp = sh[ROW_SPRIME, i]
        y = sbuf[1, i]
        e2 = sbuf[2, i]
        q1s = sbuf[4, i]
        a = 1.0 - lam_eps * y
        du = u[i] - sv[i]
        w = wbuf[i]
        erel = ubuf[0, i] - sbuf[0, i] - y * du
        qrel = ubuf[2, i] - sbuf[3, i] - q1s * du
        e1rel = w - e2 * du
        frel = ubuf[3, i] - sbuf[5, i] - y * (ubuf[2, i] - sbuf[3, i])
        if i == 0:
            dxw = (wbuf[1] - wbuf[0]) / dx
        elif i == n - 1:
            dxw = (wbuf[n - 1] - wbuf[n - 2]) / dx
        else:
            dxw = (wbuf[i + 1] - wbuf[i - 1]) / (2.0 * dx)
        dyx = e2 * sp            # dy/dx, negative inside the shock
        dyw = -dyx               # quadrature weight, positive
        Y += wt * dyw * (lam_eps * erel + a * du)
        B += wt * dyw * (lam_eps * frel + a * qrel
                         + lam_eps * q1s / (2.0 * e2) * w * w
                         - a * q1s / e2 * e1rel)
        # |dy w|^2 dy with dy w = dx w / (dy/dx); the dyx factors cancel
        # analytically, the mask only guards the flat tails where dyx
        # underflows to zero.
        if abs(dyx) > 1e-280:
            dyw_deriv = dxw / dyx
            D += wt * (-a * dyx * dyw_deriv * dyw_deriv) * dyw
        wl2 += wt * w * w * dyw
    return Y, B, D, wl2


@njit(cache=True)
def gamma_rate(Y, B, D, eps_sq, eps1):
    """Right-hand side of the shift ODE.

    gdot = Phi_eps(Y) * ((2|B| - (1-eps1) D)_+ / eps^2 + 1) with Phi_eps the
    piecewise-linear odd clamp; the sign opposes Y.
    """
    phi = -Y / eps_sq
    if phi > 1.0:
        phi = 1.0
    elif phi < -1.0:
        phi = -1.0
    pos = 2.0 * abs(B) - (1.0 - eps1) * D
    if pos < 0.0:
        pos = 0.0
    return phi * (pos / eps_sq + 1.0)


@njit(cache=True)
def evolve_chunk(u, dx, dt, nsteps, stack, sh, lam_eps,
                 etab, e1tab, e2tab, qtab, q1tab, gtab, use_llf,
                 bcl, bcr, eps, eps0, rmax,
                 slack_coeff, scale_floor, gamma_cap,
                 state, kbuf, vbuf, qbuf, gbuf, q1buf, ubuf, sbuf, wbuf):
    """Advance the coupled PDE + shift system by nsteps.

    PDE stages use RK4; the shift gamma advances by explicit Euler sub-steps
    with its rate evaluated at the stage-1 and stage-3 states.  Every step is
    checked for blow-up, radius violations, the per-step entropy contraction
    (with the frozen discretization slack), and the shift-rate cap.

    state (in/out, float64[12]):
        0 gamma        4 E_prev        8 worst_slack
        1 t            5 D_prev        9 worst_case_gap
        2 have_prev    6 max_gdot     10 last_gdot
        3 unused       7 steps_done   11 unused
    Returns a status code (OK on success).
    """
    n = u.shape[0]
    gamma = state[0]
    t = state[1]
    have_prev = state[2] != 0.0
    E_prev = state[4]
    D_prev = state[5]
    max_gdot = state[6]
    worst_slack = state[8]
    worst_gap = state[9]
    eps_sq = eps * eps
    dxdt2 = dt * dt + dx * dx
    status = OK
    done = 0
    for it in range(nsteps):
        shift_sample(stack, gamma, dx, sh)
        E1, Y1, B1, D1, wl2 = functionals_x(u, sh, dx, lam_eps, etab, e1tab,
                                            e2tab, qtab, q1tab, gtab,
                                            ubuf, sbuf, wbuf)
        if have_prev:
            scale = (E1 if E1 > E_prev else E_prev) + scale_floor
            slack = (E1 - E_prev + eps0 * D_prev * dt) / (dxdt2 * scale)
            if slack > worst_slack:
                worst_slack = slack
            if slack > slack_coeff:
                status = MONOTONICITY
                break
        gd1 = gamma_rate(Y1, B1, D1, eps_sq, eps0)
        if abs(Y1) >= eps_sq:
            gap = gd1 * Y1 + B1 - D1 + eps0 * D1
            if gap > worst_gap:
                worst_gap = gap
        if abs(gd1) > max_gdot:
            max_gdot = abs(gd1)
        if abs(gd1) > gamma_cap:
            status = GAMMA_CAP
            break
        gamma_half = gamma + 0.5 * dt * gd1

        rhs_stage(u, dx, qtab, q1tab, e1tab, use_llf, kbuf[0], qbuf, gbuf, q1buf)
        for i in range(n):
            vbuf[i] = u[i] + 0.5 * dt * kbuf[0, i]
        vbuf[0] = bcl
        vbuf[n - 1] = bcr
        rhs_stage(vbuf, dx, qtab, q1tab, e1tab, use_llf, kbuf[1], qbuf, gbuf, q1buf)
        for i in range(n):
            vbuf[i] = u[i] + 0.5 * dt * kbuf[1, i]
        vbuf[0] = bcl
        vbuf[n - 1] = bcr

        shift_sample(stack, gamma_half, dx, sh)
        E3, Y3, B3, D3, _ = functionals_x(vbuf, sh, dx, lam_eps, etab, e1tab,
                                          e2tab, qtab, q1tab, gtab,
                                          ubuf, sbuf, wbuf)
        gd3 = gamma_rate(Y3, B3, D3, eps_sq, eps0)
        if abs(gd3) > max_gdot:
            max_gdot = abs(gd3)
        if abs(gd3) > gamma_cap:
            status = GAMMA_CAP
            break
        gamma_new = gamma_half + 0.5 * dt * gd3

        rhs_stage(vbuf, dx, qtab, q1tab, e1tab, use_llf, kbuf[2], qbuf, gbuf, q1buf)
        for i in range(n):
            vbuf[i] = u[i] + dt * kbuf[2, i]
        vbuf[0] = bcl
        vbuf[n - 1] = bcr
        rhs_stage(vbuf, dx, qtab, q1tab, e1tab, use_llf, kbuf[3], qbuf, gbuf, q1buf)
        for i in range(n):
            u[i] += dt / 6.0 * (kbuf[0, i] + 2.0 * kbuf[1, i] + 2.0 * kbuf[2, i] + kbuf[3, i])
        u[0] = bcl
        u[n - 1] = bcr

        umax = 0.0
        finite = True
        for i in range(n):
            au = abs(u[i])
            if au > umax:
                umax = au
            if not math.isfinite(u[i]):
                finite = False
        if not finite:
            status = BLOWUP
            break
        if umax >= rmax:
            status = RADIUS
            break

        gamma = gamma_new
        t += dt
        state[10] = gd1
        E_prev = E1
        D_prev = D1
        have_prev = True
        done += 1

    state[0] = gamma
    state[1] = t
    state[2] = 1.0 if have_prev else 0.0
    state[4] = E_prev
    state[5] = D_prev
    state[6] = max_gdot
    state[7] += float(done)
    state[8] = worst_slack
    state[9] = worst_gap
    return status
