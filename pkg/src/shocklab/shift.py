"""The shift ODE gamma-dot = Phi_eps(Y) ((2|B| - (1-eps0) D)_+ / eps^2 + 1)
and the coupled PDE + shift evolution.

The shift never feeds back into the PDE (the equation is autonomous); it
tracks the shock so that the weighted relative entropy measured in the
shifted frame is nonincreasing.  PDE stages use RK4, gamma advances by
explicit Euler sub-steps with its rate evaluated at the stage-1 and stage-3
states, so its error enters at O(dt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import constants
from ._kernels import (BLOWUP, GAMMA_CAP, MONOTONICITY, OK, RADIUS,
                       evolve_chunk, gamma_rate)
from .errors import (BlowUpError, MonotonicityError, PreconditionError,
                     RadiusViolationError, ShockLabError)
from .functionals import FunctionalReport, ShiftKit, compute_x_space
from .solver import DEFAULT_CFL, Field, cfl_limit


def phi_eps(y, eps):
    """Piecewise-linear odd clamp: 1 for y <= -eps^2, -y/eps^2 in between,
    -1 for y >= eps^2.  Lipschitz with constant 1/eps^2."""
    if eps <= 0:
        raise PreconditionError("phi_eps needs eps > 0")
    out = np.clip(-np.asarray(y, dtype=float) / eps ** 2, -1.0, 1.0)
    return out if out.ndim else float(out)


def gamma_rhs(report, eps, eps0):
    """Shift rate for the current functional report; the sign opposes Y."""
    return float(gamma_rate(report.Y, report.B, report.D, eps * eps, eps0))


@dataclass
class ShiftState:
    gamma: float
    gamma_dot: float
    eps0: float
    lipschitz_bound: float


@dataclass
class EvolutionState:
    field: Field
    gamma: float
    t: float
    report: FunctionalReport


@dataclass
class DiagnosticsRecord:
    t: float
    gamma: float
    gamma_dot: float
    E: float
    Y: float
    B: float
    D: float
    l2_distance: float
    mass_deviation: float
    w_l2sq: float

    CSV_COLUMNS = ("t", "gamma", "gamma_dot", "E", "Y", "B", "D",
                   "l2_distance", "mass_deviation")

    def csv_values(self):
        return [getattr(self, c) for c in self.CSV_COLUMNS]


@dataclass
class EvolutionResult:
    records: list
    final: EvolutionState
    dt: float
    steps: int
    max_abs_gamma_dot: float
    worst_slack: float
    worst_case_gap: float
    gamma_cap: float
    status: str = "ok"


_STATUS_ERRORS = {
    BLOWUP: (BlowUpError, "field became non-finite"),
    RADIUS: (RadiusViolationError, "field left the validity radius"),
    MONOTONICITY: (MonotonicityError,
                   "weighted entropy increased beyond the frozen slack"),
    GAMMA_CAP: (ShockLabError, "shift rate exceeded 10x its a-priori bound"),
}


def _pick_dt(model, field0, grid, cfl):
    """Stable step from the initial data with a little amplitude headroom."""
    probe = Field(field0.values * 1.05, field0.t)
    return cfl * cfl_limit(model, probe, grid)


def evolve_coupled(model, profile, weight, field0, T, dt=None, eps0=0.01,
                   cfl=DEFAULT_CFL, scheme="central", output_interval=None,
                   slack_coeff=None, kit=None):
    """Evolve u and the shift gamma to time T, recording diagnostics.

    Every accepted step is checked for the per-step contraction
    E(t+dt) - E(t) <= -eps0 D dt up to the frozen slack
    slack_coeff (dt^2 + dx^2) scale; blow-up, radius violations and shift
    rates beyond 10x the a-priori bound abort the run with partial
    diagnostics attached to the raised error.
    """
    grid = profile.grid
    if kit is None:
        kit = ShiftKit(model, profile, weight)
    if field0.values.shape != (grid.n_nodes,):
        raise PreconditionError("initial field does not match the grid")
    if not np.all(np.isfinite(field0.values)):
        raise PreconditionError("initial field is not finite")
    if slack_coeff is None:
        slack_coeff = constants.get("contraction_slack_coeff")
    limit = cfl * cfl_limit(model, Field(field0.values * 1.05, 0.0), grid)
    if dt is None:
        dt = _pick_dt(model, field0, grid, cfl)
    elif dt > limit * (1.0 + 1e-12):
        raise PreconditionError(f"dt={dt} violates the CFL bound {limit}")
    n_steps = max(1, math.ceil(T / dt - 1e-12))
    dt = T / n_steps
    if dt > limit * (1.0 + 1e-12):
        n_steps += 1
        dt = T / n_steps

    u = field0.values.copy()
    bcl, bcr = float(u[0]), float(u[-1])
    rep0 = compute_x_space(model, profile, weight, Field(u, 0.0), 0.0, kit=kit)
    if not math.isfinite(rep0.E):
        raise PreconditionError("initial field is not at finite entropy from the shock")
    eps = profile.eps
    apriori = max(0.0, 2.0 * abs(rep0.B) - (1.0 - eps0) * rep0.D) / eps ** 2 + 1.0
    gamma_cap = 10.0 * apriori
    rmax = model.R if math.isfinite(model.R) else np.inf
    scale_floor = 1e-9 * rep0.E + 1e-300

    if output_interval is None:
        output_interval = T / 100.0
    rec_stride = max(1, round(output_interval / dt))

    m0 = np.trapezoid(u - profile.s_values, dx=grid.dx)
    state = np.zeros(12)
    records = []

    def snapshot(t_now, gamma_now):
        rep = compute_x_space(model, profile, weight, Field(u, t_now),
                              gamma_now, kit=kit)
        gdot = gamma_rhs(rep, eps, eps0)
        s_shift = kit.sh[0]
        l2 = math.sqrt(max(0.0, np.trapezoid((u - s_shift) ** 2, dx=grid.dx)))
        mass = abs(np.trapezoid(u - profile.s_values, dx=grid.dx) - m0)
        records.append(DiagnosticsRecord(
            t=t_now, gamma=gamma_now, gamma_dot=gdot, E=rep.E, Y=rep.Y,
            B=rep.B, D=rep.D, l2_distance=l2, mass_deviation=mass,
            w_l2sq=rep.w_l2sq))
        return rep

    snapshot(0.0, 0.0)

    n = grid.n_nodes
    kbuf = np.empty((4, n))
    vbuf = np.empty(n)
    qbuf = np.empty(n)
    gbuf = np.empty(n)
    q1buf = np.empty(n)

    done = 0
    status = OK
    while done < n_steps and status == OK:
        todo = min(rec_stride, n_steps - done)
        status = evolve_chunk(u, grid.dx, dt, todo, kit.stack, kit.sh,
                              kit.lam_over_eps, kit.etab, kit.e1tab,
                              kit.e2tab, kit.qtab, kit.q1tab, kit.gtab,
                              scheme == "llf", bcl, bcr,
                              eps, eps0, rmax, slack_coeff, scale_floor,
                              gamma_cap, state, kbuf, vbuf, qbuf, gbuf, q1buf,
                              kit.ubuf, kit.sbuf, kit.wbuf)
        done = int(state[7])
        if status == OK:
            snapshot(done * dt, state[0])

    gamma = state[0]
    t_now = done * dt
    rep = compute_x_space(model, profile, weight, Field(u, t_now), gamma, kit=kit)
    final = EvolutionState(field=Field(u.copy(), t_now), gamma=gamma,
                           t=t_now, report=rep)
    result = EvolutionResult(records=records, final=final, dt=dt,
                             steps=done, max_abs_gamma_dot=float(state[6]),
                             worst_slack=float(state[8]),
                             worst_case_gap=float(state[9]),
                             gamma_cap=gamma_cap)
    if status != OK:
        snapshot(t_now, gamma)
        err_cls, msg = _STATUS_ERRORS[status]
        result.status = err_cls.__name__
        err = err_cls(f"{msg} at t={t_now:.6g} (step {done})")
        err.partial_result = result
        raise err
    return result
