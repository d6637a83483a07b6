"""Stationary shock profiles, the entropic coordinate, and the weight.

The normalized profile solves the once-integrated traveling-wave equation

    dx eta'(s) = Q(s) - Q(eps),    s(0) = 0,

connecting s(-inf) = +eps to s(+inf) = -eps.  The weight function is the
near-constant multiplier a = 1 - (lambda/eps) eta'(s) whose derivatives feed
the weighted entropy functionals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import PreconditionError, SolverFailureError
from .solver import Grid

STATIONARITY_TOL = 1e-12
DEFAULT_HALF_WIDTH_FACTOR = 40.0


def default_half_width(eps):
    """Domain half-width making the truncated tails smaller than 1e-12."""
    return DEFAULT_HALF_WIDTH_FACTOR / eps


class ProfileInterpolator:
    """Cubic-spline evaluator with constant extension beyond the grid."""

    def __init__(self, x, values):
        self.spline = CubicSpline(x, values)
        self._x0 = x[0]
        self._x1 = x[-1]
        self._v0 = values[0]
        self._v1 = values[-1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inner = self.spline(np.clip(x, self._x0, self._x1))
        out = np.where(x < self._x0, self._v0,
                       np.where(x > self._x1, self._v1, inner))
        return out if out.ndim else float(out)


@dataclass
class ShockProfile:
    eps: float
    grid: Grid
    s_values: np.ndarray
    sprime_values: np.ndarray
    y_of_x: np.ndarray
    interpolator: ProfileInterpolator

    @property
    def s_left(self):
        return float(self.s_values[0])

    @property
    def s_right(self):
        return float(self.s_values[-1])


@dataclass
class WeightFunction:
    lam: float                 # weight amplitude lambda
    a_values: np.ndarray
    a1_values: np.ndarray
    a2_values: np.ndarray


def solve_profile(model, eps, grid):
    """Integrate the profile ODE outward from s(0) = 0 onto the grid."""
    if not eps > 0:
        raise PreconditionError("shock half-strength eps must be positive")
    q_gap = abs(float(model.Q(eps)) - float(model.Q(-eps)))
    if q_gap > STATIONARITY_TOL:
        raise PreconditionError(
            f"model {model.name!r} is not stationary for +-{eps}: "
            f"|Q(-eps) - Q(eps)| = {q_gap:.3e}; normalize the flux first")
    if math.isfinite(model.R) and 2.0 * eps * model.Lambda >= model.R:
        raise PreconditionError("shock too wide for the validity radius")

    q_end = 0.5 * (float(model.Q(eps)) + float(model.Q(-eps)))

    def rhs(_x, s):
        return (model.Q(s) - q_end) / model.eta2(s)

    x = grid.x
    s = np.empty_like(x)
    pos = x[x > 0.0]
    neg = x[x < 0.0]
    opts = dict(method="RK45", rtol=1e-12, atol=1e-15, dense_output=False)
    if pos.size:
        sol = solve_ivp(rhs, (0.0, float(pos[-1])), [0.0], t_eval=pos, **opts)
        if not sol.success:
            raise SolverFailureError(f"profile ODE failed: {sol.message}")
        s[x > 0.0] = sol.y[0]
    if neg.size:
        sol = solve_ivp(rhs, (0.0, float(neg[0])), [0.0], t_eval=neg[::-1], **opts)
        if not sol.success:
            raise SolverFailureError(f"profile ODE failed: {sol.message}")
        s[x < 0.0] = sol.y[0][::-1]
    s[x == 0.0] = 0.0

    if np.max(np.abs(s)) > eps * (1.0 + 1e-9):
        raise SolverFailureError("profile left the interval (-eps, eps)")
    np.clip(s, -eps, eps, out=s)

    core = np.abs(s) < eps * (1.0 - 1e-9)
    ds = np.diff(s)
    if np.any(ds > 1e-12 * eps) or np.any(ds[core[:-1] & core[1:]] >= 0.0):
        raise SolverFailureError("profile is not monotone decreasing")
    # iron out integrator noise in the saturated tails so y(x) is monotone
    np.minimum.accumulate(s, out=s)

    sprime = (model.Q(s) - q_end) / model.eta2(s)
    return ShockProfile(eps=float(eps), grid=grid, s_values=s,
                        sprime_values=sprime, y_of_x=model.eta1(s),
                        interpolator=ProfileInterpolator(x, s))


def build_weight(profile, model, lam):
    """Weight a = 1 - (lambda/eps) eta'(s) and its analytic derivatives.

    a'  = -(lambda/eps) eta''(s) s'
    a'' = -(lambda/eps) dx Q(s)      (the profile ODE differentiated once)
    """
    if lam < 0:
        raise PreconditionError("lambda must be nonnegative")
    eps = profile.eps
    y = profile.y_of_x
    sup = lam / eps * float(np.max(np.abs(y)))
    if sup > 0.5:
        raise PreconditionError(
            f"lambda={lam} pushes the weight out of [1/2, 2] "
            f"(|a - 1| reaches {sup:.3f})")
    s = profile.s_values
    sp = profile.sprime_values
    a = 1.0 - (lam / eps) * y
    a1 = -(lam / eps) * model.eta2(s) * sp
    a2 = -(lam / eps) * model.Q1(s) * sp
    return WeightFunction(lam=float(lam), a_values=a, a1_values=a1, a2_values=a2)


def default_lambda(eps):
    """Default weight amplitude lambda = eps**(1/3)."""
    return eps ** (1.0 / 3.0)


@dataclass
class EntropicMap:
    """Monotone-decreasing map y(x) = eta'(s(x)) with an inverse lookup."""

    y_samples: np.ndarray
    dy_weight: np.ndarray      # -eta''(s) s', the quadrature weight for dy
    forward: ProfileInterpolator
    _inverse_spline: CubicSpline
    y_min: float
    y_max: float

    def x_of_y(self, y):
        return self._inverse_spline(np.clip(y, self.y_min, self.y_max))


def entropic_coordinate(profile, model):
    """Sampled y = eta'(s(x)) together with an inverse x(y)."""
    x = profile.grid.x
    y = profile.y_of_x
    dyw = -model.eta2(profile.s_values) * profile.sprime_values
    # invert on the strictly decreasing range; the flat tails carry no
    # y-measure and are clamped to the nearest resolvable value
    strict = np.empty(y.shape, dtype=bool)
    strict[0] = True
    strict[1:] = y[1:] < y[:-1]
    keep = np.nonzero(strict)[0]
    y_dec = y[keep]
    x_dec = x[keep]
    inv = CubicSpline(y_dec[::-1], x_dec[::-1])
    return EntropicMap(y_samples=y, dy_weight=dyw,
                       forward=ProfileInterpolator(x, y),
                       _inverse_spline=inv,
                       y_min=float(y_dec[-1]), y_max=float(y_dec[0]))


def fit_tail_decay(profile, side="right", window=(0.3, 0.8)):
    """Least-squares exponential decay rate of |s -+ eps| on one tail."""
    x = profile.grid.x
    s = profile.s_values
    eps = profile.eps
    L = profile.grid.L_dom
    if side == "right":
        mask = (x >= window[0] * L) & (x <= window[1] * L)
        resid = np.abs(s[mask] + eps)
    else:
        mask = (x <= -window[0] * L) & (x >= -window[1] * L)
        resid = np.abs(s[mask] - eps)
    xs = np.abs(x[mask])
    good = resid > 0.0
    if good.sum() < 8:
        raise SolverFailureError("tail window too small to fit a decay rate")
    slope, intercept = np.polyfit(xs[good], np.log(resid[good]), 1)
    return -float(slope), float(np.exp(intercept))
