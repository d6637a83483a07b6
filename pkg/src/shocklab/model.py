"""Flux/entropy pairs (Q, eta) with analytic derivatives and the relative
quantities built from them.

A model packages a uniformly convex flux Q and dissipation potential eta,
their derivatives up to third order, the entropy flux G with G' = Q' eta',
the convexity constant Lambda (1/Lambda <= Q'', eta'' <= Lambda on the
validity interval), and the validity radius R.
"""

from __future__ import annotations

import math

import numpy as np

from . import basis
from .errors import DegenerateInputError, DomainError, PreconditionError

LAMBDA_SAMPLES = 10_000
# sampling box for the convexity constant when the validity radius is infinite
DEFAULT_LAMBDA_BOX = 8.0


class ModelSpec:
    """Immutable flux/entropy pair; safe to share across threads."""

    def __init__(self, name, q_terms, eta_terms, radius=math.inf,
                 require_convex=True, lambda_box=DEFAULT_LAMBDA_BOX, meta=None):
        self.name = name
        self.R = float(radius)
        self._q = basis.merge(q_terms)
        self._eta = basis.merge(eta_terms)
        self._q1 = basis.derivative(self._q)
        self._q2 = basis.derivative(self._q1)
        self._q3 = basis.derivative(self._q2)
        self._eta1 = basis.derivative(self._eta)
        self._eta2 = basis.derivative(self._eta1)
        self._eta3 = basis.derivative(self._eta2)
        g_raw = basis.antiderivative(basis.product(self._q1, self._eta1))
        self._g = basis.add(g_raw, [basis.term(-basis.evaluate(g_raw, 0.0))])
        self.meta = dict(meta or {})

        box = min(self.R, lambda_box)
        xs = np.linspace(-box, box, LAMBDA_SAMPLES)
        q2 = basis.evaluate(self._q2, xs)
        e2 = basis.evaluate(self._eta2, xs)
        if require_convex and (q2.min() <= 0.0 or e2.min() <= 0.0):
            raise PreconditionError(
                f"model {name!r}: Q'' or eta'' is not positive on [-{box}, {box}]")
        if require_convex:
            lam = max(q2.max(), e2.max(), 1.0 / q2.min(), 1.0 / e2.min(), 1.0)
        else:
            lam = max(abs(q2).max(), abs(e2).max(), 1.0)
        # round up 1% so strict inequalities survive sampling gaps
        self.Lambda = 1.01 * lam
        self._lambda_box = box

    # -- evaluation ------------------------------------------------------

    def Q(self, u):
        return basis.evaluate(self._q, u)

    def Q1(self, u):
        return basis.evaluate(self._q1, u)

    def Q2(self, u):
        return basis.evaluate(self._q2, u)

    def Q3(self, u):
        return basis.evaluate(self._q3, u)

    def eta(self, u):
        return basis.evaluate(self._eta, u)

    def eta1(self, u):
        return basis.evaluate(self._eta1, u)

    def eta2(self, u):
        return basis.evaluate(self._eta2, u)

    def eta3(self, u):
        return basis.evaluate(self._eta3, u)

    def G(self, u):
        return basis.evaluate(self._g, u)

    def tables(self):
        """Term tables for the jitted kernels: (eta, eta1, eta2, Q, Q1, G)."""
        return (basis.as_table(self._eta), basis.as_table(self._eta1),
                basis.as_table(self._eta2), basis.as_table(self._q),
                basis.as_table(self._q1), basis.as_table(self._g))

    def check_radius(self, *values):
        if not math.isfinite(self.R):
            return
        for v in values:
            if np.max(np.abs(v)) >= self.R:
                raise DomainError(
                    f"model {self.name!r}: input outside validity radius {self.R}")

    def eta1_inverse(self, y):
        """Invert the monotone map eta' by damped Newton iteration."""
        y = np.asarray(y, dtype=float)
        u = np.array(y, dtype=float) / max(self.eta2(0.0), 1e-12)
        if math.isfinite(self.R):
            np.clip(u, -self.R * 0.999999, self.R * 0.999999, out=u)
        for _ in range(80):
            r = self.eta1(u) - y
            u_new = u - r / self.eta2(u)
            if math.isfinite(self.R):
                np.clip(u_new, -self.R * 0.999999, self.R * 0.999999, out=u_new)
            if np.max(np.abs(u_new - u)) < 1e-15 * (1.0 + np.max(np.abs(u))):
                u = u_new
                break
            u = u_new
        return u if u.ndim else float(u)

    def __repr__(self):
        return f"ModelSpec({self.name!r}, Lambda={self.Lambda:.6g}, R={self.R})"


def relative(f, f1, x, y):
    """Second-order remainder f(x|y) := f(x) - f(y) - f'(y)(x - y)."""
    return f(x) - f(y) - f1(y) * (np.asarray(x, dtype=float) - y)


def relative_flux_F(model, x, y):
    """Relative entropy flux F(x;y) := G(x) - G(y) - eta'(y)[Q(x) - Q(y)]."""
    model.check_radius(x, y)
    return model.G(x) - model.G(y) - model.eta1(y) * (model.Q(x) - model.Q(y))


def rankine_hugoniot_speed(model, s_minus, s_plus):
    """Shock speed sigma = (Q(s_-) - Q(s_+)) / (s_- - s_+)."""
    if s_minus == s_plus:
        raise DegenerateInputError("equal shock endpoints have no defined speed")
    return (model.Q(s_minus) - model.Q(s_plus)) / (s_minus - s_plus)


def normalize_flux(model, s_minus, s_plus):
    """Shift and tilt the model so the (s_minus, s_plus) shock is stationary
    and centered.

    With m the state midpoint and sigma the Rankine-Hugoniot speed, the new
    flux is Q~(x) = Q(x + m) - sigma x - Q(m), so Q~(-eps) = Q~(eps) and
    Q~(0) = 0 with eps = (s_minus - s_plus)/2.  The entropy is recentered the
    same way (eta~(0) = eta~'(0) = 0); affine changes leave the dynamics and
    the second derivatives untouched.
    """
    if not s_minus > s_plus:
        raise PreconditionError("normalize_flux requires s_minus > s_plus")
    model.check_radius(s_minus, s_plus)
    m = 0.5 * (s_minus + s_plus)
    eps = 0.5 * (s_minus - s_plus)
    sigma = rankine_hugoniot_speed(model, s_minus, s_plus)
    radius = model.R if not math.isfinite(model.R) else model.R - abs(m)
    if radius <= eps:
        raise DomainError("normalized endpoints fall outside the validity radius")

    q_terms = basis.add(basis.shifted(model._q, m),
                        [basis.term(-sigma, 1), basis.term(-model.Q(m))])
    e1_m = model.eta1(m)
    eta_terms = basis.add(basis.shifted(model._eta, m),
                          [basis.term(-e1_m, 1), basis.term(-model.eta(m))])
    out = ModelSpec(f"{model.name}|normalized", q_terms, eta_terms,
                    radius=radius, lambda_box=model._lambda_box,
                    meta={**model.meta, "center": m, "tilt": -sigma,
                          "flux_offset": -float(model.Q(m)), "eps": eps})
    # tilting by a linear function preserves the second derivatives, so the
    # original constant remains valid on the (shifted) validity interval
    out.Lambda = model.Lambda
    return out


def taylor_windows(model, lo, hi, samples=2001):
    """Pointwise two-sided bounds for each relative quantity divided by its
    power of w = eta'(x) - eta'(y), with x, y ranging over [lo, hi].

    Windows come from interval bounds on the derivative factors appearing in
    the mean-value expansions; they are conservative but never violated.
    """
    z = np.linspace(lo, hi, samples)
    e2 = model.eta2(z)
    e3 = model.eta3(z)
    q1 = model.Q1(z)
    q2 = model.Q2(z)
    e1 = model.eta1(z)
    e2lo, e2hi = e2.min(), e2.max()
    q2lo, q2hi = q2.min(), q2.max()

    def corners(nums, dens):
        vals = [nm / dn for nm in nums for dn in dens]
        return min(vals), max(vals)

    win = {}
    win["du_over_w"] = corners([1.0], [e2lo, e2hi])
    win["eta_rel_over_w2"] = corners([e2lo, e2hi], [2 * e2lo ** 2, 2 * e2hi ** 2])
    win["q_rel_over_w2"] = corners([q2lo, q2hi], [2 * e2lo ** 2, 2 * e2hi ** 2])
    win["eta1_rel_over_w2"] = corners([e3.min(), e3.max()],
                                      [2 * e2lo ** 2, 2 * e2hi ** 2])
    win["eta1_rel_over_w"] = (1.0 - e2hi / e2lo, 1.0 - e2lo / e2hi)
    spread = e1.max() - e1.min()
    a_vals = e2 * q1
    f_nums = [a_vals.min() - spread * q2hi, a_vals.max() + spread * q2hi]
    win["f_rel_over_w2"] = corners(f_nums, [2 * e2lo ** 2, 2 * e2hi ** 2])
    return win


# -- built-in models -----------------------------------------------------

def _burgers():
    half_u2 = basis.poly(0.0, 0.0, 0.5)
    return ModelSpec("burgers", half_u2, half_u2)


def _sine_flux():
    q = basis.poly(0.0, 0.0, 0.5) + [basis.term(0.1, 0, basis.SIN, 1.0)]
    return ModelSpec("sine-flux", q, basis.poly(0.0, 0.0, 0.5))


def _quartic_entropy():
    eta = basis.poly(0.0, 0.0, 0.5, 0.0, 0.125)
    return ModelSpec("quartic-entropy", basis.poly(0.0, 0.0, 0.5), eta, radius=1.0)


_BUILTINS = {
    "burgers": _burgers,
    "sine-flux": _sine_flux,
    "quartic-entropy": _quartic_entropy,
}

BUILTIN_NAMES = tuple(_BUILTINS)


def get_model(name):
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; built-ins: {BUILTIN_NAMES}") from None
    return factory()


def model_from_coefficients(q_poly, eta_poly, q_trig=(), eta_trig=(),
                            radius=math.inf, name="custom"):
    """Build a model from polynomial coefficients plus optional trig terms.

    Trig terms are (coef, kind, freq) triples with kind "sin" or "cos".
    """
    kinds = {"sin": basis.SIN, "cos": basis.COS}
    q_terms = basis.poly(*q_poly) + [basis.term(c, 0, kinds[k], f) for c, k, f in q_trig]
    eta_terms = basis.poly(*eta_poly) + [basis.term(c, 0, kinds[k], f) for c, k, f in eta_trig]
    return ModelSpec(name, q_terms, eta_terms, radius=radius)
