"""Property-testing lab for the functional inequalities underlying the
contraction argument, independent of any PDE run.

Each suite samples synthetic test functions that satisfy the hypotheses of
one inequality by construction, evaluates the displayed quantity, and hunts
for sign violations with bounded random search plus simulated annealing.
Every sample logs its hypothesis checks; inputs failing the hypotheses are
never counted as violations.  Constants the theory leaves implicit are
calibrated once, frozen into the constants file, and regression-tested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import constants
from .errors import HypothesisError, PreconditionError
from .functionals import ShiftKit, compute_x_space, y_bounds_l2_check
from .solver import Field


@dataclass
class TestFunctionFamily:
    """Seeded generator configuration for synthetic test functions."""

    kind: str = "mixed"          # fourier | bump | piecewise | constant | mixed
    seed: int = 0
    modes: int = 10
    amplitude: float = 1.0

    def rng(self):
        return np.random.default_rng(self.seed)


@dataclass
class ViolationRecord:
    seed: int
    lemma: str
    parameters: str
    value: float
    hypothesis_ok: bool


# ---------------------------------------------------------------------------
# Poincare suite (unit interval, degenerate weight x(1-x))
# ---------------------------------------------------------------------------

def poincare_functional(W, delta, dW=None, norm_cap=None):
    """The weighted Poincare combination on W in L^2(0,1):

    -(1/d)(int W^2 + 2 int W)^2 + (1+d) int W^2 + (2/3) int W^3
    + d int |W|^3 - (1-d) int x(1-x) |dx W|^2

    W is sampled on a uniform grid of [0,1]; integrals use the trapezoid
    rule and the gradient uses central differences unless analytic samples
    dW are supplied.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    if n < 16:
        raise PreconditionError("need at least 16 samples on [0,1]")
    x = np.linspace(0.0, 1.0, n)
    dx = x[1] - x[0]
    i2 = np.trapezoid(W * W, dx=dx)
    if norm_cap is not None and i2 > norm_cap * (1.0 + 1e-12):
        raise HypothesisError(f"||W||_2^2 = {i2:.6g} exceeds the cap {norm_cap}")
    i1 = np.trapezoid(W, dx=dx)
    i3 = np.trapezoid(W ** 3, dx=dx)
    i3a = np.trapezoid(np.abs(W) ** 3, dx=dx)
    if dW is None:
        dW = np.empty_like(W)
        dW[1:-1] = (W[2:] - W[:-2]) / (2.0 * dx)
        dW[0] = (W[1] - W[0]) / dx
        dW[-1] = (W[-1] - W[-2]) / dx
    grad = np.trapezoid(x * (1.0 - x) * np.asarray(dW) ** 2, dx=dx)
    return (-(i2 + 2.0 * i1) ** 2 / delta + (1.0 + delta) * i2
            + (2.0 / 3.0) * i3 + delta * i3a - (1.0 - delta) * grad)


def _unit_interval_samples(family, n_samples, n_grid, norm_cap):
    """Yield (W, dW, meta) on [0,1] with ||W||_2^2 <= norm_cap by construction."""
    rng = family.rng()
    kinds = ([family.kind] if family.kind != "mixed"
             else ["constant", "fourier", "bump"])
    x = np.linspace(0.0, 1.0, n_grid)
    for idx in range(n_samples):
        kind = kinds[idx % len(kinds)]
        if kind == "constant":
            c = rng.uniform(-math.sqrt(norm_cap), math.sqrt(norm_cap))
            W = np.full(n_grid, c)
            dW = np.zeros(n_grid)
            meta = {"kind": kind, "c": c}
        elif kind == "fourier":
            m = rng.integers(1, family.modes + 1)
            a = rng.normal(size=m)
            b = rng.normal(size=m)
            c0 = rng.normal() * 0.5
            W = np.full(n_grid, c0)
            dW = np.zeros(n_grid)
            for j in range(m):
                k = 2.0 * math.pi * (j + 1)
                W += a[j] * np.sin(k * x) + b[j] * np.cos(k * x)
                dW += a[j] * k * np.cos(k * x) - b[j] * k * np.sin(k * x)
            meta = {"kind": kind, "modes": int(m)}
        else:
            c = rng.uniform(0.1, 0.9)
            sig = rng.uniform(0.02, 0.3)
            amp = rng.normal() * family.amplitude
            z = (x - c) / sig
            W = amp * np.exp(-0.5 * z * z)
            dW = -W * z / sig
            meta = {"kind": kind, "center": c, "sigma": sig}
        nrm = np.trapezoid(W * W, dx=x[1] - x[0])
        if nrm > 0:
            target = norm_cap * rng.uniform(0.05, 1.0)
            scalef = math.sqrt(target / nrm)
            W = W * scalef
            dW = dW * scalef
        meta["l2sq"] = float(np.trapezoid(W * W, dx=x[1] - x[0]))
        meta["index"] = idx
        yield W, dW, meta


@dataclass
class PoincareSweepReport:
    max_value: float
    max_meta: dict
    per_delta_max: dict
    delta_threshold: float
    violations: list
    n_samples: int
    n_unresolved: int


def poincare_sweep(family, C1, delta_grid, n_samples=10_000, n_grid=513):
    """Evaluate the Poincare combination over a sampled family and a delta
    grid; report the largest value and the empirical delta threshold below
    which no positive value appears.

    Every sample is evaluated at n_grid and 2*n_grid-1 points; samples whose
    value moves by more than 1% are counted as unresolved rather than judged.
    """
    delta_grid = sorted(delta_grid)
    per_delta_max = {d: -math.inf for d in delta_grid}
    max_value = -math.inf
    max_meta: dict = {}
    violations = []
    unresolved = 0
    for W, dW, meta in _unit_interval_samples(family, n_samples, n_grid, C1):
        W2 = _refine_unit(W)
        dW2 = _refine_unit(dW)
        for d in delta_grid:
            v1 = poincare_functional(W, d, dW=dW, norm_cap=C1)
            v2 = poincare_functional(W2, d, dW=dW2, norm_cap=C1)
            if abs(v2 - v1) > 0.01 * (1.0 + abs(v2)):
                unresolved += 1
                continue
            if v2 > per_delta_max[d]:
                per_delta_max[d] = v2
            if v2 > max_value:
                max_value = v2
                max_meta = {**meta, "delta": d}
            if v2 > 0.0:
                violations.append(ViolationRecord(
                    seed=family.seed, lemma="poincare",
                    parameters=f"delta={d};{_fmt_meta(meta)}",
                    value=float(v2), hypothesis_ok=True))
    threshold = 0.0
    for d in delta_grid:
        if per_delta_max[d] <= 0.0:
            threshold = d
        else:
            break
    return PoincareSweepReport(max_value=max_value, max_meta=max_meta,
                               per_delta_max=per_delta_max,
                               delta_threshold=threshold,
                               violations=violations, n_samples=n_samples,
                               n_unresolved=unresolved)


def _refine_unit(v):
    """Linear midpoint refinement of uniform samples (doubles resolution)."""
    out = np.empty(2 * v.shape[0] - 1)
    out[::2] = v
    out[1::2] = 0.5 * (v[:-1] + v[1:])
    return out


def _fmt_meta(meta):
    return ";".join(f"{k}={v}" for k, v in sorted(meta.items()))


# ---------------------------------------------------------------------------
# Gagliardo-Nirenberg suite (interval [-L, L], degenerate weight (L+y)(L-y))
# ---------------------------------------------------------------------------

@dataclass
class GNCheckResult:
    lhs: float
    rhs_core: float
    ratio: float
    dtilde: float
    cbar: float


def gn_check(w, h, L, p, q, dw=None):
    """Weighted interpolation check on w in L^2([-L, L]).

    lhs    = int (w - h)_+^p dy
    Dtilde = int (L+y)(L-y) 1_{|w|>h} |dy w|^2 dy
    ratio  = lhs / ((h^-2 Cbar)^q L^(-p/2) Dtilde^(p/2))

    with Cbar = int w^2 dy.  Hypotheses h > 0 and Cbar <= 2 h^2 L are
    enforced.  The degenerate weight is the proof's (L+y)(L-y) form.
    """
    if h <= 0 or L <= 0:
        raise PreconditionError("gn_check needs h > 0 and L > 0")
    if not (0.0 < q < 1.0) or p < 1:
        raise PreconditionError("gn_check needs p >= 1 and q in (0,1)")
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    y = np.linspace(-L, L, n)
    dy = y[1] - y[0]
    cbar = np.trapezoid(w * w, dx=dy)
    if cbar > 2.0 * h * h * L * (1.0 + 1e-12):
        raise HypothesisError(
            f"int w^2 = {cbar:.6g} exceeds 2 h^2 L = {2 * h * h * L:.6g}")
    lhs = np.trapezoid(np.maximum(w - h, 0.0) ** p, dx=dy)
    if dw is None:
        dw = np.empty_like(w)
        dw[1:-1] = (w[2:] - w[:-2]) / (2.0 * dy)
        dw[0] = (w[1] - w[0]) / dy
        dw[-1] = (w[-1] - w[-2]) / dy
    indic = (np.abs(w) > h).astype(float)
    dtilde = np.trapezoid((L + y) * (L - y) * indic * np.asarray(dw) ** 2, dx=dy)
    rhs_core = (cbar / (h * h)) ** q * L ** (-p / 2.0) * dtilde ** (p / 2.0)
    if lhs == 0.0:
        ratio = 0.0
    elif rhs_core == 0.0:
        ratio = math.inf
    else:
        ratio = lhs / rhs_core
    return GNCheckResult(lhs=float(lhs), rhs_core=float(rhs_core),
                         ratio=float(ratio), dtilde=float(dtilde),
                         cbar=float(cbar))


def gn_family_samples(family, n_samples, n_grid, h, L):
    """Yield w samples on [-L, L] satisfying int w^2 <= 2 h^2 L."""
    rng = family.rng()
    y = np.linspace(-L, L, n_grid)
    dy = y[1] - y[0]
    cap = 2.0 * h * h * L
    kinds = ([family.kind] if family.kind != "mixed"
             else ["bump", "fourier", "piecewise"])
    for idx in range(n_samples):
        kind = kinds[idx % len(kinds)]
        if kind == "bump":
            k = rng.integers(1, 4)
            w = np.zeros(n_grid)
            for _ in range(k):
                c = rng.uniform(-0.7 * L, 0.7 * L)
                sig = rng.uniform(0.02 * L, 0.4 * L)
                amp = rng.uniform(-3.0, 3.0) * h
                w += amp * np.exp(-0.5 * ((y - c) / sig) ** 2)
            meta = {"kind": kind, "bumps": int(k)}
        elif kind == "fourier":
            m = rng.integers(1, family.modes + 1)
            w = np.zeros(n_grid)
            env = np.exp(-0.5 * (y / (0.6 * L)) ** 2)
            for j in range(1, m + 1):
                w += rng.normal() * np.sin(math.pi * j * (y + L) / (2 * L))
            w *= env * h * rng.uniform(0.5, 3.0)
            meta = {"kind": kind, "modes": int(m)}
        else:
            # plateau with linear ramps wide enough to survive refinement
            c = rng.uniform(-0.5 * L, 0.5 * L)
            half = rng.uniform(0.05 * L, 0.3 * L)
            ramp = max(rng.uniform(0.02 * L, 0.1 * L), 8.0 * dy)
            amp = rng.uniform(-3.0, 3.0) * h
            inner = np.clip((half + ramp - np.abs(y - c)) / ramp, 0.0, 1.0)
            w = amp * inner
            meta = {"kind": kind, "half": half, "ramp": ramp}
        nrm = np.trapezoid(w * w, dx=dy)
        if nrm > cap:
            w = w * math.sqrt(0.999 * cap / nrm)
        meta["index"] = idx
        yield w, meta


@dataclass
class GNSuiteReport:
    max_ratio: float
    max_meta: dict
    violations: list
    n_samples: int
    n_skipped: int


def gn_suite(family, h, L, p, q, n_samples=2000, n_grid=801, ratio_cap=None):
    """Run gn_check over a family; flag ratios beyond the frozen cap."""
    if ratio_cap is None:
        ratio_cap = constants.get("gn_ratio_cap_p2_q05")
    max_ratio = 0.0
    max_meta: dict = {}
    violations = []
    skipped = 0
    for w, meta in gn_family_samples(family, n_samples, n_grid, h, L):
        try:
            res = gn_check(w, h, L, p, q)
        except HypothesisError:
            skipped += 1
            continue
        if res.lhs == 0.0:
            continue
        if res.ratio > max_ratio:
            max_ratio = res.ratio
            max_meta = meta
        if res.ratio > ratio_cap:
            violations.append(ViolationRecord(
                seed=family.seed, lemma="gagliardo-nirenberg",
                parameters=f"p={p};q={q};h={h};L={L};{_fmt_meta(meta)}",
                value=float(res.ratio), hypothesis_ok=True))
    return GNSuiteReport(max_ratio=max_ratio, max_meta=max_meta,
                         violations=violations, n_samples=n_samples,
                         n_skipped=skipped)


# ---------------------------------------------------------------------------
# Shock-frame perturbation families and annealing searches
# ---------------------------------------------------------------------------

def _w_from_params(params, x, eps):
    """Smooth localized w built from an envelope and 20 Fourier coefficients."""
    center = params[0]
    width = abs(params[1]) + 0.05 / eps
    xi = (x - center) / width
    env = np.exp(-0.5 * xi * xi)
    n_modes = (len(params) - 2) // 2
    w = np.zeros_like(x)
    for m in range(n_modes):
        a = params[2 + 2 * m]
        b = params[3 + 2 * m]
        w += a * np.cos(0.9 * m * xi) + b * np.sin(0.9 * (m + 1) * xi)
    return w * env


def _scale_to_target(w, dyw, dx, target):
    nrm = np.trapezoid(w * w * dyw, dx=dx)
    if nrm <= 0.0:
        return w, 0.0
    w = w * math.sqrt(target / nrm)
    return w, target


def perturbed_field(model, profile, w):
    """Field with eta'(u) = eta'(s) + w on the profile grid."""
    u = model.eta1_inverse(profile.y_of_x + w)
    return Field(np.asarray(u, dtype=float), 0.0)


def shock_perturbation_samples(family, model, profile, weight, n_samples,
                               target_l2y):
    """Yield (field, meta) with int w^2 dy <= target_l2y by construction."""
    rng = family.rng()
    x = profile.grid.x
    dx = profile.grid.dx
    eps = profile.eps
    dyw = -model.eta2(profile.s_values) * profile.sprime_values
    kinds = ([family.kind] if family.kind != "mixed"
             else ["fourier", "bump", "piecewise", "constant"])
    for idx in range(n_samples):
        kind = kinds[idx % len(kinds)]
        if kind == "constant":
            w = np.full_like(x, 1.0)
            meta = {"kind": kind}
        elif kind == "bump":
            c = rng.uniform(-2.0, 2.0) / eps
            sig = rng.uniform(0.1, 3.0) / eps
            w = np.exp(-0.5 * ((x - c) / sig) ** 2) * rng.choice((-1.0, 1.0))
            meta = {"kind": kind, "center": c, "sigma": sig}
        elif kind == "piecewise":
            # narrow spike: large L-infinity, small weighted L2 mass
            c = rng.uniform(-1.0, 1.0) / eps
            sig = max(rng.uniform(0.5, 4.0) * dx, 2.0 * dx)
            w = np.exp(-0.5 * ((x - c) / sig) ** 2) * rng.choice((-1.0, 1.0))
            meta = {"kind": kind, "sigma": sig}
        else:
            n_modes = int(rng.integers(1, family.modes + 1))
            params = np.zeros(2 + 2 * family.modes)
            params[0] = rng.uniform(-1.0, 1.0) / eps
            params[1] = rng.uniform(0.2, 2.0) / eps
            params[2:2 + 2 * n_modes] = rng.normal(size=2 * n_modes)
            w = _w_from_params(params, x, eps)
            meta = {"kind": kind, "modes": n_modes}
        rho = rng.uniform(0.05, 1.0)
        w, got = _scale_to_target(w, dyw, dx, rho * target_l2y)
        if got == 0.0:
            continue
        field = perturbed_field(model, profile, w)
        ok = bool(np.all(np.isfinite(field.values)))
        if math.isfinite(model.R):
            ok = ok and float(np.max(np.abs(field.values))) < 0.98 * model.R
        meta.update({"index": idx, "l2y": got, "hypothesis_ok": ok})
        yield field, meta


def anneal(objective, x0, n_iter, step, seed, t0):
    """Plain Metropolis annealing maximizer with a geometric schedule."""
    rng = np.random.default_rng(seed)
    x = np.array(x0, dtype=float)
    f = objective(x)
    best_f, best_x = f, x.copy()
    t_end = 1e-4 * t0
    for i in range(n_iter):
        temp = t0 * (t_end / t0) ** (i / max(1, n_iter - 1))
        prop = x.copy()
        j = int(rng.integers(len(x)))
        prop[j] += rng.normal() * step[j]
        fp = objective(prop)
        if fp >= f or rng.random() < math.exp((fp - f) / temp):
            x, f = prop, fp
        if f > best_f:
            best_f, best_x = f, x.copy()
    return best_f, best_x


@dataclass
class SignSearchReport:
    max_value: float
    tol: float
    max_meta: dict
    anneal_value: float
    n_samples: int
    n_skipped: int
    violations: list


def functional_sign_search(model, profile, weight, family, eps0,
                           cbar=1.0, n_samples=10_000, n_anneal=10_000,
                           extra_fields=()):
    """Maximize R(u) + eps0 D(u), R = -Y^2/(2 eps^2) + B - D, over synthetic
    perturbations obeying int w^2 dy <= cbar eps^3 / lambda^2.

    Random family sampling is followed by simulated annealing over the
    localized-Fourier parameterization.  The theory predicts a nonpositive
    maximum; values must stay below the frozen quadrature tolerance.
    """
    eps = profile.eps
    lam = weight.lam
    if lam <= 0:
        raise PreconditionError("sign search needs a positive lambda")
    target = cbar * eps ** 3 / lam ** 2
    kit = ShiftKit(model, profile, weight)
    dx = profile.grid.dx
    dyw = -model.eta2(profile.s_values) * profile.sprime_values

    def objective_from_field(field):
        rep = compute_x_space(model, profile, weight, field, 0.0, kit=kit)
        r = -rep.Y ** 2 / (2.0 * eps * eps) + rep.B - rep.D
        return r + eps0 * rep.D, rep

    max_value = -math.inf
    max_meta: dict = {}
    skipped = 0
    scale_stat = 0.0
    violations = []
    for field, meta in shock_perturbation_samples(family, model, profile,
                                                  weight, n_samples, target):
        if not meta["hypothesis_ok"]:
            skipped += 1
            continue
        val, rep = objective_from_field(field)
        scale_stat = max(scale_stat, abs(rep.B) + rep.D
                         + rep.Y ** 2 / (2.0 * eps * eps))
        if val > max_value:
            max_value = val
            max_meta = meta
    for j, field in enumerate(extra_fields):
        val, rep = objective_from_field(field)
        scale_stat = max(scale_stat, abs(rep.B) + rep.D
                         + rep.Y ** 2 / (2.0 * eps * eps))
        if val > max_value:
            max_value = val
            max_meta = {"kind": "evolved-snapshot", "index": j}

    x = profile.grid.x

    def anneal_objective(params):
        w = _w_from_params(params, x, eps)
        rho = 1.0 / (1.0 + params[-1] ** 2)
        w, got = _scale_to_target(w, dyw, dx, rho * target)
        if got == 0.0:
            return -math.inf
        field = perturbed_field(model, profile, w)
        if not np.all(np.isfinite(field.values)):
            return -math.inf
        if math.isfinite(model.R) and np.max(np.abs(field.values)) >= 0.98 * model.R:
            return -math.inf
        return objective_from_field(field)[0]

    n_modes = family.modes
    x0 = np.zeros(2 + 2 * n_modes + 1)
    x0[1] = 1.0 / eps
    x0[2] = 1.0
    step = np.full_like(x0, 0.5)
    step[0] = 0.5 / eps
    step[1] = 0.5 / eps
    t0 = max(scale_stat, 1e-12) * 0.1
    anneal_value, _ = anneal(anneal_objective, x0, n_anneal, step,
                             family.seed + 1, t0)
    max_value = max(max_value, anneal_value)

    tol = constants.get("sign_search_tol_coeff") * dx * dx * (1.0 + scale_stat)
    if max_value > tol:
        violations.append(ViolationRecord(
            seed=family.seed, lemma="functional-sign",
            parameters=f"eps0={eps0};cbar={cbar};{_fmt_meta(max_meta)}",
            value=float(max_value), hypothesis_ok=True))
    return SignSearchReport(max_value=float(max_value), tol=float(tol),
                            max_meta=max_meta, anneal_value=float(anneal_value),
                            n_samples=n_samples, n_skipped=skipped,
                            violations=violations)


@dataclass
class YBoundsSearchReport:
    min_margin: float
    max_meta: dict
    anneal_margin: float
    n_samples: int
    violations: list


def y_bounds_search(model, profile, weight, family, n_samples=10_000,
                    n_anneal=10_000, extra_reports=()):
    """Falsification search for the Y-bounds-L2 inequality (no hypothesis cap
    beyond u - s in L2); reports the smallest margin found."""
    eps = profile.eps
    lam = weight.lam
    kit = ShiftKit(model, profile, weight)
    dx = profile.grid.dx
    dyw = -model.eta2(profile.s_values) * profile.sprime_values
    # amplitude window around the extremal constant-w scale 2 eps / lambda
    target_hi = (2.0 * eps / lam) ** 2 * 4.0 * model.Lambda * eps

    def margin_of(field):
        rep = compute_x_space(model, profile, weight, field, 0.0, kit=kit)
        ok, margin = y_bounds_l2_check(rep, eps, lam, model.Lambda)
        return margin

    min_margin = math.inf
    max_meta: dict = {}
    violations = []
    for field, meta in shock_perturbation_samples(family, model, profile,
                                                  weight, n_samples, target_hi):
        if not meta["hypothesis_ok"]:
            continue
        m = margin_of(field)
        if m < min_margin:
            min_margin = m
            max_meta = meta
        if m < 0.0:
            violations.append(ViolationRecord(
                seed=family.seed, lemma="y-bounds-l2",
                parameters=_fmt_meta(meta), value=float(m),
                hypothesis_ok=True))
    for j, rep in enumerate(extra_reports):
        ok, m = y_bounds_l2_check(rep, eps, lam, model.Lambda)
        if m < min_margin:
            min_margin = m
            max_meta = {"kind": "evolved-snapshot", "index": j}
        if not ok:
            violations.append(ViolationRecord(
                seed=family.seed, lemma="y-bounds-l2",
                parameters=f"snapshot={j}", value=float(m),
                hypothesis_ok=True))

    x = profile.grid.x

    def anneal_objective(params):
        w = _w_from_params(params, x, eps)
        rho = 1.0 / (1.0 + params[-1] ** 2)
        w, got = _scale_to_target(w, dyw, dx, rho * target_hi)
        if got == 0.0:
            return -math.inf
        field = perturbed_field(model, profile, w)
        if not np.all(np.isfinite(field.values)):
            return -math.inf
        if math.isfinite(model.R) and np.max(np.abs(field.values)) >= 0.98 * model.R:
            return -math.inf
        return -margin_of(field)

    n_modes = family.modes
    x0 = np.zeros(2 + 2 * n_modes + 1)
    x0[1] = 1.0 / eps
    x0[2] = 1.0
    step = np.full_like(x0, 0.5)
    step[0] = 0.5 / eps
    step[1] = 0.5 / eps
    t0 = max(target_hi, 1e-12)
    neg_margin, _ = anneal(anneal_objective, x0, n_anneal, step,
                           family.seed + 2, t0)
    anneal_margin = -neg_margin
    if anneal_margin < min_margin:
        min_margin = anneal_margin
        max_meta = {"kind": "anneal"}
    if anneal_margin < 0.0:
        violations.append(ViolationRecord(
            seed=family.seed, lemma="y-bounds-l2", parameters="anneal",
            value=float(anneal_margin), hypothesis_ok=True))
    return YBoundsSearchReport(min_margin=float(min_margin), max_meta=max_meta,
                               anneal_margin=float(anneal_margin),
                               n_samples=n_samples, violations=violations)
