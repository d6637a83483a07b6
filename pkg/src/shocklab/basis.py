"""Closed function algebra on terms of the form  c * u**n * {1, sin(k u), cos(k u)}.

Flux and entropy functions are stored as lists of such terms.  The algebra is
closed under differentiation, antidifferentiation, argument shifts u -> u + m,
and products, so every derived quantity (entropy flux, normalized flux, ...)
keeps an exact analytic representation and no numerical differentiation is
ever needed in the solver's hot path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

POLY, SIN, COS = 0, 1, 2

_MERGE_TOL = 1e-15


@dataclass(frozen=True)
class Term:
    coef: float
    power: int      # exponent of the monomial factor, >= 0
    trig: int       # POLY, SIN or COS
    freq: float     # trig frequency, > 0 for SIN/COS, 0.0 for POLY

    def __call__(self, u):
        mono = self.coef * np.power(u, self.power) if self.power else self.coef
        if self.trig == POLY:
            return mono if self.power else np.full_like(np.asarray(u, dtype=float), self.coef)
        if self.trig == SIN:
            return mono * np.sin(self.freq * u)
        return mono * np.cos(self.freq * u)


def term(coef, power=0, trig=POLY, freq=0.0):
    return Term(float(coef), int(power), int(trig), float(freq))


def poly(*coeffs):
    """Terms for coeffs[0] + coeffs[1]*u + coeffs[2]*u**2 + ..."""
    return [term(c, n) for n, c in enumerate(coeffs) if c != 0.0]


def _normalized(coef, power, trig, freq):
    """Canonicalize trig frequency sign and zero frequency."""
    if trig == POLY:
        return term(coef, power)
    if freq == 0.0:
        return term(coef, power) if trig == COS else None
    if freq < 0.0:
        if trig == SIN:
            return term(-coef, power, SIN, -freq)
        return term(coef, power, COS, -freq)
    return term(coef, power, trig, freq)


def merge(terms):
    """Combine like terms and drop exact zeros."""
    acc: dict[tuple, float] = {}
    for t in terms:
        if t is None:
            continue
        key = (t.power, t.trig, t.freq)
        acc[key] = acc.get(key, 0.0) + t.coef
    out = [term(c, p, tr, f) for (p, tr, f), c in acc.items() if abs(c) > _MERGE_TOL or c != 0.0]
    return sorted((t for t in out if t.coef != 0.0),
                  key=lambda t: (t.trig, t.freq, t.power))


def evaluate(terms, u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    for t in terms:
        out += t(u)
    return out if out.ndim else float(out)


def derivative(terms):
    out = []
    for t in terms:
        if t.power > 0:
            out.append(term(t.coef * t.power, t.power - 1, t.trig, t.freq))
        elif t.trig == POLY:
            continue
        if t.trig == SIN:
            out.append(term(t.coef * t.freq, t.power, COS, t.freq))
        elif t.trig == COS:
            out.append(term(-t.coef * t.freq, t.power, SIN, t.freq))
    return merge(out)


def antiderivative(terms):
    """Termwise antiderivative (integration constant not fixed)."""
    out = []
    for t in terms:
        out.extend(_anti_one(t.coef, t.power, t.trig, t.freq))
    return merge(out)


def _anti_one(c, n, trig, k):
    if trig == POLY:
        return [term(c / (n + 1), n + 1)]
    # Integration by parts until the monomial factor is exhausted.
    if trig == SIN:
        parts = [term(-c / k, n, COS, k)]
        if n > 0:
            parts.extend(_anti_one(c * n / k, n - 1, COS, k))
        return parts
    parts = [term(c / k, n, SIN, k)]
    if n > 0:
        parts.extend(_anti_one(-c * n / k, n - 1, SIN, k))
    return parts


def shifted(terms, m):
    """Terms of f(u + m) given terms of f."""
    if m == 0.0:
        return merge(terms)
    out = []
    for t in terms:
        binom = [(math.comb(t.power, j) * m ** (t.power - j), j)
                 for j in range(t.power + 1)]
        for c_mono, j in binom:
            c = t.coef * c_mono
            if t.trig == POLY:
                out.append(term(c, j))
            elif t.trig == SIN:
                ck, sk = math.cos(t.freq * m), math.sin(t.freq * m)
                out.append(term(c * ck, j, SIN, t.freq))
                out.append(term(c * sk, j, COS, t.freq))
            else:
                ck, sk = math.cos(t.freq * m), math.sin(t.freq * m)
                out.append(term(c * ck, j, COS, t.freq))
                out.append(term(-c * sk, j, SIN, t.freq))
    return merge(out)


def product(a_terms, b_terms):
    out = []
    for a in a_terms:
        for b in b_terms:
            c = a.coef * b.coef
            n = a.power + b.power
            ta, tb = a.trig, b.trig
            if ta == POLY and tb == POLY:
                out.append(term(c, n))
            elif ta == POLY or tb == POLY:
                t = b if ta == POLY else a
                out.append(term(c, n, t.trig, t.freq))
            else:
                ka, kb = a.freq, b.freq
                if ta == SIN and tb == SIN:
                    out.append(_normalized(0.5 * c, n, COS, ka - kb))
                    out.append(_normalized(-0.5 * c, n, COS, ka + kb))
                elif ta == COS and tb == COS:
                    out.append(_normalized(0.5 * c, n, COS, ka - kb))
                    out.append(_normalized(0.5 * c, n, COS, ka + kb))
                else:
                    ks, kc = (ka, kb) if ta == SIN else (kb, ka)
                    out.append(_normalized(0.5 * c, n, SIN, ks + kc))
                    out.append(_normalized(0.5 * c, n, SIN, ks - kc))
    return merge(out)


def add(a_terms, b_terms):
    return merge(list(a_terms) + list(b_terms))


def scale(terms, c):
    return merge([term(t.coef * c, t.power, t.trig, t.freq) for t in terms])


def as_table(terms):
    """Pack terms into a (n_terms, 4) float array for the jitted kernels.

    Columns: coef, power, trig code, freq.  An empty list packs to a single
    zero row so kernels never see a zero-length table.
    """
    if not terms:
        return np.zeros((1, 4))
    return np.array([[t.coef, float(t.power), float(t.trig), t.freq] for t in terms])
