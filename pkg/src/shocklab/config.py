"""Experiment configuration: a single flat JSON document.

Recognized keys (all at top level): command, model, eps, nu, lambda, eps0,
L_dom, n_cells, T, cfl, output_interval, kind, amplitude, width, center,
seed, scheme, samples, delta, custom_samples, out.  For sweeps, numeric
fields may hold lists; the cross-product of all list-valued fields is run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field, asdict

import numpy as np

from .errors import ConfigError
from .model import ModelSpec, get_model, model_from_coefficients
from .profile import default_half_width, default_lambda
from .solver import Field

PERTURBATION_KINDS = ("gaussian", "fourier", "translation", "custom-samples")
COMMANDS = ("profile", "evolve", "verify-lemmas", "sweep")

_SWEEPABLE = ("eps", "nu", "lambda", "eps0", "L_dom", "n_cells", "T",
              "amplitude", "width", "center", "seed", "kind", "model")


@dataclass
class ExperimentConfig:
    command: str = "evolve"
    model: object = "burgers"
    eps: float = 0.05
    nu: float = 1.0
    lam: float | None = None          # JSON key "lambda"; default eps**(1/3)
    eps0: float = 0.01
    L_dom: float | None = None        # default 40/eps
    n_cells: int = 1024
    T: float | None = None
    cfl: float = 0.4
    output_interval: float | None = None
    kind: str = "gaussian"
    amplitude: float = 0.0
    width: float = 1.0
    center: float = 0.0
    seed: int = 0
    scheme: str = "central"
    samples: int = 10_000
    delta: float = 0.01
    custom_samples: list | None = None

    def resolved(self):
        """Copy with every defaulted field made explicit."""
        cfg = ExperimentConfig(**{**self.__dict__})
        if cfg.lam is None:
            cfg.lam = default_lambda(cfg.eps)
        if cfg.L_dom is None:
            cfg.L_dom = default_half_width(cfg.eps)
        if cfg.T is not None and cfg.output_interval is None:
            cfg.output_interval = cfg.T / 100.0
        return cfg

    def as_dict(self):
        d = dict(self.__dict__)
        d["lambda"] = d.pop("lam")
        return d


_KEY_MAP = {"lambda": "lam"}


def config_from_dict(doc):
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    cfg = ExperimentConfig()
    known = set(cfg.__dict__) | set(_KEY_MAP)
    for key, value in doc.items():
        attr = _KEY_MAP.get(key, key)
        if attr not in cfg.__dict__:
            raise ConfigError(f"unknown config field {key!r}", field=key)
        setattr(cfg, attr, value)
    return cfg


def load_config(path):
    try:
        text = open(path).read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}", line=exc.lineno) from exc
    return config_from_dict(doc)


def validate_scalar_config(cfg):
    """Validate one concrete (non-sweep) configuration."""

    def positive(name, value):
        if not (isinstance(value, (int, float)) and value > 0):
            raise ConfigError(f"field {name!r} must be positive, got {value!r}",
                              field=name)

    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}", field="command")
    positive("eps", cfg.eps)
    positive("nu", cfg.nu)
    positive("eps0", cfg.eps0)
    if cfg.lam is not None:
        positive("lambda", cfg.lam)
    if cfg.L_dom is not None:
        positive("L_dom", cfg.L_dom)
    if not (isinstance(cfg.n_cells, int) and cfg.n_cells >= 64):
        raise ConfigError("field 'n_cells' must be an integer >= 64",
                          field="n_cells")
    if not (0 < cfg.cfl <= 1.0):
        raise ConfigError("field 'cfl' must lie in (0, 1]", field="cfl")
    if cfg.command in ("evolve", "sweep"):
        if cfg.T is None:
            raise ConfigError("field 'T' is required for evolve", field="T")
        positive("T", cfg.T)
    if cfg.kind not in PERTURBATION_KINDS:
        raise ConfigError(f"unknown perturbation kind {cfg.kind!r}", field="kind")
    if cfg.kind in ("gaussian", "fourier"):
        positive("width", cfg.width)
        L = cfg.L_dom if cfg.L_dom is not None else default_half_width(cfg.eps)
        if abs(cfg.center) + 4.0 * cfg.width > L / 2.0:
            raise ConfigError(
                "perturbation support (center +- 4 width) must lie inside "
                "(-L_dom/2, L_dom/2)", field="center")
    if cfg.kind == "custom-samples" and cfg.custom_samples is None:
        raise ConfigError("kind 'custom-samples' needs field 'custom_samples'",
                          field="custom_samples")
    if cfg.scheme not in ("central", "llf"):
        raise ConfigError(f"unknown scheme {cfg.scheme!r}", field="scheme")


def build_model(spec):
    """Model from a name or from a coefficient document."""
    if isinstance(spec, str):
        return get_model(spec)
    if isinstance(spec, dict):
        try:
            return model_from_coefficients(
                q_poly=spec.get("q_poly", ()),
                eta_poly=spec.get("eta_poly", ()),
                q_trig=[tuple(t) for t in spec.get("q_trig", ())],
                eta_trig=[tuple(t) for t in spec.get("eta_trig", ())],
                radius=spec.get("radius", math.inf),
                name=spec.get("name", "custom"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad model coefficients: {exc}", field="model") from exc
    raise ConfigError("field 'model' must be a name or a coefficient object",
                      field="model")


def build_perturbation(cfg, profile):
    """Perturbation samples on the grid (added to the profile), seeded."""
    x = profile.grid.x
    if cfg.kind == "gaussian":
        z = (x - cfg.center) / cfg.width
        return cfg.amplitude * np.exp(-0.5 * z * z)
    if cfg.kind == "fourier":
        rng = np.random.default_rng(cfg.seed)
        xi = (x - cfg.center) / cfg.width
        env = np.exp(-0.5 * xi * xi)
        w = np.zeros_like(x)
        for m in range(1, 11):
            a, b = rng.normal(), rng.normal()
            w += a * np.cos(0.9 * m * xi) + b * np.sin(0.9 * m * xi)
        w *= env
        peak = np.max(np.abs(w))
        if peak > 0:
            w *= cfg.amplitude / peak
        return w
    if cfg.kind == "translation":
        shifted = profile.interpolator(x - cfg.amplitude)
        return shifted - profile.s_values
    values = np.asarray(cfg.custom_samples, dtype=float)
    if values.shape != x.shape:
        raise ConfigError(
            f"custom_samples must have {x.shape[0]} entries, got {values.shape[0]}",
            field="custom_samples")
    return values


def initial_field(cfg, profile):
    return Field(profile.s_values + build_perturbation(cfg, profile), 0.0)


def sweep_points(cfg):
    """Expand list-valued fields into the sorted cross-product of runs."""
    doc = cfg.as_dict()
    doc.pop("custom_samples", None)
    grid_fields = [(k, doc[k]) for k in _SWEEPABLE
                   if isinstance(doc.get(k), list)]
    if not grid_fields:
        single = config_from_dict({**cfg.as_dict(), "command": "evolve",
                                   "custom_samples": cfg.custom_samples})
        return [single]
    names = [k for k, _ in grid_fields]
    return _expand(cfg, names, [v for _, v in grid_fields])


def _expand(cfg, names, value_lists):
    out = []
    import itertools
    for combo in itertools.product(*value_lists):
        doc = cfg.as_dict()
        doc["custom_samples"] = cfg.custom_samples
        doc.update(dict(zip(names, combo)))
        doc["command"] = "evolve"
        out.append(config_from_dict(doc))
    return out
