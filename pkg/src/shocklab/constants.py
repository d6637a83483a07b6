"""Frozen empirically calibrated constants.

The stability theory proves existence of various constants without giving
values; the ones the test suite needs are calibrated once by
``scripts/calibrate_constants.py``, written to ``calibrated_constants.txt``
(flat key=value text) and regression-tested from there.  Do not edit the
file by hand; rerun the calibration script instead.
"""

from __future__ import annotations

from pathlib import Path

_FILE = Path(__file__).with_name("calibrated_constants.txt")
_cache: dict[str, float] | None = None


def load():
    global _cache
    if _cache is None:
        values: dict[str, float] = {}
        for raw in _FILE.read_text().splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            values[key.strip()] = float(val.strip())
        _cache = values
    return dict(_cache)


def get(name):
    return load()[name]


def dump_text(values):
    lines = [f"{k} = {v!r}" for k, v in sorted(values.items())]
    return "\n".join(lines) + "\n"


def write(values):
    _FILE.write_text(dump_text(values))
    global _cache
    _cache = None
