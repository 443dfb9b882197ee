"""JSON encoding of scalars, characters and reports."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .linalg_core import GaussianRational

SIGNIFICANT = 12


def _real(x: float):
    x = float(x)
    if not math.isfinite(x):
        return str(x)
    # 12 significant digits keeps float output stable across platforms
    v = float(f"{x:.{SIGNIFICANT}g}")
    return 0.0 if v == 0 else v


def scalar_out(x):
    """Exact scalars become strings, floats ``[re, im]`` pairs."""
    if isinstance(x, GaussianRational):
        return str(x)
    if isinstance(x, Fraction):
        return str(x)
    z = complex(x)
    return [_real(z.real), _real(z.imag)]


def point(ch) -> list:
    return [scalar_out(x) for x in ch.coords]


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _real(obj)
    if isinstance(obj, (complex, np.complexfloating, GaussianRational, Fraction)):
        return scalar_out(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "coords"):
        return point(obj)
    return str(obj)
