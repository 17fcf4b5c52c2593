"""Backend selection for the pointwise hot loops.

The compiled Cython module is used when it was built; otherwise, or when the
environment variable ``FRACRD_PURE_PYTHON`` is set to a non-empty value, the
numpy implementation is used.  Both produce bitwise-identical results.
"""
from __future__ import annotations

import importlib
import os

import numpy as np

from . import _pykernels


def load_backend(name: str | None = None):
    """Return the kernel module called ``name`` ("cython" or "numpy").

    With ``name=None`` pick the preferred available backend.
    """
    if name == "numpy":
        return _pykernels
    if name == "cython":
        return importlib.import_module("fracrd._ckernels")
    if name is not None:
        raise ValueError(f"unknown kernel backend {name!r}")
    if os.environ.get("FRACRD_PURE_PYTHON"):
        return _pykernels
    try:
        return importlib.import_module("fracrd._ckernels")
    except ImportError:
        return _pykernels


def available_backends() -> list[str]:
    names = ["numpy"]
    try:
        importlib.import_module("fracrd._ckernels")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


_impl = load_backend()
BACKEND = _impl.NAME


def _flat(x):
    return np.ascontiguousarray(x, dtype=np.float64).reshape(-1)


class Kernels:
    """Shape-preserving wrappers around one backend module."""

    def __init__(self, backend: str | None = None):
        self.impl = _impl if backend is None else load_backend(backend)
        self.name = self.impl.NAME

    def predprey(self, u, v, a, b, c):
        u = np.ascontiguousarray(u, dtype=np.float64)
        v = np.ascontiguousarray(v, dtype=np.float64)
        fu = np.empty_like(u)
        fv = np.empty_like(v)
        self.impl.predprey(u.reshape(-1), v.reshape(-1), float(a), float(b), float(c),
                           fu.reshape(-1), fv.reshape(-1))
        return fu, fv

    def fisher(self, u, r, k):
        u = np.ascontiguousarray(u, dtype=np.float64)
        out = np.empty_like(u)
        self.impl.fisher(u.reshape(-1), float(r), float(k), out.reshape(-1))
        return out

    def lincomb(self, e, x, w, f):
        """``e * x + w * f`` elementwise."""
        x = np.ascontiguousarray(x, dtype=np.float64)
        out = np.empty_like(x)
        self.impl.lincomb(_flat(e), x.reshape(-1), _flat(w), _flat(f), out.reshape(-1))
        return out

    def correct(self, base, q, f1, f0):
        """``base + q * (f1 - f0)`` elementwise."""
        base = np.ascontiguousarray(base, dtype=np.float64)
        out = np.empty_like(base)
        self.impl.correct(base.reshape(-1), _flat(q), _flat(f1), _flat(f0), out.reshape(-1))
        return out


default = Kernels()
