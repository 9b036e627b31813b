"""Dispatch between the numba kernels and the pure-numpy fallback.

Set ``MOYALRG_DISABLE_NUMBA=1`` to force the fallback.  Every entry point
also accepts ``backend="numba" | "numpy"`` explicitly.
"""
from __future__ import annotations

from ._accel import HAVE_NUMBA, default_backend
from . import _kernels_numpy


def _module(backend: str | None):
    backend = backend or default_backend()
    if backend == "numpy":
        return _kernels_numpy
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        from . import _kernels_numba

        return _kernels_numba
    raise ValueError(f"unknown backend {backend!r}")


def fourpoint_sum(*args, backend: str | None = None):
    return float(_module(backend).fourpoint_sum(*args))


def pair_integral(*args, backend: str | None = None):
    return float(_module(backend).pair_integral(*args))


def mc_weights(*args, backend: str | None = None):
    return _module(backend).mc_weights(*args)
