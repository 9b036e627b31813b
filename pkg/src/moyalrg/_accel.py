"""Backend selection: numba when available unless MOYALRG_DISABLE_NUMBA is set."""
from __future__ import annotations

import os

ENV_FLAG = "MOYALRG_DISABLE_NUMBA"


def numba_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:  # pragma: no cover - exercised implicitly
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def default_backend() -> str:
    return "numba" if HAVE_NUMBA and not numba_disabled() else "numpy"


def _identity(fn):
    return fn


if HAVE_NUMBA:
    from numba.extending import register_jitable as jitable
else:  # pragma: no cover
    jitable = _identity
