"""Kernel selection.

The compiled core is used when it imports; otherwise the numpy kernels.
``MAJORITY_AUTOMATA_BACKEND=python`` forces the fallback and ``=cython``
makes a missing extension an import error.
"""

from __future__ import annotations

import os
from types import ModuleType

import numpy as np

from . import _pykernels

RULE_CODES = {"majority": 0, "biased": 1, "conservative": 2}


def _select() -> ModuleType:
    wanted = os.environ.get("MAJORITY_AUTOMATA_BACKEND", "auto").lower()
    if wanted == "python":
        return _pykernels
    try:
        from . import _ckernels
    except ImportError:
        if wanted == "cython":
            raise
        return _pykernels
    return _ckernels


kernels: ModuleType = _select()


def available() -> dict[str, ModuleType]:
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def blue_counts(t, states: np.ndarray, impl: ModuleType | None = None) -> np.ndarray:
    impl = impl or kernels
    states = np.ascontiguousarray(np.atleast_2d(states), dtype=np.uint8)
    padded = t.padded_neighbors() if impl is _pykernels else None
    return impl.blue_counts(t.indptr, t.indices, padded, states)


def step_batch(t, states: np.ndarray, code: int, impl: ModuleType | None = None) -> np.ndarray:
    impl = impl or kernels
    states = np.ascontiguousarray(np.atleast_2d(states), dtype=np.uint8)
    padded = t.padded_neighbors() if impl is _pykernels else None
    return impl.step_batch(t.indptr, t.indices, padded, states, code)


def run_batch(t, states: np.ndarray, code: int, max_steps: int, impl: ModuleType | None = None):
    impl = impl or kernels
    states = np.ascontiguousarray(np.atleast_2d(states), dtype=np.uint8)
    padded = t.padded_neighbors() if impl is _pykernels else None
    return impl.run_batch(t.indptr, t.indices, padded, states, code, int(max_steps))
