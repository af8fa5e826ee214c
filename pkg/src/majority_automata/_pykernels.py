"""Vectorized numpy kernels; the fallback when the compiled core is missing.

States are ``uint8`` arrays of shape ``(batch, V)`` with 1 meaning blue.
Rule codes: 0 majority, 1 biased majority, 2 conservative majority.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def blue_counts(indptr: np.ndarray, indices: np.ndarray, padded: np.ndarray, states: np.ndarray) -> np.ndarray:
    batch, V = states.shape
    ext = np.zeros((batch, V + 1), dtype=np.int32)
    ext[:, :V] = states
    return ext[:, padded].sum(axis=2, dtype=np.int32)


def step_batch(indptr, indices, padded, states: np.ndarray, code: int) -> np.ndarray:
    blue = blue_counts(indptr, indices, padded, states)
    deg = np.diff(indptr).astype(np.int32)
    if code == 2:
        blue = blue + states
        deg = deg + 1
    twice = 2 * blue
    if code == 1:
        return (twice >= deg).astype(np.uint8)
    out = states.copy()
    out[twice > deg] = 1
    out[twice < deg] = 0
    return out


def run_batch(indptr, indices, padded, states: np.ndarray, code: int, max_steps: int):
    """Iterate every row until it repeats the previous or the one-before state.

    Returns ``(steps, period, min_blue, max_blue, finals)``; ``period`` is 0
    for rows that did not close a cycle within ``max_steps``.  The blue-count
    extremes cover every generation from the initial one through the last
    one computed.
    """
    states = np.ascontiguousarray(states, dtype=np.uint8)
    batch = states.shape[0]
    steps = np.full(batch, max_steps, dtype=np.int64)
    period = np.zeros(batch, dtype=np.int8)
    count = states.sum(axis=1, dtype=np.int64)
    min_blue, max_blue = count.copy(), count.copy()
    finals = states.copy()

    live = np.arange(batch)
    cur = states
    older = None
    for k in range(1, max_steps + 1):
        if live.size == 0:
            break
        nxt = step_batch(indptr, indices, padded, cur, code)
        count = nxt.sum(axis=1, dtype=np.int64)
        np.minimum.at(min_blue, live, count)
        np.maximum.at(max_blue, live, count)
        same1 = (nxt == cur).all(axis=1)
        same2 = (nxt == older).all(axis=1) if older is not None else np.zeros_like(same1)
        done = same1 | same2
        period[live[same1]] = 1
        period[live[same2 & ~same1]] = 2
        steps[live[done]] = k
        finals[live[done]] = nxt[done]
        keep = ~done
        live, older, cur = live[keep], cur[keep], nxt[keep]
    finals[live] = cur
    return steps, period, min_blue, max_blue, finals
