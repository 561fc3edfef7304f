"""Vectorized prefix composition of state mappings.

A deterministic update rule over a small state set [0, Q) applied along a
long axis of steps is a left fold, which numpy cannot express directly.  It
can, however, compose the per-step mappings with a Hillis-Steele scan: after
round r, entry i holds the composite of steps max(0, i - 2^r + 1) .. i, and
after ceil(log2(n)) rounds entry i is the composite of steps 0 .. i.  Each
round is one fancy gather, so the total cost is O(n * Q * log n) in C.
"""

from __future__ import annotations

import numpy as np


def state_dtype(state_count: int):
    if state_count <= 127:
        return np.int8
    if state_count <= 32767:
        return np.int16
    return np.int32


def prefix_compose(maps: np.ndarray) -> np.ndarray:
    """In-place inclusive scan of mappings along axis -2.

    `maps` has shape (..., n, Q) with maps[..., i, s] the state reached from
    s by step i alone.  On return maps[..., i, s] is the state reached from
    s by steps 0..i in order.
    """
    n = maps.shape[-2]
    shift = 1
    while shift < n:
        lead = maps[..., shift:, :]
        lag = maps[..., :-shift, :]
        lead[...] = np.take_along_axis(lead, lag, axis=-1)
        shift *= 2
    return maps


def states_before_steps(maps: np.ndarray, start: int) -> np.ndarray:
    """States occupied just before each step, starting from `start`.

    Consumes `maps` (see prefix_compose).  Output shape is maps.shape[:-1];
    entry i is the state after steps 0..i-1, so entry 0 is `start`.
    """
    prefix_compose(maps)
    after = maps[..., start]
    before = np.empty_like(after)
    before[..., 0] = start
    before[..., 1:] = after[..., :-1]
    return before
