"""Streaming selection: apply a DFA to a symbol stream and keep the picks.

A symbol is selected when the state reached after the preceding prefix is
accepting, so the trace records the state occupied *before* each read; the
per-state visit counts therefore sum to the input length.  The engine holds
one state plus fixed-size chunk buffers, never the whole input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._vec import prefix_compose
from .automata import Dfa, SccAnalysis, classify_symbols, scc_analyze, transition_view
from .core import Word
from .sequences import SequenceSource

_VECTOR_STATE_LIMIT = 4096
_VECTOR_MIN_CHUNK = 1024
_CHUNK = 1 << 18


@dataclass
class SelectionTrace:
    input_length: int
    selected: np.ndarray            # selected symbols, in order
    selected_positions: np.ndarray  # 1-based positions into the input
    state_visit_counts: np.ndarray  # before-state counts; sums to input_length
    entered_recurrent_at: int | None  # 1-based position, None if never


def _build_group_tables(t1: np.ndarray):
    """Pre-compose runs of g symbol classes into lookup tables.

    Returns (g, group, expand, pows): `group[code]` is the state mapping of a
    whole g-symbol-class block (big-endian code), `expand[code, j]` the
    mapping of its first j symbols.  Scanning block mappings instead of
    symbol mappings divides the scan work by roughly g.
    """
    n_cls, nq = t1.shape
    g = 1
    while g < 64:
        nxt = g + 1
        if n_cls ** nxt > 4096 or (n_cls ** nxt) * nxt * nq > (1 << 20):
            break
        g = nxt
    if g == 1:
        return 1, t1, None, None
    codes = np.arange(n_cls ** g)
    expand = np.empty((n_cls ** g, g, nq), dtype=t1.dtype)
    expand[:, 0, :] = np.arange(nq, dtype=t1.dtype)[None, :]
    for j in range(1, g):
        digit = (codes // n_cls ** (g - j)) % n_cls
        expand[:, j, :] = np.take_along_axis(t1[digit], expand[:, j - 1, :], axis=-1)
    group = np.take_along_axis(t1[codes % n_cls], expand[:, g - 1, :], axis=-1)
    pows = (n_cls ** np.arange(g - 1, -1, -1)).astype(np.int64)
    return g, group, expand, pows


class _Engine:
    """Incremental selector; feed() chunks, then finish() into a trace."""

    def __init__(self, dfa: Dfa, analysis: SccAnalysis | None = None):
        self.dfa = dfa
        self.analysis = analysis or scc_analyze(dfa)
        self.state = dfa.start
        self.consumed = 0
        self.visits = np.zeros(dfa.state_count, dtype=np.int64)
        self.selected_chunks: list[np.ndarray] = []
        self.position_chunks: list[np.ndarray] = []
        self.entered_recurrent_at: int | None = None

        self._acc = np.zeros(dfa.state_count, dtype=bool)
        for q in dfa.accepting:
            self._acc[q] = True
        self._rec = np.array(
            [self.analysis.is_recurrent_state(q) for q in range(dfa.state_count)],
            dtype=bool,
        )
        self._exc_syms, self._class_table = transition_view(dfa)
        self._step_maps = [dict(rule.exceptions) for rule in dfa.rules]
        self._defaults = [rule.default for rule in dfa.rules]
        if dfa.state_count <= _VECTOR_STATE_LIMIT:
            self._group, self._group_table, self._expand, self._pows = _build_group_tables(
                self._class_table
            )
        else:
            self._group = 1

    def _steps_python(self, symbols: list, before: np.ndarray) -> None:
        q = self.state
        steps = self._step_maps
        defaults = self._defaults
        for i, a in enumerate(symbols):
            before[i] = q
            q = steps[q].get(a, defaults[q])
        self.state = q

    def _before_states(self, symbols: np.ndarray) -> np.ndarray:
        n = len(symbols)
        if self.dfa.state_count > _VECTOR_STATE_LIMIT or n < _VECTOR_MIN_CHUNK:
            before = np.empty(n, dtype=np.int64)
            self._steps_python(symbols.tolist(), before)
            return before
        cls = classify_symbols(self._exc_syms, symbols)
        g = self._group
        if g == 1:
            maps = self._class_table[cls]
            prefix_compose(maps)
            after = maps[:, self.state]
            before = np.empty(n, dtype=after.dtype)
            before[0] = self.state
            before[1:] = after[:-1]
            self.state = int(after[-1])
            return before
        m = n // g
        codes = (cls[: m * g].reshape(m, g) * self._pows).sum(axis=1)
        gmaps = self._group_table[codes]
        prefix_compose(gmaps)
        block_start = np.empty(m, dtype=gmaps.dtype)
        block_start[0] = self.state
        block_start[1:] = gmaps[:-1, self.state]
        idx = block_start.reshape(m, 1, 1).astype(np.int64)
        before_main = np.take_along_axis(self._expand[codes], idx, axis=2)[:, :, 0]
        before = np.empty(n, dtype=np.int64)
        before[: m * g] = before_main.reshape(-1)
        self.state = int(gmaps[-1, self.state])
        if m * g < n:
            tail = before[m * g :]
            self._steps_python(symbols[m * g :].tolist(), tail)
        return before

    def feed(self, symbols: np.ndarray) -> None:
        if len(symbols) == 0:
            return
        symbols = np.asarray(symbols, dtype=np.int64)
        before = self._before_states(symbols)
        self.visits += np.bincount(before, minlength=self.dfa.state_count)
        mask = self._acc[before]
        self.position_chunks.append(self.consumed + np.flatnonzero(mask) + 1)
        self.selected_chunks.append(symbols[mask])
        if self.entered_recurrent_at is None:
            rec = self._rec[before]
            hit = int(np.argmax(rec))
            if rec[hit]:
                self.entered_recurrent_at = self.consumed + hit + 1
        self.consumed += len(symbols)

    def finish(self) -> SelectionTrace:
        selected = (
            np.concatenate(self.selected_chunks)
            if self.selected_chunks
            else np.empty(0, dtype=np.int64)
        )
        positions = (
            np.concatenate(self.position_chunks)
            if self.position_chunks
            else np.empty(0, dtype=np.int64)
        )
        return SelectionTrace(
            input_length=self.consumed,
            selected=selected.astype(np.int64),
            selected_positions=positions,
            state_visit_counts=self.visits,
            entered_recurrent_at=self.entered_recurrent_at,
        )


def select(
    dfa: Dfa,
    src: SequenceSource,
    n: int,
    analysis: SccAnalysis | None = None,
    chunk: int = _CHUNK,
) -> SelectionTrace:
    """Reset the source and select from its first n symbols."""
    if n < 1:
        raise ValueError("n must be >= 1")
    src.reset()
    engine = _Engine(dfa, analysis)
    remaining = n
    while remaining > 0:
        engine.feed(src.take(min(chunk, remaining)))
        remaining = n - engine.consumed
    return engine.finish()


def select_array(dfa: Dfa, symbols, analysis: SccAnalysis | None = None) -> SelectionTrace:
    """Selection trace over an already materialized symbol array."""
    symbols = np.asarray(symbols, dtype=np.int64)
    engine = _Engine(dfa, analysis)
    for i in range(0, len(symbols), _CHUNK):  # chunks keep the scan in cache
        engine.feed(symbols[i : i + _CHUNK])
    return engine.finish()


def select_word(dfa: Dfa, word, analysis: SccAnalysis | None = None) -> SelectionTrace:
    """Selection trace over one finite word."""
    return select_array(dfa, word, analysis)


def selected_word(dfa: Dfa, word) -> Word:
    """Just the selected symbols of a finite word, as a tuple."""
    return tuple(int(a) for a in select_word(dfa, word).selected)


def select_postnikova_oracle(w, input_word) -> Word:
    """Reference selector by naive suffix test, independent of the compilers.

    Position i of the input is selected exactly when the prefix before it
    ends with w; kept deliberately simple-minded to act as an oracle.
    """
    w = tuple(int(a) for a in w)
    if not w:
        raise ValueError("pattern must be non-empty")
    x = tuple(int(a) for a in input_word)
    m = len(w)
    out = []
    for i in range(1, len(x) + 1):
        if i - 1 >= m and x[i - 1 - m : i - 1] == w:
            out.append(x[i - 1])
    return tuple(out)
