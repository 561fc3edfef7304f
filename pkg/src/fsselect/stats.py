"""Empirical word frequencies, block statistics and deviation verdicts.

Counters hold exact overlapping window counts (sparse, so infinite
alphabets cost nothing extra) and can be fed incrementally or merged across
a chunk seam without losing the windows that straddle it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._vec import prefix_compose
from .automata import Dfa, SccAnalysis, classify_symbols, scc_analyze, transition_view
from .core import BernoulliDistribution, FirstWitness, ProbabilityMap, Word
from .sequences import _rng


class NotStronglyConnected(ValueError):
    pass


class ZeroPrefixMass(ValueError):
    """The witness prefix has measure zero, so no ratio gap exists."""


def _decode_keys(keys: np.ndarray, length: int, base: int) -> list[Word]:
    out = []
    for key in keys.tolist():
        word = []
        for _ in range(length):
            key, r = divmod(key, base)
            word.append(r)
        out.append(tuple(reversed(word)))
    return out


def _key_counts(keys: np.ndarray, space: int) -> tuple[np.ndarray, np.ndarray]:
    if space <= 1 << 20:  # dense tally beats sorting for small key spaces
        tally = np.bincount(keys, minlength=space)
        vals = np.flatnonzero(tally)
        return vals, tally[vals]
    return np.unique(keys, return_counts=True)


def _window_counts(arr: np.ndarray, length: int) -> dict[Word, int]:
    """Exact overlapping counts of all length-`length` windows of arr."""
    n = len(arr)
    cnt = n - length + 1
    if cnt <= 0:
        return {}
    base = int(arr.max()) + 1
    if length == 1:
        vals, counts = _key_counts(arr, base)
        return {(int(v),): int(c) for v, c in zip(vals, counts)}
    if base ** length < 1 << 62:
        keys = arr[:cnt].astype(np.int64).copy()
        for j in range(1, length):
            keys *= base
            keys += arr[j : cnt + j]
        vals, counts = _key_counts(keys, base ** length)
        words = _decode_keys(vals, length, base)
    else:
        windows = np.stack([arr[j : cnt + j] for j in range(length)], axis=1)
        rows, counts = np.unique(windows, axis=0, return_counts=True)
        words = [tuple(int(x) for x in row) for row in rows]
    return dict(zip(words, (int(c) for c in counts)))


@dataclass
class FrequencyCounter:
    """Sparse overlapping-window counter for all lengths up to max_len.

    Feeding preserves exactness across chunk boundaries by carrying the last
    max_len - 1 symbols.  The entry cap evicts the least recently updated
    words and sets `evicted`, which invalidates exactness and is surfaced in
    reports.
    """

    max_len: int
    counts: dict[Word, int] = field(default_factory=dict)
    n_symbols: int = 0
    head: Word = ()
    tail: Word = ()
    max_entries: int = 1 << 24
    evicted: bool = False

    def feed(self, symbols) -> None:
        arr = np.asarray(symbols, dtype=np.int64)
        if arr.size == 0:
            return
        tail_arr = np.asarray(self.tail, dtype=np.int64)
        whole = np.concatenate([tail_arr, arr]) if len(tail_arr) else arr
        for length in range(1, self.max_len + 1):
            add = _window_counts(whole, length)
            if len(tail_arr):
                for w, c in _window_counts(tail_arr, length).items():
                    add[w] -= c
            self._apply(add)
        if len(self.head) < self.max_len - 1:
            self.head = (self.head + tuple(int(x) for x in arr))[: self.max_len - 1]
        if self.max_len > 1:
            self.tail = tuple(int(x) for x in whole[-(self.max_len - 1):])
        self.n_symbols += int(arr.size)

    def _apply(self, delta: dict[Word, int]) -> None:
        counts = self.counts
        for w, c in delta.items():
            if c == 0:
                continue
            counts[w] = counts.pop(w, 0) + c
        while len(counts) > self.max_entries:
            counts.pop(next(iter(counts)))
            self.evicted = True

    def positions(self, length: int) -> int:
        return max(0, self.n_symbols - length + 1)

    def count(self, w) -> int:
        return self.counts.get(tuple(int(a) for a in w), 0)

    def frequency(self, w) -> float:
        w = tuple(int(a) for a in w)
        pos = self.positions(len(w))
        return self.counts.get(w, 0) / pos if pos > 0 else 0.0

    def words_of_length(self, length: int) -> list[Word]:
        return sorted(w for w in self.counts if len(w) == length)


def count_words(stream, max_len: int) -> FrequencyCounter:
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    counter = FrequencyCounter(max_len=max_len)
    counter.feed(stream)
    return counter


def merge_counters(a: FrequencyCounter, b: FrequencyCounter) -> FrequencyCounter:
    """Combine counters over two consecutive chunks into the whole-stream counter.

    Within-chunk windows add up directly; the windows straddling the seam
    are recovered from a's tail and b's head.
    """
    if a.max_len != b.max_len:
        raise ValueError("counters must share max_len")
    max_len = a.max_len
    out = FrequencyCounter(max_len=max_len, max_entries=max(a.max_entries, b.max_entries))
    merged: dict[Word, int] = dict(a.counts)
    for w, c in b.counts.items():
        merged[w] = merged.get(w, 0) + c
    seam = a.tail + b.head
    cut = len(a.tail)
    for length in range(2, max_len + 1):
        for start in range(max(0, cut - length + 1), cut):
            if start + length > len(seam):
                break
            w = seam[start : start + length]
            merged[w] = merged.get(w, 0) + 1
    out.counts = merged
    out.n_symbols = a.n_symbols + b.n_symbols
    out.head = a.head if a.n_symbols >= max_len - 1 else (a.head + b.head)[: max_len - 1]
    if max_len > 1:
        out.tail = b.tail if b.n_symbols >= max_len - 1 else (a.tail + b.tail)[-(max_len - 1):]
    out.evicted = a.evicted or b.evicted
    return out


@dataclass
class BlockCounter:
    block_len: int
    counts: dict[Word, int]
    blocks_seen: int

    def frequency(self, w) -> float:
        w = tuple(int(a) for a in w)
        return self.counts.get(w, 0) / self.blocks_seen if self.blocks_seen else 0.0


def block_frequencies(stream, n: int) -> BlockCounter:
    """Counts of the consecutive length-n blocks; a trailing partial block is dropped."""
    if n < 1:
        raise ValueError("block length must be >= 1")
    arr = np.asarray(stream, dtype=np.int64)
    k = len(arr) // n
    if k == 0:
        return BlockCounter(block_len=n, counts={}, blocks_seen=0)
    mat = arr[: k * n].reshape(k, n)
    base = int(arr.max()) + 1
    if n == 1:
        vals, counts = _key_counts(mat[:, 0], base)
        words = [(int(v),) for v in vals]
    elif base ** n < 1 << 62:
        keys = mat[:, 0].copy()
        for j in range(1, n):
            keys *= base
            keys += mat[:, j]
        vals, counts = _key_counts(keys, base ** n)
        words = _decode_keys(vals, n, base)
    else:
        rows, counts = np.unique(mat, axis=0, return_counts=True)
        words = [tuple(int(x) for x in row) for row in rows]
    return BlockCounter(block_len=n, counts=dict(zip(words, (int(c) for c in counts))), blocks_seen=k)


class BlockClass(Enum):
    """How a selector treats one block, from every possible start state.

    SPARSE: some start state selects at most the fraction floor of the block.
    BIASED: every start selects enough, but some start's selected symbols
    deviate from the target distribution by at least the tolerance.
    TYPICAL: enough selected everywhere and every frequency close.
    SPARSE takes precedence over BIASED where both hold.
    """

    TYPICAL = "typical"
    SPARSE = "sparse"
    BIASED = "biased"


def _selected_from(dfa: Dfa, start: int, word) -> list[int]:
    sel = []
    q = start
    acc = dfa.accepting
    maps = [dict(rule.exceptions) for rule in dfa.rules]
    defaults = [rule.default for rule in dfa.rules]
    for a in word:
        a = int(a)
        if q in acc:
            sel.append(a)
        q = maps[q].get(a, defaults[q])
    return sel


def classify_block(
    w,
    dfa: Dfa,
    b: float,
    eps: float,
    p: BernoulliDistribution,
    symbol_cut: int = 64,
    analysis: SccAnalysis | None = None,
) -> BlockClass:
    """Classify one block by selection volume and selected-symbol deviations."""
    if not 0.0 < b <= 1.0:
        raise ValueError("b must lie in (0, 1]")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    analysis = analysis or scc_analyze(dfa)
    if not analysis.strongly_connected:
        raise NotStronglyConnected("classification requires a strongly connected selector")
    w = tuple(int(a) for a in w)
    n = len(w)
    selected = [_selected_from(dfa, q, w) for q in range(dfa.state_count)]
    if any(len(sel) <= b * n for sel in selected):
        return BlockClass.SPARSE
    k = p.alphabet.size
    probe = range(min(k, symbol_cut)) if k is not None else range(symbol_cut)
    for sel in selected:
        total = len(sel)
        freqs: dict[int, int] = {}
        for a in sel:
            freqs[a] = freqs.get(a, 0) + 1
        candidates = set(probe) | set(sel)
        dev = max(abs(freqs.get(a, 0) / total - p.prob(a)) for a in candidates)
        if dev >= eps:
            return BlockClass.BIASED
    return BlockClass.TYPICAL


def _wilson(hits: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    phat = hits / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class ClassMeasureEstimate:
    block_len: int
    samples: int
    typical: int
    sparse: int
    biased: int

    @property
    def typical_fraction(self) -> float:
        return self.typical / self.samples

    @property
    def sparse_fraction(self) -> float:
        return self.sparse / self.samples

    @property
    def biased_fraction(self) -> float:
        return self.biased / self.samples

    def wilson(self, cls: BlockClass) -> tuple[float, float]:
        hits = {
            BlockClass.TYPICAL: self.typical,
            BlockClass.SPARSE: self.sparse,
            BlockClass.BIASED: self.biased,
        }[cls]
        return _wilson(hits, self.samples)


def estimate_class_measures(
    dfa: Dfa,
    n: int,
    b: float,
    eps: float,
    p: BernoulliDistribution,
    samples: int,
    seed: int,
    symbol_cut: int = 64,
    chunk: int = 512,
) -> ClassMeasureEstimate:
    """Monte-Carlo class fractions over `samples` blocks of length n drawn from p.

    Every sample is classified exactly as classify_block does, but the runs
    from all start states are carried in one vectorized scan per chunk.
    Finite alphabets only (the acceptance experiments are binary); the
    per-symbol deviation tracks the first min(|alphabet|, symbol_cut) codes.
    """
    if not p.alphabet.is_finite:
        raise ValueError("the vectorized estimator supports finite alphabets only")
    analysis = scc_analyze(dfa)
    if not analysis.strongly_connected:
        raise NotStronglyConnected("estimation requires a strongly connected selector")
    if not dfa.accepting:
        raise ValueError("selector must have at least one accepting state")

    nq = dfa.state_count
    k = min(p.alphabet.size, symbol_cut)
    exc_syms, table = transition_view(dfa)
    acc = np.zeros(nq, dtype=bool)
    for q in dfa.accepting:
        acc[q] = True
    probs = np.array([p.prob(a) for a in range(k)])

    gen = _rng(seed)
    sparse_total = biased_total = 0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        syms = p.sample(gen.random(m * n)).reshape(m, n)
        maps = table[classify_symbols(exc_syms, syms.ravel()).reshape(m, n)]
        prefix_compose(maps)
        sparse_any = np.zeros(m, dtype=bool)
        biased_any = np.zeros(m, dtype=bool)
        for q0 in range(nq):
            before = np.empty((m, n), dtype=maps.dtype)
            before[:, 0] = q0
            before[:, 1:] = maps[:, :-1, q0]
            sel = acc[before]
            lens = sel.sum(axis=1)
            sparse_any |= lens <= b * n
            with np.errstate(divide="ignore", invalid="ignore"):
                for a in range(k):
                    cnt = (sel & (syms == a)).sum(axis=1)
                    dev = np.abs(np.where(lens > 0, cnt / np.maximum(lens, 1), 0.0) - probs[a])
                    biased_any |= dev >= eps
        sparse_total += int(sparse_any.sum())
        biased_total += int((biased_any & ~sparse_any).sum())
        done += m

    typical = samples - sparse_total - biased_total
    return ClassMeasureEstimate(
        block_len=n,
        samples=samples,
        typical=typical,
        sparse=sparse_total,
        biased=biased_total,
    )


@dataclass(frozen=True)
class GapVerdict:
    """Outcome of the witness-gap detection test on a selected output.

    `broken` means the final-checkpoint frequency of the witness's last
    symbol deviates from its target by at least half the ratio gap.  At
    finite length the verdict is one-sided: a miss does not certify
    preservation.
    """

    symbol: int
    mu_symbol: float
    ratio_gap: float
    threshold: float
    checkpoints: tuple[tuple[int, float], ...]
    final_deviation: float
    broken: bool


def witness_gap_report(
    checkpoint_freqs,
    pmap: ProbabilityMap,
    witness: FirstWitness,
) -> GapVerdict:
    """Judge whether selection after the witness prefix broke the distribution.

    `checkpoint_freqs` lists (input length, frequency of the witness's last
    symbol among the symbols selected so far), in increasing input length.
    """
    mu_prefix = pmap.mu(witness.prefix)
    if mu_prefix == 0.0:
        raise ZeroPrefixMass(
            "witness prefix has measure zero; use the zero-atom insertion pathway"
        )
    mu_word = pmap.mu(witness.word)
    mu_sym = pmap.mu((witness.last,))
    ratio_gap = abs(mu_word / mu_prefix - mu_sym)
    threshold = ratio_gap / 2.0
    checkpoints = tuple((int(n), float(f)) for n, f in checkpoint_freqs)
    if not checkpoints:
        raise ValueError("need at least one checkpoint")
    final_dev = abs(checkpoints[-1][1] - mu_sym)
    return GapVerdict(
        symbol=witness.last,
        mu_symbol=mu_sym,
        ratio_gap=ratio_gap,
        threshold=threshold,
        checkpoints=checkpoints,
        final_deviation=final_dev,
        broken=final_dev >= threshold,
    )


def checkpoint_schedule(n: int, first: int = 1 << 10) -> list[int]:
    """Powers of two from `first` up to n, with n itself always last."""
    points = []
    c = first
    while c < n:
        points.append(c)
        c *= 2
    points.append(n)
    return points


@dataclass(frozen=True)
class CheckpointStats:
    input_n: int
    selected_n: int
    rows: tuple[tuple[Word, float, float, float], ...]  # (word, freq, mu, deviation)
    max_deviation: float
    worst_word: Word | None


@dataclass(frozen=True)
class FrequencyReport:
    max_len: int
    checkpoints: tuple[CheckpointStats, ...]
    tolerance: float
    final_max_deviation: float
    passed: bool
    evicted: bool


def _report_words(counter: FrequencyCounter, pmap: ProbabilityMap, max_len: int) -> list[Word]:
    k = pmap.alphabet.size
    words: list[Word] = []
    for length in range(1, max_len + 1):
        if k is not None and k ** length <= 4096:
            words.extend(itertools.product(range(k), repeat=length))
        else:
            words.extend(counter.words_of_length(length))
    return words


def frequency_report(
    selected: np.ndarray,
    positions: np.ndarray,
    input_checkpoints,
    pmap: ProbabilityMap,
    max_len: int,
    tolerance: float,
) -> FrequencyReport:
    """Per-checkpoint deviations of selected-output word frequencies from mu.

    On small finite alphabets every word up to max_len is reported, so
    unobserved positive-measure words count as deviations; otherwise only
    observed words appear.
    """
    stats = []
    evicted = False
    for cp in input_checkpoints:
        upto = int(np.searchsorted(positions, cp, side="right"))
        prefix = selected[:upto]
        counter = count_words(prefix, max_len) if upto else FrequencyCounter(max_len)
        evicted = evicted or counter.evicted
        rows = []
        max_dev = 0.0
        worst = None
        for w in _report_words(counter, pmap, max_len):
            mu = pmap.mu(tuple(w))
            freq = counter.frequency(w)
            dev = abs(freq - mu)
            rows.append((tuple(w), freq, mu, dev))
            if dev > max_dev:
                max_dev = dev
                worst = tuple(w)
        stats.append(
            CheckpointStats(
                input_n=int(cp),
                selected_n=upto,
                rows=tuple(rows),
                max_deviation=max_dev,
                worst_word=worst,
            )
        )
    final = stats[-1].max_deviation if stats else 0.0
    return FrequencyReport(
        max_len=max_len,
        checkpoints=tuple(stats),
        tolerance=tolerance,
        final_max_deviation=final,
        passed=final <= tolerance,
        evicted=evicted,
    )
