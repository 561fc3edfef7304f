"""Deterministic, restartable symbol sources.

Every source produces the same stream after every reset.  Sampled sources
are pure functions of (RNG_ALGORITHM, seed); the counter-based Philox
generator underneath makes the streams reproducible across runs and
platforms, and RNG_ALGORITHM is stamped into every report that depends on
sampling.
"""

from __future__ import annotations

import numpy as np

from .core import Alphabet, BernoulliDistribution
from ._vec import prefix_compose, state_dtype

RNG_ALGORITHM = "philox4x64x10-u53"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


class SequenceSource:
    """Base class: a cursor over an infinite symbol stream."""

    alphabet: Alphabet

    def reset(self) -> None:
        raise NotImplementedError

    def clone(self) -> "SequenceSource":
        raise NotImplementedError

    def take(self, count: int) -> np.ndarray:
        """Return the next `count` symbols and advance the cursor."""
        raise NotImplementedError

    def next_symbol(self) -> int:
        return int(self.take(1)[0])


def sample_prefix(src: SequenceSource, n: int) -> np.ndarray:
    """Reset the source and return exactly its first n symbols."""
    src.reset()
    return src.take(n)


class PeriodicSource(SequenceSource):
    """Endless repetition of a fixed non-empty pattern."""

    def __init__(self, pattern, alphabet: Alphabet | None = None):
        pattern = tuple(int(a) for a in pattern)
        if not pattern:
            raise ValueError("pattern must be non-empty")
        self.pattern = pattern
        self.alphabet = alphabet or Alphabet.finite(max(pattern) + 1)
        for a in pattern:
            self.alphabet.check_symbol(a)
        self._arr = np.asarray(pattern, dtype=np.int64)
        self._pos = 0

    def reset(self) -> None:
        self._pos = 0

    def clone(self) -> "PeriodicSource":
        return PeriodicSource(self.pattern, self.alphabet)

    def take(self, count: int) -> np.ndarray:
        idx = (self._pos + np.arange(count, dtype=np.int64)) % len(self._arr)
        self._pos += count
        return self._arr[idx]


class ChampernowneSource(SequenceSource):
    """Digits of 1, 2, 3, ... written in the given base and concatenated."""

    def __init__(self, base: int):
        if base < 2:
            raise ValueError("base must be >= 2")
        self.base = base
        self.alphabet = Alphabet.finite(base)
        self.reset()

    def reset(self) -> None:
        self._next_number = 1
        self._buffer = np.empty(0, dtype=np.int64)

    def clone(self) -> "ChampernowneSource":
        return ChampernowneSource(self.base)

    def _digits_block(self, lo: int, hi: int, ndigits: int) -> np.ndarray:
        nums = np.arange(lo, hi, dtype=np.int64)
        pows = self.base ** np.arange(ndigits - 1, -1, -1, dtype=np.int64)
        return ((nums[:, None] // pows[None, :]) % self.base).ravel()

    def take(self, count: int) -> np.ndarray:
        chunks = [self._buffer]
        have = len(self._buffer)
        v = self._next_number
        while have < count:
            ndigits = len(np.base_repr(v, self.base))
            block_end = self.base ** ndigits  # first number with one digit more
            need_numbers = (count - have) // ndigits + 1
            hi = min(block_end, v + need_numbers)
            block = self._digits_block(v, hi, ndigits)
            chunks.append(block)
            have += len(block)
            v = hi
        flat = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
        self._next_number = v
        self._buffer = flat[count:]
        return flat[:count]


class BernoulliSource(SequenceSource):
    """I.i.d. symbols drawn from a Bernoulli distribution, seeded."""

    def __init__(self, dist: BernoulliDistribution, seed: int):
        self.dist = dist
        self.seed = int(seed)
        self.alphabet = dist.alphabet
        self.reset()

    def reset(self) -> None:
        self._gen = _rng(self.seed)

    def clone(self) -> "BernoulliSource":
        return BernoulliSource(self.dist, self.seed)

    def take(self, count: int) -> np.ndarray:
        return self.dist.sample(self._gen.random(count))


class MarkovSource(SequenceSource):
    """A stationary finite-state Markov chain emitting its state sequence.

    The first symbol is drawn from `start_dist` (the stationary distribution
    of `matrix` when omitted), later symbols from the matrix row of the
    previous symbol.  Used to realize tabular probability maps of depth 2.
    """

    def __init__(self, matrix, seed: int, start_dist=None):
        p = np.asarray(matrix, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("matrix must be square")
        if np.any(p < 0) or np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-10:
            raise ValueError("matrix rows must be probability vectors")
        self.matrix = p
        self.seed = int(seed)
        self.alphabet = Alphabet.finite(p.shape[0])
        if start_dist is None:
            start_dist = self._stationary(p)
        self.start_dist = np.asarray(start_dist, dtype=np.float64)
        self._row_cdf = np.cumsum(p, axis=1)
        self._start_cdf = np.cumsum(self.start_dist)
        self.reset()

    @staticmethod
    def _stationary(p: np.ndarray) -> np.ndarray:
        k = p.shape[0]
        a = p.T - np.eye(k)
        a[-1, :] = 1.0
        b = np.zeros(k)
        b[-1] = 1.0
        pi = np.linalg.solve(a, b)
        pi = np.clip(pi, 0.0, None)
        return pi / pi.sum()

    def reset(self) -> None:
        self._gen = _rng(self.seed)
        self._state: int | None = None

    def clone(self) -> "MarkovSource":
        return MarkovSource(self.matrix, self.seed, self.start_dist)

    def take(self, count: int) -> np.ndarray:
        if count == 0:
            return np.empty(0, dtype=np.int64)
        out = np.empty(count, dtype=np.int64)
        pos = 0
        if self._state is None:
            u0 = self._gen.random()
            self._state = int(np.searchsorted(self._start_cdf, u0, side="right"))
            self._state = min(self._state, len(self._start_cdf) - 1)
            out[0] = self._state
            pos = 1
        k = self.matrix.shape[0]
        dt = state_dtype(k)
        chunk = 1 << 16
        while pos < count:
            m = min(chunk, count - pos)
            u = self._gen.random(m)
            # maps[i, s] = next state from s under draw u[i]
            maps = (self._row_cdf[None, :, :] <= u[:, None, None]).sum(axis=2).astype(dt)
            np.minimum(maps, k - 1, out=maps)
            prefix_compose(maps)
            states = maps[:, self._state]
            out[pos : pos + m] = states
            self._state = int(states[-1])
            pos += m
        return out


class PairInsertionSource(SequenceSource):
    """An inner stream with a fixed symbol inserted twice at sparse points.

    After inner positions 2, 4, 8, 16, ... (counted in the inner stream) the
    two-symbol block (symbol, symbol) is spliced into the output.  The inner
    stream must never emit the inserted symbol, so its frequency in the
    output decays to zero while every occurrence is followed by the pair's
    second half.
    """

    def __init__(self, inner: SequenceSource, symbol: int, alphabet: Alphabet | None = None):
        self.inner = inner
        self.symbol = int(symbol)
        if alphabet is None:
            if inner.alphabet.is_finite:
                alphabet = Alphabet.finite(max(inner.alphabet.size, self.symbol + 1))
            else:
                alphabet = Alphabet.infinite()
        self.alphabet = alphabet
        self.alphabet.check_symbol(self.symbol)
        self.reset()

    def reset(self) -> None:
        self.inner.reset()
        self._inner_consumed = 0
        self._next_insert = 2
        self._pending = 0

    def clone(self) -> "PairInsertionSource":
        return PairInsertionSource(self.inner.clone(), self.symbol, self.alphabet)

    def take(self, count: int) -> np.ndarray:
        pieces = []
        need = count
        while need > 0:
            if self._pending > 0:
                emit = min(self._pending, need)
                pieces.append(np.full(emit, self.symbol, dtype=np.int64))
                self._pending -= emit
                need -= emit
                continue
            gap = self._next_insert - self._inner_consumed
            t = min(gap, need)
            block = self.inner.take(t)
            if np.any(block == self.symbol):
                raise ValueError("inner stream emitted the inserted symbol")
            pieces.append(block)
            self._inner_consumed += t
            need -= t
            if self._inner_consumed == self._next_insert:
                self._pending = 2
                self._next_insert *= 2
        if not pieces:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(pieces) if len(pieces) > 1 else pieces[0]


def pair_insertion(inner: SequenceSource, symbol: int) -> PairInsertionSource:
    return PairInsertionSource(inner, symbol)
