"""Alphabets, words, Bernoulli distributions and probability maps.

Symbols are dense non-negative integer codes.  A word is a tuple of codes;
the empty tuple is the empty word and always has measure 1.  Probability
maps assign a measure to every finite word such that the measures of all
words of a fixed length sum to 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

Word = tuple[int, ...]

EMPTY_WORD: Word = ()

PI_SQ_SIXTH = math.pi * math.pi / 6.0


class InvalidSymbol(ValueError):
    """A symbol code is outside the ambient alphabet."""


class WordTooLong(ValueError):
    """A tabular map was queried beyond its depth."""


@dataclass(frozen=True)
class Alphabet:
    """A finite alphabet of `size` codes, or a countably infinite one (size=None)."""

    size: int | None = None

    def __post_init__(self) -> None:
        if self.size is not None and self.size < 1:
            raise ValueError("finite alphabet size must be >= 1")

    @classmethod
    def finite(cls, size: int) -> "Alphabet":
        return cls(size=size)

    @classmethod
    def infinite(cls) -> "Alphabet":
        return cls(size=None)

    @property
    def is_finite(self) -> bool:
        return self.size is not None

    def contains(self, symbol: int) -> bool:
        if symbol < 0 or symbol != int(symbol):
            return False
        return self.size is None or symbol < self.size

    def check_symbol(self, symbol: int) -> None:
        if not self.contains(symbol):
            raise InvalidSymbol(f"symbol {symbol!r} not in {self}")

    def check_word(self, w) -> Word:
        w = tuple(int(a) for a in w)
        for a in w:
            self.check_symbol(a)
        return w

    def __str__(self) -> str:
        return "Sigma(inf)" if self.size is None else f"Sigma({self.size})"


def _trigamma(x: float) -> float:
    """Sum of 1/k^2 for k >= x (x a positive integer), to full double precision.

    Uses the recurrence to shift the argument above 64 and then the standard
    asymptotic expansion, so it stays accurate for both small and huge x.
    """
    acc = 0.0
    while x < 64:
        acc += 1.0 / (x * x)
        x += 1
    inv = 1.0 / x
    inv2 = inv * inv
    # asymptotic series: 1/x + 1/(2x^2) + 1/(6x^3) - 1/(30x^5) + 1/(42x^7)
    tail = inv * (1.0 + inv * (0.5 + inv * (1.0 / 6.0 + inv2 * (-1.0 / 30.0 + inv2 / 42.0))))
    return acc + tail


_EXPLICIT = "explicit"
_GEOMETRIC = "geometric"
_INVERSE_SQUARE = "inverse_square"

_INV_SQUARE_TABLE_LEN = 1 << 16
_GEOMETRIC_TABLE_LEN = 1 << 12


@dataclass(frozen=True)
class BernoulliDistribution:
    """A probability distribution on symbol codes.

    Three families: explicit weights on a finite alphabet, the geometric
    family p(n) = (1-ratio) * ratio**n on the infinite alphabet, and the
    inverse-square family p(n) = (6/pi^2) / (n+1)^2 on the infinite alphabet.
    """

    alphabet: Alphabet
    kind: str
    weights: tuple[float, ...] | None = None
    ratio: float | None = None
    _cdf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind == _EXPLICIT:
            if not self.alphabet.is_finite:
                raise ValueError("explicit weights require a finite alphabet")
            if self.weights is None or len(self.weights) != self.alphabet.size:
                raise ValueError("need one weight per alphabet symbol")
            if any(w < 0.0 for w in self.weights):
                raise ValueError("weights must be non-negative")
            if abs(sum(self.weights) - 1.0) > 1e-12:
                raise ValueError("weights must sum to 1 within 1e-12")
            cdf = np.cumsum(np.asarray(self.weights, dtype=np.float64))
        elif self.kind == _GEOMETRIC:
            if self.alphabet.is_finite:
                raise ValueError("geometric family lives on the infinite alphabet")
            if self.ratio is None or not (0.0 < self.ratio < 1.0):
                raise ValueError("ratio must lie in (0, 1)")
            n = np.arange(_GEOMETRIC_TABLE_LEN, dtype=np.float64)
            cdf = 1.0 - self.ratio ** (n + 1.0)
        elif self.kind == _INVERSE_SQUARE:
            if self.alphabet.is_finite:
                raise ValueError("inverse-square family lives on the infinite alphabet")
            n = np.arange(_INV_SQUARE_TABLE_LEN, dtype=np.float64)
            cdf = np.cumsum(1.0 / (PI_SQ_SIXTH * (n + 1.0) ** 2))
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        object.__setattr__(self, "_cdf", cdf)

    @classmethod
    def explicit(cls, weights) -> "BernoulliDistribution":
        weights = tuple(float(w) for w in weights)
        return cls(Alphabet.finite(len(weights)), _EXPLICIT, weights=weights)

    @classmethod
    def geometric(cls, ratio: float) -> "BernoulliDistribution":
        return cls(Alphabet.infinite(), _GEOMETRIC, ratio=float(ratio))

    @classmethod
    def inverse_square(cls) -> "BernoulliDistribution":
        return cls(Alphabet.infinite(), _INVERSE_SQUARE)

    def prob(self, symbol: int) -> float:
        self.alphabet.check_symbol(symbol)
        if self.kind == _EXPLICIT:
            return self.weights[symbol]
        if self.kind == _GEOMETRIC:
            return (1.0 - self.ratio) * self.ratio ** symbol
        return 1.0 / (PI_SQ_SIXTH * (symbol + 1) ** 2)

    @property
    def positive(self) -> bool:
        if self.kind == _EXPLICIT:
            return all(w > 0.0 for w in self.weights)
        return True

    def zero_symbols(self) -> tuple[int, ...]:
        if self.kind == _EXPLICIT:
            return tuple(a for a, w in enumerate(self.weights) if w == 0.0)
        return ()

    def tail_mass(self, cut: int) -> float:
        """Total mass of symbols with code >= cut (exact, analytic)."""
        if cut <= 0:
            return 1.0
        if self.kind == _EXPLICIT:
            return float(sum(self.weights[cut:]))
        if self.kind == _GEOMETRIC:
            return self.ratio ** cut
        return _trigamma(cut + 1) / PI_SQ_SIXTH

    def sample(self, uniforms: np.ndarray) -> np.ndarray:
        """Map uniform [0,1) draws to symbol codes by inverse CDF.

        Finite alphabets and table-covered codes resolve by binary search on
        the cumulative table; draws beyond the table use the family's
        analytic tail inverse.
        """
        u = np.asarray(uniforms, dtype=np.float64)
        if self.kind == _EXPLICIT and len(self._cdf) == 2:
            return (u >= self._cdf[0]).astype(np.int64)
        idx = np.searchsorted(self._cdf, u, side="right")
        if self.kind == _EXPLICIT:
            return np.minimum(idx, len(self._cdf) - 1).astype(np.int64, copy=False)
        table_len = len(self._cdf)
        out = idx.astype(np.int64)
        overflow = np.flatnonzero(idx >= table_len)
        for i in overflow:
            out[i] = self._tail_inverse(float(u[i]))
        return out

    def _tail_inverse(self, u: float) -> int:
        rest = 1.0 - u
        if self.kind == _GEOMETRIC:
            n = int(math.log(rest) / math.log(self.ratio))
            return max(n, len(self._cdf))
        # inverse-square: smallest n with tail mass beyond code n at most rest
        lo = len(self._cdf)
        hi = lo
        while self.tail_mass(hi + 1) > rest:
            hi = hi * 2 + 1
            if hi > 1 << 62:
                break
        while lo < hi:
            mid = (lo + hi) // 2
            if self.tail_mass(mid + 1) <= rest:
                hi = mid
            else:
                lo = mid + 1
        return lo


class ProbabilityMap:
    """Base for maps w -> mu(w) with sum over each word length equal to 1."""

    alphabet: Alphabet
    depth: int | None = None  # None: defined for all word lengths

    def mu(self, w: Word) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class BernoulliMap(ProbabilityMap):
    """Product map mu(a_1 ... a_n) = p(a_1) * ... * p(a_n)."""

    dist: BernoulliDistribution

    @property
    def alphabet(self) -> Alphabet:
        return self.dist.alphabet

    @property
    def depth(self) -> None:
        return None

    def mu(self, w: Word) -> float:
        out = 1.0
        for a in w:
            out *= self.dist.prob(a)
        return out


@dataclass(frozen=True)
class TabularMap(ProbabilityMap):
    """Finite-depth map given by an explicit table over a finite alphabet."""

    table_alphabet: Alphabet
    table_depth: int
    table: dict[Word, float]

    def __post_init__(self) -> None:
        if not self.table_alphabet.is_finite:
            raise ValueError("tabular maps require a finite alphabet")
        if self.table_depth < 1:
            raise ValueError("depth must be >= 1")
        k = self.table_alphabet.size
        for n in range(1, self.table_depth + 1):
            total = 0.0
            for w in itertools.product(range(k), repeat=n):
                if w not in self.table:
                    raise ValueError(f"table is missing the length-{n} word {w}")
                v = self.table[w]
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"table value out of range for {w}")
                total += v
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"length-{n} table values sum to {total}, not 1")

    @property
    def alphabet(self) -> Alphabet:
        return self.table_alphabet

    @property
    def depth(self) -> int:
        return self.table_depth

    def mu(self, w: Word) -> float:
        if len(w) == 0:
            return 1.0
        if len(w) > self.table_depth:
            raise WordTooLong(f"word of length {len(w)} exceeds table depth {self.table_depth}")
        w = self.table_alphabet.check_word(w)
        return self.table[w]


@dataclass(frozen=True)
class AlternatingMap(ProbabilityMap):
    """Binary map giving mass 1/2 to each of the two alternating words per length.

    mu(w) = 1/2 when w never repeats a symbol twice in a row, 0 otherwise.
    Exactly two words of every positive length carry mass, so the map is a
    probability map, and 0101... is distributed according to it.  It is not
    a product of per-symbol probabilities.
    """

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet.finite(2)

    @property
    def depth(self) -> None:
        return None

    def mu(self, w: Word) -> float:
        w = self.alphabet.check_word(w)
        if len(w) == 0:
            return 1.0
        for x, y in zip(w, w[1:]):
            if x == y:
                return 0.0
        return 0.5


def mu_of(pmap: ProbabilityMap, w) -> float:
    """Evaluate mu(w); the empty word always gets 1."""
    w = pmap.alphabet.check_word(w)
    return pmap.mu(w)


@dataclass(frozen=True)
class InvarianceRow:
    word: Word
    right_residual: float  # | sum_a mu(w a) - mu(w) |
    left_residual: float   # | sum_a mu(a w) - mu(w) |


@dataclass(frozen=True)
class InvarianceReport:
    depth: int
    rows: tuple[InvarianceRow, ...]
    max_right: float
    max_left: float
    threshold: float
    tail_bound: float
    truncated: bool
    invariant: bool


def check_invariance(
    pmap: ProbabilityMap,
    depth: int,
    tail_cut: int = 1024,
    word_symbol_cut: int = 8,
) -> InvarianceReport:
    """Check sum_a mu(wa) = sum_a mu(aw) = mu(w) for every |w| < depth.

    Finite alphabets are summed exactly.  On infinite alphabets the sums are
    truncated at `tail_cut` symbol codes and compared against the analytic
    tail bound of the distribution family; the checked words themselves
    range over the first `word_symbol_cut` codes.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    alphabet = pmap.alphabet
    if alphabet.is_finite:
        ext_symbols = range(alphabet.size)
        word_symbols = range(alphabet.size)
        tail_bound = 0.0
        truncated = False
    else:
        if not isinstance(pmap, BernoulliMap):
            raise ValueError("only Bernoulli maps are supported on infinite alphabets")
        ext_symbols = range(tail_cut)
        word_symbols = range(word_symbol_cut)
        tail_bound = pmap.dist.tail_mass(tail_cut)
        truncated = True
    threshold = tail_bound + 1e-6

    rows = []
    for n in range(depth):
        for w in itertools.product(word_symbols, repeat=n):
            m = pmap.mu(w)
            right = sum(pmap.mu(w + (a,)) for a in ext_symbols)
            left = sum(pmap.mu((a,) + w) for a in ext_symbols)
            rows.append(InvarianceRow(w, abs(right - m), abs(left - m)))
    max_right = max(r.right_residual for r in rows)
    max_left = max(r.left_residual for r in rows)
    return InvarianceReport(
        depth=depth,
        rows=tuple(rows),
        max_right=max_right,
        max_left=max_left,
        threshold=threshold,
        tail_bound=tail_bound,
        truncated=truncated,
        invariant=max_right < threshold and max_left < threshold,
    )


@dataclass(frozen=True)
class FirstWitness:
    """Shortest, lexicographically first word whose measure breaks the product form.

    `word` is w plus one extension symbol; `gap` is
    |mu(word) - mu(word[:-1]) * mu(word[-1:])|.
    """

    word: Word
    gap: float

    @property
    def prefix(self) -> Word:
        return self.word[:-1]

    @property
    def last(self) -> int:
        return self.word[-1]


def is_bernoulli_within(
    pmap: ProbabilityMap,
    depth: int,
    tol: float,
    symbol_cut: int = 64,
) -> FirstWitness | None:
    """Search for the first product-form violation up to the given depth.

    Scans word lengths 2..depth in order and words of each length in
    lexicographic symbol order, so the returned witness is reproducible and
    minimal.  Returns None when every scanned word satisfies
    mu(w a) = mu(w) mu(a) within tol.  Infinite alphabets are scanned over
    the first `symbol_cut` codes.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    if pmap.depth is not None and depth > pmap.depth:
        raise WordTooLong(f"depth {depth} exceeds map depth {pmap.depth}")
    k = pmap.alphabet.size if pmap.alphabet.is_finite else symbol_cut
    for n in range(2, depth + 1):
        for w in itertools.product(range(k), repeat=n):
            gap = abs(pmap.mu(w) - pmap.mu(w[:-1]) * pmap.mu(w[-1:]))
            if gap > tol:
                return FirstWitness(word=w, gap=gap)
    return None
