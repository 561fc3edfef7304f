"""Shared builders and independent oracles for the test suite."""

import numpy as np

import fsselect as fs
from fsselect.automata import Dfa, StateRule, dfa_from_table, make_rule, scc_analyze


def even_position_dfa() -> Dfa:
    """Two-state cycle on every symbol, accepting after odd-length prefixes.

    Selects the symbols at even positions; the canonical counterexample
    selector on 0101... .
    """
    return dfa_from_table(fs.Alphabet.finite(2), [[1, 1], [0, 0]], start=0, accepting={1})


def ones_parity_dfa() -> Dfa:
    """Self-loop on 0, flip on 1; accepting = even number of ones seen."""
    return Dfa(
        fs.Alphabet.finite(2),
        2,
        0,
        frozenset({0}),
        (StateRule(0, ((1, 1),)), StateRule(1, ((1, 0),))),
    )


def accept_everything(k: int = 2) -> Dfa:
    return Dfa(fs.Alphabet.finite(k), 1, 0, frozenset({0}), (StateRule(0),))


def random_dfa(rng: np.random.Generator, max_states: int = 8, k: int = 3, accept_p: float = 0.5) -> Dfa:
    n = int(rng.integers(1, max_states + 1))
    table = rng.integers(0, n, size=(n, k)).tolist()
    accepting = {q for q in range(n) if rng.random() < accept_p}
    return dfa_from_table(fs.Alphabet.finite(k), table, start=int(rng.integers(n)), accepting=accepting)


def random_infinite_dfa(rng: np.random.Generator, max_states: int = 8, max_exceptions: int = 4) -> Dfa:
    """Random DFA over the infinite alphabet, sparse exception lists."""
    n = int(rng.integers(1, max_states + 1))
    alphabet = fs.Alphabet.infinite()
    rules = []
    for _ in range(n):
        default = int(rng.integers(n))
        n_exc = int(rng.integers(0, max_exceptions + 1))
        syms = rng.choice(100, size=n_exc, replace=False) if n_exc else []
        mapping = {int(s): int(rng.integers(n)) for s in syms}
        rules.append(make_rule(alphabet, default, mapping))
    accepting = {q for q in range(n) if rng.random() < 0.5}
    return Dfa(alphabet, n, int(rng.integers(n)), frozenset(accepting), tuple(rules))


def random_strongly_connected_dfa(
    rng: np.random.Generator,
    max_states: int = 8,
    k: int = 3,
    require_accepting: bool = True,
) -> Dfa:
    while True:
        dfa = random_dfa(rng, max_states=max_states, k=k)
        if require_accepting and not dfa.accepting:
            continue
        if scc_analyze(dfa).strongly_connected:
            return dfa


def naive_count_words(seq, max_len: int) -> dict:
    """Quadratic sliding-window counter; the exactness oracle."""
    seq = tuple(int(a) for a in seq)
    counts = {}
    for length in range(1, max_len + 1):
        for i in range(len(seq) - length + 1):
            w = seq[i : i + length]
            counts[w] = counts.get(w, 0) + 1
    return counts
