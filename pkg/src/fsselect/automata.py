"""DFAs with finitely many states over possibly infinite alphabets.

Transitions are stored as one default target per state plus a finite,
sorted exception list, which keeps every automaton total even when the
alphabet is countably infinite.  Canonical form: exception symbols strictly
increasing, no exception pointing at the default target, and the default
always realizable (on a finite alphabet the exceptions never cover every
symbol; builders re-base the default to the majority target when needed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._vec import state_dtype
from .core import Alphabet, InvalidSymbol, Word


class InvalidState(ValueError):
    pass


class IncompleteProbeSet(ValueError):
    pass


class EmptyPattern(ValueError):
    pass


class AlphabetMismatch(ValueError):
    pass


@dataclass(frozen=True)
class StateRule:
    """Transition row of one state: exceptions override the default target."""

    default: int
    exceptions: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class Dfa:
    alphabet: Alphabet
    state_count: int
    start: int
    accepting: frozenset[int]
    rules: tuple[StateRule, ...]

    def __post_init__(self) -> None:
        n = self.state_count
        if n < 1:
            raise ValueError("need at least one state")
        if not 0 <= self.start < n:
            raise InvalidState(f"start state {self.start} out of range")
        if not all(0 <= q < n for q in self.accepting):
            raise InvalidState("accepting set contains unknown states")
        if len(self.rules) != n:
            raise ValueError("need exactly one rule per state")
        k = self.alphabet.size
        for q, rule in enumerate(self.rules):
            if not 0 <= rule.default < n:
                raise InvalidState(f"state {q}: default target out of range")
            prev = -1
            for sym, tgt in rule.exceptions:
                if not self.alphabet.contains(sym):
                    raise InvalidSymbol(f"state {q}: exception symbol {sym} outside alphabet")
                if sym <= prev:
                    raise ValueError(f"state {q}: exceptions not strictly sorted by symbol")
                if not 0 <= tgt < n:
                    raise InvalidState(f"state {q}: exception target out of range")
                if tgt == rule.default:
                    raise ValueError(f"state {q}: exception equals the default target")
                prev = sym
            if k is not None and len(rule.exceptions) >= k:
                raise ValueError(f"state {q}: exceptions cover the whole alphabet")

    def exception_symbols(self) -> tuple[int, ...]:
        syms = {sym for rule in self.rules for sym, _ in rule.exceptions}
        return tuple(sorted(syms))


def make_rule(alphabet: Alphabet, default: int, mapping: dict[int, int]) -> StateRule:
    """Canonicalize one transition row.

    `mapping` lists the symbol-indexed overrides; entries equal to the
    default are dropped.  If the overrides of a finite alphabet cover every
    symbol, the default is re-based to the most common target (smallest on
    ties) so that it stays realizable.
    """
    mapping = {int(s): int(t) for s, t in mapping.items()}
    k = alphabet.size
    if k is not None and len(mapping) >= k:
        counts: dict[int, int] = {}
        for t in mapping.values():
            counts[t] = counts.get(t, 0) + 1
        default = min(counts, key=lambda t: (-counts[t], t))
    exceptions = tuple(sorted((s, t) for s, t in mapping.items() if t != default))
    return StateRule(default=default, exceptions=exceptions)


def dfa_from_table(alphabet: Alphabet, table, start: int, accepting) -> Dfa:
    """Build a DFA from a full (state x symbol) transition table (finite alphabets)."""
    if not alphabet.is_finite:
        raise ValueError("full tables require a finite alphabet")
    rules = []
    for row in table:
        if len(row) != alphabet.size:
            raise ValueError("table row length must equal the alphabet size")
        mapping = {a: int(t) for a, t in enumerate(row)}
        counts: dict[int, int] = {}
        for t in mapping.values():
            counts[t] = counts.get(t, 0) + 1
        default = min(counts, key=lambda t: (-counts[t], t))
        rules.append(make_rule(alphabet, default, mapping))
    return Dfa(alphabet, len(rules), start, frozenset(accepting), tuple(rules))


def step(dfa: Dfa, q: int, a: int) -> int:
    if not 0 <= q < dfa.state_count:
        raise InvalidState(f"state {q} out of range")
    dfa.alphabet.check_symbol(a)
    rule = dfa.rules[q]
    for sym, tgt in rule.exceptions:
        if sym == a:
            return tgt
        if sym > a:
            break
    return rule.default


def run_from(dfa: Dfa, q: int, w) -> int:
    for a in w:
        q = step(dfa, q, int(a))
    return q


def run(dfa: Dfa, w) -> int:
    """State reached from the start state after reading w; run(()) is the start."""
    return run_from(dfa, dfa.start, w)


def _edge_targets(dfa: Dfa) -> list[list[int]]:
    """Per state, the distinct reachable targets (default plus exceptions)."""
    out = []
    for rule in dfa.rules:
        targets = {rule.default}
        targets.update(t for _, t in rule.exceptions)
        out.append(sorted(targets))
    return out


@dataclass(frozen=True)
class SccAnalysis:
    component_of: tuple[int, ...]
    components: tuple[tuple[int, ...], ...]
    recurrent: tuple[bool, ...]
    topo_order: tuple[int, ...]

    @property
    def strongly_connected(self) -> bool:
        return len(self.components) == 1

    def is_recurrent_state(self, q: int) -> bool:
        return self.recurrent[self.component_of[q]]


def tarjan_components(adj: list[list[int]]) -> list[list[int]]:
    """SCCs of a directed graph on 0..n-1, iterative, sorted by smallest member."""
    n = len(adj)
    index_of = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index_of[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, ei = work.pop()
            if ei == 0:
                index_of[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while ei < len(adj[v]):
                w = adj[v][ei]
                ei += 1
                if index_of[w] == -1:
                    work.append((v, ei))
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index_of[w])
            if advanced:
                continue
            if low[v] == index_of[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    comps.sort(key=lambda c: c[0])
    return comps


def scc_analyze(dfa: Dfa, probe_symbols=None) -> SccAnalysis:
    """Strongly connected components of the transition multigraph.

    The graph has one edge per exception plus the default edge of every
    state.  `probe_symbols`, when given, must cover every exception symbol;
    it exists so callers holding only a symbol sample can assert that the
    sample actually exercises all distinct edges.  Components are numbered
    by their smallest state id; `topo_order` lists component ids sources
    first; a component is recurrent when no edge leaves it.
    """
    if probe_symbols is not None:
        missing = set(dfa.exception_symbols()) - {int(s) for s in probe_symbols}
        if missing:
            raise IncompleteProbeSet(f"probe set misses exception symbols {sorted(missing)}")

    n = dfa.state_count
    adj = _edge_targets(dfa)
    comps = tarjan_components(adj)
    comp_of = [-1] * n
    for cid, comp in enumerate(comps):
        for q in comp:
            comp_of[q] = cid

    recurrent = []
    for cid, comp in enumerate(comps):
        stays = all(comp_of[t] == cid for q in comp for t in adj[q])
        recurrent.append(stays)

    # Kahn topological order over the component DAG, smallest id first
    nc = len(comps)
    succ: list[set[int]] = [set() for _ in range(nc)]
    indeg = [0] * nc
    for q in range(n):
        for t in adj[q]:
            a, b = comp_of[q], comp_of[t]
            if a != b and b not in succ[a]:
                succ[a].add(b)
                indeg[b] += 1
    ready = sorted(c for c in range(nc) if indeg[c] == 0)
    topo = []
    while ready:
        c = ready.pop(0)
        topo.append(c)
        for b in sorted(succ[c]):
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
        ready.sort()

    return SccAnalysis(
        component_of=tuple(comp_of),
        components=tuple(tuple(c) for c in comps),
        recurrent=tuple(recurrent),
        topo_order=tuple(topo),
    )


def transition_view(dfa: Dfa) -> tuple[np.ndarray, np.ndarray]:
    """Numeric view for vectorized runs.

    Returns (exception symbols, table) where table[c, q] is the state
    reached from q on the c-th exception symbol, and the extra last row is
    the default move shared by every symbol outside all exception lists.
    """
    syms = np.asarray(dfa.exception_symbols(), dtype=np.int64)
    table = np.empty((len(syms) + 1, dfa.state_count), dtype=state_dtype(dfa.state_count))
    for q, rule in enumerate(dfa.rules):
        table[:, q] = rule.default
        lookup = dict(rule.exceptions)
        for c, s in enumerate(syms):
            if int(s) in lookup:
                table[c, q] = lookup[int(s)]
    return syms, table


def classify_symbols(exc_syms: np.ndarray, symbols: np.ndarray) -> np.ndarray:
    """Map symbols to rows of a transition_view table."""
    if len(exc_syms) == 0:
        return np.zeros(len(symbols), dtype=np.int64)
    idx = np.searchsorted(exc_syms, symbols)
    safe = np.minimum(idx, len(exc_syms) - 1)
    return np.where(exc_syms[safe] == symbols, safe, len(exc_syms))


def _labeled_edges(dfa: Dfa, q: int) -> list[tuple[int, int]]:
    """Outgoing (symbol, target) edges of q, ascending by symbol.

    The default edge is represented by the smallest symbol outside the
    exception list (always exists in canonical form).
    """
    rule = dfa.rules[q]
    edges = list(rule.exceptions)
    taken = {s for s, _ in rule.exceptions}
    sym = 0
    while sym in taken:
        sym += 1
    edges.append((sym, rule.default))
    edges.sort()
    return edges


def synchronizing_word_to_recurrent(dfa: Dfa, analysis: SccAnalysis | None = None) -> Word:
    """A word driving every state into a recurrent component.

    Built state by state: keep extending the word with a shortest path
    (smallest symbols first) from the current image of the next state into
    a recurrent component.  Earlier states stay put because recurrent
    components cannot be left.  Returns the empty word when every state is
    already recurrent.
    """
    if analysis is None:
        analysis = scc_analyze(dfa)
    word: list[int] = []
    for q in range(dfa.state_count):
        r = run_from(dfa, q, word)
        if analysis.is_recurrent_state(r):
            continue
        word.extend(_bfs_to_recurrent(dfa, r, analysis))
    return tuple(word)


def _bfs_to_recurrent(dfa: Dfa, src: int, analysis: SccAnalysis) -> list[int]:
    seen = {src: (None, None)}
    queue = [src]
    while queue:
        v = queue.pop(0)
        for sym, tgt in _labeled_edges(dfa, v):
            if tgt in seen:
                continue
            seen[tgt] = (v, sym)
            if analysis.is_recurrent_state(tgt):
                path = []
                node = tgt
                while seen[node][0] is not None:
                    prev, s = seen[node]
                    path.append(s)
                    node = prev
                return path[::-1]
            queue.append(tgt)
    raise AssertionError("a recurrent component is always reachable")


_SUFFIX_TABLE_GUARD = 20


def compile_postnikova_suffix_table(w, alphabet: Alphabet | None = None) -> Dfa:
    """Suffix-tracking selector with one state per suffix-match bit vector.

    State bit j is set when the last j+1 input symbols equal the first j+1
    pattern symbols; the automaton accepts exactly after reading the whole
    pattern, i.e. when the top bit is set.  Uses 2**len(w) states, so the
    pattern length is capped at 20; the failure-function compiler below is
    the production equivalent.
    """
    w = tuple(int(a) for a in w)
    if not w:
        raise EmptyPattern("pattern must be non-empty")
    m = len(w)
    if m > _SUFFIX_TABLE_GUARD:
        raise ValueError(f"pattern longer than {_SUFFIX_TABLE_GUARD}; use the failure-function compiler")
    if alphabet is None:
        alphabet = Alphabet.infinite()
    n = 1 << m
    rules = []
    for s in range(n):
        mapping = {}
        for a in sorted(set(w)):
            c = 0
            if a == w[0]:
                c |= 1
            for j in range(1, m):
                if (s >> (j - 1)) & 1 and a == w[j]:
                    c |= 1 << j
            mapping[a] = c
        rules.append(make_rule(alphabet, 0, mapping))
    accepting = frozenset(s for s in range(n) if (s >> (m - 1)) & 1)
    return Dfa(alphabet, n, 0, accepting, tuple(rules))


def failure_function(w: tuple[int, ...]) -> list[int]:
    """fail[i] = length of the longest proper suffix of w[:i] that is a prefix of w.

    fail[0] = -1 by convention so that mismatch fallback terminates at state 0.
    """
    m = len(w)
    fail = [0] * (m + 1)
    fail[0] = -1
    for i in range(1, m + 1):
        f = fail[i - 1]
        while f != -1 and w[f] != w[i - 1]:
            f = fail[f]
        fail[i] = f + 1
    return fail


def compile_postnikova_kmp(w, alphabet: Alphabet | None = None) -> Dfa:
    """Failure-function selector: state = longest pattern prefix matching a suffix.

    len(w)+1 states; accepts in the full-match state, so the symbol after
    every (overlapping) occurrence of w is selected.  Symbols outside the
    pattern reset to state 0.
    """
    w = tuple(int(a) for a in w)
    if not w:
        raise EmptyPattern("pattern must be non-empty")
    m = len(w)
    if alphabet is None:
        alphabet = Alphabet.infinite()
    fail = failure_function(w)

    def advance(q: int, a: int) -> int:
        if q == m:
            q = fail[m]
        while q >= 0 and w[q] != a:
            q = fail[q]
        return q + 1

    rules = []
    for q in range(m + 1):
        mapping = {a: advance(q, a) for a in sorted(set(w))}
        rules.append(make_rule(alphabet, 0, mapping))
    return Dfa(alphabet, m + 1, 0, frozenset({m}), tuple(rules))


def compose(a: Dfa, b: Dfa) -> Dfa:
    """Chain two selectors: the result selects from w what b selects from a's output.

    Product construction on reachable state pairs.  While the a-coordinate
    is non-accepting only a moves; when it accepts, the next symbol is part
    of a's output, so b consumes it too.  A pair accepts when both halves
    accept.  Unreachable pairs are pruned; pruning cannot change behavior.
    """
    if a.alphabet != b.alphabet:
        raise AlphabetMismatch(f"{a.alphabet} vs {b.alphabet}")
    alphabet = a.alphabet

    start = (a.start, b.start)
    ids: dict[tuple[int, int], int] = {start: 0}
    order = [start]
    moves: list[tuple[dict[int, tuple[int, int]], tuple[int, int] | None]] = []
    i = 0
    while i < len(order):
        qa, qb = order[i]
        a_rule = a.rules[qa]
        if qa in a.accepting:
            syms = sorted({s for s, _ in a_rule.exceptions} | {s for s, _ in b.rules[qb].exceptions})
            default_pair = (a_rule.default, b.rules[qb].default)
            pairs = {s: (step(a, qa, s), step(b, qb, s)) for s in syms}
        else:
            syms = [s for s, _ in a_rule.exceptions]
            default_pair = (a_rule.default, qb)
            pairs = {s: (step(a, qa, s), qb) for s in syms}
        if alphabet.is_finite and len(pairs) >= alphabet.size:
            default_pair = None  # every symbol is listed; the default is phantom
        targets = list(pairs.values()) + ([default_pair] if default_pair is not None else [])
        for p in targets:
            if p not in ids:
                ids[p] = len(order)
                order.append(p)
        moves.append((pairs, default_pair))
        i += 1

    rules = []
    for pairs, default_pair in moves:
        mapping = {s: ids[p] for s, p in pairs.items()}
        if default_pair is None:
            rules.append(make_rule(alphabet, 0, mapping))  # rebased to the majority target
        else:
            default = ids[default_pair]
            kept = tuple(sorted((s, t) for s, t in mapping.items() if t != default))
            rules.append(StateRule(default=default, exceptions=kept))
    accepting = frozenset(
        ids[p] for p in order if p[0] in a.accepting and p[1] in b.accepting
    )
    return Dfa(alphabet, len(order), 0, accepting, tuple(rules))


def dfa_to_dict(dfa: Dfa) -> dict:
    return {
        "alphabet": (
            {"kind": "finite", "size": dfa.alphabet.size}
            if dfa.alphabet.is_finite
            else {"kind": "infinite"}
        ),
        "state_count": dfa.state_count,
        "start": dfa.start,
        "accepting": sorted(dfa.accepting),
        "states": [
            {"default": rule.default, "exceptions": [[s, t] for s, t in rule.exceptions]}
            for rule in dfa.rules
        ],
    }


def dfa_from_dict(doc: dict) -> Dfa:
    """Parse the serialized form; canonical-form violations raise."""
    try:
        alpha_doc = doc["alphabet"]
        if alpha_doc["kind"] == "finite":
            alphabet = Alphabet.finite(int(alpha_doc["size"]))
        elif alpha_doc["kind"] == "infinite":
            alphabet = Alphabet.infinite()
        else:
            raise ValueError(f"unknown alphabet kind {alpha_doc['kind']!r}")
        rules = tuple(
            StateRule(
                default=int(state["default"]),
                exceptions=tuple((int(s), int(t)) for s, t in state["exceptions"]),
            )
            for state in doc["states"]
        )
        return Dfa(
            alphabet=alphabet,
            state_count=int(doc["state_count"]),
            start=int(doc["start"]),
            accepting=frozenset(int(q) for q in doc["accepting"]),
            rules=rules,
        )
    except KeyError as exc:
        raise ValueError(f"selector document is missing field {exc}") from exc
    except TypeError as exc:
        raise ValueError(f"malformed selector document: {exc}") from exc


def save_dfa(dfa: Dfa, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dfa_to_dict(dfa), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dfa(path) -> Dfa:
    with open(path, encoding="utf-8") as fh:
        return dfa_from_dict(json.load(fh))
