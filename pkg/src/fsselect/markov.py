"""The Markov chain a selector induces on its states under a Bernoulli source.

Entry (i, j) of the chain matrix is the total probability mass of symbols
moving state i to state j.  With the default-plus-exceptions encoding this
is a finite sum: each exception contributes its atom and the default edge
receives the exact complement mass, so infinite alphabets never need to be
enumerated.  The stationary distribution predicts long-run selection rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .automata import Dfa, SccAnalysis, run, scc_analyze, synchronizing_word_to_recurrent, tarjan_components
from .core import BernoulliDistribution
from .selection import SelectionTrace, select
from .sequences import RNG_ALGORITHM, BernoulliSource
from .stats import NotStronglyConnected


class NotIrreducible(ValueError):
    """The matrix support has more than one closed class."""


@dataclass(eq=False)
class InducedChain:
    states: tuple[int, ...]          # original state ids behind each row
    matrix: np.ndarray               # row-stochastic over those states
    pi: np.ndarray                   # stationary distribution
    rate_floor: float | None         # min pi over accepting states, None if none
    predicted_selection_rate: float  # sum of pi over accepting states
    irreducible: bool
    expected_return_times: np.ndarray  # 1 / pi

    @property
    def state_index(self) -> dict[int, int]:
        return {q: i for i, q in enumerate(self.states)}


def stationary(matrix: np.ndarray, residual_tol: float = 1e-12) -> np.ndarray:
    """Stationary distribution of an irreducible row-stochastic matrix.

    Solved densely by replacing one balance equation with the normalization
    constraint; falls back to damped power iteration if the solve goes
    numerically bad.  Irreducibility is decided structurally on the support
    graph, not numerically.
    """
    p = np.asarray(matrix, dtype=np.float64)
    n = p.shape[0]
    if p.ndim != 2 or p.shape[1] != n:
        raise ValueError("matrix must be square")
    if np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-10:
        raise ValueError("matrix rows must sum to 1")
    adj = [list(np.flatnonzero(p[i] > 0.0)) for i in range(n)]
    if len(tarjan_components(adj)) != 1:
        raise NotIrreducible("support graph is not strongly connected")

    pi = None
    try:
        a = p.T - np.eye(n)
        a[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        pi = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        pi = None
    if pi is not None:
        pi = np.clip(pi, 0.0, None)
        s = pi.sum()
        if s > 0:
            pi = pi / s
            if np.abs(pi @ p - pi).sum() < residual_tol:
                return pi
    # damped power iteration
    pi = np.full(n, 1.0 / n)
    for _ in range(200000):
        nxt = 0.5 * pi + 0.5 * (pi @ p)
        if np.abs(nxt - pi).sum() < 1e-13:
            pi = nxt
            break
        pi = nxt
    return pi / pi.sum()


def induce_chain(
    dfa: Dfa,
    p: BernoulliDistribution,
    tail_cut: int | None = None,
    analysis: SccAnalysis | None = None,
) -> InducedChain:
    """Chain on the recurrent part of the selector under symbol distribution p.

    A strongly connected selector keeps all its states.  Otherwise the chain
    is induced on the recurrent component that the start state reaches via
    the synchronizing word, mirroring how any run ends up there; transient
    states carry no stationary mass and are dropped.  `tail_cut` is accepted
    for symmetry with enumeration-based diagnostics but the complement-mass
    construction is exact without it.
    """
    del tail_cut
    analysis = analysis or scc_analyze(dfa)
    if analysis.strongly_connected:
        states = tuple(range(dfa.state_count))
    else:
        word = synchronizing_word_to_recurrent(dfa, analysis)
        home = analysis.component_of[run(dfa, word)]
        states = tuple(analysis.components[home])
    index = {q: i for i, q in enumerate(states)}
    n = len(states)
    matrix = np.zeros((n, n), dtype=np.float64)
    for q in states:
        i = index[q]
        rule = dfa.rules[q]
        mass_to_default = 1.0
        for sym, tgt in rule.exceptions:
            atom = p.prob(sym)
            matrix[i, index[tgt]] += atom
            mass_to_default -= atom
        matrix[i, index[rule.default]] += mass_to_default

    try:
        pi = stationary(matrix)
        irreducible = True
    except NotIrreducible:
        # possible when p has zero atoms that sever the positive support
        irreducible = False
        pi = np.full(n, np.nan)

    accepting = [index[q] for q in states if q in dfa.accepting]
    if accepting and irreducible:
        rate_floor = float(min(pi[i] for i in accepting))
        predicted = float(sum(pi[i] for i in accepting))
    else:
        rate_floor = None
        predicted = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        return_times = np.where(pi > 0, 1.0 / pi, np.inf)
    return InducedChain(
        states=states,
        matrix=matrix,
        pi=pi,
        rate_floor=rate_floor,
        predicted_selection_rate=predicted,
        irreducible=irreducible,
        expected_return_times=return_times,
    )


@dataclass(eq=False)
class PredictionReport:
    chain: InducedChain
    n: int
    seed: int
    rng_algorithm: str
    empirical_rate: float
    rate_error: float
    visit_fractions: np.ndarray
    max_visit_error: float
    tolerance: float
    within_tolerance: bool
    trace: SelectionTrace


def predict_and_compare(dfa: Dfa, p: BernoulliDistribution, src: BernoulliSource, n: int) -> PredictionReport:
    """Run the selector on sampled input and compare against the chain's forecast.

    The tolerance is the conservative central-limit scale 5 * sqrt(0.25/n)
    applied to both the selection rate and every state-visit fraction.
    """
    analysis = scc_analyze(dfa)
    if not analysis.strongly_connected:
        raise NotStronglyConnected("prediction requires a strongly connected selector")
    if not dfa.accepting:
        raise ValueError("selector must have at least one accepting state")
    if not isinstance(src, BernoulliSource) or src.dist != p:
        raise ValueError("source must sample the same Bernoulli distribution")
    chain = induce_chain(dfa, p, analysis=analysis)
    trace = select(dfa, src, n, analysis=analysis)
    empirical_rate = len(trace.selected) / n
    rate_error = abs(empirical_rate - chain.predicted_selection_rate)
    fractions = trace.state_visit_counts / n
    max_visit_error = float(np.max(np.abs(fractions - chain.pi)))
    tolerance = 5.0 * math.sqrt(0.25 / n)
    return PredictionReport(
        chain=chain,
        n=n,
        seed=src.seed,
        rng_algorithm=RNG_ALGORITHM,
        empirical_rate=empirical_rate,
        rate_error=rate_error,
        visit_fractions=fractions,
        max_visit_error=max_visit_error,
        tolerance=tolerance,
        within_tolerance=rate_error <= tolerance and max_visit_error <= tolerance,
        trace=trace,
    )
