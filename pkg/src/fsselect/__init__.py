"""Finite-state selection from symbolic sequences.

Streams over finite or countably infinite alphabets, DFA selectors with a
finite transition encoding, empirical frequency statistics, and the induced
Markov chain analysis used to predict and verify selection rates.
"""

from .core import (
    Alphabet,
    AlternatingMap,
    BernoulliDistribution,
    BernoulliMap,
    FirstWitness,
    InvalidSymbol,
    ProbabilityMap,
    TabularMap,
    Word,
    WordTooLong,
    check_invariance,
    is_bernoulli_within,
    mu_of,
)
from .sequences import (
    RNG_ALGORITHM,
    BernoulliSource,
    ChampernowneSource,
    MarkovSource,
    PairInsertionSource,
    PeriodicSource,
    SequenceSource,
    pair_insertion,
    sample_prefix,
)
from .automata import (
    AlphabetMismatch,
    Dfa,
    EmptyPattern,
    IncompleteProbeSet,
    InvalidState,
    SccAnalysis,
    StateRule,
    compile_postnikova_kmp,
    compile_postnikova_suffix_table,
    compose,
    dfa_from_dict,
    dfa_from_table,
    dfa_to_dict,
    load_dfa,
    make_rule,
    run,
    run_from,
    save_dfa,
    scc_analyze,
    step,
    synchronizing_word_to_recurrent,
)
from .selection import (
    SelectionTrace,
    select,
    select_array,
    select_postnikova_oracle,
    select_word,
    selected_word,
)
from .stats import (
    BlockClass,
    BlockCounter,
    ClassMeasureEstimate,
    FrequencyCounter,
    FrequencyReport,
    GapVerdict,
    NotStronglyConnected,
    ZeroPrefixMass,
    block_frequencies,
    checkpoint_schedule,
    classify_block,
    count_words,
    estimate_class_measures,
    frequency_report,
    merge_counters,
    witness_gap_report,
)
from .markov import (
    InducedChain,
    NotIrreducible,
    PredictionReport,
    induce_chain,
    predict_and_compare,
    stationary,
)

__version__ = "0.1.0"
