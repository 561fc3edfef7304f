"""Config-driven experiment driver.

One TOML config describes an experiment (alphabet, probability map, source,
selector, run parameters); subcommands run the pipelines and emit
deterministic reports.  Identical configs produce byte-identical reports:
no timestamps, shortest-round-trip float formatting, and the seeded
counter-based RNG recorded in every sampled report.

Exit codes: 0 verdict achieved, 2 usage or config error, 3 verdict not
achieved at this length, 4 vacuous empty selection, 5 no witness found.

Config schema (TOML; unknown keys are errors)::

    [alphabet]
    kind = "finite"            # "finite" | "infinite"
    size = 2                   # finite only

    [map]
    kind = "bernoulli"         # "bernoulli" | "tabular" | "alternating"
    weights = [0.5, 0.5]       # bernoulli, finite alphabet
    family = "geometric"       # bernoulli, infinite alphabet ("geometric" | "inverse_square")
    ratio = 0.5                # geometric only
    depth = 2                  # tabular only
    [[map.table]]              # tabular only: one entry per word, all |w| <= depth
    word = [0]
    value = 0.7

    [source]
    kind = "bernoulli"         # "periodic" | "champernowne" | "bernoulli" | "markov" | "pair_insertion"
    seed = 1234                # sampled kinds
    pattern = [0, 1]           # periodic
    base = 2                   # champernowne
    matrix = [[0.7, 0.3], [0.7, 0.3]]   # markov
    start_dist = [0.5, 0.5]    # markov, optional (stationary when omitted)
    symbol = 2                 # pair_insertion: the inserted symbol
    [source.inner]             # pair_insertion: the wrapped source
    kind = "periodic"
    pattern = [0, 1]

    [selector]
    kind = "postnikova"        # "postnikova" | "dfa_file" | "compose"
    pattern = [0, 0]           # postnikova
    compiler = "kmp"           # "kmp" | "suffix_table"
    path = "selector.json"     # dfa_file
    [[selector.parts]]         # compose: selector tables, applied left to right
    kind = "postnikova"
    pattern = [0]

    [run]
    n = 1000000
    max_word_len = 3
    tolerance = 0.01
    witness_depth = 4          # break-distribution: product-form search depth
    witness_tol = 1e-9
    break_threshold = 0.4      # break-distribution, zero-atom pathway
    rng = "philox4x64x10-u53"  # must match the implementation's algorithm id
    sequence_format = "text"   # "text" | "bytes"
    selected_out = "sel.txt"   # select: optional dump of the selected symbols
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .automata import Dfa, compile_postnikova_kmp, compile_postnikova_suffix_table, compose, load_dfa, scc_analyze, synchronizing_word_to_recurrent
from .core import (
    Alphabet,
    AlternatingMap,
    BernoulliDistribution,
    BernoulliMap,
    ProbabilityMap,
    TabularMap,
    is_bernoulli_within,
)
from .markov import induce_chain, predict_and_compare
from .selection import select
from .sequences import (
    RNG_ALGORITHM,
    BernoulliSource,
    ChampernowneSource,
    MarkovSource,
    PairInsertionSource,
    PeriodicSource,
    SequenceSource,
    sample_prefix,
)
from .stats import ZeroPrefixMass, checkpoint_schedule, frequency_report, witness_gap_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERDICT_FAILED = 3
EXIT_EMPTY_SELECTION = 4
EXIT_NO_WITNESS = 5

_MIN_STAT_N = 1 << 10


class ConfigError(ValueError):
    pass


_SCHEMA = {
    "alphabet": {"kind", "size"},
    "map": {"kind", "weights", "family", "ratio", "depth", "table"},
    "source": {"kind", "seed", "pattern", "base", "matrix", "start_dist", "symbol", "inner", "weights", "family", "ratio"},
    "selector": {"kind", "pattern", "compiler", "path", "parts"},
    "run": {
        "n",
        "max_word_len",
        "tolerance",
        "witness_depth",
        "witness_tol",
        "break_threshold",
        "rng",
        "sequence_format",
        "selected_out",
    },
}


def _check_keys(doc: dict, allowed, path: str) -> None:
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}{key!r}")


@dataclass
class ExperimentConfig:
    alphabet: Alphabet
    pmap: ProbabilityMap | None
    source: SequenceSource | None
    selector: Dfa | None
    n: int
    max_word_len: int
    tolerance: float
    witness_depth: int
    witness_tol: float
    break_threshold: float
    sequence_format: str
    selected_out: str | None
    seed: int | None


def _parse_alphabet(doc: dict) -> Alphabet:
    _check_keys(doc, _SCHEMA["alphabet"], "alphabet.")
    kind = doc.get("kind")
    if kind == "finite":
        if "size" not in doc:
            raise ConfigError("alphabet.size is required for finite alphabets")
        return Alphabet.finite(int(doc["size"]))
    if kind == "infinite":
        if "size" in doc:
            raise ConfigError("alphabet.size is meaningless for infinite alphabets")
        return Alphabet.infinite()
    raise ConfigError(f"alphabet.kind must be 'finite' or 'infinite', got {kind!r}")


def _parse_map(doc: dict, alphabet: Alphabet) -> ProbabilityMap:
    _check_keys(doc, _SCHEMA["map"], "map.")
    kind = doc.get("kind")
    if kind == "bernoulli":
        if alphabet.is_finite:
            if "weights" not in doc:
                raise ConfigError("map.weights is required on finite alphabets")
            dist = BernoulliDistribution.explicit(doc["weights"])
            if dist.alphabet != alphabet:
                raise ConfigError("map.weights length must equal the alphabet size")
        else:
            family = doc.get("family")
            if family == "geometric":
                dist = BernoulliDistribution.geometric(float(doc["ratio"]))
            elif family == "inverse_square":
                dist = BernoulliDistribution.inverse_square()
            else:
                raise ConfigError("map.family must be 'geometric' or 'inverse_square'")
        return BernoulliMap(dist)
    if kind == "tabular":
        if "depth" not in doc or "table" not in doc:
            raise ConfigError("tabular maps need map.depth and map.table")
        table = {}
        for entry in doc["table"]:
            _check_keys(entry, {"word", "value"}, "map.table.")
            table[tuple(int(a) for a in entry["word"])] = float(entry["value"])
        return TabularMap(alphabet, int(doc["depth"]), table)
    if kind == "alternating":
        pmap = AlternatingMap()
        if alphabet != pmap.alphabet:
            raise ConfigError("the alternating map lives on the binary alphabet")
        return pmap
    raise ConfigError(f"map.kind must be bernoulli, tabular or alternating, got {kind!r}")


def _parse_source(
    doc: dict,
    alphabet: Alphabet,
    seed_override: int | None,
    pmap: ProbabilityMap | None,
) -> SequenceSource:
    _check_keys(doc, _SCHEMA["source"], "source.")
    kind = doc.get("kind")
    seed = seed_override if seed_override is not None else doc.get("seed")

    if kind == "periodic":
        return PeriodicSource(doc["pattern"], alphabet)
    if kind == "champernowne":
        base = int(doc["base"])
        if not alphabet.is_finite or alphabet.size != base:
            raise ConfigError("champernowne base must equal the alphabet size")
        return ChampernowneSource(base)
    if kind == "bernoulli":
        if seed is None:
            raise ConfigError("sampled sources need source.seed (or --seed)")
        if "weights" in doc:
            dist = BernoulliDistribution.explicit(doc["weights"])
        elif "family" in doc:
            if doc["family"] == "geometric":
                dist = BernoulliDistribution.geometric(float(doc["ratio"]))
            elif doc["family"] == "inverse_square":
                dist = BernoulliDistribution.inverse_square()
            else:
                raise ConfigError("source.family must be 'geometric' or 'inverse_square'")
        elif isinstance(pmap, BernoulliMap):
            dist = pmap.dist
        else:
            raise ConfigError("bernoulli sources need weights/family here or a bernoulli [map]")
        return BernoulliSource(dist, int(seed))
    if kind == "markov":
        if seed is None:
            raise ConfigError("sampled sources need source.seed (or --seed)")
        src = MarkovSource(doc["matrix"], int(seed), doc.get("start_dist"))
        if src.alphabet != alphabet:
            raise ConfigError("markov matrix size must equal the alphabet size")
        return src
    if kind == "pair_insertion":
        if "inner" not in doc or "symbol" not in doc:
            raise ConfigError("pair_insertion needs source.symbol and [source.inner]")
        # the resolved outer seed doubles as the inner default
        inner = _parse_source(doc["inner"], _inner_alphabet(doc["inner"], alphabet), seed, pmap)
        return PairInsertionSource(inner, int(doc["symbol"]), alphabet)
    raise ConfigError(f"unknown source.kind {kind!r}")


def _inner_alphabet(doc: dict, outer: Alphabet) -> Alphabet:
    # the inner stream of a pair insertion may use a smaller alphabet
    if doc.get("kind") == "periodic":
        return Alphabet.finite(max(int(a) for a in doc["pattern"]) + 1)
    if doc.get("kind") == "champernowne":
        return Alphabet.finite(int(doc["base"]))
    if doc.get("kind") == "bernoulli" and "weights" in doc:
        return Alphabet.finite(len(doc["weights"]))
    return outer


def _parse_selector(doc: dict, alphabet: Alphabet, base_dir) -> Dfa:
    _check_keys(doc, _SCHEMA["selector"], "selector.")
    kind = doc.get("kind")
    if kind == "postnikova":
        pattern = tuple(int(a) for a in doc.get("pattern", ()))
        if not pattern:
            raise ConfigError("postnikova selectors need a non-empty selector.pattern")
        compiler = doc.get("compiler", "kmp")
        if compiler == "kmp":
            return compile_postnikova_kmp(pattern, alphabet)
        if compiler == "suffix_table":
            return compile_postnikova_suffix_table(pattern, alphabet)
        raise ConfigError("selector.compiler must be 'kmp' or 'suffix_table'")
    if kind == "dfa_file":
        path = doc.get("path")
        if path is None:
            raise ConfigError("dfa_file selectors need selector.path")
        try:
            dfa = load_dfa(base_dir / path if base_dir else path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load selector: {exc}") from exc
        if dfa.alphabet != alphabet:
            raise ConfigError("selector alphabet does not match [alphabet]")
        return dfa
    if kind == "compose":
        parts = doc.get("parts")
        if not parts:
            raise ConfigError("compose selectors need [[selector.parts]]")
        dfas = [_parse_selector(p, alphabet, base_dir) for p in parts]
        out = dfas[0]
        for nxt in dfas[1:]:
            out = compose(out, nxt)
        return out
    raise ConfigError(f"unknown selector.kind {kind!r}")


def load_config(path, seed_override: int | None = None) -> ExperimentConfig:
    import pathlib

    path = pathlib.Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad TOML: {exc}") from exc

    _check_keys(doc, set(_SCHEMA), "")
    if "alphabet" not in doc:
        raise ConfigError("[alphabet] is required")
    alphabet = _parse_alphabet(doc["alphabet"])

    run = doc.get("run", {})
    _check_keys(run, _SCHEMA["run"], "run.")
    rng = run.get("rng", RNG_ALGORITHM)
    if rng != RNG_ALGORITHM:
        raise ConfigError(f"run.rng must be {RNG_ALGORITHM!r} for this implementation")

    pmap = _parse_map(doc["map"], alphabet) if "map" in doc else None

    source = None
    if "source" in doc:
        source = _parse_source(doc["source"], alphabet, seed_override, pmap)
        if source.alphabet != alphabet:
            raise ConfigError("source alphabet does not match [alphabet]")

    selector = _parse_selector(doc["selector"], alphabet, path.parent) if "selector" in doc else None

    fmt = run.get("sequence_format", "text")
    if fmt not in ("text", "bytes"):
        raise ConfigError("run.sequence_format must be 'text' or 'bytes'")

    return ExperimentConfig(
        alphabet=alphabet,
        pmap=pmap,
        source=source,
        selector=selector,
        n=int(run.get("n", 0)),
        max_word_len=int(run.get("max_word_len", 3)),
        tolerance=float(run.get("tolerance", 0.01)),
        witness_depth=int(run.get("witness_depth", 4)),
        witness_tol=float(run.get("witness_tol", 1e-9)),
        break_threshold=float(run.get("break_threshold", 0.4)),
        sequence_format=fmt,
        selected_out=run.get("selected_out"),
        seed=seed_override if seed_override is not None else doc.get("source", {}).get("seed"),
    )


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _word_str(w) -> str:
    return ".".join(str(int(a)) for a in w)


class ReportWriter:
    def __init__(self, fmt: str):
        self.fmt = fmt
        self.lines: list[str] = []

    def kv(self, **fields) -> None:
        self.lines.append(" ".join(f"{k}={_fmt(v)}" for k, v in fields.items()))

    def text(self, line: str = "") -> None:
        self.lines.append(line)

    def table(self, headers, rows) -> None:
        if self.fmt == "machine":
            return
        widths = [len(h) for h in headers]
        str_rows = [[_fmt(c) for c in row] for row in rows]
        for row in str_rows:
            widths = [max(w, len(c)) for w, c in zip(widths, row)]
        self.text("  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip())
        for row in str_rows:
            self.text("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())

    def emit(self, out_path) -> None:
        payload = "\n".join(self.lines) + "\n"
        if out_path is None:
            sys.stdout.write(payload)
        else:
            with open(out_path, "w", encoding="utf-8") as fh:
                fh.write(payload)


def _require(cfg: ExperimentConfig, **parts) -> None:
    names = {"pmap": "[map]", "source": "[source]", "selector": "[selector]"}
    for attr, needed in parts.items():
        if needed and getattr(cfg, attr) is None:
            raise ConfigError(f"{names[attr]} is required for this command")


def _require_n(cfg: ExperimentConfig, minimum: int = 1) -> None:
    if cfg.n < minimum:
        raise ConfigError(f"run.n must be at least {minimum}")


def _write_sequence(arr: np.ndarray, fmt: str, alphabet: Alphabet, out_path) -> None:
    if fmt == "bytes":
        if not alphabet.is_finite or alphabet.size > 256:
            raise ConfigError("byte output requires an alphabet of size <= 256")
        data = arr.astype(np.uint8).tobytes()
        if out_path is None:
            sys.stdout.buffer.write(data)
        else:
            with open(out_path, "wb") as fh:
                fh.write(data)
        return
    payload = " ".join(str(int(a)) for a in arr) + "\n"
    if out_path is None:
        sys.stdout.write(payload)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(payload)


def cmd_generate(cfg: ExperimentConfig, args) -> int:
    _require(cfg, source=True)
    _require_n(cfg)
    arr = sample_prefix(cfg.source, cfg.n)
    _write_sequence(arr, cfg.sequence_format, cfg.alphabet, args.out)
    return EXIT_OK


def cmd_select(cfg: ExperimentConfig, args) -> int:
    _require(cfg, source=True, selector=True)
    _require_n(cfg)
    trace = select(cfg.selector, cfg.source, cfg.n)
    rep = ReportWriter(args.format)
    rep.kv(schema="fsselect.select.v1")
    rep.kv(rng=RNG_ALGORITHM)
    if cfg.seed is not None:
        rep.kv(seed=cfg.seed)
    rep.kv(input_length=trace.input_length)
    rep.kv(selected_total=len(trace.selected))
    rep.kv(entered_recurrent_at=trace.entered_recurrent_at if trace.entered_recurrent_at is not None else -1)
    for q, visits in enumerate(trace.state_visit_counts.tolist()):
        rep.kv(state=q, visits=visits)
    rep.emit(args.out)
    if cfg.selected_out:
        _write_sequence(trace.selected, cfg.sequence_format, cfg.alphabet, cfg.selected_out)
    return EXIT_OK


def _deviation_report(rep: ReportWriter, report, cfg: ExperimentConfig, schema: str) -> None:
    rep.kv(schema=schema)
    rep.kv(rng=RNG_ALGORITHM)
    if cfg.seed is not None:
        rep.kv(seed=cfg.seed)
    rep.kv(n=cfg.n, max_word_len=cfg.max_word_len, tolerance=cfg.tolerance)
    if rep.fmt == "machine":
        for cp in report.checkpoints:
            for w, freq, mu, dev in cp.rows:
                rep.kv(checkpoint=cp.input_n, selected=cp.selected_n, word=_word_str(w), freq=freq, mu=mu, dev=dev)
            rep.kv(checkpoint=cp.input_n, selected=cp.selected_n, max_dev=cp.max_deviation)
    else:
        rep.text()
        rep.table(
            ["checkpoint", "selected", "max_dev", "worst_word"],
            [
                (cp.input_n, cp.selected_n, cp.max_deviation, _word_str(cp.worst_word) if cp.worst_word else "-")
                for cp in report.checkpoints
            ],
        )
        rep.text()
        final = report.checkpoints[-1]
        rep.table(
            ["word", "freq", "mu", "dev"],
            [(_word_str(w), freq, mu, dev) for w, freq, mu, dev in final.rows],
        )
        rep.text()
    rep.kv(evicted=report.evicted)
    rep.kv(final_max_dev=report.final_max_deviation)
    rep.kv(verdict="pass" if report.passed else "fail")


def cmd_verify_preservation(cfg: ExperimentConfig, args) -> int:
    _require(cfg, pmap=True, source=True, selector=True)
    _require_n(cfg, _MIN_STAT_N)
    if not isinstance(cfg.pmap, BernoulliMap) or not cfg.pmap.dist.positive:
        raise ConfigError("verify-preservation requires a positive bernoulli [map]")
    trace = select(cfg.selector, cfg.source, cfg.n)
    rep = ReportWriter(args.format)
    if len(trace.selected) == 0:
        rep.kv(schema="fsselect.verify-preservation.v1")
        rep.kv(rng=RNG_ALGORITHM)
        rep.kv(n=cfg.n)
        rep.kv(selected_total=0)
        rep.kv(verdict="empty-selection")
        rep.emit(args.out)
        return EXIT_EMPTY_SELECTION
    report = frequency_report(
        trace.selected,
        trace.selected_positions,
        checkpoint_schedule(cfg.n),
        cfg.pmap,
        cfg.max_word_len,
        cfg.tolerance,
    )
    _deviation_report(rep, report, cfg, "fsselect.verify-preservation.v1")
    rep.emit(args.out)
    return EXIT_OK if report.passed else EXIT_VERDICT_FAILED


def cmd_stats(cfg: ExperimentConfig, args) -> int:
    _require(cfg, pmap=True, source=True)
    _require_n(cfg, _MIN_STAT_N)
    arr = sample_prefix(cfg.source, cfg.n)
    positions = np.arange(1, cfg.n + 1, dtype=np.int64)
    report = frequency_report(
        arr, positions, checkpoint_schedule(cfg.n), cfg.pmap, cfg.max_word_len, cfg.tolerance
    )
    rep = ReportWriter(args.format)
    _deviation_report(rep, report, cfg, "fsselect.stats.v1")
    rep.emit(args.out)
    return EXIT_OK if report.passed else EXIT_VERDICT_FAILED


def _zero_atom_break(cfg: ExperimentConfig, args) -> int:
    source = cfg.source
    if not isinstance(source, PairInsertionSource):
        raise ConfigError("the zero-atom pathway needs a pair_insertion [source]")
    marker = source.symbol
    if cfg.pmap.mu((marker,)) != 0.0:
        raise ConfigError("the inserted symbol must carry zero measure under [map]")
    selector = compile_postnikova_kmp((marker,), cfg.alphabet)
    trace = select(selector, source, cfg.n)
    arr = sample_prefix(source, cfg.n)
    input_freq = float(np.mean(arr == marker))
    sel = trace.selected
    if len(sel) == 0:
        rep = ReportWriter(args.format)
        rep.kv(schema="fsselect.break-distribution.v1")
        rep.kv(pathway="zero-atom", n=cfg.n, symbol=marker)
        rep.kv(selected_total=0)
        rep.kv(verdict="empty-selection")
        rep.emit(args.out)
        return EXIT_EMPTY_SELECTION
    selected_freq = float(np.mean(sel == marker))
    broken = selected_freq >= cfg.break_threshold
    rep = ReportWriter(args.format)
    rep.kv(schema="fsselect.break-distribution.v1")
    rep.kv(rng=RNG_ALGORITHM)
    if cfg.seed is not None:
        rep.kv(seed=cfg.seed)
    rep.kv(pathway="zero-atom", n=cfg.n, symbol=marker)
    rep.kv(pattern=_word_str((marker,)))
    rep.kv(selected_total=len(sel))
    rep.kv(input_freq=input_freq)
    rep.kv(selected_freq=selected_freq)
    rep.kv(threshold=cfg.break_threshold)
    rep.kv(verdict="broken" if broken else "not-detected")
    rep.emit(args.out)
    return EXIT_OK if broken else EXIT_VERDICT_FAILED


def cmd_break_distribution(cfg: ExperimentConfig, args) -> int:
    _require(cfg, pmap=True, source=True)
    _require_n(cfg, _MIN_STAT_N)
    pmap = cfg.pmap
    if isinstance(pmap, BernoulliMap):
        if pmap.dist.positive:
            rep = ReportWriter(args.format)
            rep.kv(schema="fsselect.break-distribution.v1")
            rep.kv(verdict="no-witness", reason="map is a positive bernoulli product")
            rep.emit(args.out)
            return EXIT_NO_WITNESS
        return _zero_atom_break(cfg, args)

    depth = cfg.witness_depth if pmap.depth is None else min(cfg.witness_depth, pmap.depth)
    witness = is_bernoulli_within(pmap, depth, cfg.witness_tol)
    if witness is None:
        rep = ReportWriter(args.format)
        rep.kv(schema="fsselect.break-distribution.v1")
        rep.kv(verdict="no-witness", depth=cfg.witness_depth, tol=cfg.witness_tol)
        rep.emit(args.out)
        return EXIT_NO_WITNESS

    selector = compile_postnikova_kmp(witness.prefix, cfg.alphabet)
    trace = select(selector, cfg.source, cfg.n)
    if len(trace.selected) == 0:
        rep = ReportWriter(args.format)
        rep.kv(schema="fsselect.break-distribution.v1")
        rep.kv(pathway="witness", n=cfg.n, pattern=_word_str(witness.prefix))
        rep.kv(selected_total=0)
        rep.kv(verdict="empty-selection")
        rep.emit(args.out)
        return EXIT_EMPTY_SELECTION
    schedule = checkpoint_schedule(cfg.n)
    hits = np.cumsum(trace.selected == witness.last)
    freqs = []
    for cp in schedule:
        k = int(np.searchsorted(trace.selected_positions, cp, side="right"))
        freqs.append((cp, float(hits[k - 1] / k) if k else 0.0))
    try:
        verdict = witness_gap_report(freqs, pmap, witness)
    except ZeroPrefixMass as exc:
        raise ConfigError(str(exc)) from exc

    rep = ReportWriter(args.format)
    rep.kv(schema="fsselect.break-distribution.v1")
    rep.kv(rng=RNG_ALGORITHM)
    if cfg.seed is not None:
        rep.kv(seed=cfg.seed)
    rep.kv(pathway="witness", n=cfg.n)
    rep.kv(witness=_word_str(witness.word), witness_gap=witness.gap)
    rep.kv(pattern=_word_str(witness.prefix), symbol=witness.last)
    rep.kv(mu_symbol=verdict.mu_symbol, ratio_gap=verdict.ratio_gap, threshold=verdict.threshold)
    if rep.fmt == "machine":
        for cp, freq in verdict.checkpoints:
            rep.kv(checkpoint=cp, selected_freq=freq, deviation=abs(freq - verdict.mu_symbol))
    else:
        rep.text()
        rep.table(
            ["checkpoint", "selected_freq", "deviation"],
            [(cp, freq, abs(freq - verdict.mu_symbol)) for cp, freq in verdict.checkpoints],
        )
        rep.text()
    rep.kv(final_deviation=verdict.final_deviation)
    rep.kv(verdict="broken" if verdict.broken else "not-detected")
    rep.emit(args.out)
    return EXIT_OK if verdict.broken else EXIT_VERDICT_FAILED


def cmd_predict(cfg: ExperimentConfig, args) -> int:
    _require(cfg, pmap=True, source=True, selector=True)
    _require_n(cfg, _MIN_STAT_N)
    if not isinstance(cfg.pmap, BernoulliMap):
        raise ConfigError("predict requires a bernoulli [map]")
    if not isinstance(cfg.source, BernoulliSource):
        raise ConfigError("predict requires a bernoulli [source]")
    report = predict_and_compare(cfg.selector, cfg.pmap.dist, cfg.source, cfg.n)
    chain = report.chain
    rep = ReportWriter(args.format)
    rep.kv(schema="fsselect.predict.v1")
    rep.kv(rng=report.rng_algorithm, seed=report.seed, n=report.n)
    rep.kv(states=len(chain.states), irreducible=chain.irreducible)
    if rep.fmt == "machine":
        for i, q in enumerate(chain.states):
            rep.kv(state=q, pi=float(chain.pi[i]), visit_fraction=float(report.visit_fractions[i]))
            for j, t in enumerate(chain.states):
                if chain.matrix[i, j] > 0.0:
                    rep.kv(row=q, col=t, p=float(chain.matrix[i, j]))
    else:
        rep.text()
        rep.table(
            ["state", "pi", "visit_fraction", "return_time"],
            [
                (q, float(chain.pi[i]), float(report.visit_fractions[i]), float(chain.expected_return_times[i]))
                for i, q in enumerate(chain.states)
            ],
        )
        rep.text()
    rep.kv(rate_floor=chain.rate_floor if chain.rate_floor is not None else -1.0)
    rep.kv(predicted_rate=chain.predicted_selection_rate)
    rep.kv(empirical_rate=report.empirical_rate)
    rep.kv(rate_error=report.rate_error)
    rep.kv(max_visit_error=report.max_visit_error)
    rep.kv(tolerance=report.tolerance)
    rep.kv(verdict="pass" if report.within_tolerance else "fail")
    rep.emit(args.out)
    return EXIT_OK if report.within_tolerance else EXIT_VERDICT_FAILED


def cmd_analyze_dfa(cfg: ExperimentConfig, args) -> int:
    _require(cfg, selector=True)
    dfa = cfg.selector
    analysis = scc_analyze(dfa)
    word = synchronizing_word_to_recurrent(dfa, analysis)
    rep = ReportWriter(args.format)
    rep.kv(schema="fsselect.analyze-dfa.v1")
    rep.kv(states=dfa.state_count, start=dfa.start)
    rep.kv(accepting=_word_str(sorted(dfa.accepting)) if dfa.accepting else "-")
    rep.kv(components=len(analysis.components))
    for cid, comp in enumerate(analysis.components):
        rep.kv(component=cid, states=_word_str(comp), recurrent=analysis.recurrent[cid])
    rep.kv(topo_order=_word_str(analysis.topo_order))
    rep.kv(strongly_connected=analysis.strongly_connected)
    rep.kv(synchronizing_word=_word_str(word) if word else "-")
    if cfg.pmap is not None and isinstance(cfg.pmap, BernoulliMap):
        chain = induce_chain(dfa, cfg.pmap.dist, analysis=analysis)
        rep.kv(chain_states=_word_str(chain.states), irreducible=chain.irreducible)
        for i, q in enumerate(chain.states):
            for j, t in enumerate(chain.states):
                if chain.matrix[i, j] > 0.0:
                    rep.kv(row=q, col=t, p=float(chain.matrix[i, j]))
        if chain.irreducible:
            for i, q in enumerate(chain.states):
                rep.kv(state=q, pi=float(chain.pi[i]))
            rep.kv(rate_floor=chain.rate_floor if chain.rate_floor is not None else -1.0)
            rep.kv(predicted_rate=chain.predicted_selection_rate)
    rep.emit(args.out)
    return EXIT_OK


_COMMANDS = {
    "generate": cmd_generate,
    "select": cmd_select,
    "stats": cmd_stats,
    "verify-preservation": cmd_verify_preservation,
    "break-distribution": cmd_break_distribution,
    "predict": cmd_predict,
    "analyze-dfa": cmd_analyze_dfa,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsselect",
        description="Finite-state selection experiments driven by a TOML config.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the experiment TOML")
        p.add_argument("--seed", type=int, default=None, help="override the source seed")
        p.add_argument("--out", default=None, help="report path (stdout when omitted)")
        p.add_argument("--format", choices=("machine", "human"), default="machine")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"fsselect: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"fsselect: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
