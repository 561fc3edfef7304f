#!/usr/bin/env python3
"""Drive both experiment directions through the CLI surface.

Writes TOML configs and a selector file into the output directory, runs the
subcommands exactly as a user would, and prints one line per experiment.
The quick profile finishes in well under a minute; --full bumps the
preservation runs to the acceptance-scale 10^7 symbols.
"""

import argparse
import pathlib
import sys

import fsselect as fs
from fsselect.cli import main as cli_main

PRESERVE_SAMPLED = """
[alphabet]
kind = "finite"
size = 2

[map]
kind = "bernoulli"
weights = [0.7, 0.3]

[source]
kind = "bernoulli"
seed = 20240817

[selector]
kind = "dfa_file"
path = "even_position.json"

[run]
n = {n}
max_word_len = 3
tolerance = 0.01
"""

PRESERVE_CHAMPERNOWNE = """
[alphabet]
kind = "finite"
size = 2

[map]
kind = "bernoulli"
weights = [0.5, 0.5]

[source]
kind = "champernowne"
base = 2

[selector]
kind = "postnikova"
pattern = [0]

[run]
n = {n}
max_word_len = 2
tolerance = 0.05
"""

BREAK_ALTERNATING = """
[alphabet]
kind = "finite"
size = 2

[map]
kind = "alternating"

[source]
kind = "periodic"
pattern = [0, 1]

[run]
n = 10000
"""

BREAK_ZERO_ATOM = """
[alphabet]
kind = "finite"
size = 3

[map]
kind = "bernoulli"
weights = [0.5, 0.5, 0.0]

[source]
kind = "pair_insertion"
symbol = 2
seed = 7

[source.inner]
kind = "bernoulli"
weights = [0.5, 0.5]

[run]
n = 100000
"""

BREAK_TABULAR = """
[alphabet]
kind = "finite"
size = 2

[map]
kind = "tabular"
depth = 2

[[map.table]]
word = [0]
value = 0.7
[[map.table]]
word = [1]
value = 0.3
[[map.table]]
word = [0, 0]
value = 0.5
[[map.table]]
word = [0, 1]
value = 0.2
[[map.table]]
word = [1, 0]
value = 0.2
[[map.table]]
word = [1, 1]
value = 0.1

[source]
kind = "markov"
matrix = [[0.7142857142857143, 0.2857142857142857], [0.6666666666666666, 0.3333333333333333]]
seed = 3

[run]
n = 1000000
"""

PREDICT = """
[alphabet]
kind = "finite"
size = 2

[map]
kind = "bernoulli"
weights = [0.5, 0.5]

[source]
kind = "bernoulli"
seed = 99

[selector]
kind = "postnikova"
pattern = [0, 0]

[run]
n = 1000000
"""


def run(name: str, command: str, cfg_path: pathlib.Path, out_path: pathlib.Path) -> int:
    code = cli_main([command, "--config", str(cfg_path), "--out", str(out_path), "--format", "human"])
    verdict = "?"
    if out_path.exists():
        for line in out_path.read_text().splitlines():
            if line.startswith("verdict="):
                verdict = line.split("=", 1)[1]
    print(f"{name:<28} exit={code} verdict={verdict} report={out_path}")
    return code


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="experiments_out")
    parser.add_argument("--full", action="store_true", help="run preservation at n=10^7")
    args = parser.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = 10 ** 7 if args.full else 10 ** 6

    even = fs.dfa_from_table(fs.Alphabet.finite(2), [[1, 1], [0, 0]], start=0, accepting={1})
    fs.save_dfa(even, out / "even_position.json")

    experiments = [
        ("preserve-sampled", "verify-preservation", PRESERVE_SAMPLED.format(n=n)),
        ("preserve-champernowne", "verify-preservation", PRESERVE_CHAMPERNOWNE.format(n=n)),
        ("break-alternating", "break-distribution", BREAK_ALTERNATING),
        ("break-zero-atom", "break-distribution", BREAK_ZERO_ATOM),
        ("break-tabular-markov", "break-distribution", BREAK_TABULAR),
        ("predict-double-zero", "predict", PREDICT),
        ("analyze-even-position", "analyze-dfa", PRESERVE_SAMPLED.format(n=n)),
    ]
    worst = 0
    for name, command, cfg_text in experiments:
        cfg_path = out / f"{name}.toml"
        cfg_path.write_text(cfg_text)
        code = run(name, command, cfg_path, out / f"{name}.report.txt")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
