import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fsselect as fs
from fsselect.core import WordTooLong

PI2_6 = math.pi ** 2 / 6


def fair_coin_map():
    return fs.BernoulliMap(fs.BernoulliDistribution.explicit([0.5, 0.5]))


def example_tabular():
    return fs.TabularMap(
        fs.Alphabet.finite(2),
        2,
        {(0,): 0.7, (1,): 0.3, (0, 0): 0.5, (0, 1): 0.2, (1, 0): 0.2, (1, 1): 0.1},
    )


def test_mu_bernoulli_product():
    assert fs.mu_of(fair_coin_map(), (0, 1, 1, 0)) == pytest.approx(0.0625, abs=1e-15)


def test_mu_alternating():
    alt = fs.AlternatingMap()
    assert fs.mu_of(alt, (0, 1, 0, 1)) == 0.5
    assert fs.mu_of(alt, (0, 0, 1, 1)) == 0.0


def test_mu_inverse_square_first_symbol():
    m = fs.BernoulliMap(fs.BernoulliDistribution.inverse_square())
    assert fs.mu_of(m, (0,)) == pytest.approx(6 / math.pi ** 2, abs=1e-12)


def test_mu_empty_word_is_one():
    for pmap in (fair_coin_map(), fs.AlternatingMap(), example_tabular()):
        assert fs.mu_of(pmap, ()) == 1.0


def test_invalid_symbol_rejected():
    with pytest.raises(fs.InvalidSymbol):
        fs.mu_of(fair_coin_map(), (0, 2))
    with pytest.raises(fs.InvalidSymbol):
        fs.mu_of(fair_coin_map(), (-1,))


def test_tabular_word_too_long():
    with pytest.raises(WordTooLong):
        fs.mu_of(example_tabular(), (0, 1, 0))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_length_sums_are_one(n):
    for pmap in (fair_coin_map(), fs.AlternatingMap()):
        total = sum(fs.mu_of(pmap, w) for w in itertools.product(range(2), repeat=n))
        assert total == pytest.approx(1.0, abs=1e-9)


def test_alternating_exactly_two_mass_words_up_to_ten():
    alt = fs.AlternatingMap()
    for n in range(1, 11):
        positive = [w for w in itertools.product(range(2), repeat=n) if alt.mu(w) > 0]
        assert len(positive) == 2
        assert all(alt.mu(w) == 0.5 for w in positive)


def test_bernoulli_invariance_zero_residual():
    rep = fs.check_invariance(fair_coin_map(), 3)
    assert rep.invariant
    assert rep.max_right <= 1e-12 and rep.max_left <= 1e-12


def test_alternating_invariant_depth_4():
    assert fs.check_invariance(fs.AlternatingMap(), 4).invariant


def test_tabular_example_invariant():
    # row sums: 0.5 + 0.2 = 0.7 and 0.2 + 0.1 = 0.3; columns likewise
    assert fs.check_invariance(example_tabular(), 2).invariant


def test_non_invariant_table_detected():
    broken = fs.TabularMap(
        fs.Alphabet.finite(2),
        2,
        {(0,): 0.7, (1,): 0.3, (0, 0): 0.25, (0, 1): 0.25, (1, 0): 0.25, (1, 1): 0.25},
    )
    assert not fs.check_invariance(broken, 2).invariant


def test_infinite_alphabet_invariance_with_tail_bound():
    for dist in (fs.BernoulliDistribution.geometric(0.5), fs.BernoulliDistribution.inverse_square()):
        rep = fs.check_invariance(fs.BernoulliMap(dist), 3, tail_cut=2048)
        assert rep.truncated
        assert rep.invariant


def test_witness_none_for_bernoulli():
    assert fs.is_bernoulli_within(fair_coin_map(), 4, 1e-9) is None


def test_witness_alternating():
    w = fs.is_bernoulli_within(fs.AlternatingMap(), 2, 0.1)
    assert w.word == (0, 0)
    assert w.gap == pytest.approx(0.25)
    assert w.prefix == (0,) and w.last == 0


def test_witness_tabular_tolerance_gate():
    tab = example_tabular()
    # all length-2 gaps equal |mu(ab) - mu(a)mu(b)| = 0.01
    assert fs.is_bernoulli_within(tab, 2, 0.02) is None
    w = fs.is_bernoulli_within(tab, 2, 0.005)
    assert w.word == (0, 0)
    assert w.gap == pytest.approx(0.01)


def test_witness_depth_beyond_table():
    with pytest.raises(WordTooLong):
        fs.is_bernoulli_within(example_tabular(), 3, 0.001)


def test_tabular_validation():
    with pytest.raises(ValueError):
        fs.TabularMap(fs.Alphabet.finite(2), 1, {(0,): 0.7})  # missing (1,)
    with pytest.raises(ValueError):
        fs.TabularMap(fs.Alphabet.finite(2), 1, {(0,): 0.7, (1,): 0.4})  # sums to 1.1


def test_explicit_weight_validation():
    with pytest.raises(ValueError):
        fs.BernoulliDistribution.explicit([0.5, 0.5001])
    with pytest.raises(ValueError):
        fs.BernoulliDistribution.explicit([1.1, -0.1])


def test_positive_flag_and_zero_symbols():
    d = fs.BernoulliDistribution.explicit([0.5, 0.5, 0.0])
    assert not d.positive
    assert d.zero_symbols() == (2,)
    assert fs.BernoulliDistribution.geometric(0.3).positive


def test_tail_mass_matches_partial_sums():
    for dist in (fs.BernoulliDistribution.geometric(0.7), fs.BernoulliDistribution.inverse_square()):
        head = sum(dist.prob(a) for a in range(500))
        assert head + dist.tail_mass(500) == pytest.approx(1.0, abs=1e-12)


def test_inverse_square_tail_below_basel_bound():
    dist = fs.BernoulliDistribution.inverse_square()
    for cut in (10, 100, 10_000):
        assert dist.tail_mass(cut) < (6 / math.pi ** 2) / cut


@st.composite
def random_weights(draw):
    k = draw(st.integers(2, 5))
    raw = draw(
        st.lists(st.floats(0.05, 1.0, allow_nan=False), min_size=k, max_size=k)
    )
    total = sum(raw)
    w = [x / total for x in raw]
    w[-1] = 1.0 - sum(w[:-1])
    return w


@settings(max_examples=50, deadline=None)
@given(random_weights())
def test_random_bernoulli_maps_are_invariant_products(weights):
    pmap = fs.BernoulliMap(fs.BernoulliDistribution.explicit(weights))
    rep = fs.check_invariance(pmap, 3)
    assert rep.invariant and rep.max_right <= 1e-12
    assert fs.is_bernoulli_within(pmap, 3, 1e-9) is None
