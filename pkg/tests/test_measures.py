import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gradient_aesthetics.errors import EmptyHistogram, ImageTooSmall, OutOfRange
from gradient_aesthetics.imageio import GrayImage
from gradient_aesthetics.measures import (Histogram, energy_bin, histogram,
                                          log_multiplicity_exact, log_multiplicity_stirling,
                                          scale_stats, score, shannon_entropy)
from conftest import checker, seeded_random
from oracles import oracle_score

counts_st = arrays(np.int64, 256, elements=st.integers(0, 50)).filter(lambda c: c.sum() > 0)
images_st = st.tuples(st.integers(3, 9), st.integers(3, 9)).flatmap(
    lambda s: arrays(np.uint8, s))


def test_histogram_zero_image():
    h = histogram(GrayImage(np.zeros((4, 4), np.uint8)))
    assert h.counts[0] == 16 and h.counts[1:].sum() == 0
    assert (h.total, h.energy) == (16, 0)


def test_histogram_small():
    h = histogram(GrayImage.from_values(2, 2, [10, 20, 30, 40]))
    assert (h.total, h.energy) == (4, 100)


def test_histogram_ramp():
    h = histogram(GrayImage(np.arange(256, dtype=np.uint8).reshape(1, 256)))
    assert (h.counts == 1).all()
    assert h.energy == 255 * 256 // 2 == 32640


@settings(max_examples=50, deadline=None)
@given(images_st)
def test_histogram_invariants(arr):
    h = histogram(GrayImage(arr))
    assert h.total == h.counts.sum() == arr.size
    assert h.energy == int(arr.astype(np.int64).sum())
    assert 0 <= h.energy <= 255 * h.total


def test_entropy_cases():
    assert shannon_entropy(Histogram.from_counts([0, 0, 9])) == 0.0
    assert shannon_entropy(Histogram.from_counts([1] * 256)) == pytest.approx(8.0, abs=1e-12)
    assert shannon_entropy(Histogram.from_counts([3, 0, 0, 3])) == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(counts_st)
def test_entropy_bounds(c):
    assert 0.0 <= shannon_entropy(Histogram.from_counts(c)) <= 8.0


def test_empty_histogram_errors():
    h = Histogram.from_counts([0] * 256)
    for fn in (shannon_entropy, log_multiplicity_exact, log_multiplicity_stirling):
        with pytest.raises(EmptyHistogram):
            fn(h)
    with pytest.raises(EmptyHistogram):
        scale_stats(h, 0.0)


def _enumerate_arrangements(counts):
    # brute-force count of distinct orderings of a small multiset
    from itertools import permutations
    items = [i for i, c in enumerate(counts) for _ in range(c)]
    return len(set(permutations(items)))


@pytest.mark.parametrize("counts", [[4], [2, 2], [1, 1], [2, 1, 1], [3, 0, 2], [1, 1, 1, 1, 2]])
def test_exact_multiplicity_against_enumeration(counts):
    omega = _enumerate_arrangements(counts)
    assert log_multiplicity_exact(Histogram.from_counts(counts)) == pytest.approx(
        math.log(omega), abs=1e-12)


def test_exact_multiplicity_examples():
    assert log_multiplicity_exact(Histogram.from_counts([0, 7])) == 0.0
    assert log_multiplicity_exact(Histogram.from_counts([2, 2])) == pytest.approx(1.791759, abs=1e-6)
    assert log_multiplicity_exact(Histogram.from_counts([1, 1])) == pytest.approx(math.log(2))


def test_stirling_examples():
    assert log_multiplicity_stirling(Histogram.from_counts([0, 0, 13])) == pytest.approx(0.0, abs=1e-12)
    # 4 ln 4 - 4 - 2 (2 ln 2 - 2) collapses to 4 ln 2; exact is ln 6
    got = log_multiplicity_stirling(Histogram.from_counts([2, 2]))
    assert got == pytest.approx(4 * math.log(4) - 4 - 2 * (2 * math.log(2) - 2), abs=1e-12)
    assert got == pytest.approx(4 * math.log(2), abs=1e-12)


def _stirling_rel_err(counts):
    h = Histogram.from_counts(counts)
    exact = log_multiplicity_exact(h)
    return abs(log_multiplicity_stirling(h) - exact) / exact


def test_stirling_uniform_10000():
    # ~39 per level: the dropped sqrt(2 pi n) terms cost about 1.28%
    c = np.full(256, 10000 // 256)
    c[: 10000 % 256] += 1
    assert c.sum() == 10000
    assert 0.0125 < _stirling_rel_err(c) < 0.0130


@settings(max_examples=60, deadline=None)
@given(arrays(np.int64, 256, elements=st.integers(100, 5000)))
def test_stirling_close_on_full_alphabet(c):
    assert _stirling_rel_err(c) <= 0.01


@pytest.mark.parametrize("k, lo", [(2, 0.02), (4, 0.016), (16, 0.0105)])
def test_stirling_drifts_past_one_percent_on_few_levels(k, lo):
    # every count is 100, yet with few occupied levels the error exceeds 1%
    assert _stirling_rel_err([100] * k) > lo


def test_stirling_improves_with_count():
    errs = [_stirling_rel_err([n] * 4) for n in (100, 1000, 10000, 100000)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 0.01


@settings(max_examples=60, deadline=None)
@given(counts_st)
def test_entropy_bounds_multiplicity(c):
    h = Histogram.from_counts(c)
    assert h.total * math.log(2) * shannon_entropy(h) >= log_multiplicity_exact(h) - 1e-9


def test_multiplicity_gap_shrinks_with_n():
    gaps = []
    for n in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
        h = Histogram.from_counts(np.full(256, n // 256))
        nats = h.total * math.log(2) * shannon_entropy(h)
        gaps.append((nats - log_multiplicity_exact(h)) / nats)
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.01


@pytest.mark.parametrize("s, k", [(0.0, 0), (1.0, 149), (0.5, 75), (0.999, 149),
                                  (Fraction(1, 150), 1), (Fraction(149, 150), 149)])
def test_energy_bin(s, k):
    assert energy_bin(s) == k


@pytest.mark.parametrize("s", [-0.01, 1.0001, Fraction(151, 150)])
def test_energy_bin_out_of_range(s):
    with pytest.raises(OutOfRange):
        energy_bin(s)


def test_scale_stats():
    assert scale_stats(Histogram.from_counts([1] * 256), 8.0).entropy_scaled == 1.0
    top = [0] * 255 + [5]
    assert scale_stats(Histogram.from_counts(top), 0.0).energy_scaled == 1.0
    assert scale_stats(Histogram.from_counts([5]), 0.0).energy_scaled == 0.0


def test_score_black():
    sc = score(GrayImage(np.zeros((3, 3), np.uint8)))
    assert sc.m_eq14 == 0.0 and sc.m_eq15 == 0.0
    assert all(lv.entropy_bits == 0 and lv.energy == 0 for lv in sc.levels)
    assert [lv.pixel_count for lv in sc.levels] == [9, 4, 1]
    assert sc.l1_energy_bin == 0


def test_score_white():
    sc = score(GrayImage(np.full((3, 3), 255, np.uint8)))
    assert sc.levels[0].entropy_bits == 0.0
    assert sc.levels[0].energy_scaled == 1.0
    assert sc.levels[1].energy == 0 and sc.levels[2].energy == 0
    assert sc.m_eq15 == 1.0
    assert sc.l1_energy_bin == 149


def test_score_matches_oracle_on_seeded_8x8():
    img = seeded_random((8, 8), 1234)
    sc = score(img)
    m14, m15, b, terms = oracle_score(img.pixels.tolist())
    assert sc.m_eq15 == pytest.approx(m15, abs=1e-12)
    assert sc.m_eq14 == pytest.approx(m14, abs=1e-12)
    assert sc.l1_energy_bin == b
    for lv, (ent, energy, n) in zip(sc.levels, terms):
        assert lv.entropy_bits == pytest.approx(ent, abs=1e-12)
        assert (lv.energy, lv.pixel_count) == (energy, n)


@settings(max_examples=80, deadline=None)
@given(images_st)
def test_score_invariants(arr):
    sc = score(GrayImage(arr))
    m14, m15, b, _ = oracle_score(arr.tolist())
    assert 0.0 <= sc.m_eq15 <= 6.0
    assert 0.0 <= sc.m_eq14 <= 24.0
    assert sc.m_eq14 == sum(lv.entropy_bits for lv in sc.levels)
    assert sc.m_eq15 == (sum(lv.entropy_scaled for lv in sc.levels)
                         + sum(lv.energy_scaled for lv in sc.levels))
    assert sc.m_eq15 == pytest.approx(m15, abs=1e-12)
    assert sc.l1_energy_bin == b
    for lv in sc.levels:
        assert lv.entropy_scaled == lv.entropy_bits / 8
        assert lv.energy_scaled == lv.energy / (255 * lv.pixel_count)


def test_l1_permutation_invariance():
    img = checker(8, cell=2)
    shuffled = GrayImage(np.random.default_rng(99).permutation(img.pixels.ravel()).reshape(8, 8))
    a, b = score(img), score(shuffled)
    assert a.levels[0] == b.levels[0]
    assert a.m_eq15 != b.m_eq15


def test_score_deterministic():
    img = seeded_random((16, 16), 5)
    assert score(img) == score(GrayImage(img.pixels.copy()))


def test_score_too_small():
    with pytest.raises(ImageTooSmall):
        score(GrayImage(np.zeros((2, 8), np.uint8)))


def test_measure_selector():
    sc = score(checker(4))
    assert sc.m("eq14") == sc.m_eq14 and sc.m("eq15") == sc.m_eq15
    with pytest.raises(ValueError):
        sc.m("eq16")
