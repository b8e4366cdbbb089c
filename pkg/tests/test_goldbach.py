import math

import mpmath
import numpy as np
import pytest

from goldbach_ap.errors import AccuracyError, ArgumentError, RangeError
from goldbach_ap.goldbach import (
    convolve,
    discrepancy_scan,
    exception_scan,
    main_term,
    main_terms,
    rep_counts,
)
from goldbach_ap.goldbach.convolution import (
    NTT_PRIMES,
    _primitive_root,
    direct_convolution,
    fft_convolution,
    ntt_convolution,
)
from goldbach_ap.goldbach.reps import admissible_evens
from goldbach_ap.progression import ResidueClass
from goldbach_ap.singular import singular_series_product

from conftest import naive_lambda

LOG2, LOG3 = math.log(2), math.log(3)


def school_product(x, y, size):
    out = [0.0] * size
    for i, a in enumerate(x):
        for j, b in enumerate(y):
            if i + j < size:
                out[i + j] += a * b
    return out


# --- convolution engines -----------------------------------------------------


def test_direct_matches_school():
    rng = np.random.default_rng(0)
    x, y = rng.uniform(0, 5, 40), rng.uniform(0, 5, 33)
    np.testing.assert_allclose(direct_convolution(x, y, 60), school_product(x, y, 60), rtol=1e-13)


def test_fft_and_ntt_match_direct():
    rng = np.random.default_rng(1)
    x, y = rng.uniform(0, 15, 3000), rng.uniform(0, 15, 3000)
    ref = direct_convolution(x, y, 3000)
    fft, fbound = fft_convolution(x, y, 3000)
    ntt, nbound = ntt_convolution(x, y, 3000)
    assert np.max(np.abs(fft - ref)) <= max(fbound, 1e-9)
    assert np.max(np.abs(ntt - ref)) <= nbound + 1e-9
    assert nbound <= 1e-6


def test_ntt_integers_exact():
    x = np.array([1.0, 2.0, 3.0])
    y = np.array([4.0, 5.0])
    out, _ = ntt_convolution(x, y, 4)
    assert list(out) == [4.0, 13.0, 22.0, 15.0]


def test_ntt_primes_have_roots():
    for p in NTT_PRIMES:
        g = _primitive_root(p)
        assert pow(g, (p - 1) // 2, p) == p - 1
        assert (p - 1) % 2**23 == 0


def test_convolve_rejects_negative_and_unknown():
    with pytest.raises(ArgumentError):
        convolve(np.array([-1.0]), np.array([1.0]), 1)
    with pytest.raises(ArgumentError):
        convolve(np.array([1.0]), np.array([1.0]), 1, method="karatsuba")


def test_fft_certificate_failure_raises():
    x = np.ones(1000)
    with pytest.raises(AccuracyError):
        convolve(x, x, 1000, method="fft", tol=1e-20)
    with pytest.raises(AccuracyError):
        convolve(x, x, 1000, method="ntt", tol=1e-40)


def test_auto_falls_back_to_ntt():
    rng = np.random.default_rng(2)
    x, y = rng.uniform(0, 10, 500), rng.uniform(0, 10, 500)
    conv = convolve(x, y, 500, tol=1e-13)
    assert conv.method == "ntt"
    np.testing.assert_allclose(conv.values, direct_convolution(x, y, 500), atol=1e-12)


# --- representation counts ---------------------------------------------------


def test_rep_counts_hand_value(small_table):
    reps = rep_counts(small_table, ResidueClass(1, 1), ResidueClass(1, 1), 10)
    assert reps.values[4] == pytest.approx(2 * LOG2 * LOG2 + LOG3 * LOG3, abs=1e-12)
    assert reps.values[1] == 0.0
    assert reps.values[0] == 0.0


def test_rep_counts_smallest_n(small_table):
    reps = rep_counts(small_table, ResidueClass(3, 1), ResidueClass(3, 1), 1)
    assert reps.values[1] == 0.0


def test_rep_counts_against_pair_loop(small_table):
    rc1, rc2, N = ResidueClass(4, 1), ResidueClass(4, 3), 400
    reps = rep_counts(small_table, rc1, rc2, N)
    for n in (2, 3, 17, 250, 400):
        direct = sum(naive_lambda(4 * k + 1) * naive_lambda(4 * (n - k) + 3) for k in range(1, n))
        assert reps.values[n] == pytest.approx(direct, abs=1e-9)


@pytest.mark.parametrize("method", ["fft", "ntt"])
def test_rep_counts_methods_agree(small_table, method):
    rc1, rc2 = ResidueClass(7, 2), ResidueClass(7, 5)
    ref = rep_counts(small_table, rc1, rc2, 1400, method="direct").values
    got = rep_counts(small_table, rc1, rc2, 1400, method=method)
    assert got.method == method
    assert np.max(np.abs(got.values - ref)) <= 1e-6


def test_rep_counts_symmetric(small_table):
    a, b = ResidueClass(10, 3), ResidueClass(10, 7)
    np.testing.assert_allclose(rep_counts(small_table, a, b, 999).values, rep_counts(small_table, b, a, 999).values)


def test_rep_counts_preconditions(small_table):
    with pytest.raises(ArgumentError):
        rep_counts(small_table, ResidueClass(3, 1), ResidueClass(4, 1), 10)
    with pytest.raises(RangeError):
        rep_counts(small_table, ResidueClass(3, 1), ResidueClass(3, 1), 10**4)


# --- main term and discrepancy ------------------------------------------------


def test_main_term_values():
    one = ResidueClass(1, 1)
    assert main_term(one, one, 2) == pytest.approx(2 * 2 * float(mpmath.twinprime), abs=1e-5)
    assert main_term(one, one, 2) == pytest.approx(2.6406, abs=5e-4)
    # r = 3, b1 = b2 = 1: h = 3n + 2 is odd when n is odd
    three = ResidueClass(3, 1)
    assert main_term(three, three, 1) == 0.0
    m2, m4 = main_term(three, three, 2), main_term(three, three, 4)
    ratio = singular_series_product(3, 14).value / singular_series_product(3, 8).value
    assert m4 / m2 == pytest.approx(2 * ratio, rel=1e-12)


def test_main_terms_vectorised():
    rc = ResidueClass(5, 2)
    ns = np.arange(1, 400)
    np.testing.assert_allclose(main_terms(rc, rc, ns), [main_term(rc, rc, int(n)) for n in ns], rtol=1e-12)


def test_scan_single_row(small_table):
    rc = ResidueClass(3, 1)
    rep = discrepancy_scan(small_table, rc, rc, 100, window=(1, 1))
    assert rep.n.tolist() == [1]
    assert rep.delta[0] == pytest.approx(rep.R[0] - rep.main[0])
    assert rep.aggregates["rows"] == 1


def test_scan_zero_main_rows_excluded(small_table):
    rc = ResidueClass(3, 1)
    rep = discrepancy_scan(small_table, rc, rc, 2000)
    odd = rep.n % 2 == 1
    assert np.all(rep.main[odd] == 0) and np.all(np.isnan(rep.relative[odd]))
    assert rep.aggregates["zero_main"] == int(odd.sum())


def test_scan_window_validation(small_table):
    rc = ResidueClass(1, 1)
    with pytest.raises(ArgumentError):
        discrepancy_scan(small_table, rc, rc, 100, window=(50, 200))


def test_scan_median_r1(table_1e5):
    rc = ResidueClass(1, 1)
    rep = discrepancy_scan(table_1e5, rc, rc, 10**4, window=(5000, 10**4))
    assert rep.aggregates["median_abs_relative"] <= 0.15


def test_scan_thread_invariant(table_1e5):
    rc1, rc2 = ResidueClass(4, 1), ResidueClass(4, 1)
    one = discrepancy_scan(table_1e5, rc1, rc2, 20_000, threads=1)
    four = discrepancy_scan(table_1e5, rc1, rc2, 20_000, threads=4)
    assert one.main.tobytes() == four.main.tobytes()
    assert one.R.tobytes() == four.R.tobytes()


# --- exceptional set ---------------------------------------------------------


def exceptions_oracle(r, b1, b2, N):
    flags = [True] * (N + 1)
    flags[0] = flags[1] = False
    for p in range(2, math.isqrt(N) + 1):
        if flags[p]:
            for k in range(p * p, N + 1, p):
                flags[k] = False
    p1s = [p for p in range(N + 1) if flags[p] and p % r == b1 % r]
    out = []
    for m in range(2, N + 1, 2):
        if (m - b1 - b2) % r:
            continue
        if not any(m - p >= 2 and flags[m - p] and (m - p) % r == b2 % r for p in p1s if p < m):
            out.append(m)
    return out


@pytest.mark.parametrize("r,b1,b2", [(1, 1, 1), (3, 1, 1), (4, 1, 3), (5, 2, 4), (6, 5, 5)])
def test_exceptions_match_oracle(small_table, r, b1, b2):
    scan = exception_scan(small_table, ResidueClass(r, b1), ResidueClass(r, b2), 3000)
    assert list(scan.evens) == exceptions_oracle(r, b1, b2, 3000)


def test_exceptions_trivial_below_minimum(small_table):
    # r = 1: 2 is the only even number below the smallest sum 2 + 2
    scan = exception_scan(small_table, ResidueClass(1, 1), ResidueClass(1, 1), 10)
    assert scan.evens == (2,)
    assert scan.count_above(2) == 0


def test_exceptions_monotone_in_N(small_table):
    rc = ResidueClass(3, 1)
    small = exception_scan(small_table, rc, rc, 2000).evens
    large = exception_scan(small_table, rc, rc, 8000).evens
    assert set(small) <= set(large)
    assert [m for m in large if m <= 2000] == list(small)


def test_admissible_evens():
    assert admissible_evens(3, 1, 1, 20).tolist() == [2, 8, 14, 20]
    assert admissible_evens(4, 1, 1, 20).tolist() == [2, 6, 10, 14, 18]


def test_exceptions_need_table(small_table):
    rc = ResidueClass(1, 1)
    with pytest.raises(RangeError):
        exception_scan(small_table, rc, rc, 20_000)
