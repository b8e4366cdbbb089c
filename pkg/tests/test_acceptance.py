"""Acceptance criteria, one test each.

Every test is tagged ``@pytest.mark.acceptance(k, title)``; the conftest hook
prints one ``[PASS]`` / ``[FAIL]`` line per criterion at the end of the run.
"""

import math
import time

import numpy as np
import pytest

from goldbach_ap.arith import ramanujan_sum
from goldbach_ap.cli import render_scan
from goldbach_ap.expsum import rational_character_sum, vaughan_check
from goldbach_ap.goldbach import ArcPartition, arc_integrals, discrepancy_scan, exception_scan, rep_counts
from goldbach_ap.goldbach.convolution import direct_convolution, fft_convolution
from goldbach_ap.expsum import progression_weights
from goldbach_ap.output import render_csv
from goldbach_ap.progression import ResidueClass, coprime_residues
from goldbach_ap.sieve import deviation_at, error_term, error_term_profile
from goldbach_ap.singular import singular_series_product, singular_series_truncated_grid

from conftest import naive_error_term
from test_goldbach import exceptions_oracle

THREADS = (1, 4, 8)


def random_class_pair(rng, max_r):
    r = int(rng.integers(1, max_r + 1))
    res = coprime_residues(r)
    return ResidueClass(r, int(rng.choice(res))), ResidueClass(r, int(rng.choice(res)))


# report builders shared with the determinism criterion


def circle_report(table, threads):
    rng = np.random.default_rng(2024)
    lines = []
    for _ in range(50):
        rc1, rc2 = random_class_pair(rng, 10)
        N = int(rng.integers(2, 1001))
        n = int(rng.integers(1, N + 1))
        (res,) = arc_integrals(table, rc1, rc2, N, [n], ArcPartition(1.0, N), threads=threads)
        lines.append([rc1.r, rc1.b, rc2.b, N, n, res.major.real, res.minor.real, res.R, res.total_check])
    return lines, render_csv("arcs", ["r", "b1", "b2", "N", "n", "major", "minor", "R", "total_check"], lines)


def convolution_report(table, threads):
    from goldbach_ap._parallel import ordered_map

    rng = np.random.default_rng(99)
    N = 10**4
    configs = [random_class_pair(rng, 30) for _ in range(20)]

    def one(cfg):
        rc1, rc2 = cfg
        w1 = progression_weights(table, rc1, N)
        w2 = progression_weights(table, rc2, N)
        fft, bound = fft_convolution(w1, w2, N + 1)
        direct = direct_convolution(w1, w2, N + 1)
        return [rc1.r, rc1.b, rc2.b, float(np.max(np.abs(fft - direct))), bound]

    rows = ordered_map(one, configs, threads)
    return rows, render_csv("convolution", ["r", "b1", "b2", "max_abs_diff", "certificate"], rows)


def trend_reports(table, threads):
    rc = ResidueClass(3, 1)
    out = {}
    for N in (10**4, 10**5, 10**6):
        out[N] = discrepancy_scan(table, rc, rc, N, window=(N // 2, N), threads=threads)
    return out


@pytest.mark.acceptance(1, "rational exponential-sum identity, r, q <= 24, |delta| <= 1e-9, < 10 s")
def test_rational_identity(criterion):
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    for r in range(1, 25):
        for q in range(1, 25):
            for a in coprime_residues(q):
                for b in coprime_residues(r):
                    lhs, rhs = rational_character_sum(r, b, q, a)
                    worst = max(worst, abs(lhs - rhs))
                    count += 1
    elapsed = time.perf_counter() - t0
    criterion.check(worst <= 1e-9 and elapsed < 10, f"{count} tuples, max |delta| = {worst:.2e}, {elapsed:.1f} s")


@pytest.mark.acceptance(2, "Ramanujan closed form vs defining sum, q, a <= 500, |delta| <= 1e-9, < 30 s")
def test_ramanujan_closed_form(criterion):
    t0 = time.perf_counter()
    a = np.arange(1, 501, dtype=np.int64)
    worst = 0.0
    for q in range(1, 501):
        t = np.array(coprime_residues(q), dtype=np.int64)
        phase = np.outer(a, t) % q / q
        definition = np.exp(2j * np.pi * phase).sum(axis=1)
        closed = np.array([ramanujan_sum(q, int(x)) for x in a])
        worst = max(worst, float(np.max(np.abs(definition - closed))))
    elapsed = time.perf_counter() - t0
    criterion.check(worst <= 1e-9 and elapsed < 30, f"max |delta| = {worst:.2e}, {elapsed:.1f} s")


@pytest.mark.acceptance(3, "Vaughan identity for y < n <= 1e4, y in {2, 5, 10, 31}, |delta| <= 1e-9")
def test_vaughan_identity(criterion, small_table):
    worst, count = 0.0, 0
    for y in (2, 5, 10, 31):
        for n in range(y + 1, 10**4 + 1):
            lhs, rhs = vaughan_check(small_table, n, y)
            worst = max(worst, abs(lhs - rhs))
            count += 1
    criterion.check(worst <= 1e-9, f"{count} cases, max |delta| = {worst:.2e}")


@pytest.mark.acceptance(4, "singular series truncated(Q=1e5) vs product(P=1e7) <= 1e-2; product(1, 2) = 1.3203 +- 5e-4")
def test_singular_cross_form(criterion):
    rs = list(range(1, 51))
    hs = [h for h in range(-200, 201) if h]
    series = singular_series_truncated_grid(rs, hs, 10**5)
    prod = np.array([[singular_series_product(r, h, 10**7).value for r in rs] for h in hs])
    worst = float(np.max(np.abs(series - prod)))
    twin = singular_series_product(1, 2, 10**7).value
    criterion.check(
        worst <= 1e-2 and abs(twin - 1.3203) <= 5e-4,
        f"max |delta| = {worst:.2e} over {series.size} pairs, product(1, 2) = {twin:.6f}",
    )


@pytest.mark.acceptance(5, "circle quadrature reproduces R(n) within 1e-4 (1 + R) on 50 random tuples")
def test_circle_exactness(criterion, table_1e5):
    rows, _ = circle_report(table_1e5, 1)
    worst = max(row[-1] / (1 + row[-2]) for row in rows)
    criterion.check(worst <= 1e-4, f"max |major + minor - R| / (1 + R) = {worst:.2e}")


@pytest.mark.acceptance(6, "FFT vs direct convolution within 1e-6 at N = 1e4, 20 configurations")
def test_convolution_correctness(criterion, table_1e5):
    rows, _ = convolution_report(table_1e5, 1)
    worst = max(row[3] for row in rows)
    criterion.check(worst <= 1e-6, f"max |fft - direct| = {worst:.2e}")


@pytest.mark.acceptance(7, "E_d streaming vs naive, d <= 50, x <= 1e4, agreement <= 1e-9")
def test_error_term_streaming(criterion, small_table):
    X = 10**4
    worst_profile = worst_point = 0.0
    bad_witness = 0
    for d in range(1, 51):
        naive = np.array(naive_error_term(small_table.lam, d, X))
        worst_profile = max(worst_profile, float(np.max(np.abs(error_term_profile(small_table, d, X) - naive))))
        for x in list(range(1, 100)) + list(range(100, X + 1, 97)) + [X]:
            res = error_term(small_table, d, x)
            worst_point = max(worst_point, abs(res.value - naive[x]))
            witness = deviation_at(small_table, d, res.argmax_h, res.argmax_t, res.from_left) + 1
            bad_witness += abs(witness - res.value) > 1e-9
    criterion.check(
        max(worst_profile, worst_point) <= 1e-9 and bad_witness == 0,
        f"all-x profile {worst_profile:.1e}, pointwise {worst_point:.1e}, {bad_witness} bad argmax witnesses",
    )


@pytest.mark.acceptance(8, "r = 3 discrepancy median decreases over N = 1e4, 1e5, 1e6 and is <= 0.15 at 1e6, < 2 min")
def test_discrepancy_trend(criterion, big_table):
    t0 = time.perf_counter()
    reps = trend_reports(big_table, 1)
    elapsed = time.perf_counter() - t0
    med = [reps[N].aggregates["median_abs_relative"] for N in (10**4, 10**5, 10**6)]
    ok = med[0] > med[1] > med[2] and med[2] <= 0.15 and elapsed < 120
    criterion.check(ok, "medians " + ", ".join(f"{m:.4f}" for m in med) + f", {elapsed:.1f} s")


@pytest.mark.acceptance(9, "exceptions above 1e3 for (r, b1, b2) = (3, 1, 1) at N = 1e6 <= 1% of N/3; N = 1e4 list exact")
def test_exception_scarcity(criterion, big_table):
    rc = ResidueClass(3, 1)
    scan = exception_scan(big_table, rc, rc, 10**6)
    frac = scan.count_above(10**3) / (10**6 / 3)
    small = exception_scan(big_table, rc, rc, 10**4)
    oracle = exceptions_oracle(3, 1, 1, 10**4)
    criterion.check(
        frac <= 0.01 and list(small.evens) == oracle,
        f"fraction {frac:.2e} ({scan.count} total), N = 1e4 list {list(small.evens)} matches oracle",
    )


@pytest.mark.acceptance(10, "mean over r <= 50 of E_r(5e6) <= 0.05 * 5e6, mean/x decreasing from x = 1e6")
def test_mean_error_term(criterion, big_table):
    means = {x: math.fsum(error_term(big_table, r, x).value for r in range(1, 51)) / 50 for x in (10**6, 5 * 10**6)}
    hi, lo = means[5 * 10**6], means[10**6]
    ok = hi <= 0.05 * 5 * 10**6 and hi / (5 * 10**6) < lo / 10**6
    criterion.check(ok, f"mean/x = {lo / 10**6:.2e} at 1e6, {hi / (5 * 10**6):.2e} at 5e6")


@pytest.mark.acceptance(11, "criteria 5, 6, 8 byte-identical at 1, 4, 8 threads")
def test_determinism(criterion, table_1e5, big_table):
    circle = {th: circle_report(table_1e5, th)[1] for th in THREADS}
    conv = {th: convolution_report(table_1e5, th)[1] for th in THREADS}
    trend = {}
    for th in THREADS:
        reps = trend_reports(big_table, th)
        trend[th] = "".join(render_scan(reps[N], "csv") for N in sorted(reps))
    same = [len(set(d.values())) == 1 for d in (circle, conv, trend)]
    criterion.check(all(same), "identical: " + ", ".join(f"{k}={v}" for k, v in zip(("circle", "convolution", "trend"), same)))
