import math

import pytest

from goldbach_ap.sieve import build_lambda_table

_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


@pytest.fixture(scope="session")
def small_table():
    return build_lambda_table(10**4)


@pytest.fixture(scope="session")
def table_1e5():
    return build_lambda_table(4 * 10**5)


@pytest.fixture(scope="session")
def big_table():
    # covers r*N + b for r <= 3 at N = 10**6 and the E_r(5e6) average
    return build_lambda_table(5 * 10**6 + 10)


def naive_lambda(n: int) -> float:
    """Lambda(n) by trial division."""
    if n < 2:
        return 0.0
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return math.log(p) if n == 1 else 0.0
    return math.log(n)


def naive_error_term(lam, d: int, X: int) -> list[float]:
    """``E_d(x)`` for all integers ``x <= X`` by a scalar double loop.

    The class sums are Neumaier-compensated; at each integer ``t`` the
    deviation is taken both at ``t`` and as ``t`` is approached from below.
    """
    hs = [h for h in range(d) if math.gcd(h, d) == 1]
    phi = len(hs)
    sums = {h: [0.0, 0.0] for h in hs}
    out = [1.0] * (X + 1)
    worst = 0.0
    for t in range(1, X + 1):
        drift = t / phi
        for h in hs:
            s, c = sums[h]
            before = s + c
            if t % d == h % d:
                v = lam[t]
                tot = s + v
                if abs(s) >= abs(v):
                    c += (s - tot) + v
                else:
                    c += (v - tot) + s
                s = tot
                sums[h] = [s, c]
            worst = max(worst, abs(before - drift), abs(s + c - drift))
        out[t] = worst + 1.0
    return out


class Criterion:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.detail = ""

    def check(self, ok: bool, detail: str) -> None:
        self.detail = detail
        assert ok, f"criterion {self.number} ({self.title}) failed: {detail}"


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("acceptance")
    crit = Criterion(*marker.args)
    yield crit
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    _ACCEPTANCE[crit.number] = (status, crit.title, crit.detail)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else ""))
