import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from repayrisk.calibrate import (
    PremiumAdvisory,
    SolvencyTarget,
    compare_arrivals,
    generate_table,
    load_golden,
    min_rate_bisection,
    min_rate_memoryless,
    min_rate_randomized,
    premium_split,
    table_csv,
)
from repayrisk.closedform import phi_erlang2, phi_memoryless, phi_randomized
from repayrisk.errors import ConvergenceError, DomainError
from repayrisk.model import ArrivalLaw, DisasterModel, SeverityLaw

LEGACY = SolvencyTarget(1e-4, "table1_legacy")
TARGET = SolvencyTarget(1e-4)


def expo(lam, alpha):
    return DisasterModel(ArrivalLaw.exponential(lam), SeverityLaw(alpha))


def randomized(k, alpha):
    return DisasterModel(ArrivalLaw.randomized(k, 1.0 / k), SeverityLaw(alpha))


@pytest.mark.parametrize("lam,alpha,expected", [(1, 1, 0.0850603), (5, 6, 0.234856)])
def test_legacy_memoryless_values(lam, alpha, expected):
    q = min_rate_memoryless(lam, alpha, LEGACY)
    assert q.rate == pytest.approx(expected, rel=1e-6)
    assert q.method == "closed_form"


def test_memoryless_scales_with_lambda():
    for alpha in (0.5, 3.0, 20.0):
        assert min_rate_memoryless(2.0, alpha, TARGET).rate == 2 * min_rate_memoryless(1.0, alpha, TARGET).rate


@pytest.mark.parametrize("k,alpha,expected,rel", [(1, 1, 99.0, 1e-12), (5, 4, 2.98014, 1e-4), (9, 7, 0.927026, 1e-4)])
def test_randomized_values(k, alpha, expected, rel):
    assert min_rate_randomized(k, alpha, TARGET).rate == pytest.approx(expected, rel=rel)


def test_randomized_needs_default_convention():
    with pytest.raises(DomainError):
        min_rate_randomized(1, 1, LEGACY)


@given(st.floats(0.05, 10.0), st.floats(0.05, 40.0), st.floats(1e-8, 0.5))
def test_memoryless_round_trip(lam, alpha, eps):
    q = min_rate_memoryless(lam, alpha, SolvencyTarget(eps))
    # phi at c / u = rate with u = 1
    assert phi_memoryless(expo(lam, alpha), 1.0, q.rate) == pytest.approx(eps, rel=1e-9)


@given(st.floats(0.2, 10.0), st.floats(0.05, 30.0), st.floats(1e-8, 0.5))
def test_randomized_round_trip(k, alpha, eps):
    q = min_rate_randomized(k, alpha, SolvencyTarget(eps))
    assert phi_randomized(randomized(k, alpha), 1.0, q.rate) == pytest.approx(eps, rel=1e-9)


def test_legacy_round_trip():
    q = min_rate_memoryless(3.0, 2.0, LEGACY)
    # the legacy convention pins the upper gamma tail, i.e. psi, at eps
    assert 1 - phi_memoryless(expo(3.0, 2.0), 1.0, q.rate) == pytest.approx(1e-4, rel=1e-9)


def test_monotone_in_eps_and_alpha():
    rows, cols, _ = load_golden("table1")
    eps = [1e-6, 1e-4, 1e-2, 0.2]
    for lam in rows:
        for alpha in cols:
            rates = [min_rate_memoryless(lam, alpha, SolvencyTarget(e)).rate for e in eps]
            assert np.all(np.diff(rates) <= 0)
        by_alpha = [min_rate_memoryless(lam, a, TARGET).rate for a in cols]
        assert np.all(np.diff(by_alpha) <= 0)


def test_bisection_agrees_with_closed_forms():
    u = 10.0
    m = expo(0.5, 3.0)
    q = min_rate_bisection(lambda c: phi_memoryless(m, u, c), u, TARGET)
    assert q.method == "bisection"
    assert q.rate == pytest.approx(min_rate_memoryless(0.5, 3.0, TARGET).rate, rel=1e-6)
    r = randomized(3.0, 2.0)
    q = min_rate_bisection(lambda c: phi_randomized(r, u, c), u, TARGET)
    assert q.rate == pytest.approx(min_rate_randomized(3.0, 2.0, TARGET).rate, rel=1e-6)


def test_bisection_on_erlang():
    m = DisasterModel(ArrivalLaw.erlang(2, 1.0), SeverityLaw(2.0))
    eps = 1e-3
    q = min_rate_bisection(lambda c: phi_erlang2(m, 5.0, c), 5.0, SolvencyTarget(eps), tol=1e-10)
    assert phi_erlang2(m, 5.0, q.rate * 5.0) == pytest.approx(eps, rel=1e-6)


def test_bisection_expands_bracket():
    m = expo(1.0, 1.0)
    u = 1.0
    q = min_rate_bisection(lambda c: phi_memoryless(m, u, c), u, TARGET, bracket=(1e3, 2e3))
    assert q.rate == pytest.approx(min_rate_memoryless(1.0, 1.0, TARGET).rate, rel=1e-6)


def test_constant_evaluator_meets_target_everywhere():
    phi = lambda c: 1e-4
    q = min_rate_bisection(phi, 2.0, TARGET, bracket=(0.5, 1.0))
    assert 0 < q.rate * 2.0 <= 1.0
    assert phi(q.rate * 2.0) <= TARGET.epsilon


def test_bracket_failure_names_values():
    with pytest.raises(ConvergenceError, match="bracket failure"):
        min_rate_bisection(lambda c: 0.5, 1.0, TARGET)
    with pytest.raises(DomainError):
        min_rate_bisection(lambda c: 0.0, 1.0, TARGET, bracket=(1.0, 0.5))


def test_premium_split():
    assert premium_split(0.1, 0.1) == 0.0
    assert premium_split(0.12, 0.10) == pytest.approx(0.02)
    _, _, t2 = load_golden("table2")
    assert premium_split(t2[0, 6], 2.0) == pytest.approx(0.16228, abs=1e-12)
    with pytest.warns(PremiumAdvisory):
        assert premium_split(0.05, 0.1) == 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        premium_split(0.2, 0.1)


def test_target_validation():
    for eps in (0.0, 1.0, -0.1):
        with pytest.raises(DomainError):
            SolvencyTarget(eps)
    with pytest.raises(DomainError):
        SolvencyTarget(0.1, "bogus")


# ---------------------------------------------------------------- tables

def test_table1_regenerates():
    rows, cols, golden = load_golden("table1")
    assert len(rows) * len(cols) == 30
    got = generate_table(rows, cols, LEGACY, "memoryless")
    assert np.max(np.abs(got / golden - 1)) <= 1e-4


def test_table2_regenerates():
    rows, cols, golden = load_golden("table2")
    assert len(rows) * len(cols) == 35
    got = generate_table(rows, cols, TARGET, "randomized", workers=3)
    assert np.max(np.abs(got / golden - 1)) <= 1e-3


def test_single_cell_table():
    got = generate_table([2.0], [3.0], TARGET)
    assert got.shape == (1, 1)
    assert got[0, 0] == min_rate_memoryless(2.0, 3.0, TARGET).rate


def test_workers_do_not_change_tables():
    rows, cols, _ = load_golden("table2")
    assert np.array_equal(generate_table(rows, cols, TARGET, "randomized", 1),
                          generate_table(rows, cols, TARGET, "randomized", 4))


def test_table_csv_layout():
    text = table_csv(np.array([[0.0850603, 0.1]]), [1.0], [1.0, 2.0])
    assert text.splitlines() == ["lambda\\alpha,1,2", "1,0.0850603,0.1"]


def test_unknown_family():
    with pytest.raises(DomainError):
        generate_table([1.0], [1.0], TARGET, "erlang")


# ------------------------------------------------------------ comparison

def test_compare_arrivals_curves():
    u = np.linspace(0.0, 300.0, 301)
    curves = compare_arrivals(20.0, 2.0, u, mean_rate=1.0, ks=(1.0, 3.0, 5.0))
    assert set(curves) == {"memoryless", "randomized_k1", "randomized_k3", "randomized_k5"}
    base = curves["memoryless"]
    for name, vals in curves.items():
        assert np.all((vals >= 0) & (vals <= 1))
        assert np.all(np.diff(vals) >= 0)
        if name != "memoryless":
            crossings = np.count_nonzero(np.diff(np.sign(vals - base)[1:]) != 0)
            assert crossings <= 4
    # less dispersed rates bring the curve closer to the fixed-rate one
    gaps = [np.abs(curves[f"randomized_k{k}"] - base).max() for k in (1, 3, 5)]
    assert gaps[0] > gaps[1] > gaps[2]
