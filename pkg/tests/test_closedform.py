import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from repayrisk.closedform import (
    default_curve,
    phi_erlang2,
    phi_memoryless,
    phi_randomized,
    psi_hat_laplace,
    psi_memoryless,
    psi_randomized,
)
from repayrisk.errors import DomainError
from repayrisk.model import ArrivalLaw, DisasterModel, LoanSpec, SeverityLaw
from repayrisk.montecarlo import simulate_algorithm1
from repayrisk.specfun import reg_gamma_lower


def memoryless(lam=1.0, alpha=1.0):
    return DisasterModel(ArrivalLaw.exponential(lam), SeverityLaw(alpha))


def randomized(k=1.0, theta=1.0, alpha=1.0):
    return DisasterModel(ArrivalLaw.randomized(k, theta), SeverityLaw(alpha))


def erlang2(lam=1.0, alpha=2.0):
    return DisasterModel(ArrivalLaw.erlang(2, lam), SeverityLaw(alpha))


def test_zero_loan_never_defaults():
    assert phi_memoryless(memoryless(), 0.0, 1.0) == 0.0
    assert phi_randomized(randomized(), 0.0, 1.0) == 0.0
    assert phi_erlang2(erlang2(), 0.0, 1.0) == 0.0


def test_memoryless_values():
    assert phi_memoryless(memoryless(), LoanSpec(1.0, 1.0)) == pytest.approx(1 - 2 / math.e, abs=1e-15)
    m = memoryless(0.2, 20.0)
    assert phi_memoryless(m, LoanSpec(50.0, 1.0)) == pytest.approx(1.5882606618580573e-3, rel=1e-12)
    # 0.0035 is what shape alpha (instead of alpha + 1) would give
    assert phi_memoryless(m, LoanSpec(50.0, 1.0)) != pytest.approx(0.0035, rel=0.1)
    assert reg_gamma_lower(20.0, 10.0) == pytest.approx(0.0035, rel=0.02)


def test_randomized_power_case():
    assert phi_randomized(randomized(), LoanSpec(1.0, 1.0)) == pytest.approx(0.25, abs=1e-15)
    # b = 1 reduces the beta CDF to x^(alpha+1)
    for u in (0.3, 2.0, 9.0):
        x = u / (1 + u)
        assert phi_randomized(randomized(alpha=2.5), u, 1.0) == pytest.approx(x**3.5, rel=1e-13)


def test_complements_are_accurate():
    m = memoryless(1.0, 1.0)
    assert psi_memoryless(m, 60.0, 1.0) == pytest.approx(61 * math.exp(-60), rel=1e-12)
    r = randomized(3.0, 1.0, 1.0)
    assert psi_randomized(r, 2.0, 1.0) == pytest.approx(1 - phi_randomized(r, 2.0, 1.0), abs=1e-15)


@pytest.mark.parametrize("k", [1.0, 3.0])
def test_randomized_tail_order(k):
    m = randomized(k, 1.0, 1.0)
    u = np.logspace(3, 5, 41)
    psi = np.array([psi_randomized(m, x, 1.0) for x in u])
    slope = np.polyfit(np.log(u), np.log(psi), 1)[0]
    assert slope == pytest.approx(-k, rel=0.05)


def _erlang_g(alpha, v):
    # cosh-kernel double integral, evaluated by 2-D quadrature
    inner = lambda z, y: z ** (alpha + 0.5) * math.exp(-z)
    outer = lambda y: y ** -0.5 * math.exp(-y) * math.cosh(2 * math.sqrt(alpha * y))
    val, _ = integrate.dblquad(lambda z, y: outer(y) * inner(z, y), 0, v, 0, lambda y: v - y,
                               epsabs=1e-13, epsrel=1e-12)
    return val


@pytest.mark.parametrize("alpha,v", [(2.0, 0.7), (2.0, 3.0), (0.5, 2.0)])
def test_erlang2_matches_double_integral(alpha, v):
    C = 1.0 / (math.gamma(alpha + 1.5) * math.sqrt(math.pi) * math.exp(alpha))
    assert phi_erlang2(erlang2(1.0, alpha), v, 1.0) == pytest.approx(C * _erlang_g(alpha, v), rel=1e-8)


def test_erlang2_normalizer_limit():
    # phi -> 1 at lam u / c = 200 confirms C = 1 / lim g
    assert phi_erlang2(erlang2(1.0, 2.0), 200.0, 1.0) == pytest.approx(1.0, abs=1e-6)
    assert phi_erlang2(erlang2(2.0, 5.0), 50.0, 0.5) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("u,seed", [(0.5, 11), (1.0, 12), (2.0, 13), (5.0, 14)])
def test_erlang2_against_simulation(u, seed):
    m = erlang2(1.0, 2.0)
    est = simulate_algorithm1(m, LoanSpec(u, 1.0), 50 * u, 10**6, seed=seed)
    assert abs(est.mean - phi_erlang2(m, u, 1.0)) <= 3 * est.stderr


def test_closed_forms_reject_wrong_model():
    with pytest.raises(DomainError):
        phi_memoryless(randomized(), 1.0, 1.0)
    with pytest.raises(DomainError):
        phi_erlang2(DisasterModel(ArrivalLaw.erlang(3, 1.0), SeverityLaw(1.0)), 1.0, 1.0)
    with pytest.raises(DomainError):
        phi_memoryless(memoryless(), -1.0, 1.0)
    with pytest.raises(DomainError):
        default_curve(DisasterModel(ArrivalLaw.erlang(3, 1.0), SeverityLaw(1.0)), 1.0)


# ----------------------------------------------------------------- Laplace

def exp_hat(lam):
    return lambda s: lam / (lam + s)


def test_laplace_initial_value():
    s = 1e4
    assert s * psi_hat_laplace(exp_hat(1.0), 1.0, 1.0, s) == pytest.approx(1.0, abs=1e-2)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_laplace_matches_direct_transform(s):
    m = memoryless(1.0, 1.0)
    direct, _ = integrate.quad(lambda u: math.exp(-s * u) * psi_memoryless(m, u, 1.0), 0, np.inf,
                               epsabs=1e-14, epsrel=1e-12)
    assert psi_hat_laplace(exp_hat(1.0), 1.0, 1.0, s) == pytest.approx(direct, rel=1e-4)
    # alpha = 1 inverts to a Gamma(2) tail: 1/(s+1) + 1/(s+1)^2
    assert direct == pytest.approx(1 / (s + 1) + 1 / (s + 1) ** 2, rel=1e-10)


def test_laplace_scaling():
    s = 1.3
    base = s * psi_hat_laplace(exp_hat(0.8), 3.0, 1.0, s)
    assert (s / 2) * psi_hat_laplace(exp_hat(0.8), 3.0, 2.0, s / 2) == pytest.approx(base, rel=1e-6)
    # lam and c scaled together leave psi, hence its transform, unchanged
    assert s * psi_hat_laplace(exp_hat(1.6), 3.0, 2.0, s) == pytest.approx(base, rel=1e-6)


def test_laplace_erlang_against_quadrature():
    m = erlang2(1.0, 2.0)
    s = 0.7
    direct, _ = integrate.quad(lambda u: math.exp(-s * u) * (1 - phi_erlang2(m, u, 1.0)), 0, 80,
                               epsabs=1e-12, limit=200)
    hat = psi_hat_laplace(lambda z: (1.0 / (1.0 + z)) ** 2, 2.0, 1.0, s)
    assert hat == pytest.approx(direct, rel=1e-6)


def test_laplace_domain():
    with pytest.raises(DomainError):
        psi_hat_laplace(exp_hat(1.0), 1.0, 1.0, 0.0)


# -------------------------------------------------------------- properties

curves = st.sampled_from([
    ("memoryless", memoryless(0.5, 3.0), 1.0),
    ("memoryless", memoryless(2.0, 0.3), 0.7),
    ("randomized", randomized(2.0, 0.5, 1.5), 1.0),
    ("erlang2", erlang2(1.0, 2.0), 1.0),
])


@given(curves)
def test_default_curve_shape(case):
    _, model, c = case
    curve = default_curve(model, c)
    n = 1000 if model.arrivals.kind != "erlang" else 120
    grid = np.linspace(0.0, 40.0, n)
    vals = curve(grid)
    assert vals[0] == 0.0
    assert np.all((vals >= 0) & (vals <= 1))
    assert np.all(np.diff(vals) >= -1e-12)


def test_default_curve_tends_to_one():
    for model, top in ((memoryless(0.5, 3.0), 400.0), (randomized(2.0, 0.5, 1.5), 1e8), (erlang2(), 300.0)):
        curve = default_curve(model, 1.0)
        assert curve(top) == pytest.approx(1.0, abs=1e-6)
        assert curve.psi(top) == pytest.approx(0.0, abs=1e-6)


@given(st.floats(0.1, 5.0), st.floats(0.1, 30.0), st.floats(0.1, 5.0), st.floats(0.0, 100.0))
def test_memoryless_is_gamma_cdf(lam, alpha, c, u):
    from scipy import stats
    expected = stats.gamma(a=alpha + 1, scale=c / lam).cdf(u)
    assert phi_memoryless(memoryless(lam, alpha), u, c) == pytest.approx(expected, abs=1e-12)
