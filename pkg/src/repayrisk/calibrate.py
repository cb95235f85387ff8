"""Minimum repayment rates that meet a solvency target.

Given a bound ``eps`` on the infinite-horizon default probability, the
smallest admissible repayment rate per unit of loan, ``c / u``, is found in
closed form for the memoryless and randomized-arrival models, and by root
finding for anything else.  The difference to the plain mortgage rate is the
insurance premium.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .closedform import phi_memoryless, phi_randomized
from .errors import ConvergenceError, DomainError
from .model import ArrivalLaw, DisasterModel, SeverityLaw
from .specfun import inv_reg_beta, inv_reg_gamma

__all__ = [
    "SolvencyTarget",
    "PremiumQuote",
    "PremiumAdvisory",
    "min_rate_memoryless",
    "min_rate_randomized",
    "min_rate_bisection",
    "premium_split",
    "generate_table",
    "table_csv",
    "load_golden",
    "compare_arrivals",
]

DEFAULT_AT_MOST_EPS = "default_at_most_eps"
TABLE1_LEGACY = "table1_legacy"


class PremiumAdvisory(UserWarning):
    """The quoted total rate is below the base rate."""


@dataclass(frozen=True)
class SolvencyTarget:
    """Bound ``epsilon`` on the default probability.

    ``default_at_most_eps`` asks for ``phi_inf(u) <= eps``.
    ``table1_legacy`` inverts the upper regularized gamma tail at ``eps``
    instead; the shipped ``table1`` reference values follow this convention.
    """

    epsilon: float
    convention: str = DEFAULT_AT_MOST_EPS

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if self.convention not in (DEFAULT_AT_MOST_EPS, TABLE1_LEGACY):
            raise DomainError(f"unknown convention {self.convention!r}")


@dataclass(frozen=True)
class PremiumQuote:
    """Minimum ``c / u`` (per unit time) meeting ``target``."""

    rate: float
    model: str
    target: SolvencyTarget
    method: str


def _positive(x, name):
    x = float(x)
    if not (x > 0) or not math.isfinite(x):
        raise DomainError(f"{name} must be positive, got {x!r}")
    return x


def min_rate_memoryless(lam: float, alpha: float, target: SolvencyTarget) -> PremiumQuote:
    """``c / u = lam / x`` with ``x`` the gamma(alpha + 1) quantile at ``eps``.

    Under ``default_at_most_eps`` ``x`` solves ``P(alpha + 1, x) = eps``; under
    ``table1_legacy`` it solves ``Q(alpha + 1, x) = eps``.

    Examples
    --------
    >>> q = min_rate_memoryless(1.0, 1.0, SolvencyTarget(1e-4, "table1_legacy"))
    >>> round(q.rate, 7)
    0.0850603
    """
    lam = _positive(lam, "lambda")
    alpha = _positive(alpha, "alpha")
    tail = "upper" if target.convention == TABLE1_LEGACY else "lower"
    x = inv_reg_gamma(alpha + 1.0, target.epsilon, tail=tail)
    return PremiumQuote(lam / x, f"memoryless(lam={lam:g},alpha={alpha:g})", target, "closed_form")


def min_rate_randomized(k: float, alpha: float, target: SolvencyTarget, theta: float | None = None) -> PremiumQuote:
    """``c / u = theta (1 - x) / x`` with ``x`` solving ``I_x(alpha + 1, k) = eps``.

    ``theta`` defaults to ``1 / k``, which fixes the mean arrival rate at 1; the
    formula then reads ``(1 - x) / (k x)``.
    """
    k = _positive(k, "k")
    alpha = _positive(alpha, "alpha")
    theta = 1.0 / k if theta is None else _positive(theta, "theta")
    if target.convention != DEFAULT_AT_MOST_EPS:
        raise DomainError("randomized quotes use the default_at_most_eps convention")
    x = inv_reg_beta(alpha + 1.0, k, target.epsilon)
    return PremiumQuote(theta * (1.0 - x) / x, f"randomized(k={k:g},theta={theta:g},alpha={alpha:g})",
                        target, "closed_form")


def min_rate_bisection(phi: Callable[[float], float], u: float, target: SolvencyTarget,
                       bracket: tuple[float, float] = (1e-3, 1.0), tol: float = 1e-12,
                       model: str = "custom") -> PremiumQuote:
    """Smallest ``c`` with ``phi(c) <= eps``, returned as ``c / u``.

    Parameters
    ----------
    phi : callable
        Default probability as a function of the repayment rate ``c`` at the
        fixed loan size ``u``; must be nonincreasing in ``c``.
    bracket : (float, float)
        Initial guess for the root; it is widened by factors of 2 (at most 60
        times per side) until ``phi(lo) > eps >= phi(hi)``.
    tol : float
        Relative tolerance on ``c``.
    """
    u = _positive(u, "u")
    eps = target.epsilon
    lo, hi = (float(b) for b in bracket)
    if not (0 < lo < hi):
        raise DomainError(f"bracket must satisfy 0 < lo < hi, got {bracket!r}")
    f = lambda c: phi(c) - eps
    flo, fhi = f(lo), f(hi)
    for _ in range(60):
        if fhi <= 0:
            break
        lo, flo = hi, fhi
        hi *= 2.0
        fhi = f(hi)
    for _ in range(60):
        if flo > 0:
            break
        hi, fhi = lo, flo
        lo /= 2.0
        flo = f(lo)
    if fhi > 0:
        raise ConvergenceError(f"bracket failure: phi({hi:g}) = {fhi + eps:.6g} still above eps = {eps:g}")
    if flo <= 0:
        # the target is met everywhere in the bracket
        return PremiumQuote(lo / u, model, target, "bisection")
    if fhi == 0.0:
        return PremiumQuote(hi / u, model, target, "bisection")
    c_star = optimize.brentq(f, lo, hi, xtol=1e-300, rtol=max(tol, 4 * np.finfo(float).eps), maxiter=500)
    return PremiumQuote(c_star / u, model, target, "bisection")


def premium_split(total_rate: float, base_rate: float) -> float:
    """Insurance premium ``c* - c0``.

    A total below the base rate yields 0 and a :class:`PremiumAdvisory` warning.
    """
    total_rate = _positive(total_rate, "total rate")
    base_rate = _positive(base_rate, "base rate")
    if total_rate < base_rate:
        warnings.warn(f"total rate {total_rate:g} is below the base rate {base_rate:g}; premium set to 0",
                      PremiumAdvisory, stacklevel=2)
        return 0.0
    return total_rate - base_rate


def generate_table(rows: Sequence[float], cols: Sequence[float], target: SolvencyTarget,
                   family: str = "memoryless", workers: int = 1) -> np.ndarray:
    """Matrix of minimum ``c / u`` over a parameter grid.

    For ``family="memoryless"`` rows are ``lam`` and columns ``alpha``; for
    ``family="randomized"`` rows are ``k`` (with ``theta = 1/k``) and columns
    ``alpha``.
    """
    if family == "memoryless":
        cell = lambda r, a: min_rate_memoryless(r, a, target).rate
    elif family == "randomized":
        cell = lambda r, a: min_rate_randomized(r, a, target).rate
    else:
        raise DomainError(f"unknown model family {family!r}")
    jobs = [(i, j, r, a) for i, r in enumerate(rows) for j, a in enumerate(cols)]
    out = np.empty((len(rows), len(cols)))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = list(pool.map(lambda job: cell(job[2], job[3]), jobs))
    else:
        vals = [cell(r, a) for _, _, r, a in jobs]
    for (i, j, _, _), v in zip(jobs, vals):
        out[i, j] = v
    return out


def table_csv(matrix, rows, cols, row_name="lambda", col_name="alpha", digits=6) -> str:
    """CSV with a header row of column parameters and a leading row-parameter column."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"{row_name}\\{col_name}"] + [f"{c:g}" for c in cols])
    for r, vals in zip(rows, matrix):
        w.writerow([f"{r:g}"] + [f"{v:.{digits}g}" for v in vals])
    return buf.getvalue()


def load_golden(name: str):
    """Load a shipped reference table (``table1`` or ``table2``).

    Returns
    -------
    rows, cols, matrix
    """
    text = resources.files("repayrisk").joinpath("data", f"{name}.csv").read_text()
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = list(csv.reader(lines))
    cols = [float(x) for x in reader[0][1:]]
    rows = [float(r[0]) for r in reader[1:]]
    matrix = np.array([[float(x) for x in r[1:]] for r in reader[1:]])
    return rows, cols, matrix


def compare_arrivals(alpha: float, c: float, u_grid, mean_rate: float = 1.0, ks: Sequence[float] = (1.0, 3.0, 5.0)):
    """Default curves of memoryless vs randomized arrivals with equal mean rate.

    Returns a dict mapping a label to the array of ``phi_inf`` values over
    ``u_grid``.  The randomized curves use ``Lambda ~ Gamma(k, mean_rate / k)``.
    """
    u_grid = np.asarray(u_grid, dtype=float)
    sev = SeverityLaw(alpha)
    out = {"memoryless": np.array([phi_memoryless(DisasterModel(ArrivalLaw.exponential(mean_rate), sev), u, c)
                                   for u in u_grid])}
    for k in ks:
        model = DisasterModel(ArrivalLaw.randomized(k, mean_rate / k), sev)
        out[f"randomized_k{k:g}"] = np.array([phi_randomized(model, u, c) for u in u_grid])
    return out
