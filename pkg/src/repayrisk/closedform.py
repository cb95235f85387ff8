"""Exact infinite-horizon default probabilities.

``phi(u)`` is the probability that the perpetuity ``U_inf = c * sum_i W_i
exp(-(X_1 + ... + X_{i-1}))`` never exceeds the loan size ``u``.  Three
arrival laws admit closed forms when severities are exponential(alpha):

* exponential(lam): a Gamma(alpha + 1, lam / c) CDF,
* randomized exponential with Gamma(k, theta) rate: a regularized beta,
* Erlang(2, lam): a one-dimensional integral of a regularized gamma.

The Laplace transform of the repayment probability ``psi = 1 - phi`` is
available for any arrival law with a known density transform.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError
from .model import DisasterModel, LoanSpec
from .specfun import reg_beta, reg_gamma_lower, reg_gamma_upper

__all__ = [
    "QuadConfig",
    "DefaultCurve",
    "phi_memoryless",
    "psi_memoryless",
    "phi_randomized",
    "psi_randomized",
    "phi_erlang2",
    "psi_hat_laplace",
    "default_curve",
]


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances passed to adaptive quadrature."""

    epsabs: float = 1e-13
    epsrel: float = 1e-11
    limit: int = 200
    # an estimate above this is reported as a failure
    max_error: float = 1e-8


def _quad(f, a, b, cfg, what, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=cfg.epsabs, epsrel=cfg.epsrel,
                                      limit=cfg.limit, points=points)
        except integrate.IntegrationWarning as exc:
            val, err = integrate.quad(f, a, b, epsabs=cfg.epsabs, epsrel=cfg.epsrel,
                                      limit=cfg.limit, points=points)
            if err > cfg.max_error * max(1.0, abs(val)):
                raise ConvergenceError(f"{what}: quadrature failed, error estimate {err:.3g} ({exc})") from None
    if err > cfg.max_error * max(1.0, abs(val)):
        raise ConvergenceError(f"{what}: quadrature error estimate {err:.3g} exceeds {cfg.max_error:g}")
    return val


def _clamp(p):
    return min(1.0, max(0.0, p))


def _check_u(u):
    u = float(u)
    if not (u >= 0.0) or math.isnan(u):
        raise DomainError(f"loan size must be nonnegative, got {u!r}")
    return u


def _require(model, kind, shape=None):
    if model.arrivals.kind != kind or (shape is not None and model.arrivals.shape != shape):
        label = kind if shape is None else f"{kind}({shape})"
        raise DomainError(f"this closed form needs {label} arrivals, got {model.arrivals.kind}")
    if model.severity.kind != "exponential":
        raise DomainError("closed forms need exponential severities")


def _unpack(loan, c):
    if isinstance(loan, LoanSpec):
        return loan.u, loan.c
    if c is None:
        raise DomainError("pass a LoanSpec or both u and c")
    c = float(c)
    if not c > 0 or not math.isfinite(c):
        raise DomainError(f"repayment rate must be positive, got {c!r}")
    return _check_u(loan), c


def phi_memoryless(model: DisasterModel, loan, c=None) -> float:
    """Default probability for exponential arrivals.

    ``phi(u) = P(alpha + 1, lam * u / c)``.  Accepts a :class:`LoanSpec` or
    ``(u, c)`` so that ``u = 0`` can be evaluated.

    Examples
    --------
    >>> from repayrisk.model import ArrivalLaw, SeverityLaw, DisasterModel
    >>> m = DisasterModel(ArrivalLaw.exponential(1.0), SeverityLaw(1.0))
    >>> round(phi_memoryless(m, 1.0, 1.0), 7)
    0.2642411
    """
    _require(model, "exponential")
    u, c = _unpack(loan, c)
    return _clamp(reg_gamma_lower(model.severity.alpha + 1.0, model.arrivals.lam * u / c))


def psi_memoryless(model: DisasterModel, loan, c=None) -> float:
    """Repayment probability ``1 - phi_memoryless``, from the upper gamma tail."""
    _require(model, "exponential")
    u, c = _unpack(loan, c)
    return _clamp(reg_gamma_upper(model.severity.alpha + 1.0, model.arrivals.lam * u / c))


def phi_randomized(model: DisasterModel, loan, c=None) -> float:
    """Default probability when the arrival rate is Gamma(k, theta) distributed.

    ``phi(u) = I_x(alpha + 1, k)`` with ``x = u theta / (c + u theta)``.
    The tail ``1 - phi`` decays like ``u^-k``.
    """
    _require(model, "randomized_exponential")
    u, c = _unpack(loan, c)
    a = model.arrivals
    ut = u * a.theta
    return _clamp(reg_beta(model.severity.alpha + 1.0, a.k, ut / (c + ut)))


def psi_randomized(model: DisasterModel, loan, c=None) -> float:
    """Repayment probability ``1 - phi_randomized`` without cancellation.

    Uses ``1 - I_x(a, b) = I_{1-x}(b, a)``, which keeps full relative accuracy
    in the ``u^-k`` tail.
    """
    _require(model, "randomized_exponential")
    u, c = _unpack(loan, c)
    a = model.arrivals
    return _clamp(reg_beta(a.k, model.severity.alpha + 1.0, c / (c + u * a.theta)))


def phi_erlang2(model: DisasterModel, loan, c=None, quad: QuadConfig | None = None) -> float:
    """Default probability for Erlang(2, lam) arrivals.

    With ``v = lam u / c`` the default probability is

    ``phi = pi^-1/2 int_0^sqrt(v) [e^{-(s - sqrt(alpha))^2} + e^{-(s + sqrt(alpha))^2}] P(alpha + 3/2, v - s^2) ds``

    which is the cosh-kernel double integral after substituting ``s^2`` for the
    outer variable and integrating the inner one in closed form.  The
    normalizing constant ``1 / (Gamma(alpha + 3/2) sqrt(pi) e^alpha)`` is
    absorbed into the Gaussian factors, so no cancellation occurs for large u.
    """
    _require(model, "erlang", shape=2)
    u, c = _unpack(loan, c)
    quad = quad or QuadConfig()
    alpha = model.severity.alpha
    v = model.arrivals.lam * u / c
    if v == 0.0:
        return 0.0
    b = math.sqrt(alpha)
    a = alpha + 1.5
    root = math.sqrt(v)

    def f(s):
        gauss = math.exp(-(s - b) ** 2) + math.exp(-(s + b) ** 2)
        return gauss * reg_gamma_lower(a, max(v - s * s, 0.0))

    points = [b] if 0.0 < b < root else None
    val = _quad(f, 0.0, root, quad, "phi_erlang2", points=points)
    return _clamp(val / math.sqrt(math.pi))


def psi_hat_laplace(f_hat: Callable[[float], float], alpha: float, c: float, s: float,
                    quad: QuadConfig | None = None) -> float:
    """Laplace transform of the repayment probability ``psi = 1 - phi``.

    Parameters
    ----------
    f_hat : callable
        Laplace transform of the inter-arrival density, ``E[exp(-s W)]``.
    alpha : float
        Rate of the exponential severity.
    c : float
        Repayment rate.
    s : float
        Transform argument, ``s > 0``.

    Notes
    -----
    Evaluated as

    ``(1 - f(cs)) / s + alpha f(cs) / s * int_0^s (1 - f(cr)) / r * exp(-I(r)) dr``

    with ``I(r) = alpha int_r^s (1 - f(cv)) / v dv``.  This is the
    ``s^(-alpha-1) int_0^s r^(alpha-1) ...`` representation with the power
    factor folded into the exponent, which keeps it finite for large alpha.
    """
    quad = quad or QuadConfig()
    for name, val in (("alpha", alpha), ("c", c), ("s", s)):
        if not (val > 0) or not math.isfinite(val):
            raise DomainError(f"{name} must be positive, got {val!r}")

    def h(r):
        # (1 - f(cr)) / r, continuous at 0 with limit c E[W]
        if r == 0.0:
            r = 1e-300
        return (1.0 - f_hat(c * r)) / r

    def outer(r):
        tail = _quad(h, r, s, quad, "psi_hat_laplace (inner)")
        return h(r) * math.exp(-alpha * tail)

    fs = f_hat(c * s)
    g = _quad(outer, 0.0, s, quad, "psi_hat_laplace")
    return (1.0 - fs) / s + alpha * fs * g / s


@dataclass(frozen=True)
class DefaultCurve:
    """Infinite-horizon default probability as a function of the loan size.

    Calling the curve returns ``phi(u)``; :meth:`psi` returns ``1 - phi(u)``.
    ``tag`` records which formula produced it.
    """

    evaluator: Callable[[float], float]
    tag: str
    complement: Callable[[float], float] | None = None

    @staticmethod
    def _map(fn, u):
        u_arr = np.asarray(u, dtype=float)
        out = np.array([_clamp(fn(_check_u(x))) for x in u_arr.ravel()]).reshape(u_arr.shape)
        return float(out) if out.ndim == 0 else out

    def __call__(self, u):
        return self._map(self.evaluator, u)

    def psi(self, u):
        if self.complement is not None:
            return self._map(self.complement, u)
        return 1.0 - self(u)


def default_curve(model: DisasterModel, c: float, quad: QuadConfig | None = None) -> DefaultCurve:
    """Pick the closed form matching ``model`` for repayment rate ``c``."""
    kind = model.arrivals.kind
    if kind == "exponential":
        return DefaultCurve(lambda u: phi_memoryless(model, u, c), f"memoryless(lam={model.arrivals.lam:g})",
                            lambda u: psi_memoryless(model, u, c))
    if kind == "randomized_exponential":
        a = model.arrivals
        return DefaultCurve(lambda u: phi_randomized(model, u, c), f"randomized(k={a.k:g},theta={a.theta:g})",
                            lambda u: psi_randomized(model, u, c))
    if kind == "erlang" and model.arrivals.shape == 2:
        return DefaultCurve(lambda u: phi_erlang2(model, u, c, quad), f"erlang2(lam={model.arrivals.lam:g})")
    raise DomainError(f"no closed form for {kind} arrivals with shape {model.arrivals.shape}")
