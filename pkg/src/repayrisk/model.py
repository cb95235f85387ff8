"""Disaster model, loan terms and reproducible random streams.

A loan pool of size ``u`` is repaid continuously at rate ``c``.  Disasters
arrive after i.i.d. waiting times ``W``; each one removes a fraction of the
remaining borrowers, multiplying the repayment rate by ``exp(-X)``.  In the
randomized-arrival model the waiting times are exponential with a random rate
drawn once per scenario from a Gamma law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "SeverityLaw",
    "ArrivalLaw",
    "DisasterModel",
    "LoanSpec",
    "SeedSpec",
    "sample_pair",
    "draw_rate",
    "mean_discount",
    "model_from_mapping",
    "loan_from_mapping",
]

INDEPENDENT = "independent"
CONDITIONAL = "conditionally_independent_given_lambda"

_UINT64 = (1 << 64) - 1


def _positive(value, name):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a positive real, got {value!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be a positive real, got {value!r}")
    return value


def _exp_from_uniform(uniforms, rate):
    # inverse CDF; 1 - U lies in (0, 1] so the log is finite
    return -np.log1p(-uniforms) / rate


@dataclass(frozen=True)
class SeverityLaw:
    """Law of the log-loss ``X`` per disaster (exponential with rate ``alpha``)."""

    alpha: float
    kind: str = "exponential"

    def __post_init__(self):
        if self.kind != "exponential":
            raise DomainError(f"unsupported severity kind {self.kind!r}")
        object.__setattr__(self, "alpha", _positive(self.alpha, "severity.alpha"))

    def discount_moment(self, p=1.0):
        """``E[exp(-p X)]``."""
        return self.alpha / (self.alpha + p)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, self.alpha * np.exp(-self.alpha * np.maximum(x, 0.0)), 0.0)

    def from_uniforms(self, uniforms):
        return _exp_from_uniform(uniforms, self.alpha)

    def sample(self, rng, size=None):
        return self.from_uniforms(rng.random(size))


@dataclass(frozen=True)
class ArrivalLaw:
    """Law of the waiting time ``W`` between disasters.

    Use the constructors :meth:`exponential`, :meth:`erlang` and
    :meth:`randomized`.  For ``randomized_exponential`` the stored parameters
    describe the mixing law of the rate, ``Lambda ~ Gamma(shape=k, scale=theta)``;
    the marginal of ``W`` is then Lomax, ``P(W > w) = (1 + theta w)^-k``.
    """

    kind: str
    lam: float | None = None
    k: float | None = None
    theta: float | None = None

    def __post_init__(self):
        if self.kind == "exponential":
            object.__setattr__(self, "lam", _positive(self.lam, "arrivals.lambda"))
        elif self.kind == "erlang":
            object.__setattr__(self, "lam", _positive(self.lam, "arrivals.lambda"))
            k = self.k
            if isinstance(k, float) and k.is_integer():
                k = int(k)
            if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 1:
                raise DomainError(f"arrivals.k must be an integer >= 1 for erlang, got {self.k!r}")
            object.__setattr__(self, "k", int(k))
        elif self.kind == "randomized_exponential":
            object.__setattr__(self, "k", _positive(self.k, "arrivals.k"))
            object.__setattr__(self, "theta", _positive(self.theta, "arrivals.theta"))
        else:
            raise DomainError(f"unknown arrival kind {self.kind!r}")

    @classmethod
    def exponential(cls, lam):
        return cls("exponential", lam=lam)

    @classmethod
    def erlang(cls, k, lam):
        return cls("erlang", lam=lam, k=k)

    @classmethod
    def randomized(cls, k, theta):
        return cls("randomized_exponential", k=k, theta=theta)

    @property
    def shape(self):
        """Erlang shape (1 for exponential)."""
        return {"exponential": 1, "erlang": self.k}.get(self.kind)

    def mean(self):
        if self.kind == "randomized_exponential":
            return 1.0 / (self.theta * (self.k - 1.0)) if self.k > 1.0 else math.inf
        return self.shape / self.lam

    def moment(self, j):
        """``E[W^j]`` for integer ``j >= 0`` (``inf`` when it does not exist)."""
        if j == 0:
            return 1.0
        if self.kind == "randomized_exponential":
            # E[W^j | Lambda] = j! Lambda^-j and E[Lambda^-j] = Gamma(k-j) / (Gamma(k) theta^j)
            if self.k <= j:
                return math.inf
            return math.exp(math.lgamma(j + 1) + math.lgamma(self.k - j) - math.lgamma(self.k)) / self.theta**j
        return math.exp(math.lgamma(self.shape + j) - math.lgamma(self.shape)) / self.lam**j

    def pdf(self, w):
        w = np.asarray(w, dtype=float)
        pos = np.maximum(w, 0.0)
        if self.kind == "randomized_exponential":
            dens = self.k * self.theta * (1.0 + self.theta * pos) ** (-self.k - 1.0)
        else:
            n = self.shape
            log_d = n * math.log(self.lam) + (n - 1) * np.log(np.where(pos > 0, pos, 1.0)) - self.lam * pos
            dens = np.exp(log_d - math.lgamma(n))
            if n > 1:
                dens = np.where(pos > 0, dens, 0.0)
        return np.where(w >= 0.0, dens, 0.0)

    def sf(self, w):
        """``P(W > w)``."""
        w = np.asarray(w, dtype=float)
        pos = np.maximum(w, 0.0)
        if self.kind == "randomized_exponential":
            return (1.0 + self.theta * pos) ** (-self.k)
        z = self.lam * pos
        total = np.zeros_like(z)
        term = np.ones_like(z)
        for j in range(self.shape):
            if j:
                term = term * z / j
            total = total + term
        return np.where(w >= 0.0, np.exp(-z) * total, 1.0)

    def laplace(self, s):
        """Laplace transform of the density, ``E[exp(-s W)]`` for ``s >= 0``."""
        s = np.asarray(s, dtype=float)
        if self.kind == "randomized_exponential":
            raise DomainError("Laplace transform of the Lomax marginal is not provided")
        return (self.lam / (self.lam + s)) ** self.shape

    def mgf(self, t):
        """``E[exp(t W)]``; finite only below ``lambda`` (``inf`` otherwise)."""
        if self.kind == "randomized_exponential":
            return 1.0 if t == 0 else (math.inf if t > 0 else float(self.laplace(-t)))
        if t >= self.lam:
            return math.inf
        return (self.lam / (self.lam - t)) ** self.shape

    @property
    def uniforms_per_draw(self):
        return self.shape if self.kind == "erlang" else 1

    def from_uniforms(self, uniforms, rate=None):
        """Map uniforms of shape ``(n, uniforms_per_draw)`` to waiting times."""
        uniforms = np.asarray(uniforms, dtype=float)
        if self.kind == "randomized_exponential":
            if rate is None:
                raise DomainError("randomized arrivals need the scenario rate Lambda")
            return _exp_from_uniform(uniforms[..., 0], rate)
        w = _exp_from_uniform(uniforms, self.lam)
        return w.sum(axis=-1) if w.ndim > 1 else w

    def sample(self, rng, size, rate=None):
        return self.from_uniforms(rng.random((size, self.uniforms_per_draw)), rate)

    def sample_rate(self, rng, size=None):
        """Draw the random rate ``Lambda`` (randomized arrivals only)."""
        if self.kind != "randomized_exponential":
            raise DomainError("only randomized arrivals have a random rate")
        # numpy's gamma sampler is a shape-dependent rejection method
        return rng.gamma(self.k, self.theta, size)


@dataclass(frozen=True)
class DisasterModel:
    arrivals: ArrivalLaw
    severity: SeverityLaw
    dependence: str | None = None

    def __post_init__(self):
        expected = CONDITIONAL if self.arrivals.kind == "randomized_exponential" else INDEPENDENT
        if self.dependence is None:
            object.__setattr__(self, "dependence", expected)
        elif self.dependence != expected:
            raise DomainError(
                f"{self.arrivals.kind} arrivals require dependence {expected!r}, got {self.dependence!r}"
            )

    @property
    def conditional(self):
        return self.dependence == CONDITIONAL


@dataclass(frozen=True)
class LoanSpec:
    """Loan size ``u`` (currency) and repayment rate ``c`` (currency per unit time)."""

    u: float
    c: float

    def __post_init__(self):
        object.__setattr__(self, "u", _positive(self.u, "loan.u"))
        object.__setattr__(self, "c", _positive(self.c, "loan.c"))


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus stream id; together they fix every random draw.

    Random numbers are produced per block of scenarios, each block getting an
    independent generator keyed by ``(seed, stream, block)``.  Results therefore
    do not depend on how blocks are spread over workers.
    """

    seed: int = 0
    stream: int = 0
    _entropy: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise DomainError(f"seed must be an integer, got {self.seed!r}")
        if not -(1 << 63) <= int(self.seed) <= _UINT64:
            raise DomainError("seed must fit in 64 bits")
        if isinstance(self.stream, bool) or not isinstance(self.stream, (int, np.integer)) or self.stream < 0:
            raise DomainError(f"stream must be a nonnegative integer, got {self.stream!r}")
        object.__setattr__(self, "_entropy", int(self.seed) & _UINT64)

    def generator(self, block=0):
        seq = np.random.SeedSequence(self._entropy, spawn_key=(int(self.stream), int(block)))
        return np.random.Generator(np.random.PCG64(seq))


def draw_rate(model, rng):
    """Draw the per-scenario rate ``Lambda`` for conditionally independent models."""
    return float(model.arrivals.sample_rate(rng))


def sample_pair(model, rng, rate=None):
    """Draw one ``(W, X)`` pair.

    For randomized arrivals ``rate`` must be the scenario's ``Lambda`` (see
    :func:`draw_rate`), shared by every waiting time of that scenario.
    """
    if model.conditional and rate is None:
        raise DomainError("draw the scenario rate with draw_rate() before sampling pairs")
    w = model.arrivals.sample(rng, 1, rate=rate)[0]
    x = model.severity.sample(rng)
    return float(w), float(x)


def mean_discount(model):
    """Contraction factor ``E[exp(-X)] = alpha / (alpha + 1)``."""
    return model.severity.discount_moment(1.0)


# ------------------------------------------------------------------ config

_ARRIVAL_KEYS = {
    "exponential": {"kind", "lambda"},
    "erlang": {"kind", "lambda", "k"},
    "randomized_exponential": {"kind", "k", "theta"},
}


def _section(cfg, name):
    sec = cfg.get(name)
    if sec is None:
        raise ConfigError("missing section", name)
    if not isinstance(sec, Mapping):
        raise ConfigError("must be a mapping", name)
    return sec


def _number(sec, section, key, integer=False):
    full = f"{section}.{key}"
    if key not in sec:
        raise ConfigError("missing required key", full)
    value = sec[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", full)
    if integer and not float(value).is_integer():
        raise ConfigError(f"expected an integer, got {value!r}", full)
    if not math.isfinite(value) or value <= 0:
        raise ConfigError(f"must be positive, got {value!r}", full)
    return int(value) if integer else float(value)


def _reject_unknown(sec, allowed, section):
    for key in sec:
        if key not in allowed:
            raise ConfigError("unknown key", f"{section}.{key}")


def model_from_mapping(cfg: Mapping[str, Any]) -> DisasterModel:
    """Build a :class:`DisasterModel` from the ``arrivals`` and ``severity`` sections.

    Errors are raised as :class:`ConfigError` naming the offending key,
    e.g. ``arrivals.lambda``.
    """
    arr = _section(cfg, "arrivals")
    kind = arr.get("kind")
    if kind not in _ARRIVAL_KEYS:
        raise ConfigError(f"must be one of {sorted(_ARRIVAL_KEYS)}, got {kind!r}", "arrivals.kind")
    _reject_unknown(arr, _ARRIVAL_KEYS[kind], "arrivals")
    if kind == "exponential":
        arrivals = ArrivalLaw.exponential(_number(arr, "arrivals", "lambda"))
    elif kind == "erlang":
        arrivals = ArrivalLaw.erlang(_number(arr, "arrivals", "k", integer=True), _number(arr, "arrivals", "lambda"))
    else:
        arrivals = ArrivalLaw.randomized(_number(arr, "arrivals", "k"), _number(arr, "arrivals", "theta"))

    sev = _section(cfg, "severity")
    _reject_unknown(sev, {"kind", "alpha"}, "severity")
    if sev.get("kind", "exponential") != "exponential":
        raise ConfigError(f"only 'exponential' is supported, got {sev.get('kind')!r}", "severity.kind")
    severity = SeverityLaw(_number(sev, "severity", "alpha"))
    return DisasterModel(arrivals, severity)


def loan_from_mapping(cfg: Mapping[str, Any]) -> LoanSpec:
    loan = _section(cfg, "loan")
    _reject_unknown(loan, {"u", "c"}, "loan")
    return LoanSpec(_number(loan, "loan", "u"), _number(loan, "loan", "c"))
