"""Scenario simulation of the repayment cash flow.

Each scenario follows

    U_t = c * [ sum_{i < N_t} W_i e^{-(X_1 + ... + X_{i-1})} + (t - T_{N_t}) e^{-(X_1 + ... + X_{N_t})} ]

where ``N_t`` disasters occurred by ``t``.  The loan defaults at horizon ``t``
when ``U_t <= u``, i.e. it has not been fully repaid strictly before ``t``.

Two samplers are provided.  :func:`simulate_algorithm1` walks the renewal
sequence ``(W_i, X_i)`` until the horizon; :func:`simulate_algorithm2` draws a
Poisson number of disasters and places them at sorted uniform times, which is
only valid for (conditionally) exponential waiting times.

Scenarios are processed in fixed blocks of :data:`BLOCK` scenarios, each with
its own generator derived from ``(seed, stream, block)``, so results do not
depend on the number of worker threads.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .model import DisasterModel, LoanSpec, SeedSpec

__all__ = [
    "BLOCK",
    "MonteCarloEstimate",
    "PathSample",
    "Histogram",
    "simulate_paths",
    "simulate_algorithm1",
    "simulate_algorithm2",
    "histogram_cashflow",
    "convergence_study",
    "l1_gap_estimate",
    "ESTIMATE_HEADER",
    "HISTOGRAM_HEADER",
]

BLOCK = 4096

ESTIMATE_HEADER = "t,u,c,estimate,stderr,n,seed"
HISTOGRAM_HEADER = "bin_lo,bin_hi,count"


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample mean of the default indicator with its standard error."""

    mean: float
    stderr: float
    n: int
    seed: SeedSpec
    elapsed: float = field(default=0.0, compare=False)
    t: float = math.nan
    u: float = math.nan
    c: float = math.nan
    algorithm: str = ""

    def csv_row(self):
        """Row matching :data:`ESTIMATE_HEADER` (17 significant digits)."""
        return (f"{self.t:.17g},{self.u:.17g},{self.c:.17g},{self.mean:.17g},"
                f"{self.stderr:.17g},{self.n},{self.seed.seed}")


@dataclass
class PathSample:
    """Per-scenario outcomes at the horizon.

    ``cash`` is ``U_t`` (NaN where the path was stopped early), ``tau`` the
    first time ``U`` exceeds ``u`` (``inf`` if not before ``t``) and ``slope``
    the discount ``exp(R_t)`` at the horizon (NaN where stopped early).
    """

    cash: np.ndarray
    tau: np.ndarray
    slope: np.ndarray

    def defaulted(self, t):
        return ~(self.tau < t)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    estimate: MonteCarloEstimate | None = None

    def csv_lines(self):
        yield HISTOGRAM_HEADER
        for lo, hi, n in zip(self.edges[:-1], self.edges[1:], self.counts):
            yield f"{lo:.17g},{hi:.17g},{int(n)}"


# ------------------------------------------------------------------ helpers

def _check_args(t, n):
    t = float(t)
    if not (t > 0) or not math.isfinite(t):
        raise DomainError(f"horizon t must be positive, got {t!r}")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"replication count must be a positive integer, got {n!r}")
    return t, int(n)


def _as_seed(seed):
    if isinstance(seed, SeedSpec):
        return seed
    return SeedSpec(int(seed))


def _blocks(n):
    return [(b, min(BLOCK, n - b * BLOCK)) for b in range((n + BLOCK - 1) // BLOCK)]


def _map_blocks(fn, n, workers):
    blocks = _blocks(n)
    if workers is None or workers <= 1 or len(blocks) == 1:
        return [fn(b, m) for b, m in blocks]
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(lambda bm: fn(*bm), blocks))


def _estimate(flags, n, seed, start, t, loan, algorithm, pairs=False):
    if pairs:
        pm = 0.5 * (flags[0::2].astype(float) + flags[1::2].astype(float))
        mean = float(np.count_nonzero(flags)) / n
        se = float(np.std(pm, ddof=1) / math.sqrt(pm.size)) if pm.size > 1 else 0.0
    else:
        mean = float(np.count_nonzero(flags)) / n
        se = math.sqrt(mean * (1.0 - mean) / n)
    return MonteCarloEstimate(mean, se, n, seed, time.perf_counter() - start,
                              t, loan.u, loan.c, algorithm)


# -------------------------------------------------------------- algorithm 1

def _renewal_block(model, loan, t, rng, m, early, antithetic):
    arr, sev = model.arrivals, model.severity
    c, u = loan.c, loan.u
    k = arr.uniforms_per_draw
    cash = np.zeros(m)
    clock = np.zeros(m)
    slope = np.ones(m)
    tau = np.full(m, np.inf)
    if model.conditional:
        rate = arr.sample_rate(rng, (m + 1) // 2 if antithetic else m)
        rate = np.repeat(rate, 2)[:m] if antithetic else rate
    else:
        rate = None
    alive = np.arange(m)
    with np.errstate(divide="ignore", over="ignore"):
        while alive.size:
            if antithetic:
                pairs, row = np.unique(alive // 2, return_inverse=True)
                draw = rng.random((pairs.size, k + 1))[row]
                draw = np.where((alive % 2 == 1)[:, None], 1.0 - draw, draw)
            else:
                draw = rng.random((alive.size, k + 1))
            w = arr.from_uniforms(draw[:, :k], None if rate is None else rate[alive])
            x = sev.from_uniforms(draw[:, k])
            left = t - clock[alive]
            last = w >= left
            seg = np.where(last, left, w)
            rate_now = c * slope[alive]
            before = cash[alive]
            after = before + rate_now * seg
            crossed = (before <= u) & (after > u)
            tau[alive[crossed]] = clock[alive[crossed]] + (u - before[crossed]) / rate_now[crossed]
            cash[alive] = after
            clock[alive] += seg
            slope[alive] = np.where(last, slope[alive], slope[alive] * np.exp(-x))
            done = last
            if early:
                # repaid, or unable to reach u even without further disasters
                hopeless = after + c * slope[alive] * (t - clock[alive]) <= u
                done = done | (after > u) | hopeless
                stopped = alive[~last & done]
                cash[stopped] = np.nan
                slope[stopped] = np.nan
            alive = alive[~done]
    return cash, tau, slope


def simulate_paths(model: DisasterModel, loan: LoanSpec, t: float, n: int, seed=0,
                   workers: int = 1, early_exit: bool = True, antithetic: bool = False) -> PathSample:
    """Run the renewal sampler and return per-scenario outcomes.

    With ``early_exit`` a path stops once it is repaid or can no longer be
    repaid by ``t``; its ``cash`` and ``slope`` are then NaN but ``tau`` is
    exact.
    """
    t, n = _check_args(t, n)
    seed = _as_seed(seed)
    if antithetic and n % 2:
        raise DomainError("antithetic sampling needs an even replication count")

    def run(block, m):
        return _renewal_block(model, loan, t, seed.generator(block), m, early_exit, antithetic)

    parts = _map_blocks(run, n, workers)
    return PathSample(*(np.concatenate([p[j] for p in parts]) for j in range(3)))


def simulate_algorithm1(model: DisasterModel, loan: LoanSpec, t: float, n: int, seed=0,
                        workers: int = 1, antithetic: bool = False) -> MonteCarloEstimate:
    """Estimate the finite-horizon default probability ``P(U_t <= u)``.

    Parameters
    ----------
    model, loan : DisasterModel, LoanSpec
    t : float
        Horizon.
    n : int
        Number of scenarios.
    seed : int or SeedSpec
    workers : int
        Threads; never changes the result.
    antithetic : bool
        Pair each scenario with its mirrored-uniform twin.  The standard error
        is then computed from the pair means.
    """
    t, n = _check_args(t, n)
    seed = _as_seed(seed)
    start = time.perf_counter()
    if t <= loan.u / loan.c:
        # U_t <= c t <= u on every path
        return MonteCarloEstimate(1.0, 0.0, n, seed, time.perf_counter() - start,
                                  t, loan.u, loan.c, "algorithm1")
    paths = simulate_paths(model, loan, t, n, seed, workers, True, antithetic)
    return _estimate(paths.defaulted(t), n, seed, start, t, loan, "algorithm1", antithetic)


# -------------------------------------------------------------- algorithm 2

def _poisson_block(model, loan, t, rng, m):
    arr, sev = model.arrivals, model.severity
    lam = arr.sample_rate(rng, m) if model.conditional else np.full(m, arr.lam)
    counts = rng.poisson(lam * t)
    total = int(counts.sum())
    owner = np.repeat(np.arange(m), counts)
    times = rng.random(total) * t
    x = sev.from_uniforms(rng.random(total))
    # order statistics within each scenario
    # owners are t apart on the key axis, so one float sort orders every scenario
    order = np.argsort(times + owner * (2.0 * t))
    times = times[order]
    owner = owner[order]
    # cumulative severity within each scenario (x is i.i.d., so its order is free)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    csum = np.cumsum(x)
    base = np.concatenate(([0.0], csum))[starts]
    disc = np.exp(-(csum - np.repeat(base, counts)))
    # each event's discount applies until the next event of its scenario, or t
    nxt = np.full(total, t)
    if total > 1:
        same = owner[1:] == owner[:-1]
        nxt[:-1] = np.where(same, times[1:], t)
    first = np.full(m, t)
    has = counts > 0
    first[has] = times[starts[has]]
    cash = first + np.bincount(owner, weights=(nxt - times) * disc, minlength=m)
    return loan.c * cash


def simulate_cash_algorithm2(model, loan, t, n, seed=0, workers=1):
    """``U_t`` for ``n`` scenarios using Poisson counts and sorted uniform times."""
    if model.arrivals.kind not in ("exponential", "randomized_exponential"):
        raise DomainError("algorithm 2 needs (conditionally) exponential waiting times")
    t, n = _check_args(t, n)
    seed = _as_seed(seed)
    parts = _map_blocks(lambda b, m: _poisson_block(model, loan, t, seed.generator(b), m), n, workers)
    return np.concatenate(parts)


def simulate_algorithm2(model: DisasterModel, loan: LoanSpec, t: float, n: int, seed=0,
                        workers: int = 1) -> MonteCarloEstimate:
    """Same estimand as :func:`simulate_algorithm1`, sampled via Poisson counts.

    For randomized arrivals a rate ``Lambda`` is drawn per scenario and the
    count is Poisson(``Lambda t``) given it.
    """
    if model.arrivals.kind not in ("exponential", "randomized_exponential"):
        raise DomainError("algorithm 2 needs (conditionally) exponential waiting times")
    t, n = _check_args(t, n)
    seed = _as_seed(seed)
    start = time.perf_counter()
    if t <= loan.u / loan.c:
        return MonteCarloEstimate(1.0, 0.0, n, seed, time.perf_counter() - start,
                                  t, loan.u, loan.c, "algorithm2")
    cash = simulate_cash_algorithm2(model, loan, t, n, seed, workers)
    return _estimate(cash <= loan.u, n, seed, start, t, loan, "algorithm2")


# --------------------------------------------------------------- analysis

def histogram_cashflow(model: DisasterModel, loan: LoanSpec, t: float, n: int, bins: int,
                       seed=0, algorithm: int = 1, workers: int = 1) -> Histogram:
    """Histogram of ``U_t`` on ``bins`` equal bins over ``[0, c t]``.

    The default estimate computed from the same scenarios is attached.
    """
    t, n = _check_args(t, n)
    if int(bins) != bins or bins < 1:
        raise DomainError(f"bins must be a positive integer, got {bins!r}")
    seed = _as_seed(seed)
    start = time.perf_counter()
    if algorithm == 1:
        cash = simulate_paths(model, loan, t, n, seed, workers, early_exit=False).cash
    elif algorithm == 2:
        cash = simulate_cash_algorithm2(model, loan, t, n, seed, workers)
    else:
        raise DomainError(f"algorithm must be 1 or 2, got {algorithm!r}")
    top = loan.c * t
    cash = np.minimum(cash, top)
    edges = np.linspace(0.0, top, int(bins) + 1)
    counts, _ = np.histogram(cash, bins=edges)
    est = _estimate(cash <= loan.u, n, seed, start, t, loan, f"algorithm{algorithm}")
    return Histogram(edges, counts, est)


def convergence_study(model: DisasterModel, loan: LoanSpec, t_grid, n: int, seed=0,
                      workers: int = 1):
    """Default-probability estimates along a grid of horizons.

    One set of ``n`` scenarios is run to the largest horizon and the first
    passage times are reused, so the estimates share their noise and are
    nonincreasing in ``t``.

    Returns
    -------
    list of (t, estimate, stderr)
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.size == 0 or np.any(ts <= 0):
        raise DomainError("t_grid must be a nonempty list of positive horizons")
    t_top, n = _check_args(ts.max(), n)
    seed = _as_seed(seed)
    if t_top <= loan.u / loan.c:
        return [(float(t), 1.0, 0.0) for t in ts]
    tau = simulate_paths(model, loan, t_top, n, seed, workers).tau
    out = []
    for t in ts:
        p = float(np.count_nonzero(~(tau < t))) / n
        out.append((float(t), p, math.sqrt(p * (1 - p) / n)))
    return out


def l1_gap_estimate(model: DisasterModel, c: float, t: float, n: int, seed=0, workers: int = 1):
    """Estimate ``int |psi_inf(u) - psi(u, t)| du`` for exponential arrivals.

    The integral equals ``E[U_inf - U_t]``.  Conditioning on the path up to
    ``t`` and using the memoryless arrivals gives
    ``E[U_inf - U_t | F_t] = c exp(R_t) / (lam alpha_bar)``, so the estimate is
    a sample mean of the discount at the horizon.  Its relative noise stays
    bounded as the gap shrinks, unlike the direct difference of cash means.

    Returns
    -------
    (estimate, stderr)
    """
    if model.arrivals.kind != "exponential":
        raise DomainError("the conditional gap estimator needs exponential arrivals")
    loan = LoanSpec(1.0, c)
    slope = simulate_paths(model, loan, t, n, seed, workers, early_exit=False).slope
    abar = 1.0 - model.severity.discount_moment(1.0)
    scale = c / (model.arrivals.lam * abar)
    vals = scale * slope
    return math.fsum(vals) / vals.size, float(np.std(vals, ddof=1) / math.sqrt(vals.size))
