"""Renewal-equation operators and their Neumann-series solutions.

The full-repayment probability satisfies ``psi = psi0 + K psi`` where

    K h(u, t) = E[ 1{W < min(t, u/c)} h(e^X (u - cW), t - W) ]

and ``psi0(u, t) = P(W >= u/c) 1{t > u/c}``.  Dropping ``t`` gives the
infinite-horizon operator ``K_inf`` with ``psi0_inf(u) = P(W > u/c)``.  Both
operators shrink L1 mass by ``rho = E[exp(-X)]`` so the Neumann series
converges geometrically.

Discretization
--------------
Functions live on a uniform grid ``u_i = i du`` and, for finite horizons,
``t_k = k du / c``.  With this coupling the shifted argument
``(u_i - c w, t_k - w)`` lands on grid nodes whenever ``w`` does, so the
``w`` integral becomes a product-integration convolution along the diagonals
``k - i = const``.  The severity average ``G(z) = E g(e^X z)`` is evaluated in
closed form for piecewise-linear ``g`` and exponential ``X``:

    G(z) = alpha z^alpha int_z^inf y^(-alpha-1) g(y) dy.

Near ``z = 0`` ``G`` behaves like ``z^alpha``, far from linear when alpha is
small, so the cell whose argument runs through ``[0, du]`` gets an exact
correction on top of the linear product rule.

A finite-horizon column ``k`` is supported on ``[0, u_k)``: the stored value
at ``i == k`` is the limit from the left, and entries with ``i > k`` are zero.
"""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy import special
from scipy.integrate import trapezoid as _trapz

from .errors import ConfigError, ConvergenceError, DomainError
from .model import DisasterModel

__all__ = [
    "GridFunction",
    "OperatorConfig",
    "DecayBound",
    "apply_K_inf",
    "apply_K",
    "psi0_infinite",
    "psi0_finite",
    "solve_psi_infinite",
    "solve_psi_finite",
    "decay_bound",
    "l1_gap_exact",
    "perpetuity_moments",
    "tail_bound",
    "choose_u_max",
]


# ------------------------------------------------------------- grid function

@dataclass
class GridFunction:
    """Tabulated function on a u-grid, or on a (u, t) grid.

    Linear interpolation inside the grid, constant extrapolation outside.
    Two-dimensional functions need a uniform u-grid starting at 0 and a
    t-grid with ``t_k = u_k / c``; they are interpolated bilinearly in the
    coordinates ``(u, t - u/c)`` and vanish for ``t <= u/c``.
    """

    u: np.ndarray
    values: np.ndarray
    t: np.ndarray | None = None
    info: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.u.ndim != 1 or self.u.size < 2:
            raise DomainError("u-grid must be one-dimensional with at least 2 points")
        if not np.all(np.diff(self.u) > 0):
            raise DomainError("u-grid must be strictly increasing")
        if self.u[0] < 0:
            raise DomainError("u-grid must be nonnegative")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("grid values must be finite")
        if self.t is None:
            if self.values.shape != self.u.shape:
                raise DomainError(f"values shape {self.values.shape} does not match grid {self.u.shape}")
            return
        self.t = np.asarray(self.t, dtype=float)
        if self.t.ndim != 1 or self.t.size < 2 or not np.all(np.diff(self.t) > 0):
            raise DomainError("t-grid must be strictly increasing with at least 2 points")
        if self.values.shape != (self.u.size, self.t.size):
            raise DomainError(f"values shape {self.values.shape} does not match grid ({self.u.size}, {self.t.size})")
        du = self.u[1]
        n = max(self.u.size, self.t.size)
        if self.u[0] != 0 or self.t[0] != 0:
            raise DomainError("two-dimensional grids must start at u = 0 and t = 0")
        if not np.allclose(self.u, du * np.arange(self.u.size), rtol=1e-9, atol=0):
            raise DomainError("two-dimensional grids need a uniform u-grid")
        if not np.allclose(self.t, self.t[1] * np.arange(self.t.size), rtol=1e-9, atol=0) or n < 2:
            raise DomainError("two-dimensional grids need a uniform t-grid")

    @property
    def c(self):
        """Repayment rate implied by the grid coupling (2-D only)."""
        return None if self.t is None else self.u[1] / self.t[1]

    def __call__(self, u, t=None):
        if self.t is None:
            return np.interp(u, self.u, self.values)
        if t is None:
            raise DomainError("this function also depends on t")
        return self._eval2(np.asarray(u, dtype=float), np.asarray(t, dtype=float))

    def _eval2(self, u, t):
        u, t = np.broadcast_arrays(u, t)
        V = self.values
        nu, nt = V.shape
        du, dt, c = self.u[1], self.t[1], self.c
        alive = u < c * t
        uc = np.clip(u, 0.0, self.u[-1])
        s = np.maximum(t - uc / c, 0.0)
        fi = uc / du
        i0 = np.clip(np.floor(fi).astype(np.int64), 0, nu - 2)
        fu = fi - i0
        fs_ = s / dt
        d0 = np.floor(fs_).astype(np.int64)
        fd = fs_ - d0

        def at(i, d):
            k = np.minimum(i + d, nt - 1)
            ok = i <= k
            return np.where(ok, V[np.minimum(i, nu - 1), k], 0.0)

        out = ((1 - fu) * (1 - fd) * at(i0, d0) + fu * (1 - fd) * at(i0 + 1, d0)
               + (1 - fu) * fd * at(i0, d0 + 1) + fu * fd * at(i0 + 1, d0 + 1))
        out = np.where(alive, out, 0.0)
        return float(out) if out.ndim == 0 else out

    def integral(self):
        """Trapezoid integral over u (one value per t column for 2-D)."""
        return _trapz(self.values, self.u, axis=0)

    def to_csv(self, target=None, header_comment=None):
        """Write ``u,value`` or ``u,t,value`` rows, 17 significant digits.

        ``target`` may be a path or a text stream; with ``None`` the CSV is
        returned as a string.
        """
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        if self.t is None:
            buf.write("u,value\n")
            for u, v in zip(self.u, self.values):
                buf.write(f"{u:.17g},{v:.17g}\n")
        else:
            buf.write("u,t,value\n")
            for i, u in enumerate(self.u):
                for k, t in enumerate(self.t):
                    buf.write(f"{u:.17g},{t:.17g},{self.values[i, k]:.17g}\n")
        text = buf.getvalue()
        if target is None:
            return text
        if isinstance(target, (str, os.PathLike)):
            with open(target, "w", newline="") as fh:
                fh.write(text)
        else:
            target.write(text)
        return None

    @classmethod
    def from_csv(cls, source):
        if isinstance(source, (str, os.PathLike)):
            with open(source) as fh:
                lines = fh.read().splitlines()
        else:
            lines = source.read().splitlines()
        lines = [ln for ln in lines if ln.strip() and not ln.startswith("#")]
        header = lines[0].strip().split(",")
        rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
        if header == ["u", "value"]:
            return cls(rows[:, 0], rows[:, 1])
        if header == ["u", "t", "value"]:
            u = np.unique(rows[:, 0])
            t = np.unique(rows[:, 1])
            if rows.shape[0] != u.size * t.size:
                raise DomainError("CSV rows do not form a full (u, t) grid")
            return cls(u, rows[:, 2].reshape(u.size, t.size), t)
        raise DomainError(f"unrecognized CSV header {lines[0]!r}")


# ------------------------------------------------------------ configuration

@dataclass(frozen=True)
class OperatorConfig:
    """Discretization and stopping parameters.

    Attributes
    ----------
    u_max : float
        Right end of the u-grid.
    n_u : int
        Number of u nodes (uniform spacing ``du = u_max / (n_u - 1)``).
    n_t : int, optional
        Number of t nodes for finite horizons.  The t spacing is tied to the
        u spacing, ``dt = du / c``, so ``n_t`` fixes the horizon.  When
        omitted the solver derives it from the requested horizon.
    nodes_per_cell : int
        Gauss-Legendre nodes per cell for the waiting-time weights.
    tol : float
        Stop summing once a Neumann term's L1 mass falls below this.
    tail_tol : float
        Bound on ``P(U_inf > u_max)`` required of the grid.
    max_terms : int
        Hard cap on the number of Neumann terms.
    workers : int
        Threads handed to the FFT.
    """

    u_max: float
    n_u: int = 2049
    n_t: int | None = None
    nodes_per_cell: int = 8
    tol: float = 1e-10
    tail_tol: float = 1e-8
    max_terms: int = 20000
    workers: int = 1

    def __post_init__(self):
        if not (self.u_max > 0) or not math.isfinite(self.u_max):
            raise ConfigError(f"must be positive, got {self.u_max!r}", "u_max")
        if int(self.n_u) != self.n_u or self.n_u < 16:
            raise ConfigError(f"must be an integer >= 16, got {self.n_u!r}", "n_u")
        if self.n_t is not None and (int(self.n_t) != self.n_t or self.n_t < 2):
            raise ConfigError(f"must be an integer >= 2, got {self.n_t!r}", "n_t")
        if int(self.nodes_per_cell) != self.nodes_per_cell or self.nodes_per_cell < 1:
            raise ConfigError("must be a positive integer", "nodes_per_cell")
        for key in ("tol", "tail_tol"):
            if not (getattr(self, key) > 0):
                raise ConfigError("must be positive", key)
        if self.max_terms < 1:
            raise ConfigError("must be positive", "max_terms")

    @property
    def du(self):
        return self.u_max / (self.n_u - 1)

    def grid(self):
        return self.du * np.arange(self.n_u)

    @classmethod
    def auto(cls, model: DisasterModel, c: float, extent: float = 0.0, **kw):
        """Choose ``u_max`` from the perpetuity tail bound (at least ``extent``)."""
        tail_tol = kw.get("tail_tol", cls.tail_tol)
        return cls(u_max=max(choose_u_max(model, c, tail_tol), float(extent)), **kw)


# -------------------------------------------------------------- tail bounds

def _check_model(model: DisasterModel, c):
    if model.conditional:
        raise DomainError("the renewal equation needs i.i.d. waiting times; "
                          "randomized arrivals are only conditionally independent")
    if model.severity.kind != "exponential":
        raise DomainError("operators are implemented for exponential severities")
    c = float(c)
    if not (c > 0) or not math.isfinite(c):
        raise DomainError(f"repayment rate must be positive, got {c!r}")
    return c


def perpetuity_moments(model: DisasterModel, c: float, pmax: int = 30):
    """Integer moments ``E[U_inf^p]``, ``p = 0..pmax``.

    Uses ``U = c W + exp(-X) U'`` with ``U'`` an independent copy, so
    ``E[U^p] (1 - E[e^{-pX}]) = sum_{j>=1} C(p,j) c^j E[W^j] E[e^{-(p-j)X}] E[U^{p-j}]``.
    """
    c = _check_model(model, c)
    m = [1.0]
    for p in range(1, pmax + 1):
        acc = 0.0
        for j in range(1, p + 1):
            acc += (math.comb(p, j) * c**j * model.arrivals.moment(j)
                    * model.severity.discount_moment(p - j) * m[p - j])
        m.append(acc / (1.0 - model.severity.discount_moment(p)))
    return np.array(m)


def tail_bound(model: DisasterModel, c: float, u: float, pmax: int = 30) -> float:
    """Markov bound ``min_p E[U_inf^p] / u^p`` on ``P(U_inf > u)``."""
    if u <= 0:
        return 1.0
    m = perpetuity_moments(model, c, pmax)
    with np.errstate(over="ignore"):
        logs = np.log(m[1:]) - np.arange(1, pmax + 1) * math.log(u)
    return float(min(1.0, math.exp(logs.min())))


def choose_u_max(model: DisasterModel, c: float, tol: float = 1e-8, pmax: int = 30) -> float:
    """Smallest ``u`` whose Markov tail bound is below ``tol``."""
    m = perpetuity_moments(model, c, pmax)
    p = np.arange(1, pmax + 1)
    return float(np.min(np.exp((np.log(m[1:]) - math.log(tol)) / p)))


# ------------------------------------------------------- discrete operator

class _Discretization:
    """Weights shared by every application of the operator on one grid."""

    def __init__(self, model, c, du, n, nodes_per_cell, workers=1):
        self.alpha = alpha = model.severity.alpha
        self.n = n
        self.workers = workers
        # product-integration weights over w-cells of width du / c
        dw = du / c
        x, wts = np.polynomial.legendre.leggauss(int(nodes_per_cell))
        x = 0.5 * (x + 1.0)
        wts = 0.5 * wts
        w = (np.arange(n)[:, None] + x[None, :]) * dw
        f = model.arrivals.pdf(w) * dw
        self.a = (f * (1.0 - x) * wts).sum(axis=1)
        self.b = (f * x * wts).sum(axis=1)
        kappa = self.a.copy()
        kappa[1:] += self.b[:-1]
        self.kappa = kappa
        # G is not linear on its first cell: G(r du) - linear interpolant
        # = (g0 - G1)(r - r^alpha) + s du alpha (r^alpha - r) / (1 - alpha).
        # Integrate both shapes against f taken linear over each w-cell.
        fe = model.arrivals.pdf(np.arange(n + 1) * dw) * dw
        r0 = ((alpha - 1.0) / (3.0 * (2.0 + alpha)), (alpha - 1.0) / (2.0 * (1.0 + alpha)))
        r1 = (alpha / (3.0 * (2.0 + alpha)), alpha / (2.0 * (1.0 + alpha)))
        # weights of f at the cell ends: int r phi and int (1 - r) phi
        self.e0 = fe[:n] * r0[0] + fe[1:] * (r0[1] - r0[0])
        self.e1 = fe[:n] * r1[0] + fe[1:] * (r1[1] - r1[0])
        self.nfft = sfft.next_fast_len(2 * n, real=True)
        self.kappa_hat = sfft.rfft(kappa, self.nfft)
        # severity-average cell coefficients
        j = np.arange(1, n - 1, dtype=float)
        L = np.log1p(1.0 / j)
        self.one_minus = -np.expm1(-alpha * L)
        self.slope = j * (alpha * L * special.exprel((1.0 - alpha) * L) - self.one_minus)
        idx = np.arange(n, dtype=float)
        self.use_cumsum = alpha * math.log(max(n, 2)) < 600.0
        if self.use_cumsum:
            with np.errstate(divide="ignore"):
                self.up = (idx / (n - 1)) ** alpha           # (i / N)^alpha
                self.down = ((n - 1) / idx[1:n - 1]) ** alpha  # (N / j)^alpha
        else:
            self.ratio = (idx[1:n - 1] / idx[2:n]) ** alpha  # (i / (i+1))^alpha

    def severity_average(self, g, tail, cell_mask=None):
        """``G_i = E g(e^X u_i)`` for piecewise-linear ``g`` along axis 0.

        ``tail`` is the constant value of ``g`` beyond the last node (per
        column); ``cut`` columns pass 0.
        """
        n = self.n
        shp = (-1,) + (1,) * (g.ndim - 1)
        cell = g[1:n - 1] * self.one_minus.reshape(shp) + (g[2:n] - g[1:n - 1]) * self.slope.reshape(shp)
        if cell_mask is not None:
            cell = np.where(cell_mask, cell, 0.0)
        G = np.empty_like(g)
        if self.use_cumsum:
            acc = np.cumsum((cell * self.down.reshape(shp))[::-1], axis=0)[::-1]
            G[1:n - 1] = self.up[1:n - 1].reshape(shp) * acc + self.up[1:n - 1].reshape(shp) * tail
            G[n - 1] = tail
        else:
            G[n - 1] = tail
            for i in range(n - 2, 0, -1):
                G[i] = cell[i - 1] + self.ratio[i - 1] * G[i + 1]
        G[0] = g[0]
        return G

    def convolve(self, G):
        """Rows of ``G`` (last axis): ``sum_m a_m G[i-m] + b_m G[i-m-1]``."""
        n = self.n
        spec = sfft.rfft(G, self.nfft, axis=-1, workers=self.workers)
        out = sfft.irfft(spec * self.kappa_hat, self.nfft, axis=-1, workers=self.workers)[..., :n]
        out -= self.a * G[..., :1]
        out[..., 0] = 0.0
        return out

    def first_cell(self, out, g0, G1, slope):
        # out[..., j] gains the correction from the w-cell where the argument
        # of G runs through [0, du]
        out[..., 1:] += self.e0[:self.n - 1] * (g0 - G1)[..., None] + self.e1[:self.n - 1] * slope[..., None]
        return out

    def apply_inf(self, g):
        G = self.severity_average(g, g[-1])
        out = self.convolve(G)
        return self.first_cell(out, np.asarray(g[0]), np.asarray(G[1]), np.asarray(g[1] - g[0]))

    def apply_finite(self, V):
        n, nt = V.shape
        if n != self.n:
            raise DomainError("grid size mismatch")
        k = np.arange(nt)[None, :]
        i = np.arange(n)[:, None]
        # column k <= N is supported on [0, u_k); later columns extend past u_max
        # by their last value
        tail = np.where(k[0] <= n - 1, 0.0, V[-1])
        cell_mask = np.arange(1, n - 1)[:, None] < k
        G = self.severity_average(V, tail, cell_mask)
        G = np.where(i < k, G, 0.0)
        # shear so that row d holds the diagonal G[j, j + d]
        width = nt + n
        pad = np.zeros((n, width))
        pad[:, :nt] = G
        step = pad.strides[1]
        S = np.lib.stride_tricks.as_strided(pad, (nt, n), (step, (width + 1) * step))
        R = self.convolve(S)
        nxt = np.minimum(np.arange(nt) + 1, nt - 1)
        R = self.first_cell(R, G[0], S[:, 1], V[1, nxt] - V[0, nxt])
        pad[:] = 0.0
        np.lib.stride_tricks.as_strided(pad, (nt, n), (step, (width + 1) * step))[...] = R
        return pad[:, :nt].copy()


def _disc_for(grid_u, model, c, cfg):
    du = grid_u[1] - grid_u[0]
    if grid_u[0] != 0 or not np.allclose(np.diff(grid_u), du, rtol=1e-9, atol=0):
        raise DomainError("operators need a uniform u-grid starting at 0")
    npc = cfg.nodes_per_cell if cfg is not None else 8
    workers = cfg.workers if cfg is not None else 1
    return _Discretization(model, c, du, grid_u.size, npc, workers)


def apply_K_inf(g: GridFunction, model: DisasterModel, c: float, cfg: OperatorConfig | None = None) -> GridFunction:
    """Apply ``K_inf g(u) = E[1{cW < u} g(e^X (u - cW))]`` on ``g``'s grid.

    ``g`` is taken as piecewise linear and constant beyond its last node.
    """
    c = _check_model(model, c)
    if g.t is not None:
        raise DomainError("apply_K_inf takes a function of u only")
    disc = _disc_for(g.u, model, c, cfg)
    return GridFunction(g.u.copy(), disc.apply_inf(g.values))


def apply_K(h: GridFunction, model: DisasterModel, c: float, cfg: OperatorConfig | None = None) -> GridFunction:
    """Apply the finite-horizon operator to a function of ``(u, t)``.

    ``h`` must live on a coupled grid (``t_k = u_k / c``) and follow the cut
    convention described in the module docstring.
    """
    c = _check_model(model, c)
    if h.t is None:
        raise DomainError("apply_K takes a function of (u, t)")
    if not math.isclose(h.c, c, rel_tol=1e-9):
        raise DomainError(f"grid coupling implies c = {h.c:g}, got {c:g}")
    disc = _disc_for(h.u, model, c, cfg)
    return GridFunction(h.u.copy(), disc.apply_finite(h.values), h.t.copy())


def psi0_infinite(model: DisasterModel, c: float, cfg: OperatorConfig) -> GridFunction:
    c = _check_model(model, c)
    u = cfg.grid()
    return GridFunction(u, model.arrivals.sf(u / c))


def _t_grid(cfg, c, t_max):
    if cfg.n_t is not None:
        n_t = cfg.n_t
    elif t_max is not None:
        n_t = int(math.ceil(t_max * c / cfg.du - 1e-9)) + 1
    else:
        raise DomainError("give a horizon t_max or set n_t in the config")
    return (cfg.du / c) * np.arange(max(n_t, 2))


def psi0_finite(model: DisasterModel, c: float, cfg: OperatorConfig, t_max=None) -> GridFunction:
    """``P(W >= u/c) 1{t > u/c}`` on the coupled grid (left limit on the diagonal)."""
    c = _check_model(model, c)
    u = cfg.grid()
    t = _t_grid(cfg, c, t_max)
    i = np.arange(u.size)[:, None]
    k = np.arange(t.size)[None, :]
    vals = np.where(i <= k, model.arrivals.sf(u / c)[:, None], 0.0)
    return GridFunction(u, vals, t)


def _apriori_terms(model, c, tol):
    rho = model.severity.discount_moment(1.0)
    mass0 = c * model.arrivals.mean()
    if mass0 * rho <= tol * (1 - rho) or rho == 0:
        return 1
    return int(math.ceil(math.log(tol * (1 - rho) / mass0) / math.log(rho)))


def _neumann(term, step, mass, model, c, cfg):
    rho = model.severity.discount_moment(1.0)
    n_star = _apriori_terms(model, c, cfg.tol)
    total = term.copy()
    masses = [float(mass(term))]
    n = 0
    while True:
        if masses[-1] < cfg.tol or n >= n_star:
            break
        if n >= cfg.max_terms:
            bound = c * model.arrivals.mean() * rho**n / (1 - rho)
            raise ConvergenceError(
                f"Neumann series not converged after {n} terms; remaining mass bound {bound:.3g}")
        term = step(term)
        total += term
        masses.append(float(mass(term)))
        n += 1
    return total, {"terms": n, "masses": masses, "rho": rho}


def _check_tail(model, c, cfg):
    bound = tail_bound(model, c, cfg.u_max)
    if bound > cfg.tail_tol * (1 + 1e-9):
        raise ConfigError(
            f"P(U_inf > {cfg.u_max:g}) may be as large as {bound:.3g}, above tail_tol {cfg.tail_tol:g}; "
            "increase u_max", "u_max")


def solve_psi_infinite(model: DisasterModel, c: float, cfg: OperatorConfig | None = None) -> GridFunction:
    """Infinite-horizon repayment probability ``psi_inf = sum_n K_inf^n psi0_inf``."""
    c = _check_model(model, c)
    cfg = cfg or OperatorConfig.auto(model, c)
    _check_tail(model, c, cfg)
    g0 = psi0_infinite(model, c, cfg)
    disc = _disc_for(g0.u, model, c, cfg)
    du = cfg.du
    mass = lambda v: np.abs(_trapz(v, dx=du))
    total, info = _neumann(g0.values, disc.apply_inf, mass, model, c, cfg)
    return GridFunction(g0.u, np.clip(total, 0.0, 1.0), info=info)


def solve_psi_finite(model: DisasterModel, c: float, cfg: OperatorConfig | None = None,
                     t_max: float | None = None) -> GridFunction:
    """Finite-horizon repayment probability ``psi(u, t) = sum_n K^n psi0``.

    The t-grid is ``t_k = k du / c`` up to ``t_max`` (or ``cfg.n_t`` nodes).
    """
    c = _check_model(model, c)
    cfg = cfg or OperatorConfig.auto(model, c)
    _check_tail(model, c, cfg)
    h0 = psi0_finite(model, c, cfg, t_max)
    disc = _disc_for(h0.u, model, c, cfg)
    du = cfg.du
    mass = lambda v: np.abs(_trapz(v, dx=du, axis=0)).max()
    total, info = _neumann(h0.values, disc.apply_finite, mass, model, c, cfg)
    return GridFunction(h0.u, np.clip(total, 0.0, 1.0), h0.t, info=info)


# ------------------------------------------------------------- decay bound

@dataclass(frozen=True)
class DecayBound:
    """L1 convergence bound ``prefactor * exp(-rate t)``.

    ``rho = E[exp(-X)]``, ``alpha_bar = 1 - rho``, ``rate = lam * alpha_bar``
    and ``prefactor = 1 / alpha_bar``.
    """

    rho: float
    alpha_bar: float
    rate: float
    prefactor: float

    def __call__(self, t):
        return self.prefactor * np.exp(-self.rate * np.asarray(t, dtype=float))


def decay_bound(model: DisasterModel) -> DecayBound:
    if model.arrivals.kind != "exponential" or model.severity.kind != "exponential":
        raise DomainError("the decay bound is available for exponential arrivals and severities")
    alpha = model.severity.alpha
    rho = alpha / (alpha + 1.0)
    abar = 1.0 / (alpha + 1.0)
    return DecayBound(rho, abar, model.arrivals.lam * abar, alpha + 1.0)


def l1_gap_exact(model: DisasterModel, c: float, t):
    """Exact ``int |psi_inf(u) - psi(u, t)| du = E[U_inf - U_t]``.

    For exponential arrivals ``E[exp(R_s)] = exp(-lam alpha_bar s)`` so the gap
    is ``(c / lam) / alpha_bar * exp(-lam alpha_bar t)``, the decay bound scaled
    by ``c / lam``.
    """
    db = decay_bound(model)
    return (c / model.arrivals.lam) * db(t)
