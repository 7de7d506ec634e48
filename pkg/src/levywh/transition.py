"""Marginal laws of L_t recovered from the characteristic function.

Densities are obtained by Fourier inversion of ``exp(t kappa(i u))`` with
composite Gauss–Legendre panels in frequency.  Far tails are inverted along a
shifted line ``Im u = -+m`` so that their relative accuracy is not limited by
the absolute error of the undamped inversion.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import StripViolation, TruncationFailure
from .models import LevyModel, cumulant, moment_strip
from .quadrature import panel_rule

MAX_NODES = 1 << 16


@dataclass(frozen=True)
class GridConfig:
    """Discretisation of a marginal law.  ``None`` fields are chosen automatically."""

    u_max_freq: float | None = None
    n_freq: int | None = None
    x_range: tuple | None = None
    n_x: int = 2048
    tail_tol: float = 1e-13
    mass_tol: float = 1e-6

    def __post_init__(self):
        for name in ("n_x", "n_freq"):
            n = getattr(self, name)
            if n is not None and (n < 256 or n & (n - 1)):
                raise ValueError(f"{name} must be a power of two >= 256, got {n}")


@dataclass(frozen=True, eq=False)
class MarginalLaw:
    t: float
    x_nodes: np.ndarray
    density: np.ndarray
    mass_defect: float
    model: LevyModel | None = None

    @property
    def dx(self) -> float:
        return float(self.x_nodes[1] - self.x_nodes[0])

    def cdf(self) -> np.ndarray:
        c = integrate.cumulative_trapezoid(self.density, self.x_nodes, initial=0.0)
        return np.maximum.accumulate(np.clip(c / c[-1], 0.0, 1.0))

    def mirrored(self) -> "MarginalLaw":
        dual = self.model.dual() if self.model is not None else None
        return MarginalLaw(self.t, -self.x_nodes[::-1], self.density[::-1].copy(), self.mass_defect, dual)


def _chernoff_edge(model: LevyModel, t: float, sign: float, tol: float) -> float:
    """Smallest x with the Chernoff bound P(sign*L_t > x) <= tol."""
    strip = moment_strip(model)
    edge_of_strip = strip.u_max if sign > 0 else -strip.u_min
    m_hi = 0.99 * edge_of_strip if math.isfinite(edge_of_strip) else 1e8
    log_tol = math.log(tol)

    def edge(m):
        return (t * float(np.real(cumulant(model, sign * m))) - log_tol) / m

    res = optimize.minimize_scalar(edge, bounds=(1e-6 * m_hi, m_hi), method="bounded")
    return max(float(res.fun), 0.0)


def _freq_cutoff(model: LevyModel, t: float, shift: float, tol: float) -> float:
    """Frequency beyond which |phi| along Im = -shift is below tol (relative)."""
    k0 = float(np.real(cumulant(model, shift)))
    u = 1.0
    for _ in range(200):
        vals = [np.real(cumulant(model, shift + 1j * v)) for v in (u, 1.5 * u, 2 * u)]
        if all(t * (v - k0) < math.log(tol) for v in vals):
            return u
        u *= 1.5
    raise TruncationFailure(f"characteristic function of {model} at t={t:g} does not decay")


def _invert(model, t, x, shift, u_cut, n_budget):
    """(1/2pi) int exp(-i u x) phi_t(u - i shift) du times exp(-shift x)."""
    xmax = max(float(np.max(np.abs(x))), 1e-300)
    width = min(2 * math.pi / xmax, u_cut / 4)
    n_pan = int(math.ceil(u_cut / width))
    if n_pan * 16 > n_budget:
        raise TruncationFailure(
            f"frequency grid for t={t:g} needs {n_pan * 16} nodes (budget {n_budget})"
        )
    u, w = panel_rule(np.linspace(0.0, u_cut, n_pan + 1), 16)
    phi = np.exp(t * cumulant(model, shift + 1j * u))
    out = np.empty(x.shape)
    for s in range(0, x.size, 512):
        xs = x[s : s + 512]
        out[s : s + 512] = np.real(np.exp(-1j * np.outer(xs, u)) @ (w * phi)) / math.pi
    return out * np.exp(-shift * x)


def _build_law(model: LevyModel, t: float, cfg: GridConfig) -> MarginalLaw:
    if t <= 0:
        raise ValueError("t must be positive")
    strip = moment_strip(model)
    if cfg.x_range is not None:
        lo, hi = map(float, cfg.x_range)
    else:
        lo = -_chernoff_edge(model, t, -1.0, cfg.tail_tol)
        hi = _chernoff_edge(model, t, 1.0, cfg.tail_tol)
    if not lo < 0 < hi:
        raise ValueError("x_range must straddle 0")
    u_cut = cfg.u_max_freq or _freq_cutoff(model, t, 0.0, cfg.tail_tol)

    # resolution: keep dx below the Nyquist spacing of the frequency cutoff
    n_x = cfg.n_x
    while (hi - lo) / (n_x - 1) > math.pi / u_cut / 2 and cfg.x_range is None:
        if n_x >= MAX_NODES:
            raise TruncationFailure(
                f"x grid for {model} at t={t:g} needs more than {MAX_NODES} nodes"
            )
        n_x *= 2
    dx = (hi - lo) / (n_x - 1)
    j0 = int(round(-lo / dx))
    x = (np.arange(n_x) - j0) * dx

    budget = cfg.n_freq or MAX_NODES
    dens = _invert(model, t, x, 0.0, u_cut, budget)

    # damped inversion for the tails: shift chosen so that t*kappa(+-m) ~ 1
    for sign in (1.0, -1.0):
        m_cap = 0.5 * strip.M_safe
        f = lambda m: t * float(np.real(cumulant(model, sign * m))) - 1.0
        if f(m_cap) <= 0:
            m = m_cap
        else:
            try:
                m = optimize.brentq(f, 1e-9 * m_cap, m_cap)
            except ValueError:
                continue
        side = sign * x > 1.0 / m
        if not np.any(side):
            continue
        xs = x[side]
        u_cut_s = _freq_cutoff(model, t, sign * m, cfg.tail_tol)
        dens[side] = _invert(model, t, xs, sign * m, u_cut_s, budget)

    peak = float(np.max(dens))
    if np.min(dens) < -1e-10 * max(peak, 1.0):
        raise TruncationFailure(
            f"density of {model} at t={t:g} has negative values down to {np.min(dens):.3e}"
        )
    dens = np.clip(dens, 0.0, None)
    mass = float(integrate.simpson(dens, x=x))
    defect = 1.0 - mass
    if abs(defect) > cfg.mass_tol:
        raise TruncationFailure(f"density of {model} at t={t:g} integrates to {mass:.9f}")
    dens = dens / mass
    x.setflags(write=False)
    dens.setflags(write=False)
    return MarginalLaw(float(t), x, dens, defect, model)


class _LawCache:
    """Bounded LRU map shared across threads."""

    def __init__(self, maxsize: int = 256):
        self.maxsize = maxsize
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get_or_build(self, key, build):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
        value = build()
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)
        return value

    def clear(self):
        with self._lock:
            self._data.clear()


LAW_CACHE = _LawCache()


def marginal_law(model: LevyModel, t: float, cfg: GridConfig | None = None) -> MarginalLaw:
    """Density of L_t on a uniform grid containing x = 0."""
    cfg = cfg or GridConfig()
    return LAW_CACHE.get_or_build((model, float(t), cfg), lambda: _build_law(model, t, cfg))


def half_line_transform(law: MarginalLaw, beta, side: str = "positive"):
    """int_{x>0} exp(-beta x) P(dx) (positive) or int_{x<0} exp(beta x) P(dx) (negative)."""
    if side not in ("positive", "negative"):
        raise ValueError("side must be 'positive' or 'negative'")
    beta = complex(beta)
    if law.model is not None:
        strip = moment_strip(law.model)
        bound = -strip.u_min if side == "positive" else strip.u_max
        bound = min(bound, strip.M_safe)
        if beta.real <= -bound:
            raise StripViolation(f"Re(beta)={beta.real:g} must exceed {-bound:g}")
    x, p = law.x_nodes, law.density
    if side == "positive":
        sel = x >= 0
        xs, ps = x[sel], p[sel]
        f = ps * np.exp(-beta * xs)
    else:
        sel = x <= 0
        xs, ps = x[sel], p[sel]
        f = ps * np.exp(beta * xs)
    return complex(integrate.simpson(f.real, x=xs) + 1j * integrate.simpson(f.imag, x=xs))
