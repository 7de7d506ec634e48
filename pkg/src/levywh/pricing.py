"""Damped Fourier valuation of payoffs written on the running extremum.

Every product here is a function ``f`` of ``X``, where ``X = sup_{s<=T} L_s``
or ``X = inf_{s<=T} L_s``.  With ``f^(xi) = int e^{i xi x} f(x) dx`` analytic on
``Im xi = R``,

    E f(X) = (1/2pi) int f^(u + iR) E[exp((R - iu) X)] du
           = (1/pi) Re int_0^inf f^(u + iR) E[exp((R - iu) X)] du.

The expectation is the extended characteristic function of the extremum,
tabulated once per (model, T, side, R) by Bromwich inversion and then shared by
every strike or barrier priced against it.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateContract, StripViolation, UnsupportedPathType
from .inversion import ContourConfig, sup_laplace_batch
from .models import LevyModel, cumulant, mean, moment_strip, path_properties
from .quadrature import graded_edges, panel_rule
from .wienerhopf import Side


@dataclass(frozen=True)
class FourierConfig:
    """Outer (pricing) integral: truncation ``u_max`` and maximal panel width."""

    u_max: float = 200.0
    width: float | None = None
    order: int = 16


@dataclass
class PriceResult:
    price: float
    numerical_error: float
    diagnostics: dict = field(default_factory=dict)


# product descriptions ------------------------------------------------------


@dataclass(frozen=True)
class LookbackCall:
    K: float


@dataclass(frozen=True)
class LookbackPut:
    K: float


@dataclass(frozen=True)
class OneTouchUp:
    B: float


@dataclass(frozen=True)
class DigitalDown:
    B: float


@dataclass(frozen=True)
class GeneralSup:
    payoff_transform: Callable
    R_range: tuple
    side: str = "ascending"


@dataclass(frozen=True)
class EdsSchedule:
    premium_dates: tuple
    barrier_B: float
    recovery_C: float
    rate_r: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.premium_dates, dtype=float)
        if d.size == 0 or d[0] <= 0 or np.any(np.diff(d) <= 0):
            raise ValueError("premium dates must be positive and strictly ascending")
        if self.barrier_B <= 0 or self.recovery_C < 0 or self.rate_r < 0:
            raise ValueError("barrier must be positive, recovery and rate nonnegative")
        object.__setattr__(self, "premium_dates", tuple(float(x) for x in d))


@dataclass(frozen=True)
class PricingRequest:
    model: LevyModel
    S0: float
    T: float
    product: object
    R: float | None = None
    contour: ContourConfig | None = None
    discount_r: float = 0.0
    fourier: FourierConfig | None = None

    def __post_init__(self):
        if self.S0 <= 0 or self.T <= 0:
            raise ValueError("S0 and T must be positive")
        if self.discount_r < 0:
            raise ValueError("discount rate must be nonnegative")


# the shared transform table ----------------------------------------------


def _spread_scale(model: LevyModel, T: float) -> float:
    """Rough width of the law of the extremum, used to pick panel widths."""
    h = 1e-3
    k2 = float(np.real(cumulant(model, h) - 2 * cumulant(model, 0.0) + cumulant(model, -h))) / h**2
    return abs(mean(model)) * T + 5.0 * math.sqrt(max(k2, 0.0) * T)


class ExtremumTable:
    """Values of ``E[exp((R - iu) X)]`` on a quadrature grid ``u >= 0``."""

    def __init__(self, model: LevyModel, T: float, side, R: float,
                 contour: ContourConfig | None = None, fourier: FourierConfig | None = None,
                 freq_hint: float = 0.0):
        self.model, self.T, self.side, self.R = model, float(T), Side(side), float(R)
        self.contour = contour or ContourConfig()
        self.fourier = fourier or FourierConfig()
        strip = moment_strip(model)
        if self.side is Side.ASCENDING and not R < strip.M_safe:
            raise StripViolation(f"R={R:g} must be below M_safe={strip.M_safe:g}")
        if self.side is Side.DESCENDING and not R > -strip.M_safe:
            raise StripViolation(f"R={R:g} must exceed -M_safe={-strip.M_safe:g}")
        U = self.fourier.u_max
        width = self.fourier.width or panel_width(model, T, freq_hint)
        h0 = 0.25 * min(abs(R), abs(R - 1.0), 1.0) if R not in (0.0, 1.0) else 0.25
        edges = graded_edges(min(h0, width), U, 1.5, width)
        u, w = panel_rule(edges, self.fourier.order)
        self.u, self.w = u, w
        u_all = np.concatenate([u, [U, U * 1.001]])
        # X = sup L:  E exp((R - iu) X) = E exp(-beta X) with beta = -(R - iu)
        # X = inf L:  E exp((R - iu) X) = E exp(-beta (-X)) with beta = R - iu
        beta = -(R - 1j * u_all) if self.side is Side.ASCENDING else (R - 1j * u_all)
        res = sup_laplace_batch(model, T, beta, self.contour, self.side.value)
        self.values = res.value[: u.size]
        self.errors = res.error_est[: u.size]
        self.end_values = res.value[u.size :]
        self.diagnostics = dict(res.diagnostics, R=self.R, u_max=U, outer_nodes=int(u.size), width=width)

    def integrate(self, fhat: Callable) -> tuple[float, float, dict]:
        """(1/pi) Re int_0^inf fhat(u + iR) E[exp((R - iu) X)] du and an error estimate."""
        xi = self.u + 1j * self.R
        g = fhat(xi) * self.values
        body = np.sum(self.w * g)
        err_body = float(np.sum(self.w * np.abs(fhat(xi)) * self.errors))
        U = self.fourier.u_max
        g_end = fhat(np.array([U, U * 1.001]) + 1j * self.R) * self.end_values
        tail, tail_err = _tail_estimate(g_end[0], g_end[1], U, 1e-3 * U)
        value = float(np.real(body + tail)) / math.pi
        err = (err_body + tail_err) / math.pi
        return value, err, {"tail": float(abs(tail)) / math.pi}


def _tail_estimate(g0, g1, U, d):
    """int_U^inf g assuming g(u) = g(U) exp(a (u - U)) locally, a from a difference.

    Covers both the oscillating case (a close to i*omega, integration by parts)
    and the slowly decaying case (a = -p/U); half the correction is reported
    as its error, or the whole power-law bound when a has no decaying part.
    """
    if g0 == 0:
        return 0.0, 0.0
    a = (g1 - g0) / (d * g0)
    if a.real < 0 or abs(a.imag) * U > 10:
        corr = -g0 / a
        return corr, 0.5 * abs(corr) + abs(g0) * 1e-3
    return 0.0, abs(g0) * U


def panel_width(model: LevyModel, T: float, freq: float = 0.0) -> float:
    """Outer panel width: at most one period of the payoff or law oscillation.

    Widths are rounded down to 6 / 2^k so that nearby strikes share a table.
    """
    scale = _spread_scale(model, T) + abs(freq)
    w = min(6.0, 2 * math.pi / max(scale, 1e-12))
    return 6.0 / 2.0 ** math.ceil(math.log2(6.0 / w) - 1e-12)


_TABLES: dict = {}
_TABLES_LOCK = threading.Lock()
_TABLES_MAX = 64


def extremum_table(model, T, side, R, contour=None, fourier=None, freq_hint=0.0) -> ExtremumTable:
    fourier = fourier or FourierConfig()
    if fourier.width is None:
        fourier = FourierConfig(fourier.u_max, panel_width(model, T, freq_hint), fourier.order)
    key = (model, float(T), Side(side), float(R), contour, fourier)
    with _TABLES_LOCK:
        tab = _TABLES.get(key)
    if tab is not None:
        tab.hits = getattr(tab, "hits", 0) + 1
        return tab
    tab = ExtremumTable(model, T, side, R, contour, fourier)
    with _TABLES_LOCK:
        if len(_TABLES) >= _TABLES_MAX:
            _TABLES.pop(next(iter(_TABLES)))
        _TABLES[key] = tab
    return tab


def clear_tables():
    with _TABLES_LOCK:
        _TABLES.clear()


# payoff transforms -------------------------------------------------------


def call_put_transform(K: float, S0: float):
    """Transform of (S0 e^x - K)^+ (Im xi > 1) or (K - S0 e^x)^+ (Im xi < 0)."""
    k = math.log(K / S0)
    return lambda xi: K * np.exp(1j * xi * k) / ((1j * xi) * (1j * xi + 1.0))


def upper_indicator_transform(b: float):
    """Transform of 1{x > b}, Im xi > 0."""
    return lambda xi: -np.exp(1j * xi * b) / (1j * xi)


def lower_indicator_transform(b: float):
    """Transform of 1{x < b}, Im xi < 0."""
    return lambda xi: np.exp(1j * xi * b) / (1j * xi)


# pricing operations ------------------------------------------------------


def _result(req_or_none, value, err, tab: ExtremumTable, T, r, extra=None) -> PriceResult:
    disc = math.exp(-r * T)
    diag = dict(tab.diagnostics)
    diag["cache_hits"] = getattr(tab, "hits", 0)
    diag["discount"] = disc
    if extra:
        diag.update(extra)
    return PriceResult(disc * value, disc * err, diag)


def default_R(product, model: LevyModel) -> float:
    m_safe = moment_strip(model).M_safe
    if isinstance(product, LookbackCall):
        return min(0.5 * (1.0 + m_safe), 3.0)
    if isinstance(product, OneTouchUp):
        return 0.5 * min(1.0, m_safe)
    if isinstance(product, (LookbackPut, DigitalDown)):
        return -0.5 * min(1.0, m_safe)
    raise TypeError(f"no default dampening for {type(product).__name__}")


def lookback_call(req: PricingRequest) -> PriceResult:
    """Fixed-strike lookback call, payoff (max S - K)^+."""
    K = req.product.K
    m_safe = moment_strip(req.model).M_safe
    if m_safe <= 1:
        raise StripViolation("lookback call needs exponential moments of order above 1")
    R = req.R if req.R is not None else default_R(req.product, req.model)
    if not 1 < R < m_safe:
        raise StripViolation(f"R={R:g} must lie in (1, {m_safe:g})")
    k = math.log(K / req.S0)
    tab = extremum_table(req.model, req.T, Side.ASCENDING, R, req.contour, req.fourier, k)
    value, err, info = tab.integrate(call_put_transform(K, req.S0))
    return _result(req, value, err, tab, req.T, req.discount_r, info)


def lookback_put(req: PricingRequest) -> PriceResult:
    """Fixed-strike lookback put, payoff (K - min S)^+, via the infimum."""
    K = req.product.K
    m_safe = moment_strip(req.model).M_safe
    R = req.R if req.R is not None else default_R(req.product, req.model)
    if not -m_safe < R < 0:
        raise StripViolation(f"R={R:g} must lie in ({-m_safe:g}, 0)")
    k = math.log(K / req.S0)
    tab = extremum_table(req.model, req.T, Side.DESCENDING, R, req.contour, req.fourier, k)
    value, err, info = tab.integrate(call_put_transform(K, req.S0))
    return _result(req, value, err, tab, req.T, req.discount_r, info)


def _barrier_probability(model, T, side, R, b, upper, contour, fourier):
    tab = extremum_table(model, T, side, R, contour, fourier, b)
    fhat = upper_indicator_transform(b) if upper else lower_indicator_transform(b)
    value, err, info = tab.integrate(fhat)
    info["boundary"] = bool(b == 0.0)
    if b == 0.0:
        # the gating in the callers guarantees regular paths towards the
        # barrier, so the extremum leaves 0 at once and the probability is 1;
        # the Fourier value sits on the jump of the payoff and converges slowly
        info["fourier_value"] = value
        value, err = 1.0, 0.0
    clamped = min(max(value, 0.0), 1.0)
    info["clamped"] = bool(clamped != value)
    return clamped, err, tab, info


def one_touch_up(req: PricingRequest) -> PriceResult:
    """Pays 1 at T if the running maximum of S exceeds B."""
    flags = path_properties(req.model)
    if not flags.atomless_sup:
        raise UnsupportedPathType(
            "one-touch formula needs an atomless supremum: infinite variation, "
            "or infinite activity with regular upward paths"
        )
    m_safe = moment_strip(req.model).M_safe
    R = req.R if req.R is not None else default_R(req.product, req.model)
    if not 0 < R < m_safe:
        raise StripViolation(f"R={R:g} must lie in (0, {m_safe:g})")
    b = math.log(req.product.B / req.S0)
    p, err, tab, info = _barrier_probability(req.model, req.T, Side.ASCENDING, R, b, True,
                                             req.contour, req.fourier)
    return _result(req, p, err, tab, req.T, req.discount_r, info)


def digital_down(req: PricingRequest) -> PriceResult:
    """Pays 1 at T if the running minimum of S falls below B."""
    if not path_properties(req.model.dual()).atomless_sup:
        raise UnsupportedPathType(
            "digital formula needs an atomless infimum: infinite variation, "
            "or infinite activity with regular downward paths"
        )
    m_safe = moment_strip(req.model).M_safe
    R = req.R if req.R is not None else default_R(req.product, req.model)
    if not -m_safe < R < 0:
        raise StripViolation(f"R={R:g} must lie in ({-m_safe:g}, 0)")
    b = math.log(req.product.B / req.S0)
    p, err, tab, info = _barrier_probability(req.model, req.T, Side.DESCENDING, R, b, False,
                                             req.contour, req.fourier)
    return _result(req, p, err, tab, req.T, req.discount_r, info)


def sup_payoff_price(model: LevyModel, T: float, payoff_transform: Callable, R_range,
                     contour: ContourConfig | None = None, side="ascending", R: float | None = None,
                     fourier: FourierConfig | None = None, discount_r: float = 0.0) -> PriceResult:
    """Price of f(sup L_T) (or f(inf L_T)) from the transform of f.

    ``payoff_transform`` maps complex ``xi`` (arrays) to ``int e^{i xi x} f(x) dx``
    and must be analytic on ``Im xi = R`` for every R in ``R_range``.
    """
    m_safe = moment_strip(model).M_safe
    lo, hi = map(float, R_range)
    if Side(side) is Side.ASCENDING:
        hi = min(hi, m_safe)
    else:
        lo = max(lo, -m_safe)
    if not lo < hi:
        raise StripViolation(f"no admissible dampening in {tuple(R_range)} (M_safe={m_safe:g})")
    if R is None:
        R = 0.5 * (lo + hi)
    elif not lo < R < hi:
        raise StripViolation(f"R={R:g} is outside ({lo:g}, {hi:g})")
    tab = extremum_table(model, T, side, R, contour, fourier)
    value, err, info = tab.integrate(payoff_transform)
    return _result(None, value, err, tab, T, discount_r, info)


def european_call(model: LevyModel, S0: float, K: float, T: float, R: float | None = None,
                  discount_r: float = 0.0, u_max: float = 400.0) -> PriceResult:
    """Vanilla call on S_T with the same damped transform, from exp(T kappa)."""
    m_safe = moment_strip(model).M_safe
    R = R if R is not None else min(0.5 * (1 + m_safe), 3.0)
    if not 1 < R < m_safe:
        raise StripViolation(f"R={R:g} must lie in (1, {m_safe:g})")
    width = min(4.0, 2 * math.pi / max(_spread_scale(model, T) + abs(math.log(K / S0)), 1e-12))
    u, w = panel_rule(graded_edges(0.25 * min(R - 1, 1.0), u_max, 1.5, width), 16)
    xi = u + 1j * R
    g = call_put_transform(K, S0)(xi) * np.exp(T * cumulant(model, R - 1j * u))
    disc = math.exp(-discount_r * T)
    tail = abs(g[-1]) * u_max / math.pi
    return PriceResult(disc * float(np.real(np.sum(w * g))) / math.pi, disc * tail, {"R": R})


def price(req: PricingRequest) -> PriceResult:
    """Dispatch on the product type."""
    prod = req.product
    if isinstance(prod, LookbackCall):
        return lookback_call(req)
    if isinstance(prod, LookbackPut):
        return lookback_put(req)
    if isinstance(prod, OneTouchUp):
        return one_touch_up(req)
    if isinstance(prod, DigitalDown):
        return digital_down(req)
    if isinstance(prod, GeneralSup):
        return sup_payoff_price(req.model, req.T, prod.payoff_transform, prod.R_range,
                                req.contour, prod.side, req.R, req.fourier, req.discount_r)
    if isinstance(prod, EdsSchedule):
        return eds_premium(req.model, req.S0, prod, req.contour, req.fourier)
    raise TypeError(f"unknown product {type(prod).__name__}")


# first passage and equity default swaps ------------------------------------


def first_passage_curve(model: LevyModel, S0: float, B: float, t_grid: Sequence[float],
                        contour: ContourConfig | None = None, fourier: FourierConfig | None = None,
                        R: float | None = None):
    """F(t) = P(min_{s<=t} S_s < B) on an ascending grid, made monotone.

    Returns ``(t, F, err, info)``; ``info['isotonic_adjusted']`` records
    whether the raw values had to be clipped into a nondecreasing sequence.
    """
    if not B < S0:
        raise DegenerateContract("barrier must lie below the spot")
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be positive and ascending")
    raw = np.empty(t.size)
    err = np.empty(t.size)
    for i, ti in enumerate(t):
        res = digital_down(PricingRequest(model, S0, float(ti), DigitalDown(B), R=R,
                                          contour=contour, fourier=fourier))
        raw[i], err[i] = res.price, res.numerical_error
    F = np.maximum.accumulate(np.clip(raw, 0.0, 1.0))
    info = {"isotonic_adjusted": bool(np.any(F != raw)), "max_adjustment": float(np.max(np.abs(F - raw)))}
    return t, F, err, info


def _eds_from_curve(times, F, dates, C, r):
    """Premium rate from a first-passage curve that includes every premium date."""
    tt = np.concatenate([[0.0], times])
    FF = np.concatenate([[0.0], F])
    disc = np.exp(-r * tt)
    num = C * float(np.sum(0.5 * (disc[1:] + disc[:-1]) * np.diff(FF)))
    idx = np.searchsorted(times, dates)
    den = float(np.sum(np.exp(-r * np.asarray(dates)) * (1.0 - F[idx])))
    return num, den


def eds_premium(model: LevyModel, S0: float, schedule: EdsSchedule,
                contour: ContourConfig | None = None, fourier: FourierConfig | None = None,
                rel_tol: float = 5e-3, max_refine: int = 4) -> PriceResult:
    """Fair premium of an equity default swap paying C at the first passage below B."""
    B, C, r = schedule.barrier_B, schedule.recovery_C, schedule.rate_r
    if B >= S0:
        raise DegenerateContract("barrier at or above the spot: default at inception")
    dates = np.asarray(schedule.premium_dates)
    grid = dates.copy()
    curve = {}

    def evaluate(grid):
        todo = [x for x in grid if x not in curve]
        if todo:
            t, F, err, _ = first_passage_curve(model, S0, B, todo, contour, fourier)
            for ti, Fi, ei in zip(t, F, err):
                curve[ti] = (Fi, ei)
        F = np.maximum.accumulate(np.array([curve[x][0] for x in grid]))
        return F, max(curve[x][1] for x in grid)

    F, err = evaluate(grid)
    num, den = _eds_from_curve(grid, F, dates, C, r)
    if den < 1e-12:
        raise DegenerateContract("default is virtually certain before the first premium date")
    prem = num / den
    history = [prem]
    converged = C == 0
    for _ in range(max_refine if not converged else 0):
        grid = np.unique(np.concatenate([grid, 0.5 * (np.concatenate([[0.0], grid[:-1]]) + grid)]))
        F, err = evaluate(grid)
        num, den = _eds_from_curve(grid, F, dates, C, r)
        new = num / den
        history.append(new)
        change = abs(new - prem)
        prem = new
        if change <= rel_tol * abs(prem):
            converged = True
            break
    refine_err = abs(history[-1] - history[-2]) if len(history) > 1 else 0.0
    # probability errors propagate through numerator and denominator
    prob_err = err * (C + prem * dates.size) / den
    diag = {"grid_points": int(grid.size), "history": history, "converged": bool(converged)}
    return PriceResult(float(prem), float(refine_err + prob_err), diag)
