"""Ladder-exponent ratios and Wiener–Hopf factors.

For the ascending side the quantity of interest is

    ell(q, beta) = log kbar(q, beta) - log kbar(q, 0)
                 = int_0^inf e^{-qt}/t int_{(0,inf)} (1 - e^{-beta x}) P(L_t in dx) dt.

Writing the density of L_t as a Bromwich integral along ``Re s = delta`` and
exchanging the order of integration turns the t-integral into a Frullani
integral, so that

    ell(q, beta) = (1/2pi) int g(s) [Lq(s) - Lq(-beta)] du,    s = delta + iu,

with ``g(s) = beta / (s (s + beta))`` and ``Lq(s) = log q - log(q - kappa(s))``.
Subtracting ``Lq(-beta)`` removes the pole of ``g`` at ``s = -beta`` without
changing the value (``g`` integrates to zero to the right of that pole), so a
single contour serves every beta with ``Re beta > -M``.  The formula holds for
complex ``q`` with ``Re q > alpha*(M)``, which the Bromwich inversion needs.

The time-domain route (quadrature in t over marginal laws) is kept as an
independent check; it is far slower and limited by the marginal-law grids at
small t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .analysis import largest_admissible_M, min_abscissa
from .errors import AbscissaViolation, StripViolation, UnsupportedPathType
from .models import LevyModel, cumulant, moment_strip, path_properties
from .quadrature import graded_edges, panel_rule
from .transition import GridConfig, half_line_transform, marginal_law

U_MAX = 1e14


class Side(str, Enum):
    ASCENDING = "ascending"
    DESCENDING = "descending"


@dataclass(frozen=True)
class LadderQuery:
    q: complex
    beta: complex
    side: Side = Side.ASCENDING

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))


@dataclass(frozen=True)
class LadderValue:
    ratio: complex
    log_kappa_rel: complex
    error_est: float
    diagnostics: dict = field(default_factory=dict, compare=False)


def reject_compound_poisson(model: LevyModel) -> None:
    flags = path_properties(model)
    if not (flags.infinite_activity or flags.infinite_variation) and model.drift_b == 0.0:
        raise UnsupportedPathType(f"{model} is a compound Poisson process")


def oriented(model: LevyModel, side) -> LevyModel:
    """The model whose ascending ladder gives the requested side."""
    return model if Side(side) is Side.ASCENDING else model.dual()


class SpitzerRule:
    """Quadrature for ``ell(q, beta)`` on the line ``Re s = delta``.

    Nodes are fixed at construction so that the q-dependent part
    ``Lq(s_k)`` and the beta-dependent weights can be combined as a single
    matrix product over many (q, beta) pairs.
    """

    def __init__(self, model: LevyModel, M: float, h0: float | None = None,
                 ratio: float = 2.0, order: int = 12, line_frac: float = 0.5):
        strip = moment_strip(model)
        if not 0 < M <= strip.M_safe * (1 + 1e-12):
            raise StripViolation(f"M={M:g} must lie in (0, {strip.M_safe:g}]")
        self.model = model
        self.M = float(M)
        self.delta = line_frac * self.M
        self.alpha_star = min_abscissa(model, self.M)
        h0 = h0 if h0 is not None else 0.5 * self.delta
        edges = graded_edges(h0, U_MAX, ratio)
        u, w = panel_rule(edges, order)
        self.u = np.concatenate([-u[::-1], u])
        self.w = np.concatenate([w[::-1], w])
        self.s = self.delta + 1j * self.u
        self.kappa = cumulant(model, self.s)

    @property
    def n_nodes(self) -> int:
        return self.u.size

    def _check_q(self, q):
        if np.any(np.real(q) <= self.alpha_star):
            raise AbscissaViolation(
                f"Re(q) must exceed alpha*(M)={self.alpha_star:.6g} (M={self.M:g}); got {np.min(np.real(q)):.6g}"
            )

    def _check_beta(self, beta):
        if np.any(np.real(beta) <= -self.M):
            raise StripViolation(f"Re(beta) must exceed -M={-self.M:g}")

    def log_q_term(self, q, s_kappa):
        return np.log(q) - np.log(q - s_kappa)

    def log_kappa_rel(self, q, beta) -> np.ndarray:
        """Matrix of ``ell(q_i, beta_j)`` for 1-d arrays ``q`` and ``beta``."""
        q = np.atleast_1d(np.asarray(q, dtype=complex))
        beta = np.atleast_1d(np.asarray(beta, dtype=complex))
        self._check_q(q)
        self._check_beta(beta)
        s = self.s
        if np.any(np.abs(s[:, None] + beta[None, :]) < 1e-12 * self.M):
            # a node sits on the removed pole; move the line slightly
            other = SpitzerRule(self.model, self.M, line_frac=0.45)
            return other.log_kappa_rel(q, beta)
        G = (self.w / (2 * math.pi))[:, None] * beta[None, :] / (s[:, None] * (s[:, None] + beta[None, :]))
        Lmat = self.log_q_term(q[:, None], self.kappa[None, :])
        out = Lmat @ G
        # subtract Lq(-beta) * sum(G) where the pole lies inside the strip
        sub = np.real(beta) <= self.M
        if np.any(sub):
            kb = np.zeros(beta.shape, dtype=complex)
            kb[sub] = cumulant(self.model, -beta[sub])
            Lb = self.log_q_term(q[:, None], kb[None, :])
            out -= np.where(sub[None, :], Lb * G.sum(axis=0)[None, :], 0.0)
        out[:, beta == 0] = 0.0
        return out

    def tail_bound(self, q, beta) -> float:
        """Rough size of the part of the integral beyond the last node."""
        U = float(self.u[-1])
        kU = cumulant(self.model, self.delta + 1j * U)
        size = abs(np.log(q)) + abs(np.log(q - kU)) + abs(np.log(q - cumulant(self.model, -beta))) \
            if np.real(beta) <= self.M else abs(np.log(q)) + abs(np.log(q - kU))
        return abs(beta) * size / (math.pi * U)


def default_M(model: LevyModel, q) -> float:
    """Largest admissible M for ``Re q``; the whole safe strip when possible."""
    return largest_admissible_M(model, float(np.min(np.real(q))))


def _time_route(model: LevyModel, q: complex, beta: complex, cfg: GridConfig | None,
                t_min: float = 1e-3, panels_per_decade: int = 3) -> tuple[complex, float]:
    """ell(q, beta) by direct quadrature in t over marginal laws.

    Panels are uniform in log t.  Below ``t_min`` the inner integral is taken
    to grow like sqrt(t), which gives the head term ``2 I(t_min)``.  The next
    order is smaller by a factor of order sqrt(t_min), which sets error_est.
    """
    decay = q.real - max(0.0, float(np.real(cumulant(model, max(-beta.real, 0.0)))))
    if decay <= 0:
        raise AbscissaViolation("q too small for the time-domain route")
    t_cap = 40.0 / decay

    def inner(t):
        law = marginal_law(model, t, cfg)
        return half_line_transform(law, 0.0) - half_line_transform(law, beta)

    n_pan = max(1, int(math.ceil(panels_per_decade * math.log10(t_cap / t_min))))
    log_t, w = panel_rule(np.linspace(math.log(t_min), math.log(t_cap), n_pan + 1), 8)
    total = sum(wk * np.exp(-q * math.exp(x)) * inner(math.exp(x)) for x, wk in zip(log_t, w))
    head = 2.0 * inner(t_min) * np.exp(-q * t_min)
    return complex(total + head), 0.5 * abs(head) * t_min ** 0.5


def ladder_ratio(model: LevyModel, query: LadderQuery, cfg: GridConfig | None = None,
                 M: float | None = None, method: str = "frequency") -> LadderValue:
    """kbar(q, 0)/kbar(q, beta) (ascending) or its descending analogue."""
    reject_compound_poisson(model)
    work = oriented(model, query.side)
    q = complex(query.q)
    beta = complex(query.beta)
    M = M if M is not None else default_M(work, q)
    if q.real <= min_abscissa(work, M):
        raise AbscissaViolation(f"q={q} is not above alpha*(M)={min_abscissa(work, M):.6g}")
    if beta.real <= -M:
        raise StripViolation(f"Re(beta)={beta.real:g} must exceed -M={-M:g}")
    if beta == 0:
        return LadderValue(1.0 + 0.0j, 0.0j, 0.0, {"M": M, "method": method})
    if method == "time":
        ell, err = _time_route(work, q, beta, cfg)
        diag = {"M": M, "method": method}
    elif method == "frequency":
        rule = SpitzerRule(work, M)
        ell = complex(rule.log_kappa_rel(q, beta)[0, 0])
        fine = SpitzerRule(work, M, h0=0.25 * rule.delta, ratio=1.3)
        ell_fine = complex(fine.log_kappa_rel(q, beta)[0, 0])
        err = (abs(ell_fine - ell) + fine.tail_bound(q, beta)) * math.exp(-ell.real)
        ell = ell_fine
        diag = {"M": M, "method": method, "nodes": fine.n_nodes, "delta": fine.delta}
    else:
        raise ValueError(f"unknown method {method!r}")
    return LadderValue(complex(np.exp(-ell)), ell, float(err), diag)


def wh_factor(model: LevyModel, q: complex, z: complex, side="ascending", M: float | None = None) -> complex:
    """phi^+_q(z) = E exp(i z sup_{s<=theta} L_s), or phi^-_q(z) for the infimum."""
    side = Side(side)
    beta = -1j * z if side is Side.ASCENDING else 1j * z
    return ladder_ratio(model, LadderQuery(q, beta, side), M=M).ratio


def wh_factors(model: LevyModel, q: complex, z, M: float | None = None):
    """Both factors on an array of z with one shared quadrature per side."""
    reject_compound_poisson(model)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = []
    for side, beta in ((Side.ASCENDING, -1j * z), (Side.DESCENDING, 1j * z)):
        work = oriented(model, side)
        m = M if M is not None else default_M(work, q)
        rule = SpitzerRule(work, m)
        out.append(np.exp(-rule.log_kappa_rel(q, beta)[0]))
    return out[0], out[1]


def wh_identity_residual(model: LevyModel, q: float, z_grid, M: float | None = None) -> float:
    """max |phi^+ phi^- - q/(q - kappa(iz))| over a real grid."""
    z = np.asarray(z_grid, dtype=float)
    plus, minus = wh_factors(model, q, z, M)
    rhs = q / (q - cumulant(model, 1j * z))
    return float(np.max(np.abs(plus * minus - rhs)))
