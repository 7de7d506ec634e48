"""Exponential-moment bounds for the running supremum and infimum.

With ``b = E[L_1]`` the integrals of ``|exp(±Mx) - 1 ∓ Mx|`` against the Lévy
measure lose their absolute values (``exp(y) - 1 - y >= 0``), which gives the
closed forms

    alpha_bar(M)   = M (|b| - b) + kappa(M)
    alpha_under(M) = M (|b| + b) + kappa(-M)

used throughout; no Lévy density is ever needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import AbscissaViolation, StripViolation
from .models import LevyModel, cumulant, mean, moment_strip


@dataclass(frozen=True)
class MomentBounds:
    M: float
    alpha_bar: float
    alpha_under: float
    alpha_star: float

    def bound_C(self, t: float) -> float:
        """C(t, M) = exp(t alpha_bar) + exp(t alpha_under)."""
        return math.exp(t * self.alpha_bar) + math.exp(t * self.alpha_under)


def _check_M(model: LevyModel, M: float) -> None:
    strip = moment_strip(model)
    if not (0 < M <= strip.M_safe * (1 + 1e-12)):
        raise StripViolation(f"M={M:g} must lie in (0, M_safe={strip.M_safe:g}] for {model}")


def moment_bounds(model: LevyModel, M: float) -> MomentBounds:
    _check_M(model, M)
    b = mean(model)
    k_up = float(np.real(cumulant(model, M)))
    k_dn = float(np.real(cumulant(model, -M)))
    a_bar = M * (abs(b) - b) + k_up
    a_under = M * (abs(b) + b) + k_dn
    # both are >= 0 mathematically; clip rounding noise
    a_bar, a_under = max(a_bar, 0.0), max(a_under, 0.0)
    return MomentBounds(M, a_bar, a_under, max(a_bar, a_under))


def sup_moment_bound(model: LevyModel, t: float, M: float) -> float:
    """8 C(t, M): upper bound for E[exp(M sup L)] and E[exp(-M inf L)] on [0, t]."""
    return 8.0 * moment_bounds(model, M).bound_C(t)


def min_abscissa(model: LevyModel, M: float) -> float:
    """alpha*(M); admissible q and Bromwich abscissas lie strictly above it."""
    return moment_bounds(model, M).alpha_star


def largest_admissible_M(model: LevyModel, q: float, shrink: float = 0.98) -> float:
    """Largest ``M <= M_safe`` (times ``shrink``) with ``alpha*(M) < q``.

    alpha* is nondecreasing in M, so a bisection on the sign of
    ``alpha*(M) - q`` suffices.
    """
    m_safe = moment_strip(model).M_safe
    if min_abscissa(model, m_safe) < q:
        return m_safe
    tiny = 1e-9 * m_safe
    if min_abscissa(model, tiny) >= q:
        raise AbscissaViolation(f"q={q:g} is not above alpha*(M) for any admissible M of {model}")
    root = optimize.brentq(lambda m: min_abscissa(model, m) - q, tiny, m_safe, xtol=1e-12 * m_safe)
    return shrink * root
