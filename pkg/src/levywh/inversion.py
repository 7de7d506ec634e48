"""Bromwich inversion of exponential-time transforms.

For t > 0 and ``Y > alpha*(M)``

    E[exp(-beta sup_{s<=t} L_s)] = (1/2pi) PV int e^{t(Y+iv)}/(Y+iv) R(Y+iv, beta) dv,

where ``R(q, beta) = kbar(q, 0)/kbar(q, beta)``.  The constant part of ``R``
integrates to exactly 1, so only ``R - 1`` is integrated numerically; it
decays in |v|, which turns the principal value into an ordinary integral.
The remaining tail beyond ``A`` is estimated by two steps of integration by
parts.

Conjugate symmetry ``R(conj q, beta) = conj R(q, conj beta)`` (the model has
real parameters) folds the contour onto ``v >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AbscissaViolation, ConvergenceFailure, StripViolation
from .models import LevyModel, moment_strip
from .quadrature import graded_edges, panel_rule
from .wienerhopf import Side, SpitzerRule, oriented, reject_compound_poisson

BETA_CHUNK = 256


@dataclass(frozen=True)
class ContourConfig:
    """Bromwich contour settings.  ``None`` means chosen from the model and t.

    ``n_nodes`` is a lower bound on the number of nodes on ``[0, A]``; it caps
    the panel width at ``16 A / n_nodes``.
    """

    Y: float | None = None
    A: float | None = None
    n_nodes: int = 512
    tol: float = 1e-6
    refinement: str = "fixed"
    M: float | None = None

    def __post_init__(self):
        if self.n_nodes < 64:
            raise ValueError("n_nodes must be at least 64")
        if self.A is not None and self.A <= 0:
            raise ValueError("A must be positive")
        if self.refinement not in ("fixed", "adaptive"):
            raise ValueError("refinement must be 'fixed' or 'adaptive'")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class InversionResult:
    value: np.ndarray
    error_est: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def working_M(model: LevyModel, beta, M: float | None = None) -> float:
    """Moment order used for the contour.

    The smallest order comfortably covering ``-Re beta`` keeps ``alpha*(M)``,
    hence ``Y`` and the factor ``e^{tY}``, small.
    """
    strip = moment_strip(model)
    need = float(np.max(np.maximum(-np.real(beta), 0.0))) if np.size(beta) else 0.0
    if need >= strip.M_safe:
        raise StripViolation(f"Re(beta) = {-need:g} is not above -M_safe = {-strip.M_safe:g}")
    if M is not None:
        if need >= M:
            raise StripViolation(f"Re(beta) = {-need:g} is not above -M = {-M:g}")
        return float(M)
    return min(strip.M_safe, max(1.0, need + 0.5, 1.25 * need))


def default_Y(alpha_star: float) -> float:
    return alpha_star + max(1.0, 0.25 * alpha_star)


def _contour_nodes(t, Y, alpha_star, A, n_nodes):
    """Nodes and weights on [0, A] with A/2 on a panel edge."""
    w_max = min(2 * math.pi / t, 16.0 * A / n_nodes)
    h0 = min(0.25 * (Y - alpha_star), 0.25 * Y, w_max)
    left = graded_edges(h0, 0.5 * A, 1.6, w_max)
    n_right = int(math.ceil(0.5 * A / w_max))
    right = np.linspace(0.5 * A, A, n_right + 1)
    edges = np.concatenate([left, right[1:]])
    v, w = panel_rule(edges, 16)
    n_half = (len(left) - 1) * 16
    return v, w, n_half


class _Inverter:
    def __init__(self, model: LevyModel, t: float, cfg: ContourConfig, M: float):
        self.t = float(t)
        self.cfg = cfg
        self.rule = SpitzerRule(model, M)
        self.alpha_star = self.rule.alpha_star
        self.Y = cfg.Y if cfg.Y is not None else default_Y(self.alpha_star)
        if self.Y <= self.alpha_star:
            raise AbscissaViolation(f"Y={self.Y:g} must exceed alpha*(M)={self.alpha_star:.6g}")

    def _integrand(self, v, beta, conj_beta_needed):
        """f(v; beta) = e^{tq}/q (R(q, beta) - 1) for q = Y + iv, plus the beta-bar copy."""
        q = self.Y + 1j * v
        betas = np.concatenate([beta, np.conj(beta[conj_beta_needed])])
        ell = np.empty((v.size, betas.size), dtype=complex)
        for s in range(0, betas.size, BETA_CHUNK):
            ell[:, s : s + BETA_CHUNK] = self.rule.log_kappa_rel(q, betas[s : s + BETA_CHUNK])
        pref = (np.exp(self.t * q) / q)[:, None]
        f = pref * np.expm1(-ell)
        f_beta = f[:, : beta.size]
        f_conj = f_beta.copy()
        f_conj[:, conj_beta_needed] = f[:, beta.size :]
        return f_beta, f_conj

    def _tail(self, A, fb, fc, fbp, fcp):
        """int_A^inf of f(.;beta) + conj f(.;conj beta), two-term integration by parts."""
        it = 1j * self.t
        d = 0.01 * A
        out = 0.0
        for val, plus, sign in ((fb, fbp, 1), (fc, fcp, -1)):
            # h(v) = f(v) e^{-itv} varies slowly; f' = (h' + it h) e^{itv}
            ph = np.exp(1j * self.t * A)
            h = val / ph
            h_plus = plus / np.exp(1j * self.t * (A + d))
            dh = (h_plus - h) / d
            tail = ph * (-h / it + dh / it**2)
            out = out + (tail if sign > 0 else np.conj(tail))
        return out

    def evaluate(self, beta, A, n_nodes):
        beta = np.asarray(beta, dtype=complex)
        conj_needed = np.imag(beta) != 0
        v, w, n_half = _contour_nodes(self.t, self.Y, self.alpha_star, A, n_nodes)
        extra = np.array([0.5 * A, 0.5 * A * 1.01, A, A * 1.01])
        fb, fc = self._integrand(np.concatenate([v, extra]), beta, conj_needed)
        F = fb[: v.size] + np.conj(fc[: v.size])
        wF = w[:, None] * F
        full = wF.sum(axis=0)
        half = wF[:n_half].sum(axis=0)
        k = v.size
        tail_half = self._tail(0.5 * A, fb[k], fc[k], fb[k + 1], fc[k + 1])
        tail_full = self._tail(A, fb[k + 2], fc[k + 2], fb[k + 3], fc[k + 3])
        val_full = 1.0 + (full + tail_full) / (2 * math.pi)
        val_half = 1.0 + (half + tail_half) / (2 * math.pi)
        err = np.abs(val_full - val_half) + np.abs(tail_full) / (2 * math.pi) * 1e-2
        return val_full, err, v.size


def default_A(t: float) -> float:
    return max(200.0, 150.0 / t)


def sup_laplace_batch(model: LevyModel, t: float, beta, cfg: ContourConfig | None = None,
                      side="ascending") -> InversionResult:
    """E[exp(-beta S_t)] for an array of beta, with S_t = sup L (ascending) or -inf L."""
    if t <= 0:
        raise ValueError("t must be positive")
    cfg = cfg or ContourConfig()
    reject_compound_poisson(model)
    work = oriented(model, Side(side))
    beta = np.atleast_1d(np.asarray(beta, dtype=complex))
    M = cfg.M if cfg.M is not None else working_M(work, beta)
    working_M(work, beta, M)
    inv = _Inverter(work, t, cfg, M)
    A = cfg.A if cfg.A is not None else default_A(t)
    n_nodes = cfg.n_nodes
    value, err, n_used = inv.evaluate(beta, A, n_nodes)
    doublings = 0
    if cfg.refinement == "adaptive":
        while True:
            if np.all(err <= cfg.tol):
                break
            if doublings == 4:
                raise ConvergenceFailure(
                    f"contour integral did not settle to tol={cfg.tol:g} (last change {np.max(err):.3g})"
                )
            A, n_nodes = 2 * A, 2 * n_nodes
            new, err_new, n_used = inv.evaluate(beta, A, n_nodes)
            err = np.maximum(np.abs(new - value), err_new)
            value = new
            doublings += 1
    value = np.where(beta == 0, 1.0 + 0.0j, value)
    err = np.where(beta == 0, 0.0, err)
    diag = {"Y": inv.Y, "A": A, "M": M, "alpha_star": inv.alpha_star, "contour_nodes": int(n_used),
            "ladder_nodes": inv.rule.n_nodes, "doublings": doublings}
    return InversionResult(value, err, diag)


def sup_laplace(model: LevyModel, t: float, beta: complex, cfg: ContourConfig | None = None,
                side="ascending") -> complex:
    return complex(sup_laplace_batch(model, t, [beta], cfg, side).value[0])


def sup_char(model: LevyModel, t: float, z: complex, cfg: ContourConfig | None = None,
             side="ascending") -> complex:
    """E[exp(i z sup L)] (ascending) or E[exp(i z inf L)] (descending) at time t."""
    beta = -1j * z if Side(side) is Side.ASCENDING else 1j * z
    return sup_laplace(model, t, beta, cfg, side)

