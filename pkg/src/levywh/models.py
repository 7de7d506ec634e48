"""Catalog of Lévy model families.

Each model is described by the closed-form cumulant of its family plus an
additive drift ``drift_b`` and an optional Gaussian part ``diffusion_c``::

    kappa(s) = drift_b * s + diffusion_c * s**2 / 2 + kappa_family(s)

so that ``E[exp(s L_t)] = exp(t kappa(s))`` for real ``s`` inside the moment
strip and ``E[exp(i u L_t)] = exp(t kappa(i u))`` on the real line.  Nothing
downstream needs the Lévy measure itself.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from scipy import special

from .errors import ParameterDomain, StripViolation

STRIP_EPS = 0.02
BROWNIAN_MOMENT_CAP = 10.0
_STRIP_TOL = 1e-12


class Family(str, enum.Enum):
    BROWNIAN = "Brownian"
    GH = "GH"
    NIG = "NIG"
    VG = "VG"
    CGMY = "CGMY"
    MEIXNER = "Meixner"

    @classmethod
    def parse(cls, name: str) -> "Family":
        for fam in cls:
            if fam.value.lower() == str(name).lower():
                return fam
        raise ParameterDomain(f"unknown model family {name!r}")


_REQUIRED = {
    Family.BROWNIAN: (),
    Family.GH: ("lambda", "alpha", "beta", "delta"),
    Family.NIG: ("alpha", "beta", "delta"),
    Family.VG: ("C", "G", "M"),
    Family.CGMY: ("C", "G", "M", "Y"),
    Family.MEIXNER: ("alpha", "beta", "delta"),
}


@dataclass(frozen=True)
class MomentStrip:
    u_min: float
    u_max: float
    M_safe: float


@dataclass(frozen=True)
class PathFlags:
    infinite_variation: bool
    infinite_activity: bool
    regular_upwards: bool
    atomless_law: bool
    atomless_sup: bool


@dataclass(frozen=True)
class LevyModel:
    """Immutable Lévy model: family tag, family parameters, drift and diffusion."""

    family: Family
    params: tuple = ()
    drift_b: float = 0.0
    diffusion_c: float = 0.0

    def __post_init__(self):
        fam = self.family if isinstance(self.family, Family) else Family.parse(self.family)
        object.__setattr__(self, "family", fam)
        params = self.params
        if isinstance(params, Mapping):
            params = params.items()
        items = tuple(sorted((str(k), float(v)) for k, v in params))
        object.__setattr__(self, "params", items)
        object.__setattr__(self, "drift_b", float(self.drift_b))
        object.__setattr__(self, "diffusion_c", float(self.diffusion_c))
        _validate(self)

    # convenience constructors -------------------------------------------------

    @classmethod
    def brownian(cls, b: float = 0.0, c: float = 1.0) -> "LevyModel":
        return cls(Family.BROWNIAN, (), drift_b=b, diffusion_c=c)

    @classmethod
    def nig(cls, alpha, beta, delta, drift=0.0, c=0.0) -> "LevyModel":
        return cls(Family.NIG, {"alpha": alpha, "beta": beta, "delta": delta}, drift, c)

    @classmethod
    def gh(cls, lam, alpha, beta, delta, drift=0.0, c=0.0) -> "LevyModel":
        return cls(Family.GH, {"lambda": lam, "alpha": alpha, "beta": beta, "delta": delta}, drift, c)

    @classmethod
    def vg(cls, C, G, M, drift=0.0, c=0.0) -> "LevyModel":
        return cls(Family.VG, {"C": C, "G": G, "M": M}, drift, c)

    @classmethod
    def cgmy(cls, C, G, M, Y, drift=0.0, c=0.0) -> "LevyModel":
        return cls(Family.CGMY, {"C": C, "G": G, "M": M, "Y": Y}, drift, c)

    @classmethod
    def meixner(cls, alpha, beta, delta, drift=0.0, c=0.0) -> "LevyModel":
        return cls(Family.MEIXNER, {"alpha": alpha, "beta": beta, "delta": delta}, drift, c)

    # ---------------------------------------------------------------------------

    @property
    def p(self) -> dict:
        return dict(self.params)

    def with_drift(self, b: float) -> "LevyModel":
        return replace(self, drift_b=b)

    def dual(self) -> "LevyModel":
        """The model of ``-L``; its cumulant is ``s -> kappa(-s)``."""
        p = self.p
        if self.family in (Family.NIG, Family.GH, Family.MEIXNER):
            p["beta"] = -p["beta"]
        elif self.family in (Family.VG, Family.CGMY):
            p["G"], p["M"] = p["M"], p["G"]
        return LevyModel(self.family, p, -self.drift_b, self.diffusion_c)

    def cumulant(self, u):
        return cumulant(self, u)

    def __str__(self) -> str:
        ps = ", ".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.family.value}({ps}; b={self.drift_b:g}, c={self.diffusion_c:g})"


def _validate(model: LevyModel) -> None:
    fam = model.family
    p = model.p
    missing = [k for k in _REQUIRED[fam] if k not in p]
    if missing:
        raise ParameterDomain(f"{fam.value}: missing parameters {missing}")
    extra = [k for k in p if k not in _REQUIRED[fam]]
    if extra:
        raise ParameterDomain(f"{fam.value}: unexpected parameters {extra}")
    if not all(math.isfinite(v) for v in p.values()):
        raise ParameterDomain(f"{fam.value}: non-finite parameter")
    if model.diffusion_c < 0:
        raise ParameterDomain("diffusion_c must be nonnegative")
    if fam is Family.BROWNIAN:
        if model.diffusion_c <= 0 and model.drift_b == 0:
            raise ParameterDomain("Brownian model needs c > 0 or b != 0")
    elif fam in (Family.NIG, Family.GH):
        if not (p["alpha"] > abs(p["beta"]) and p["delta"] > 0):
            raise ParameterDomain(f"{fam.value} requires alpha > |beta| and delta > 0")
    elif fam is Family.VG:
        if not (p["C"] > 0 and p["G"] > 0 and p["M"] > 0):
            raise ParameterDomain("VG requires C, G, M > 0")
    elif fam is Family.CGMY:
        if not (p["C"] > 0 and p["G"] > 0 and p["M"] > 0 and p["Y"] < 2):
            raise ParameterDomain("CGMY requires C, G, M > 0 and Y < 2")
    elif fam is Family.MEIXNER:
        if not (p["alpha"] > 0 and -math.pi < p["beta"] < math.pi and p["delta"] > 0):
            raise ParameterDomain("Meixner requires alpha > 0, -pi < beta < pi, delta > 0")


# ---------------------------------------------------------------------------
# family cumulants (without drift/diffusion)


def _kappa_nig(p, s):
    a, b, d = p["alpha"], p["beta"], p["delta"]
    return d * (math.sqrt(a * a - b * b) - np.sqrt(a * a - (b + s) ** 2))


def _log_kve(lam, w):
    """log of the scaled Bessel function K_lam(w) e^w, Re(w) > 0.

    Far out (|w| > 1e6, where the library routine returns NaN) the Hankel
    expansion with three correction terms is exact to rounding.
    """
    w = np.asarray(w, dtype=complex)
    out = np.empty(w.shape, dtype=complex)
    big = np.abs(w) > 1e6
    out[~big] = np.log(special.kve(lam, w[~big]))
    if np.any(big):
        wb = w[big]
        mu = 4.0 * lam * lam
        z = 1.0 / (8.0 * wb)
        series = (mu - 1) * z * (1 + (mu - 9) * z / 2 * (1 + (mu - 25) * z / 3))
        out[big] = 0.5 * np.log(np.pi / (2.0 * wb)) + np.log1p(series)
    return out


def _kappa_gh(p, s):
    lam, a, b, d = p["lambda"], p["alpha"], p["beta"], p["delta"]
    g2 = a * a - b * b
    zeta = d * math.sqrt(g2)
    w2 = a * a - (b + s) ** 2
    w = d * np.sqrt(w2)
    # kve keeps the phase bounded on Re(w) > 0, so the principal log of it is
    # continuous over the strip; the exp(-w) factor is restored exactly.
    log_k = _log_kve(lam, w) - w
    log_k0 = math.log(special.kve(lam, zeta)) - zeta
    return 0.5 * lam * (math.log(g2) - np.log(w2)) + log_k - log_k0


def _kappa_vg(p, s):
    C, G, M = p["C"], p["G"], p["M"]
    return -C * (np.log1p(-s / M) + np.log1p(s / G))


def _kappa_cgmy(p, s):
    C, G, M, Y = p["C"], p["G"], p["M"], p["Y"]
    if Y == 0.0:
        return _kappa_vg(p, s)
    if Y == 1.0:
        return C * ((M - s) * np.log(M - s) - M * math.log(M) + (G + s) * np.log(G + s) - G * math.log(G))
    return C * special.gamma(-Y) * ((M - s) ** Y + (G + s) ** Y - M**Y - G**Y)


def _log_cos(z):
    """log cos z without overflow, continuous on |Re z| < pi/2."""
    z = np.asarray(z, dtype=complex)
    sgn = np.where(z.imag >= 0, 1.0, -1.0)
    # cos z = exp(-i sgn z) (1 + exp(2 i sgn z)) / 2 and |exp(2 i sgn z)| <= 1
    return -1j * sgn * z - math.log(2.0) + np.log1p(np.exp(2j * sgn * z))


def _kappa_meixner(p, s):
    a, b, d = p["alpha"], p["beta"], p["delta"]
    return 2.0 * d * (math.log(math.cos(b / 2)) - _log_cos((a * s + b) / 2))


_FAMILY_KAPPA = {
    Family.BROWNIAN: lambda p, s: np.zeros_like(s),
    Family.NIG: _kappa_nig,
    Family.GH: _kappa_gh,
    Family.VG: _kappa_vg,
    Family.CGMY: _kappa_cgmy,
    Family.MEIXNER: _kappa_meixner,
}


def family_mean(model: LevyModel) -> float:
    """Derivative at 0 of the family part of the cumulant."""
    p = model.p
    fam = model.family
    if fam is Family.BROWNIAN:
        return 0.0
    if fam is Family.NIG:
        return p["delta"] * p["beta"] / math.sqrt(p["alpha"] ** 2 - p["beta"] ** 2)
    if fam is Family.GH:
        g = math.sqrt(p["alpha"] ** 2 - p["beta"] ** 2)
        zeta = p["delta"] * g
        lam = p["lambda"]
        return p["beta"] * p["delta"] / g * special.kve(lam + 1, zeta) / special.kve(lam, zeta)
    if fam is Family.VG or (fam is Family.CGMY and p["Y"] == 0.0):
        return p["C"] * (1 / p["M"] - 1 / p["G"])
    if fam is Family.CGMY:
        C, G, M, Y = p["C"], p["G"], p["M"], p["Y"]
        if Y == 1.0:
            return C * math.log(G / M)
        return C * special.gamma(-Y) * Y * (G ** (Y - 1) - M ** (Y - 1))
    if fam is Family.MEIXNER:
        return p["alpha"] * p["delta"] * math.tan(p["beta"] / 2)
    raise AssertionError(fam)


def mean(model: LevyModel) -> float:
    """E[L_1]; this is the drift ``b`` of the compensated Lévy–Khintchine form."""
    return model.drift_b + family_mean(model)


# ---------------------------------------------------------------------------
# public operations


def moment_strip(model: LevyModel, eps: float = STRIP_EPS, cap: float = BROWNIAN_MOMENT_CAP) -> MomentStrip:
    """Maximal open strip of exponential moments and the safe order ``M_safe``."""
    p = model.p
    fam = model.family
    if fam is Family.BROWNIAN:
        return MomentStrip(-math.inf, math.inf, cap)
    if fam in (Family.NIG, Family.GH):
        lo, hi = -p["alpha"] - p["beta"], p["alpha"] - p["beta"]
    elif fam in (Family.VG, Family.CGMY):
        lo, hi = -p["G"], p["M"]
    elif fam is Family.MEIXNER:
        lo, hi = (p["beta"] - math.pi) / p["alpha"], (p["beta"] + math.pi) / p["alpha"]
    else:
        raise AssertionError(fam)
    return MomentStrip(lo, hi, min(-lo, hi) * (1.0 - eps))


def cumulant(model: LevyModel, u):
    """kappa(u) for complex ``u`` with real part in the closed moment strip.

    Scalars in, scalar out; arrays are evaluated elementwise.
    """
    s = np.asarray(u, dtype=complex)
    strip = moment_strip(model)
    re = s.real
    if np.any(re < strip.u_min - _STRIP_TOL) or np.any(re > strip.u_max + _STRIP_TOL):
        raise StripViolation(
            f"Re(u) outside the moment strip [{strip.u_min:g}, {strip.u_max:g}] of {model}"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        k = _FAMILY_KAPPA[model.family](model.p, s)
    k = k + model.drift_b * s + 0.5 * model.diffusion_c * s * s
    # exact normalisation at the origin
    k = np.where(s == 0, 0.0, k)
    return k[()] if k.ndim == 0 else k


def char_function(model: LevyModel, t: float, z):
    """E[exp(i z L_t)] = exp(t kappa(i z)); ``Im z`` must keep ``i z`` in the strip."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return np.exp(t * cumulant(model, 1j * np.asarray(z, dtype=complex)))


def martingale_adjust(model: LevyModel) -> LevyModel:
    """Replace the drift so that kappa(1) = 0, i.e. ``exp(L)`` is a martingale."""
    strip = moment_strip(model)
    if not strip.u_max > 1.0:
        raise StripViolation(f"{model} has no exponential moment of order 1 (u_max={strip.u_max:g})")
    k1 = float(np.real(cumulant(model, 1.0)))
    if k1 == 0.0:
        return model
    adjusted = model.with_drift(model.drift_b - k1)
    # one correction pass absorbs the rounding of the first subtraction
    k1 = float(np.real(cumulant(adjusted, 1.0)))
    return adjusted.with_drift(adjusted.drift_b - k1) if k1 != 0.0 else adjusted


def path_properties(model: LevyModel) -> PathFlags:
    """Variation/activity/regularity classification of the paths."""
    p = model.p
    fam = model.family
    c = model.diffusion_c
    if fam is Family.BROWNIAN:
        inf_var, inf_act = c > 0, False
    elif fam in (Family.NIG, Family.GH, Family.MEIXNER):
        inf_var, inf_act = True, True
    elif fam is Family.VG:
        inf_var, inf_act = c > 0, True
    elif fam is Family.CGMY:
        Y = p["Y"]
        inf_var, inf_act = (Y >= 1) or c > 0, Y >= 0
    else:
        raise AssertionError(fam)

    if inf_var:
        regular_up = True
    else:
        # bounded variation: the linear coefficient of kappa (no compensator)
        # decides; the native VG/CGMY forms carry none, so it is drift_b.
        d = model.drift_b
        regular_up = d > 0 or (d == 0 and inf_act)
    return PathFlags(
        infinite_variation=inf_var,
        infinite_activity=inf_act,
        regular_upwards=regular_up,
        atomless_law=inf_var or inf_act,
        atomless_sup=inf_var or (inf_act and regular_up),
    )


def model_from_dict(spec: Mapping) -> LevyModel:
    """Build a model from the JSON job format: family, params, drift, diffusion."""
    fam = Family.parse(spec["family"])
    params = dict(spec.get("params", {}))
    # Brownian carries its variance as "c"; other families use "diffusion"
    c = float(params.pop("c", spec.get("diffusion", 0.0)))
    drift = spec.get("drift", "auto")
    b = 0.0 if drift == "auto" else float(drift)
    model = LevyModel(fam, params, b, c)
    if drift == "auto":
        model = martingale_adjust(model)
    return model
