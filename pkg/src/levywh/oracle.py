"""Independent reference values: Monte Carlo paths and Brownian closed forms.

Random numbers come from Philox streams; block ``i`` of a run with seed ``s``
uses ``SeedSequence(s).spawn(n_blocks)[i]``, so results do not depend on how
blocks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.stats import norm

from .errors import EmptySample, ParameterDomain
from .models import Family, LevyModel
from .transition import marginal_law

BLOCK_PATHS = 2000


@dataclass(frozen=True)
class McConfig:
    n_paths: int
    n_steps: int
    seed: int = 20240601
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 1000:
            raise ValueError("n_paths must be at least 1000")
        if self.n_steps < 100:
            raise ValueError("n_steps must be at least 100")
        if self.antithetic and self.n_paths % 2:
            raise ValueError("antithetic sampling needs an even number of paths")


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    bias_note: str = "none"


@dataclass
class PathSamples:
    """Log-price functionals per path; ``coarse_*`` use every ``coarsen``-th grid point."""

    terminal: np.ndarray
    running_max: np.ndarray
    running_min: np.ndarray
    antithetic: bool = False
    coarse_max: np.ndarray | None = None
    coarse_min: np.ndarray | None = None


class _Increments:
    """Draws (n_steps, n) increment arrays over a step of length dt."""

    def __init__(self, model: LevyModel, dt: float):
        self.model, self.dt = model, dt
        fam = model.family
        if fam in (Family.BROWNIAN, Family.VG, Family.NIG):
            self.kind = fam
        else:
            law = marginal_law(model, dt)
            self.kind = "table"
            cdf = law.cdf()
            keep = np.concatenate([[True], np.diff(cdf) > 0])
            self.cdf, self.x = cdf[keep], law.x_nodes[keep]

    def draw(self, rng: np.random.Generator, shape, flip: bool = False):
        m, dt = self.model, self.dt
        p = m.p
        sgn = -1.0 if flip else 1.0
        if self.kind == "table":
            u = rng.random(shape)
            if flip:
                u = 1.0 - u
            return np.interp(u, self.cdf, self.x)
        out = np.full(shape, m.drift_b * dt)
        if m.diffusion_c > 0:
            out += sgn * math.sqrt(m.diffusion_c * dt) * rng.standard_normal(shape)
        if self.kind is Family.VG:
            C, G, M = p["C"], p["G"], p["M"]
            theta, sig = C * (1 / M - 1 / G), math.sqrt(2 * C / (G * M))
            g = rng.gamma(C * dt, 1.0 / C, shape)
            out += theta * g + sgn * sig * np.sqrt(g) * rng.standard_normal(shape)
        elif self.kind is Family.NIG:
            a, b, d = p["alpha"], p["beta"], p["delta"]
            gam = math.sqrt(a * a - b * b)
            z = rng.wald(d * dt / gam, (d * dt) ** 2, shape)
            out += b * z + sgn * np.sqrt(z) * rng.standard_normal(shape)
        return out


def _block_streams(seed: int, n_blocks: int):
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(n_blocks)]


def simulate_terminal_and_extrema(model: LevyModel, T: float, cfg: McConfig, coarsen: int = 1) -> PathSamples:
    """Terminal value, grid maximum and grid minimum of L on ``n_steps`` steps.

    The extrema include the starting point 0.  With ``coarsen > 1`` the
    extrema over every ``coarsen``-th grid point of the same paths are also
    returned (used to measure the discretisation bias on coupled paths).
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if cfg.n_steps % coarsen:
        raise ValueError("n_steps must be a multiple of coarsen")
    inc = _Increments(model, T / cfg.n_steps)
    n = cfg.n_paths
    n_blocks = -(-n // BLOCK_PATHS)
    term, mx, mn = np.empty(n), np.empty(n), np.empty(n)
    cmx = np.empty(n) if coarsen > 1 else None
    cmn = np.empty(n) if coarsen > 1 else None
    # step chunks keep memory bounded for long grids
    chunk = max(1, 4_000_000 // BLOCK_PATHS)
    for blk, rng in enumerate(_block_streams(cfg.seed, n_blocks)):
        lo = blk * BLOCK_PATHS
        size = min(BLOCK_PATHS, n - lo)
        half = size // 2 if cfg.antithetic else size
        x = np.zeros(size)
        bmax, bmin = np.zeros(size), np.zeros(size)
        cmax, cmin = np.zeros(size), np.zeros(size)
        done = 0
        while done < cfg.n_steps:
            k = min(chunk, cfg.n_steps - done)
            if cfg.antithetic:
                state = rng.bit_generator.state
                a = inc.draw(rng, (k, half))
                rng.bit_generator.state = state
                dx = np.concatenate([a, inc.draw(rng, (k, half), flip=True)], axis=1)
            else:
                dx = inc.draw(rng, (k, size))
            path = x + np.cumsum(dx, axis=0)
            np.maximum(bmax, path.max(axis=0), out=bmax)
            np.minimum(bmin, path.min(axis=0), out=bmin)
            if coarsen > 1:
                first = (coarsen - 1 - done) % coarsen
                sub = path[first::coarsen]
                if sub.size:
                    np.maximum(cmax, sub.max(axis=0), out=cmax)
                    np.minimum(cmin, sub.min(axis=0), out=cmin)
            x = path[-1]
            done += k
        term[lo : lo + size], mx[lo : lo + size], mn[lo : lo + size] = x, bmax, bmin
        if coarsen > 1:
            cmx[lo : lo + size], cmn[lo : lo + size] = cmax, cmin
    return PathSamples(term, mx, mn, cfg.antithetic, cmx, cmn)


def payoff_values(samples: PathSamples, payoff, S0: float = 1.0, coarse: bool = False):
    """Per-path payoff and the bias direction of its grid-sampled estimate."""
    from .pricing import DigitalDown, LookbackCall, LookbackPut, OneTouchUp

    mx = samples.coarse_max if coarse else samples.running_max
    mn = samples.coarse_min if coarse else samples.running_min
    if isinstance(payoff, LookbackCall):
        return np.maximum(S0 * np.exp(mx) - payoff.K, 0.0), "sup_underestimated"
    if isinstance(payoff, LookbackPut):
        return np.maximum(payoff.K - S0 * np.exp(mn), 0.0), "inf_overestimated"
    if isinstance(payoff, OneTouchUp):
        return (S0 * np.exp(mx) > payoff.B).astype(float), "sup_underestimated"
    if isinstance(payoff, DigitalDown):
        return (S0 * np.exp(mn) < payoff.B).astype(float), "inf_overestimated"
    if callable(payoff):
        return np.asarray(payoff(samples.terminal, mx, mn), dtype=float), "none"
    if isinstance(payoff, (int, float)):
        return np.full(samples.terminal.shape, float(payoff)), "none"
    raise TypeError(f"unsupported payoff {payoff!r}")


def mc_price(samples: PathSamples, payoff, discount: float = 1.0, S0: float = 1.0,
             coarse: bool = False) -> McEstimate:
    """Discounted sample mean and its standard error.

    Antithetic pairs (path i and path i + n/2 within each block) are averaged
    before the variance is taken.
    """
    if samples.terminal.size == 0:
        raise EmptySample("no paths to average")
    vals, note = payoff_values(samples, payoff, S0, coarse)
    vals = discount * vals
    if samples.antithetic:
        pairs = []
        for lo in range(0, vals.size, BLOCK_PATHS):
            blk = vals[lo : lo + BLOCK_PATHS]
            h = blk.size // 2
            pairs.append(0.5 * (blk[:h] + blk[h : 2 * h]))
        vals = np.concatenate(pairs)
    n = vals.size
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McEstimate(float(vals.mean()), se, note)


# Brownian closed forms -----------------------------------------------------


def _bm_sup_survival(b, c, t, x):
    """P(max_{s<=t} (b s + sqrt(c) W_s) > x) for x >= 0."""
    s = math.sqrt(c * t)
    if x <= 0:
        return 1.0
    tail = norm.sf((x - b * t) / s)
    # exp(2bx/c) Phi(.) in log form to avoid overflow
    log_second = 2 * b * x / c + norm.logcdf((-x - b * t) / s)
    return min(1.0, tail + math.exp(log_second))


def bm_closed_form(kind: str, b: float, c: float, **args) -> float:
    """Closed-form fluctuation quantities of ``L_t = b t + sqrt(c) W_t``.

    kinds and arguments:
      ladder_ratio(q, beta)        E exp(-beta sup over an Exp(q) horizon)
      sup_cdf(t, x)                P(sup_{s<=t} L_s <= x)
      sup_laplace(t, beta)         E exp(-beta sup_{s<=t} L_s)
      lookback_call(S0, K, T)      E (S0 exp(sup L_T) - K)^+
      lookback_put(S0, K, T)       E (K - S0 exp(inf L_T))^+
      first_passage_cdf(t, x)      P(inf_{s<=t} L_s <= x), x <= 0
    """
    if c <= 0:
        raise ParameterDomain("closed forms need c > 0")
    if kind == "ladder_ratio":
        q, beta = args["q"], args["beta"]
        lam = (np.sqrt(b * b + 2 * c * q + 0j) - b) / c
        return complex(lam / (lam + beta)) if np.iscomplexobj(beta) or np.iscomplexobj(q) else float(np.real(lam / (lam + beta)))
    if kind == "sup_cdf":
        return 1.0 - _bm_sup_survival(b, c, args["t"], args["x"])
    if kind == "sup_laplace":
        t, beta = args["t"], args["beta"]
        # E e^{-beta M} = 1 - beta int_0^inf e^{-beta x} P(M > x) dx
        f = lambda x: math.exp(-beta * x) * _bm_sup_survival(b, c, t, x)
        if beta > 0:
            return 1.0 - beta * integrate.quad(f, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
        # for beta < 0 the Gaussian tail still wins; its peak sits near b t + |beta| c t
        up = abs(b) * t + abs(beta) * c * t + 14 * math.sqrt(c * t) + 1.0
        return 1.0 - beta * integrate.quad(f, 0, up, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    if kind == "lookback_call":
        S0, K, T = args["S0"], args["K"], args["T"]
        k = math.log(K / S0)
        # E(S0 e^M - K)^+ = int_{max(k,0)} S0 e^x P(M > x) dx + (S0 - K)^+
        lo = max(k, 0.0)
        up = lo + 40 * math.sqrt(c * T) + 40 * abs(b) * T + 1.0
        val = integrate.quad(lambda x: S0 * math.exp(x) * _bm_sup_survival(b, c, T, x), lo, up,
                             epsabs=1e-12, epsrel=1e-12, limit=400)[0]
        return val + max(S0 - K, 0.0)
    if kind == "lookback_put":
        S0, K, T = args["S0"], args["K"], args["T"]
        k = math.log(K / S0)
        # E(K - S0 e^m)^+ with m = inf L = -sup of the dual: int_{max(-k,0)} S0 e^{-y} P(-m > y) dy
        lo = max(-k, 0.0)
        up = lo + 40 * math.sqrt(c * T) + 40 * abs(b) * T + 1.0
        val = integrate.quad(lambda y: S0 * math.exp(-y) * _bm_sup_survival(-b, c, T, y), lo, up,
                             epsabs=1e-12, epsrel=1e-12, limit=400)[0]
        return val + max(K - S0, 0.0)
    if kind == "first_passage_cdf":
        t, x = args["t"], args["x"]
        if x >= 0:
            return 1.0
        if math.isinf(t):
            return 1.0 if b <= 0 else math.exp(2 * b * x / c)
        return _bm_sup_survival(-b, c, t, -x)
    raise ValueError(f"unknown closed form {kind!r}")
