"""Composite Gauss–Legendre rules on graded panels."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(edges, order: int = 16):
    """Nodes and weights of a composite rule over consecutive panel edges."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x
    weights = half * w
    return nodes.ravel(), weights.ravel()


def graded_edges(h0: float, upper: float, ratio: float = 1.6, h_max: float | None = None):
    """Panel edges on [0, upper]: widths start at h0 and grow geometrically.

    Widths are capped at ``h_max`` when given, so the panels become uniform
    once that width is reached.
    """
    edges = [0.0]
    h = h0
    while edges[-1] < upper:
        step = h if h_max is None else min(h, h_max)
        edges.append(min(edges[-1] + step, upper))
        h *= ratio
    return np.array(edges)


def symmetric_graded_rule(h0: float, upper: float, ratio: float = 1.6, order: int = 16):
    """Rule on [-upper, upper] with panels refined around the origin."""
    edges = graded_edges(h0, upper, ratio)
    x, w = panel_rule(edges, order)
    return np.concatenate([-x[::-1], x]), np.concatenate([w[::-1], w])
