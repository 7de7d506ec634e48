import math

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from levywh import (GridConfig, LevyModel, StripViolation, cumulant, half_line_transform, marginal_law)


def test_brownian_density_matches_normal():
    m = LevyModel.brownian(0.1, 0.04)
    law = marginal_law(m, 0.5)
    ref = norm.pdf(law.x_nodes, loc=0.05, scale=math.sqrt(0.02))
    assert np.max(np.abs(law.density - ref)) < 1e-8 * ref.max()
    assert abs(law.mass_defect) < 1e-8


def test_grid_contains_zero(nig):
    law = marginal_law(nig, 0.25)
    assert np.min(np.abs(law.x_nodes)) == 0.0


def test_moments_of_nig_law(nig):
    t = 0.5
    law = marginal_law(nig, t)
    x, p = law.x_nodes, law.density
    m1 = integrate.simpson(x * p, x=x)
    h = 1e-4
    ref = t * (cumulant(nig, h) - cumulant(nig, -h)).real / (2 * h)
    assert m1 == pytest.approx(ref, abs=1e-6)
    # exponential moment e^{t kappa(1)} = 1 for a martingale model
    assert integrate.simpson(np.exp(x) * p, x=x) == pytest.approx(1.0, abs=1e-6)


def test_half_line_transforms_add_up(vg):
    law = marginal_law(vg, 1.0)
    beta = 0.7 + 2j
    plus = half_line_transform(law, beta, "positive")
    minus = half_line_transform(law, -beta, "negative")
    full = np.exp(1.0 * cumulant(vg, -beta))
    assert abs(plus + minus - full) < 1e-6


def test_half_line_transform_strip(vg):
    law = marginal_law(vg, 1.0)
    with pytest.raises(StripViolation):
        half_line_transform(law, -25.0)
    with pytest.raises(ValueError):
        half_line_transform(law, 1.0, side="both")


def test_mirrored_law_is_the_dual(nig):
    law = marginal_law(nig, 0.5)
    mir = law.mirrored()
    assert mir.model == nig.dual()
    assert half_line_transform(mir, 1.0, "positive") == pytest.approx(half_line_transform(law, 1.0, "negative"))


def test_cache_returns_same_object(nig):
    assert marginal_law(nig, 0.75) is marginal_law(nig, 0.75)


def test_grid_config_validation():
    with pytest.raises(ValueError):
        GridConfig(n_x=1000)


def test_cdf_is_monotone(catalog):
    for m in catalog.values():
        c = marginal_law(m, 1.0).cdf()
        assert np.all(np.diff(c) >= 0) and c[-1] == pytest.approx(1.0)


def test_standard_normal_peak():
    law = marginal_law(LevyModel.brownian(0.0, 1.0), 1.0)
    assert law.density[law.x_nodes == 0][0] == pytest.approx(0.398942, abs=1e-6)
    assert half_line_transform(law, 0.0) == pytest.approx(0.5, abs=1e-6)
    assert half_line_transform(law, 1.0).real == pytest.approx(math.exp(0.5) * norm.cdf(-1.0), abs=1e-6)


def test_nig_density_closed_form():
    from scipy.stats import norminvgauss

    law = marginal_law(LevyModel.nig(5.0, 0.0, 1.0), 1.0)
    ref = norminvgauss.pdf(law.x_nodes, 5.0, 0.0)
    assert np.max(np.abs(law.density - ref)) < 1e-5


def test_half_lines_sum_to_one(catalog):
    for m in catalog.values():
        law = marginal_law(m, 1.0)
        total = half_line_transform(law, 0.0, "positive") + half_line_transform(law, 0.0, "negative")
        assert abs(total - 1.0) < 1e-6


def test_slow_decay_needs_too_many_nodes(vg):
    # VG at short horizons: |phi| decays only like u^(-2Ct), so a tight tail
    # tolerance cannot be met within the node budget
    from levywh import TruncationFailure

    with pytest.raises(TruncationFailure):
        marginal_law(vg, 0.5)
