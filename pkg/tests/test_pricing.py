import math

import numpy as np
import pytest
from scipy.stats import norm

from levywh import (ContourConfig, DegenerateContract, DigitalDown, EdsSchedule, GeneralSup, LevyModel,
                    LookbackCall, LookbackPut, OneTouchUp, PricingRequest, StripViolation,
                    UnsupportedPathType, bm_closed_form, eds_premium, european_call, first_passage_curve,
                    martingale_adjust, price, sup_payoff_price)
from levywh.pricing import (call_put_transform, clear_tables, default_R, extremum_table,
                            lower_indicator_transform, panel_width, upper_indicator_transform)

BM = martingale_adjust(LevyModel.brownian(0.0, 0.04))


@pytest.mark.parametrize("product,expected", [
    (LookbackCall(95.0), 18.758035906713207),
    (LookbackPut(105.0), 17.565093549978375),
    (OneTouchUp(110.0), 0.45807868860185147),
    (DigitalDown(90.0), 0.4706916153907064),
])
def test_frozen_nig_prices(nig, product, expected):
    res = price(PricingRequest(nig, 100.0, 0.5, product))
    assert res.price == pytest.approx(expected, abs=1e-7)


@pytest.mark.parametrize("K", [80.0, 100.0, 125.0])
def test_brownian_lookbacks(K):
    b, c = BM.drift_b, BM.diffusion_c
    call = price(PricingRequest(BM, 100.0, 1.0, LookbackCall(K)))
    put = price(PricingRequest(BM, 100.0, 1.0, LookbackPut(K)))
    assert call.price == pytest.approx(bm_closed_form("lookback_call", b, c, S0=100.0, K=K, T=1.0), abs=1e-4)
    assert put.price == pytest.approx(bm_closed_form("lookback_put", b, c, S0=100.0, K=K, T=1.0), abs=1e-4)


def test_brownian_one_touch_and_digital():
    b, c = BM.drift_b, BM.diffusion_c
    for B in (105.0, 130.0):
        got = price(PricingRequest(BM, 100.0, 1.0, OneTouchUp(B))).price
        assert got == pytest.approx(1 - bm_closed_form("sup_cdf", b, c, t=1.0, x=math.log(B / 100)), abs=1e-5)
    for B in (70.0, 95.0):
        got = price(PricingRequest(BM, 100.0, 1.0, DigitalDown(B))).price
        ref = bm_closed_form("first_passage_cdf", b, c, t=1.0, x=math.log(B / 100))
        assert got == pytest.approx(ref, abs=1e-5)


def test_discounting(nig):
    a = price(PricingRequest(nig, 100.0, 0.5, LookbackCall(100.0)))
    b = price(PricingRequest(nig, 100.0, 0.5, LookbackCall(100.0), discount_r=0.05))
    assert b.price == pytest.approx(a.price * math.exp(-0.025), rel=1e-14)


def test_lookback_dominates_european(nig):
    lb = price(PricingRequest(nig, 100.0, 0.5, LookbackCall(100.0))).price
    eu = european_call(nig, 100.0, 100.0, 0.5).price
    assert lb > eu > 0


def test_general_sup_reproduces_lookback(nig):
    tr = call_put_transform(100.0, 100.0)
    gen = sup_payoff_price(nig, 0.5, tr, (1.0, 4.0), R=2.45)
    lb = price(PricingRequest(nig, 100.0, 0.5, LookbackCall(100.0), R=2.45))
    assert gen.price == pytest.approx(lb.price, rel=1e-12)
    via_request = price(PricingRequest(nig, 1.0, 0.5, GeneralSup(tr, (1.0, 4.0)), R=2.45))
    assert via_request.price == pytest.approx(lb.price, rel=1e-12)


def test_transforms_against_quadrature():
    from scipy import integrate

    xi = 0.7 + 0.5j
    b = 0.3
    up = integrate.quad(lambda x: np.exp(-0.5 * x) * np.cos(0.7 * x), b, 200)[0] \
        + 1j * integrate.quad(lambda x: np.exp(-0.5 * x) * np.sin(0.7 * x), b, 200)[0]
    assert abs(upper_indicator_transform(b)(xi) - up) < 1e-8
    xi = 0.7 - 0.5j
    lo = integrate.quad(lambda x: np.exp(0.5 * x) * np.cos(0.7 * x), -200, b)[0] \
        + 1j * integrate.quad(lambda x: np.exp(0.5 * x) * np.sin(0.7 * x), -200, b)[0]
    assert abs(lower_indicator_transform(b)(xi) - lo) < 1e-8


def test_one_touch_monotone_in_barrier(nig):
    vals = [price(PricingRequest(nig, 100.0, 0.5, OneTouchUp(B))).price for B in np.linspace(101, 160, 12)]
    assert all(y <= x for x, y in zip(vals, vals[1:]))


def test_barrier_at_spot_is_flagged(nig):
    res = price(PricingRequest(nig, 100.0, 0.5, OneTouchUp(100.0)))
    assert res.diagnostics["boundary"]
    assert res.price == 1.0
    assert abs(res.diagnostics["fourier_value"] - 1.0) < 0.05
    assert price(PricingRequest(nig, 100.0, 0.5, DigitalDown(100.0))).price == 1.0


def test_table_cache_is_shared(nig):
    clear_tables()
    price(PricingRequest(nig, 100.0, 0.25, LookbackCall(100.0)))
    res = price(PricingRequest(nig, 100.0, 0.25, LookbackCall(101.0)))
    assert res.diagnostics["cache_hits"] >= 1


def test_panel_width_buckets(nig):
    w = panel_width(nig, 1.0)
    assert 6.0 / w == 2 ** round(math.log2(6.0 / w))


def test_gating(vg):
    with pytest.raises(UnsupportedPathType):
        price(PricingRequest(vg, 100.0, 0.5, DigitalDown(90.0)))
    # a bounded-variation model drifting down has atoms in its supremum law
    bv = LevyModel.vg(4.0, 20.0, 25.0, drift=-0.5)
    with pytest.raises(UnsupportedPathType):
        price(PricingRequest(bv, 100.0, 0.5, OneTouchUp(110.0)))


def test_dampening_checks(nig):
    with pytest.raises(StripViolation):
        price(PricingRequest(nig, 100.0, 0.5, LookbackCall(100.0), R=0.5))
    with pytest.raises(StripViolation):
        price(PricingRequest(nig, 100.0, 0.5, OneTouchUp(110.0), R=4.5))
    with pytest.raises(StripViolation):
        price(PricingRequest(nig, 100.0, 0.5, LookbackPut(100.0), R=0.5))
    assert default_R(LookbackCall(1.0), nig) == pytest.approx(2.46)


def test_request_validation(nig):
    with pytest.raises(ValueError):
        PricingRequest(nig, -1.0, 0.5, LookbackCall(1.0))
    with pytest.raises(ValueError):
        PricingRequest(nig, 1.0, 0.5, LookbackCall(1.0), discount_r=-0.1)
    with pytest.raises(TypeError):
        price(PricingRequest(nig, 1.0, 0.5, "straddle"))


def test_first_passage_curve_is_monotone(nig):
    t, F, err, info = first_passage_curve(nig, 100.0, 85.0, [0.1, 0.25, 0.5, 1.0])
    assert np.all(np.diff(F) >= 0) and F[0] >= 0 and F[-1] <= 1
    with pytest.raises(DegenerateContract):
        first_passage_curve(nig, 100.0, 100.0, [0.5])


def test_eds_edge_cases(nig):
    sch = EdsSchedule((0.5, 1.0), 60.0, 0.0, 0.03)
    assert eds_premium(nig, 100.0, sch).price == 0.0
    with pytest.raises(DegenerateContract):
        eds_premium(nig, 100.0, EdsSchedule((0.5, 1.0), 100.0, 0.5, 0.03))
    with pytest.raises(ValueError):
        EdsSchedule((1.0, 0.5), 60.0, 0.5)


def test_eds_short_schedule_brownian():
    # two premium dates, F from the closed form, Stieltjes sum on a fine grid
    b, c = BM.drift_b, BM.diffusion_c
    sch = EdsSchedule((0.5, 1.0), 75.0, 0.6, 0.03)
    res = eds_premium(BM, 100.0, sch)
    x = math.log(0.75)
    tt = np.linspace(0, 1, 4001)
    F = np.array([0.0] + [bm_closed_form("first_passage_cdf", b, c, t=s, x=x) for s in tt[1:]])
    d = np.exp(-0.03 * tt)
    num = 0.6 * np.sum(0.5 * (d[1:] + d[:-1]) * np.diff(F))
    den = sum(math.exp(-0.03 * T) * (1 - bm_closed_form("first_passage_cdf", b, c, t=T, x=x)) for T in (0.5, 1.0))
    assert res.price == pytest.approx(num / den, rel=2e-2)


def test_far_strikes(nig):
    assert 0 <= price(PricingRequest(nig, 100.0, 1.0, LookbackCall(1e8))).price <= 1e-2
    assert abs(price(PricingRequest(nig, 100.0, 1.0, LookbackPut(1e-3))).price) <= 1e-3


def test_lookback_put_dominates_european_put(nig):
    K, T = 100.0, 0.5
    call = european_call(nig, 100.0, K, T).price
    eu_put = call - 100.0 + K  # parity for a martingale with r = 0
    assert price(PricingRequest(nig, 100.0, T, LookbackPut(K))).price >= eu_put


def test_trivial_digital_and_symmetry():
    assert price(PricingRequest(BM, 100.0, 1.0, DigitalDown(120.0))).price == pytest.approx(1.0, abs=5e-3)
    w = LevyModel.brownian(0.0, 1.0)
    up = price(PricingRequest(w, 1.0, 1.0, OneTouchUp(math.e))).price
    down = price(PricingRequest(w, 1.0, 1.0, DigitalDown(1 / math.e))).price
    assert up == pytest.approx(down, abs=1e-7)


def test_general_sup_one_touch(nig):
    b = math.log(1.1)
    gen = price(PricingRequest(nig, 100.0, 0.5, GeneralSup(upper_indicator_transform(b), (0.0, 4.0)), R=0.5))
    ot = price(PricingRequest(nig, 100.0, 0.5, OneTouchUp(110.0), R=0.5))
    assert gen.price == pytest.approx(ot.price, abs=1e-6)
