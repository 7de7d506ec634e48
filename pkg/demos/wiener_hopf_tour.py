"""A short tour: factor a characteristic function, then invert in time.

Run with ``python3 demos/wiener_hopf_tour.py``.
"""

import numpy as np

from levywh import (LadderQuery, LevyModel, bm_closed_form, cumulant, ladder_ratio, martingale_adjust,
                    min_abscissa, moment_strip, sup_laplace, wh_factor)

nig = martingale_adjust(LevyModel.nig(alpha=5.0, beta=-1.0, delta=0.5))
M = moment_strip(nig).M_safe
q = min_abscissa(nig, M) + 1.0
print(f"model {nig}; safe moment order {M:.3f}; q = {q:.4f}")

# the two factors multiply back to q / (q - kappa(iz))
for z in (-5.0, 0.5, 12.0):
    plus, minus = wh_factor(nig, q, z), wh_factor(nig, q, z, "descending")
    target = q / (q - cumulant(nig, 1j * z))
    print(f"z={z:6.1f}  phi+ phi- = {plus * minus:.10f}   q/(q-kappa) = {target:.10f}")

# Brownian motion has a closed-form ladder exponent to compare against
bm = LevyModel.brownian(b=0.1, c=0.3)
for beta in (0.5, 2.0, 8.0):
    got = ladder_ratio(bm, LadderQuery(1.5, beta)).ratio.real
    ref = bm_closed_form("ladder_ratio", 0.1, 0.3, q=1.5, beta=beta)
    print(f"Brownian ratio beta={beta}: {got:.12f} vs {ref:.12f}")

# fixed-horizon transform of the running maximum by Bromwich inversion
for t in (0.1, 0.5, 2.0):
    print(f"E exp(-sup L_t) at t={t}: {sup_laplace(nig, t, 1.0).real:.8f}")

# the Laplace transform in t of those values recovers the ladder ratio
x, w = np.polynomial.laguerre.laggauss(40)
lhs = sum(wi * sup_laplace(nig, xi / q, 1.0).real for xi, wi in zip(x, w))
print(f"round trip: {lhs:.8f} vs ladder ratio {ladder_ratio(nig, LadderQuery(q, 1.0), M=M).ratio.real:.8f}")
