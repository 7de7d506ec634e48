"""Equity default swap premiums for several barrier levels under NIG.

Run with ``python3 demos/eds_term_structure.py``.
"""

import numpy as np

from levywh import EdsSchedule, LevyModel, eds_premium, first_passage_curve, martingale_adjust

model = martingale_adjust(LevyModel.nig(alpha=5.0, beta=-1.0, delta=0.5))
S0 = 100.0
dates = tuple(0.5 * np.arange(1, 5))

t, F, err, info = first_passage_curve(model, S0, 60.0, dates)
for ti, Fi in zip(t, F):
    print(f"P(first passage below 60 before {ti:.1f}y) = {Fi:.6f}")

for B in (40.0, 50.0, 60.0):
    res = eds_premium(model, S0, EdsSchedule(dates, B, recovery_C=0.5, rate_r=0.02))
    print(f"barrier {B:5.1f}: premium {1e4 * res.price:8.3f} bp per period "
          f"(error {1e4 * res.numerical_error:.3f} bp, grid points {res.diagnostics['grid_points']})")
