"""Wiener–Hopf factors, extremum laws and exotic option prices for Lévy models."""

__version__ = "0.1.0"

from .analysis import MomentBounds, largest_admissible_M, min_abscissa, moment_bounds, sup_moment_bound
from .errors import (AbscissaViolation, ConfigError, ConvergenceFailure, DegenerateContract, EmptySample,
                     LevyWHError, ParameterDomain, ParseError, SchemaError, SemanticError, StripViolation,
                     TruncationFailure, UnsupportedPathType)
from .inversion import ContourConfig, sup_char, sup_laplace, sup_laplace_batch
from .models import (Family, LevyModel, MomentStrip, PathFlags, char_function, cumulant, martingale_adjust,
                     model_from_dict, moment_strip, path_properties)
from .oracle import McConfig, McEstimate, bm_closed_form, mc_price, simulate_terminal_and_extrema
from .pricing import (DigitalDown, EdsSchedule, FourierConfig, GeneralSup, LookbackCall, LookbackPut,
                      OneTouchUp, PriceResult, PricingRequest, digital_down, eds_premium, european_call,
                      first_passage_curve, lookback_call, lookback_put, one_touch_up, price,
                      sup_payoff_price)
from .transition import GridConfig, MarginalLaw, half_line_transform, marginal_law
from .wienerhopf import LadderQuery, LadderValue, Side, ladder_ratio, wh_factor, wh_identity_residual
