"""Numerical toolkit for clusters of boundary bubbles of the Yamabe problem with
negative scalar curvature and positive boundary mean curvature."""

from .core import PreconditionError, ProblemParams, SecondFundamentalForm, make_params, params_from_D

__all__ = ["PreconditionError", "ProblemParams", "SecondFundamentalForm", "make_params", "params_from_D"]
__version__ = "0.1.0"
