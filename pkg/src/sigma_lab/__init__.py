"""Exact laboratory for convergence of sigma-fields on finite probability spaces."""

from .errors import (BudgetExceeded, DocumentError, HypothesisViolation, InvalidSpaceError,
                     RadicandMismatch, SigmaLabError, SpaceMismatchError)
from .scalar import CReal, Quad, as_scalar, decimal_str, quad
from .space import Event, FiniteSpace, make_space, reweight
from .lattice import Partition, generate, is_subfield, join, meet
from .conditioning import RandomVariable, bayes_cond_exp, cond_exp, cond_prob

__version__ = "0.1.0"
