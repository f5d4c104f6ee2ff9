"""Implicit gradient descent for two-layer physics-informed networks, with diagnostics."""

from .activation import ActivationKind, Jet4, check_lipschitz, eval_jet
from .config import Config, parse_config, serialize_config
from .errors import (ConfigError, InconsistentProblemError, InvalidInputError, NumericalFailure,
                     SamplingError)
from .evaluation import EvalGrid, evaluate_on_grid, relative_l2
from .gram import eigenvalues, gram, gram_deviation, gram_infinity_mc, min_eigenvalue
from .lbfgs import LbfgsOptions, lbfgs_minimize
from .model import Network, apply_operator, forward, init_network
from .optim import DiagnosticsFlags, gd_step, igd_step, train
from .pde import LinearOperator, PdeProblem, SolutionSpec, heat_problem, helmholtz_problem
from .residual import Collocation, jacobian, loss_grad, residuals
from .sampler import make_rng, sample_problem_points

__version__ = "0.1.0"
