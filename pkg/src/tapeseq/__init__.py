"""Sequencing read requests on a linear tape to minimize total response time."""

from .exact import DPSolution, solve_exact
from .instances import Instance, InstanceSpec, generate, parse_instance, format_instance
from .online import OnlineInstance, OnlineRequest, simulate_ari, simulate_online_fifo
from .oracles import oracle_best_sequence, oracle_weighted_best
from .policies import fifo, fifila, fiff, lfl, ssf
from .stochastic import StochasticProfile, expected_objective, fptas_solve, solve_weighted
from .tape import RequestSet, Tape, build_tape, evaluate_sequence

__version__ = "0.1.0"
