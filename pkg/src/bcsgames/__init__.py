"""Binary constraint system games and zero-knowledge-flavoured transforms."""

from .bcs import Bcs, Constraint, Relation, bcs_from_cnf, magic_square, parse_dimacs
from .errors import BcsGamesError
from .games import Game, cc_game, classical_value, cv_game
from .harness import dishonest_probe, run_protocol
from .quantum import Strategy, cv_strategy_from_cc, magic_square_strategy, strategy_value
from .samplers import (
    HonestCcSampler,
    HonestObliviousSampler,
    HonestTableauSampler,
    TableauSimulator,
    statistical_distance,
    uniformity_test,
)
from .tableau import TableauBcs, obliviate, pzk_transform

__version__ = "0.1.0"

__all__ = [
    "Bcs",
    "BcsGamesError",
    "Constraint",
    "Game",
    "HonestCcSampler",
    "HonestObliviousSampler",
    "HonestTableauSampler",
    "Relation",
    "Strategy",
    "TableauBcs",
    "TableauSimulator",
    "bcs_from_cnf",
    "cc_game",
    "classical_value",
    "cv_game",
    "cv_strategy_from_cc",
    "dishonest_probe",
    "magic_square",
    "magic_square_strategy",
    "obliviate",
    "parse_dimacs",
    "pzk_transform",
    "run_protocol",
    "statistical_distance",
    "strategy_value",
    "uniformity_test",
]
