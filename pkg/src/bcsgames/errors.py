"""Exception types shared across the package.

Guard violations (enumeration caps, dimension caps) get their own classes
so tests can assert that an operation refused rather than silently doing
something expensive or wrong.
"""

from __future__ import annotations


class BcsGamesError(Exception):
    """Base class for everything raised deliberately by this package."""


class ParseError(BcsGamesError):
    """Malformed DIMACS, JSON, or pass-specification input."""


class PassSpecError(ParseError):
    """A transform pass string names an unknown pass or bad parameters."""


class TooLarge(BcsGamesError):
    """An exact enumeration would exceed its configured guard."""


class ScopeTooLarge(TooLarge):
    """A constraint scope is too wide to enumerate or serialize as a table."""


class MissingVariable(BcsGamesError):
    """An assignment does not cover a constraint's scope."""


class MissingConditional(BcsGamesError):
    """A correlation lacks a conditional distribution for a support pair."""


class SpaceMismatch(BcsGamesError):
    """Two distributions were compared over different outcome spaces."""


class AsymmetricGame(BcsGamesError):
    """A symmetry-requiring quantity was asked of an asymmetric game."""


class DimensionMismatch(BcsGamesError):
    """Operator or state dimensions do not line up."""


class NotPerfect(BcsGamesError):
    """A construction requires a value-1 strategy and got something less."""


class UnsupportedGate(BcsGamesError):
    """A circuit node kind the branching-program compiler cannot handle."""


class BadRows(BcsGamesError):
    """Tableau row count below the construction's minimum."""


class UnknownQuestion(BcsGamesError):
    """A simulator was asked about a question outside its game."""


class UnsupportedQuestion(BcsGamesError):
    """A strategy-backed prover lacks a measurement for a question."""


class NotAWitness(BcsGamesError):
    """An assignment offered as a witness does not satisfy the system."""


class VarNotInScope(BcsGamesError):
    """A variable was named that the given constraint does not touch."""


class NotOblivious(BcsGamesError):
    """A uniformity check was pointed at non-copy variables."""


class ParamsTooSmall(BcsGamesError):
    """Transformation parameters below the thresholds a check requires."""
