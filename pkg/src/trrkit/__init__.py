"""Exact computation in the strata algebra of moduli of stable curves.

Subpackages cover: exact rational/polynomial arithmetic (numerics), stable
graph combinatorics (stablegraphs), the strata algebra with its excess
intersection product (strata), Pixton's double ramification class machinery
(pixton), and the construction and scanning of topological recursion
relations (trr).
"""

__version__ = "0.1.0"
