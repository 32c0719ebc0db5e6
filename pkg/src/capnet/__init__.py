"""Conjugated-capability network toolkit.

Models elementary human capabilities and their conjugations as a directed
acyclic graph, validates conjugations against profile data (Pearson
correlation plus Monte Carlo exact tests), synthesizes minimal
movement-sequence test plans by exact binary set multicover, and performs
fuzzy delta-compensation task allocation.
"""

__version__ = "0.1.0"
