"""Structured language modeling toolkit.

Trains and evaluates a joint word / POS-tag / binary-parse language model
next to a deleted-interpolation trigram baseline, and rescores speech
recognition word lattices with a best-first stack search driven by an
n-gram lookahead bound.
"""

__version__ = "0.1.0"

from slmtk.corpus import Vocabulary, Sentence, build_vocabulary, read_treebank
from slmtk.ngram import DIModel, HeldOutSplit, estimate_weights
from slmtk.lattice import Lattice, parse_lattice
from slmtk.astar import RescoreParams, astar_search, compute_suffix_bounds

__all__ = [
    "Vocabulary",
    "Sentence",
    "build_vocabulary",
    "read_treebank",
    "DIModel",
    "HeldOutSplit",
    "estimate_weights",
    "Lattice",
    "parse_lattice",
    "RescoreParams",
    "astar_search",
    "compute_suffix_bounds",
    "__version__",
]
