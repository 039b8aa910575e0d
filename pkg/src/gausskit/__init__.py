"""Rank, focal and cylinder/cone analysis for parametrized submanifolds."""

__version__ = "0.1.0"

from .classify import Classification, RunConfig, classify
from .corpus import (brute_force_gauss_rank, build_default_corpus,
                     load_corpus, make_duality_pairs, verify_corpus,
                     write_corpus)
from .errors import GaussKitError
from .ruled import RuledSpec, parse_spec_obj

__all__ = [
    "__version__",
    "Classification",
    "RunConfig",
    "classify",
    "brute_force_gauss_rank",
    "build_default_corpus",
    "load_corpus",
    "make_duality_pairs",
    "verify_corpus",
    "write_corpus",
    "GaussKitError",
    "RuledSpec",
    "parse_spec_obj",
]
