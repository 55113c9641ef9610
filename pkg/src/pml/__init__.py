"""Computable pieces of product-measure theory on R^N.

Modules: ``measures1d`` (one-dimensional laws), ``kakutani`` (affinities and the
equivalence/orthogonality dichotomy), ``myk`` (the MYK measure on boxes),
``yamasaki`` (plateau product densities), ``equidist`` (equidistributed
sequences) and ``estimator`` (identifying a law from a sample).
"""

__version__ = "0.1.0"
