"""Representation-number moments, Selberg sieve bounds, and asymptotic checks."""

from .arith import (CapacityError, Factorization, PrimeTable, factor,
                    prime_table)
from .repfun import RepFamily

__all__ = [
    "CapacityError",
    "Factorization",
    "PrimeTable",
    "RepFamily",
    "factor",
    "prime_table",
]

__version__ = "0.1.0"
