"""Transducers compiled to Church-encoded λ-terms, with differential checking."""

__version__ = "0.1.0"
