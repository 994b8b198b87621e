"""Typed lambda terms over continuous functionals, their lowering to type 2, and the games and tagged trees used to study them."""

__version__ = "0.1.0"
