"""Eisenstein series, Halphen flows, the Chazy Frobenius manifold and genus-one connections."""

__version__ = "0.1.0"
