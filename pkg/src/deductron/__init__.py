"""Deductron: a recurrent network with V-gate memory, trained on the W-language."""

__version__ = "0.1.0"
