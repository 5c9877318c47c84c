"""Convertibility of quantum states in affine resource theories."""

__version__ = "0.1.0"
