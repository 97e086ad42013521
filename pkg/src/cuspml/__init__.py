"""Semiclassical analysis on hyperbolic cusps at desk scale: symbols, quantization, Egorov, Eisenstein."""
__version__ = "0.1.0"
