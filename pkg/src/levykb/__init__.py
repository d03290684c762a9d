"""Small-time transition density machinery for one-dimensional Lévy
processes: characteristic exponents and their two-sided proxies, intrinsic
quasi-inverse scales, Fourier-inverted densities with certified truncation,
compound kernel and bell-type bound certificates, and a sampling oracle."""

__version__ = "0.1.0"

from . import measures, exponents, scales, decomposition, density, bounds, mc

__all__ = [
    "measures", "exponents", "scales", "decomposition", "density",
    "bounds", "mc", "__version__",
]
