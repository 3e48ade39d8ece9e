"""
ShadowLab
Numerical laboratory for shadowing of linear fractional composition operators
on the Hardy space: symbol classification, pseudo-orbits, divergence
certificates and the half-plane L2 model.
"""

__version__ = "1.0.0"
