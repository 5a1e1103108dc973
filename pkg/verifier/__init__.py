"""
Numerical verification of mean-value identities for the ultra-hyperbolic
equation over conjugate conics in R^{2,2}
"""
__version__ = "1.0.0"
