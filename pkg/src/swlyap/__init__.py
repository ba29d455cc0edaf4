"""Common Lyapunov functions for linear switched systems.

Construction of the canonical sup-norm Lyapunov function, polyhedral and
even-power-sum approximation, nonsmooth verification, the marginal planar
benchmark family, and LP-based certificate-complexity scans.
"""

__version__ = "0.1.0"
