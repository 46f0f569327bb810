"""Numerical evaluation of a singular half-space Stokes boundary-layer flow.

Modules
-------
kernels        closed-form heat / Newtonian kernels and derivatives
quadrature     adaptive 1-d and tensorized n-d integration
boundary_data  singular temporal profiles and the spatial bump
potentials     layer-potential tensors L, B, A and radial reductions
fields         velocity, normal derivative, pressure, PDE residuals
asymptotics    model time integrals Psi, region classifier, rate oracle
verify         rate fitting, bracket checks, L^p integrability scans
cli            batch front-end emitting deterministic CSV reports
"""

__version__ = "0.1.0"
