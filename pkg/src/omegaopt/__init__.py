"""Sharpe ratio and Omega measure portfolio tools.

Closed-form and active-set Sharpe maximization, an independent QP route,
Omega evaluation by quadrature, partial moments and Monte Carlo, and the
skew-normal machinery used to show where the two measures disagree.
"""

__version__ = "0.1.0"
