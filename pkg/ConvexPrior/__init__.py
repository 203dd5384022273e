"""
Convex shape priors through quasi-concavity of a continuous mask field.
"""

__version__ = '0.1.0'
