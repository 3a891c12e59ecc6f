"""fpinv - fixed points of q-biased pattern-avoiding involutions"""

__version__ = "0.1.0"
