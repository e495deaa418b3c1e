"""Finite-difference solver for the boundary value problem on built-in 2D domains."""
