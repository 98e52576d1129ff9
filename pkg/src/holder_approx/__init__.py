"""Fejer-type integral operators and Holder-norm convergence rates."""
