"""Variational Quantum Harmonizer: QUBO optimization runs rendered as sound.

The pipeline: a QUBO cost function compiles to a spin observable, a simulated
variational eigensolver minimizes it while sampling every evaluation, and the
resulting marginal-distribution streams drive audio renderers, OSC emission,
and an HTTP dataset feed.
"""

__version__ = "0.1.0"
