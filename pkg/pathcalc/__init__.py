"""pathcalc - pathwise quadratic-variation calculus along nested partition sequences."""

__version__ = "1.0.0"
