"""Probabilistic robust stability on the two-parameter first-order family."""

from _common import run

if __name__ == "__main__":
    run("experiment-1", __doc__)
