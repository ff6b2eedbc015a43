"""Expected closed-loop performance chain with a wider parameter spread."""

from _common import run

if __name__ == "__main__":
    run("experiment-2", __doc__)
