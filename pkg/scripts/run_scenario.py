"""Scenario certificate for 1/(s + 1 + theta), at sigma 0.25 and then 0.5.

The wider spread samples unstable plants, whose gap is saturated to 1, so the
certificate is withheld.
"""

import sys

from _common import run

if __name__ == "__main__":
    wide = "--wide" in sys.argv
    if wide:
        sys.argv.remove("--wide")
    run("scenario-wide" if wide else "scenario", __doc__)
