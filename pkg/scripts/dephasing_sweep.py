"""Transfer versus dephasing on the detuned middle site: rises, peaks, then drops."""

import sys

from _common import run

if __name__ == "__main__":
    sys.exit(run("fig3", __doc__))
