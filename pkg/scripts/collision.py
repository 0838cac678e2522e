"""Collision-model dephasing on the FMO complex at four noise strengths."""

import sys

from _common import run

if __name__ == "__main__":
    sys.exit(run("fig6", __doc__, {"--dt": dict(type=float), "--memory": dict(type=int)}))
