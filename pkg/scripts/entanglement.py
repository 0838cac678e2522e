"""Ancilla-site concurrence along the four-site chain, zero versus transfer-optimal dephasing."""

import sys

from _common import run

if __name__ == "__main__":
    sys.exit(run("fig4", __doc__, {"--T": dict(type=float)}))
