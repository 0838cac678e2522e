"""Optimised dephasing gain versus the detuning of the middle site (three-site chain)."""

import sys

from _common import run

if __name__ == "__main__":
    sys.exit(run("fig2", __doc__, {"--restarts": dict(type=int), "--budget": dict(type=int)}))
