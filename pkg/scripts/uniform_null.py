"""Random uniform chains (N = 2..6): the optimiser should find no dephasing gain."""

import sys

from _common import run

if __name__ == "__main__":
    sys.exit(run("uniform-chain-null", __doc__,
                 {"--restarts": dict(type=int), "--budget": dict(type=int)}))
