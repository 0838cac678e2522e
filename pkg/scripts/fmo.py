"""FMO complex: transfer at T = 5 and T = inf, with and without dephasing.

    python scripts/fmo.py                 # T = 5, reported rates only
    python scripts/fmo.py --horizon inf   # also runs the 16-restart optimiser
"""

import sys

from _common import run

if __name__ == "__main__":
    horizon = "inf" if "inf" in sys.argv else "5"
    name = "fmo-inf" if horizon == "inf" else "fmo-t5"
    sys.argv = [a for a in sys.argv if a not in {"--horizon", "inf", "5"}]
    sys.exit(run(name, __doc__, {"--restarts": dict(type=int), "--budget": dict(type=int)}))
