"""Shared argument handling for the experiment scripts."""

import argparse
import json
import sys

from dephasing_transport.scenarios import run_scenario


def run(name: str, description: str, extra=None) -> int:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--out-dir", default=f"results/{name}")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    for flag, kwargs in (extra or {}).items():
        parser.add_argument(flag, **kwargs)
    args = parser.parse_args()
    overrides = {k: v for k, v in vars(args).items()
                 if k not in {"out_dir", "seed", "threads"} and v is not None}
    code, manifest = run_scenario(name, args.out_dir, args.seed, args.threads, overrides)
    if code:
        print(manifest["error"], file=sys.stderr)
        return code
    print(json.dumps(manifest["results"], indent=2))
    print(f"wrote {', '.join(manifest['outputs'])} to {args.out_dir} "
          f"in {manifest['wall_time_s']:.1f} s", file=sys.stderr)
    return 0
