#!/usr/bin/env python3
"""Fisher-information scan over the phase-squeezed family.

Writes fisher_vs_r.csv, fisher_map.csv (largest r) and darkport.json.
"""

import argparse
import dataclasses
import sys

from sfholo.cli import cmd_fisher
from sfholo.config import RunConfig, ScanConfig


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/fisher")
    ap.add_argument("--alpha", type=float, default=50.0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    cfg = dataclasses.replace(
        RunConfig(),
        alpha=args.alpha,
        scan=ScanConfig(r_values=(0.75, 1.0, 1.25, 1.5)),
        output_dir=args.out,
        threads=args.threads,
    )
    print(f"[fisher] r = {cfg.scan.r_values}")
    cmd_fisher(cfg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
