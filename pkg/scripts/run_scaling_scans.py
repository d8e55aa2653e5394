#!/usr/bin/env python3
"""Run the squeezing-magnitude and wavelength visibility scans.

Writes visibility_vs_r.csv / visibility_vs_lambda.csv plus fit.json into
<out>/squeeze and <out>/wavelength.
"""

import argparse
import dataclasses
import sys

from sfholo.cli import cmd_visibility_scan, cmd_wavelength_scan
from sfholo.config import RunConfig, ScanConfig


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/scaling")
    ap.add_argument("--alpha", type=float, default=50.0)
    ap.add_argument("--alpha-wavelength", type=float, default=80.0,
                    help="reference displacement for the wavelength scan")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    base = dataclasses.replace(RunConfig(), threads=args.threads)
    squeeze = dataclasses.replace(base, alpha=args.alpha, output_dir=f"{args.out}/squeeze")
    print(f"[squeeze scan] r = {squeeze.scan.r_values}")
    cmd_visibility_scan(squeeze)

    wavelength = dataclasses.replace(
        base,
        alpha=args.alpha_wavelength,
        r=1.0,
        scan=ScanConfig(),
        output_dir=f"{args.out}/wavelength",
    )
    print(f"[wavelength scan] lambda = {wavelength.scan.wavelengths_um} um")
    cmd_wavelength_scan(wavelength)
    return 0


if __name__ == "__main__":
    sys.exit(main())
