#!/usr/bin/env python3
"""Build and verify shrinking-width runs for several decay exponents.

For each exponent the block widths shrink relative to their base
frequencies, which is what drives the logarithmic term in the global
bound.  Each run gets its own directory and verification report.
"""

import sys
from pathlib import Path

from lacuna.cli import main

RUNS = Path(__file__).resolve().parent.parent / "runs"

if __name__ == "__main__":
    for eps in ("0", "0.5", "0.75"):
        out = RUNS / f"widths-e{eps.replace('.', '_')}"
        rc = main(["construct", "--preset", "corollary", "--N", "14",
                   "--eps", eps, "--out", str(out)])
        if rc == 0:
            rc = main(["verify", str(out)])
        if rc != 0:
            sys.exit(rc)
    sys.exit(0)
