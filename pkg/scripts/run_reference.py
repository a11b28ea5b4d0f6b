#!/usr/bin/env python3
"""Build and verify the dyadic reference run (N=16, default constants).

Writes a run directory, verifies every recorded inequality, and exports
the per-step certified sup brackets next to the advertised global bound.
"""

import sys
from pathlib import Path

from lacuna.cli import main

OUT = Path(__file__).resolve().parent.parent / "runs" / "reference-d16"

if __name__ == "__main__":
    rc = main(["construct", "--preset", "dyadic", "--N", "16",
               "--out", str(OUT)])
    if rc == 0:
        rc = main(["verify", str(OUT)])
    if rc == 0:
        rc = main(["export", str(OUT), "--bounds",
                   "--out", str(OUT / "bounds.csv")])
    sys.exit(rc)
