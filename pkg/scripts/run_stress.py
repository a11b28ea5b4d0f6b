#!/usr/bin/env python3
"""Build and verify the stress run: small threshold, early exclusions.

The profile (beta=0.5, a_offset=2, a_slope=3) is chosen so the threshold
sets become nonempty within a couple of steps and the exclusion window
opens around n=19, forcing the survivor machinery to do real work.  The
survivor set eventually empties; --tolerate-collapse keeps the partial
run so the collapse diagnostics can be inspected and verified.
"""

import sys
from pathlib import Path

from lacuna.cli import main

OUT = Path(__file__).resolve().parent.parent / "runs" / "stress-g40"

if __name__ == "__main__":
    rc = main(["construct", "--preset", "geometric",
               "--q", "1.3", "--m1", "50", "--N", "40",
               "--beta", "0.5", "--a-offset", "2", "--a-slope", "3",
               "--tolerate-collapse", "--out", str(OUT)])
    if rc == 0:
        rc = main(["verify", str(OUT)])
    sys.exit(rc)
