"""Watch the frozen fraction climb toward 1 under the default schedule.

At blockable scale j a fraction 1/(4 t_j) of the remaining material freezes;
the demo prints exact checkpoints, the 0.99 crossing scale, and a rigorous
interval enclosure at k = 10^6 computed without any floating point.
"""

import time
from fractions import Fraction

from groundlab.layers import (default_schedule, freq_bounds_scan,
                              freq_crossing, freq_frozen)

sched = default_schedule()
for k in (1, 10, 50, 95, 200):
    f = freq_frozen(k, sched)
    print(f"k={k:6d}  frozen={float(f):.6f}  (exactly {f.numerator} / "
          f"{f.denominator if f.denominator < 10**6 else '...'})"
          if f.denominator < 10 ** 6 else
          f"k={k:6d}  frozen={float(f):.6f}")

k99 = freq_crossing(Fraction(99, 100), sched)
print(f"\nfirst scale with frozen fraction >= 0.99: k = {k99}")

t0 = time.monotonic()
scan = freq_bounds_scan(10 ** 6)
print(f"\ninterval scan to k=10^6 in {time.monotonic() - t0:.2f}s: "
      f"monotone={scan.monotone}, bounded={scan.bounded}")
print(f"final enclosure width < 2^-64: "
      f"{scan.final_hi - scan.final_lo < Fraction(1, 2**64)}")
