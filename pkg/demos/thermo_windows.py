"""Per-scale temperature windows and their overlaps.

Counting bounds on hot-region configurations give, for every scale k, an
inverse-temperature window inside which the scale's structure dominates.
From k = 1 on, each window's top lies above the next window's bottom, so the
windows chain into an unbroken cooling path; the log-ratio column shows the
overlap margin growing geometrically.  All columns are rigorous interval
midpoints, never floating-point accumulations.
"""

from groundlab.thermo import thermo_csv, thermo_table

rows = thermo_table(0, 8)
print(thermo_csv(rows))
print("entropy criterion:",
      "all pass" if all(r["entropy_pass"] == "pass" for r in rows)
      else "FAILURES")
