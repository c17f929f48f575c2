"""Ranks and exponents of the one- and two-level aggregation families.

Prints a table over the usual base sizes, the best base size of each
family and the leading coefficient of the decomposed algorithm at a few
sizes.
"""

from triagg.analysis import format_table, leading_coefficient, optimal_base, rank_table
from triagg.generator import gen_new25_decomposed

rows = rank_table()
print(format_table([{k: r[k] for k in ("n0", "t_pan", "t_new", "omega_pan", "omega_new", "omega_new25b")} for r in rows]))
print()
for family in ("new25", "new25b"):
    n0, w = optimal_base(family)
    print(f"best base for {family}: {n0} (exponent {w})")
print()
for n0 in (20, 44):
    c = leading_coefficient(gen_new25_decomposed(n0))
    print(f"n0={n0}: leading coefficient {c} = {float(c):.6f}")
