"""Two composed levels with 4x4 sub-blocks replaced by a 48-product scheme.

Every pair of off-diagonal trace cells of the composed algorithm forms a
<4,4,4;49> block.  Replacing each one with the bundled <4,4,4;48> saves one
multiplication per block.  The composite is kept implicit, so the n0=44
bookkeeping is instant; the small n0=4 case is also materialized and both
forms are checked.
"""

from triagg import gen_new25b, load_bundled_replacement, verify_random
from triagg.analysis import exponent

rep = load_bundled_replacement()
for m0 in (20, 44):
    plain, sub = gen_new25b(m0), gen_new25b(m0, rep)
    n = m0 * m0
    print(f"m0={m0}: {plain.blocks} blocks, rank {plain.t} -> {sub.t}, exponent {exponent(n, sub.t):.6f}")

small = gen_new25b(4, rep)
full = small.materialize()
print(f"m0=4: implicit rank {small.t}, materialized rows {full.t}")
print("implicit passes:", verify_random(small, trials=5))
print("materialized passes:", verify_random(full, trials=5))
