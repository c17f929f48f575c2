"""Generate the 44 x 44 aggregation algorithm and check it three ways.

The merged algorithm is built twice: once by emitting its rows directly,
once by building the un-merged precursor and merging its diagonal kin
pairs.  Both are checked with the modular trilinear test, and the
algorithm is also run recursively on random matrices over a prime field.
"""

import time

from triagg import gen_new25, gen_pan, verify_random
from triagg.core import find_kin_pairs, merge_kin
from triagg.generator import targeted_pairs
from triagg.verify import verify_multiply

start = time.perf_counter()
alg = gen_new25(44)
print(f"direct construction: {alg} in {time.perf_counter() - start:.1f}s")

pre = gen_pan(44)
pairs = find_kin_pairs(pre)
print(f"precursor {pre}: {len(pairs)} kin pairs, {len(targeted_pairs(pre))} targeted")
merged = merge_kin(pre, targeted_pairs(pre))
print(f"after merging: {merged.t} rows")

for name, a in (("direct", alg), ("merged", merged)):
    start = time.perf_counter()
    ok = verify_random(a, trials=20, seed=1)
    print(f"{name}: 20 modular trials {'pass' if ok else 'FAIL'} ({time.perf_counter() - start:.1f}s)")

ok = verify_multiply(gen_new25(20), samples=1, levels=2, domain="prime")
print(f"400 x 400 product with two levels of the n0=20 algorithm matches: {ok}")
