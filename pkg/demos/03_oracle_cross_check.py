# %% [markdown]
# # Cross-checking against exhaustive search
#
# Two independent references: the minimum cut rank over all cuts, and the
# largest independent subset of all source-destination paths. Both are
# exponential, so they only serve small instances.

# %%
import time

from detrelay.network import gen_random
from detrelay.mdfs import unicast_capacity
from detrelay.oracle import (
    OracleSizeError,
    max_independent_paths_bruteforce,
    min_cut_capacity,
    verify_paths_independent,
)

# %%
t0 = time.perf_counter()
agree = brute_checked = 0
N = 1000
for seed in range(N):
    net = gen_random(2 + seed % 4, 3, 3, (0.2, 0.5, 0.8)[seed % 3], seed)
    result = unicast_capacity(net)
    value, cut = min_cut_capacity(net)
    assert verify_paths_independent(net, list(result.paths))
    agree += result.capacity == value
    try:
        brute_checked += max_independent_paths_bruteforce(net) == value
    except OracleSizeError:
        pass
print(f"{agree}/{N} agree with the min cut, {brute_checked} also confirmed by path enumeration, "
      f"{time.perf_counter() - t0:.1f} s")

# %% [markdown]
# The minimising cut for one instance: relays on the source side.

# %%
net = gen_random(5, 3, 2, 0.6, 12)
value, cut = min_cut_capacity(net)
print(value, sorted(cut.omega))
