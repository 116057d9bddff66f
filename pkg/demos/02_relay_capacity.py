# %% [markdown]
# # Capacity of a relay network
#
# Random layered networks with a few relays per layer. Cut value is the
# GF(2) rank of the crossing links, not their count, so two links landing on
# the same receiving levels can be worth a single bit.

# %%
import numpy as np

from detrelay.network import chain, gen_random, serialize
from detrelay.mdfs import unicast_capacity
from detrelay.oracle import cut_rank, Cut

# %%
crowded = chain([[[1, 1], [1, 1]]])
print("4 links, capacity", unicast_capacity(crowded).capacity, "cut rank", cut_rank(crowded, Cut({"S"})))

# %% [markdown]
# A four-layer instance and its per-iteration instrumentation. Each
# iteration tries to add one more independent path; the last one fails.

# %%
net = gen_random(4, 3, 3, 0.5, seed=7)
print(serialize(net))
result = unicast_capacity(net)
print("capacity", result.capacity)
for c in result.counters:
    print(c.as_dict())

# %% [markdown]
# Capacity across edge densities. Sparse networks are limited by missing
# links, dense ones by interference.

# %%
for density in (0.1, 0.3, 0.5, 0.7, 0.9, 1.0):
    caps = [unicast_capacity(gen_random(4, 3, 3, density, s)).capacity for s in range(200)]
    print(f"density {density:.1f}: mean capacity {np.mean(caps):.2f}, max {max(caps)}")
