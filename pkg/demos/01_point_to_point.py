# %% [markdown]
# # A single noisy link
#
# A link whose SNR leaves only the top few of its signal levels above the
# noise floor carries exactly that many bits per use. Here five levels are
# sent and four get through.

# %%
from detrelay.gf2 import rank
from detrelay.network import adjacency, levels_from_snr, point_to_point, point_to_point_snr, rx, tx
from detrelay.mdfs import unicast_capacity
from detrelay.oracle import min_cut_capacity

net = point_to_point(5, 4)
m = adjacency(net, [tx("S", i) for i in range(5)], [rx("D", i) for i in range(5)])
print(m.to_array())
print("rank", rank(m))

# %% [markdown]
# The search finds one path per surviving level; the cut oracle agrees.

# %%
result = unicast_capacity(net)
print("capacity", result.capacity, "min cut", min_cut_capacity(net)[0])
for p in result.paths:
    print("  ", " -> ".join(f"{e.tx} => {e.rx}" for e in p))

# %% [markdown]
# Level counts from SNR: each factor of four in power buys one more level.

# %%
for snr in (2, 4, 16, 100, 256, 1e4):
    print(f"snr {snr:>8g}: {levels_from_snr(snr)} levels, capacity "
          f"{unicast_capacity(point_to_point_snr(6, snr)).capacity}")
