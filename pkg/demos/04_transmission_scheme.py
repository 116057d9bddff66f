# %% [markdown]
# # One-bit relay scheme
#
# Each relay forwards the bit on a path's receiving level out of that path's
# transmitting level. Transmitted bits still reach every receiving level they
# are wired to and XOR there. Independence of the paths makes the end-to-end
# map invertible, so the destination can undo the mixing.

# %%
from detrelay.gf2 import rank
from detrelay.network import chain
from detrelay.mdfs import unicast_capacity
from detrelay.scheme import all_messages, decode, extract_scheme, serialize_scheme, simulate, transfer_matrix

net = chain([[[1, 0], [1, 1]], [[1, 1], [0, 1]]])
s = extract_scheme(net, unicast_capacity(net).paths)
print("rate", s.k, "relay maps", s.relay_maps)

# %%
tm = transfer_matrix(net, s)
print(tm.to_array(), "rank", rank(tm))

# %% [markdown]
# Received words differ from the messages because of interference; decoding
# inverts the transfer matrix.

# %%
for m in all_messages(s.k).tolist():
    r = simulate(net, s, m)
    print(m, "->", r, "->", decode(s, r, tm))

# %%
print(serialize_scheme(net, s))
