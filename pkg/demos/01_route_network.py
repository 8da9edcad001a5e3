# %% [markdown]
# # Route networks
#
# A route network is a directed graph of intersections and streets. Every
# street belongs to exactly one sub-network (sNet), the unit an operator owns.
# Two networks ship with the package: the 12-node sNet S(1) and a 42-node
# union of four S(1) tiles.

# %%
from uavnet.network import (build_example_unet, build_snet1, k_shortest_routes,
                            shortest_route, validate_route)

snet = build_snet1()
print(len(snet.nodes), "nodes,", len(snet.edges), "directed edges")
print("out of node 4:", snet.out_edges(4))

# %% [markdown]
# Shortest routes break length ties by the node sequence, so repeated calls
# always give the same answer.

# %%
r = shortest_route(snet, 1, 9)
print(r.nodes, snet.route_length(r), "m")
for alt in k_shortest_routes(snet, 1, 9, 4):
    print(f"  {alt.nodes}  {snet.route_length(alt):.1f} m")

# %% [markdown]
# `validate_route` lists every rule a route breaks; an empty list means valid.

# %%
from uavnet.network import Route

print(validate_route(snet, r, 1, 9))
print(validate_route(snet, Route(((8, 9), (9, 8))), 8, 8))

# %%
unet = build_example_unet()
print(len(unet.nodes), "nodes,", len(unet.edges), "edges, sNets:", sorted(unet.snets))
print("terminals:", unet.terminals)
