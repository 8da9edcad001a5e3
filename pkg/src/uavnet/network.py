"""Directed route network, sector partition, route rules and route search."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

SCHEMA_VERSION = 1

# Lengths are compared after rounding so that float summation order cannot
# change which of two geometrically equal routes wins a tie.
_LENGTH_DIGITS = 6


class NetworkError(ValueError):
    """Raised for malformed network documents or unsatisfiable route queries."""


@dataclass(frozen=True)
class Node:
    id: int
    position: tuple[float, float, float]


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    length: float

    @property
    def key(self) -> tuple[int, int]:
        return (self.src, self.dst)

    def __str__(self):
        return f"{{{self.src},{self.dst}}}"


@dataclass(frozen=True)
class Route:
    """An ordered edge path. ``edges`` holds (from, to) pairs."""

    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_nodes(cls, nodes) -> "Route":
        nodes = list(nodes)
        return cls(tuple(zip(nodes[:-1], nodes[1:])))

    @property
    def nodes(self) -> tuple[int, ...]:
        if not self.edges:
            return ()
        return (self.edges[0][0],) + tuple(e[1] for e in self.edges)

    @property
    def start(self) -> int:
        return self.edges[0][0]

    @property
    def end(self) -> int:
        return self.edges[-1][1]

    def __len__(self):
        return len(self.edges)


@dataclass
class RouteNetwork:
    nodes: dict[int, Node]
    edges: dict[tuple[int, int], Edge]
    snets: dict[str, frozenset[tuple[int, int]]]
    terminals: tuple[int, ...]
    _out: dict[int, list[tuple[int, int]]] = field(default_factory=dict, repr=False)
    _in: dict[int, list[tuple[int, int]]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._out = {n: [] for n in self.nodes}
        self._in = {n: [] for n in self.nodes}
        for (a, b) in sorted(self.edges):
            self._out[a].append((a, b))
            self._in[b].append((a, b))

    def out_edges(self, node: int) -> list[tuple[int, int]]:
        return self._out[node]

    def in_edges(self, node: int) -> list[tuple[int, int]]:
        return self._in[node]

    def successors(self, node: int) -> list[int]:
        return [b for _, b in self._out[node]]

    def position(self, node: int):
        return self.nodes[node].position

    def snet_of(self, edge: tuple[int, int]) -> str:
        for name, members in self.snets.items():
            if edge in members:
                return name
        raise KeyError(edge)

    def route_length(self, route: Route) -> float:
        return sum(self.edges[e].length for e in route.edges)

    def terminal_pairs(self) -> list[tuple[int, int]]:
        return [(a, b) for a in self.terminals for b in self.terminals if a != b]


def _distance(p, q) -> float:
    return math.dist(p, q)


def make_network(nodes, edges, terminals=None) -> RouteNetwork:
    """Build and validate a network.

    ``nodes`` is an iterable of ``(id, (x, y, z))`` and ``edges`` an iterable of
    ``(from, to, snet)``. Terminals default to every node.
    """
    node_map: dict[int, Node] = {}
    for nid, pos in nodes:
        nid = int(nid)
        if nid in node_map:
            raise NetworkError(f"duplicate node id {nid}")
        pos = tuple(float(c) for c in pos)
        if len(pos) != 3:
            raise NetworkError(f"node {nid}: position must have 3 coordinates")
        node_map[nid] = Node(nid, pos)
    if not node_map:
        raise NetworkError("network has no nodes")

    seen_pos: dict[tuple[float, float, float], int] = {}
    for node in node_map.values():
        other = seen_pos.setdefault(node.position, node.id)
        if other != node.id:
            raise NetworkError(f"nodes {other} and {node.id} share position {node.position}")

    edge_map: dict[tuple[int, int], Edge] = {}
    members: dict[str, set[tuple[int, int]]] = {}
    for src, dst, snet in edges:
        src, dst = int(src), int(dst)
        if (src, dst) in edge_map:
            raise NetworkError(f"duplicate edge {{{src},{dst}}}")
        for end in (src, dst):
            if end not in node_map:
                raise NetworkError(f"edge {{{src},{dst}}} has dangling endpoint {end}")
        if src == dst:
            raise NetworkError(f"edge {{{src},{dst}}} is a self loop")
        if snet is None or isinstance(snet, (list, tuple)) or str(snet) == "":
            raise NetworkError(f"edge {{{src},{dst}}} must belong to exactly one sNet")
        length = _distance(node_map[src].position, node_map[dst].position)
        edge_map[(src, dst)] = Edge(src, dst, length)
        members.setdefault(str(snet), set()).add((src, dst))

    if terminals is None:
        terminals = sorted(node_map)
    terminals = tuple(int(t) for t in terminals)
    if len(set(terminals)) != len(terminals):
        raise NetworkError("duplicate terminal id")
    for t in terminals:
        if t not in node_map:
            raise NetworkError(f"terminal {t} is not a node")

    net = RouteNetwork(
        nodes=node_map,
        edges=edge_map,
        snets={k: frozenset(v) for k, v in sorted(members.items())},
        terminals=terminals,
    )
    for a in terminals:
        reach = _reachable(net, a)
        for b in terminals:
            if b != a and b not in reach:
                raise NetworkError(f"terminal pair ({a}, {b}) is disconnected")
    return net


def _reachable(net: RouteNetwork, start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        n = stack.pop()
        for m in net.successors(n):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return seen


# -- file format -------------------------------------------------------------

def network_to_dict(net: RouteNetwork) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "nodes": [
            {"id": n.id, "x": n.position[0], "y": n.position[1], "z": n.position[2]}
            for n in sorted(net.nodes.values(), key=lambda n: n.id)
        ],
        "edges": [
            {"from": a, "to": b, "snet": net.snet_of((a, b))}
            for (a, b) in sorted(net.edges)
        ],
        "terminals": list(net.terminals),
    }


def network_from_dict(doc: dict) -> RouteNetwork:
    if not isinstance(doc, dict):
        raise NetworkError("network document must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise NetworkError(f"unsupported schema_version {version!r}")
    for key in ("nodes", "edges", "terminals"):
        if not isinstance(doc.get(key), list):
            raise NetworkError(f"missing or non-list field {key!r}")
    try:
        nodes = [(n["id"], (n["x"], n["y"], n["z"])) for n in doc["nodes"]]
        edges = []
        for e in doc["edges"]:
            snet = e["snet"]
            if not isinstance(snet, (str, int)):
                raise NetworkError(
                    f"edge {{{e['from']},{e['to']}}} must belong to exactly one sNet")
            edges.append((e["from"], e["to"], snet))
    except (KeyError, TypeError) as exc:
        raise NetworkError(f"schema violation: {exc!r}") from exc
    return make_network(nodes, edges, doc["terminals"])


def load_network(source) -> RouteNetwork:
    """Load a network from a path, JSON text or an already parsed dict."""
    if isinstance(source, dict):
        return network_from_dict(source)
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        text = Path(source).read_text()
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"not valid JSON: {exc}") from exc
    return network_from_dict(doc)


def dump_network(net: RouteNetwork) -> str:
    return json.dumps(network_to_dict(net), indent=1) + "\n"


# -- bundled networks ----------------------------------------------------------

GRID = 100.0

# Grid cells (column, row) of the twelve S(1) nodes. Node 4 has five legs,
# node 5 is a cross, node 8 a Y and node 9 a T.
SNET1_CELLS = {
    1: (-1, 0), 2: (1, 1), 3: (0, 1), 4: (0, 0), 5: (1, 0), 6: (2, 0),
    7: (-1, -1), 8: (0, -1), 9: (1, -1), 10: (2, -1), 11: (1, -2), 12: (1, -3),
}

SNET1_EDGES = (
    (1, 4), (2, 5), (3, 4), (4, 1), (4, 3), (4, 5), (4, 7), (4, 8), (5, 2), (5, 4),
    (5, 6), (5, 9), (6, 5), (7, 4), (8, 4), (8, 9), (8, 11), (9, 5), (9, 8), (9, 10),
    (10, 9), (10, 11), (11, 8), (11, 10), (11, 12), (12, 11),
)

UNET_TERMINALS = (1, 2, 3, 7, 13, 14, 17, 20, 23, 24, 28, 33, 34, 37, 40, 42)

# 2x2 tiling: tile offset in grid cells, and which local S(1) nodes coincide
# with nodes of an earlier tile (local id -> (tile, local id)).
_TILES = (
    ((0, 0), {}),
    ((3, 0), {1: (0, 6), 7: (0, 10)}),
    ((0, -4), {2: (0, 12)}),
    ((3, -4), {1: (2, 6), 7: (2, 10), 2: (1, 12)}),
)


def _cell_position(cell, offset=(0, 0)):
    return ((cell[0] + offset[0]) * GRID, (cell[1] + offset[1]) * GRID, 0.0)


def build_snet1() -> RouteNetwork:
    """The twelve-node, 26-edge example sector with every node a terminal."""
    nodes = [(n, _cell_position(c)) for n, c in SNET1_CELLS.items()]
    edges = [(a, b, "S1") for a, b in SNET1_EDGES]
    return make_network(nodes, edges)


def tile_snet1() -> RouteNetwork:
    """Construct the 42-node example uNet by tiling four copies of S(1).

    Node ids are handed out tile by tile in local-id order, skipping nodes that
    are shared with an earlier tile.
    """
    global_ids: list[dict[int, int]] = []
    nodes = []
    next_id = 1
    for t, (offset, shared) in enumerate(_TILES):
        ids = {}
        for local in sorted(SNET1_CELLS):
            if local in shared:
                tile, other = shared[local]
                ids[local] = global_ids[tile][other]
            else:
                ids[local] = next_id
                nodes.append((next_id, _cell_position(SNET1_CELLS[local], offset)))
                next_id += 1
        global_ids.append(ids)
    edges = []
    for t, ids in enumerate(global_ids):
        edges.extend((ids[a], ids[b], f"S{t + 1}") for a, b in SNET1_EDGES)
    return make_network(nodes, edges, UNET_TERMINALS)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("uavnet") / "data" / name))


def build_example_unet() -> RouteNetwork:
    """The bundled 42-node example uNet (four S(1) sectors)."""
    return load_network(bundled_path("unet42.json"))


# -- route rules ---------------------------------------------------------------

def validate_route(net: RouteNetwork, route: Route, start=None, end=None) -> list[str]:
    """Return a list of violated route constraints; empty means valid."""
    problems = []
    edges = list(route.edges)
    if not edges:
        return ["route has no edges"]
    for e in edges:
        if tuple(e) not in net.edges:
            problems.append(f"edge {{{e[0]},{e[1]}}} not in network")
    if len(set(edges)) != len(edges):
        problems.append("route repeats an edge")
    for j in range(len(edges) - 1):
        (a, b), (c, d) = edges[j], edges[j + 1]
        if b != c:
            problems.append(f"disconnected: edge {j} ends at {b}, edge {j + 1} starts at {c}")
        elif a == d:
            problems.append(f"retrace at node {b}: {{{a},{b}}} -> {{{c},{d}}}")
    nodes = [edges[0][0]] + [e[1] for e in edges]
    if len(set(nodes)) != len(nodes):
        problems.append("node sequence repeats a node")
    if start is not None and edges[0][0] != start:
        problems.append(f"route starts at {edges[0][0]}, expected {start}")
    if end is not None and edges[-1][1] != end:
        problems.append(f"route ends at {edges[-1][1]}, expected {end}")
    return problems


def _key(length: float, path) -> tuple:
    return (round(length, _LENGTH_DIGITS), tuple(path))


def _dijkstra(net, source, target, banned_nodes=frozenset(), banned_edges=frozenset()):
    """Lexicographically smallest among minimum-length simple paths, or None."""
    best = {source: _key(0.0, (source,))}
    heap = [(best[source], 0.0)]
    done = set()
    while heap:
        (rlen, path), length = heapq.heappop(heap)
        node = path[-1]
        if node in done:
            continue
        done.add(node)
        if node == target:
            return length, path
        for nxt in net.successors(node):
            if nxt in done or nxt in banned_nodes or (node, nxt) in banned_edges:
                continue
            nlen = length + net.edges[(node, nxt)].length
            cand = _key(nlen, path + (nxt,))
            if nxt not in best or cand < best[nxt]:
                best[nxt] = cand
                heapq.heappush(heap, (cand, nlen))
    return None


def _check_endpoints(net, start, end):
    if start not in net.nodes or end not in net.nodes:
        raise NetworkError(f"unknown node in ({start}, {end})")
    if start == end:
        raise NetworkError("start and end must differ")


def shortest_route(net: RouteNetwork, start: int, end: int) -> Route:
    _check_endpoints(net, start, end)
    found = _dijkstra(net, start, end)
    if found is None:
        raise NetworkError(f"no path from {start} to {end}")
    return Route.from_nodes(found[1])


def k_shortest_routes(net: RouteNetwork, start: int, end: int, k: int) -> list[Route]:
    """Up to ``k`` loop-free routes ordered by (length, node sequence) (Yen)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_endpoints(net, start, end)
    first = _dijkstra(net, start, end)
    if first is None:
        raise NetworkError(f"no path from {start} to {end}")
    accepted = [_key(*first)]
    lengths = {first[1]: first[0]}
    candidates: list = []
    queued = set()
    while len(accepted) < k:
        last = accepted[-1][1]
        for i in range(len(last) - 1):
            spur, root = last[i], last[: i + 1]
            banned_edges = {
                (p[i], p[i + 1]) for _, p in accepted if len(p) > i + 1 and p[: i + 1] == root
            }
            found = _dijkstra(net, spur, end, frozenset(root[:-1]), frozenset(banned_edges))
            if found is None:
                continue
            path = root[:-1] + found[1]
            if path in queued or path in lengths:
                continue
            length = sum(net.edges[e].length for e in zip(path[:-1], path[1:]))
            queued.add(path)
            heapq.heappush(candidates, (_key(length, path), length))
        if not candidates:
            break
        key, length = heapq.heappop(candidates)
        queued.discard(key[1])
        accepted.append(key)
        lengths[key[1]] = length
    return [Route.from_nodes(p) for _, p in accepted]


def all_simple_routes(net: RouteNetwork, start: int, end: int) -> list[tuple[float, Route]]:
    """Exhaustive enumeration of simple paths; for small networks and tests."""
    out = []

    def walk(path, length):
        node = path[-1]
        if node == end:
            out.append((length, Route.from_nodes(path)))
            return
        for nxt in net.successors(node):
            if nxt not in path:
                walk(path + [nxt], length + net.edges[(node, nxt)].length)

    walk([start], 0.0)
    return out
