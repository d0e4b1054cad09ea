"""Degree-4 interaction graphs: periodic grid, random regular, modular,
and degree-preserving small-world variants.

All constructions are deterministic given their seed and validated at
construction: every agent has exactly four distinct neighbors, no
self-loops, and the adjacency is symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GenerationError

DEGREE = 4


@dataclass(frozen=True)
class Topology:
    """Immutable interaction graph with a fixed per-agent neighbor order.

    ``neighbors`` is an (n_agents, 4) integer array. For grids the
    order is (up, down, left, right) with periodic wraparound; for all
    other kinds neighbors are listed in ascending index order.
    """

    kind: str
    n_agents: int
    neighbors: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        nb = np.ascontiguousarray(self.neighbors, dtype=np.int64)
        if nb.shape != (self.n_agents, DEGREE):
            raise ConfigError(
                f"neighbors has shape {nb.shape}, "
                f"expected ({self.n_agents}, {DEGREE})"
            )
        if nb.min(initial=0) < 0 or nb.max(initial=0) >= self.n_agents:
            raise ConfigError("neighbor index out of range")
        ids = np.arange(self.n_agents)
        if np.any(nb == ids[:, None]):
            raise ConfigError("self-loop in neighbor lists")
        if np.any(np.diff(np.sort(nb, axis=1), axis=1) == 0):
            raise ConfigError("duplicate neighbor in a neighbor list")
        pairs = {(i, j) for i in ids for j in nb[i]}
        if any((j, i) not in pairs for i, j in pairs):
            raise ConfigError("adjacency is not symmetric")
        nb.setflags(write=False)
        object.__setattr__(self, "neighbors", nb)

    def edge_list(self) -> list[tuple[int, int]]:
        """Undirected edges as ascending (i, j) pairs with i < j."""
        edges = set()
        for i in range(self.n_agents):
            for j in self.neighbors[i]:
                edges.add((min(i, int(j)), max(i, int(j))))
        return sorted(edges)


def write_edge_list(topo: Topology, path) -> None:
    """Dump the graph as one "i j" pair per line, ascending order."""
    with open(path, "w", encoding="ascii") as fh:
        for i, j in topo.edge_list():
            fh.write(f"{i} {j}\n")


def _from_edges(kind: str, n: int, edges) -> Topology:
    """Assemble a Topology from an undirected edge set.

    Non-grid constructions all use ascending neighbor order.
    """
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    nb = np.full((n, DEGREE), -1, dtype=np.int64)
    for i, lst in enumerate(adj):
        if len(lst) != DEGREE:
            raise GenerationError(
                f"node {i} has degree {len(lst)}, expected {DEGREE}"
            )
        nb[i] = sorted(lst)
    return Topology(kind=kind, n_agents=n, neighbors=nb)


def make_grid(L: int) -> Topology:
    """L x L periodic square lattice; neighbors ordered up, down, left, right."""
    if L < 3:
        raise ConfigError(f"grid side must be >= 3, got {L}")
    n = L * L
    idx = np.arange(n)
    r, c = idx // L, idx % L
    nb = np.stack(
        [
            ((r - 1) % L) * L + c,
            ((r + 1) % L) * L + c,
            r * L + (c - 1) % L,
            r * L + (c + 1) % L,
        ],
        axis=1,
    )
    return Topology(kind="grid", n_agents=n, neighbors=nb)


def _pairing_attempt(n: int, rng: np.random.Generator):
    """One configuration-model pairing; None if it is not simple."""
    stubs = np.repeat(np.arange(n), DEGREE)
    rng.shuffle(stubs)
    a = np.minimum(stubs[0::2], stubs[1::2])
    b = np.maximum(stubs[0::2], stubs[1::2])
    if np.any(a == b):
        return None
    edges = set(zip(a.tolist(), b.tolist()))
    if len(edges) != a.size:
        return None
    return edges


def make_random_regular(n: int, seed: int, max_tries: int = 10_000) -> Topology:
    """Uniform-style random 4-regular simple graph (rejection sampling)."""
    if n < 5:
        raise ConfigError(f"random regular graph needs n >= 5, got {n}")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        edges = _pairing_attempt(n, rng)
        if edges is not None:
            return _from_edges("random_regular", n, edges)
    raise GenerationError(
        f"no simple 4-regular pairing found in {max_tries} attempts"
    )


def _ring_edges(n: int) -> list[tuple[int, int]]:
    """Ring lattice linking each node to its two nearest on each side."""
    edges = set()
    for i in range(n):
        for d in (1, 2):
            j = (i + d) % n
            edges.add((min(i, j), max(i, j)))
    return sorted(edges)


def make_small_world(n: int, p_rewire: float, seed: int) -> Topology:
    """Ring lattice with probability-p degree-preserving edge swaps.

    Each ring edge is, with probability ``p_rewire``, swapped with a
    uniformly chosen other edge ((a,b),(c,d) -> (a,d),(c,b) or
    (a,c),(b,d)), which introduces shortcuts while keeping the graph
    exactly 4-regular. Swaps that would create self-loops or duplicate
    edges are skipped.
    """
    if n < 5:
        raise ConfigError(f"small-world graph needs n >= 5, got {n}")
    if not 0.0 <= p_rewire <= 1.0:
        raise ConfigError(f"p_rewire must be in [0, 1], got {p_rewire}")
    rng = np.random.default_rng(seed)
    edges = _ring_edges(n)
    edge_set = set(edges)
    for pos in range(len(edges)):
        if rng.random() >= p_rewire:
            continue
        other = int(rng.integers(len(edges)))
        if other == pos:
            continue
        a, b = edges[pos]
        c, d = edges[other]
        if len({a, b, c, d}) < 4:
            continue
        if rng.random() < 0.5:
            e1, e2 = (a, d), (c, b)
        else:
            e1, e2 = (a, c), (b, d)
        e1 = (min(e1), max(e1))
        e2 = (min(e2), max(e2))
        if e1 == e2 or e1 in edge_set or e2 in edge_set:
            continue
        edge_set.discard(edges[pos])
        edge_set.discard(edges[other])
        edge_set.add(e1)
        edge_set.add(e2)
        edges[pos] = e1
        edges[other] = e2
    return _from_edges("small_world", n, edge_set)


def make_modular(
    n: int, n_modules: int, n_cross: int, seed: int, max_tries: int = 10_000
) -> Topology:
    """Independent random 4-regular modules joined by degree-preserving swaps.

    Each of ``n_cross`` swaps removes one intra-module edge from each of
    two distinct modules and reconnects the endpoints across modules,
    creating two cross-module edges per swap.
    """
    if n_modules < 1:
        raise ConfigError(f"n_modules must be >= 1, got {n_modules}")
    if n % n_modules != 0:
        raise ConfigError(f"{n} agents not divisible into {n_modules} modules")
    size = n // n_modules
    if size < 5:
        raise ConfigError(f"module size {size} too small for a 4-regular block")
    if n_cross < 0:
        raise ConfigError(f"n_cross must be >= 0, got {n_cross}")
    if n_cross > 0 and n_modules < 2:
        raise ConfigError("cross-module swaps need at least 2 modules")
    rng = np.random.default_rng(seed)

    intra: list[list[tuple[int, int]]] = []
    edge_set: set[tuple[int, int]] = set()
    for m in range(n_modules):
        offset = m * size
        block = None
        for _ in range(max_tries):
            block = _pairing_attempt(size, rng)
            if block is not None:
                break
        if block is None:
            raise GenerationError(f"module {m}: no simple 4-regular pairing")
        shifted = sorted((i + offset, j + offset) for i, j in block)
        intra.append(shifted)
        edge_set.update(shifted)

    for _ in range(n_cross):
        for attempt in range(200):
            ma, mb = rng.choice(n_modules, size=2, replace=False)
            ea = intra[ma][int(rng.integers(len(intra[ma])))]
            eb = intra[mb][int(rng.integers(len(intra[mb])))]
            a, b = ea
            c, d = eb
            e1 = (min(a, c), max(a, c))
            e2 = (min(b, d), max(b, d))
            if e1 in edge_set or e2 in edge_set:
                continue
            edge_set.discard(ea)
            edge_set.discard(eb)
            edge_set.add(e1)
            edge_set.add(e2)
            intra[ma].remove(ea)
            intra[mb].remove(eb)
            break
        else:
            raise GenerationError("could not place a cross-module swap")

    return _from_edges("modular", n, edge_set)
