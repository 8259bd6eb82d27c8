"""Stable graphs: the combinatorial skeletons of nodal curves.

A stable graph of type (g, n) consists of vertices carrying genera, n
labelled legs (markings), and edges (possibly parallel, possibly loops).
The total genus is the sum of the vertex genera plus the first Betti
number of the graph, and every vertex must satisfy the stability
inequality 2*genus(v) - 2 + valence(v) > 0, where valence counts leg and
edge incidences (a loop counts twice).

Representation
--------------
``StableGraph`` stores three tuples:

* ``genera``   -- ``genera[v]`` is the genus of vertex ``v``;
* ``legs``     -- ``legs[i]`` is the vertex carrying marking ``i + 1``
  (markings are 1-based and never permuted by graph isomorphisms);
* ``edges``    -- a sorted tuple of pairs ``(u, v)`` with ``u <= v``;
  a loop is ``(v, v)``; parallel edges appear with multiplicity.

Half-edge ids (used by the JSON form and by weightings) are assigned
deterministically: marking ``i`` has id ``i``; edge ``k`` (0-based) has
ids ``n + 2k + 1`` (side of the first-listed endpoint) and ``n + 2k + 2``.

Canonical form
--------------
Two graphs are isomorphic iff their canonical forms are equal.  The
canonical form is the lexicographically smallest encoding over all vertex
relabellings compatible with a cheap isomorphism invariant; because the
invariant is preserved by every isomorphism, the representative does not
depend on the input labelling.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterator, Sequence

__all__ = [
    "StableGraph",
    "ComplexityBoundError",
    "trivial_graph",
    "enumerate_stable_graphs",
    "automorphism_count",
    "vertex_symmetries",
    "enumerate_weightings",
    "edge_weight_forms",
]


class ComplexityBoundError(ValueError):
    """Raised when an enumeration would exceed the configured size bound."""


@dataclass(frozen=True)
class StableGraph:
    genera: tuple[int, ...]
    legs: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    # -- construction and validation -----------------------------------

    def __post_init__(self) -> None:
        genera = tuple(int(x) for x in self.genera)
        legs = tuple(int(x) for x in self.legs)
        edges = tuple(
            (min(int(u), int(v)), max(int(u), int(v))) for u, v in self.edges
        )
        object.__setattr__(self, "genera", genera)
        object.__setattr__(self, "legs", legs)
        object.__setattr__(self, "edges", tuple(sorted(edges)))
        self._validate()

    def _validate(self) -> None:
        k = len(self.genera)
        if k == 0:
            raise ValueError("a stable graph needs at least one vertex")
        if any(g < 0 for g in self.genera):
            raise ValueError("vertex genera must be nonnegative")
        if any(not (0 <= v < k) for v in self.legs):
            raise ValueError("leg attached to a nonexistent vertex")
        if any(not (0 <= u < k and 0 <= v < k) for u, v in self.edges):
            raise ValueError("edge attached to a nonexistent vertex")
        if not self._is_connected():
            raise ValueError("stable graphs must be connected")
        for v in range(k):
            if 2 * self.genera[v] - 2 + self.valence(v) <= 0:
                raise ValueError(f"vertex {v} violates stability")

    def _is_connected(self) -> bool:
        k = len(self.genera)
        seen = {0}
        frontier = [0]
        adj: dict[int, set[int]] = {v: set() for v in range(k)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        while frontier:
            u = frontier.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return len(seen) == k

    # -- basic data -----------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.genera)

    @property
    def n_markings(self) -> int:
        return len(self.legs)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def h1(self) -> int:
        """First Betti number of the underlying graph."""
        return len(self.edges) - len(self.genera) + 1

    @property
    def genus(self) -> int:
        """Total (arithmetic) genus: vertex genera plus loops in the graph."""
        return sum(self.genera) + self.h1

    def valence(self, v: int) -> int:
        """Number of half-edge incidences at v (legs + edge ends; loops twice)."""
        count = sum(1 for x in self.legs if x == v)
        for u, w in self.edges:
            count += (u == v) + (w == v)
        return count

    def loops_at(self, v: int) -> int:
        return sum(1 for u, w in self.edges if u == v and w == v)

    def markings_at(self, v: int) -> tuple[int, ...]:
        return tuple(i + 1 for i, x in enumerate(self.legs) if x == v)

    def is_trivial(self) -> bool:
        return self.n_vertices == 1 and not self.edges

    # -- half-edge ids ----------------------------------------------------

    def half_edge_ids(self) -> list[int]:
        n = self.n_markings
        return list(range(1, n + 1)) + [
            n + 2 * k + j for k in range(self.n_edges) for j in (1, 2)
        ]

    def edge_half_ids(self, k: int) -> tuple[int, int]:
        """Half-edge ids of edge k: (first endpoint side, second endpoint side)."""
        n = self.n_markings
        return (n + 2 * k + 1, n + 2 * k + 2)

    def vertex_of_half_edge(self, h: int) -> int:
        n = self.n_markings
        if 1 <= h <= n:
            return self.legs[h - 1]
        k, side = divmod(h - n - 1, 2)
        return self.edges[k][side]

    # -- canonical form ----------------------------------------------------

    def _vertex_invariants(self) -> list[tuple]:
        base = []
        for v in range(self.n_vertices):
            deg = self.valence(v)
            base.append((self.genera[v], self.markings_at(v), deg, self.loops_at(v)))
        refined = []
        for v in range(self.n_vertices):
            neigh = []
            for u, w in self.edges:
                if u == v and w != v:
                    neigh.append(base[w])
                elif w == v and u != v:
                    neigh.append(base[u])
            refined.append((base[v], tuple(sorted(neigh))))
        return refined

    def _relabelling_candidates(self) -> Iterator[tuple[int, ...]]:
        """Yield vertex relabellings sigma (old index -> new index).

        Vertices are grouped by an isomorphism invariant; groups are laid out
        in sorted invariant order and all permutations within each group are
        tried.  Every isomorphism between two graphs respects the invariant,
        so taking the minimum encoding over this candidate set yields a true
        canonical form.
        """
        inv = self._vertex_invariants()
        groups: dict[tuple, list[int]] = {}
        for v, key in enumerate(inv):
            groups.setdefault(key, []).append(v)
        ordered = [groups[key] for key in sorted(groups)]
        offsets = []
        pos = 0
        for block in ordered:
            offsets.append(pos)
            pos += len(block)
        for perms in itertools.product(
            *[itertools.permutations(block) for block in ordered]
        ):
            sigma = [0] * self.n_vertices
            for block_perm, off in zip(perms, offsets):
                for j, v in enumerate(block_perm):
                    sigma[v] = off + j
            yield tuple(sigma)

    def relabel_vertices(self, sigma: Sequence[int]) -> "StableGraph":
        genera = [0] * self.n_vertices
        for v, g in enumerate(self.genera):
            genera[sigma[v]] = g
        legs = tuple(sigma[v] for v in self.legs)
        edges = tuple((sigma[u], sigma[v]) for u, v in self.edges)
        return StableGraph(tuple(genera), legs, edges)

    def canonical(self) -> "StableGraph":
        best = None
        for sigma in self._relabelling_candidates():
            cand = self.relabel_vertices(sigma)
            key = (cand.genera, cand.legs, cand.edges)
            if best is None or key < best[0]:
                best = (key, cand)
        assert best is not None
        return best[1]

    # -- marking relabelling ------------------------------------------------

    def relabel_markings(self, perm: Sequence[int]) -> "StableGraph":
        """Apply a permutation of markings: marking i becomes perm[i-1].

        ``perm`` is a sequence of length n containing 1..n.
        """
        n = self.n_markings
        if sorted(perm) != list(range(1, n + 1)):
            raise ValueError("not a permutation of the markings")
        legs = [0] * n
        for i in range(n):
            legs[perm[i] - 1] = self.legs[i]
        return StableGraph(self.genera, tuple(legs), self.edges)

    # -- contraction ----------------------------------------------------------

    def contract(
        self, contracted: frozenset[int] | set[int]
    ) -> tuple["StableGraph", list[int], list[tuple[int, bool]]]:
        """Contract the edges with the given indices.

        Contracting a non-loop edge merges its endpoints and adds the genera;
        contracting a loop (or an edge that has become a loop) raises the
        genus of its vertex by one.  In general the new genus of a merged
        class is the sum of the old genera plus the first Betti number of the
        contracted subgraph on that class.

        Returns ``(graph, vertex_map, surviving)`` where ``vertex_map[v]`` is
        the new index of old vertex ``v`` and ``surviving`` lists, in the new
        graph's edge order, pairs ``(old_edge_index, swapped)`` with
        ``swapped`` true when the stored endpoint order was reversed.
        """
        k = self.n_vertices
        parent = list(range(k))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for idx in contracted:
            u, v = self.edges[idx]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
        roots = sorted({find(v) for v in range(k)})
        new_index = {r: i for i, r in enumerate(roots)}
        vertex_map = [new_index[find(v)] for v in range(k)]

        class_sizes = [0] * len(roots)
        genera = [0] * len(roots)
        internal_edges = [0] * len(roots)
        for v in range(k):
            c = vertex_map[v]
            class_sizes[c] += 1
            genera[c] += self.genera[v]
        for idx in contracted:
            u, _v = self.edges[idx]
            internal_edges[vertex_map[u]] += 1
        for c in range(len(roots)):
            # Betti number of the contracted subgraph on this class.
            genera[c] += internal_edges[c] - class_sizes[c] + 1

        legs = tuple(vertex_map[v] for v in self.legs)
        records = []
        for idx, (u, v) in enumerate(self.edges):
            if idx in contracted:
                continue
            a, b = vertex_map[u], vertex_map[v]
            swapped = a > b
            records.append(((min(a, b), max(a, b)), idx, swapped))
        records.sort(key=lambda rec: (rec[0], rec[1]))
        edges = tuple(rec[0] for rec in records)
        surviving = [(rec[1], rec[2]) for rec in records]
        graph = StableGraph(tuple(genera), legs, edges)
        # The constructor re-sorts edges; our records are already sorted by
        # (endpoints, original index), which is a stable refinement of the
        # constructor's sort, so positions line up.
        assert graph.edges == edges
        return graph, vertex_map, surviving

    # -- JSON ------------------------------------------------------------------

    def to_json_obj(self) -> dict:
        n = self.n_markings
        half_edges = self.half_edge_ids()
        vertex_of = {str(h): self.vertex_of_half_edge(h) for h in half_edges}
        pairs = [list(self.edge_half_ids(k)) for k in range(self.n_edges)]
        return {
            "vertices": [
                {"id": v, "genus": g} for v, g in enumerate(self.genera)
            ],
            "half_edges": half_edges,
            "vertex_of": vertex_of,
            "involution_pairs": pairs,
            "legs": list(range(1, n + 1)),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @staticmethod
    def from_json_obj(obj: dict) -> "StableGraph":
        genera_by_id = {int(v["id"]): int(v["genus"]) for v in obj["vertices"]}
        ids = sorted(genera_by_id)
        reindex = {vid: i for i, vid in enumerate(ids)}
        genera = tuple(genera_by_id[vid] for vid in ids)
        vertex_of = {int(h): int(v) for h, v in obj["vertex_of"].items()}
        legs = tuple(reindex[vertex_of[int(h)]] for h in obj["legs"])
        edges = tuple(
            (reindex[vertex_of[int(a)]], reindex[vertex_of[int(b)]])
            for a, b in obj["involution_pairs"]
        )
        return StableGraph(genera, legs, edges)

    @staticmethod
    def from_json(text: str) -> "StableGraph":
        return StableGraph.from_json_obj(json.loads(text))


def trivial_graph(g: int, n: int) -> StableGraph:
    """The one-vertex, no-edge stable graph of type (g, n)."""
    return StableGraph((g,), (0,) * n, ())


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def enumerate_stable_graphs(
    g: int, n: int, *, complexity_bound: int = 8
) -> list[StableGraph]:
    """All isomorphism classes of stable graphs of type (g, n).

    Graphs of every codimension are returned, in canonical form, sorted by
    (number of edges, encoding).  The moduli dimension 3g - 3 + n must not
    exceed ``complexity_bound``; larger requests raise
    :class:`ComplexityBoundError` (pass a bigger bound to opt in).
    """
    if g < 0 or n < 0:
        raise ValueError("genus and marking count must be nonnegative")
    if 2 * g - 2 + n <= 0:
        raise ValueError(f"({g}, {n}) is not a stable type")
    dim = 3 * g - 3 + n
    if dim > complexity_bound:
        raise ComplexityBoundError(
            f"dimension {dim} exceeds the bound {complexity_bound}; "
            "pass complexity_bound explicitly to enumerate anyway"
        )

    found: set[StableGraph] = set()
    max_vertices = 2 * g + n - 2
    for k in range(1, max_vertices + 1):
        pair_types = [
            (u, v) for u in range(k) for v in range(u, k)
        ]
        for genus_sum in range(g + 1):
            h1 = g - genus_sum
            n_edges = h1 + k - 1
            if n_edges < 0:
                continue
            if n_edges == 0 and k > 1:
                continue
            for genera in _compositions(genus_sum, k):
                for edge_multiset in itertools.combinations_with_replacement(
                    pair_types, n_edges
                ):
                    if not _connects(k, edge_multiset):
                        continue
                    for legs in itertools.product(range(k), repeat=n):
                        try:
                            graph = StableGraph(genera, legs, edge_multiset)
                        except ValueError:
                            continue
                        found.add(graph.canonical())
    return sorted(found, key=lambda gr: (gr.n_edges, gr.genera, gr.legs, gr.edges))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` nonnegative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _connects(k: int, edges: Sequence[tuple[int, int]]) -> bool:
    if k == 1:
        return True
    parent = list(range(k))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        parent[find(u)] = find(v)
    return len({find(v) for v in range(k)}) == 1


# ---------------------------------------------------------------------------
# Automorphisms
# ---------------------------------------------------------------------------


def vertex_symmetries(graph: StableGraph) -> list[dict[int, int]]:
    """All vertex permutations preserving genera, markings and adjacency.

    Markings are fixed pointwise, so a vertex carrying legs can only map to
    itself (two vertices never share a marking); this is automatic because
    permutations are only taken within groups of equal invariant, and the
    invariant contains the marking tuple.
    """
    inv = graph._vertex_invariants()
    groups: dict[tuple, list[int]] = {}
    for v, key in enumerate(inv):
        groups.setdefault(key, []).append(v)
    blocks = list(groups.values())
    adjacency = _adjacency_matrix(graph)
    k = graph.n_vertices
    out = []
    for perms in itertools.product(
        *[itertools.permutations(block) for block in blocks]
    ):
        pi: dict[int, int] = {}
        for block, perm in zip(blocks, perms):
            for src, dst in zip(block, perm):
                pi[src] = dst
        if all(
            adjacency[pi[u]][pi[v]] == adjacency[u][v]
            for u in range(k)
            for v in range(u, k)
        ):
            out.append(pi)
    return out


def automorphism_count(graph: StableGraph) -> int:
    """Order of the automorphism group acting on half-edges.

    Automorphisms fix every leg, may permute vertices and edges, and may
    flip the two half-edges of a loop.  The count factors as

        (#vertex symmetries) * prod_{u<v} m_{uv}! * prod_v (l_v! * 2**l_v)

    where m_{uv} is the number of parallel edges joining distinct vertices
    u, v and l_v the number of loops at v: parallel edges and loops may be
    permuted freely, and each loop's half-edges may be swapped.
    """
    adjacency = _adjacency_matrix(graph)
    total = len(vertex_symmetries(graph))
    k = graph.n_vertices
    for u in range(k):
        for v in range(u, k):
            m = adjacency[u][v]
            if u == v:
                total *= _factorial(m) * 2**m
            else:
                total *= _factorial(m)
    return total


def _factorial(m: int) -> int:
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out


def _adjacency_matrix(graph: StableGraph) -> list[list[int]]:
    k = graph.n_vertices
    mat = [[0] * k for _ in range(k)]
    for u, v in graph.edges:
        if u == v:
            mat[u][u] += 1
        else:
            mat[u][v] += 1
            mat[v][u] += 1
    return mat


# ---------------------------------------------------------------------------
# Weightings mod r
# ---------------------------------------------------------------------------


def edge_weight_forms(
    graph: StableGraph, leg_values: Sequence[int]
) -> tuple[list[tuple[int, dict[int, int]]], list[int]]:
    """Affine forms for edge weights in terms of free edge variables.

    A weighting assigns to each half-edge a residue mod r such that legs
    carry the prescribed values, the two halves of an edge sum to zero and
    the half-edges at each vertex sum to zero.  Writing ``w_e`` for the
    weight of the first-listed side of edge ``e``, the general solution is

        w_e = c_e + sum_f m_{ef} * x_f       (mod r)

    with one free variable ``x_f`` per edge outside a spanning tree (loops
    are always free) and coefficients ``m_{ef}`` in {-1, 0, +1}.

    Returns ``(forms, free_edges)`` where ``forms[e] = (c_e, {f: m_ef})``
    indexed by edge, and ``free_edges`` lists the free edge indices (each
    with form ``(0, {f: 1})``).  Solvability additionally requires
    ``sum(leg_values) == 0 (mod r)``, which the caller checks.
    """
    if len(leg_values) != graph.n_markings:
        raise ValueError("one leg value per marking is required")
    k = graph.n_vertices
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(k)}
    for idx, (u, v) in enumerate(graph.edges):
        if u != v:
            adj[u].append((v, idx))
            adj[v].append((u, idx))
    tree_edges: list[int] = []
    seen = {0}
    frontier = [0]
    while frontier:
        u = frontier.pop()
        for w, idx in adj[u]:
            if w not in seen:
                seen.add(w)
                tree_edges.append(idx)
                frontier.append(w)
    tree_set = set(tree_edges)
    free_edges = [e for e in range(graph.n_edges) if e not in tree_set]

    # Component of the first endpoint after deleting a tree edge from the tree.
    forms: list[tuple[int, dict[int, int]]] = [(0, {}) for _ in range(graph.n_edges)]
    for f in free_edges:
        forms[f] = (0, {f: 1})
    tree_adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(k)}
    for idx in tree_edges:
        u, v = graph.edges[idx]
        tree_adj[u].append((v, idx))
        tree_adj[v].append((u, idx))
    for e in tree_edges:
        u0, _v0 = graph.edges[e]
        side = {u0}
        stack = [u0]
        while stack:
            a = stack.pop()
            for b, idx in tree_adj[a]:
                if idx == e or b in side:
                    continue
                side.add(b)
                stack.append(b)
        const = -sum(
            int(leg_values[i]) for i, v in enumerate(graph.legs) if v in side
        )
        coeffs: dict[int, int] = {}
        for f in free_edges:
            p, q = graph.edges[f]
            if p == q:
                continue
            if p in side and q not in side:
                coeffs[f] = -1
            elif q in side and p not in side:
                coeffs[f] = 1
        forms[e] = (const, coeffs)
    return forms, free_edges


def enumerate_weightings(
    graph: StableGraph,
    r: int,
    leg_values: Sequence[int],
    *,
    max_count: int = 10**6,
) -> list[dict[int, int]]:
    """All weightings mod r, as maps from half-edge id to residue.

    Legs carry ``leg_values[i] mod r``; the two half-edges of every edge sum
    to 0 mod r; the half-edges at every vertex sum to 0 mod r.  There are
    exactly ``r**h1`` weightings when ``sum(leg_values) == 0 (mod r)`` and
    none otherwise.
    """
    if r < 1:
        raise ValueError("modulus must be positive")
    if sum(leg_values) % r != 0:
        return []
    forms, free_edges = edge_weight_forms(graph, leg_values)
    if r ** len(free_edges) > max_count:
        raise ComplexityBoundError(
            f"{r}**{len(free_edges)} weightings exceed the bound {max_count}"
        )
    out: list[dict[int, int]] = []
    n = graph.n_markings
    for assignment in itertools.product(range(r), repeat=len(free_edges)):
        x = dict(zip(free_edges, assignment))
        weighting: dict[int, int] = {}
        for i in range(n):
            weighting[i + 1] = int(leg_values[i]) % r
        for e in range(graph.n_edges):
            const, coeffs = forms[e]
            w = (const + sum(m * x[f] for f, m in coeffs.items())) % r
            h1_id, h2_id = graph.edge_half_ids(e)
            weighting[h1_id] = w
            weighting[h2_id] = (-w) % r
        out.append(weighting)
    return out
