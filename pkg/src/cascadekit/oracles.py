"""Independent naive reference implementations used as ground-truth oracles.

Everything in this module is deliberately brute force and shares no code
with the production algorithms: union-find for component membership,
BFS for depths and all-pairs distances, exhaustive subset/permutation
search for motifs.  The synthetic generator records its ground truth with
these, and the test suite checks production output against them.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Hashable, Iterable, Sequence


def union_find_components(
    nodes: Iterable[Hashable], edges: Iterable[tuple[Hashable, Hashable]]
) -> list[frozenset]:
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comps: dict = {}
    for n in parent:
        comps.setdefault(find(n), set()).add(n)
    return [frozenset(c) for c in comps.values()]


def bfs_depths(root: Hashable, edges: Iterable[tuple[Hashable, Hashable]]) -> dict:
    """Depths from root over undirected edges."""
    adj: dict = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    depths = {root: 0}
    queue = deque([root])
    while queue:
        cur = queue.popleft()
        for nxt in adj.get(cur, ()):
            if nxt not in depths:
                depths[nxt] = depths[cur] + 1
                queue.append(nxt)
    return depths


def mean_pairwise_distance(
    nodes: Sequence[Hashable], edges: Iterable[tuple[Hashable, Hashable]]
) -> float:
    """Mean shortest-path distance over unordered pairs, by BFS from every node."""
    nodes = list(nodes)
    n = len(nodes)
    if n < 2:
        raise ValueError("need >= 2 nodes")
    edges = list(edges)
    total = 0
    for node in nodes:
        total += sum(bfs_depths(node, edges).values())
    return total / (n * (n - 1))


# ---------------------------------------------------------------------------
# Exhaustive motif search (mirrors the documented matching semantics)


def _induced_edges(edges: frozenset, subset: tuple) -> frozenset:
    s = set(subset)
    return frozenset((u, v) for u, v in edges if u in s and v in s)


def _iso_exact(vertices: Sequence, edges: frozenset, template: frozenset, n_template: int) -> bool:
    if len(vertices) != n_template:
        return False
    for perm in itertools.permutations(range(n_template)):
        mapping = dict(zip(vertices, perm))
        if frozenset((mapping[u], mapping[v]) for u, v in edges) == template:
            return True
    return False


def brute_force_motifs(vertices: Iterable, edges: Iterable[tuple]) -> dict[str, str]:
    """Motif presence by exhaustive enumeration; exponential, small graphs only."""
    from . import motifs as _m  # template definitions only

    vertices = sorted(vertices)
    edges = frozenset(edges)
    n = len(vertices)
    report = {}

    def subgraph_present(family: str) -> bool:
        if family == "self_loop":
            return any((v, v) in edges for v in vertices)
        if family == "dyadic":
            return any(
                (a, b) in edges and (b, a) in edges
                for a, b in itertools.combinations(vertices, 2)
            )
        if family == "chain":
            # Edge-subgraph: any directed path over distinct vertices.
            for k in range(2, n + 1):
                for seq in itertools.permutations(vertices, k):
                    if all((seq[i], seq[i + 1]) in edges for i in range(k - 1)):
                        return True
            return False
        # Induced semantics for loop and stars.
        for k in range(3, n + 1):
            template = frozenset(_m.motif_templates(family, k))
            for subset in itertools.combinations(vertices, k):
                induced = _induced_edges(edges, subset)
                for perm in itertools.permutations(range(k)):
                    mapping = dict(zip(subset, perm))
                    if frozenset((mapping[u], mapping[v]) for u, v in induced) == template:
                        return True
        return False

    def exact_present(family: str) -> bool:
        lo = {"self_loop": 1, "dyadic": 2, "chain": 2}.get(family, 3)
        hi = {"self_loop": 1, "dyadic": 2}.get(family, n)
        if not (lo <= n <= hi):
            return False
        return _iso_exact(vertices, edges, frozenset(_m.motif_templates(family, n)), n)

    for family in ("self_loop", "dyadic", "chain", "loop", "outgoing_star", "incoming_star"):
        if exact_present(family):
            report[family] = "exact"
        elif subgraph_present(family):
            report[family] = "subgraph"
        else:
            report[family] = "absent"
    return report


def brute_force_similarity_pairs(
    messages: Sequence[tuple[str, str]],
    factchecks: Sequence[tuple[str, str]],
    stopwords,
    lemma_table,
    threshold: float,
) -> set[tuple[str, str]]:
    """All-pairs cosine scoring with no index; returns pairs above threshold."""
    from .falsehood import cosine_similarity, preprocess, vectorize

    fc = [vectorize(fid, preprocess(t, stopwords, lemma_table)) for fid, t in factchecks]
    out = set()
    for mid, text in messages:
        mv = vectorize(mid, preprocess(text, stopwords, lemma_table))
        if mv.norm == 0:
            continue
        for fv in fc:
            if fv.norm == 0:
                continue
            if cosine_similarity(mv, fv) > threshold:
                out.add((mid, fv.owner_id))
    return out
