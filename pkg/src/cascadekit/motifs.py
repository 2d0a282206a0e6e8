"""User-interaction graphs and detection of the six communication motifs.

A cascade projects to a directed graph over its participants: an edge
(x, y) means user x replied to user y at least once in that cascade
(multiplicity collapsed; self-replies give self-loops).  Six motif
families are detected: self_loop, dyadic (ping-pong), chain, loop,
outgoing_star, incoming_star.  A family is reported "exact" when the
whole graph is isomorphic to one of its templates, "subgraph" when a
template matches inside the graph, else "absent".

Subgraph semantics: chain (and the trivially small self_loop/dyadic
checks) match on an edge subset; loop and the two stars match on the
subgraph induced by a chosen vertex subset.  Each family has a direct
structural fast path; the loop family falls back to a generic VF2 search
(networkx) over induced cycle templates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import networkx as nx

from .cascade import Cascade
from .ingest import Message

MOTIF_FAMILIES = ("self_loop", "dyadic", "chain", "loop", "outgoing_star", "incoming_star")

ABSENT = "absent"
SUBGRAPH = "subgraph"
EXACT = "exact"

_MIN_N = {"self_loop": 1, "dyadic": 2, "chain": 2, "loop": 3, "outgoing_star": 3, "incoming_star": 3}
_MAX_N = {"self_loop": 1, "dyadic": 2}


class AuthorLookupError(KeyError):
    """A cascade node could not be resolved to its author."""


@dataclass(frozen=True)
class UserGraph:
    cascade_id: str
    vertices: frozenset[str]
    edges: frozenset[tuple[str, str]]


@dataclass(frozen=True)
class MotifReport:
    cascade_id: str
    present: Mapping[str, str]  # family -> absent | subgraph | exact


def user_graph(c: Cascade, messages: Mapping[str, Message]) -> UserGraph:
    """Project a cascade's reply edges onto its authors."""
    try:
        authors = {mid: messages[mid].user_id for mid in c.nodes}
    except KeyError as exc:
        raise AuthorLookupError(f"no author for message {exc.args[0]!r}") from exc
    edges = {(authors[child], authors[par]) for child, par in c.parent.items()}
    return UserGraph(
        cascade_id=c.cascade_id,
        vertices=frozenset(authors.values()),
        edges=frozenset(edges),
    )


def motif_templates(family: str, n: int) -> frozenset[tuple[int, int]]:
    """Edge set of the family's template on vertices 0..n-1."""
    if family not in MOTIF_FAMILIES:
        raise ValueError(f"unknown motif family {family!r}")
    if n < _MIN_N[family] or n > _MAX_N.get(family, n):
        raise ValueError(f"{family} template undefined for n={n}")
    if family == "self_loop":
        return frozenset({(0, 0)})
    if family == "dyadic":
        return frozenset({(0, 1), (1, 0)})
    if family == "chain":
        return frozenset((i, i + 1) for i in range(n - 1))
    if family == "loop":
        return frozenset((i, (i + 1) % n) for i in range(n))
    if family == "outgoing_star":
        return frozenset((0, i) for i in range(1, n))
    return frozenset((i, 0) for i in range(1, n))  # incoming_star


# ---------------------------------------------------------------------------
# Exact (whole-graph) checks


def _is_exact(g: UserGraph, family: str) -> bool:
    n = len(g.vertices)
    out_deg: dict[str, int] = {v: 0 for v in g.vertices}
    in_deg: dict[str, int] = {v: 0 for v in g.vertices}
    self_loops = 0
    for u, v in g.edges:
        if u == v:
            self_loops += 1
        out_deg[u] += 1
        in_deg[v] += 1

    if family == "self_loop":
        return n == 1 and len(g.edges) == 1 and self_loops == 1
    if family == "dyadic":
        return n == 2 and self_loops == 0 and len(g.edges) == 2 and all(
            out_deg[v] == 1 and in_deg[v] == 1 for v in g.vertices
        )
    if self_loops:
        return False
    if family == "chain":
        if n < 2 or len(g.edges) != n - 1:
            return False
        starts = [v for v in g.vertices if in_deg[v] == 0]
        if len(starts) != 1 or any(out_deg[v] > 1 or in_deg[v] > 1 for v in g.vertices):
            return False
        return _walk_covers(g, starts[0], n)
    if family == "loop":
        if n < 3 or len(g.edges) != n:
            return False
        if any(out_deg[v] != 1 or in_deg[v] != 1 for v in g.vertices):
            return False
        return _walk_covers(g, next(iter(g.vertices)), n)
    if family in ("outgoing_star", "incoming_star"):
        if n < 3 or len(g.edges) != n - 1:
            return False
        fwd, bwd = (out_deg, in_deg) if family == "outgoing_star" else (in_deg, out_deg)
        centers = [v for v in g.vertices if fwd[v] == n - 1]
        return len(centers) == 1 and bwd[centers[0]] == 0 and all(
            fwd[v] == 0 and bwd[v] == 1 for v in g.vertices if v != centers[0]
        )
    raise ValueError(family)


def _walk_covers(g: UserGraph, start: str, n: int) -> bool:
    succ = {u: v for u, v in g.edges}
    seen = {start}
    cur = start
    while cur in succ and succ[cur] not in seen:
        cur = succ[cur]
        seen.add(cur)
    return len(seen) == n


# ---------------------------------------------------------------------------
# Subgraph checks


def _has_self_loop(g: UserGraph) -> bool:
    return any(u == v for u, v in g.edges)


def _has_dyad(g: UserGraph) -> bool:
    return any(u != v and (v, u) in g.edges for u, v in g.edges)


def _has_chain2(g: UserGraph) -> bool:
    return any(u != v for u, v in g.edges)


def _has_induced_star(g: UserGraph, outgoing: bool) -> bool:
    """Induced 3-star: center plus two leaves, no other edges among them.

    Induced stars are downward closed, so a star of any size implies a
    3-star on a subset; only triples need checking.
    """
    loops = {u for u, v in g.edges if u == v}
    nbrs: dict[str, list[str]] = {}
    for u, v in g.edges:
        if u == v or u in loops or v in loops:
            continue
        if outgoing:
            nbrs.setdefault(u, []).append(v)
        else:
            nbrs.setdefault(v, []).append(u)
    for center, leaves in nbrs.items():
        if len(leaves) < 2:
            continue
        ok = []
        for leaf in leaves:
            # Leaf must carry no back-edge to the center.
            back = (leaf, center) if outgoing else (center, leaf)
            if back not in g.edges:
                ok.append(leaf)
        for i, a in enumerate(ok):
            for b in ok[i + 1 :]:
                if (a, b) not in g.edges and (b, a) not in g.edges:
                    return True
    return False


def _directed_core(g: UserGraph) -> tuple[set[str], set[tuple[str, str]]]:
    """Iteratively strip self-loop vertices and vertices missing in/out edges.

    Any induced directed cycle survives this trimming, so an empty core
    means the loop family is absent.
    """
    loops = {u for u, v in g.edges if u == v}
    vertices = set(g.vertices) - loops
    edges = {(u, v) for u, v in g.edges if u != v and u in vertices and v in vertices}
    changed = True
    while changed:
        out_deg: dict[str, int] = {v: 0 for v in vertices}
        in_deg: dict[str, int] = {v: 0 for v in vertices}
        for u, v in edges:
            out_deg[u] += 1
            in_deg[v] += 1
        dead = {v for v in vertices if out_deg[v] == 0 or in_deg[v] == 0}
        changed = bool(dead)
        vertices -= dead
        edges = {(u, v) for u, v in edges if u not in dead and v not in dead}
    return vertices, edges


def _has_induced_cycle(g: UserGraph, max_n: int) -> bool:
    """Induced directed cycle of length >= 3, via VF2 over cycle templates."""
    vertices, edges = _directed_core(g)
    if len(vertices) < 3:
        return False
    host = nx.DiGraph()
    host.add_nodes_from(vertices)
    host.add_edges_from(edges)
    for n in range(3, min(max_n, len(vertices)) + 1):
        template = nx.DiGraph(list(motif_templates("loop", n)))
        matcher = nx.algorithms.isomorphism.DiGraphMatcher(host, template)
        if matcher.subgraph_is_isomorphic():
            return True
    return False


def detect_motifs(g: UserGraph, max_n: Optional[int] = None) -> MotifReport:
    """Classify each motif family as absent, subgraph, or exact for g."""
    if max_n is None:
        max_n = len(g.vertices)
    present: dict[str, str] = {}
    sub_checks = {
        "self_loop": _has_self_loop(g),
        "dyadic": _has_dyad(g),
        "chain": _has_chain2(g),
        "loop": _has_induced_cycle(g, max_n),
        "outgoing_star": _has_induced_star(g, outgoing=True),
        "incoming_star": _has_induced_star(g, outgoing=False),
    }
    for family in MOTIF_FAMILIES:
        if sub_checks[family]:
            exact = len(g.vertices) <= max_n and _is_exact(g, family)
            present[family] = EXACT if exact else SUBGRAPH
        else:
            present[family] = ABSENT
    return MotifReport(cascade_id=g.cascade_id, present=present)


# ---------------------------------------------------------------------------
# Aggregation


def motif_presence_counts(reports: Iterable[MotifReport]) -> dict[str, int]:
    """Raw per-family presence counts (subgraph or exact), one per cascade."""
    counts = {f: 0 for f in MOTIF_FAMILIES}
    for r in reports:
        for f in MOTIF_FAMILIES:
            if r.present[f] != ABSENT:
                counts[f] += 1
    return counts


def motif_frequencies(
    reports: Iterable[MotifReport], class_of: Mapping[str, str]
) -> dict[str, dict[str, float]]:
    """Relative motif frequencies per class.

    Presence is counted once per cascade per family; frequencies are
    normalized by the total presences within the class so each class sums
    to 1.  Classes with no presences are omitted.
    """
    per_class: dict[str, dict[str, int]] = {}
    for r in reports:
        key = class_of.get(r.cascade_id)
        if key is None:
            continue
        counts = per_class.setdefault(key, {f: 0 for f in MOTIF_FAMILIES})
        for f in MOTIF_FAMILIES:
            if r.present[f] != ABSENT:
                counts[f] += 1
    out: dict[str, dict[str, float]] = {}
    for key, counts in per_class.items():
        total = sum(counts.values())
        if total == 0:
            continue
        out[key] = {f: counts[f] / total for f in MOTIF_FAMILIES}
    return out


MOTIF_CSV_COLUMNS = ("cascade_id",) + MOTIF_FAMILIES


def motif_csv_row(r: MotifReport) -> list[str]:
    return [r.cascade_id] + [r.present[f] for f in MOTIF_FAMILIES]
