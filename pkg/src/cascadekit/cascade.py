"""Reply-tree extraction: per-group message DAG and its connected components.

Each group is modeled as a graph with one node per message and an edge
from a reply to its target.  Because every message replies to at most one
target, components are trees; any component with at least two nodes is a
cascade.  No time window is imposed: a reply chain crossing months is
still one cascade.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from datetime import datetime
from typing import IO, Iterable, Mapping

from .ingest import Message


class CascadeInvariantError(RuntimeError):
    """Internal invariant violated (should be impossible after ingest)."""


@dataclass(frozen=True)
class Cascade:
    """A rooted reply tree of messages within one group."""

    cascade_id: str
    group_id: str
    root: str
    nodes: frozenset[str]
    parent: Mapping[str, str]  # child message_id -> parent message_id
    depth_of: Mapping[str, int]
    start: datetime  # root timestamp
    end: datetime  # max node timestamp

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


def build_cascades(messages: list[Message]) -> list[Cascade]:
    """Extract cascades from one group's messages.

    Every connected component of the reply graph with >= 2 nodes becomes a
    cascade; messages with no reply edge in either direction belong to
    none.  Dangling replies must already have been cleared by ingest.
    """
    if not messages:
        return []
    groups = {m.group_id for m in messages}
    if len(groups) > 1:
        raise ValueError(f"messages span multiple groups: {sorted(groups)}")

    by_id = {m.message_id: m for m in messages}
    children: dict[str, list[str]] = {}
    for m in messages:
        if m.reply_to is None:
            continue
        target = by_id.get(m.reply_to)
        if target is None:
            raise CascadeInvariantError(f"{m.message_id} replies to unknown {m.reply_to}")
        if (target.timestamp, target.seq) >= (m.timestamp, m.seq):
            raise CascadeInvariantError(f"reply edge {m.message_id}->{m.reply_to} violates time order")
        children.setdefault(m.reply_to, []).append(m.message_id)

    # Roots: replied-to messages that are not themselves replies.
    roots = [m for m in messages if m.reply_to is None and m.message_id in children]
    roots.sort(key=lambda m: (m.timestamp, m.seq))

    cascades = []
    for root in roots:
        nodes: list[str] = []
        parent: dict[str, str] = {}
        depth_of: dict[str, int] = {}
        stack = [(root.message_id, 0)]
        while stack:
            mid, depth = stack.pop()
            nodes.append(mid)
            depth_of[mid] = depth
            for child in children.get(mid, ()):
                parent[child] = mid
                stack.append((child, depth + 1))
        end = max(by_id[mid].timestamp for mid in nodes)
        cascades.append(
            Cascade(
                cascade_id=f"{root.group_id}:{root.message_id}",
                group_id=root.group_id,
                root=root.message_id,
                nodes=frozenset(nodes),
                parent=parent,
                depth_of=depth_of,
                start=root.timestamp,
                end=end,
            )
        )
    return cascades


def build_cascades_by_group(messages: Iterable[Message]) -> list[Cascade]:
    """Partition messages by group and extract cascades group by group."""
    per_group: dict[str, list[Message]] = {}
    for m in messages:
        per_group.setdefault(m.group_id, []).append(m)
    out: list[Cascade] = []
    for gid in sorted(per_group):
        out.extend(build_cascades(per_group[gid]))
    return out


def depth(c: Cascade) -> int:
    """Maximum depth reached by any message in the cascade."""
    return max(c.depth_of.values())


class AllenRelation(enum.Enum):
    BEFORE = "before"
    AFTER = "after"
    MEETS = "meets"
    MET_BY = "met_by"
    OVERLAPS = "overlaps"
    OVERLAPPED_BY = "overlapped_by"
    STARTS = "starts"
    STARTED_BY = "started_by"
    DURING = "during"
    CONTAINS = "contains"
    FINISHES = "finishes"
    FINISHED_BY = "finished_by"
    EQUALS = "equals"


def allen_relation(a_start, a_end, b_start, b_end) -> AllenRelation:
    """Allen interval relation between [a_start, a_end] and [b_start, b_end]."""
    if a_start == b_start and a_end == b_end:
        return AllenRelation.EQUALS
    if a_end < b_start:
        return AllenRelation.BEFORE
    if b_end < a_start:
        return AllenRelation.AFTER
    if a_start == b_start:
        return AllenRelation.STARTS if a_end < b_end else AllenRelation.STARTED_BY
    if a_end == b_end:
        return AllenRelation.FINISHES if a_start > b_start else AllenRelation.FINISHED_BY
    if a_end == b_start:
        return AllenRelation.MEETS
    if b_end == a_start:
        return AllenRelation.MET_BY
    if b_start < a_start and a_end < b_end:
        return AllenRelation.DURING
    if a_start < b_start and b_end < a_end:
        return AllenRelation.CONTAINS
    if a_start < b_start:
        return AllenRelation.OVERLAPS
    return AllenRelation.OVERLAPPED_BY


def overlap_relation(a: Cascade, b: Cascade) -> AllenRelation:
    return allen_relation(a.start, a.end, b.start, b.end)


def disjoint(a: Cascade, b: Cascade) -> bool:
    """True iff one cascade ends strictly before the other starts."""
    return a.end < b.start or b.end < a.start


def cascade_to_dict(c: Cascade) -> dict:
    return {
        "cascade_id": c.cascade_id,
        "group_id": c.group_id,
        "root": c.root,
        "nodes": sorted(c.nodes),
        "parent": dict(sorted(c.parent.items())),
        "depth_of": dict(sorted(c.depth_of.items())),
        "start": c.start.isoformat(),
        "end": c.end.isoformat(),
    }


def cascade_from_dict(d: dict) -> Cascade:
    return Cascade(
        cascade_id=d["cascade_id"],
        group_id=d["group_id"],
        root=d["root"],
        nodes=frozenset(d["nodes"]),
        parent=dict(d["parent"]),
        depth_of={k: int(v) for k, v in d["depth_of"].items()},
        start=datetime.fromisoformat(d["start"]),
        end=datetime.fromisoformat(d["end"]),
    )


def write_cascades(cascades: Iterable[Cascade], stream: IO[str]) -> None:
    for c in cascades:
        stream.write(json.dumps(cascade_to_dict(c), ensure_ascii=False) + "\n")


def read_cascades(stream: IO[str]) -> list[Cascade]:
    return [cascade_from_dict(json.loads(line)) for line in stream if line.strip()]
