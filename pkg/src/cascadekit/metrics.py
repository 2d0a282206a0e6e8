"""Per-cascade structural and temporal attributes.

Covers node counts, depth, breadth profiles, structural virality, duration
and arrival times, plus the normalized percent-of-maximum profiles used to
compare cascades of different sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .cascade import Cascade
from .ingest import Message

PROFILE_BINS = tuple(range(0, 101, 5))  # 21 bins: 0%, 5%, ..., 100%


@dataclass(frozen=True)
class CascadeMetrics:
    cascade_id: str
    group_id: str
    n_nodes: int
    depth: int
    max_breadth: int
    breadth_at: Mapping[int, int]
    structural_virality: float
    duration_minutes: float
    n_unique_users: int
    users_by_depth: Mapping[int, int]  # cumulative unique users at depth <= d
    users_at_depth: Mapping[int, int]  # distinct users exactly at depth d
    time_to_depth: Mapping[int, float]  # minutes to first message at depth d
    time_to_users: Mapping[int, float]  # minutes to first reach k unique users


def breadth_profile(c: Cascade) -> dict[int, int]:
    """Number of messages at each depth level."""
    profile: dict[int, int] = {}
    for d in c.depth_of.values():
        profile[d] = profile.get(d, 0) + 1
    return dict(sorted(profile.items()))


def structural_virality(c: Cascade) -> float:
    """Mean shortest-path distance over all unordered node pairs of the tree.

    Computed via the subtree-size decomposition of the Wiener index: each
    tree edge separating s nodes from n-s nodes contributes s*(n-s) to the
    total pairwise distance.
    """
    n = c.n_nodes
    if n < 2:
        raise ValueError("structural virality needs >= 2 nodes")
    subtree = _subtree_sizes(c)
    wiener = sum(s * (n - s) for mid, s in subtree.items() if mid != c.root)
    return 2.0 * wiener / (n * (n - 1))


def _subtree_sizes(c: Cascade) -> dict[str, int]:
    children: dict[str, list[str]] = {}
    for child, par in c.parent.items():
        children.setdefault(par, []).append(child)
    sizes: dict[str, int] = {}
    # Iterative post-order to cope with deep chains.
    stack: list[tuple[str, bool]] = [(c.root, False)]
    while stack:
        mid, done = stack.pop()
        if done:
            sizes[mid] = 1 + sum(sizes[ch] for ch in children.get(mid, ()))
        else:
            stack.append((mid, True))
            for ch in children.get(mid, ()):
                stack.append((ch, False))
    return sizes


def duration_minutes(c: Cascade) -> float:
    return (c.end - c.start).total_seconds() / 60.0


def compute_metrics(c: Cascade, messages: Mapping[str, Message]) -> CascadeMetrics:
    """All attributes for one cascade; messages is a message_id lookup."""
    profile = breadth_profile(c)
    root_ts = messages[c.root].timestamp

    time_to_depth: dict[int, float] = {}
    for mid in c.nodes:
        d = c.depth_of[mid]
        minutes = (messages[mid].timestamp - root_ts).total_seconds() / 60.0
        if d not in time_to_depth or minutes < time_to_depth[d]:
            time_to_depth[d] = minutes

    users_at_depth: dict[int, set[str]] = {}
    for mid in c.nodes:
        users_at_depth.setdefault(c.depth_of[mid], set()).add(messages[mid].user_id)

    users_by_depth: dict[int, int] = {}
    cum: set[str] = set()
    for d in sorted(users_at_depth):
        cum |= users_at_depth[d]
        users_by_depth[d] = len(cum)

    time_to_users: dict[int, float] = {}
    seen: set[str] = set()
    ordered = sorted(c.nodes, key=lambda mid: (messages[mid].timestamp, messages[mid].seq))
    for mid in ordered:
        uid = messages[mid].user_id
        if uid not in seen:
            seen.add(uid)
            time_to_users[len(seen)] = (messages[mid].timestamp - root_ts).total_seconds() / 60.0

    return CascadeMetrics(
        cascade_id=c.cascade_id,
        group_id=c.group_id,
        n_nodes=c.n_nodes,
        depth=max(c.depth_of.values()),
        max_breadth=max(profile.values()),
        breadth_at=profile,
        structural_virality=structural_virality(c),
        duration_minutes=duration_minutes(c),
        n_unique_users=len(cum),
        users_by_depth=users_by_depth,
        users_at_depth={d: len(us) for d, us in sorted(users_at_depth.items())},
        time_to_depth=dict(sorted(time_to_depth.items())),
        time_to_users=time_to_users,
    )


@dataclass(frozen=True)
class ProfileBin:
    bin_pct: int
    mean: float
    stderr: float
    n: int


def _cascade_series(m: CascadeMetrics, x: str, y: str) -> list[tuple[float, float]]:
    """Raw (x_pct, y_value) points of one cascade for a profile pairing."""
    if x == "depth_pct":
        if m.depth <= 0:
            return []
        if y == "breadth":
            series = {d: float(v) for d, v in m.breadth_at.items()}
        elif y == "unique_users":
            series = {d: float(v) for d, v in m.users_by_depth.items()}
        elif y == "minutes":
            series = dict(m.time_to_depth)
        else:
            raise ValueError(f"unsupported profile pairing ({x}, {y})")
        return [(100.0 * d / m.depth, v) for d, v in sorted(series.items())]
    if x == "time_pct":
        dur = m.duration_minutes
        if dur <= 0:
            return []
        if y == "depth":
            return [(100.0 * t / dur, float(d)) for d, t in sorted(m.time_to_depth.items())]
        if y == "unique_users":
            return [(100.0 * t / dur, float(k)) for k, t in sorted(m.time_to_users.items())]
        raise ValueError(f"unsupported profile pairing ({x}, {y})")
    raise ValueError(f"unknown x-axis {x!r}")


def _nearest_bin(pct: float) -> int:
    return min(PROFILE_BINS, key=lambda b: (abs(b - pct), b))


def normalized_profile(
    metrics: Iterable[CascadeMetrics], x: str, y: str
) -> list[ProfileBin]:
    """Population profile of attribute y against percent-of-maximum x.

    Each cascade's x values are normalized to percent of its own maximum
    and snapped to the nearest of 21 fixed bins (0%, 5%, ..., 100%); the
    result reports per-bin mean, standard error and sample size.  Cascades
    whose x-maximum is zero contribute nothing.
    """
    per_bin: dict[int, list[float]] = {}
    for m in metrics:
        for pct, value in _cascade_series(m, x, y):
            per_bin.setdefault(_nearest_bin(pct), []).append(value)
    out = []
    for b in PROFILE_BINS:
        values = per_bin.get(b)
        if not values:
            continue
        n = len(values)
        mean = sum(values) / n
        if n > 1:
            var = sum((v - mean) ** 2 for v in values) / (n - 1)
            stderr = math.sqrt(var) / math.sqrt(n)
        else:
            stderr = 0.0
        out.append(ProfileBin(bin_pct=b, mean=mean, stderr=stderr, n=n))
    return out


METRICS_CSV_COLUMNS = (
    "cascade_id",
    "group_id",
    "category",
    "falsehood",
    "n_nodes",
    "depth",
    "max_breadth",
    "structural_virality",
    "duration_minutes",
    "n_unique_users",
)


def metrics_csv_row(
    m: CascadeMetrics, category: str, falsehood: str
) -> list[str]:
    return [
        m.cascade_id,
        m.group_id,
        category,
        falsehood,
        str(m.n_nodes),
        str(m.depth),
        str(m.max_breadth),
        repr(m.structural_virality),
        repr(m.duration_minutes),
        str(m.n_unique_users),
    ]
