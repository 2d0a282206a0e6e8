"""Synthetic corpus generator with exhaustively-computed ground truth.

Reply trees are realized as branching processes: every node draws an
offspring count, children arrive after a sampled delay.  The ground-truth
file is computed by the naive oracle code paths (union-find, all-pairs
BFS, exhaustive motif search), never by the production algorithms, so the
pipeline can be checked end to end against it.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Optional

from . import oracles
from .ingest import KIND_TEXT, Message

logger = logging.getLogger(__name__)

_EPOCH = datetime(2018, 1, 1, tzinfo=timezone.utc)
_MIN_DELAY_MINUTES = 1e-4


@dataclass(frozen=True)
class Distribution:
    """A small family of scalar distributions, JSON-configurable.

    kind: constant | uniform_int | poisson | geometric | exponential
    """

    kind: str
    params: tuple[float, ...]

    @classmethod
    def from_obj(cls, obj) -> "Distribution":
        if isinstance(obj, Distribution):
            return obj
        if isinstance(obj, (int, float)):
            return cls("constant", (float(obj),))
        if isinstance(obj, dict) and len(obj) == 1:
            (kind, value), = obj.items()
            params = tuple(float(v) for v in value) if isinstance(value, (list, tuple)) else (float(value),)
            if kind not in ("constant", "uniform_int", "poisson", "geometric", "exponential"):
                raise ValueError(f"unknown distribution kind {kind!r}")
            return cls(kind, params)
        raise ValueError(f"bad distribution spec {obj!r}")

    def sample(self, rng: random.Random) -> float:
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "uniform_int":
            return rng.randint(int(self.params[0]), int(self.params[1]))
        if self.kind == "poisson":
            return _poisson(rng, self.params[0])
        if self.kind == "geometric":
            # Number of failures before first success; mean (1-p)/p.
            p = self.params[0]
            k = 0
            while rng.random() > p:
                k += 1
            return k
        if self.kind == "exponential":
            return rng.expovariate(1.0 / self.params[0])
        raise ValueError(self.kind)

    def to_obj(self):
        return {self.kind: self.params[0] if len(self.params) == 1 else list(self.params)}


def _poisson(rng: random.Random, mean: float) -> int:
    # Knuth's method; means here are small.
    import math

    limit = math.exp(-mean)
    k, p = 0, 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


@dataclass
class SynthConfig:
    seed: int = 0
    n_groups: int = 2
    cascades_per_group: Distribution = field(default_factory=lambda: Distribution("constant", (5.0,)))
    offspring: Distribution = field(default_factory=lambda: Distribution("poisson", (0.8,)))
    delay_minutes: Distribution = field(default_factory=lambda: Distribution("exponential", (5.0,)))
    n_users: int = 6
    self_reply_prob: float = 0.1
    planted_falsehood_rate: float = 0.0
    isolated_per_group: int = 2
    max_cascade_nodes: int = 500
    n_factchecks: int = 10
    motif_truth_max_users: int = 8
    political_fraction: float = 0.5

    def __post_init__(self) -> None:
        for name in ("self_reply_prob", "planted_falsehood_rate", "political_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        kwargs = dict(d)
        for key in ("cascades_per_group", "offspring", "delay_minutes"):
            if key in kwargs:
                kwargs[key] = Distribution.from_obj(kwargs[key])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_groups": self.n_groups,
            "cascades_per_group": self.cascades_per_group.to_obj(),
            "offspring": self.offspring.to_obj(),
            "delay_minutes": self.delay_minutes.to_obj(),
            "n_users": self.n_users,
            "self_reply_prob": self.self_reply_prob,
            "planted_falsehood_rate": self.planted_falsehood_rate,
            "isolated_per_group": self.isolated_per_group,
            "max_cascade_nodes": self.max_cascade_nodes,
            "n_factchecks": self.n_factchecks,
            "motif_truth_max_users": self.motif_truth_max_users,
            "political_fraction": self.political_fraction,
        }


@dataclass
class SynthResult:
    messages: list[Message]
    truth: dict
    factchecks: list[tuple[str, str]]
    group_labels: dict[str, str]  # group_id -> category


def _factcheck_corpus(cfg: SynthConfig) -> list[tuple[str, str]]:
    # Each fact-check gets its own disjoint 10-token vocabulary, so planted
    # near-copies score high against exactly one fact-check and nothing else.
    return [
        (f"fc{i:03d}", " ".join(f"fcword{i:03d}x{j}" for j in range(10)))
        for i in range(cfg.n_factchecks)
    ]


def _noise_text(rng: random.Random) -> str:
    return " ".join(f"word{rng.randint(0, 399)}" for _ in range(rng.randint(3, 12)))


def generate(cfg: SynthConfig) -> SynthResult:
    """Generate a message corpus plus oracle-computed ground truth.

    Identical configs (same seed) produce identical output, byte for byte
    once serialized.
    """
    rng = random.Random(cfg.seed)
    factchecks = _factcheck_corpus(cfg)

    messages: list[Message] = []
    truth_cascades: list[dict] = []
    group_labels: dict[str, str] = {}

    for g in range(cfg.n_groups):
        group_id = f"g{g:03d}"
        group_labels[group_id] = (
            "political" if rng.random() < cfg.political_fraction else "non_political"
        )
        users = [f"u{g:03d}_{i}" for i in range(cfg.n_users)]
        raw: list[dict] = []  # records before seq assignment
        counter = 0
        clock = _EPOCH + timedelta(hours=g)

        def new_id() -> str:
            nonlocal counter
            counter += 1
            return f"m{g:03d}_{counter:05d}"

        n_cascades = int(cfg.cascades_per_group.sample(rng))
        for _ in range(n_cascades):
            clock += timedelta(minutes=30.0 + rng.expovariate(1.0 / 60.0))
            root_author = rng.choice(users)
            planted: Optional[int] = None
            if factchecks and rng.random() < cfg.planted_falsehood_rate:
                planted = rng.randrange(len(factchecks))
            if planted is not None:
                fc_tokens = factchecks[planted][1].split()
                kept = fc_tokens[:8] + [f"noise{rng.randint(0, 99)}" for _ in range(2)]
                root_text = " ".join(kept)
            else:
                root_text = _noise_text(rng)
            root = {
                "message_id": new_id(),
                "user_id": root_author,
                "timestamp": clock,
                "text": root_text,
                "reply_to": None,
            }
            raw.append(root)
            frontier = [root]
            n_in_cascade = 1
            capped = False
            while frontier:
                node = frontier.pop(0)
                k = int(cfg.offspring.sample(rng))
                for _ in range(k):
                    if n_in_cascade >= cfg.max_cascade_nodes:
                        capped = True
                        break
                    delay = max(cfg.delay_minutes.sample(rng), _MIN_DELAY_MINUTES)
                    if rng.random() < cfg.self_reply_prob:
                        author = node["user_id"]
                    else:
                        author = rng.choice(users)
                    child = {
                        "message_id": new_id(),
                        "user_id": author,
                        "timestamp": node["timestamp"] + timedelta(minutes=delay),
                        "text": _noise_text(rng),
                        "reply_to": node["message_id"],
                    }
                    raw.append(child)
                    frontier.append(child)
                    n_in_cascade += 1
                if capped:
                    break
            if capped:
                logger.warning(
                    "cascade rooted at %s capped at %d nodes", root["message_id"], cfg.max_cascade_nodes
                )
            if n_in_cascade >= 2:
                truth_cascades.append(
                    _cascade_truth(cfg, group_id, raw[-n_in_cascade:], planted is not None)
                )

        for _ in range(cfg.isolated_per_group):
            clock += timedelta(minutes=rng.expovariate(1.0 / 30.0))
            raw.append(
                {
                    "message_id": new_id(),
                    "user_id": rng.choice(users),
                    "timestamp": clock,
                    "text": _noise_text(rng),
                    "reply_to": None,
                }
            )

        raw.sort(key=lambda r: (r["timestamp"], r["message_id"]))
        for seq, r in enumerate(raw):
            messages.append(
                Message(
                    group_id=group_id,
                    message_id=r["message_id"],
                    user_id=r["user_id"],
                    timestamp=r["timestamp"],
                    seq=seq,
                    kind=KIND_TEXT,
                    text=r["text"],
                    urls=(),
                    reply_to=r["reply_to"],
                )
            )

    truth = {
        "config": cfg.to_dict(),
        "n_messages": len(messages),
        "cascades": truth_cascades,
        "factcheck_ids": [fid for fid, _ in factchecks],
    }
    return SynthResult(
        messages=messages, truth=truth, factchecks=factchecks, group_labels=group_labels
    )


def _cascade_truth(cfg: SynthConfig, group_id: str, records: list[dict], falsehood: bool) -> dict:
    """Ground truth for one generated cascade, via the naive oracles."""
    nodes = [r["message_id"] for r in records]
    edges = [(r["message_id"], r["reply_to"]) for r in records if r["reply_to"] is not None]
    root = records[0]["message_id"]
    depth_of = oracles.bfs_depths(root, edges)
    by_id = {r["message_id"]: r for r in records}
    stamps = [r["timestamp"] for r in records]
    duration = (max(stamps) - by_id[root]["timestamp"]).total_seconds() / 60.0

    vertices = sorted({r["user_id"] for r in records})
    ug_edges = sorted({(by_id[a]["user_id"], by_id[b]["user_id"]) for a, b in edges})
    motifs = None
    if len(vertices) <= cfg.motif_truth_max_users:
        motifs = oracles.brute_force_motifs(vertices, ug_edges)

    return {
        "cascade_id": f"{group_id}:{root}",
        "group_id": group_id,
        "root": root,
        "nodes": sorted(nodes),
        "depth_of": {k: depth_of[k] for k in sorted(depth_of)},
        "virality": oracles.mean_pairwise_distance(nodes, edges),
        "duration_minutes": duration,
        "user_graph": {"vertices": vertices, "edges": [list(e) for e in ug_edges]},
        "motifs": motifs,
        "falsehood": falsehood,
    }


def dump_truth(truth: dict, stream) -> None:
    json.dump(truth, stream, sort_keys=True, indent=1, default=str)
    stream.write("\n")
