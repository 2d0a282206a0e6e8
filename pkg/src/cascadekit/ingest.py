"""Chat-log ingestion: parse exported logs into validated, anonymized messages.

Two export formats are supported, JSONL and CSV, both carrying the same
field names.  Parsing is forgiving: malformed lines become warnings with
their source line number, never aborts.  Reply links that cannot be
honored (target missing, or target not strictly earlier) are dropped so
that downstream cascade construction can rely on "reply target precedes
replier".
"""

from __future__ import annotations

import csv
import hashlib
import hmac
import io
import json
import logging
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import IO, Iterable, Optional

logger = logging.getLogger(__name__)

KIND_TEXT = "text"
KIND_MEDIA = "media"

CATEGORIES = ("political", "non_political")

# RFC-3986-flavored scan: scheme://authority/path..., trailing punctuation trimmed.
_URL_RE = re.compile(r"https?://[^\s<>\"'‎‏]+", re.IGNORECASE)
_URL_TRAILING = ".,;:!?)]}»”’"


class ConfigError(ValueError):
    """Bad configuration (unknown format, empty salt, missing resource)."""


class CorpusValidationError(ValueError):
    """Corpus-level invariant violation; message names the offending entity."""


@dataclass(frozen=True)
class Message:
    """One chat event, already anonymized."""

    group_id: str
    message_id: str
    user_id: str
    timestamp: datetime
    seq: int
    kind: str = KIND_TEXT
    text: str = ""
    urls: tuple[str, ...] = ()
    reply_to: Optional[str] = None


@dataclass(frozen=True)
class GroupLabel:
    group_id: str
    category: str


@dataclass(frozen=True)
class IngestWarning:
    line_no: int
    code: str
    detail: str


@dataclass
class CorpusSummary:
    n_messages: int
    n_groups: int
    per_group: dict[str, int]
    date_range: Optional[tuple[datetime, datetime]]
    n_dangling: int
    missing_labels: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_messages": self.n_messages,
            "n_groups": self.n_groups,
            "per_group": dict(sorted(self.per_group.items())),
            "date_range": [d.isoformat() for d in self.date_range] if self.date_range else None,
            "n_dangling": self.n_dangling,
            "missing_labels": self.missing_labels,
        }


def extract_urls(text: str) -> tuple[str, ...]:
    """Scan text for http(s) URLs, trimming trailing punctuation."""
    found = []
    for m in _URL_RE.finditer(text):
        url = m.group(0).rstrip(_URL_TRAILING)
        if url:
            found.append(url)
    return tuple(found)


def anonymize(raw_user_key: str, salt: str) -> str:
    """Deterministic one-way mapping from a raw user key (phone) to an opaque id.

    Keyed hash so the id reveals nothing without the salt; equal inputs map
    to equal ids.
    """
    if not salt:
        raise ConfigError("anonymization salt must be non-empty")
    digest = hmac.new(salt.encode("utf-8"), raw_user_key.encode("utf-8"), hashlib.sha256)
    return digest.hexdigest()[:16]


def parse_timestamp(raw: str, assume_utc: bool = False) -> datetime:
    """Parse an RFC-3339 timestamp, normalizing to UTC.

    Naive timestamps are only accepted with assume_utc=True (the export is
    declared to be UTC); otherwise they are rejected.
    """
    ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        if not assume_utc:
            raise ValueError("naive timestamp without --assume-utc")
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _record_to_message(
    rec: dict,
    line_no: int,
    seq: int,
    salt: Optional[str],
    assume_utc: bool,
) -> Message:
    group_id = rec.get("group_id")
    message_id = rec.get("message_id")
    if not group_id or not message_id:
        raise ValueError("missing group_id or message_id")

    if rec.get("user_id"):
        user_id = str(rec["user_id"])
    elif rec.get("user_key"):
        if salt is None:
            raise ConfigError(f"line {line_no}: raw user_key present but no salt configured")
        user_id = anonymize(str(rec["user_key"]), salt)
    else:
        raise ValueError("missing user_id/user_key")

    timestamp = parse_timestamp(str(rec["timestamp"]), assume_utc)
    kind = rec.get("kind", KIND_TEXT)
    if kind not in (KIND_TEXT, KIND_MEDIA):
        raise ValueError(f"unknown kind {kind!r}")
    text = str(rec.get("text") or "") if kind == KIND_TEXT else ""
    reply_to = rec.get("reply_to") or None

    return Message(
        group_id=str(group_id),
        message_id=str(message_id),
        user_id=user_id,
        timestamp=timestamp,
        seq=seq,
        kind=kind,
        text=text,
        urls=extract_urls(text),
        reply_to=str(reply_to) if reply_to else None,
    )


def _iter_jsonl(stream: IO[str]) -> Iterable[tuple[int, dict, Optional[str]]]:
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            yield line_no, json.loads(line), None
        except json.JSONDecodeError as exc:
            yield line_no, {}, f"invalid JSON: {exc}"


def _iter_csv(stream: IO[str]) -> Iterable[tuple[int, dict, Optional[str]]]:
    reader = csv.DictReader(stream)
    for row_no, row in enumerate(reader, start=2):  # header is line 1
        if row.get(None):
            yield row_no, {}, "extra unnamed CSV columns"
            continue
        yield row_no, {k: (v if v != "" else None) for k, v in row.items()}, None


def parse_log(
    stream: IO[str] | IO[bytes],
    fmt: str,
    salt: Optional[str] = None,
    assume_utc: bool = False,
) -> tuple[list[Message], list[IngestWarning]]:
    """Parse an exported chat log into Messages plus per-line warnings.

    Messages are returned in file order with a per-group seq counter.
    After the pass, reply links are resolved: a reply_to naming a missing
    target, or one that is not strictly earlier in (timestamp, seq), is
    cleared and reported as a dangling-reply warning.
    """
    if isinstance(stream.read(0), bytes):
        stream = io.TextIOWrapper(stream, encoding="utf-8")  # type: ignore[arg-type]
    if fmt == "jsonl":
        records = _iter_jsonl(stream)  # type: ignore[arg-type]
    elif fmt == "csv":
        records = _iter_csv(stream)  # type: ignore[arg-type]
    else:
        raise ConfigError(f"unknown log format {fmt!r}")

    messages: list[Message] = []
    warnings: list[IngestWarning] = []
    seq_by_group: dict[str, int] = {}
    seen_ids: set[tuple[str, str]] = set()
    line_of: dict[tuple[str, str], int] = {}

    for line_no, rec, err in records:
        if err is not None:
            warnings.append(IngestWarning(line_no, "malformed", err))
            continue
        group_id = str(rec.get("group_id") or "")
        seq = seq_by_group.get(group_id, 0)
        try:
            msg = _record_to_message(rec, line_no, seq, salt, assume_utc)
        except ConfigError:
            raise
        except (KeyError, ValueError, TypeError) as exc:
            warnings.append(IngestWarning(line_no, "malformed", str(exc)))
            continue
        key = (msg.group_id, msg.message_id)
        if key in seen_ids:
            warnings.append(
                IngestWarning(line_no, "duplicate_id", f"duplicate message_id {msg.message_id!r} in group {msg.group_id!r}")
            )
            continue
        seen_ids.add(key)
        line_of[key] = line_no
        seq_by_group[msg.group_id] = seq + 1
        messages.append(msg)

    # Resolve reply targets: must exist and strictly precede the replier.
    order = {(m.group_id, m.message_id): (m.timestamp, m.seq) for m in messages}
    for i, msg in enumerate(messages):
        if msg.reply_to is None:
            continue
        target = (msg.group_id, msg.reply_to)
        line_no = line_of[(msg.group_id, msg.message_id)]
        if target not in order:
            warnings.append(
                IngestWarning(line_no, "dangling_reply", f"{msg.message_id} replies to missing {msg.reply_to}")
            )
            messages[i] = replace(msg, reply_to=None)
        elif order[target] >= (msg.timestamp, msg.seq):
            warnings.append(
                IngestWarning(line_no, "dangling_reply", f"{msg.message_id} replies to non-earlier {msg.reply_to}")
            )
            messages[i] = replace(msg, reply_to=None)

    return messages, warnings


def parse_labels(stream: IO[str]) -> list[GroupLabel]:
    """Read the group-labels CSV (group_id,category)."""
    labels = []
    for row_no, row in enumerate(csv.DictReader(stream), start=2):
        category = (row.get("category") or "").strip()
        group_id = (row.get("group_id") or "").strip()
        if category not in CATEGORIES:
            raise CorpusValidationError(f"labels line {row_no}: bad category {category!r}")
        if not group_id:
            raise CorpusValidationError(f"labels line {row_no}: empty group_id")
        labels.append(GroupLabel(group_id, category))
    return labels


def validate_corpus(
    messages: list[Message],
    labels: list[GroupLabel],
    require_labels: bool = True,
) -> CorpusSummary:
    """Cross-check a parsed corpus and summarize it.

    Fails closed: duplicate message ids raise, and (by default) so does any
    group without a label; the error lists the offenders.
    """
    seen: set[tuple[str, str]] = set()
    per_group: dict[str, int] = {}
    n_dangling = 0
    order: dict[tuple[str, str], tuple[datetime, int]] = {}
    for m in messages:
        key = (m.group_id, m.message_id)
        if key in seen:
            raise CorpusValidationError(f"duplicate message_id {m.message_id!r} in group {m.group_id!r}")
        seen.add(key)
        order[key] = (m.timestamp, m.seq)
        per_group[m.group_id] = per_group.get(m.group_id, 0) + 1
    for m in messages:
        if m.reply_to is not None:
            target = order.get((m.group_id, m.reply_to))
            if target is None or target >= (m.timestamp, m.seq):
                n_dangling += 1

    labeled = {lab.group_id for lab in labels}
    missing = sorted(g for g in per_group if g not in labeled)
    if missing and require_labels:
        raise CorpusValidationError(f"groups missing labels: {', '.join(missing)}")

    date_range = None
    if messages:
        stamps = [m.timestamp for m in messages]
        date_range = (min(stamps), max(stamps))

    return CorpusSummary(
        n_messages=len(messages),
        n_groups=len(per_group),
        per_group=per_group,
        date_range=date_range,
        n_dangling=n_dangling,
        missing_labels=missing,
    )


def message_to_dict(m: Message) -> dict:
    return {
        "group_id": m.group_id,
        "message_id": m.message_id,
        "user_id": m.user_id,
        "timestamp": m.timestamp.isoformat(),
        "seq": m.seq,
        "kind": m.kind,
        "text": m.text,
        "urls": list(m.urls),
        "reply_to": m.reply_to,
    }


def message_from_dict(d: dict) -> Message:
    return Message(
        group_id=d["group_id"],
        message_id=d["message_id"],
        user_id=d["user_id"],
        timestamp=datetime.fromisoformat(d["timestamp"]),
        seq=int(d["seq"]),
        kind=d.get("kind", KIND_TEXT),
        text=d.get("text", ""),
        urls=tuple(d.get("urls", ())),
        reply_to=d.get("reply_to"),
    )


def write_messages(messages: Iterable[Message], stream: IO[str]) -> None:
    for m in messages:
        stream.write(json.dumps(message_to_dict(m), ensure_ascii=False) + "\n")


def read_messages(stream: IO[str]) -> list[Message]:
    return [message_from_dict(json.loads(line)) for line in stream if line.strip()]
