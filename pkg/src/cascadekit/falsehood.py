"""Falsehood labeling: match message texts against a fact-check corpus.

Texts are tokenized, stopword-filtered and lemmatized through a
surface-form table, then represented as sparse term-frequency vectors.
Pairs scoring above the similarity threshold become *candidates* for a
human review queue; confirmed candidates label their cascades.
"""

from __future__ import annotations

import json
import math
import re
import urllib.request
from collections import Counter
from dataclasses import dataclass
from html.parser import HTMLParser
from typing import IO, Iterable, Mapping, Optional

from .cascade import Cascade

DEFAULT_THRESHOLD = 0.5

CANDIDATE = "candidate"
CONFIRMED = "confirmed"
REJECTED = "rejected"

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


class SimilarityError(ValueError):
    """Undefined similarity (zero-norm vector)."""


class MatchDataError(ValueError):
    """A match references an unknown message."""


@dataclass(frozen=True)
class TextVector:
    owner_id: str
    weights: Mapping[str, int]  # lemma -> term frequency
    norm: float


@dataclass(frozen=True)
class FalsehoodMatch:
    message_id: str
    factcheck_id: str
    score: float
    status: str = CANDIDATE


def preprocess(text: str, stopwords: frozenset[str] | set[str], lemma_table: Mapping[str, str]) -> list[str]:
    """Lowercase, tokenize, drop stopwords, map tokens through the lemma table."""
    lemmas = []
    for token in _TOKEN_RE.findall(text.lower()):
        if token in stopwords:
            continue
        lemmas.append(lemma_table.get(token, token))
    return lemmas


def vectorize(owner_id: str, lemmas: Iterable[str]) -> TextVector:
    weights = Counter(lemmas)
    norm = math.sqrt(sum(w * w for w in weights.values()))
    return TextVector(owner_id=owner_id, weights=dict(weights), norm=norm)


def _norm_sq(v: TextVector) -> int:
    return sum(w * w for w in v.weights.values())


def cosine_similarity(m: TextVector, f: TextVector) -> float:
    """Cosine of the two term-frequency vectors; in [0, 1] for TF weights.

    The denominator is computed as one square root of the integer product
    of squared norms, keeping exact values exact (e.g. orthonormal-ish
    hand cases come out to 0.5, not 0.4999...).
    """
    if m.norm == 0 or f.norm == 0:
        raise SimilarityError(f"zero-norm vector ({m.owner_id!r} or {f.owner_id!r})")
    small, large = (m, f) if len(m.weights) <= len(f.weights) else (f, m)
    dot = sum(w * large.weights.get(lemma, 0) for lemma, w in small.weights.items())
    return dot / math.sqrt(_norm_sq(m) * _norm_sq(f))


def match_corpus(
    messages: Iterable[tuple[str, str]],
    factchecks: Iterable[tuple[str, str]],
    stopwords: frozenset[str] | set[str],
    lemma_table: Mapping[str, str],
    threshold: float = DEFAULT_THRESHOLD,
) -> list[FalsehoodMatch]:
    """Score every (message, fact-check) text pair, keeping scores > threshold.

    Inputs are (id, text) pairs; a message id may appear more than once
    (its own text plus texts fetched from its URLs).  An inverted index
    over fact-check lemmas avoids touching pairs with no shared
    vocabulary.  Results are sorted by descending score, status candidate.
    """
    fc_vectors: list[TextVector] = []
    index: dict[str, list[int]] = {}
    for fc_id, text in factchecks:
        vec = vectorize(fc_id, preprocess(text, stopwords, lemma_table))
        if vec.norm == 0:
            continue
        for lemma in vec.weights:
            index.setdefault(lemma, []).append(len(fc_vectors))
        fc_vectors.append(vec)

    best: dict[tuple[str, str], float] = {}
    for msg_id, text in messages:
        vec = vectorize(msg_id, preprocess(text, stopwords, lemma_table))
        if vec.norm == 0:
            continue
        dots: dict[int, int] = {}
        for lemma, w in vec.weights.items():
            for i in index.get(lemma, ()):
                dots[i] = dots.get(i, 0) + w * fc_vectors[i].weights[lemma]
        vec_sq = _norm_sq(vec)
        for i, dot in dots.items():
            score = dot / math.sqrt(vec_sq * _norm_sq(fc_vectors[i]))
            if score > threshold:
                key = (msg_id, fc_vectors[i].owner_id)
                if score > best.get(key, -1.0):
                    best[key] = score
    matches = [
        FalsehoodMatch(message_id=mid, factcheck_id=fid, score=score)
        for (mid, fid), score in best.items()
    ]
    matches.sort(key=lambda m: (-m.score, m.message_id, m.factcheck_id))
    return matches


def label_cascades(
    cascades: Iterable[Cascade],
    confirmed: Iterable[FalsehoodMatch],
    known_message_ids: set[str],
) -> tuple[dict[str, str], Optional[float]]:
    """Label each cascade falsehood/unclassified from confirmed matches.

    Returns the label map and, among falsehood cascades, the fraction
    whose root message itself was matched (None when there are none).
    """
    matched_ids = set()
    for m in confirmed:
        if m.message_id not in known_message_ids:
            raise MatchDataError(f"confirmed match references unknown message {m.message_id!r}")
        matched_ids.add(m.message_id)

    labels: dict[str, str] = {}
    root_hits = 0
    n_falsehood = 0
    for c in cascades:
        if matched_ids & c.nodes:
            labels[c.cascade_id] = "falsehood"
            n_falsehood += 1
            if c.root in matched_ids:
                root_hits += 1
        else:
            labels[c.cascade_id] = "unclassified"
    root_fraction = root_hits / n_falsehood if n_falsehood else None
    return labels, root_fraction


# ---------------------------------------------------------------------------
# Review queue I/O


def write_matches(matches: Iterable[FalsehoodMatch], stream: IO[str]) -> None:
    for m in matches:
        stream.write(
            json.dumps(
                {
                    "message_id": m.message_id,
                    "factcheck_id": m.factcheck_id,
                    "score": m.score,
                    "status": m.status,
                }
            )
            + "\n"
        )


def read_matches(stream: IO[str]) -> list[FalsehoodMatch]:
    out = []
    for line in stream:
        if not line.strip():
            continue
        d = json.loads(line)
        status = d.get("status", CANDIDATE)
        if status not in (CANDIDATE, CONFIRMED, REJECTED):
            raise ValueError(f"bad match status {status!r}")
        out.append(
            FalsehoodMatch(
                message_id=d["message_id"],
                factcheck_id=d["factcheck_id"],
                score=float(d["score"]),
                status=status,
            )
        )
    return out


def read_factchecks(stream: IO[str]) -> list[tuple[str, str]]:
    """Fact-check corpus JSONL: {"factcheck_id", "source", "text"}."""
    out = []
    for line in stream:
        if line.strip():
            d = json.loads(line)
            out.append((d["factcheck_id"], d.get("text", "")))
    return out


# ---------------------------------------------------------------------------
# URL article extraction


@dataclass(frozen=True)
class FetchResult:
    url: str
    text: Optional[str] = None
    error: Optional[str] = None


class _ArticleExtractor(HTMLParser):
    """Pull the main article text out of an HTML page.

    Prefers <article> content; otherwise falls back to the concatenation
    of <p> blocks (a crude text-density heuristic that discards nav bars,
    menus and other boilerplate), then to all visible text.
    """

    _SKIP = {"script", "style", "nav", "header", "footer", "aside", "noscript"}

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self._skip_depth = 0
        self._article_depth = 0
        self._p_depth = 0
        self.article_parts: list[str] = []
        self.paragraph_parts: list[str] = []
        self.all_parts: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self._skip_depth += 1
        elif tag == "article":
            self._article_depth += 1
        elif tag == "p":
            self._p_depth += 1

    def handle_endtag(self, tag):
        if tag in self._SKIP and self._skip_depth:
            self._skip_depth -= 1
        elif tag == "article" and self._article_depth:
            self._article_depth -= 1
        elif tag == "p" and self._p_depth:
            self._p_depth -= 1

    def handle_data(self, data):
        if self._skip_depth or not data.strip():
            return
        self.all_parts.append(data.strip())
        if self._article_depth:
            self.article_parts.append(data.strip())
        if self._p_depth:
            self.paragraph_parts.append(data.strip())


def extract_main_text(html: str) -> str:
    parser = _ArticleExtractor()
    parser.feed(html)
    parser.close()
    for parts in (parser.article_parts, parser.paragraph_parts, parser.all_parts):
        text = " ".join(parts).strip()
        if text:
            return text
    return ""


def fetch_article_text(url: str, fetcher=None, timeout: float = 10.0) -> FetchResult:
    """Fetch one URL and extract its article text; failures never raise.

    fetcher, when given, is a callable url -> HTML string (used for offline
    fixtures and caching); the default uses urllib.
    """
    try:
        if fetcher is not None:
            html = fetcher(url)
        else:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                ctype = resp.headers.get("Content-Type", "")
                if "html" not in ctype and "text" not in ctype:
                    return FetchResult(url=url, error=f"non-HTML content type {ctype!r}")
                html = resp.read().decode("utf-8", errors="replace")
    except Exception as exc:  # noqa: BLE001 - every failure becomes a record
        return FetchResult(url=url, error=str(exc) or exc.__class__.__name__)
    text = extract_main_text(html)
    if not text:
        return FetchResult(url=url, error="extraction-empty")
    return FetchResult(url=url, text=text)


def write_url_cache(results: Iterable[FetchResult], stream: IO[str]) -> None:
    for r in results:
        stream.write(json.dumps({"url": r.url, "text": r.text, "error": r.error}) + "\n")


def read_url_cache(stream: IO[str]) -> dict[str, FetchResult]:
    cache = {}
    for line in stream:
        if line.strip():
            d = json.loads(line)
            cache[d["url"]] = FetchResult(url=d["url"], text=d.get("text"), error=d.get("error"))
    return cache
