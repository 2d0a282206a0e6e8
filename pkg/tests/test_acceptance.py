"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its measured numbers."""

import csv
import io
import json
import random
import resource
import time

from cascadekit import cascade, cli, falsehood, ingest, metrics, motifs, oracles, synth
from cascadekit.falsehood import cosine_similarity, vectorize

from conftest import sample_jsonl


def _report(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_1_worked_example():
    """Seven-message fixture: full chain from ingest to motif report."""
    t0 = time.perf_counter()
    messages, warnings = ingest.parse_log(io.StringIO(sample_jsonl()), "jsonl")
    assert not warnings
    (c,) = cascade.build_cascades(messages)
    by_id = {m.message_id: m for m in messages}
    m = metrics.compute_metrics(c, by_id)
    ug = motifs.user_graph(c, by_id)
    report = motifs.detect_motifs(ug)
    elapsed = time.perf_counter() - t0

    ok = (
        c.nodes == frozenset({"M2", "M3", "M5", "M7"})
        and {"M1", "M4", "M6"}.isdisjoint(c.nodes)
        and m.depth == 2
        and m.breadth_at == {0: 1, 1: 2, 2: 1}
        and m.duration_minutes == 15.0
        and ("U1", "U1") in ug.edges
        and report.present
        == {
            "self_loop": "subgraph",
            "chain": "subgraph",
            "dyadic": "absent",
            "loop": "absent",
            "outgoing_star": "absent",
            "incoming_star": "absent",
        }
        and elapsed < 1.0
    )
    _report("criterion-1 worked example", ok, f"{elapsed:.3f}s")


def test_criterion_2_virality_oracle():
    """1,000 seeded random trees (2-200 nodes) vs all-pairs BFS, within 1e-9."""
    t0 = time.perf_counter()
    rng = random.Random(20240710)
    worst = 0.0
    for _ in range(1000):
        n = rng.randint(2, 200)
        parents = {0: None}
        edges = []
        for i in range(1, n):
            p = rng.randrange(i)
            parents[i] = p
            edges.append((i, p))
        c = cascade.Cascade(
            cascade_id="t", group_id="g", root=0, nodes=frozenset(range(n)),
            parent={i: p for i, p in parents.items() if p is not None},
            depth_of=oracles.bfs_depths(0, edges), start=None, end=None,
        )
        got = metrics.structural_virality(c)
        want = oracles.mean_pairwise_distance(list(range(n)), edges)
        worst = max(worst, abs(got - want))
    # 6-node path exact value
    path = cascade.Cascade(
        "p", "g", 0, frozenset(range(6)), {i: i - 1 for i in range(1, 6)},
        {i: i for i in range(6)}, None, None,
    )
    exact_ok = metrics.structural_virality(path) == 35 / 15
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and exact_ok and elapsed < 30.0
    _report("criterion-2 virality oracle", ok, f"worst |err|={worst:.2e}, {elapsed:.1f}s")


def test_criterion_3_motif_oracle():
    """detect_motifs vs exhaustive enumeration on ALL digraphs with <= 4 vertices."""
    t0 = time.perf_counter()
    disagreements = 0
    total = 0
    for n in range(1, 5):
        verts = [f"v{i}" for i in range(n)]
        possible = [(u, v) for u in verts for v in verts]
        for bits in range(2 ** len(possible)):
            edges = frozenset(e for i, e in enumerate(possible) if bits >> i & 1)
            g = motifs.UserGraph("t", frozenset(verts), edges)
            got = dict(motifs.detect_motifs(g).present)
            want = oracles.brute_force_motifs(verts, edges)
            total += 1
            disagreements += got != want
    elapsed = time.perf_counter() - t0
    ok = disagreements == 0 and elapsed < 300.0
    _report("criterion-3 motif oracle", ok, f"{total} graphs, {disagreements} disagreements, {elapsed:.0f}s")


def test_criterion_4_cascade_extraction_oracle():
    """100 seeded synthetic corpora: membership and depths equal ground truth."""
    mismatches = 0
    for seed in range(100):
        cfg = synth.SynthConfig(seed=seed, n_groups=2, planted_falsehood_rate=0.1)
        result = synth.generate(cfg)
        cascades = {c.cascade_id: c for c in cascade.build_cascades_by_group(result.messages)}
        truth = {t["cascade_id"]: t for t in result.truth["cascades"]}
        if sorted(cascades) != sorted(truth):
            mismatches += 1
            continue
        for cid, c in cascades.items():
            if sorted(c.nodes) != truth[cid]["nodes"] or c.depth_of != truth[cid]["depth_of"]:
                mismatches += 1
    _report("criterion-4 cascade extraction oracle", mismatches == 0, f"{mismatches} mismatches / 100 corpora")


def test_criterion_5_similarity_properties():
    """Cosine similarity: symmetry, scale invariance, range over 10,000 pairs;
    hand case 0.5; 100 % planted near-duplicate recall at threshold 0.5."""
    rng = random.Random(555)
    vocab = [f"w{i}" for i in range(50)]
    worst = 0.0
    range_ok = True
    for _ in range(10000):
        m = vectorize("m", [rng.choice(vocab) for _ in range(rng.randint(1, 15))])
        f = vectorize("f", [rng.choice(vocab) for _ in range(rng.randint(1, 15))])
        s = cosine_similarity(m, f)
        range_ok &= 0.0 <= s <= 1.0
        worst = max(worst, abs(s - cosine_similarity(f, m)))
        k = rng.randint(2, 7)
        scaled = falsehood.TextVector(
            "m", {w: k * c for w, c in m.weights.items()},
            (sum((k * c) ** 2 for c in m.weights.values())) ** 0.5,
        )
        worst = max(worst, abs(cosine_similarity(scaled, f) - s))
    hand = cosine_similarity(vectorize("m", ["a", "b"]), vectorize("f", ["a", "c"]))

    cfg = synth.SynthConfig(seed=77, n_groups=4, planted_falsehood_rate=0.5,
                            cascades_per_group=synth.Distribution("constant", (8.0,)))
    result = synth.generate(cfg)
    planted_roots = {t["root"] for t in result.truth["cascades"] if t["falsehood"]}
    texts = [(m.message_id, m.text) for m in result.messages]
    matches = falsehood.match_corpus(texts, result.factchecks, frozenset(), {}, threshold=0.5)
    recalled = {m.message_id for m in matches}
    recall = len(planted_roots & recalled) / len(planted_roots) if planted_roots else 1.0

    ok = worst < 1e-12 and range_ok and hand == 0.5 and recall == 1.0 and len(planted_roots) > 0
    _report(
        "criterion-5 similarity properties",
        ok,
        f"worst dev={worst:.2e}, hand={hand}, recall={recall:.0%} of {len(planted_roots)} planted",
    )


def test_criterion_6_report_invariants(tmp_path):
    """CCDFs non-increasing from 1.0; daily counts sum per class; byte-identical reruns."""
    src = tmp_path / "src"
    src.mkdir()
    cfg = synth.SynthConfig(seed=31, n_groups=4, planted_falsehood_rate=0.2)
    result = synth.generate(cfg)
    corpus = src / "corpus.jsonl"
    with corpus.open("w") as fh:
        ingest.write_messages(result.messages, fh)
    labels = src / "labels.csv"
    labels.write_text(
        "group_id,category\n"
        + "".join(f"{g},{c}\n" for g, c in sorted(result.group_labels.items()))
    )

    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        cli.main(["pipeline", "--input", str(corpus), "--labels", str(labels),
                  "--out", str(out), "--no-figures"])
        outs.append(out)

    ccdf_ok = True
    for f in (outs[0] / "report" / "ccdf").glob("*.csv"):
        rows = f.read_text().strip().splitlines()[1:]
        ps = [float(r.split(",")[1]) for r in rows]
        ccdf_ok &= ps[0] == 1.0 and all(a >= b for a, b in zip(ps, ps[1:]))

    with (outs[0] / "metrics.csv").open() as fh:
        class_totals = {}
        for row in csv.DictReader(fh):
            key = f"{row['category']}_{row['falsehood']}"
            class_totals[key] = class_totals.get(key, 0) + 1
    daily_ok = True
    for f in (outs[0] / "report" / "timeseries").glob("daily_counts__*.csv"):
        key = f.stem.split("__", 1)[1]
        total = sum(int(r.split(",")[1]) for r in f.read_text().strip().splitlines()[1:])
        daily_ok &= total == class_totals.get(key, 0)

    identical = True
    for p in sorted(outs[0].rglob("*.csv")):
        rel = p.relative_to(outs[0])
        identical &= p.read_bytes() == (outs[1] / rel).read_bytes()

    ok = ccdf_ok and daily_ok and identical
    _report("criterion-6 report invariants", ok,
            f"ccdf={ccdf_ok}, daily={daily_ok}, identical={identical}")


def test_criterion_7_desk_scale_performance(tmp_path):
    """Full pipeline on a ~100k-message synthetic corpus: < 60 s, < 1 GB."""
    cfg = synth.SynthConfig(
        seed=8,
        n_groups=100,
        cascades_per_group=synth.Distribution("constant", (210.0,)),
        offspring=synth.Distribution("poisson", (0.8,)),
        n_users=12,
        planted_falsehood_rate=0.01,
        isolated_per_group=5,
        motif_truth_max_users=0,  # skip exponential motif ground truth at this scale
    )
    result = synth.generate(cfg)
    n_messages = len(result.messages)
    n_cascades = len(result.truth["cascades"])
    assert n_messages >= 100_000, f"generator produced only {n_messages} messages"

    corpus = tmp_path / "corpus.jsonl"
    with corpus.open("w") as fh:
        ingest.write_messages(result.messages, fh)
    labels = tmp_path / "labels.csv"
    labels.write_text(
        "group_id,category\n"
        + "".join(f"{g},{c}\n" for g, c in sorted(result.group_labels.items()))
    )

    t0 = time.perf_counter()
    cli.main(["pipeline", "--input", str(corpus), "--labels", str(labels),
              "--out", str(tmp_path / "out"), "--no-figures"])
    elapsed = time.perf_counter() - t0
    peak_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024

    ok = elapsed < 60.0 and peak_mb < 1024
    _report(
        "criterion-7 desk-scale performance",
        ok,
        f"{n_messages} messages, {n_cascades} cascades, {elapsed:.1f}s, peak {peak_mb:.0f} MB",
    )
