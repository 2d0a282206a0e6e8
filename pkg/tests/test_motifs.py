import random

import pytest

from cascadekit import cascade, motifs, oracles
from cascadekit.motifs import ABSENT, EXACT, SUBGRAPH, UserGraph


def g(edges, vertices=()):
    verts = set(vertices)
    for u, v in edges:
        verts |= {u, v}
    return UserGraph("t", frozenset(verts), frozenset(edges))


def test_sample_user_graph(sample_messages):
    (c,) = cascade.build_cascades(sample_messages)
    by_id = {m.message_id: m for m in sample_messages}
    ug = motifs.user_graph(c, by_id)
    assert ug.vertices == frozenset({"U1", "U2", "U3"})
    assert ug.edges == frozenset({("U2", "U1"), ("U3", "U2"), ("U1", "U1")})


def test_user_graph_missing_author(sample_messages):
    (c,) = cascade.build_cascades(sample_messages)
    by_id = {m.message_id: m for m in sample_messages if m.message_id != "M5"}
    with pytest.raises(motifs.AuthorLookupError, match="M5"):
        motifs.user_graph(c, by_id)


def test_single_author_cascade_self_loop(sample_messages):
    (c,) = cascade.build_cascades(sample_messages)
    by_id = {m.message_id: type(m)(**{**m.__dict__, "user_id": "solo"}) for m in sample_messages}
    ug = motifs.user_graph(c, by_id)
    assert ug.vertices == frozenset({"solo"})
    assert ug.edges == frozenset({("solo", "solo")})


class TestTemplates:
    def test_chain_2_is_single_edge(self):
        assert motifs.motif_templates("chain", 2) == frozenset({(0, 1)})

    def test_loop_3_is_3_cycle(self):
        assert motifs.motif_templates("loop", 3) == frozenset({(0, 1), (1, 2), (2, 0)})

    def test_outgoing_star_4_degrees(self):
        t = motifs.motif_templates("outgoing_star", 4)
        out_deg = {}
        for u, v in t:
            out_deg[u] = out_deg.get(u, 0) + 1
        assert out_deg == {0: 3}

    @pytest.mark.parametrize(
        "family,n",
        [("self_loop", 2), ("dyadic", 3), ("chain", 1), ("loop", 2), ("outgoing_star", 2), ("incoming_star", 2)],
    )
    def test_out_of_range_rejected(self, family, n):
        with pytest.raises(ValueError):
            motifs.motif_templates(family, n)


class TestDetect:
    def test_sample_user_graph_report(self, sample_messages):
        (c,) = cascade.build_cascades(sample_messages)
        by_id = {m.message_id: m for m in sample_messages}
        report = motifs.detect_motifs(motifs.user_graph(c, by_id))
        assert report.present == {
            "self_loop": SUBGRAPH,
            "chain": SUBGRAPH,
            "dyadic": ABSENT,
            "loop": ABSENT,
            "outgoing_star": ABSENT,
            "incoming_star": ABSENT,
        }

    def test_lone_self_loop_is_exact(self):
        report = motifs.detect_motifs(g([("a", "a")]))
        assert report.present["self_loop"] == EXACT

    def test_dyad_exact_and_subgraph(self):
        assert motifs.detect_motifs(g([("a", "b"), ("b", "a")])).present["dyadic"] == EXACT
        bigger = g([("a", "b"), ("b", "a"), ("c", "a")])
        assert motifs.detect_motifs(bigger).present["dyadic"] == SUBGRAPH

    def test_pure_structures_exact(self):
        assert motifs.detect_motifs(g([("a", "b"), ("b", "c")])).present["chain"] == EXACT
        assert motifs.detect_motifs(g([("a", "b"), ("b", "c"), ("c", "a")])).present["loop"] == EXACT
        assert motifs.detect_motifs(g([("c", "a"), ("c", "b")])).present["outgoing_star"] == EXACT
        assert motifs.detect_motifs(g([("a", "c"), ("b", "c")])).present["incoming_star"] == EXACT

    def test_long_chain_and_star_terminate(self):
        chain_edges = [(f"v{i}", f"v{i+1}") for i in range(500)]
        report = motifs.detect_motifs(g(chain_edges))
        assert report.present["chain"] == EXACT
        star_edges = [("hub", f"v{i}") for i in range(500)]
        assert motifs.detect_motifs(g(star_edges)).present["outgoing_star"] == EXACT

    def test_relabeling_invariance(self):
        edges = [("a", "b"), ("b", "c"), ("c", "a"), ("a", "a")]
        base = motifs.detect_motifs(g(edges)).present
        mapping = {"a": "x", "b": "y", "c": "z"}
        relabeled = motifs.detect_motifs(g([(mapping[u], mapping[v]) for u, v in edges])).present
        assert base == relabeled

    def test_any_non_self_edge_gives_chain(self):
        rng = random.Random(3)
        for _ in range(50):
            n = rng.randint(2, 5)
            verts = [f"v{i}" for i in range(n)]
            edges = {(rng.choice(verts), rng.choice(verts)) for _ in range(rng.randint(0, 8))}
            report = motifs.detect_motifs(g(edges, verts))
            has_edge = any(u != v for u, v in edges)
            assert (report.present["chain"] != ABSENT) == has_edge

    def test_matches_brute_force_on_random_small_graphs(self):
        rng = random.Random(99)
        for _ in range(300):
            n = rng.randint(1, 4)
            verts = [f"v{i}" for i in range(n)]
            edges = {(rng.choice(verts), rng.choice(verts)) for _ in range(rng.randint(0, 10))}
            got = dict(motifs.detect_motifs(g(edges, verts)).present)
            want = oracles.brute_force_motifs(verts, edges)
            assert got == want, (sorted(edges), got, want)

    def test_exact_implies_subgraph_match(self):
        checks = {
            "self_loop": motifs._has_self_loop,
            "dyadic": motifs._has_dyad,
            "chain": motifs._has_chain2,
            "loop": lambda ug: motifs._has_induced_cycle(ug, len(ug.vertices)),
            "outgoing_star": lambda ug: motifs._has_induced_star(ug, outgoing=True),
            "incoming_star": lambda ug: motifs._has_induced_star(ug, outgoing=False),
        }
        rng = random.Random(17)
        for _ in range(200):
            n = rng.randint(1, 4)
            verts = [f"v{i}" for i in range(n)]
            edges = {(rng.choice(verts), rng.choice(verts)) for _ in range(rng.randint(0, 9))}
            ug = g(edges, verts)
            report = motifs.detect_motifs(ug)
            for family, presence in report.present.items():
                if presence == EXACT:
                    assert checks[family](ug)


class TestFrequencies:
    def test_single_family(self):
        r = motifs.MotifReport("c1", {f: (SUBGRAPH if f == "self_loop" else ABSENT) for f in motifs.MOTIF_FAMILIES})
        freq = motifs.motif_frequencies([r], {"c1": "k"})
        assert freq == {"k": {"self_loop": 1.0, "dyadic": 0.0, "chain": 0.0, "loop": 0.0, "outgoing_star": 0.0, "incoming_star": 0.0}}

    def test_direct_count(self):
        r1 = motifs.MotifReport("c1", {f: (SUBGRAPH if f == "chain" else ABSENT) for f in motifs.MOTIF_FAMILIES})
        r2 = motifs.MotifReport("c2", {f: (SUBGRAPH if f in ("chain", "dyadic") else ABSENT) for f in motifs.MOTIF_FAMILIES})
        freq = motifs.motif_frequencies([r1, r2], {"c1": "k", "c2": "k"})
        assert freq["k"]["chain"] == pytest.approx(2 / 3)
        assert freq["k"]["dyadic"] == pytest.approx(1 / 3)
        assert sum(freq["k"].values()) == pytest.approx(1.0)

    def test_empty_class_omitted(self):
        r = motifs.MotifReport("c1", {f: ABSENT for f in motifs.MOTIF_FAMILIES})
        assert motifs.motif_frequencies([r], {"c1": "k"}) == {}

    def test_matches_independent_tally(self):
        rng = random.Random(4)
        reports, class_of = [], {}
        for i in range(40):
            present = {f: rng.choice([ABSENT, SUBGRAPH]) for f in motifs.MOTIF_FAMILIES}
            reports.append(motifs.MotifReport(f"c{i}", present))
            class_of[f"c{i}"] = rng.choice(["a", "b"])
        freq = motifs.motif_frequencies(reports, class_of)
        for key in freq:
            tally = {f: 0 for f in motifs.MOTIF_FAMILIES}
            for r in reports:
                if class_of[r.cascade_id] == key:
                    for f in motifs.MOTIF_FAMILIES:
                        tally[f] += r.present[f] != ABSENT
            total = sum(tally.values())
            for f in motifs.MOTIF_FAMILIES:
                assert freq[key][f] == pytest.approx(tally[f] / total)
