import random

import pytest

from agentsight.errors import ConfigError, VisualizationError
from agentsight.gateway import Gateway, ScriptedMock
from agentsight.mining import assemble, run_miner
from agentsight.query import execute_chain, parse_query
from agentsight.textnorm import content_tokens
from agentsight.viz import (VizWeights, atomize, bind_elements, combine_view_scores,
                            evaluate_view, force_layout, generate_specs,
                            integrate_or_coordinate, post_node, trace, word_node)


@pytest.fixture(scope="module")
def covid_subset(mini_snapshot):
    chain = parse_query('posts | text_search("covid")')
    return execute_chain(chain, mini_snapshot).subset


@pytest.fixture(scope="module")
def phased_result(mini_snapshot, covid_subset):
    data = assemble(covid_subset, "dynamic_topic_modeling", mini_snapshot)
    return run_miner(data, "dynamic_topic_modeling",
                     {"k": 4, "iterations": 20, "seed": 3, "bin": "week"})


@pytest.fixture(scope="module")
def louvain_result(mini_snapshot):
    chain = parse_query("users | traverse(follows, both)")
    subset = execute_chain(chain, mini_snapshot).subset
    data = assemble(subset, "louvain_communities", mini_snapshot)
    return run_miner(data, "louvain_communities", {"resolution": 1.0, "seed": 5})


def _gw(quality=0.9, alignment=0.8):
    return Gateway(ScriptedMock({"entries": [
        {"schema_id": "viz_rubric",
         "response": {"quality": quality, "alignment": alignment}}],
        "synthesize": True}))


# -- generate_specs ---------------------------------------------------------------

def test_phase_series_yields_three_clouds_and_line(phased_result, mini_snapshot):
    specs = generate_specs(phased_result, ["WordCloud", "LineChart"], mini_snapshot)
    types = [s.viz_type for s in specs]
    assert types.count("WordCloud") == 3
    assert types.count("LineChart") == 1
    line = [s for s in specs if s.viz_type == "LineChart"][0]
    assert line.params["change_points"] == [10, 14]
    clouds = [s for s in specs if s.viz_type == "WordCloud"]
    for c in clouds:
        assert len(c.data_items) <= 50
        assert c.encodings["size"] == "weight"


def test_partition_yields_forcegraph_with_follower_bar(louvain_result, mini_snapshot):
    specs = generate_specs(louvain_result, ["ForceGraph"], mini_snapshot)
    assert [s.viz_type for s in specs] == ["ForceGraph", "BarChart"]
    fg = specs[0]
    assert fg.encodings["color"] == "community"
    assert all("x" in i.fields and "y" in i.fields for i in fg.data_items)


def test_scoremap_yields_barchart(karate):
    from agentsight.mining.types import AssembledData
    data = AssembledData(method_id="pagerank", payload=karate,
                         meta={"input_class": "WeightedGraph"})
    result = run_miner(data, "pagerank", {})
    specs = generate_specs(result, ["BarChart"], None)
    assert [s.viz_type for s in specs] == ["BarChart"]
    heights = [i.fields["score"] for i in specs[0].data_items]
    assert heights == sorted(heights, reverse=True)


def test_sentiment_bar(mini_snapshot, covid_subset):
    data = assemble(covid_subset, "lexicon_sentiment", mini_snapshot)
    result = run_miner(data, "lexicon_sentiment", {})
    specs = generate_specs(result, ["BarChart"], mini_snapshot)
    assert specs[0].viz_type == "BarChart"
    assert {i.fields["name"] for i in specs[0].data_items} == \
           {"positive", "negative", "neutral"}


def test_no_compatible_hint_errors(phased_result, mini_snapshot):
    with pytest.raises(VisualizationError, match="no compatible"):
        generate_specs(phased_result, ["ForceGraph"], mini_snapshot)


def test_spec_determinism(phased_result, mini_snapshot):
    a = generate_specs(phased_result, ["WordCloud", "LineChart"], mini_snapshot,
                       layout_seed=3)
    b = generate_specs(phased_result, ["WordCloud", "LineChart"], mini_snapshot,
                       layout_seed=3)
    assert [s.to_dict() for s in a] == [s.to_dict() for s in b]


def test_force_layout_deterministic():
    edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (2, 3, 2.0)]
    assert force_layout(4, edges, seed=9) == force_layout(4, edges, seed=9)
    assert force_layout(4, edges, seed=9) != force_layout(4, edges, seed=10)


def test_encoded_field_must_exist():
    from agentsight.viz.linkgraph import DataItem
    from agentsight.viz.specs import VizSpec
    items = (DataItem(item_id="i1", kind="metric_bar", fields={"name": "a"}),)
    with pytest.raises(VisualizationError, match="missing on item"):
        VizSpec(viz_id="v", viz_type="BarChart", data_items=items,
                encodings={"height": "value"})


# -- integrate or coordinate --------------------------------------------------------

def test_integration_folds_bar_into_forcegraph(louvain_result, mini_snapshot):
    specs = generate_specs(louvain_result, ["ForceGraph"], mini_snapshot)
    plan, kept = integrate_or_coordinate(specs)
    assert len(kept) == 1
    assert kept[0].viz_type == "ForceGraph"
    assert kept[0].encodings["size"] == "follower_count"
    assert plan.integrated[0]["dropped"] == specs[1].viz_id
    # nothing lost: every encoded field of the dropped chart is a channel now
    dropped_fields = set(specs[1].encodings.values())
    assert dropped_fields <= set(kept[0].encodings.values())


def test_single_spec_plan(phased_result, mini_snapshot):
    specs = generate_specs(phased_result, ["LineChart", "WordCloud"], mini_snapshot)
    line = [s for s in specs if s.viz_type == "LineChart"]
    plan, kept = integrate_or_coordinate(line)
    assert plan.views == [line[0].viz_id]
    assert plan.links == [] and plan.integrated == []


def test_coordination_links_clouds_and_line(phased_result, mini_snapshot):
    specs = generate_specs(phased_result, ["WordCloud", "LineChart"], mini_snapshot)
    plan, kept = integrate_or_coordinate(specs)
    assert len(kept) == 4
    word_time = [l for l in plan.links if l["via"] == "word-time"]
    assert word_time and len(word_time[0]["views"]) == 4


# -- atomize + link graph ---------------------------------------------------------------

@pytest.fixture(scope="module")
def linkage(mini_snapshot, covid_subset, phased_result):
    items, graph = atomize([covid_subset], [phased_result], mini_snapshot)
    return items, graph


def test_atomize_word_contains_posts(linkage, mini_snapshot):
    items, graph = linkage
    posts = trace(graph, word_node("lockdown"), "post")
    assert posts
    for pn in posts:
        pid = pn.split(":")[-1]
        assert "lockdown" in mini_snapshot.posts[pid].text


def test_atomize_post_maps_to_time_point(linkage, mini_snapshot, covid_subset):
    items, graph = linkage
    pid = sorted(covid_subset.X)[0]
    points = trace(graph, post_node(pid), "time_point")
    assert len(points) == 1
    idx = int(points[0].rsplit(":", 1)[1])
    item = next(i for i in items if i.item_id == points[0])
    ts = mini_snapshot.posts[pid].created_at
    assert item.fields["start"] <= ts < item.fields["end"]


def test_every_nonempty_post_reachable_from_some_word(linkage, mini_snapshot,
                                                      covid_subset):
    items, graph = linkage
    for pid in sorted(covid_subset.X)[:300]:
        has_content = bool(content_tokens(mini_snapshot.posts[pid].text))
        reachable = bool(graph.in_neighbors(post_node(pid), "contains"))
        assert reachable == has_content


def test_trace_word_to_time_points(linkage):
    _, graph = linkage
    points = trace(graph, word_node("vaccine"), "time_point")
    # phase-3 vocabulary concentrates after week 14
    indices = sorted(int(p.rsplit(":", 1)[1]) for p in points)
    assert indices and min(indices) >= 14


def test_trace_round_trip(linkage):
    _, graph = linkage
    w = word_node("lockdown")
    posts = trace(graph, w, "post")
    words_back = set()
    for p in posts:
        words_back.update(trace(graph, p, "word"))
    assert w in words_back


def test_trace_symmetry_forward_reverse(linkage):
    _, graph = linkage
    rng = random.Random(3)
    words = [n for n, node in graph.nodes.items() if node.kind == "word"]
    for w in rng.sample(sorted(words), 25):
        for p in trace(graph, w, "post"):
            assert w in trace(graph, p, "word")


def test_trace_unknown_element(linkage):
    _, graph = linkage
    with pytest.raises(VisualizationError, match="unknown"):
        trace(graph, "item:word:zzz-not-here", "post")


def test_bind_elements_and_element_trace(linkage, phased_result, mini_snapshot):
    _, graph = linkage
    specs = generate_specs(phased_result, ["WordCloud", "LineChart"], mini_snapshot,
                           viz_id_prefix="vt")
    for s in specs:
        bind_elements(graph, s.viz_id, s.element_map())
    cloud = [s for s in specs if s.viz_type == "WordCloud"][0]
    some_word = cloud.data_items[0].item_id
    elements = trace(graph, some_word, "element")
    assert any(e.startswith(f"element:{cloud.viz_id}:") for e in elements)


# -- evaluate_view ------------------------------------------------------------------------

def test_viz_weights_simplex():
    with pytest.raises(ConfigError):
        VizWeights(w_quality=0.5, w_alignment=0.5, w_path=0.5)


def test_combine_view_scores_substitution():
    w = VizWeights(w_quality=0.4, w_alignment=0.3, w_path=0.3)
    assert combine_view_scores(1.0, 1.0, 0.0, w).e_v == pytest.approx(1.0)
    assert combine_view_scores(1.0, 1.0, 1.0, w).e_v == pytest.approx(1.0 - 0.3)


def test_e_v_strictly_decreasing_in_u_path():
    w = VizWeights()
    rng = random.Random(1)
    for _ in range(200):
        q, a = rng.random(), rng.random()
        u1 = rng.uniform(0, 0.5)
        u2 = u1 + rng.uniform(0.01, 0.4)
        assert combine_view_scores(q, a, u1, w).e_v > combine_view_scores(q, a, u2, w).e_v


def test_evaluate_view_scripted(phased_result, mini_snapshot):
    specs = generate_specs(phased_result, ["LineChart", "WordCloud"], mini_snapshot)
    ev = evaluate_view(specs[0], u_path=0.2, llm=_gw(0.9, 0.8))
    w = VizWeights()
    assert ev.e_v == pytest.approx(w.w_quality * 0.9 + w.w_alignment * 0.8
                                   + w.w_path * 0.8)


def test_evaluate_view_gateway_failure_defaults(phased_result, mini_snapshot):
    specs = generate_specs(phased_result, ["LineChart", "WordCloud"], mini_snapshot)
    gw = Gateway(ScriptedMock({"error_rate": 1.0, "seed": 2}), max_retries=1)
    ev = evaluate_view(specs[0], u_path=0.0, llm=gw)
    assert ev.s_quality == 0.5 and ev.s_alignment == 0.5
    assert "llm_fallback" in ev.flags
