import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agentsight.datastore import EdgeKind, Modality
from agentsight.errors import QuerySyntaxError, QueryValidationError
from agentsight.query import (Op, QueryChain, QueryStep, SourceAll, SourceNode,
                              parse_query, pretty_print)


def test_parse_case_two_chain():
    chain = parse_query('posts | text_search("covid") | time_window(2020-01-01, 2020-06-30)')
    assert len(chain.steps) == 3
    assert chain.steps[0].operation is Op.EXPAND_MODALITY
    assert chain.steps[0].params["scope"] == "universe"
    assert chain.steps[1].params["terms"] == ("covid",)
    assert chain.steps[2].operation is Op.TIME_WINDOW


def test_parse_filter_traverse_chain():
    chain = parse_query("users | filter(follower_count > 10000) | traverse(posts)")
    assert len(chain.steps) == 3
    assert chain.steps[1].params == {"attr": "follower_count", "cmp": ">", "value": 10000}
    assert chain.steps[2].params["kind"] is EdgeKind.POSTS
    assert chain.steps[2].params["direction"] == "out"


def test_syntax_error_position_after_open_paren():
    text = "users | traverse("
    with pytest.raises(QuerySyntaxError) as err:
        parse_query(text)
    assert err.value.line == 1
    assert err.value.column == text.index("(") + 2  # 1-based col right after '('
    assert err.value.expected  # expected-token set is reported


def test_syntax_error_reports_expected_tokens():
    with pytest.raises(QuerySyntaxError) as err:
        parse_query("users | blah(1)")
    assert "filter" in err.value.expected
    assert "traverse" in err.value.expected


def test_static_error_names_step_index():
    with pytest.raises(QueryValidationError) as err:
        parse_query('users | text_search("covid")')
    assert err.value.step_index == 1


def test_selector_only_first():
    with pytest.raises(QueryValidationError) as err:
        parse_query("users | posts")
    assert err.value.step_index == 1


def test_unknown_attribute_rejected():
    with pytest.raises((QuerySyntaxError, QueryValidationError), match="attribute"):
        parse_query("users | filter(shoe_size > 4)")


def test_from_node_source():
    chain = parse_query('from_node("n0003") | filter(verified = true)')
    assert chain.source == SourceNode("n0003")
    assert chain.steps[0].params["value"] is True


def test_expand_requires_populated_input():
    with pytest.raises(QueryValidationError) as err:
        parse_query("expand(users)")
    assert err.value.step_index == 0


def test_pretty_print_canonical():
    chain = parse_query('posts|text_search("covid")|top_k(10, like_count, desc)')
    assert pretty_print(chain) == 'posts | text_search("covid") | top_k(10, like_count)'


# -- generated round trip ------------------------------------------------------

_FILTERS = [("follower_count", int), ("following_count", int), ("verified", bool),
            ("like_count", int), ("retweet_count", int), ("author_id", str)]


@st.composite
def chains(draw):
    first = draw(st.sampled_from(["users", "posts", "edges"]))
    available = {"users": {Modality.T}, "posts": {Modality.X},
                 "edges": {Modality.N}}[first].copy()
    steps = [QueryStep(Op.EXPAND_MODALITY,
                       {"target": {"users": Modality.T, "posts": Modality.X,
                                   "edges": Modality.N}[first],
                        "scope": "universe"})]
    for _ in range(draw(st.integers(0, 3))):
        options = []
        if Modality.T in available:
            options.extend(["filter_t", "traverse_follows", "traverse_posts", "topk_t"])
        if Modality.X in available:
            options.extend(["filter_x", "search", "window", "topk_x"])
        if available:
            options.append("expand")
        op = draw(st.sampled_from(sorted(options)))
        if op == "filter_t":
            attr = draw(st.sampled_from(["follower_count", "following_count", "verified"]))
            if attr == "verified":
                steps.append(QueryStep(Op.FILTER_ATTR, {"attr": attr, "cmp": "=",
                                                        "value": draw(st.booleans())}))
            else:
                steps.append(QueryStep(Op.FILTER_ATTR, {
                    "attr": attr, "cmp": draw(st.sampled_from([">", ">=", "<", "<=", "=", "!="])),
                    "value": draw(st.integers(0, 10000))}))
        elif op == "filter_x":
            steps.append(QueryStep(Op.FILTER_ATTR, {
                "attr": draw(st.sampled_from(["like_count", "retweet_count", "reply_count"])),
                "cmp": draw(st.sampled_from([">", "<", "="])),
                "value": draw(st.integers(0, 500))}))
        elif op == "search":
            terms = draw(st.lists(st.sampled_from(
                ["covid", "election", "jobs", "vaccine", "rivera"]), min_size=1,
                max_size=3, unique=True))
            steps.append(QueryStep(Op.TEXT_SEARCH, {"terms": tuple(terms)}))
        elif op == "window":
            start = draw(st.integers(1577836800, 1590000000))
            steps.append(QueryStep(Op.TIME_WINDOW,
                                   {"start": float(start),
                                    "end": float(start + draw(st.integers(86400, 10000000)))}))
        elif op == "traverse_follows":
            steps.append(QueryStep(Op.TRAVERSE_EDGE, {
                "kind": EdgeKind.FOLLOWS,
                "direction": draw(st.sampled_from(["out", "in", "both"]))}))
            available |= {Modality.T, Modality.N}
        elif op == "traverse_posts":
            steps.append(QueryStep(Op.TRAVERSE_EDGE, {
                "kind": EdgeKind.POSTS,
                "direction": draw(st.sampled_from(["out", "both"]))}))
            available |= {Modality.X, Modality.N}
        elif op == "topk_t":
            steps.append(QueryStep(Op.SAMPLE_TOP_K, {
                "k": draw(st.integers(1, 50)), "order_key": "follower_count",
                "descending": draw(st.booleans())}))
        elif op == "topk_x":
            steps.append(QueryStep(Op.SAMPLE_TOP_K, {
                "k": draw(st.integers(1, 100)),
                "order_key": draw(st.sampled_from(["like_count", "created_at"])),
                "descending": draw(st.booleans())}))
        else:
            target = draw(st.sampled_from([Modality.T, Modality.X, Modality.N]))
            steps.append(QueryStep(Op.EXPAND_MODALITY, {"target": target,
                                                        "scope": "linked"}))
            available.add(target)
    return QueryChain(steps=tuple(steps), source=SourceAll())


@given(chains())
@settings(max_examples=200, deadline=None)
def test_parser_round_trip(chain):
    assert parse_query(pretty_print(chain)) == chain
