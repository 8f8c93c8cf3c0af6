import random

import pytest

from agentsight.datastore import (Edge, EdgeKind, Modality,
                                  PostRecord, SnapshotRegistry, Subset, UserRecord,
                                  build_snapshot)
from agentsight.query import (Op, QueryChain, QueryStep, SourceAll, execute_chain,
                              execute_step, link_subset, parse_query)

from .oracles import oracle_chain, oracle_step


@pytest.fixture(scope="module")
def toy():
    registry = SnapshotRegistry()
    users = [
        UserRecord("u1", 0.0, 100, 2, True),
        UserRecord("u2", 0.0, 5, 1, False),
    ]
    posts = [
        PostRecord("p1", "u1", 100.0, "covid wave", like_count=3),
        PostRecord("p2", "u2", 200.0, "election", like_count=9),
    ]
    edges = [
        Edge("e1", "u1", "u2", EdgeKind.FOLLOWS),
        Edge("e2", "u1", "p1", EdgeKind.POSTS, at=100.0),
        Edge("e3", "u1", "p2", EdgeKind.POSTS, at=200.0),
    ]
    return build_snapshot(users, posts, edges, registry=registry)


def test_text_search_direct_containment(toy):
    subset = toy.full_subset()
    step = QueryStep(Op.TEXT_SEARCH, {"terms": ("covid",)})
    out = execute_step(step, toy, subset)
    assert out.X == {"p1"}


def test_traverse_posts_adjacency(toy):
    subset = Subset(snapshot_id=toy.snapshot_id, T=frozenset({"u1"}))
    step = QueryStep(Op.TRAVERSE_EDGE, {"kind": EdgeKind.POSTS, "direction": "out"})
    out = execute_step(step, toy, subset)
    assert out.X == {"p1", "p2"}
    assert out.N == {"e2", "e3"}
    assert out.T == {"u1"}


def test_empty_input_not_an_error(toy):
    step = QueryStep(Op.TEXT_SEARCH, {"terms": ("covid",)})
    out = execute_step(step, toy, toy.empty_subset())
    assert out.is_empty()


def test_link_subset_author(toy):
    subset = Subset(snapshot_id=toy.snapshot_id, X=frozenset({"p1"}))
    out = link_subset(subset, Modality.T, toy)
    assert out.T == {"u1"}


def test_link_subset_edges_among_users(toy):
    subset = Subset(snapshot_id=toy.snapshot_id, T=frozenset({"u1", "u2"}))
    out = link_subset(subset, Modality.N, toy)
    assert out.N == {"e1"}


def test_execute_chain_single_filter(toy):
    chain = parse_query("users | filter(verified = true)")
    res = execute_chain(chain, toy)
    assert res.subset.T == {"u1"}
    assert res.step_stats[-1]["T"] == 1


def test_execute_chain_empty_propagation(toy):
    chain = parse_query('posts | text_search("nothinghere") | top_k(5, like_count)')
    res = execute_chain(chain, toy)
    assert res.subset.X == frozenset()


# -- randomized oracle equivalence ------------------------------------------------

_SEARCH_TOKENS = ["covid", "lockdown", "vaccine", "economy", "jobs", "rivera",
                  "chen", "election", "healthcare", "virus", "nosuch"]


def _random_step(rng: random.Random, available: set[Modality]) -> QueryStep | None:
    options = []
    if Modality.T in available:
        options += ["filter_t", "topk_t", "trav_follows", "trav_posts_out",
                    "trav_retweets_out", "trav_mentions_in"]
    if Modality.X in available:
        options += ["filter_x", "search", "window", "topk_x", "trav_posts_in",
                    "trav_replies", "trav_mentions_out"]
    if available:
        options += ["expand_t", "expand_x", "expand_n"]
    if not options:
        return None
    choice = rng.choice(options)
    if choice == "filter_t":
        attr = rng.choice(["follower_count", "following_count", "verified"])
        if attr == "verified":
            return QueryStep(Op.FILTER_ATTR, {"attr": attr, "cmp": "=",
                                              "value": rng.random() < 0.5})
        return QueryStep(Op.FILTER_ATTR, {"attr": attr,
                                          "cmp": rng.choice([">", ">=", "<", "<=", "!="]),
                                          "value": rng.randint(0, 4000)})
    if choice == "filter_x":
        return QueryStep(Op.FILTER_ATTR, {
            "attr": rng.choice(["like_count", "retweet_count", "reply_count"]),
            "cmp": rng.choice([">", "<", ">="]), "value": rng.randint(0, 600)})
    if choice == "search":
        k = rng.randint(1, 3)
        return QueryStep(Op.TEXT_SEARCH,
                         {"terms": tuple(rng.sample(_SEARCH_TOKENS, k))})
    if choice == "window":
        start = rng.uniform(1577836800, 1592000000)
        return QueryStep(Op.TIME_WINDOW, {"start": start,
                                          "end": start + rng.uniform(86400, 5e6)})
    if choice == "topk_t":
        return QueryStep(Op.SAMPLE_TOP_K, {"k": rng.randint(1, 200),
                                           "order_key": "follower_count",
                                           "descending": rng.random() < 0.5})
    if choice == "topk_x":
        return QueryStep(Op.SAMPLE_TOP_K, {
            "k": rng.randint(1, 400),
            "order_key": rng.choice(["like_count", "retweet_count", "created_at"]),
            "descending": rng.random() < 0.5})
    kind_dir = {
        "trav_follows": (EdgeKind.FOLLOWS, rng.choice(["out", "in", "both"])),
        "trav_posts_out": (EdgeKind.POSTS, "out"),
        "trav_posts_in": (EdgeKind.POSTS, "in"),
        "trav_retweets_out": (EdgeKind.RETWEETS, "out"),
        "trav_replies": (EdgeKind.REPLIES, rng.choice(["out", "in", "both"])),
        "trav_mentions_out": (EdgeKind.MENTIONS, "out"),
        "trav_mentions_in": (EdgeKind.MENTIONS, "in"),
    }
    if choice in kind_dir:
        kind, direction = kind_dir[choice]
        return QueryStep(Op.TRAVERSE_EDGE, {"kind": kind, "direction": direction})
    target = {"expand_t": Modality.T, "expand_x": Modality.X,
              "expand_n": Modality.N}[choice]
    return QueryStep(Op.EXPAND_MODALITY, {"target": target, "scope": "linked"})


def _produced(step: QueryStep) -> set[Modality]:
    from agentsight.query.model import step_io
    return step_io(step)[1]


def random_chain(rng: random.Random, max_depth: int = 4) -> QueryChain:
    first_kw = rng.choice(["users", "posts", "edges"])
    target = {"users": Modality.T, "posts": Modality.X, "edges": Modality.N}[first_kw]
    steps = [QueryStep(Op.EXPAND_MODALITY, {"target": target, "scope": "universe"})]
    available = {target}
    for _ in range(rng.randint(0, max_depth - 1)):
        step = _random_step(rng, available)
        if step is None:
            break
        steps.append(step)
        available |= _produced(step)
    return QueryChain(steps=tuple(steps), source=SourceAll())


def test_case_two_chain_matches_oracle_fold(mini_snapshot):
    chain = parse_query(
        'posts | text_search("covid") | time_window(2020-01-01, 2020-07-01)')
    engine = execute_chain(chain, mini_snapshot).subset
    want = oracle_chain(chain, mini_snapshot)
    assert (engine.T, engine.X, engine.N) == (want.T, want.X, want.N)
    assert len(engine.X) == 2500


def test_top_k_tie_break_by_ascending_id():
    registry = SnapshotRegistry()
    users = [UserRecord(f"u{i}", 0.0, 7, 1, False) for i in range(5)]
    posts = [PostRecord(f"p{i}", "u0", float(i), "x", like_count=42) for i in range(6)]
    snap = build_snapshot(users, posts, [], registry=registry)
    out = execute_step(QueryStep(Op.SAMPLE_TOP_K,
                                 {"k": 3, "order_key": "like_count",
                                  "descending": True}),
                       snap, snap.full_subset())
    assert sorted(out.X) == ["p0", "p1", "p2"]  # equal scores: lowest ids win
    out2 = execute_step(QueryStep(Op.SAMPLE_TOP_K,
                                  {"k": 2, "order_key": "follower_count",
                                   "descending": False}),
                        snap, snap.full_subset())
    assert sorted(out2.T) == ["u0", "u1"]


def test_200_random_chains_match_oracle(mini_snapshot):
    rng = random.Random(424242)
    mismatches = 0
    for trial in range(200):
        chain = random_chain(rng)
        engine = execute_chain(chain, mini_snapshot).subset
        oracle = oracle_chain(chain, mini_snapshot)
        if (engine.T, engine.X, engine.N) != (oracle.T, oracle.X, oracle.N):
            mismatches += 1
    assert mismatches == 0


def test_200_random_single_steps_match_oracle(mini_snapshot):
    rng = random.Random(99)
    full = mini_snapshot.full_subset()
    some = Subset(snapshot_id=mini_snapshot.snapshot_id,
                  T=frozenset(sorted(mini_snapshot.users)[::3]),
                  X=frozenset(sorted(mini_snapshot.posts)[::5]),
                  N=frozenset(sorted(mini_snapshot.edges)[::7]))
    for trial in range(200):
        subset = full if trial % 2 == 0 else some
        step = _random_step(rng, {Modality.T, Modality.X, Modality.N})
        assert step is not None
        engine = execute_step(step, mini_snapshot, subset)
        oracle = oracle_step(step, mini_snapshot, subset)
        assert (engine.T, engine.X, engine.N) == (oracle.T, oracle.X, oracle.N)


def test_monotonicity_properties(mini_snapshot):
    rng = random.Random(7)
    filter_ops = (Op.FILTER_ATTR, Op.TEXT_SEARCH, Op.TIME_WINDOW, Op.SAMPLE_TOP_K)
    for _ in range(120):
        chain = random_chain(rng)
        current = mini_snapshot.empty_subset()
        for step in chain.steps:
            out = execute_step(step, mini_snapshot, current)
            if step.operation in filter_ops:
                assert out.T <= current.T or out.X <= current.X
                # untouched modalities unchanged
                from agentsight.query.model import step_io
                touched = step_io(step)[0]
                for m in Modality:
                    if m not in touched:
                        assert out.ids(m) == current.ids(m)
            else:
                assert current.T <= out.T and current.X <= out.X and current.N <= out.N
            current = out


def test_link_subset_matches_closure_oracle(mini_snapshot):
    rng = random.Random(13)
    for _ in range(30):
        t = frozenset(rng.sample(sorted(mini_snapshot.users), rng.randint(0, 40)))
        x = frozenset(rng.sample(sorted(mini_snapshot.posts), rng.randint(0, 60)))
        subset = Subset(snapshot_id=mini_snapshot.snapshot_id, T=t, X=x)
        for modality in Modality:
            got = link_subset(subset, modality, mini_snapshot)
            want = oracle_step(
                QueryStep(Op.EXPAND_MODALITY, {"target": modality, "scope": "linked"}),
                mini_snapshot, subset)
            assert (got.T, got.X, got.N) == (want.T, want.X, want.N)
