"""Seeded synthetic mini dataset (500 users / 5,000 posts / 10,000 edges).

The generator embeds both replay scenarios deterministically:
 - 2,500 pandemic-topic posts whose weekly volume over H1 2020 is a clean
   three-phase step (10 weeks at 50, 4 weeks at 200, 12 weeks at 100), with
   a distinct vocabulary per phase;
 - 2,500 election-topic posts drawn from two disjoint issue vocabularies
   plus candidate mentions, for topic separation and stance fractions;
 - a follows graph with four planted communities and per-community hubs.

The returned manifest is the test oracle for counts and volumes."""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from .mining.types import DocTermMatrix, WeightedGraph

DAY = 86400.0
H1_START = datetime(2020, 1, 1, tzinfo=timezone.utc).timestamp()

N_USERS = 500
N_COMMUNITIES = 4
N_FOLLOWS = 3000
N_RETWEETS = 1000
N_REPLIES = 600
N_MENTIONS = 400

WEEKLY_PANDEMIC = [50] * 10 + [200] * 4 + [100] * 12  # 26 weeks, 2500 posts
N_ELECTION = 2500

PANDEMIC_VOCAB = {
    "phase1": ["outbreak", "virus", "travel", "cases", "alert", "spread",
               "warning", "cluster", "screening", "abroad"],
    "phase2": ["lockdown", "quarantine", "hospital", "masks", "ventilators",
               "deaths", "stayhome", "surge", "overwhelmed", "curfew"],
    "phase3": ["reopen", "recovery", "vaccine", "testing", "easing",
               "immunity", "normal", "phased", "antibody", "distancing"],
}

ECONOMY_VOCAB = ["economy", "jobs", "taxes", "trade", "wages", "inflation",
                 "budget", "manufacturing", "growth", "tariffs"]
HEALTHCARE_VOCAB = ["healthcare", "insurance", "hospitals", "medicare",
                    "prescription", "coverage", "doctors", "premiums",
                    "clinics", "patients"]

CANDIDATES = ["rivera", "chen"]


@dataclass
class MiniDataset:
    users_path: Path
    posts_path: Path
    edges_path: Path
    manifest: dict


def _iso(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def generate_mini_dataset(out_dir: str | Path, seed: int = 2020) -> MiniDataset:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)

    user_ids = [f"u{i:03d}" for i in range(N_USERS)]
    community = {uid: i % N_COMMUNITIES for i, uid in enumerate(user_ids)}
    hubs = {c: [uid for uid in user_ids if community[uid] == c][:5]
            for c in range(N_COMMUNITIES)}
    hub_set = {u for members in hubs.values() for u in members}

    # follows graph: 85% intra-community, hubs attract extra followers
    follows: set[tuple[str, str]] = set()
    while len(follows) < N_FOLLOWS:
        src = rng.choice(user_ids)
        c = community[src]
        same = rng.random() < 0.85
        pool_c = c if same else rng.choice([x for x in range(N_COMMUNITIES) if x != c])
        if rng.random() < 0.35:
            dst = rng.choice(hubs[pool_c])
        else:
            dst = rng.choice([u for u in user_ids if community[u] == pool_c])
        if dst != src:
            follows.add((src, dst))
    follows_list = sorted(follows)

    in_degree: dict[str, int] = {u: 0 for u in user_ids}
    for _, dst in follows_list:
        in_degree[dst] += 1

    users_rows = []
    for uid in user_ids:
        created = H1_START - rng.randint(400, 2000) * DAY
        followers = 40 + 37 * in_degree[uid] + rng.randint(0, 80)
        users_rows.append({
            "user_id": uid,
            "created_at": _iso(created),
            "follower_count": followers,
            "following_count": sum(1 for s, _ in follows_list if s == uid),
            "verified": "true" if uid in hub_set and rng.random() < 0.8 else "false",
            "description": f"synthetic account in community {community[uid]}",
            "lang": rng.choice(["en", "en", "en", "es", "de"]),
        })

    posts = []
    pandemic_ids = []
    election_ids = []
    pid = 0

    def next_pid() -> str:
        nonlocal pid
        pid += 1
        return f"p{pid:05d}"

    for week, quota in enumerate(WEEKLY_PANDEMIC):
        phase = "phase1" if week < 10 else ("phase2" if week < 14 else "phase3")
        vocab = PANDEMIC_VOCAB[phase]
        for j in range(quota):
            day = week * 7 + j % 7
            ts = H1_START + day * DAY + rng.randint(6, 23) * 3600 + rng.randint(0, 3599)
            words = [rng.choice(vocab) for _ in range(rng.randint(6, 10))]
            text = "covid " + " ".join(words)
            post_id = next_pid()
            pandemic_ids.append(post_id)
            posts.append({
                "post_id": post_id,
                "author_id": rng.choice(user_ids),
                "created_at": _iso(ts),
                "text": text,
                "like_count": rng.randint(0, 500),
                "retweet_count": rng.randint(0, 120),
                "reply_count": rng.randint(0, 40),
            })

    for j in range(N_ELECTION):
        topic = ECONOMY_VOCAB if j % 2 == 0 else HEALTHCARE_VOCAB
        day = rng.randint(0, 181)
        ts = H1_START + day * DAY + rng.randint(6, 23) * 3600 + rng.randint(0, 3599)
        words = [rng.choice(topic) for _ in range(rng.randint(6, 10))]
        text = "election " + " ".join(words)
        if rng.random() < 0.8:
            text += " " + rng.choice(CANDIDATES)
        post_id = next_pid()
        election_ids.append(post_id)
        posts.append({
            "post_id": post_id,
            "author_id": rng.choice(user_ids),
            "created_at": _iso(ts),
            "text": text,
            "like_count": rng.randint(0, 800),
            "retweet_count": rng.randint(0, 200),
            "reply_count": rng.randint(0, 60),
        })

    post_ids = [p["post_id"] for p in posts]
    post_author = {p["post_id"]: p["author_id"] for p in posts}
    post_ts = {p["post_id"]: p["created_at"] for p in posts}

    edges_rows: list[dict] = []
    for src, dst in follows_list:
        at = H1_START - rng.randint(30, 900) * DAY
        edges_rows.append({"src_id": src, "dst_id": dst, "kind": "follows",
                           "at": _iso(at)})
    for p in posts:
        edges_rows.append({"src_id": p["author_id"], "dst_id": p["post_id"],
                           "kind": "posts", "at": p["created_at"]})
    seen_rt: set[tuple[str, str]] = set()
    while len(seen_rt) < N_RETWEETS:
        target = rng.choice(post_ids)
        user = rng.choice(user_ids)
        if user != post_author[target] and (user, target) not in seen_rt:
            seen_rt.add((user, target))
            edges_rows.append({"src_id": user, "dst_id": target, "kind": "retweets",
                               "at": post_ts[target]})
    seen_rp: set[tuple[str, str]] = set()
    while len(seen_rp) < N_REPLIES:
        a, b = rng.sample(post_ids, 2)
        if post_ts[a] > post_ts[b] and (a, b) not in seen_rp:
            seen_rp.add((a, b))
            edges_rows.append({"src_id": a, "dst_id": b, "kind": "replies",
                               "at": post_ts[a]})
    seen_mn: set[tuple[str, str]] = set()
    while len(seen_mn) < N_MENTIONS:
        p = rng.choice(post_ids)
        u = rng.choice(user_ids)
        if (p, u) not in seen_mn and u != post_author[p]:
            seen_mn.add((p, u))
            edges_rows.append({"src_id": p, "dst_id": u, "kind": "mentions",
                               "at": post_ts[p]})

    users_path = out / "users.csv"
    with users_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(users_rows[0].keys()))
        writer.writeheader()
        writer.writerows(users_rows)

    posts_path = out / "posts.jsonl"
    with posts_path.open("w", encoding="utf-8") as fh:
        for p in posts:
            fh.write(json.dumps(p, sort_keys=True) + "\n")

    edges_path = out / "edges.csv"
    with edges_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["src_id", "dst_id", "kind", "at"])
        writer.writeheader()
        writer.writerows(edges_rows)

    manifest = {
        "seed": seed,
        "users": N_USERS,
        "posts": len(posts),
        "edges": len(edges_rows),
        "pandemic_posts": len(pandemic_ids),
        "election_posts": len(election_ids),
        "weekly_pandemic_volumes": list(WEEKLY_PANDEMIC),
        "phase_boundaries_weeks": [10, 14],
        "h1_start": H1_START,
        "communities": N_COMMUNITIES,
        "follows_edges": N_FOLLOWS,
        "community_of": {uid: community[uid] for uid in user_ids},
        "economy_vocab": list(ECONOMY_VOCAB),
        "healthcare_vocab": list(HEALTHCARE_VOCAB),
        "pandemic_vocab": {k: list(v) for k, v in PANDEMIC_VOCAB.items()},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True),
                                       encoding="utf-8")
    return MiniDataset(users_path=users_path, posts_path=posts_path,
                       edges_path=edges_path, manifest=manifest)


def generate_tiny_dataset(out_dir: str | Path, seed: int = 7, n_users: int = 40,
                          n_posts: int = 120, n_follows: int = 160) -> MiniDataset:
    """Small cousin of the mini dataset for fuzzing many sessions quickly."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    user_ids = [f"u{i:03d}" for i in range(n_users)]
    vocabs = [PANDEMIC_VOCAB["phase2"], ECONOMY_VOCAB, HEALTHCARE_VOCAB]

    users_rows = [{
        "user_id": uid,
        "created_at": _iso(H1_START - rng.randint(100, 900) * DAY),
        "follower_count": rng.randint(10, 3000),
        "following_count": rng.randint(5, 200),
        "verified": "true" if rng.random() < 0.1 else "false",
        "description": "tiny synthetic account",
    } for uid in user_ids]

    posts = []
    for i in range(n_posts):
        vocab = vocabs[i % len(vocabs)]
        ts = H1_START + rng.randint(0, 181) * DAY + rng.randint(0, 86399)
        posts.append({
            "post_id": f"p{i:04d}",
            "author_id": rng.choice(user_ids),
            "created_at": _iso(ts),
            "text": " ".join(rng.choice(vocab) for _ in range(rng.randint(5, 9))),
            "like_count": rng.randint(0, 300),
            "retweet_count": rng.randint(0, 50),
            "reply_count": rng.randint(0, 20),
        })

    follows: set[tuple[str, str]] = set()
    while len(follows) < n_follows:
        a, b = rng.sample(user_ids, 2)
        follows.add((a, b))
    edges_rows = [{"src_id": a, "dst_id": b, "kind": "follows",
                   "at": _iso(H1_START - rng.randint(10, 400) * DAY)}
                  for a, b in sorted(follows)]
    edges_rows += [{"src_id": p["author_id"], "dst_id": p["post_id"], "kind": "posts",
                    "at": p["created_at"]} for p in posts]

    users_path = out / "users.csv"
    with users_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(users_rows[0].keys()))
        writer.writeheader()
        writer.writerows(users_rows)
    posts_path = out / "posts.jsonl"
    with posts_path.open("w", encoding="utf-8") as fh:
        for p in posts:
            fh.write(json.dumps(p, sort_keys=True) + "\n")
    edges_path = out / "edges.csv"
    with edges_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["src_id", "dst_id", "kind", "at"])
        writer.writeheader()
        writer.writerows(edges_rows)
    manifest = {"seed": seed, "users": n_users, "posts": n_posts,
                "edges": len(edges_rows)}
    return MiniDataset(users_path=users_path, posts_path=posts_path,
                       edges_path=edges_path, manifest=manifest)


def load_karate_club() -> WeightedGraph:
    """Bundled Zachary karate-club graph (34 nodes, 78 edges)."""
    text = resources.files("agentsight.data").joinpath("karate_club.txt").read_text("utf-8")
    edges = []
    nodes: set[int] = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        a, b = (int(x) for x in line.split())
        nodes.update((a, b))
        edges.append((a, b))
    node_ids = tuple(f"m{n:02d}" for n in sorted(nodes))
    index = {n: i for i, n in enumerate(sorted(nodes))}
    return WeightedGraph(
        node_ids=node_ids,
        edges=tuple((index[a], index[b], 1.0) for a, b in edges),
    )


def make_two_topic_corpus(n_docs: int = 200, words_per_doc: int = 12,
                          seed: int = 3) -> tuple[DocTermMatrix, set[str], set[str]]:
    """Corpus drawn from two fully disjoint vocabularies; ground truth for
    topic-separation checks."""
    rng = random.Random(seed)
    vocab_a = [f"alpha{i}" for i in range(12)]
    vocab_b = [f"beta{i}" for i in range(12)]
    vocab = tuple(sorted(vocab_a + vocab_b))
    index = {w: i for i, w in enumerate(vocab)}
    doc_ids = []
    counts = []
    for d in range(n_docs):
        source = vocab_a if d % 2 == 0 else vocab_b
        row: dict[int, int] = {}
        for _ in range(words_per_doc):
            w = index[rng.choice(source)]
            row[w] = row.get(w, 0) + 1
        doc_ids.append(f"doc{d:03d}")
        counts.append(tuple(sorted(row.items())))
    dtm = DocTermMatrix(doc_ids=tuple(doc_ids), vocab=vocab, counts=tuple(counts))
    return dtm, set(vocab_a), set(vocab_b)
