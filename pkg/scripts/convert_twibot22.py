#!/usr/bin/env python3
"""Convert a TwiBot-22-style dump into the engine's ingest formats.

Expected input directory:
    user.json            list of Twitter-API-v2 user objects
    tweet_*.json         list(s) of tweet objects (JSON array or JSONL)
    edge.csv             source_id,relation,target_id

Relations map as: following -> follows(src->dst), followers -> flipped
follows, post/own -> posts, retweeted -> retweets, replied_to -> replies,
mentioned -> mentions. Unknown relations are counted and skipped.

Usage:
    python3 scripts/convert_twibot22.py IN_DIR OUT_DIR [--max-users N]
        [--max-tweets N]
"""

from __future__ import annotations

import argparse
import csv
import json
from pathlib import Path

RELATION_MAP = {
    "following": ("follows", False),
    "followers": ("follows", True),   # flipped: follower -> followee
    "follow": ("follows", False),
    "post": ("posts", False),
    "own": ("posts", False),
    "retweeted": ("retweets", False),
    "replied_to": ("replies", False),
    "mentioned": ("mentions", False),
}


def _iter_json_records(path: Path):
    with path.open(encoding="utf-8") as fh:
        head = fh.read(1)
        fh.seek(0)
        if head == "[":
            yield from json.load(fh)
        else:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)


def convert(in_dir: Path, out_dir: Path, max_users: int | None,
            max_tweets: int | None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)

    user_ids: set[str] = set()
    with (out_dir / "users.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "created_at", "follower_count",
                         "following_count", "verified", "description"])
        for i, u in enumerate(_iter_json_records(in_dir / "user.json")):
            if max_users is not None and i >= max_users:
                break
            metrics = u.get("public_metrics") or {}
            uid = str(u["id"])
            user_ids.add(uid)
            writer.writerow([
                uid,
                u.get("created_at") or "1970-01-01T00:00:00Z",
                metrics.get("followers_count") or 0,
                metrics.get("following_count") or 0,
                "true" if u.get("verified") else "false",
                (u.get("description") or "").replace("\n", " "),
            ])
    print(f"users: {len(user_ids)}")

    tweet_ids: set[str] = set()
    n_tweets = 0
    with (out_dir / "posts.jsonl").open("w", encoding="utf-8") as out:
        for tweet_file in sorted(in_dir.glob("tweet*.json")):
            for t in _iter_json_records(tweet_file):
                if max_tweets is not None and n_tweets >= max_tweets:
                    break
                author = str(t.get("author_id") or "")
                if author not in user_ids:
                    continue
                metrics = t.get("public_metrics") or {}
                tid = str(t["id"])
                tweet_ids.add(tid)
                n_tweets += 1
                out.write(json.dumps({
                    "post_id": tid,
                    "author_id": author,
                    "created_at": t.get("created_at") or "1970-01-01T00:00:00Z",
                    "text": t.get("text") or "",
                    "like_count": metrics.get("like_count") or 0,
                    "retweet_count": metrics.get("retweet_count") or 0,
                    "reply_count": metrics.get("reply_count") or 0,
                }, sort_keys=True) + "\n")
    print(f"posts: {n_tweets}")

    kept = 0
    skipped: dict[str, int] = {}
    known = user_ids | tweet_ids
    edge_path = in_dir / "edge.csv"
    with edge_path.open(newline="", encoding="utf-8") as src, \
            (out_dir / "edges.csv").open("w", newline="", encoding="utf-8") as dst:
        reader = csv.DictReader(src)
        writer = csv.writer(dst)
        writer.writerow(["src_id", "dst_id", "kind", "at"])
        for row in reader:
            relation = (row.get("relation") or "").strip()
            mapping = RELATION_MAP.get(relation)
            if mapping is None:
                skipped[relation] = skipped.get(relation, 0) + 1
                continue
            kind, flipped = mapping
            a = str(row.get("source_id") or "").strip()
            b = str(row.get("target_id") or "").strip()
            if flipped:
                a, b = b, a
            if a in known and b in known:
                writer.writerow([a, b, kind, ""])
                kept += 1
    print(f"edges: {kept} kept; skipped relations: "
          f"{dict(sorted(skipped.items())) or 'none'}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("in_dir", type=Path)
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--max-users", type=int, default=None)
    parser.add_argument("--max-tweets", type=int, default=None)
    args = parser.parse_args()
    convert(args.in_dir, args.out_dir, args.max_users, args.max_tweets)


if __name__ == "__main__":
    main()
