"""Embedded tri-modal store: tabular users, post texts, typed edges.

The three modalities live in one immutable snapshot and are linked by shared
identifiers (user ids, post ids). Replaces external graph/text/relational
databases with in-process structures sized for desk-scale datasets.
"""

from __future__ import annotations

import bisect
import csv
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import IngestError, StaleSnapshotError
from .textnorm import tokenize

Scalar = str | int | float | bool


class EdgeKind(str, Enum):
    FOLLOWS = "follows"    # user -> user
    POSTS = "posts"        # user -> post (authorship)
    RETWEETS = "retweets"  # user -> post
    REPLIES = "replies"    # post -> post
    MENTIONS = "mentions"  # post -> user

    @property
    def src_is_user(self) -> bool:
        return self in (EdgeKind.FOLLOWS, EdgeKind.POSTS, EdgeKind.RETWEETS)

    @property
    def dst_is_user(self) -> bool:
        return self in (EdgeKind.FOLLOWS, EdgeKind.MENTIONS)


class Modality(str, Enum):
    T = "T"  # tabular users
    X = "X"  # text posts
    N = "N"  # network edges


def parse_utc(value: str, *, strict: bool = False) -> float:
    """ISO-8601 string to UTC epoch seconds. Naive inputs are assumed UTC
    unless strict mode, which rejects them."""
    raw = value.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise IngestError(f"unparseable timestamp {value!r}") from exc
    if dt.tzinfo is None:
        if strict:
            raise IngestError(f"timezone-less timestamp {value!r} rejected in strict mode")
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).timestamp()


def format_utc(epoch: float) -> str:
    dt = datetime.fromtimestamp(epoch, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    created_at: float
    follower_count: int
    following_count: int
    verified: bool
    description: str = ""
    extra: Mapping[str, Scalar] = field(default_factory=dict)


@dataclass(frozen=True)
class PostRecord:
    post_id: str
    author_id: str
    created_at: float
    text: str
    like_count: int = 0
    retweet_count: int = 0
    reply_count: int = 0


@dataclass(frozen=True)
class Edge:
    edge_id: str
    src_id: str
    dst_id: str
    kind: EdgeKind
    at: float | None = None


@dataclass(frozen=True)
class Subset:
    """S = {T, X, N}: three independent ID sets referencing one snapshot."""

    snapshot_id: str
    T: frozenset[str] = frozenset()
    X: frozenset[str] = frozenset()
    N: frozenset[str] = frozenset()

    def ids(self, modality: Modality) -> frozenset[str]:
        return getattr(self, modality.value)

    def replace(self, modality: Modality, ids: Iterable[str]) -> "Subset":
        kw = {modality.value: frozenset(ids)}
        return Subset(
            snapshot_id=self.snapshot_id,
            **{m.value: kw.get(m.value, self.ids(m)) for m in Modality},
        )

    def is_empty(self) -> bool:
        return not (self.T or self.X or self.N)


@dataclass
class IngestReport:
    user_count: int = 0
    post_count: int = 0
    edge_count: int = 0
    rejected: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "users": self.user_count,
            "posts": self.post_count,
            "edges": self.edge_count,
            "rejected": self.rejected,
            "warnings": self.warnings,
        }


@dataclass(frozen=True)
class IngestOptions:
    strict: bool = False


class DatasetSnapshot:
    """Immutable after construction; all secondary indexes built eagerly."""

    def __init__(self, users: Iterable[UserRecord], posts: Iterable[PostRecord],
                 edges: Iterable[Edge]):
        self.users: dict[str, UserRecord] = {u.user_id: u for u in sorted(users, key=lambda u: u.user_id)}
        self.posts: dict[str, PostRecord] = {p.post_id: p for p in sorted(posts, key=lambda p: p.post_id)}
        self.edges: dict[str, Edge] = {e.edge_id: e for e in sorted(edges, key=lambda e: e.edge_id)}

        self.posts_by_author: dict[str, tuple[str, ...]] = {}
        by_author: dict[str, list[str]] = {}
        for p in self.posts.values():
            by_author.setdefault(p.author_id, []).append(p.post_id)
        self.posts_by_author = {a: tuple(sorted(v)) for a, v in by_author.items()}

        self._time_index: list[tuple[float, str]] = sorted(
            (p.created_at, p.post_id) for p in self.posts.values()
        )

        self.edges_by_kind: dict[EdgeKind, tuple[str, ...]] = {}
        self.edges_by_src: dict[str, tuple[str, ...]] = {}
        self.edges_by_dst: dict[str, tuple[str, ...]] = {}
        by_kind: dict[EdgeKind, list[str]] = {}
        by_src: dict[str, list[str]] = {}
        by_dst: dict[str, list[str]] = {}
        for e in self.edges.values():
            by_kind.setdefault(e.kind, []).append(e.edge_id)
            by_src.setdefault(e.src_id, []).append(e.edge_id)
            by_dst.setdefault(e.dst_id, []).append(e.edge_id)
        self.edges_by_kind = {k: tuple(sorted(v)) for k, v in by_kind.items()}
        self.edges_by_src = {k: tuple(sorted(v)) for k, v in by_src.items()}
        self.edges_by_dst = {k: tuple(sorted(v)) for k, v in by_dst.items()}

        index: dict[str, set[str]] = {}
        for p in self.posts.values():
            for tok in set(tokenize(p.text)):
                index.setdefault(tok, set()).add(p.post_id)
        self.text_index: dict[str, tuple[str, ...]] = {
            tok: tuple(sorted(ids)) for tok, ids in sorted(index.items())
        }
        self._vocab: list[str] = sorted(self.text_index)

        self.manifest = self._build_manifest()
        self.snapshot_id: str = self.manifest["snapshot_id"]

    def _build_manifest(self) -> dict:
        h = hashlib.sha256()
        for u in self.users.values():
            h.update(json.dumps([u.user_id, u.created_at, u.follower_count, u.following_count,
                                 u.verified, u.description, sorted(u.extra.items())],
                                sort_keys=True).encode())
        for p in self.posts.values():
            h.update(json.dumps([p.post_id, p.author_id, p.created_at, p.text,
                                 p.like_count, p.retweet_count, p.reply_count]).encode())
        for e in self.edges.values():
            h.update(json.dumps([e.edge_id, e.src_id, e.dst_id, e.kind.value, e.at]).encode())
        digest = h.hexdigest()
        return {
            "snapshot_id": f"snap-{digest[:12]}",
            "users": len(self.users),
            "posts": len(self.posts),
            "edges": len(self.edges),
            "content_sha256": digest,
        }

    # -- lookups ------------------------------------------------------------

    def posts_in_window(self, start: float, end: float) -> list[str]:
        """Post ids with created_at in [start, end), in (time, id) order."""
        lo = bisect.bisect_left(self._time_index, (start, ""))
        hi = bisect.bisect_left(self._time_index, (end, ""))
        return [pid for _, pid in self._time_index[lo:hi]]

    def posts_with_token(self, token: str) -> tuple[str, ...]:
        return self.text_index.get(token.lower(), ())

    def posts_with_prefix(self, prefix: str) -> list[str]:
        prefix = prefix.lower()
        lo = bisect.bisect_left(self._vocab, prefix)
        out: set[str] = set()
        for i in range(lo, len(self._vocab)):
            if not self._vocab[i].startswith(prefix):
                break
            out.update(self.text_index[self._vocab[i]])
        return sorted(out)

    def full_subset(self) -> Subset:
        return Subset(
            snapshot_id=self.snapshot_id,
            T=frozenset(self.users),
            X=frozenset(self.posts),
            N=frozenset(self.edges),
        )

    def empty_subset(self) -> Subset:
        return Subset(snapshot_id=self.snapshot_id)


class SnapshotRegistry:
    """Process-local registry; Subset operations refuse stale snapshot ids."""

    def __init__(self) -> None:
        self._snapshots: dict[str, DatasetSnapshot] = {}

    def register(self, snapshot: DatasetSnapshot) -> DatasetSnapshot:
        self._snapshots[snapshot.snapshot_id] = snapshot
        return snapshot

    def get(self, snapshot_id: str) -> DatasetSnapshot:
        try:
            return self._snapshots[snapshot_id]
        except KeyError:
            raise StaleSnapshotError(f"unknown snapshot {snapshot_id!r}") from None

    def ids(self) -> list[str]:
        return sorted(self._snapshots)


REGISTRY = SnapshotRegistry()


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise IngestError(message)


def _read_users_csv(path: Path, options: IngestOptions, report: IngestReport) -> list[UserRecord]:
    known = {"user_id", "created_at", "follower_count", "following_count", "verified", "description"}
    users: list[UserRecord] = []
    seen: set[str] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _require(reader.fieldnames is not None and "user_id" in reader.fieldnames,
                 f"{path.name}: missing user_id column")
        for row_no, row in enumerate(reader, start=2):
            uid = (row.get("user_id") or "").strip()
            _require(bool(uid), f"{path.name}:{row_no}: empty user_id")
            _require(uid not in seen, f"{path.name}:{row_no}: duplicate user_id {uid!r}")
            seen.add(uid)
            extra = {k: v for k, v in row.items() if k not in known and v not in (None, "")}
            users.append(UserRecord(
                user_id=uid,
                created_at=parse_utc(row.get("created_at") or "1970-01-01T00:00:00Z",
                                     strict=options.strict),
                follower_count=int(row.get("follower_count") or 0),
                following_count=int(row.get("following_count") or 0),
                verified=(row.get("verified") or "false").strip().lower() in ("true", "1", "yes"),
                description=row.get("description") or "",
                extra=extra,
            ))
    return users


def _read_posts_jsonl(path: Path, options: IngestOptions, report: IngestReport,
                      user_ids: set[str]) -> list[PostRecord]:
    posts: list[PostRecord] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for row_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"{path.name}:{row_no}: invalid JSON ({exc})") from exc
            pid = str(obj.get("post_id") or "").strip()
            _require(bool(pid), f"{path.name}:{row_no}: empty post_id")
            _require(pid not in seen, f"{path.name}:{row_no}: duplicate post_id {pid!r}")
            seen.add(pid)
            author = str(obj.get("author_id") or "")
            if author not in user_ids:
                msg = f"{path.name}:{row_no}: author {author!r} not in users"
                if options.strict:
                    raise IngestError(msg)
                report.rejected.append({"file": path.name, "row": row_no, "reason": msg})
                continue
            posts.append(PostRecord(
                post_id=pid,
                author_id=author,
                created_at=parse_utc(str(obj.get("created_at")), strict=options.strict),
                text=str(obj.get("text") or ""),
                like_count=int(obj.get("like_count") or 0),
                retweet_count=int(obj.get("retweet_count") or 0),
                reply_count=int(obj.get("reply_count") or 0),
            ))
    return posts


def _endpoint_ok(eid: str, is_user: bool, user_ids: set[str], post_ids: set[str]) -> bool:
    return eid in (user_ids if is_user else post_ids)


def _read_edges_csv(path: Path, options: IngestOptions, report: IngestReport,
                    user_ids: set[str], post_ids: set[str]) -> list[Edge]:
    rows: list[tuple[str, str, EdgeKind, float | None]] = []
    seen: set[tuple] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _require(reader.fieldnames is not None and {"src_id", "dst_id", "kind"} <= set(reader.fieldnames),
                 f"{path.name}: needs src_id,dst_id,kind columns")
        for row_no, row in enumerate(reader, start=2):
            try:
                kind = EdgeKind(row["kind"].strip())
            except ValueError:
                raise IngestError(f"{path.name}:{row_no}: unknown edge kind {row['kind']!r}") from None
            src, dst = row["src_id"].strip(), row["dst_id"].strip()
            at = parse_utc(row["at"], strict=options.strict) if row.get("at") else None
            key = (src, dst, kind, at)
            if key in seen:
                report.rejected.append({"file": path.name, "row": row_no,
                                        "reason": f"duplicate edge {key}"})
                continue
            if not (_endpoint_ok(src, kind.src_is_user, user_ids, post_ids)
                    and _endpoint_ok(dst, kind.dst_is_user, user_ids, post_ids)):
                msg = (f"{path.name}:{row_no}: dangling endpoint for "
                       f"{kind.value} edge {src!r}->{dst!r}")
                if options.strict:
                    raise IngestError(msg)
                report.rejected.append({"file": path.name, "row": row_no, "reason": msg})
                continue
            seen.add(key)
            rows.append((src, dst, kind, at))
    rows.sort(key=lambda r: (r[2].value, r[0], r[1], r[3] if r[3] is not None else -1.0))
    width = max(6, len(str(len(rows))))
    return [Edge(edge_id=f"e{i:0{width}d}", src_id=s, dst_id=d, kind=k, at=at)
            for i, (s, d, k, at) in enumerate(rows)]


def ingest(users_path: str | Path, posts_path: str | Path, edges_path: str | Path,
           options: IngestOptions = IngestOptions(),
           registry: SnapshotRegistry = REGISTRY) -> tuple[DatasetSnapshot, IngestReport]:
    """Build a snapshot from a users CSV, a posts JSONL, and an edges CSV.

    Non-strict mode logs dangling references as rejected rows; strict mode
    raises on the first one, naming file and row.
    """
    report = IngestReport()
    users = _read_users_csv(Path(users_path), options, report)
    user_ids = {u.user_id for u in users}
    posts = _read_posts_jsonl(Path(posts_path), options, report, user_ids)
    post_ids = {p.post_id for p in posts}
    edges = _read_edges_csv(Path(edges_path), options, report, user_ids, post_ids)
    snapshot = DatasetSnapshot(users, posts, edges)
    report.user_count = len(snapshot.users)
    report.post_count = len(snapshot.posts)
    report.edge_count = len(snapshot.edges)
    registry.register(snapshot)
    return snapshot, report


def build_snapshot(users: Iterable[UserRecord], posts: Iterable[PostRecord],
                   edges: Iterable[Edge], registry: SnapshotRegistry = REGISTRY) -> DatasetSnapshot:
    """In-memory constructor for tests and generators; validates linkage."""
    users = list(users)
    posts = list(posts)
    edges = list(edges)
    user_ids = {u.user_id for u in users}
    if len(user_ids) != len(users):
        raise IngestError("duplicate user_id")
    post_ids = {p.post_id for p in posts}
    if len(post_ids) != len(posts):
        raise IngestError("duplicate post_id")
    for p in posts:
        if p.author_id not in user_ids:
            raise IngestError(f"post {p.post_id}: unknown author {p.author_id}")
    for e in edges:
        if not (_endpoint_ok(e.src_id, e.kind.src_is_user, user_ids, post_ids)
                and _endpoint_ok(e.dst_id, e.kind.dst_is_user, user_ids, post_ids)):
            raise IngestError(f"edge {e.edge_id}: dangling endpoint")
    snapshot = DatasetSnapshot(users, posts, edges)
    registry.register(snapshot)
    return snapshot


def resolve(subset: Subset, modality: Modality,
            registry: SnapshotRegistry = REGISTRY) -> list[UserRecord | PostRecord | Edge]:
    """Records for the subset's ids in one modality, sorted by id."""
    snap = registry.get(subset.snapshot_id)
    table: Mapping[str, UserRecord | PostRecord | Edge]
    table = {Modality.T: snap.users, Modality.X: snap.posts, Modality.N: snap.edges}[modality]
    out = []
    for rid in sorted(subset.ids(modality)):
        try:
            out.append(table[rid])
        except KeyError:
            raise StaleSnapshotError(
                f"id {rid!r} not present in snapshot {subset.snapshot_id}") from None
    return out


def subset_stats(subset: Subset, registry: SnapshotRegistry = REGISTRY) -> dict:
    """Cardinalities plus the [min, max] created_at range over X (if any)."""
    snap = registry.get(subset.snapshot_id)
    stats: dict = {"T": len(subset.T), "X": len(subset.X), "N": len(subset.N)}
    if subset.X:
        times = [snap.posts[pid].created_at for pid in subset.X]
        stats["time_range"] = [format_utc(min(times)), format_utc(max(times))]
    return stats


def iter_post_tokens(snap: DatasetSnapshot, post_ids: Iterable[str]) -> Iterator[tuple[str, list[str]]]:
    for pid in sorted(post_ids):
        yield pid, tokenize(snap.posts[pid].text)
