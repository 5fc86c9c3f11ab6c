"""MovieLens ingestion, evaluation-sample construction, and popularity bucketing.

Works on the standard 25M-style CSVs (``ratings.csv``: userId,movieId,rating,
timestamp; ``movies.csv``: movieId,title,genres with ``|`` separators) but is
agnostic to scale; fixtures use tiny synthetic files with the same schema.
"""

from __future__ import annotations

import csv
import logging
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .core import Item
from .errors import DataError
from .simulation import EvalSample

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InteractionEvent:
    user_id: str
    item_id: str
    rating: float
    timestamp: int


@dataclass(frozen=True)
class InteractionLog:
    """Per-user interaction sequences, each sorted by timestamp."""

    by_user: dict[str, tuple[InteractionEvent, ...]]
    dropped_ratings: int = 0

    def __post_init__(self) -> None:
        for user_id, events in self.by_user.items():
            stamps = [e.timestamp for e in events]
            if stamps != sorted(stamps):
                raise DataError(f"events for user {user_id} are not time-ordered")


class PopularityLevel(str, Enum):
    TOP_10 = "top10"
    TOP_10_20 = "top10-20"
    TOP_20_30 = "top20-30"
    TOP_30_50 = "top30-50"
    BOTTOM_50 = "bottom50"


def load_movielens(ratings_path: str | Path, movies_path: str | Path) -> tuple[InteractionLog, dict[str, Item]]:
    """Parse the two CSVs into an interaction log and an item catalog.

    Ratings referencing unknown movies are dropped (and counted); malformed
    rows fail with their line number.
    """
    raw_items: dict[str, tuple[str, frozenset[str]]] = {}
    with open(movies_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if lineno == 1 and row and row[0].lower() == "movieid":
                continue
            if len(row) != 3 or not row[0].strip():
                raise DataError(f"{movies_path}:{lineno}: expected movieId,title,genres, got {row!r}")
            movie_id, title, genres_field = row
            genres = frozenset(
                g.strip().casefold() for g in genres_field.split("|") if g.strip() and g.strip() != "(no genres listed)"
            )
            raw_items[movie_id.strip()] = (title.strip(), genres)

    counts: dict[str, int] = {item_id: 0 for item_id in raw_items}
    by_user: dict[str, list[InteractionEvent]] = {}
    dropped = 0
    with open(ratings_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if lineno == 1 and row and row[0].lower() == "userid":
                continue
            if len(row) != 4:
                raise DataError(f"{ratings_path}:{lineno}: expected userId,movieId,rating,timestamp, got {row!r}")
            try:
                event = InteractionEvent(
                    user_id=row[0].strip(),
                    item_id=row[1].strip(),
                    rating=float(row[2]),
                    timestamp=int(row[3]),
                )
            except ValueError as exc:
                raise DataError(f"{ratings_path}:{lineno}: {exc}") from None
            if event.item_id not in raw_items:
                dropped += 1
                continue
            counts[event.item_id] += 1
            by_user.setdefault(event.user_id, []).append(event)
    if dropped:
        log.warning("dropped %d ratings referencing unknown movies", dropped)

    catalog = {
        item_id: Item(id=item_id, title=title, genres=genres, interaction_count=counts[item_id])
        for item_id, (title, genres) in raw_items.items()
    }
    log_obj = InteractionLog(
        by_user={user: tuple(sorted(events, key=lambda e: e.timestamp)) for user, events in by_user.items()},
        dropped_ratings=dropped,
    )
    return log_obj, catalog


def build_samples(log: InteractionLog, catalog: Mapping[str, Item], n: int, seed: int) -> list[EvalSample]:
    """Construct evaluation samples: per user, the 20 interactions preceding
    the 21st are the browsing window and the 21st item is the target.

    The window is filtered to items sharing at least one genre with the
    target; users whose filtered history is shorter than 5 are dropped, and
    ``n`` of the remaining users are drawn uniformly with the given seed.
    """
    if n < 1:
        raise DataError("n must be >= 1")
    eligible: list[EvalSample] = []
    for user_id in sorted(log.by_user, key=_natural_key):
        events = log.by_user[user_id]
        if len(events) < 21:
            continue
        target = catalog[events[20].item_id]
        window: list[Item] = []
        seen_ids: set[str] = set()
        for event in events[:20]:
            if event.item_id not in seen_ids:
                seen_ids.add(event.item_id)
                window.append(catalog[event.item_id])
        filtered = [item for item in window if item.id != target.id and item.genres & target.genres]
        if len(filtered) < 5:
            continue
        eligible.append(
            EvalSample(sample_id=f"user-{user_id}", browsing_history=tuple(filtered), target=target)
        )
    if len(eligible) < n:
        raise DataError(f"only {len(eligible)} eligible users, need {n}")
    chosen = random.Random(seed).sample(eligible, n)
    chosen.sort(key=lambda s: _natural_key(s.sample_id))
    return chosen


def _natural_key(value: str) -> tuple:
    digits = "".join(ch for ch in value if ch.isdigit())
    return (0, int(digits), value) if digits else (1, 0, value)


def assign_popularity(catalog: Mapping[str, Item]) -> dict[str, PopularityLevel]:
    """Partition the catalog into the five popularity levels by interaction-count
    rank (ties broken by item id ascending)."""
    ranked = sorted(catalog.values(), key=lambda item: (-item.interaction_count, _natural_key(item.id)))
    n = len(ranked)
    cuts = (int(n * 0.1), int(n * 0.2), int(n * 0.3), int(n * 0.5))
    levels: dict[str, PopularityLevel] = {}
    for rank, item in enumerate(ranked, start=1):
        if rank <= cuts[0]:
            level = PopularityLevel.TOP_10
        elif rank <= cuts[1]:
            level = PopularityLevel.TOP_10_20
        elif rank <= cuts[2]:
            level = PopularityLevel.TOP_20_30
        elif rank <= cuts[3]:
            level = PopularityLevel.TOP_30_50
        else:
            level = PopularityLevel.BOTTOM_50
        levels[item.id] = level
    return levels


def sample_by_level(
    samples_pool: Sequence[EvalSample],
    levels: Mapping[str, PopularityLevel],
    per_level: int = 20,
    seed: int = 0,
) -> dict[PopularityLevel, list[EvalSample]]:
    """Draw ``per_level`` samples for each popularity level of the target item."""
    grouped: dict[PopularityLevel, list[EvalSample]] = {level: [] for level in PopularityLevel}
    for sample in sorted(samples_pool, key=lambda s: s.sample_id):
        grouped[levels[sample.target.id]].append(sample)
    rng = random.Random(seed)
    out: dict[PopularityLevel, list[EvalSample]] = {}
    for level in PopularityLevel:
        pool = grouped[level]
        if len(pool) < per_level:
            raise DataError(f"level {level.value}: {len(pool)} eligible samples, need {per_level} (short {per_level - len(pool)})")
        picked = rng.sample(pool, per_level)
        picked.sort(key=lambda s: s.sample_id)
        out[level] = picked
    return out
