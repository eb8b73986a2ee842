"""Glue shared by the CLI and tests: seed-user points and class assignment."""

from __future__ import annotations

from .events import SeedSet
from .ingest import AggregateStore
from .metrics import classify_points, dac_points, filter_active


def active_seed_points(store: AggregateStore, seeds: SeedSet) -> list:
    """DAC points for seed users who both mention and are mentioned, in user-id order."""
    aggs = [store.users[u] for u in sorted(seeds) if u in store.users]
    return dac_points(filter_active(aggs))


def seed_classes(store: AggregateStore, seeds: SeedSet):
    points = active_seed_points(store, seeds)
    return points, classify_points(points)
