"""Activity-connectivity maps, behavioral classes and contagion scores from
social-interaction event logs."""

from .contagion import (
    AdoptionEvent,
    Mode,
    ReproductionScore,
    adoption_events,
    adoption_timeseries,
    class_conditional,
    per_class_engagement,
    population_r0,
    user_reproduction,
)
from .events import Event, EventKind, FollowerSnapshot, SeedRecord, SeedSet, validate_event
from .ingest import (
    AggregateStore,
    TweetTally,
    UserAggregate,
    finalize,
    fold,
    fold_snapshot,
    load_seed_set,
    merge,
    parse_event_line,
)
from .metrics import (
    DacGrid,
    DacPoint,
    DynClass,
    ProbDist,
    SummaryStats,
    activity_rate,
    classify,
    connectivity_growth,
    dac_grid,
    dac_points,
    filter_active,
    probability_distribution,
    summary_stats,
)
from .timeline import Granularity, TimeSeries, suspension_timeline, volume_timeseries

__version__ = "0.1.0"
