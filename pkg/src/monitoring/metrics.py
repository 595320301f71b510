"""
Prometheus metrics for link simulation runs.

Metrics live in a dedicated registry so that a run can be dumped to a
textfile for node-exporter style collection.
"""
from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

REGISTRY = CollectorRegistry()

SWEEP_POINTS = Counter(
    'oam_link_sweep_points_total',
    'Total number of evaluated sweep points',
    ['command', 'status'],
    registry=REGISTRY
)

POINT_LATENCY = Histogram(
    'oam_link_point_latency_seconds',
    'Evaluation time of a single sweep point in seconds',
    ['command'],
    buckets=(0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0),
    registry=REGISTRY
)

SER_TRIALS = Counter(
    'oam_link_ser_trials_total',
    'Total number of Monte-Carlo symbol vectors simulated',
    ['mode'],
    registry=REGISTRY
)

EQUIVALENCE_RESIDUAL = Gauge(
    'oam_link_equivalence_residual',
    'Most recent relative residual of the BePre circulant equivalence',
    registry=REGISTRY
)


def track_sweep_point(command: str, status: str, duration: float):
    """Track one evaluated sweep point and its latency."""
    SWEEP_POINTS.labels(
        command=command,
        status=status
    ).inc()

    POINT_LATENCY.labels(
        command=command
    ).observe(duration)


def track_ser_trials(mode: str, trials: int):
    """Track simulated Monte-Carlo trials."""
    SER_TRIALS.labels(mode=mode).inc(trials)


def update_equivalence_residual(residual: float):
    """Record the latest equivalence residual."""
    EQUIVALENCE_RESIDUAL.set(residual)


def write_metrics(path: str):
    """Write the registry in Prometheus text format."""
    write_to_textfile(path, REGISTRY)
