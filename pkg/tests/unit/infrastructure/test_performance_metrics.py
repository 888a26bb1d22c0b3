"""Tests for the performance metrics system."""
import concurrent.futures
from datetime import datetime
from unittest.mock import patch

import pytest

from fgfield.infrastructure.monitoring import (
    MetricPoint,
    MetricSeries,
    PerformanceMetrics,
    measure_artifact_write_time,
    measure_service_operation_time,
)


@pytest.fixture
def metrics():
    """Create a fresh PerformanceMetrics instance for each test."""
    PerformanceMetrics._instance = None
    return PerformanceMetrics()


def test_singleton_pattern(metrics):
    """Test that PerformanceMetrics follows the singleton pattern."""
    assert PerformanceMetrics() is metrics


def test_metric_point_creation():
    """Test creation of individual metric points."""
    point = MetricPoint(timestamp=datetime.now(), value=1.5, labels={"test": "label"})
    assert point.value == 1.5
    assert point.labels == {"test": "label"}


def test_metric_series_operations():
    """Test metric series aggregation and statistics."""
    series = MetricSeries(name="test_metric")
    for value in [1.0, 2.0, 3.0]:
        series.add_point(value)
    assert series.total_count == 3
    assert series.total_value == 6.0
    assert series.average == 2.0
    assert MetricSeries(name="empty").average == 0.0


@patch("time.perf_counter")
def test_timing_accuracy(mock_clock, metrics):
    """Test that timing measurements are accurate."""
    mock_clock.side_effect = [0.0, 1.5]

    @measure_service_operation_time(service="KernelService", operation="kernel")
    def evaluate():
        return 42

    assert evaluate() == 42
    series = metrics.get_metric_series("service_operation_time")
    assert len(series.points) == 1
    assert series.points[0].value == 1.5
    assert series.points[0].labels == {"service": "KernelService", "operation": "kernel"}


def test_error_handling(metrics):
    """Test that metrics are recorded even when operations fail."""
    @measure_service_operation_time(service="GreenService", operation="green")
    def failing():
        raise ValueError("diverges")

    with pytest.raises(ValueError):
        failing()
    series = metrics.get_metric_series("service_operation_time_error")
    assert series.total_count == 1
    assert series.points[0].labels["error"] == "ValueError"


def test_summary_groups_by_operation(metrics):
    """The manifest summary keys rows by service.operation and flags failures."""
    metrics.record_metric("service_operation_time", 1.0, {"service": "A", "operation": "x"})
    metrics.record_metric("service_operation_time", 3.0, {"service": "A", "operation": "x"})
    metrics.record_metric("service_operation_time_error", 0.5, {"service": "A", "operation": "x", "error": "E"})
    summary = metrics.summary()
    assert summary["A.x"] == {"count": 2, "total_seconds": 4.0, "average_seconds": 2.0}
    assert summary["A.x[error]"]["count"] == 1


def test_artifact_write_labels(metrics):
    @measure_artifact_write_time("csv")
    def write():
        return "done"

    write()
    series = metrics.get_metric_series("artifact_write_time")
    assert series.points[0].labels == {"service": "storage", "operation": "write_csv"}


def test_reset(metrics):
    metrics.record_metric("m", 1.0)
    metrics.reset()
    assert metrics.get_all_metrics() == {}


def test_concurrent_recording(metrics):
    """Recording from several threads loses no points."""
    def record(i):
        metrics.record_metric("concurrent", float(i))

    with concurrent.futures.ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(record, range(200)))
    assert metrics.get_metric_series("concurrent").total_count == 200
