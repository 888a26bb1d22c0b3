from .performance_metrics import (
    MetricPoint,
    MetricSeries,
    PerformanceMetrics,
    measure_artifact_write_time,
    measure_service_operation_time,
    measure_time,
)

__all__ = [
    'MetricPoint',
    'MetricSeries',
    'PerformanceMetrics',
    'measure_artifact_write_time',
    'measure_service_operation_time',
    'measure_time',
]
