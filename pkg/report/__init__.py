"""
📋 Report Package
콘솔 리포트와 실행 산출물 기록

- visuals.py: 배너, 정확도 막대, 가중치 히트맵
- writers.py: metrics.csv / summary.json / weights CSV / 임베딩 CSV
"""

from .visuals import BANNER, format_run_report, get_accuracy_bar, render_weight_heatmap
from .writers import METRICS_HEADER, read_metrics_csv, write_run_artifacts

__all__ = [
    'BANNER',
    'format_run_report',
    'get_accuracy_bar',
    'render_weight_heatmap',
    'METRICS_HEADER',
    'read_metrics_csv',
    'write_run_artifacts',
]
