#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
💾 Artifact Writers
metrics.csv, summary.json, 가중치 행렬 CSV, 임베딩 CSV, 모델 체크포인트

산출물에는 타임스탬프를 넣지 않는다 (같은 설정 + 시드 → 같은 바이트).
"""

import csv
import json
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy as np

from core.metrics import MetricRow, RunResult
from core.model import save_params

METRICS_HEADER = [
    "round", "client", "loss_total", "loss_cont", "loss_ce", "loss_proto", "loss_uni", "acc", "degree", "contacts",
]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_metrics_csv(rows: Iterable[MetricRow], path: Path) -> Path:
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(METRICS_HEADER)
        for row in rows:
            writer.writerow([_cell(getattr(row, name)) for name in METRICS_HEADER])
    return path


def write_matrix_csv(matrix, path: Path) -> Path:
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        for row in np.asarray(matrix):
            writer.writerow([repr(float(v)) for v in row])
    return path


def write_summary_json(summary: Dict, path: Path) -> Path:
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_embeddings_csv(embeddings, path: Path) -> Path:
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["client", "label", "pc1", "pc2"])
        for client, label, a, b in embeddings:
            writer.writerow([client, label, repr(a), repr(b)])
    return path


def write_run_artifacts(result: RunResult, out_dir, save_models: bool = False) -> List[Path]:
    """
    실행 결과 전체를 out_dir 에 기록

    Returns:
        기록한 파일 경로 목록
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        write_metrics_csv(result.rows, out / "metrics.csv"),
        write_summary_json(result.summary(), out / "summary.json"),
        write_matrix_csv(result.final_weights, out / "weights_final.csv"),
        write_embeddings_csv(result.embeddings, out / "embeddings_final.csv"),
    ]
    for t, matrix in sorted(result.weight_snapshots.items()):
        written.append(write_matrix_csv(matrix, out / f"weights_round_{t}.csv"))
    if save_models and result.state is not None:
        for c in result.state.clients:
            written.extend(save_params(c.model, c.xi, out / "models" / f"client_{c.index:02d}"))
    return written


def read_metrics_csv(path) -> List[Dict[str, Optional[str]]]:
    """metrics.csv 를 dict 목록으로 (빈 칸은 None)"""
    with Path(path).open(newline="", encoding="utf-8") as f:
        return [{k: (v if v != "" else None) for k, v in row.items()} for row in csv.DictReader(f)]
