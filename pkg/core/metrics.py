#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
📊 Metrics
클라이언트별 테스트 정확도, 클라이언트 간 집계, 정답 클러스터 대비 그래프 복원 점수
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ShapeError
from core.model import ClientModel, forward_features
from core.numkernels import Mat, cosine


@dataclass
class MetricRow:
    """metrics.csv 한 행. 측정하지 않은 칸은 None (빈 칸으로 기록)"""

    round: int
    client: int
    loss_total: Optional[float] = None
    loss_cont: Optional[float] = None
    loss_ce: Optional[float] = None
    loss_proto: Optional[float] = None
    loss_uni: Optional[float] = None
    acc: Optional[float] = None
    degree: Optional[float] = None
    contacts: int = 0


@dataclass
class RunResult:
    """run_experiment 결과 묶음"""

    rows: List[MetricRow]
    acc_mean: float
    acc_std: float
    per_client_acc: List[float]
    final_weights: Mat
    weight_snapshots: Dict[int, Mat]
    comm: Dict[str, Any]
    config: Dict[str, Any]
    seed: int
    graph_recovery: float
    classifier_similarity: Mat
    embeddings: List[Tuple[int, int, float, float]] = field(default_factory=list)
    state: Any = None

    def summary(self) -> Dict[str, Any]:
        """summary.json 본문 (state 제외)"""
        return {
            "seed": self.seed,
            "acc_mean": self.acc_mean,
            "acc_std": self.acc_std,
            "per_client_acc": list(self.per_client_acc),
            "graph_recovery": self.graph_recovery,
            "comm": self.comm,
            "final_weights": self.final_weights.tolist(),
            "classifier_similarity": self.classifier_similarity.tolist(),
            "config": self.config,
        }


def accuracy(m: ClientModel, test_x, test_y) -> float:
    """argmax logits == label 인 비율 (클래스 전체 [K] 에 대한 argmax)"""
    test_y = np.asarray(test_y)
    if test_y.size == 0:
        raise ShapeError("accuracy needs a nonempty test set")
    _, _, logits = forward_features(m, np.atleast_2d(np.asarray(test_x, dtype=np.float64)))
    return float(np.mean(np.argmax(logits, axis=1) == test_y))


def graph_recovery(w, clusters: Sequence[int]) -> float:
    """각 행에서 같은 클러스터 (자기 포함) 에 놓인 질량의 클라이언트 평균"""
    w = np.asarray(w, dtype=np.float64)
    labels = np.asarray(clusters)
    if w.shape != (labels.size, labels.size):
        raise ShapeError(f"weight matrix {w.shape} does not match {labels.size} cluster labels")
    same = labels[:, None] == labels[None, :]
    return float(np.mean(np.sum(w * same, axis=1)))


def mean_std(values: Sequence[float]) -> Tuple[float, float]:
    """평균과 모집단 표준편차"""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return 0.0, 0.0
    return float(arr.mean()), float(arr.std())


def classifier_similarity_matrix(models: Sequence[ClientModel]) -> Mat:
    """평탄화한 분류기 사이의 M×M 코사인 유사도"""
    vecs = [m.classifier_vector() for m in models]
    n = len(vecs)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = cosine(vecs[i], vecs[j])
    return out


def embedding_projection(z, components: int = 2, iters: int = 200) -> Mat:
    """
    중심화한 잠재 벡터를 power iteration 으로 구한 주성분 방향에 사영

    부호는 각 방향의 절댓값 최대 성분이 양수가 되도록 고정한다.

    Returns:
        (n, components) 좌표
    """
    z = np.asarray(z, dtype=np.float64)
    centered = z - z.mean(axis=0)
    cov = centered.T @ centered / max(len(z), 1)
    rng = np.random.default_rng(0)
    directions = []
    for _ in range(components):
        v = rng.normal(size=cov.shape[0])
        for _ in range(iters):
            for d in directions:
                v -= np.dot(v, d) * d
            nxt = cov @ v
            norm = np.linalg.norm(nxt)
            if norm == 0.0:
                break
            v = nxt / norm
        for d in directions:
            v -= np.dot(v, d) * d
        n = np.linalg.norm(v)
        v = v / n if n > 0 else np.zeros_like(v)
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        directions.append(v)
    return centered @ np.stack(directions, axis=1)
