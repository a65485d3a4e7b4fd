#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🗂️ Data Heterogeneity Scenarios
M 명의 클라이언트를 C 개 클러스터로 묶고 클러스터마다 클래스 부분집합을 배정하는
가우시안 blob 합성 데이터 생성기

- 시나리오 1: 서로소 클래스 집합, 클래스당 샘플 수 고정
- 시나리오 2: 겹치는 클래스 창, 클래스당 샘플 수 고정
- 시나리오 3: 1 과 같고 (client, class) 별 샘플 수를 [lo, hi] 에서 균등 추출
- 시나리오 4: 2 와 같고 샘플 수 무작위
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ScenarioError

logger = logging.getLogger(__name__)

SCENARIO_IDS = (1, 2, 3, 4)

# SeedSequence spawn_key 첫 성분 (스트림 구분용)
MEANS_STREAM = 0
CLIENT_DATA_STREAM = 1


@dataclass
class ScenarioSpec:
    """합성 데이터 시나리오 설정"""

    scenario_id: int = 1
    num_clients: int = 10
    num_clusters: int = 2
    num_classes: int = 10
    samples_per_class: int = 300
    sample_range: List[int] = field(default_factory=lambda: [100, 300])
    test_per_class: int = 15
    input_dim: int = 32
    class_sep: float = 2.0
    within_sigma: float = 1.0
    seed: Optional[int] = None

    @property
    def overlapping(self) -> bool:
        return self.scenario_id in (2, 4)

    @property
    def random_counts(self) -> bool:
        return self.scenario_id in (3, 4)

    def validate(self) -> List[str]:
        errors = []
        if self.scenario_id not in SCENARIO_IDS:
            errors.append(f"scenario.scenario_id must be one of {SCENARIO_IDS} (got {self.scenario_id})")
        for name in ("num_clients", "num_clusters", "num_classes", "samples_per_class", "test_per_class", "input_dim"):
            if getattr(self, name) < 1:
                errors.append(f"scenario.{name} must be positive (got {getattr(self, name)})")
        for name in ("class_sep", "within_sigma"):
            if not getattr(self, name) > 0:
                errors.append(f"scenario.{name} must be positive (got {getattr(self, name)})")
        if len(self.sample_range) != 2 or not 1 <= self.sample_range[0] <= self.sample_range[1]:
            errors.append(f"scenario.sample_range must be [lo, hi] with 1 <= lo <= hi (got {self.sample_range})")
        if self.num_clients >= 1 and self.num_clusters >= 1:
            if self.num_clients % self.num_clusters != 0:
                errors.append(
                    f"scenario: num_clusters ({self.num_clusters}) must divide num_clients ({self.num_clients})"
                )
            try:
                cluster_class_sets(self)
            except ScenarioError as exc:
                errors.append(f"scenario: {exc}")
        return errors


@dataclass
class ClientDataset:
    """클라이언트 하나의 로컬 train/test 분할"""

    client_id: int
    cluster: int
    class_set: Tuple[int, ...]
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray

    @property
    def num_train(self) -> int:
        return int(self.train_y.shape[0])

    def class_counts(self, split: str = "train") -> Dict[int, int]:
        labels = self.train_y if split == "train" else self.test_y
        values, counts = np.unique(labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}


def cluster_class_sets(spec: ScenarioSpec) -> List[Tuple[int, ...]]:
    """
    클러스터별 클래스 부분집합

    - 서로소 (1/3): 폭 ⌊K/C⌋ 블록
    - 겹침 (2/4), C=2: 양 끝에 붙은 폭 ⌊K/C⌋+1 창 (K=10 → {0..5}, {4..9})
    - 겹침 (2/4), C>2: 폭 ⌊K/C⌋+2 창이 ⌊K/C⌋ 씩 전진, K 를 넘으면 wraparound
    """
    k, c = spec.num_classes, spec.num_clusters
    if c == 1:
        return [tuple(range(k))]
    if k < c:
        raise ScenarioError(f"num_classes ({k}) must be >= num_clusters ({c}) so every cluster gets a class")
    width = k // c
    if not spec.overlapping:
        return [tuple(range(i * width, (i + 1) * width)) for i in range(c)]
    if c == 2:
        return [tuple(range(0, width + 1)), tuple(range(k - width - 1, k))]
    if width + 2 > k:
        raise ScenarioError(f"overlapping windows of width {width + 2} do not fit in {k} classes")
    return [tuple(sorted((i * width + r) % k for r in range(width + 2))) for i in range(c)]


def class_means(spec: ScenarioSpec, seed: int) -> np.ndarray:
    """반지름 class_sep 구면 위에서 균등하게 뽑은 전역 클래스 평균 (K, d)"""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(MEANS_STREAM,)))
    raw = rng.normal(size=(spec.num_classes, spec.input_dim))
    return spec.class_sep * raw / np.linalg.norm(raw, axis=1, keepdims=True)


def _resolve_seed(spec: ScenarioSpec, seed: Optional[int]) -> int:
    if spec.seed is not None:
        return int(spec.seed)
    return 0 if seed is None else int(seed)


def generate(spec: ScenarioSpec, seed: Optional[int] = None) -> Tuple[List[ClientDataset], List[int]]:
    """
    시나리오 데이터 생성

    Args:
        spec: 시나리오 설정 (spec.seed 가 있으면 seed 인자보다 우선)
        seed: 마스터 시드

    Returns:
        (클라이언트 데이터셋 목록, 클라이언트별 정답 클러스터 라벨)
    """
    errors = spec.validate()
    if errors:
        raise ScenarioError("; ".join(errors))
    master = _resolve_seed(spec, seed)
    means = class_means(spec, master)
    class_sets = cluster_class_sets(spec)
    per_cluster = spec.num_clients // spec.num_clusters
    lo, hi = spec.sample_range

    datasets: List[ClientDataset] = []
    clusters: List[int] = []
    for i in range(spec.num_clients):
        cluster = i // per_cluster
        classes = class_sets[cluster]
        # 클라이언트마다 독립 스트림 → 클라이언트를 늘려도 기존 스트림은 그대로
        rng = np.random.default_rng(np.random.SeedSequence(master, spawn_key=(CLIENT_DATA_STREAM, i)))
        train_x, train_y, test_x, test_y = [], [], [], []
        for k in classes:
            n_train = int(rng.integers(lo, hi + 1)) if spec.random_counts else spec.samples_per_class
            train_x.append(means[k] + spec.within_sigma * rng.normal(size=(n_train, spec.input_dim)))
            train_y.append(np.full(n_train, k, dtype=np.int64))
            test_x.append(means[k] + spec.within_sigma * rng.normal(size=(spec.test_per_class, spec.input_dim)))
            test_y.append(np.full(spec.test_per_class, k, dtype=np.int64))
        datasets.append(
            ClientDataset(
                client_id=i,
                cluster=cluster,
                class_set=tuple(classes),
                train_x=np.concatenate(train_x),
                train_y=np.concatenate(train_y),
                test_x=np.concatenate(test_x),
                test_y=np.concatenate(test_y),
            )
        )
        clusters.append(cluster)

    logger.info(
        "scenario %d: %d clients, %d clusters, class sets %s",
        spec.scenario_id, spec.num_clients, spec.num_clusters, [list(s) for s in class_sets],
    )
    return datasets, clusters


def overlap_matrix(datasets: Sequence[ClientDataset]) -> np.ndarray:
    """(i, j) = |C_i ∩ C_j| / |C_i ∪ C_j|, 대각은 1"""
    sets = [set(d.class_set) for d in datasets]
    m = len(sets)
    out = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            union = sets[i] | sets[j]
            out[i, j] = out[j, i] = len(sets[i] & sets[j]) / len(union) if union else 0.0
    return out


# ==================== CSV 내보내기 / 가져오기 ====================

def export_csv(datasets: Sequence[ClientDataset], path) -> Path:
    """샘플당 한 행: client, cluster, split, label, x0..x{d-1}"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dim = datasets[0].train_x.shape[1] if datasets else 0
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["client", "cluster", "split", "label", *[f"x{k}" for k in range(dim)]])
        for d in datasets:
            for split, xs, ys in (("train", d.train_x, d.train_y), ("test", d.test_x, d.test_y)):
                for x, y in zip(xs, ys):
                    writer.writerow([d.client_id, d.cluster, split, int(y), *[repr(float(v)) for v in x]])
    return path


def import_csv(path) -> List[ClientDataset]:
    """export_csv 의 역. class_set 은 train 라벨의 합집합으로 복원"""
    rows: Dict[int, Dict] = {}
    with Path(path).open(newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        next(reader)
        for rec in reader:
            cid, cluster, split, label = int(rec[0]), int(rec[1]), rec[2], int(rec[3])
            entry = rows.setdefault(cid, {"cluster": cluster, "train": ([], []), "test": ([], [])})
            xs, ys = entry[split]
            xs.append([float(v) for v in rec[4:]])
            ys.append(label)

    datasets = []
    for cid in sorted(rows):
        entry = rows[cid]
        tx, ty = entry["train"]
        vx, vy = entry["test"]
        datasets.append(
            ClientDataset(
                client_id=cid,
                cluster=entry["cluster"],
                class_set=tuple(sorted(set(ty))),
                train_x=np.asarray(tx, dtype=np.float64),
                train_y=np.asarray(ty, dtype=np.int64),
                test_x=np.asarray(vx, dtype=np.float64),
                test_y=np.asarray(vy, dtype=np.int64),
            )
        )
    return datasets
