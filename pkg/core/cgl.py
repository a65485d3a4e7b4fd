#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🕸️ Collaborative Graph Learning (CGL)
분류기 가중치로 과제 유사도를 추론하고, 정칙화된 경사하강 + 단체 사영으로
자기 행 w_i 를 갱신한다.
"""

import logging
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence

import numpy as np

from core.errors import ShapeError, StochasticityError
from core.numkernels import SIMPLEX_TOL, Vec, as_vec, cosine, project_to_simplex

logger = logging.getLogger(__name__)

GRAPH_NORMS = ("l2", "l1")


@dataclass
class CGLConfig:
    """그래프 학습 하이퍼파라미터와 ablation 스위치"""

    warmup: int = 100
    steps: int = 1
    lr: float = 0.1
    mu1: float = 0.5
    mu2: float = 0.1
    beta: float = 0.5
    eps: float = 1e-8
    use_gamma: bool = True
    use_similarity: bool = True
    norm: str = "l2"
    prune_threshold: float = 1e-6

    def validate(self) -> List[str]:
        errors = []
        if self.warmup < 0:
            errors.append(f"cgl.warmup must be >= 0 (got {self.warmup})")
        if self.steps < 1:
            errors.append(f"cgl.steps must be >= 1 (got {self.steps})")
        for name in ("lr", "mu1", "mu2", "beta", "prune_threshold"):
            if getattr(self, name) < 0:
                errors.append(f"cgl.{name} must be >= 0 (got {getattr(self, name)})")
        if not self.eps > 0:
            errors.append(f"cgl.eps must be > 0 (got {self.eps})")
        if self.norm not in GRAPH_NORMS:
            errors.append(f"cgl.norm must be one of {GRAPH_NORMS} (got {self.norm!r})")
        return errors


@dataclass
class SimilarityVector:
    """
    s_i: 이웃이 아닌 항목은 0 이고 valid_mask 로 손실에서 제외된다.
    자기 자신 항목은 항상 -1.
    """

    s: Vec
    valid_mask: np.ndarray
    self_index: int

    @property
    def size(self) -> int:
        return int(self.s.shape[0])


def check_row_stochastic(w, tol: float = SIMPLEX_TOL, who: str = "weight vector") -> None:
    """w ≥ 0, Σw = 1 확인"""
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < 0) or not np.isfinite(w).all() or abs(float(w.sum()) - 1.0) > tol:
        raise StochasticityError(f"{who} is not row-stochastic: sum={w.sum()!r}, min={w.min()!r}")


def neighbors(w, self_index: int, threshold: float = 1e-6) -> List[int]:
    """N_i = {j ≠ i : w_ij > threshold}"""
    w = np.asarray(w)
    return [j for j in range(w.shape[0]) if j != self_index and w[j] > threshold]


def confidence_vector(sample_counts: Sequence[int], use_gamma: bool = True) -> Vec:
    """γ_j = n_j / Σ n. ablation 시 균등 1/M"""
    counts = np.asarray(sample_counts, dtype=np.float64)
    if counts.size == 0 or np.any(counts < 0) or counts.sum() <= 0:
        raise ShapeError(f"sample counts must be nonnegative with a positive total: {list(sample_counts)}")
    if not use_gamma:
        return np.full(counts.size, 1.0 / counts.size)
    return counts / counts.sum()


def infer_similarity(
    phi_self,
    phis_neighbors: Mapping[int, Vec],
    self_index: int,
    num_clients: int,
) -> SimilarityVector:
    """s_ij = -cos(φ_i, φ_j) (이웃), s_ii = -1, 나머지는 마스킹"""
    phi_self = as_vec(phi_self)
    s = np.zeros(num_clients)
    mask = np.zeros(num_clients, dtype=bool)
    for j, phi_j in phis_neighbors.items():
        phi_j = as_vec(phi_j)
        if phi_j.shape != phi_self.shape:
            raise ShapeError(f"classifier of client {j} has {phi_j.size} scalars, expected {phi_self.size}")
        s[j] = -cosine(phi_self, phi_j)
        mask[j] = True
    s[self_index] = -1.0
    mask[self_index] = True
    return SimilarityVector(s=s, valid_mask=mask, self_index=self_index)


def uniform_similarity(neighbor_ids: Sequence[int], self_index: int, num_clients: int) -> SimilarityVector:
    """유사도 ablation: 모든 이웃을 자기 자신과 같은 -1 로 취급"""
    s = np.zeros(num_clients)
    mask = np.zeros(num_clients, dtype=bool)
    for j in [*neighbor_ids, self_index]:
        s[j] = -1.0
        mask[j] = True
    return SimilarityVector(s=s, valid_mask=mask, self_index=self_index)


def _degree(w: Vec, sim: SimilarityVector) -> float:
    others = sim.valid_mask.copy()
    others[sim.self_index] = False
    return float(np.sum(w[others]))


def graph_loss(
    w,
    sim: SimilarityVector,
    gamma,
    mu1: float,
    mu2: float,
    beta: float,
    eps: float,
    norm: str = "l2",
) -> float:
    """μ₁ Σ_j γ_j w_j s_j + μ₂ (β‖w‖ − log(deg(i) + ε))"""
    w = as_vec(w)
    gamma = as_vec(gamma)
    valid = sim.valid_mask
    similarity_term = float(np.sum(gamma[valid] * w[valid] * sim.s[valid]))
    size = float(np.sum(np.abs(w))) if norm == "l1" else float(np.linalg.norm(w))
    regularizer = beta * size - np.log(_degree(w, sim) + eps)
    return mu1 * similarity_term + mu2 * regularizer


def graph_loss_grad(
    w,
    sim: SimilarityVector,
    gamma,
    mu1: float,
    mu2: float,
    beta: float,
    eps: float,
    norm: str = "l2",
) -> Vec:
    """graph_loss 의 w 에 대한 기울기. 마스킹된 항목은 0"""
    w = as_vec(w)
    gamma = as_vec(gamma)
    valid = sim.valid_mask
    if norm == "l1":
        size_grad = np.sign(w)
    else:
        size_grad = w / np.linalg.norm(w)
    grad = mu1 * gamma * sim.s + mu2 * beta * size_grad
    others = valid.copy()
    others[sim.self_index] = False
    grad[others] -= mu2 / (_degree(w, sim) + eps)
    grad[~valid] = 0.0
    return grad


def cgl_update(
    w,
    sim: SimilarityVector,
    gamma,
    cfg: CGLConfig,
    steps: Optional[int] = None,
) -> Vec:
    """
    E_g 번의 {w ← w − η∇l̃_g ; w ← Proj(w)}

    Args:
        w: 단체 위의 현재 행
        sim: 추론된 유사도
        gamma: 신뢰도 벡터
        cfg: 하이퍼파라미터 (cfg.lr 가 그래프 학습률 η_g)
        steps: None 이면 cfg.steps
    """
    w = as_vec(w)
    if w.shape != sim.s.shape:
        raise ShapeError(f"weight vector has {w.size} entries, similarity has {sim.size}")
    check_row_stochastic(w, who=f"w[{sim.self_index}] before CGL")
    steps = cfg.steps if steps is None else steps
    if cfg.lr == 0 or steps == 0:
        return w.copy()
    for _ in range(steps):
        g = graph_loss_grad(w, sim, gamma, cfg.mu1, cfg.mu2, cfg.beta, cfg.eps, cfg.norm)
        w = project_to_simplex(w - cfg.lr * g)
    check_row_stochastic(w, who=f"w[{sim.self_index}] after CGL")
    logger.debug("client %d CGL row: %s", sim.self_index, np.array2string(w, precision=3))
    return w
