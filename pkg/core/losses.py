#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
📉 Loss Terms
두 뷰 배치 위에서 계산하는 네 가지 손실 항과 그 합성

- l_cont : 샘플 대 샘플 supervised contrastive loss (Q 에 대한 합)
- l_ce   : 두 뷰 모두에 적용하는 cross-entropy
- l_proto: 샘플 대 프로토타입 contrastive loss (1/|Q| 평균)
- l_uni  : 프로토타입 간 uniformity loss

각 항은 값과 함께 입력(정규화된 projection, logits, ξ)에 대한 해석적 기울기를 돌려준다.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.errors import NonFiniteLossError, ShapeError
from core.numkernels import Mat, log_softmax, normalize_rows, normalize_rows_backward

CE_REDUCTIONS = ("mean", "sum")


@dataclass
class LossConfig:
    """손실 항 on/off 스위치와 temperature"""

    use_cont: bool = True
    use_uni: bool = True
    use_proto: bool = True
    use_ce: bool = True
    tau: float = 100.0
    ce_reduction: str = "mean"

    def validate(self) -> List[str]:
        errors = []
        if not self.tau > 0:
            errors.append(f"loss.tau must be > 0 (got {self.tau})")
        if self.ce_reduction not in CE_REDUCTIONS:
            errors.append(f"loss.ce_reduction must be one of {CE_REDUCTIONS} (got {self.ce_reduction!r})")
        return errors

    @property
    def needs_projections(self) -> bool:
        return self.use_cont or self.use_proto


@dataclass
class ViewBatch:
    """
    2B 개의 뷰 (샘플 q 의 두 뷰는 같은 라벨)

    projections 는 ℓ2 정규화된 p̂ 행. 정규화가 필요 없는 설정에서는 None.
    """

    projections: Optional[Mat]
    latents: Mat
    logits: Mat
    labels: np.ndarray
    proj_norms: Optional[Mat] = None

    @classmethod
    def from_raw(cls, p: Mat, z: Mat, logits: Mat, labels, normalize: bool = True) -> "ViewBatch":
        labels = np.asarray(labels, dtype=np.int64)
        if not normalize:
            return cls(projections=None, latents=z, logits=logits, labels=labels)
        norms = np.linalg.norm(p, axis=1, keepdims=True)
        return cls(
            projections=normalize_rows(p, "projection"),
            latents=z,
            logits=logits,
            labels=labels,
            proj_norms=norms,
        )

    @property
    def size(self) -> int:
        return int(self.labels.shape[0])

    def _require_projections(self) -> Mat:
        if self.projections is None:
            raise ShapeError("this ViewBatch was built without normalized projections")
        return self.projections


@dataclass
class LossTerms:
    """항별 값. 비활성 항은 0"""

    cont: float = 0.0
    ce: float = 0.0
    proto: float = 0.0
    uni: float = 0.0

    @property
    def total(self) -> float:
        return self.cont + self.ce + self.proto + self.uni

    def as_dict(self) -> Dict[str, float]:
        return {"cont": self.cont, "ce": self.ce, "proto": self.proto, "uni": self.uni}


# ==================== 항별 값 + 기울기 ====================

def cont_value_grad(p_hat: Mat, labels: np.ndarray, tau: float) -> Tuple[float, Mat]:
    """l_cont 와 dl/dp̂"""
    n = p_hat.shape[0]
    if n < 2:
        raise ShapeError(f"l_cont needs at least 2 views, got {n}")
    sim = p_hat @ p_hat.T / tau
    np.fill_diagonal(sim, -np.inf)
    log_prob = log_softmax(sim)

    positives = labels[:, None] == labels[None, :]
    np.fill_diagonal(positives, False)
    n_pos = positives.sum(axis=1)
    anchors = n_pos > 0
    pos_weight = np.zeros((n, n))
    pos_weight[anchors] = positives[anchors] / n_pos[anchors, None]

    value = -float(np.sum(pos_weight * np.where(positives, log_prob, 0.0)))

    g = np.exp(log_prob) * anchors[:, None] - pos_weight
    d_p_hat = (g + g.T) @ p_hat / tau
    return value, d_p_hat


def ce_value_grad(logits: Mat, labels: np.ndarray, reduction: str = "sum") -> Tuple[float, Mat]:
    """l_ce 와 dl/dlogits"""
    n = logits.shape[0]
    log_prob = log_softmax(logits)
    rows = np.arange(n)
    value = -float(np.sum(log_prob[rows, labels]))
    grad = np.exp(log_prob)
    grad[rows, labels] -= 1.0
    if reduction == "mean":
        value /= n
        grad /= n
    return value, grad


def proto_value_grad(p_hat: Mat, labels: np.ndarray, xi: Mat, tau: float) -> Tuple[float, Mat, Mat]:
    """l_proto 와 (dl/dp̂, dl/dξ)"""
    xi_norms = np.linalg.norm(xi, axis=1, keepdims=True)
    xi_hat = normalize_rows(xi, "prototype")
    n = p_hat.shape[0]
    scores = p_hat @ xi_hat.T / tau
    log_prob = log_softmax(scores)
    rows = np.arange(n)
    value = -float(np.mean(log_prob[rows, labels]))

    d_scores = np.exp(log_prob)
    d_scores[rows, labels] -= 1.0
    d_scores /= n
    d_p_hat = d_scores @ xi_hat / tau
    d_xi_hat = d_scores.T @ p_hat / tau
    return value, d_p_hat, normalize_rows_backward(xi_hat, xi_norms, d_xi_hat)


def uni_value_grad(xi: Mat) -> Tuple[float, Mat]:
    """l_uni 와 dl/dξ (순서쌍 (k, r), r ≠ k 모두 포함)"""
    k = xi.shape[0]
    xi_norms = np.linalg.norm(xi, axis=1, keepdims=True)
    xi_hat = normalize_rows(xi, "prototype")
    gram = xi_hat @ xi_hat.T
    off_diag = 1.0 - np.eye(k)
    value = float(np.sum(gram * off_diag)) / k
    d_xi_hat = (2.0 / k) * (off_diag @ xi_hat)
    return value, normalize_rows_backward(xi_hat, xi_norms, d_xi_hat)


# ==================== 공개 연산 ====================

def l_cont(vb: ViewBatch, tau: float) -> float:
    return cont_value_grad(vb._require_projections(), vb.labels, tau)[0]


def l_ce(vb: ViewBatch, reduction: str = "sum") -> float:
    """두 뷰에 대한 cross-entropy. 기본은 식 그대로의 합"""
    return ce_value_grad(vb.logits, vb.labels, reduction)[0]


def l_proto(vb: ViewBatch, xi: Mat, tau: float) -> float:
    return proto_value_grad(vb._require_projections(), vb.labels, xi, tau)[0]


def l_uni(xi: Mat) -> float:
    return uni_value_grad(np.asarray(xi, dtype=np.float64))[0]


def total_loss(vb: ViewBatch, xi: Mat, cfg: LossConfig) -> float:
    """활성화된 항을 단위 가중치로 더한 l̃"""
    return total_loss_and_grads(vb, xi, cfg)[0].total


def total_loss_and_grads(
    vb: ViewBatch, xi: Mat, cfg: LossConfig
) -> Tuple[LossTerms, Optional[Mat], Mat, Mat]:
    """
    l̃ 의 항별 값과 기울기

    Returns:
        (LossTerms, dl/dp̂ 또는 None, dl/dlogits, dl/dξ)
    """
    xi = np.asarray(xi, dtype=np.float64)
    terms = LossTerms()
    d_p_hat = None
    d_logits = np.zeros_like(vb.logits)
    d_xi = np.zeros_like(xi)

    if cfg.needs_projections:
        d_p_hat = np.zeros_like(vb._require_projections())
    if cfg.use_cont:
        terms.cont, g = cont_value_grad(vb.projections, vb.labels, cfg.tau)
        d_p_hat += g
    if cfg.use_ce:
        terms.ce, d_logits = ce_value_grad(vb.logits, vb.labels, cfg.ce_reduction)
    if cfg.use_proto:
        terms.proto, g_p, g_xi = proto_value_grad(vb.projections, vb.labels, xi, cfg.tau)
        d_p_hat += g_p
        d_xi += g_xi
    if cfg.use_uni:
        terms.uni, g_xi = uni_value_grad(xi)
        d_xi += g_xi

    for name, value in terms.as_dict().items():
        if not np.isfinite(value):
            raise NonFiniteLossError(name, value, terms.as_dict())
    return terms, d_p_hat, d_logits, d_xi
