#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🏋️ Personalized Model Learning (PML)
클라이언트 한 명의 로컬 학습 패스: 두 뷰 생성 → 순전파 → l̃ → 모델/프로토타입 갱신
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from core.errors import ConfigError, NonFiniteLossError, ShapeError
from core.losses import LossConfig, LossTerms
from core.model import ClientModel, backward
from core.numkernels import Mat

logger = logging.getLogger(__name__)


@dataclass
class AugmentConfig:
    """벡터 데이터용 증강: 가우시안 노이즈 후 좌표 dropout"""

    noise_sigma: float = 0.1
    dropout_p: float = 0.2

    def validate(self) -> List[str]:
        errors = []
        if self.noise_sigma < 0:
            errors.append(f"augment.noise_sigma must be >= 0 (got {self.noise_sigma})")
        if not 0 <= self.dropout_p < 1:
            errors.append(f"augment.dropout_p must be in [0, 1) (got {self.dropout_p})")
        if self.noise_sigma == 0 and self.dropout_p == 0:
            errors.append("augment: noise_sigma and dropout_p cannot both be zero (views would be identical)")
        return errors


@dataclass
class PMLConfig:
    loss: LossConfig = field(default_factory=LossConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    batch_size: int = 64


@dataclass
class OptimizerState:
    """Adam 1차/2차 모멘트 (파라미터 그룹 + ξ 와 shape 일치)"""

    first: List[np.ndarray]
    second: List[np.ndarray]
    step: int = 0


class AdamOptimizer:
    """Adam. 기본값은 lr 1e-4, β₁ 0.5, β₂ 0.999, weight decay 0"""

    def __init__(
        self,
        params: Sequence[np.ndarray],
        lr: float = 1e-4,
        beta1: float = 0.5,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = OptimizerState(
            first=[np.zeros_like(p) for p in params],
            second=[np.zeros_like(p) for p in params],
        )

    def step(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> None:
        """파라미터를 제자리(in-place)에서 갱신"""
        st = self.state
        if len(params) != len(st.first) or len(grads) != len(params):
            raise ShapeError(f"optimizer tracks {len(st.first)} tensors, got {len(params)} params / {len(grads)} grads")
        st.step += 1
        bias1 = 1.0 - self.beta1 ** st.step
        bias2 = 1.0 - self.beta2 ** st.step
        for p, g, m, v in zip(params, grads, st.first, st.second):
            if p.shape != g.shape:
                raise ShapeError(f"gradient shape {g.shape} does not match parameter {p.shape}")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)


@dataclass
class EpochReport:
    """에폭 평균 손실 (배치 평균)"""

    terms: LossTerms
    batches: int

    @property
    def loss(self) -> float:
        return self.terms.total


def make_views(x, cfg: AugmentConfig, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    x 에 독립적인 두 확률적 변환을 적용해 (x_a, x_b) 생성

    단일 벡터 (d,) 와 배치 (n, d) 모두 받는다.
    """
    errors = cfg.validate()
    if errors:
        raise ConfigError(errors)
    x = np.asarray(x, dtype=np.float64)
    return _augment(x, cfg, rng), _augment(x, cfg, rng)


def _augment(x: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    out = x + rng.normal(0.0, cfg.noise_sigma, size=x.shape) if cfg.noise_sigma > 0 else x.copy()
    if cfg.dropout_p > 0:
        out = out * (rng.random(x.shape) >= cfg.dropout_p)
    return out


def pml_epoch(
    m: ClientModel,
    xi: Mat,
    train_x: np.ndarray,
    train_y: np.ndarray,
    cfg: PMLConfig,
    opt: AdamOptimizer,
    rng: np.random.Generator,
) -> Tuple[ClientModel, Mat, EpochReport]:
    """
    로컬 데이터 1 에폭 학습

    미니배치마다: 두 뷰 → 순전파 → total_loss → (θ, ψ, φ, ξ) 에 대해 optimizer 한 스텝.
    모델과 ξ 는 제자리에서 갱신되고 그대로 반환된다.
    """
    n = len(train_y)
    if n == 0:
        raise ShapeError("pml_epoch needs a nonempty dataset")
    batch_size = min(cfg.batch_size, n)
    order = rng.permutation(n)
    params = m.parameters() + [xi]

    totals = np.zeros(4)
    batches = 0
    for b, start in enumerate(range(0, n, batch_size)):
        idx = order[start:start + batch_size]
        x_a, x_b = make_views(train_x[idx], cfg.augment, rng)
        x_views = np.concatenate([x_a, x_b])
        labels = np.concatenate([train_y[idx], train_y[idx]])
        try:
            _, grads = backward(m, x_views, labels, xi, cfg.loss)
        except NonFiniteLossError as exc:
            logger.error("non-finite loss at batch %d: %s", b, exc.terms)
            raise NonFiniteLossError(exc.term, exc.value, exc.terms, batch_index=b) from exc
        opt.step(params, grads.flat())
        t = grads.terms
        totals += (t.cont, t.ce, t.proto, t.uni)
        batches += 1

    mean = totals / batches
    report = EpochReport(terms=LossTerms(*map(float, mean)), batches=batches)
    return m, xi, report
