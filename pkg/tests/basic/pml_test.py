#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
로컬 학습(PML) 테스트
증강, Adam, 에폭 루프
"""

import os
import sys

sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np

from core.errors import ConfigError, ShapeError
from core.losses import LossConfig
from core.model import ClientModel, init_prototypes, loss_value
from core.oracles import tiny_arch
from core.pml import AdamOptimizer, AugmentConfig, PMLConfig, make_views, pml_epoch
from tests.harness import run_tests


def _toy(seed=0, n=12, k=3):
    rng = np.random.default_rng(seed)
    means = np.array([[3.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 3.0]])[:k]
    y = np.arange(n) % k
    x = means[y] + 0.3 * rng.normal(size=(n, 3))
    model = ClientModel.initialize(tiny_arch(k), rng)
    xi = init_prototypes(k, 4, rng)
    return model, xi, x, y


def test_augment_rejects_identical_views():
    try:
        make_views(np.ones(3), AugmentConfig(noise_sigma=0.0, dropout_p=0.0), np.random.default_rng(0))
    except ConfigError as exc:
        assert exc.violations
        return
    raise AssertionError("identity augmentation accepted")


def test_noise_views_differ_and_stay_close():
    rng = np.random.default_rng(1)
    cfg = AugmentConfig(noise_sigma=0.1, dropout_p=0.0)
    x = np.array([0.5, -1.0])
    worst = 0.0
    for _ in range(10_000):
        x_a, x_b = make_views(x, cfg, rng)
        assert not np.array_equal(x_a, x_b)
        worst = max(worst, float(np.max(np.abs(x_a - x))))
    assert worst < 6 * cfg.noise_sigma


def test_dropout_surviving_mass():
    rng = np.random.default_rng(2)
    cfg = AugmentConfig(noise_sigma=0.0, dropout_p=0.9)
    x = np.ones((10_000, 10))
    x_a, _ = make_views(x, cfg, rng)
    assert abs(x_a.sum(axis=1).mean() - 1.0) < 0.05


def test_adam_rejects_mismatched_gradients():
    params = [np.zeros((2, 2))]
    opt = AdamOptimizer(params)
    try:
        opt.step(params, [np.zeros(3)])
    except ShapeError:
        return
    raise AssertionError("gradient shape mismatch accepted")


def test_zero_learning_rate_leaves_parameters():
    model, xi, x, y = _toy()
    before = [p.copy() for p in model.parameters()] + [xi.copy()]
    opt = AdamOptimizer(model.parameters() + [xi], lr=0.0)
    _, _, report = pml_epoch(model, xi, x, y, PMLConfig(batch_size=4), opt, np.random.default_rng(3))
    for a, b in zip(before, model.parameters() + [xi]):
        assert np.array_equal(a, b)
    assert report.batches == 3
    assert np.isfinite(report.loss)


def test_prototypes_fixed_without_prototype_terms():
    model, xi, x, y = _toy(seed=4)
    before = xi.copy()
    cfg = PMLConfig(loss=LossConfig(use_proto=False, use_uni=False), batch_size=4)
    opt = AdamOptimizer(model.parameters() + [xi], lr=1e-2)
    pml_epoch(model, xi, x, y, cfg, opt, np.random.default_rng(5))
    assert np.array_equal(before, xi)


def test_training_lowers_cross_entropy():
    model, xi, x, y = _toy(seed=6, n=30)
    cfg = PMLConfig(loss=LossConfig(use_cont=False, use_uni=False, use_proto=False, use_ce=True), batch_size=10)
    opt = AdamOptimizer(model.parameters() + [xi], lr=1e-2)
    rng = np.random.default_rng(7)
    _, _, first = pml_epoch(model, xi, x, y, cfg, opt, rng)
    for _ in range(40):
        _, _, last = pml_epoch(model, xi, x, y, cfg, opt, rng)
    assert last.loss < first.loss


def test_one_epoch_lowers_total_loss():
    model, xi, x, y = _toy(seed=10, n=30)
    cfg = PMLConfig(batch_size=30)
    view_rng = np.random.default_rng(11)
    draws = [np.concatenate(make_views(x, cfg.augment, view_rng)) for _ in range(20)]
    labels = np.concatenate([y, y])

    def mean_total():
        return float(np.mean([loss_value(model, v, labels, xi, cfg.loss) for v in draws]))

    before = mean_total()
    opt = AdamOptimizer(model.parameters() + [xi], lr=1e-3)
    pml_epoch(model, xi, x, y, cfg, opt, np.random.default_rng(12))
    assert mean_total() < before


def test_epoch_is_deterministic():
    results = []
    for _ in range(2):
        model, xi, x, y = _toy(seed=8)
        opt = AdamOptimizer(model.parameters() + [xi], lr=1e-3)
        pml_epoch(model, xi, x, y, PMLConfig(batch_size=5), opt, np.random.default_rng(9))
        results.append(model.parameters() + [xi])
    for a, b in zip(*results):
        assert np.array_equal(a, b)


def test_empty_dataset_rejected():
    model, xi, _, _ = _toy()
    opt = AdamOptimizer(model.parameters() + [xi])
    try:
        pml_epoch(model, xi, np.zeros((0, 3)), np.zeros(0, dtype=int), PMLConfig(), opt, np.random.default_rng(0))
    except ShapeError:
        return
    raise AssertionError("empty dataset accepted")


if __name__ == "__main__":
    sys.exit(run_tests(globals(), "로컬 학습(PML) 테스트"))
