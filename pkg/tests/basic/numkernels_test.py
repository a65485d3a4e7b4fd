#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
수치 커널 테스트
코사인, 정규화, log-sum-exp, 단체 사영
"""

import os
import sys

sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np

from core.errors import DegenerateVectorError, ShapeError
from core.numkernels import (
    cosine,
    l2_normalize,
    log_softmax,
    normalize_rows,
    project_to_simplex,
    project_to_simplex_sort,
)
from tests.harness import run_tests


def test_cosine_basic_cases():
    assert cosine([1, 0], [1, 0]) == 1.0
    assert cosine([1, 0], [0, 1]) == 0.0
    assert np.isclose(cosine([1, 2, 3], [-1, -2, -3]), -1.0)
    assert abs(cosine([1, 2], [2, 1]) - 0.8) < 1e-12


def test_cosine_is_clamped():
    v = np.array([1e-3, 1e8, 3.0])
    assert -1.0 <= cosine(v, v * 7.0) <= 1.0


def test_cosine_rejects_zero_vector():
    for a, b in (([0, 0], [1, 0]), ([1, 0], [0, 0])):
        try:
            cosine(a, b)
        except DegenerateVectorError as exc:
            assert "degenerate vector" in str(exc)
        else:
            raise AssertionError("zero vector accepted")


def test_cosine_rejects_length_mismatch():
    try:
        cosine([1, 2], [1, 2, 3])
    except ShapeError:
        return
    raise AssertionError("length mismatch accepted")


def test_l2_normalize():
    assert np.allclose(l2_normalize([3, 4]), [0.6, 0.8])
    try:
        l2_normalize([0.0, 0.0])
    except DegenerateVectorError:
        pass
    else:
        raise AssertionError("zero vector normalized")


def test_normalize_rows_unit_norm():
    m = np.random.default_rng(0).normal(size=(5, 4))
    assert np.allclose(np.linalg.norm(normalize_rows(m), axis=1), 1.0)


def test_log_softmax_is_shift_stable():
    out = log_softmax([1000.0, 1000.0])
    assert np.allclose(out, [-np.log(2), -np.log(2)])
    big = log_softmax([1e4, 0.0])
    assert np.isfinite(big).all()
    assert abs(np.logaddexp.reduce(log_softmax([0.3, -2.0, 5.0]))) < 1e-12
    assert np.allclose(log_softmax([1.0, 2.0, 3.0]), [-2.4076, -1.4076, -0.4076], atol=1e-4)


def test_projection_examples():
    assert np.allclose(project_to_simplex([0.5, 0.5]), [0.5, 0.5])
    assert np.allclose(project_to_simplex([2.0, 0.0]), [1.0, 0.0])
    assert np.allclose(project_to_simplex([1.0, 1.0, 1.0]), [1 / 3, 1 / 3, 1 / 3])
    assert np.allclose(project_to_simplex([-5.0, -5.0, 10.0]), [0.0, 0.0, 1.0])
    assert np.allclose(project_to_simplex([1.0, 1.0, -1.0]), [0.5, 0.5, 0.0])


def test_projection_is_idempotent_on_simplex():
    rng = np.random.default_rng(4)
    for _ in range(20):
        w = rng.dirichlet(np.ones(6))
        assert np.max(np.abs(project_to_simplex(w) - w)) < 1e-12


def test_projection_matches_sort_oracle():
    rng = np.random.default_rng(5)
    for _ in range(200):
        v = rng.uniform(-10, 10, size=int(rng.integers(2, 51)))
        got = project_to_simplex(v)
        assert np.max(np.abs(got - project_to_simplex_sort(v))) <= 1e-9
        assert np.all(got >= 0) and abs(got.sum() - 1.0) <= 1e-9


def test_projection_rejects_empty():
    try:
        project_to_simplex([])
    except ShapeError:
        return
    raise AssertionError("empty vector projected")


if __name__ == "__main__":
    sys.exit(run_tests(globals(), "수치 커널 테스트"))
