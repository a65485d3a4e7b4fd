#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🧮 Numeric Kernels
벡터/행렬 기본 연산, 수치적으로 안정적인 reduction, 확률 단체(simplex) 사영

모든 연산은 float64 numpy 배열 위에서 동작하는 순수 함수다.
"""

from typing import List

import numpy as np

from core.errors import DegenerateVectorError, MaplError, ShapeError

# Vec: 1차원 float64 배열, Mat: 2차원 (row-major) float64 배열
Vec = np.ndarray
Mat = np.ndarray

SIMPLEX_TOL = 1e-9


def as_vec(v) -> Vec:
    """입력을 1차원 float64 배열로 변환"""
    arr = np.asarray(v, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise ShapeError("vector must have positive length")
    return arr


def cosine(a, b) -> float:
    """코사인 유사도 <a,b>/(|a||b|), 반올림 오차에 대비해 [-1, 1]로 클램프"""
    a = as_vec(a)
    b = as_vec(b)
    if a.shape != b.shape:
        raise ShapeError(f"cosine: length mismatch {a.size} vs {b.size}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0:
        raise DegenerateVectorError("first cosine argument")
    if nb == 0.0:
        raise DegenerateVectorError("second cosine argument")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def l2_normalize(v) -> Vec:
    """ℓ2 정규화"""
    v = as_vec(v)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise DegenerateVectorError("l2_normalize input")
    return v / n


def normalize_rows(m: Mat, what: str = "row") -> Mat:
    """행 단위 ℓ2 정규화 (배치용)"""
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise DegenerateVectorError(what)
    return m / norms


def normalize_rows_backward(unit: Mat, norms: Mat, grad_unit: Mat) -> Mat:
    """y = x/|x| 의 역전파: dx = (dy - y <y,dy>) / |x|"""
    radial = np.sum(unit * grad_unit, axis=1, keepdims=True)
    return (grad_unit - unit * radial) / norms


def log_softmax(v) -> np.ndarray:
    """max-shift 후 log-sum-exp. 2차원 입력이면 마지막 축 기준"""
    v = np.asarray(v, dtype=np.float64)
    shifted = v - np.max(v, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def softmax(v) -> np.ndarray:
    return np.exp(log_softmax(v))


def project_to_simplex(v) -> Vec:
    """
    단위 단체 {x >= 0, Σx = 1} 위로의 유클리드 사영 (Condat 2016, Algorithm 1)

    Args:
        v: 임의의 실수 벡터

    Returns:
        사영된 벡터. 정확한 0 을 허용한다 (닫힌 단체).
    """
    y = as_vec(v)
    active: List[float] = [float(y[0])]
    parked: List[float] = []
    rho = float(y[0]) - 1.0

    for yn in y[1:]:
        yn = float(yn)
        if yn > rho:
            rho += (yn - rho) / (len(active) + 1)
            if rho > yn - 1.0:
                active.append(yn)
            else:
                parked.extend(active)
                active = [yn]
                rho = yn - 1.0

    for yv in parked:
        if yv > rho:
            active.append(yv)
            rho += (yv - rho) / len(active)

    changed = True
    while changed:
        changed = False
        kept: List[float] = []
        for idx, yv in enumerate(active):
            if yv <= rho:
                remaining = len(kept) + (len(active) - idx - 1)
                rho += (rho - yv) / remaining
                changed = True
            else:
                kept.append(yv)
        active = kept

    x = np.maximum(y - rho, 0.0)
    # 입력 크기가 1e6 이상이면 y - rho 의 반올림 오차가 합에 누적된다
    x /= x.sum()
    _check_on_simplex(x)
    return x


def project_to_simplex_sort(v) -> Vec:
    """정렬 후 임계값을 찾는 O(M log M) 사영 - Condat 구현의 독립 오라클"""
    y = as_vec(v)
    u = np.sort(y)[::-1]
    thresholds = (np.cumsum(u) - 1.0) / np.arange(1, y.size + 1)
    k = np.nonzero(u > thresholds)[0][-1]
    return np.maximum(y - thresholds[k], 0.0)


def _check_on_simplex(x: Vec) -> None:
    if np.any(x < 0.0) or abs(float(np.sum(x)) - 1.0) > SIMPLEX_TOL:
        raise MaplError(f"simplex projection left the simplex: sum={np.sum(x)!r}, min={np.min(x)!r}")
