#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🏆 테스트 8: 균일성 최적점

수용 기준:
- l_uni 하나만으로 경사하강 (K=4, d_p=8, 2000 스텝)
- l_uni → −1, 프로토타입 쌍 코사인의 평균이 −1/3 ± 0.05

Σ_k ξ̂_k = 0 인 배치는 모두 최솟값 −1 이므로 개별 코사인이 아닌 평균을 본다.
"""

import itertools
import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from base_validator import BaseValidator

from core.losses import l_uni, uni_value_grad
from core.numkernels import cosine

K = 4
DIM = 8
STEPS = 2000
LR = 0.1


class UniformityOptimumValidator(BaseValidator):
    """l_uni 최적점 검증"""

    def _descend(self):
        xi = np.random.default_rng(0).normal(size=(K, DIM))
        for _ in range(STEPS):
            _, grad = uni_value_grad(xi)
            xi -= LR * grad
        value = l_uni(xi)
        cosines = [cosine(xi[a], xi[b]) for a, b in itertools.combinations(range(K), 2)]
        mean_cos = float(np.mean(cosines))
        ok = value <= -1.0 + 1e-3 and abs(mean_cos - (-1.0 / (K - 1))) <= 0.05
        return ok, f"l_uni {value:.6f}, mean cosine {mean_cos:.4f}, range [{min(cosines):.3f}, {max(cosines):.3f}]"

    def run_test(self) -> bool:
        self.print_header("테스트 8: 프로토타입 균일성 최적점")
        self.check("K=4, d_p=8, 2000 스텝", self._descend)
        return self.print_final_result()


def test_uniformity_optimum():
    assert UniformityOptimumValidator().run_test()


if __name__ == "__main__":
    sys.exit(0 if UniformityOptimumValidator().run_test() else 1)
