#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🚨 Error Types
시뮬레이터 전체에서 공유하는 예외 계층
"""

from typing import Dict, List, Optional


class MaplError(Exception):
    """모든 시뮬레이터 예외의 베이스"""


class DegenerateVectorError(MaplError, ValueError):
    """노름이 0인 벡터가 정규화/코사인에 들어왔을 때"""

    def __init__(self, what: str = "vector"):
        super().__init__(f"degenerate vector: {what} has zero norm")
        self.what = what


class ShapeError(MaplError, ValueError):
    """차원 불일치"""


class NonFiniteLossError(MaplError, ArithmeticError):
    """손실 값이 NaN/Inf 가 되었을 때 - 문제 항 이름과 진단 정보를 함께 전달"""

    def __init__(
        self,
        term: str,
        value: float,
        terms: Optional[Dict[str, float]] = None,
        batch_index: Optional[int] = None,
    ):
        self.term = term
        self.value = value
        self.terms = dict(terms or {})
        self.batch_index = batch_index
        where = f" at batch {batch_index}" if batch_index is not None else ""
        super().__init__(f"non-finite loss term '{term}' = {value}{where}; terms={self.terms}")


class StochasticityError(MaplError):
    """가중치 벡터가 확률 단체를 벗어났을 때"""


class ScenarioError(MaplError, ValueError):
    """시나리오 클래스 배정이 불가능할 때 - 위반한 제약 조건을 메시지에 담는다"""


class ConfigError(MaplError, ValueError):
    """설정 검증 실패 - 위반 항목 전부를 한 번에 보고"""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("invalid config:\n  - " + "\n  - ".join(self.violations))
