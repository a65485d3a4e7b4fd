#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🏆 테스트 3: 손실 오라클

수용 기준:
- l_cont, l_proto, l_uni, l_ce 가 작은 무작위 인스턴스 50개에서
  이중 루프 구현과 1e-10 이내로 일치
- 닫힌 형태 값: l_proto 정렬/직교 0.31326…, l_uni 동일 쌍 1.0, B=1 l_cont 0
- 5초 이내
"""

import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from base_validator import BaseValidator

from core.oracles import check_loss_oracles


class LossOraclesValidator(BaseValidator):
    """손실 오라클 검증"""

    def run_test(self) -> bool:
        self.print_header("테스트 3: 손실 항 brute-force 대조")
        self.check("무작위 인스턴스 50개 + 닫힌 형태", lambda: check_loss_oracles(trials=50), time_limit=5.0)
        return self.print_final_result()


def test_loss_oracles():
    assert LossOraclesValidator().run_test()


if __name__ == "__main__":
    sys.exit(0 if LossOraclesValidator().run_test() else 1)
