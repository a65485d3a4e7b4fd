"""
✅ Tests Package
maplsim 테스트 모듈

패키지 구조:
- harness.py: pytest 없이 test_* 함수를 실행하는 스크립트 러너
- basic/: 모듈별 단위 테스트
- network/: 라운드 시뮬레이터와 명령 테스트
- official_validation/: 수용 기준 검증
  - base_validator.py: 공통 검증 로직
  - test_1_*.py ~ test_9_*.py: 개별 검증 테스트
  - run_all_tests.py: 모든 검증 실행
"""

__all__ = []
