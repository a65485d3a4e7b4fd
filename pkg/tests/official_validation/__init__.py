"""
🏆 Official Validation Tests Package
maplsim 수용 기준 검증 모듈

수용 기준 9개에 대응하는 검증 스크립트:

- base_validator.py: 공통 검증 로직 및 설정 빌더
- test_1_gradient_exactness.py: 해석적 기울기 대 중앙 차분
- test_2_simplex_projection.py: Condat 사영 대 정렬 오라클
- test_3_loss_oracles.py: 손실 항 brute-force 대조
- test_4_communication.py: 접촉 수 산술
- test_5_cluster_recovery.py: 클러스터 복원
- test_6_collaboration_benefit.py: 협업 이득
- test_7_mixing_invariant.py: 행 확률성 불변식
- test_8_uniformity_optimum.py: 프로토타입 균일성 최적점
- test_9_determinism.py: 바이트 단위 결정성
- run_all_tests.py: 모든 검증 실행
- README.md: 검증 가이드
"""

__all__ = []
