"""
✅ Basic Tests Package
모듈별 단위 테스트

- numkernels_test.py: 코사인, 정규화, log-sum-exp, 단체 사영
- model_test.py: 구조 명세, 순전파, 역전파, 체크포인트
- losses_test.py: 네 손실 항과 합성
- pml_test.py: 증강, Adam, 로컬 에폭
- cgl_test.py: 유사도 추론, 그래프 손실, 사영 경사하강
- scenarios_test.py: 합성 시나리오 생성
- metrics_test.py: 정확도, 그래프 복원
- config_test.py: 설정 검증과 우선순위
"""

__all__ = []
