"""
🌐 Network Tests Package
라운드 시뮬레이터와 명령 단위 테스트

- network_test.py: 라운드 순서, 집계, 접촉 수, 결정성
- cli_test.py: run / sweep / verify 명령과 산출물
"""

__all__ = []
