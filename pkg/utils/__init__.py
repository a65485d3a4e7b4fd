"""
🛠️ Utils Package
공통 유틸리티 함수 모듈

- helpers.py: 인자 파싱, 배너, 로깅 설정
"""

from .helpers import collect_flags, parse_arguments, print_banner, setup_logging

__all__ = [
    'collect_flags',
    'parse_arguments',
    'print_banner',
    'setup_logging',
]
