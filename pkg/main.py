#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
╔═══════════════════════════════════════════╗
║   maplsim - P2P Personalized Learning     ║
║   Clients learn who to talk to. 🕸️        ║
╚═══════════════════════════════════════════╝

Entry Point: main.py

패키지 구조:
- core/: 수치 커널, 모델, 손실, PML, CGL, 네트워크 시뮬레이터, 명령
- report/: 콘솔 리포트와 산출물 기록
- utils/: 인자 파싱, 로깅
- tests/: 테스트 모듈
"""

import sys
from typing import Optional, Sequence

from core.commands import cmd_run, cmd_sweep, cmd_verify
from utils import collect_flags, parse_arguments, print_banner, setup_logging


def main(argv: Optional[Sequence[str]] = None) -> int:
    """메인 실행 함수 - 진입점. 종료 코드를 돌려준다"""
    # 1. 커맨드라인 인자 파싱
    args = parse_arguments(argv)

    # 2. 로깅
    setup_logging(args.verbose)
    print_banner(args.command)

    # 3. 명령 실행
    if args.command == "verify":
        return cmd_verify()
    if args.command == "sweep":
        return cmd_sweep(args.config, args.grid, args.overrides, collect_flags(args))
    return cmd_run(args.config, args.overrides, collect_flags(args))


if __name__ == "__main__":
    sys.exit(main())
