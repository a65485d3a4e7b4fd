#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🛠️ Helper Functions
커맨드라인 파싱, 배너, 로깅 설정
"""

import argparse
import logging
import sys
from typing import Any, Dict, Optional, Sequence

from report.visuals import BANNER

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', metavar="PATH", help="JSON run config (default: built-in defaults)")
    parser.add_argument('--seed', type=int, help="master seed")
    parser.add_argument('--method', choices=["mapl", "mapl_no_cgl", "local"], help="training method")
    parser.add_argument('--clients', type=int, metavar="N", help="number of clients M")
    parser.add_argument('--rounds', type=int, metavar="N", help="communication rounds T")
    parser.add_argument('--out', metavar="DIR", help="output directory (MAPLSIM_OUT wins if set)")
    parser.add_argument('--parallel', type=int, metavar="N", help="worker threads per round")
    parser.add_argument(
        '--set',
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted override, e.g. --set cgl.mu1=0.5 (repeatable)"
    )


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """커맨드라인 인자 파싱"""
    parser = argparse.ArgumentParser(
        description="maplsim - P2P personalized learning simulator",
        epilog="Clients learn who to talk to. 🕸️"
    )
    parser.add_argument('--verbose', '-v', action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser('run', help="run one experiment")
    _add_run_options(run)

    sweep = sub.add_parser('sweep', help="run a grid of experiments")
    _add_run_options(sweep)
    sweep.add_argument('--grid', metavar="PATH", help="JSON object of dotted key -> list of values")

    sub.add_parser('verify', help="run the fast oracle suite")
    return parser.parse_args(argv)


def collect_flags(args: argparse.Namespace) -> Dict[str, Any]:
    """전용 플래그만 골라낸다 (지정되지 않은 값은 None)"""
    return {name: getattr(args, name, None) for name in ("seed", "method", "clients", "rounds", "out", "parallel")}


def setup_logging(verbose: bool = False) -> None:
    """루트 로거를 stderr 로 한 번 설정"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


def print_banner(command: str) -> None:
    """시작 배너 출력"""
    try:
        print(BANNER)
        print(f"   command: {command}")
        print()
    except UnicodeEncodeError:
        # 박스 문자 출력 실패 시 ASCII로 대체
        print(">> maplsim starting...")
        print(f"   command: {command}")
        print()
