#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🎨 Console Visuals
콘솔 리포트용 배너, 정확도 막대, 협업 그래프 히트맵
"""

from typing import List, Sequence

import numpy as np

# 시뮬레이터 배너
BANNER = """
╔═══════════════════════════════════════════╗
║   __  __    _    ____  _                  ║
║  |  \\/  |  / \\  |  _ \\| |                 ║
║  | |\\/| | / _ \\ | |_) | |                 ║
║  | |  | |/ ___ \\|  __/| |___              ║
║  |_|  |_/_/   \\_\\_|   |_____|  sim        ║
║                                           ║
║   P2P personalized learning simulator     ║
╚═══════════════════════════════════════════╝
"""

# 가중치 크기 순 음영 (0 → 1)
HEAT_SHADES = " ░▒▓█"


def get_accuracy_bar(acc: float, bar_length: int = 20) -> str:
    """정확도 (0~1) 를 막대 그래프로 표현"""
    acc = min(max(acc, 0.0), 1.0)
    filled = int(acc * bar_length)
    bar = "█" * filled + "░" * (bar_length - filled)

    if acc < 0.5:
        emoji = "😱"
    elif acc < 0.7:
        emoji = "😰"
    elif acc < 0.9:
        emoji = "😐"
    else:
        emoji = "😊"

    return f"{emoji} [{bar}] {acc * 100:5.1f}%"


def render_weight_heatmap(w, clusters: Sequence[int] = ()) -> str:
    """
    M×M 가중치 행렬을 음영 문자로 그린다

    행 라벨에 정답 클러스터를 붙이면 블록 구조가 한눈에 보인다.
    """
    w = np.asarray(w, dtype=np.float64)
    m = w.shape[0]
    peak = float(w.max()) if w.size and w.max() > 0 else 1.0
    lines: List[str] = ["      " + "".join(str(j % 10) for j in range(m))]
    for i in range(m):
        shades = "".join(
            HEAT_SHADES[min(int(w[i, j] / peak * (len(HEAT_SHADES) - 1) + 0.5), len(HEAT_SHADES) - 1)]
            for j in range(m)
        )
        tag = f"c{clusters[i]}" if len(clusters) == m else "  "
        lines.append(f"{i:>3} {tag} {shades}")
    return "\n".join(lines)


def format_run_report(per_client_acc: Sequence[float], acc_mean: float, acc_std: float, contacts: int) -> str:
    """클라이언트별 정확도 막대 + 요약"""
    lines = [f"   client {i:>2}  {get_accuracy_bar(a)}" for i, a in enumerate(per_client_acc)]
    lines.append(f"   mean acc {acc_mean * 100:.2f}% ± {acc_std * 100:.2f}  |  contacts {contacts:,}")
    return "\n".join(lines)
