#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🏆 테스트 9: 결정성

수용 기준:
- 같은 설정과 시드로 cmd_run 을 두 번 실행하면 metrics.csv, summary.json 이
  바이트 단위로 같다
- 단일 스레드와 병렬 워커 모드 모두
"""

import json
import os
import sys
import tempfile
from pathlib import Path

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from base_validator import BaseValidator

from core.commands import EXIT_OK, cmd_run

ARTIFACTS = ("metrics.csv", "summary.json", "weights_final.csv")


class DeterminismValidator(BaseValidator):
    """바이트 단위 결정성 검증"""

    def _twice(self, tmp: Path, parallel: int):
        config = tmp / "tiny.json"
        cfg = self.tiny_config("mapl", clients=4, rounds=4, seed=7)
        config.write_text(json.dumps(cfg.to_dict()), encoding="utf-8")
        outputs = []
        for attempt in range(2):
            out = tmp / f"p{parallel}"
            code = cmd_run(str(config), [], {"out": str(out), "parallel": parallel}, environ={}, quiet=True)
            if code != EXIT_OK:
                return False, f"run {attempt + 1} exited with {code}"
            outputs.append({name: (out / name).read_bytes() for name in ARTIFACTS})
        differing = [name for name in ARTIFACTS if outputs[0][name] != outputs[1][name]]
        return not differing, "identical" if not differing else f"differs: {differing}"

    def _serial_vs_parallel(self, tmp: Path):
        serial = (tmp / "p1" / "metrics.csv").read_bytes()
        threaded = (tmp / "p3" / "metrics.csv").read_bytes()
        return serial == threaded, "metrics.csv identical across worker modes" if serial == threaded else "metrics differ"

    def run_test(self) -> bool:
        self.print_header("테스트 9: 바이트 단위 결정성")
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            self.check("단일 스레드", lambda: self._twice(tmp, 1))
            self.check("병렬 워커 3개", lambda: self._twice(tmp, 3))
            self.check("단일 스레드 대 병렬", lambda: self._serial_vs_parallel(tmp))
        return self.print_final_result()


def test_determinism():
    assert DeterminismValidator().run_test()


if __name__ == "__main__":
    sys.exit(0 if DeterminismValidator().run_test() else 1)
