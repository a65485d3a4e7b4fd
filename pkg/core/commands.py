#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🔧 Commands
run / sweep / verify 명령 구현. 각 명령은 종료 코드를 돌려준다.

종료 코드: 0 성공, 1 검증/스윕 실패, 2 잘못된 설정, 3 학습 중단
"""

import csv
import itertools
import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from core.config import RunConfig, apply_overrides, resolve_config
from core.errors import ConfigError, MaplError, NonFiniteLossError
from core.network import run_experiment
from core.numkernels import project_to_simplex
from core.oracles import run_oracle_suite
from report.visuals import format_run_report, render_weight_heatmap
from report.writers import write_run_artifacts

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_ABORTED = 3

INDEX_HEADER = ["rank", "point", "status", "acc_mean", "acc_std", "contacts", "graph_recovery", "overrides", "error"]


def _report_config_error(exc: ConfigError) -> int:
    print("❌ invalid config:")
    for violation in exc.violations:
        print(f"   - {violation}")
    return EXIT_BAD_CONFIG


def _report_abort(exc: MaplError) -> int:
    logger.error("training aborted: %s", exc)
    print(f"💥 training aborted: {exc}")
    if isinstance(exc, NonFiniteLossError):
        print(f"   term: {exc.term} = {exc.value}")
        print(f"   batch: {exc.batch_index}")
        print(f"   all terms: {exc.terms}")
    return EXIT_ABORTED


# ==================== run ====================

def cmd_run(
    config_path: Optional[str] = None,
    overrides: Sequence[str] = (),
    flags: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
    quiet: bool = False,
) -> int:
    """
    실험 하나 실행 후 산출물 기록

    Args:
        config_path: JSON 설정 파일
        overrides: 'section.key=value' 목록
        flags: 전용 플래그 (--seed 등)
        environ: 환경 변수 (MAPLSIM_OUT)
        quiet: 콘솔 리포트 생략
    """
    try:
        cfg = resolve_config(config_path, overrides, flags, environ)
    except ConfigError as exc:
        return _report_config_error(exc)

    try:
        result = run_experiment(cfg)
    except ConfigError as exc:
        return _report_config_error(exc)
    except MaplError as exc:
        return _report_abort(exc)

    written = write_run_artifacts(result, cfg.out_dir, cfg.train.save_models)
    logger.info("wrote %d artifacts to %s", len(written), cfg.out_dir)
    if not quiet:
        print(format_run_report(result.per_client_acc, result.acc_mean, result.acc_std, result.comm["contacts"]))
        print()
        print(render_weight_heatmap(result.final_weights, result.state.clusters))
        print()
        print(f"   graph recovery: {result.graph_recovery:.3f}  |  artifacts: {cfg.out_dir}")
    return EXIT_OK


# ==================== sweep ====================

def load_grid(path: Optional[str]) -> Dict[str, List[Any]]:
    """점 표기 키 → 값 목록. 경로가 없으면 빈 grid (기본 실행 한 번)"""
    if not path:
        return {}
    try:
        grid = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError([f"grid file not found: {path}"])
    except json.JSONDecodeError as exc:
        raise ConfigError([f"grid file {path} is not valid JSON: {exc}"])
    if not isinstance(grid, dict):
        raise ConfigError(["grid must be a JSON object of dotted key -> list of values"])
    errors = [f"grid.{key}: expected a nonempty list" for key, values in grid.items()
              if not isinstance(values, list) or not values]
    if errors:
        raise ConfigError(errors)
    return grid


def grid_points(grid: Mapping[str, List[Any]]) -> List[List[Tuple[str, Any]]]:
    """grid 의 데카르트 곱. 빈 grid 는 override 없는 점 하나"""
    keys = list(grid)
    return [list(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def _write_index(rows: List[Dict[str, Any]], path: Path) -> Path:
    ranked = sorted(rows, key=lambda r: (r["status"] != "ok", -(r["acc_mean"] or 0.0), r["point"]))
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(INDEX_HEADER)
        for rank, row in enumerate(ranked, start=1):
            cells = [_index_cell(row[k]) for k in INDEX_HEADER[1:]]
            writer.writerow([rank, *cells])
    return path


def _index_cell(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def _run_point(base: RunConfig, idx: int, pairs: List[Tuple[str, Any]]) -> Dict[str, Any]:
    point_dir = str(Path(base.out_dir) / f"point_{idx:03d}")
    row: Dict[str, Any] = {
        "point": f"point_{idx:03d}", "status": "ok", "acc_mean": None, "acc_std": None,
        "contacts": None, "graph_recovery": None, "overrides": json.dumps(dict(pairs), sort_keys=True), "error": None,
    }
    try:
        cfg = apply_overrides(base, [*pairs, ("out_dir", point_dir)]).check()
        result = run_experiment(cfg)
        write_run_artifacts(result, cfg.out_dir, cfg.train.save_models)
    except MaplError as exc:
        logger.error("sweep %s failed: %s", row["point"], exc)
        row["status"] = "failed"
        row["error"] = str(exc).replace("\n", " ")
        return row
    row.update(
        acc_mean=result.acc_mean,
        acc_std=result.acc_std,
        contacts=result.comm["contacts"],
        graph_recovery=result.graph_recovery,
    )
    return row


def cmd_sweep(
    config_path: Optional[str] = None,
    grid_path: Optional[str] = None,
    overrides: Sequence[str] = (),
    flags: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> int:
    """
    grid 의 각 점마다 실행 디렉터리 하나 + 평균 정확도 순위 index.csv

    일부 점이 실패해도 계속 진행하고, 실패가 있으면 종료 코드 1.
    """
    try:
        base = resolve_config(config_path, overrides, flags, environ)
        grid = load_grid(grid_path)
    except ConfigError as exc:
        return _report_config_error(exc)

    points = grid_points(grid)
    logger.info("sweep: %d points over %s", len(points), list(grid) or "(base config)")
    rows = []
    for idx, pairs in enumerate(points):
        logger.info("sweep point %d/%d: %s", idx + 1, len(points), dict(pairs))
        rows.append(_run_point(base, idx, pairs))

    out = Path(base.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_index(rows, out / "index.csv")

    failed = [r["point"] for r in rows if r["status"] != "ok"]
    print(f"   sweep: {len(rows) - len(failed)}/{len(rows)} points ok  |  index: {out / 'index.csv'}")
    for name in failed:
        print(f"   [FAIL] {name}")
    return EXIT_FAILED if failed else EXIT_OK


# ==================== verify ====================

def cmd_verify(project_fn: Callable = project_to_simplex) -> int:
    """빠른 오라클 묶음을 실행하고 항목별 [PASS]/[FAIL] 출력"""
    results = run_oracle_suite(project_fn=project_fn)
    for r in results:
        status = "[PASS]" if r.passed else "[FAIL]"
        print(f"{status} {r.name}: {r.detail} ({r.seconds:.2f}s)")
    passed = sum(r.passed for r in results)
    print(f"\n   {passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else EXIT_FAILED
