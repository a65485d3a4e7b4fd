#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
⚙️ Run Configuration
RunConfig 트리, JSON 로드, 점 표기 override, 전체 검증

우선순위: 기본값 < 설정 파일 < --set override < 전용 플래그 < MAPLSIM_OUT (출력 디렉터리만)
"""

import copy
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from core.cgl import CGLConfig
from core.errors import ConfigError
from core.losses import LossConfig
from core.pml import AugmentConfig
from core.scenarios import ScenarioSpec

logger = logging.getLogger(__name__)

METHODS = ("mapl", "mapl_no_cgl", "local")
OUT_ENV_VAR = "MAPLSIM_OUT"

# 전용 CLI 플래그 → 점 표기 키
FLAG_KEYS = {
    "seed": "seed",
    "method": "method",
    "clients": "scenario.num_clients",
    "rounds": "train.rounds",
    "out": "out_dir",
    "parallel": "train.parallel",
}


@dataclass
class ModelConfig:
    latent_dim: int = 16
    heterogeneous: bool = True

    def validate(self) -> List[str]:
        if self.latent_dim < 1:
            return [f"model.latent_dim must be positive (got {self.latent_dim})"]
        return []


@dataclass
class TrainConfig:
    """라운드/로컬 학습/평가 주기 설정"""

    rounds: int = 400
    local_epochs: int = 1
    batch_size: int = 64
    lr: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.999
    adam_eps: float = 1e-8
    eval_interval: int = 50
    snapshot_interval: int = 50
    parallel: int = 1
    save_models: bool = False

    def validate(self) -> List[str]:
        errors = []
        if self.rounds < 0:
            errors.append(f"train.rounds must be >= 0 (got {self.rounds})")
        for name in ("local_epochs", "batch_size", "eval_interval", "snapshot_interval", "parallel"):
            if getattr(self, name) < 1:
                errors.append(f"train.{name} must be positive (got {getattr(self, name)})")
        if not self.lr > 0:
            errors.append(f"train.lr must be positive (got {self.lr})")
        for name in ("beta1", "beta2"):
            if not 0 <= getattr(self, name) < 1:
                errors.append(f"train.{name} must be in [0, 1) (got {getattr(self, name)})")
        if not self.adam_eps > 0:
            errors.append(f"train.adam_eps must be positive (got {self.adam_eps})")
        return errors


@dataclass
class RunConfig:
    """실험 하나의 완전히 해석된 설정"""

    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    cgl: CGLConfig = field(default_factory=CGLConfig)
    method: str = "mapl"
    seed: int = 0
    out_dir: str = "runs/latest"
    comm_budget: Optional[int] = None

    def validate(self) -> List[str]:
        """위반 항목 전부를 돌려준다 (비어 있으면 유효)"""
        errors: List[str] = []
        for section in (self.scenario, self.model, self.train, self.loss, self.augment, self.cgl):
            errors.extend(section.validate())
        if self.method not in METHODS:
            errors.append(f"method must be one of {METHODS} (got {self.method!r})")
        if self.method == "mapl" and self.cgl.warmup > self.train.rounds:
            errors.append(f"cgl.warmup ({self.cgl.warmup}) must be <= train.rounds ({self.train.rounds})")
        if self.comm_budget is not None and self.comm_budget < 0:
            errors.append(f"comm_budget must be >= 0 (got {self.comm_budget})")
        if self.method == "local" and self.comm_budget:
            errors.append("comm_budget has no meaning for method 'local' (no messages are sent)")
        return errors

    def check(self) -> "RunConfig":
        errors = self.validate()
        if errors:
            raise ConfigError(errors)
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        """JSON 트리에서 RunConfig 생성. 알 수 없는 키와 타입 오류를 모두 모아 보고"""
        errors: List[str] = []
        cfg = _build(cls, data, "", errors)
        if errors:
            raise ConfigError(errors)
        return cfg


def _accepts(default: Any, value: Any) -> bool:
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, str):
        return isinstance(value, str)
    if isinstance(default, list):
        return isinstance(value, list)
    # None 기본값 (seed, comm_budget): 정수 또는 null
    return value is None or (isinstance(value, int) and not isinstance(value, bool))


def _build(cls, data: Any, prefix: str, errors: List[str]):
    default = cls()
    if not isinstance(data, Mapping):
        errors.append(f"{prefix.rstrip('.') or 'config'} must be an object (got {type(data).__name__})")
        return default
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            errors.append(f"unknown key: {prefix}{key}")
    kwargs = {}
    for name in known:
        if name not in data:
            continue
        value = data[name]
        current = getattr(default, name)
        if is_dataclass(current):
            kwargs[name] = _build(type(current), value, f"{prefix}{name}.", errors)
        elif _accepts(current, value):
            kwargs[name] = float(value) if isinstance(current, float) else copy.deepcopy(value)
        else:
            errors.append(f"{prefix}{name}: expected {type(current).__name__}, got {value!r}")
    return cls(**kwargs)


def parse_override(text: str) -> Tuple[str, Any]:
    """'section.key=value' → (key, value). value 는 JSON 으로 해석하고 실패하면 문자열"""
    if "=" not in text:
        raise ConfigError([f"override must look like section.key=value (got {text!r})"])
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError([f"override has an empty key: {text!r}"])
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def apply_overrides(cfg: RunConfig, overrides: Sequence[Tuple[str, Any]]) -> RunConfig:
    """점 표기 override 를 순서대로 적용한 새 RunConfig"""
    tree = cfg.to_dict()
    errors = []
    for key, value in overrides:
        node = tree
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                errors.append(f"unknown key: {key}")
                break
            node = node[part]
        else:
            if parts[-1] not in node:
                errors.append(f"unknown key: {key}")
            else:
                node[parts[-1]] = value
    if errors:
        raise ConfigError(errors)
    return RunConfig.from_dict(tree)


def load_config(path) -> RunConfig:
    """JSON 설정 파일 로드 (검증은 호출자가)"""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError([f"config file not found: {path}"])
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config file {path} is not valid JSON: {exc}"])
    return RunConfig.from_dict(data)


def resolve_config(
    config_path: Optional[str] = None,
    overrides: Sequence[str] = (),
    flags: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    모든 설정 출처를 우선순위대로 합쳐 검증된 RunConfig 를 만든다

    Args:
        config_path: JSON 설정 파일 (없으면 기본값)
        overrides: '--set' 으로 받은 'section.key=value' 목록
        flags: 전용 플래그 값 (None 은 지정되지 않음)
        environ: 환경 변수 (기본 os.environ)
    """
    cfg = load_config(config_path) if config_path else RunConfig()
    pairs = [parse_override(text) for text in overrides]
    for flag, value in (flags or {}).items():
        if value is not None:
            pairs.append((FLAG_KEYS[flag], value))
    environ = os.environ if environ is None else environ
    if environ.get(OUT_ENV_VAR):
        pairs.append(("out_dir", environ[OUT_ENV_VAR]))
    if pairs:
        cfg = apply_overrides(cfg, pairs)
    cfg.check()
    logger.debug("resolved config: %s", json.dumps(cfg.to_dict(), sort_keys=True))
    return cfg
