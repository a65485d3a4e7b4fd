#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🧠 Client Model
이기종 클라이언트 모델 h_i = f_θ ∘ {f_ψ (projection head), g_φ (classifier head)}

- 특징 추출기 f_θ 는 클라이언트마다 다를 수 있다 (4종 MLP 풀)
- projection head 는 2층 MLP, classifier head 는 1층 affine (모든 클라이언트 동일 shape)
- 잠재 벡터 z 는 ReLU 를 거친 음이 아닌 특징 (CNN 의 pooled feature 와 같은 성질)
- 역전파는 순전파에서 기록한 고정 테이프(affine, ReLU, normalize)를 거꾸로 되감아 계산
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ShapeError
from core.losses import LossConfig, LossTerms, ViewBatch, total_loss_and_grads
from core.numkernels import Mat, Vec, normalize_rows_backward

logger = logging.getLogger(__name__)

# 데스크 스케일 백본 풀 (hidden widths). 마지막 층은 항상 d_z 로 매핑된다.
ARCH_POOL: Tuple[Tuple[int, ...], ...] = (
    (64,),
    (128,),
    (32, 32),
    (64, 32),
)

# 네트워크 초기화 시 분류기 head 의 초기 크기 (fan-in bound 대비)
CLASSIFIER_INIT_GAIN = 1e-2


@dataclass(frozen=True)
class ArchSpec:
    """클라이언트 모델 구조 명세"""

    hidden_sizes: Tuple[int, ...]
    input_dim: int
    latent_dim: int
    proj_dim: int
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        dims = (self.input_dim, self.latent_dim, self.proj_dim, self.num_classes) + self.hidden_sizes
        if any(d <= 0 for d in dims):
            raise ShapeError(f"all widths must be positive: {dims}")
        if self.latent_dim != self.proj_dim:
            raise ShapeError(f"latent_dim ({self.latent_dim}) must equal proj_dim ({self.proj_dim})")

    @property
    def extractor_widths(self) -> List[int]:
        return [self.input_dim, *self.hidden_sizes, self.latent_dim]

    def to_dict(self) -> Dict:
        return {
            "hidden_sizes": list(self.hidden_sizes),
            "input_dim": self.input_dim,
            "latent_dim": self.latent_dim,
            "proj_dim": self.proj_dim,
            "num_classes": self.num_classes,
        }


def sample_arch(pool_index: int, input_dim: int, latent_dim: int, num_classes: int) -> ArchSpec:
    """풀에서 특징 추출기 프로파일을 골라 ArchSpec 생성"""
    if not 0 <= pool_index < len(ARCH_POOL):
        raise ShapeError(f"pool_index must be in [0, {len(ARCH_POOL)}), got {pool_index}")
    return ArchSpec(
        hidden_sizes=ARCH_POOL[pool_index],
        input_dim=input_dim,
        latent_dim=latent_dim,
        proj_dim=latent_dim,
        num_classes=num_classes,
    )


@dataclass
class Dense:
    """affine 층: y = x Wᵀ + b, W 는 (out, in)"""

    weight: Mat
    bias: Vec

    @classmethod
    def initialize(cls, fan_in: int, fan_out: int, rng: np.random.Generator) -> "Dense":
        bound = np.sqrt(1.0 / fan_in)
        weight = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        bias = rng.uniform(-bound, bound, size=fan_out)
        return cls(weight=weight, bias=bias)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weight.T + self.bias

    def copy(self) -> "Dense":
        return Dense(self.weight.copy(), self.bias.copy())


@dataclass
class ClientModel:
    """클라이언트 하나의 파라미터 묶음 (θ, ψ, φ)"""

    arch: ArchSpec
    theta: List[Dense]
    psi: List[Dense]
    phi: Dense

    @classmethod
    def initialize(cls, arch: ArchSpec, rng: np.random.Generator) -> "ClientModel":
        widths = arch.extractor_widths
        theta = [Dense.initialize(widths[k], widths[k + 1], rng) for k in range(len(widths) - 1)]
        psi = [
            Dense.initialize(arch.latent_dim, arch.proj_dim, rng),
            Dense.initialize(arch.proj_dim, arch.proj_dim, rng),
        ]
        phi = Dense.initialize(arch.latent_dim, arch.num_classes, rng)
        return cls(arch=arch, theta=theta, psi=psi, phi=phi)

    @classmethod
    def initialize_for_network(
        cls,
        arch: ArchSpec,
        backbone_rng: np.random.Generator,
        head_rng: np.random.Generator,
    ) -> "ClientModel":
        """
        P2P 네트워크용 초기화

        θ 는 backbone_rng 에서, ψ 와 φ 는 모든 클라이언트가 공유하는 head_rng 에서 뽑는다.
        φ 는 CLASSIFIER_INIT_GAIN 배로 축소된다 (분류기 코사인은 학습된 변화로 정해진다).
        """
        widths = arch.extractor_widths
        theta = [Dense.initialize(widths[k], widths[k + 1], backbone_rng) for k in range(len(widths) - 1)]
        psi = [
            Dense.initialize(arch.latent_dim, arch.proj_dim, head_rng),
            Dense.initialize(arch.proj_dim, arch.proj_dim, head_rng),
        ]
        phi = Dense.initialize(arch.latent_dim, arch.num_classes, head_rng)
        phi.weight *= CLASSIFIER_INIT_GAIN
        phi.bias *= CLASSIFIER_INIT_GAIN
        return cls(arch=arch, theta=theta, psi=psi, phi=phi)

    def parameters(self) -> List[np.ndarray]:
        """고정된 순서의 파라미터 목록: θ(W,b)…, ψ(W,b)…, φ(W,b)"""
        params: List[np.ndarray] = []
        for layer in (*self.theta, *self.psi, self.phi):
            params.extend((layer.weight, layer.bias))
        return params

    def parameter_names(self) -> List[str]:
        names: List[str] = []
        for group, layers in (("theta", self.theta), ("psi", self.psi), ("phi", [self.phi])):
            for k, _ in enumerate(layers):
                names.extend((f"{group}.{k}.weight", f"{group}.{k}.bias"))
        return names

    def classifier_vector(self) -> Vec:
        """φ 전체 (가중치 + bias) 를 평탄화 - 유사도 추론에 쓰인다"""
        return np.concatenate([self.phi.weight.ravel(), self.phi.bias])

    @property
    def classifier_size(self) -> int:
        return self.phi.weight.size + self.phi.bias.size

    def copy(self) -> "ClientModel":
        return ClientModel(
            arch=self.arch,
            theta=[layer.copy() for layer in self.theta],
            psi=[layer.copy() for layer in self.psi],
            phi=self.phi.copy(),
        )


@dataclass
class GradientBundle:
    """모델 파라미터와 프로토타입에 대한 기울기 (shape 일치)"""

    d_theta: List[np.ndarray]
    d_psi: List[np.ndarray]
    d_phi: List[np.ndarray]
    d_xi: Mat
    terms: LossTerms = field(default_factory=LossTerms)

    def flat(self) -> List[np.ndarray]:
        """ClientModel.parameters() + [ξ] 와 같은 순서"""
        return [*self.d_theta, *self.d_psi, *self.d_phi, self.d_xi]


def init_prototypes(num_classes: int, proj_dim: int, rng: np.random.Generator) -> Mat:
    """클라이언트별 무작위 프로토타입 초기화 (층 초기화와 같은 uniform fan-in 규칙)"""
    bound = np.sqrt(1.0 / proj_dim)
    return rng.uniform(-bound, bound, size=(num_classes, proj_dim))


# ==================== 순전파 / 테이프 ====================

def _run_stack(
    layers: Sequence[Dense],
    x: np.ndarray,
    relu_out: bool = False,
) -> Tuple[np.ndarray, List[Tuple[np.ndarray, np.ndarray]]]:
    """층 사이에 ReLU, 마지막 층은 relu_out 일 때만 ReLU. (입력, pre-activation) 테이프를 함께 반환"""
    tape = []
    h = x
    last = len(layers) - 1
    for k, layer in enumerate(layers):
        pre = layer(h)
        tape.append((h, pre))
        h = pre if (k == last and not relu_out) else np.maximum(pre, 0.0)
    return h, tape


def _unwind_stack(
    layers: Sequence[Dense],
    tape: List[Tuple[np.ndarray, np.ndarray]],
    grad_out: np.ndarray,
    relu_out: bool = False,
) -> Tuple[List[np.ndarray], np.ndarray]:
    """테이프를 거꾸로 되감아 (W, b) 기울기 목록과 입력 기울기를 반환"""
    grads: List[np.ndarray] = [np.empty(0)] * (2 * len(layers))
    g = grad_out
    last = len(layers) - 1
    for k in range(last, -1, -1):
        h_in, pre = tape[k]
        if k != last or relu_out:
            g = g * (pre > 0.0)
        grads[2 * k] = g.T @ h_in
        grads[2 * k + 1] = g.sum(axis=0)
        g = g @ layers[k].weight
    return grads, g


def _as_batch(m: ClientModel, x) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != m.arch.input_dim:
        raise ShapeError(f"input has shape {np.shape(x)}, model expects width {m.arch.input_dim}")
    return arr, single


def forward_features(m: ClientModel, x) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    z = f_θ(x), p = f_ψ(z), logits = g_φ(z)

    Args:
        x: 단일 벡터 (d,) 또는 배치 (n, d)
    """
    batch, single = _as_batch(m, x)
    z, _ = _run_stack(m.theta, batch, relu_out=True)
    p, _ = _run_stack(m.psi, z)
    logits = m.phi(z)
    if single:
        return z[0], p[0], logits[0]
    return z, p, logits


def _forward_views(m: ClientModel, x_views, labels, cfg: LossConfig):
    batch, _ = _as_batch(m, x_views)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (batch.shape[0],):
        raise ShapeError(f"labels shape {labels.shape} does not match batch of {batch.shape[0]}")
    z, theta_tape = _run_stack(m.theta, batch, relu_out=True)
    p, psi_tape = _run_stack(m.psi, z)
    logits = m.phi(z)
    vb = ViewBatch.from_raw(p, z, logits, labels, normalize=cfg.needs_projections)
    return vb, theta_tape, psi_tape


def _check_prototypes(m: ClientModel, xi: Mat) -> None:
    if np.shape(xi) != (m.arch.num_classes, m.arch.proj_dim):
        raise ShapeError(f"prototypes must be {m.arch.num_classes}x{m.arch.proj_dim}, got {np.shape(xi)}")


def loss_value(m: ClientModel, x_views, labels, xi: Mat, cfg: LossConfig) -> float:
    """순전파 + 손실만 계산 (기울기 없음)"""
    _check_prototypes(m, xi)
    vb, _, _ = _forward_views(m, x_views, labels, cfg)
    terms, _, _, _ = total_loss_and_grads(vb, xi, cfg)
    return terms.total


def backward(m: ClientModel, x_views, labels, xi: Mat, cfg: LossConfig) -> Tuple[float, GradientBundle]:
    """
    두 뷰가 쌓인 배치에서 l̃ 와 (θ, ψ, φ, ξ) 에 대한 정확한 기울기 계산

    Args:
        x_views: (2B, d) - [x_a; x_b]
        labels: (2B,) - 두 뷰에 같은 라벨
        xi: (K, d_p) 프로토타입
        cfg: 활성화된 손실 항 설정

    Returns:
        (loss, GradientBundle)
    """
    if np.shape(x_views)[0] == 0:
        raise ShapeError("batch must be nonempty")
    _check_prototypes(m, xi)
    vb, theta_tape, psi_tape = _forward_views(m, x_views, labels, cfg)
    terms, d_phat, d_logits, d_xi = total_loss_and_grads(vb, xi, cfg)

    dz = d_logits @ m.phi.weight
    d_phi = [d_logits.T @ vb.latents, d_logits.sum(axis=0)]

    if d_phat is not None:
        d_p = normalize_rows_backward(vb.projections, vb.proj_norms, d_phat)
        d_psi, dz_from_proj = _unwind_stack(m.psi, psi_tape, d_p)
        dz = dz + dz_from_proj
    else:
        d_psi = [np.zeros_like(a) for a in _layer_arrays(m.psi)]

    d_theta, _ = _unwind_stack(m.theta, theta_tape, dz, relu_out=True)
    grads = GradientBundle(d_theta=d_theta, d_psi=d_psi, d_phi=d_phi, d_xi=d_xi, terms=terms)
    return terms.total, grads


def _layer_arrays(layers: Sequence[Dense]) -> List[np.ndarray]:
    out: List[np.ndarray] = []
    for layer in layers:
        out.extend((layer.weight, layer.bias))
    return out


# ==================== 체크포인트 ====================

def save_params(m: ClientModel, xi: Optional[Mat], path) -> Tuple[Path, Path]:
    """
    파라미터를 평탄한 little-endian float64 파일 + JSON 헤더로 저장

    Returns:
        (헤더 경로, 데이터 경로)
    """
    base = Path(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    arrays = list(zip(m.parameter_names(), m.parameters()))
    if xi is not None:
        arrays.append(("xi", np.asarray(xi)))
    header = {
        "format": "flat-float64-le",
        "arch": m.arch.to_dict(),
        "tensors": [{"name": name, "shape": list(arr.shape)} for name, arr in arrays],
    }
    header_path = base.with_suffix(".json")
    data_path = base.with_suffix(".f64")
    header_path.write_text(json.dumps(header, indent=2), encoding="utf-8")
    flat = np.concatenate([arr.ravel() for _, arr in arrays]).astype("<f8")
    flat.tofile(data_path)
    logger.debug("saved %d tensors to %s", len(arrays), data_path)
    return header_path, data_path


def load_params(path) -> Tuple[ClientModel, Optional[Mat]]:
    """save_params 로 저장한 모델과 프로토타입 복원"""
    base = Path(path)
    header = json.loads(base.with_suffix(".json").read_text(encoding="utf-8"))
    flat = np.fromfile(base.with_suffix(".f64"), dtype="<f8").astype(np.float64)
    a = header["arch"]
    arch = ArchSpec(
        hidden_sizes=tuple(a["hidden_sizes"]),
        input_dim=a["input_dim"],
        latent_dim=a["latent_dim"],
        proj_dim=a["proj_dim"],
        num_classes=a["num_classes"],
    )
    model = ClientModel.initialize(arch, np.random.default_rng(0))
    expected = dict(zip(model.parameter_names(), model.parameters()))

    offset = 0
    xi = None
    for spec in header["tensors"]:
        shape = tuple(spec["shape"])
        size = int(np.prod(shape)) if shape else 1
        chunk = flat[offset:offset + size].reshape(shape)
        offset += size
        if spec["name"] == "xi":
            xi = chunk.copy()
            continue
        target = expected.get(spec["name"])
        if target is None or target.shape != shape:
            raise ShapeError(f"checkpoint tensor {spec['name']} {shape} does not fit the architecture")
        target[...] = chunk
    if offset != flat.size:
        raise ShapeError(f"checkpoint holds {flat.size} scalars, header describes {offset}")
    return model, xi
