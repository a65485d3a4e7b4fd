#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🔍 Oracles & Verification Suite
손실/사영/그래프 학습을 독립적인 brute-force 구현과 대조하는 빠른 검증 묶음

run_oracle_suite() 가 verify 명령의 본체다.
"""

import itertools
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from core.cgl import CGLConfig, SimilarityVector, cgl_update, graph_loss
from core.config import RunConfig
from core.losses import LossConfig, ViewBatch, l_ce, l_cont, l_proto, l_uni
from core.model import ArchSpec, ClientModel, backward, init_prototypes, loss_value
from core.network import CommLog, PayloadKind, RoundMessage, run_experiment
from core.numkernels import SIMPLEX_TOL, project_to_simplex, project_to_simplex_sort

logger = logging.getLogger(__name__)

FD_STEP = 1e-5
FD_REL_TOL = 1e-4
FD_ABS_TOL = 1e-6
FD_SMALL_GRAD = 1e-3


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


# ==================== brute-force 손실 ====================

def _unit(v: np.ndarray) -> np.ndarray:
    return v / math.sqrt(sum(float(x) * float(x) for x in v))


def brute_l_cont(p_hat: np.ndarray, labels: Sequence[int], tau: float) -> float:
    n = len(labels)
    total = 0.0
    for q in range(n):
        positives = [a for a in range(n) if a != q and labels[a] == labels[q]]
        if not positives:
            continue
        denom = sum(math.exp(float(np.dot(p_hat[q], p_hat[a])) / tau) for a in range(n) if a != q)
        for pos in positives:
            num = math.exp(float(np.dot(p_hat[q], p_hat[pos])) / tau)
            total -= math.log(num / denom) / len(positives)
    return total


def brute_l_ce(logits: np.ndarray, labels: Sequence[int]) -> float:
    total = 0.0
    for row, y in zip(logits, labels):
        denom = sum(math.exp(float(v)) for v in row)
        total -= math.log(math.exp(float(row[y])) / denom)
    return total


def brute_l_proto(p_hat: np.ndarray, labels: Sequence[int], xi: np.ndarray, tau: float) -> float:
    protos = [_unit(x) for x in xi]
    total = 0.0
    for p, y in zip(p_hat, labels):
        scores = [math.exp(float(np.dot(p, c)) / tau) for c in protos]
        total -= math.log(scores[y] / sum(scores))
    return total / len(labels)


def brute_l_uni(xi: np.ndarray) -> float:
    protos = [_unit(x) for x in xi]
    k = len(protos)
    total = 0.0
    for a in range(k):
        for b in range(k):
            if a != b:
                total += float(np.dot(protos[a], protos[b]))
    return total / k


# ==================== 그래프 / 미분 오라클 ====================

def grid_search_simplex(f: Callable[[np.ndarray], float], dim: int, steps: int = 200) -> Tuple[float, np.ndarray]:
    """dim ≤ 3 단체 위 격자에서 f 의 최솟값과 그 위치"""
    best_value, best_point = math.inf, None
    for combo in itertools.product(range(steps + 1), repeat=dim - 1):
        if sum(combo) > steps:
            continue
        point = np.array([*combo, steps - sum(combo)], dtype=np.float64) / steps
        value = f(point)
        if value < best_value:
            best_value, best_point = value, point
    return best_value, best_point


def finite_difference_check(
    f: Callable[[], float],
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    step: float = FD_STEP,
) -> Tuple[bool, str]:
    """
    params 를 제자리에서 흔들어 중앙 차분과 해석적 기울기를 비교

    |g| < 1e-3 인 항목은 절대 오차 1e-6, 나머지는 상대 오차 1e-4.
    """
    worst = ""
    for t, (p, g) in enumerate(zip(params, grads)):
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        for k in range(flat_p.size):
            saved = flat_p[k]
            flat_p[k] = saved + step
            up = f()
            flat_p[k] = saved - step
            down = f()
            flat_p[k] = saved
            numeric = (up - down) / (2.0 * step)
            analytic = float(flat_g[k])
            scale = max(abs(numeric), abs(analytic))
            err = abs(numeric - analytic)
            ok = err <= FD_ABS_TOL if scale < FD_SMALL_GRAD else err / scale <= FD_REL_TOL
            if not ok:
                worst = f"tensor {t} entry {k}: analytic {analytic:.3e} vs numeric {numeric:.3e}"
                return False, worst
    return True, worst


def tiny_arch(num_classes: int) -> ArchSpec:
    return ArchSpec(hidden_sizes=(5,), input_dim=3, latent_dim=4, proj_dim=4, num_classes=num_classes)


def gradient_instance(rng: np.random.Generator, flags: Tuple[bool, bool, bool, bool], k: int, b: int, tau: float):
    """(model, views, labels, ξ, cfg) 작은 무작위 인스턴스"""
    use_cont, use_uni, use_proto, use_ce = flags
    model = ClientModel.initialize(tiny_arch(k), rng)
    xi = init_prototypes(k, 4, rng)
    x = rng.normal(size=(b, 3))
    x_views = np.concatenate([x + 0.1 * rng.normal(size=x.shape), x + 0.1 * rng.normal(size=x.shape)])
    y = rng.integers(0, k, size=b)
    labels = np.concatenate([y, y])
    cfg = LossConfig(use_cont=use_cont, use_uni=use_uni, use_proto=use_proto, use_ce=use_ce, tau=tau)
    return model, x_views, labels, xi, cfg


def check_gradients(rng: Optional[np.random.Generator] = None) -> Tuple[bool, str]:
    """16 개 손실 조합 × K∈{2,3} (B, τ 교대) 인스턴스에서 해석적 기울기 대 중앙 차분"""
    rng = rng or np.random.default_rng(1)
    count = 0
    for idx, flags in enumerate(itertools.product((True, False), repeat=4)):
        for k in (2, 3):
            b = (2, 4)[(idx + k) % 2]
            tau = (0.5, 100.0)[idx % 2]
            model, x_views, labels, xi, cfg = gradient_instance(rng, flags, k, b, tau)
            _, grads = backward(model, x_views, labels, xi, cfg)
            params = model.parameters() + [xi]
            ok, detail = finite_difference_check(
                lambda: loss_value(model, x_views, labels, xi, cfg), params, grads.flat()
            )
            count += 1
            if not ok:
                return False, f"flags={flags} K={k} B={b} tau={tau}: {detail}"
    return True, f"{count} instances"


def check_projection(
    project_fn: Callable = project_to_simplex,
    trials: int = 1000,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[bool, str]:
    """무작위 벡터에서 project_fn 을 정렬 기반 오라클과 비교"""
    rng = rng or np.random.default_rng(2)
    for trial in range(trials):
        v = rng.uniform(-10.0, 10.0, size=int(rng.integers(2, 51)))
        try:
            got = np.asarray(project_fn(v), dtype=np.float64)
        except Exception as exc:
            return False, f"trial {trial}: projection raised {exc!r}"
        want = project_to_simplex_sort(v)
        if got.shape != want.shape:
            return False, f"trial {trial}: output shape {got.shape}, expected {want.shape}"
        if np.max(np.abs(got - want)) > SIMPLEX_TOL:
            return False, f"trial {trial}: differs from sort oracle by {np.max(np.abs(got - want)):.3e}"
        if np.any(got < 0) or abs(got.sum() - 1.0) > SIMPLEX_TOL:
            return False, f"trial {trial}: output not on the simplex (sum {got.sum()!r})"
    return True, f"{trials} vectors"


def check_loss_oracles(trials: int = 50, rng: Optional[np.random.Generator] = None) -> Tuple[bool, str]:
    """네 손실 함수를 이중 루프 구현과 비교 + 닫힌 형태 값"""
    rng = rng or np.random.default_rng(3)
    for trial in range(trials):
        k = int(rng.integers(2, 4))
        b = int(rng.integers(1, 4))
        tau = float(rng.choice([0.5, 1.0, 100.0]))
        y = rng.integers(0, k, size=b)
        labels = np.concatenate([y, y])
        p = rng.normal(size=(2 * b, 4))
        z = rng.normal(size=(2 * b, 4))
        logits = rng.normal(size=(2 * b, k))
        xi = rng.normal(size=(k, 4))
        vb = ViewBatch.from_raw(p, z, logits, labels)
        pairs = (
            ("l_cont", l_cont(vb, tau), brute_l_cont(vb.projections, labels, tau)),
            ("l_ce", l_ce(vb), brute_l_ce(logits, labels)),
            ("l_proto", l_proto(vb, xi, tau), brute_l_proto(vb.projections, labels, xi, tau)),
            ("l_uni", l_uni(xi), brute_l_uni(xi)),
        )
        for name, ours, brute in pairs:
            if abs(ours - brute) > 1e-10 * max(1.0, abs(brute)):
                return False, f"trial {trial}: {name} {ours!r} vs brute force {brute!r}"

    # 정렬/직교: p = ξ̂_0, ξ_1 ⊥ ξ_0, τ = 1 → log(1 + e^-1)
    aligned = ViewBatch.from_raw(np.array([[1.0, 0.0]]), np.zeros((1, 2)), np.zeros((1, 2)), [0])
    proto_value = l_proto(aligned, np.array([[1.0, 0.0], [0.0, 1.0]]), 1.0)
    if abs(proto_value - math.log1p(math.exp(-1.0))) > 1e-12:
        return False, f"aligned/orthogonal l_proto = {proto_value!r}"
    uni_value = l_uni(np.array([[1.0, 2.0], [2.0, 4.0]]))
    if abs(uni_value - 1.0) > 1e-12:
        return False, f"identical-pair l_uni = {uni_value!r}"
    single = ViewBatch.from_raw(np.array([[0.3, 0.4], [0.1, -0.2]]), np.zeros((2, 2)), np.zeros((2, 2)), [1, 1])
    cont_value = l_cont(single, 100.0)
    if cont_value != 0.0:
        return False, f"B=1 l_cont = {cont_value!r}"
    return True, f"{trials} instances + closed forms"


def check_contact_arithmetic() -> Tuple[bool, str]:
    """all-to-all 20 명 × 400 라운드 → 152,000 접촉 (분류기 + 프로토타입이어도 쌍당 한 번)"""
    m, rounds = 20, 400
    log = CommLog(m)
    for t in range(1, rounds + 1):
        messages = []
        for i in range(m):
            for j in range(m):
                if i != j:
                    messages.append(RoundMessage(j, i, PayloadKind.PROTOTYPES, 160))
                    messages.append(RoundMessage(j, i, PayloadKind.CLASSIFIER, 170))
        log.record(t, messages)
    if log.total_contacts != m * (m - 1) * rounds:
        return False, f"counted {log.total_contacts} contacts"
    return True, f"{log.total_contacts} contacts"


def cgl_oracle_instance(s_neighbor: float = -0.9) -> Tuple[SimilarityVector, np.ndarray, CGLConfig]:
    sim = SimilarityVector(
        s=np.array([-1.0, s_neighbor, 0.5]),
        valid_mask=np.ones(3, dtype=bool),
        self_index=0,
    )
    gamma = np.full(3, 1.0 / 3.0)
    return sim, gamma, CGLConfig(lr=0.01)


def cgl_minimize(sim: SimilarityVector, gamma: np.ndarray, cfg: CGLConfig, steps: int = 3000) -> np.ndarray:
    start = np.full(sim.size, 1.0 / sim.size)
    return cgl_update(start, sim, gamma, cfg, steps=steps)


def check_cgl_oracle() -> Tuple[bool, str]:
    """반복 CGL 이 3 차원 단체 격자 최솟값의 1e-3 이내에 도달하는지"""
    sim, gamma, cfg = cgl_oracle_instance()

    def loss(w):
        return graph_loss(w, sim, gamma, cfg.mu1, cfg.mu2, cfg.beta, cfg.eps, cfg.norm)

    w = cgl_minimize(sim, gamma, cfg)
    grid_value, grid_point = grid_search_simplex(loss, 3, steps=200)
    if loss(w) > grid_value + 1e-3:
        return False, f"CGL loss {loss(w):.6f} vs grid {grid_value:.6f} at {grid_point}"
    return True, f"CGL {loss(w):.6f} <= grid {grid_value:.6f} + 1e-3"


def tiny_run_config(method: str = "mapl", clients: int = 4, rounds: int = 3, seed: int = 0) -> RunConfig:
    """몇 초 안에 끝나는 작은 실험 설정"""
    cfg = RunConfig(method=method, seed=seed)
    cfg.scenario.num_clients = clients
    cfg.scenario.num_clusters = 2 if clients % 2 == 0 else 1
    cfg.scenario.num_classes = 4
    cfg.scenario.samples_per_class = 8
    cfg.scenario.test_per_class = 3
    cfg.scenario.input_dim = 6
    cfg.model.latent_dim = 4
    cfg.train.rounds = rounds
    cfg.train.batch_size = 16
    cfg.train.lr = 1e-3
    cfg.train.eval_interval = 1
    cfg.train.snapshot_interval = 1
    cfg.cgl.warmup = min(1, rounds)
    return cfg


def cluster_run_config(
    method: str = "mapl",
    seed: int = 0,
    clients: int = 6,
    clusters: int = 2,
    rounds: int = 60,
    warmup: int = 15,
) -> RunConfig:
    """
    클러스터 구조가 드러날 만큼만 돌리는 축소 시나리오 1 실험

    평가와 스냅샷은 마지막 라운드에서만 한다.
    """
    cfg = RunConfig(method=method, seed=seed)
    cfg.scenario.scenario_id = 1
    cfg.scenario.num_clients = clients
    cfg.scenario.num_clusters = clusters
    cfg.scenario.samples_per_class = 100
    cfg.scenario.test_per_class = 40
    cfg.train.rounds = rounds
    cfg.train.lr = 1e-3
    cfg.train.eval_interval = max(rounds, 1)
    cfg.train.snapshot_interval = max(rounds, 1)
    cfg.cgl.warmup = warmup
    cfg.cgl.steps = 5
    return cfg


def check_run_contacts() -> Tuple[bool, str]:
    """실제 작은 실행: mapl_no_cgl 은 M(M-1)T, local 은 0"""
    all_to_all = run_experiment(tiny_run_config("mapl_no_cgl", clients=4, rounds=3))
    if all_to_all.comm["contacts"] != 4 * 3 * 3:
        return False, f"mapl_no_cgl logged {all_to_all.comm['contacts']} contacts, expected 36"
    local = run_experiment(tiny_run_config("local", clients=4, rounds=3))
    if local.comm["contacts"] != 0:
        return False, f"local logged {local.comm['contacts']} contacts"
    return True, "mapl_no_cgl 36, local 0"


def run_oracle_suite(project_fn: Callable = project_to_simplex) -> List[CheckResult]:
    """verify 명령이 실행하는 빠른 검증 묶음"""
    checks = [
        ("gradient_exactness", check_gradients),
        ("simplex_projection_oracle", lambda: check_projection(project_fn)),
        ("loss_oracles", check_loss_oracles),
        ("contact_arithmetic", check_contact_arithmetic),
        ("cgl_grid_oracle", check_cgl_oracle),
        ("run_contacts", check_run_contacts),
    ]
    results = []
    for name, fn in checks:
        started = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:
            logger.exception("check %s raised", name)
            passed, detail = False, f"raised {exc!r}"
        results.append(CheckResult(name, passed, detail, time.perf_counter() - started))
    return results
