#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
🌐 P2P Network Simulator
라운드 동기식 P2P 시뮬레이터: PML → 분류기 교환 + CGL → 프로토타입 교환 → 집계

모든 이웃 읽기는 라운드 시작 시점에 고정된 스냅샷을 통해서만 이루어진다.
따라서 클라이언트 실행 순서(또는 스레드 병렬 실행)는 결과에 영향을 주지 않는다.
"""

import logging
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from core.cgl import (
    check_row_stochastic,
    cgl_update,
    confidence_vector,
    infer_similarity,
    neighbors,
    uniform_similarity,
)
from core.config import RunConfig
from core.errors import MaplError, NonFiniteLossError, ShapeError, StochasticityError
from core.losses import LossTerms
from core.metrics import (
    MetricRow,
    RunResult,
    accuracy,
    classifier_similarity_matrix,
    embedding_projection,
    graph_recovery,
    mean_std,
)
from core.model import ARCH_POOL, ClientModel, forward_features, init_prototypes, sample_arch
from core.numkernels import Mat, Vec
from core.pml import AdamOptimizer, PMLConfig, pml_epoch
from core.scenarios import ClientDataset, generate

logger = logging.getLogger(__name__)

# SeedSequence spawn_key 첫 성분. 0, 1 은 scenarios 가 사용한다.
INIT_STREAM = 2
TRAIN_STREAM = 3
# 모든 클라이언트가 공유하는 ψ, φ, ξ 초기값
HEAD_STREAM = 4
# 같은 backbone 프로파일끼리 공유하는 θ 초기값
BACKBONE_STREAM = 5


# ==================== 메시지 / 통신 기록 ====================

class PayloadKind(str, Enum):
    PROTOTYPES = "prototypes"
    CLASSIFIER = "classifier"


@dataclass(frozen=True)
class RoundMessage:
    """sender 의 스냅샷 한 조각이 receiver 에게 전달됨"""

    sender: int
    receiver: int
    payload_kind: PayloadKind
    scalar_count: int

    def __post_init__(self):
        if self.sender == self.receiver:
            raise MaplError(f"client {self.sender} cannot message itself")
        if self.scalar_count <= 0:
            raise MaplError(f"message {self.sender}->{self.receiver} carries no scalars")


@dataclass
class RoundComm:
    """한 라운드의 메시지 수와 접촉 수"""

    round: int
    messages: int
    contacts: int
    received: Dict[int, int]


class CommLog:
    """라운드별 접촉 수와 누적 통계 (메시지 자체는 보관하지 않는다)"""

    def __init__(self, num_clients: int):
        self.num_clients = num_clients
        self.rounds: List[RoundComm] = []
        self.total_contacts = 0
        self.messages_by_kind: Dict[str, int] = {k.value: 0 for k in PayloadKind}
        self.scalars_by_kind: Dict[str, int] = {k.value: 0 for k in PayloadKind}

    def record(self, t: int, messages: Sequence[RoundMessage]) -> RoundComm:
        """
        라운드 t 의 메시지 기록

        접촉은 (sender, receiver) 순서쌍당 라운드마다 한 번만 센다.
        """
        pairs = {(msg.sender, msg.receiver) for msg in messages}
        limit = self.num_clients * (self.num_clients - 1)
        if len(pairs) > limit:
            raise MaplError(f"round {t}: {len(pairs)} contacts exceed M(M-1) = {limit}")
        received: Dict[int, int] = {}
        for _, receiver in pairs:
            received[receiver] = received.get(receiver, 0) + 1
        for msg in messages:
            self.messages_by_kind[msg.payload_kind.value] += 1
            self.scalars_by_kind[msg.payload_kind.value] += msg.scalar_count
        entry = RoundComm(round=t, messages=len(messages), contacts=len(pairs), received=received)
        self.rounds.append(entry)
        self.total_contacts += entry.contacts
        return entry

    @property
    def last(self) -> Optional[RoundComm]:
        return self.rounds[-1] if self.rounds else None

    def totals(self) -> Dict:
        return {
            "contacts": self.total_contacts,
            "messages": sum(self.messages_by_kind.values()),
            "messages_by_kind": dict(self.messages_by_kind),
            "scalars_by_kind": dict(self.scalars_by_kind),
            "rounds_communicating": sum(1 for r in self.rounds if r.contacts > 0),
            "per_round_contacts": [r.contacts for r in self.rounds],
        }


# ==================== 네트워크 상태 ====================

@dataclass
class ClientState:
    """클라이언트 하나가 소유한 상태 (자기 행 w 포함)"""

    index: int
    cluster: int
    model: ClientModel
    xi: Mat
    optimizer: AdamOptimizer
    w: Vec
    rng: np.random.Generator
    dataset: ClientDataset
    last_terms: Optional[LossTerms] = None

    @property
    def degree(self) -> float:
        return float(np.sum(self.w) - self.w[self.index])


@dataclass(frozen=True)
class Snapshot:
    """라운드 시작 시 공개된 φ, ξ 사본 (읽기 전용)"""

    phis: Tuple[Vec, ...]
    xis: Tuple[Mat, ...]


@dataclass
class NetworkState:
    """시뮬레이터 전체 상태"""

    config: RunConfig
    clients: List[ClientState]
    gamma: Vec
    clusters: List[int]
    comm: CommLog
    round: int = 0
    pml: PMLConfig = field(default_factory=PMLConfig)

    @property
    def num_clients(self) -> int:
        return len(self.clients)

    def snapshot(self) -> Snapshot:
        return Snapshot(
            phis=tuple(c.model.classifier_vector().copy() for c in self.clients),
            xis=tuple(c.xi.copy() for c in self.clients),
        )

    def weight_matrix(self) -> Mat:
        return np.stack([c.w for c in self.clients])

    def check_mixing(self) -> None:
        """모든 행이 확률 단체 위에 있는지 확인. 위반 시 StochasticityError"""
        for c in self.clients:
            check_row_stochastic(c.w, who=f"w[{c.index}] at round {self.round}")

    def can_communicate(self) -> bool:
        """통신 예산이 최악의 라운드 (M(M-1) 접촉) 를 감당할 수 있을 때만 통신"""
        if self.config.method == "local":
            return False
        budget = self.config.comm_budget
        if budget is None:
            return True
        m = self.num_clients
        return budget - self.comm.total_contacts >= m * (m - 1)


def initialize_network(cfg: RunConfig) -> NetworkState:
    """
    데이터 생성, 클라이언트별 모델/프로토타입/옵티마이저 초기화

    w 초기값은 균등 1/M (local 은 자기 자신 e_i).
    ψ, φ, ξ 는 모든 클라이언트가 같은 값에서, θ 는 같은 backbone 끼리 같은 값에서 출발한다.
    """
    datasets, clusters = generate(cfg.scenario, cfg.seed)
    m = len(datasets)
    spec = cfg.scenario
    clients: List[ClientState] = []
    for i, ds in enumerate(datasets):
        init_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(INIT_STREAM, i)))
        train_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(TRAIN_STREAM, i)))
        pool_index = int(init_rng.integers(len(ARCH_POOL))) if cfg.model.heterogeneous else 0
        arch = sample_arch(pool_index, spec.input_dim, cfg.model.latent_dim, spec.num_classes)
        head_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(HEAD_STREAM,)))
        backbone_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(BACKBONE_STREAM, pool_index)))
        model = ClientModel.initialize_for_network(arch, backbone_rng, head_rng)
        xi = init_prototypes(spec.num_classes, arch.proj_dim, head_rng)
        optimizer = AdamOptimizer(
            model.parameters() + [xi],
            lr=cfg.train.lr,
            beta1=cfg.train.beta1,
            beta2=cfg.train.beta2,
            eps=cfg.train.adam_eps,
        )
        if cfg.method == "local":
            w = np.zeros(m)
            w[i] = 1.0
        else:
            w = np.full(m, 1.0 / m)
        clients.append(
            ClientState(
                index=i, cluster=ds.cluster, model=model, xi=xi,
                optimizer=optimizer, w=w, rng=train_rng, dataset=ds,
            )
        )
        logger.debug("client %d: cluster %d, backbone %s, %d train samples", i, ds.cluster, arch.hidden_sizes, ds.num_train)

    return NetworkState(
        config=cfg,
        clients=clients,
        gamma=confidence_vector([ds.num_train for ds in datasets], cfg.cgl.use_gamma),
        clusters=clusters,
        comm=CommLog(m),
        pml=PMLConfig(loss=cfg.loss, augment=cfg.augment, batch_size=cfg.train.batch_size),
    )


# ==================== 라운드 ====================

def aggregate_prototypes(
    xi_self: Mat,
    neighbor_xis: Mapping[int, Mat],
    w: Vec,
    self_index: int,
) -> Mat:
    """
    ξ ← w_ii ξ_i + Σ_{j∈N_i} w_ij ξ_j

    가지치기된 간선의 질량은 자기 + 이웃 질량으로 재정규화해 볼록 결합을 유지한다.
    """
    xi_self = np.asarray(xi_self, dtype=np.float64)
    mass = float(w[self_index]) + sum(float(w[j]) for j in neighbor_xis)
    if mass > 1.0 + 1e-9:
        raise StochasticityError(f"aggregation weights of client {self_index} sum to {mass}")
    if mass <= 0.0:
        return xi_self.copy()
    out = w[self_index] * xi_self
    for j, xi_j in neighbor_xis.items():
        if np.shape(xi_j) != xi_self.shape:
            raise ShapeError(f"prototypes of client {j} have shape {np.shape(xi_j)}, expected {xi_self.shape}")
        out = out + w[j] * np.asarray(xi_j)
    return out / mass


def _client_step(state: NetworkState, i: int, snap: Snapshot, communicate: bool) -> List[RoundMessage]:
    """클라이언트 i 의 한 라운드. 자기 상태만 수정하고 보낼 메시지를 돌려준다"""
    cfg = state.config
    c = state.clients[i]
    ds = c.dataset
    for _ in range(cfg.train.local_epochs):
        try:
            _, _, report = pml_epoch(c.model, c.xi, ds.train_x, ds.train_y, state.pml, c.optimizer, c.rng)
        except NonFiniteLossError:
            logger.error("client %d aborted local training in round %d", i, state.round + 1)
            raise
        c.last_terms = report.terms
    if not communicate:
        return []

    m = state.num_clients
    threshold = cfg.cgl.prune_threshold
    messages: List[RoundMessage] = []
    if cfg.method == "mapl" and state.round >= cfg.cgl.warmup:
        nbrs = neighbors(c.w, i, threshold)
        if cfg.cgl.use_similarity:
            phi_size = c.model.classifier_size
            messages.extend(RoundMessage(j, i, PayloadKind.CLASSIFIER, phi_size) for j in nbrs)
            sim = infer_similarity(c.model.classifier_vector(), {j: snap.phis[j] for j in nbrs}, i, m)
        else:
            sim = uniform_similarity(nbrs, i, m)
        c.w = cgl_update(c.w, sim, state.gamma, cfg.cgl)

    nbrs = neighbors(c.w, i, threshold)
    messages.extend(RoundMessage(j, i, PayloadKind.PROTOTYPES, c.xi.size) for j in nbrs)
    c.xi[...] = aggregate_prototypes(c.xi, {j: snap.xis[j] for j in nbrs}, c.w, i)
    return messages


def run_round(
    state: NetworkState,
    executor: Optional[Executor] = None,
    order: Optional[Sequence[int]] = None,
) -> NetworkState:
    """
    한 라운드 실행 (t < T)

    Args:
        state: 현재 상태 (제자리에서 갱신)
        executor: 있으면 클라이언트를 병렬 실행
        order: 순차 실행 시 클라이언트 처리 순서 (기본 0..M-1)
    """
    total = state.config.train.rounds
    if state.round >= total:
        raise MaplError(f"round {state.round} is past the configured {total} rounds")
    snap = state.snapshot()
    communicate = state.can_communicate()
    ids = list(range(state.num_clients))

    if executor is not None:
        futures = {i: executor.submit(_client_step, state, i, snap, communicate) for i in ids}
        outgoing = {i: futures[i].result() for i in ids}
    else:
        outgoing = {}
        for i in (order if order is not None else ids):
            outgoing[i] = _client_step(state, i, snap, communicate)

    # 배리어: 메시지는 클라이언트 번호 순으로 합친다
    messages = [msg for i in ids for msg in outgoing[i]]
    state.round += 1
    state.comm.record(state.round, messages)
    if not communicate and state.config.method != "local":
        logger.debug("round %d ran silently (communication budget exhausted)", state.round)
    state.check_mixing()
    return state


# ==================== 실험 ====================

def evaluate(state: NetworkState) -> List[float]:
    return [accuracy(c.model, c.dataset.test_x, c.dataset.test_y) for c in state.clients]


def _rows_for_round(state: NetworkState, t: int, accs: Optional[List[float]]) -> List[MetricRow]:
    received = state.comm.last.received if (t > 0 and state.comm.last) else {}
    rows = []
    for c in state.clients:
        row = MetricRow(round=t, client=c.index, degree=c.degree, contacts=received.get(c.index, 0))
        if t > 0 and c.last_terms is not None:
            row.loss_total = c.last_terms.total
            row.loss_cont = c.last_terms.cont
            row.loss_ce = c.last_terms.ce
            row.loss_proto = c.last_terms.proto
            row.loss_uni = c.last_terms.uni
        if accs is not None:
            row.acc = accs[c.index]
        rows.append(row)
    return rows


def pooled_embeddings(state: NetworkState) -> List[Tuple[int, int, float, float]]:
    """모든 클라이언트의 테스트 잠재 벡터를 모아 2차원 주성분 좌표로 사영"""
    owners, labels, latents = [], [], []
    for c in state.clients:
        z, _, _ = forward_features(c.model, c.dataset.test_x)
        latents.append(z)
        owners.extend([c.index] * len(z))
        labels.extend(int(y) for y in c.dataset.test_y)
    coords = embedding_projection(np.concatenate(latents))
    return [(o, y, float(a), float(b)) for o, y, (a, b) in zip(owners, labels, coords)]


def run_experiment(
    cfg: RunConfig,
    on_round: Optional[Callable[[NetworkState], None]] = None,
) -> RunResult:
    """
    T 라운드 전체 실행

    Args:
        cfg: 설정 (검증 실패 시 ConfigError 에 위반 항목 전부)
        on_round: 라운드 경계마다 호출되는 관측 훅 (테스트용)
    """
    cfg.check()
    train = cfg.train
    state = initialize_network(cfg)
    logger.info(
        "starting %s: scenario %d, %d clients, %d rounds, seed %d",
        cfg.method, cfg.scenario.scenario_id, state.num_clients, train.rounds, cfg.seed,
    )

    accs = evaluate(state)
    rows = _rows_for_round(state, 0, accs)
    snapshots: Dict[int, Mat] = {}

    executor = ThreadPoolExecutor(max_workers=train.parallel) if train.parallel > 1 else None
    try:
        for t in range(1, train.rounds + 1):
            run_round(state, executor)
            if on_round is not None:
                on_round(state)
            is_eval = t % train.eval_interval == 0 or t == train.rounds
            accs = evaluate(state) if is_eval else None
            rows.extend(_rows_for_round(state, t, accs))
            if t % train.snapshot_interval == 0:
                snapshots[t] = state.weight_matrix()
            if accs is not None:
                logger.info(
                    "round %d/%d: mean acc %.4f, contacts %d (total %d)",
                    t, train.rounds, float(np.mean(accs)), state.comm.last.contacts, state.comm.total_contacts,
                )
    finally:
        if executor is not None:
            executor.shutdown()

    final_accs = evaluate(state)
    acc_mean, acc_std = mean_std(final_accs)
    weights = state.weight_matrix()
    result = RunResult(
        rows=rows,
        acc_mean=acc_mean,
        acc_std=acc_std,
        per_client_acc=final_accs,
        final_weights=weights,
        weight_snapshots=snapshots,
        comm=state.comm.totals(),
        config=cfg.to_dict(),
        seed=cfg.seed,
        graph_recovery=graph_recovery(weights, state.clusters),
        classifier_similarity=classifier_similarity_matrix([c.model for c in state.clients]),
        embeddings=pooled_embeddings(state),
        state=state,
    )
    logger.info(
        "finished: acc %.4f ± %.4f, total contacts %d, graph recovery %.3f",
        acc_mean, acc_std, result.comm["contacts"], result.graph_recovery,
    )
    return result
