#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
P2P 시뮬레이터 테스트
집계, 라운드 격리, 접촉 수, 예산, 결정성
"""

import os
import sys
from concurrent.futures import ThreadPoolExecutor

sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np

import core.network as network
from core.errors import MaplError, ShapeError, StochasticityError
from core.network import (
    CommLog,
    PayloadKind,
    RoundMessage,
    aggregate_prototypes,
    initialize_network,
    run_experiment,
    run_round,
)
from core.oracles import tiny_run_config
from core.pml import pml_epoch
from tests.harness import run_tests


def _same_state(a, b):
    for ca, cb in zip(a.clients, b.clients):
        for pa, pb in zip(ca.model.parameters() + [ca.xi, ca.w], cb.model.parameters() + [cb.xi, cb.w]):
            if not np.array_equal(pa, pb):
                return False
    return True


# ==================== 집계 ====================

def test_aggregate_midpoint():
    out = aggregate_prototypes(np.array([[1.0, 0.0]]), {1: np.array([[0.0, 1.0]])}, np.array([0.5, 0.5]), 0)
    assert np.allclose(out, [[0.5, 0.5]])


def test_aggregate_self_only_is_identity():
    xi = np.random.default_rng(0).normal(size=(3, 2))
    out = aggregate_prototypes(xi, {}, np.array([1.0, 0.0, 0.0]), 0)
    assert np.array_equal(out, xi)


def test_aggregate_matches_direct_sum():
    rng = np.random.default_rng(1)
    xis = [rng.normal(size=(4, 3)) for _ in range(3)]
    w = rng.dirichlet(np.ones(3))
    out = aggregate_prototypes(xis[1], {0: xis[0], 2: xis[2]}, w, 1)
    assert np.allclose(out, w[0] * xis[0] + w[1] * xis[1] + w[2] * xis[2], atol=1e-12)


def test_aggregate_renormalizes_pruned_mass():
    xis = [np.full((1, 2), float(v)) for v in (1.0, 2.0, 3.0)]
    w = np.array([0.5, 0.3, 0.2])
    out = aggregate_prototypes(xis[0], {1: xis[1]}, w, 0)
    assert np.allclose(out, (0.5 * 1.0 + 0.3 * 2.0) / 0.8)


def test_aggregate_errors():
    try:
        aggregate_prototypes(np.ones((2, 2)), {1: np.ones((3, 2))}, np.array([0.5, 0.5]), 0)
    except ShapeError:
        pass
    else:
        raise AssertionError("prototype shape mismatch accepted")
    try:
        aggregate_prototypes(np.ones((2, 2)), {1: np.ones((2, 2))}, np.array([0.7, 0.7]), 0)
    except StochasticityError:
        pass
    else:
        raise AssertionError("mass above one accepted")


# ==================== 통신 기록 ====================

def test_message_invariants():
    for args in ((1, 1, PayloadKind.PROTOTYPES, 4), (0, 1, PayloadKind.CLASSIFIER, 0)):
        try:
            RoundMessage(*args)
        except MaplError:
            continue
        raise AssertionError(f"invalid message {args} accepted")


def test_contact_counts_pairs_once():
    log = CommLog(3)
    entry = log.record(1, [
        RoundMessage(1, 0, PayloadKind.CLASSIFIER, 5),
        RoundMessage(1, 0, PayloadKind.PROTOTYPES, 8),
        RoundMessage(2, 0, PayloadKind.PROTOTYPES, 8),
    ])
    assert entry.contacts == 2
    assert entry.received == {0: 2}
    assert entry.messages == 3
    totals = log.totals()
    assert totals["messages"] == 3
    assert totals["scalars_by_kind"] == {"prototypes": 16, "classifier": 5}


def test_log_keeps_counts_not_messages():
    log = CommLog(4)
    for t in range(1, 4):
        log.record(t, [RoundMessage(j, 0, PayloadKind.PROTOTYPES, 8) for j in (1, 2, 3)])
    assert [r.messages for r in log.rounds] == [3, 3, 3]
    assert all(isinstance(r.messages, int) for r in log.rounds)
    assert log.totals()["per_round_contacts"] == [3, 3, 3]


# ==================== 초기화 ====================

def test_clients_share_head_initialization():
    state = initialize_network(tiny_run_config("mapl", clients=4, rounds=1))
    first = state.clients[0]
    for c in state.clients[1:]:
        assert np.array_equal(c.model.classifier_vector(), first.model.classifier_vector())
        assert np.array_equal(c.xi, first.xi)
        for a, b in zip(c.model.psi, first.model.psi):
            assert np.array_equal(a.weight, b.weight) and np.array_equal(a.bias, b.bias)
        if c.model.arch == first.model.arch:
            for a, b in zip(c.model.theta, first.model.theta):
                assert np.array_equal(a.weight, b.weight)


# ==================== 라운드 ====================

def test_single_client_never_communicates():
    result = run_experiment(tiny_run_config("mapl", clients=1, rounds=2))
    assert result.comm["contacts"] == 0
    assert np.array_equal(result.final_weights, [[1.0]])


def test_all_to_all_contacts():
    result = run_experiment(tiny_run_config("mapl_no_cgl", clients=4, rounds=3))
    assert result.comm["contacts"] == 4 * 3 * 3
    assert result.comm["per_round_contacts"] == [12, 12, 12]
    assert result.comm["messages_by_kind"]["classifier"] == 0
    assert np.allclose(result.final_weights, 0.25)


def test_mapl_sends_classifiers_after_warmup():
    cfg = tiny_run_config("mapl", clients=4, rounds=3)
    cfg.cgl.warmup = 1
    result = run_experiment(cfg)
    assert result.comm["messages_by_kind"]["classifier"] > 0
    assert all(c <= 12 for c in result.comm["per_round_contacts"])
    for row in result.final_weights:
        assert np.all(row >= 0) and abs(row.sum() - 1.0) <= 1e-9


def test_local_has_identity_mixing():
    result = run_experiment(tiny_run_config("local", clients=4, rounds=2))
    assert result.comm["contacts"] == 0
    assert np.array_equal(result.final_weights, np.eye(4))


def test_local_equals_isolated_training():
    cfg = tiny_run_config("local", clients=4, rounds=3)
    result = run_experiment(cfg)
    state = initialize_network(cfg)
    c = state.clients[2]
    for _ in range(cfg.train.rounds * cfg.train.local_epochs):
        pml_epoch(c.model, c.xi, c.dataset.train_x, c.dataset.train_y, state.pml, c.optimizer, c.rng)
    trained = result.state.clients[2]
    for a, b in zip(c.model.parameters() + [c.xi], trained.model.parameters() + [trained.xi]):
        assert np.array_equal(a, b)


def test_mid_round_writes_stay_invisible_until_next_round():
    cfg = tiny_run_config("mapl", clients=4, rounds=2)
    cfg.cgl.warmup = 0
    reference = initialize_network(cfg)
    tampered = initialize_network(cfg)
    run_round(reference, order=[0, 1, 2, 3])

    original = network._client_step

    def step_then_overwrite(state, i, snap, communicate):
        out = original(state, i, snap, communicate)
        if i == 0:
            state.clients[0].xi[...] = 1e6
            state.clients[0].model.phi.weight[...] = -1e6
        return out

    network._client_step = step_then_overwrite
    try:
        run_round(tampered, order=[0, 1, 2, 3])
    finally:
        network._client_step = original

    for a, b in zip(reference.clients[1:], tampered.clients[1:]):
        assert np.max(np.abs(b.xi)) < 1e3
        assert np.array_equal(a.xi, b.xi)
        assert np.array_equal(a.w, b.w)


def test_pruned_edge_cuts_round_contacts():
    cfg = tiny_run_config("mapl", clients=4, rounds=2)
    cfg.cgl.warmup = 0
    state = initialize_network(cfg)
    state.clients[0].w = np.array([0.5, 0.5, 0.0, 0.0])
    run_round(state)
    m = state.num_clients
    assert state.comm.last.contacts < m * (m - 1)
    assert state.comm.last.received[0] == 1
    assert state.clients[0].w[2] == 0.0 and state.clients[0].w[3] == 0.0


def test_client_order_does_not_matter():
    cfg = tiny_run_config("mapl", clients=4, rounds=2)
    cfg.cgl.warmup = 0
    forward = initialize_network(cfg)
    backward = initialize_network(cfg)
    for _ in range(2):
        run_round(forward)
        run_round(backward, order=[3, 2, 1, 0])
    assert _same_state(forward, backward)


def test_parallel_matches_serial():
    cfg = tiny_run_config("mapl", clients=4, rounds=2)
    cfg.cgl.warmup = 0
    serial = initialize_network(cfg)
    threaded = initialize_network(cfg)
    with ThreadPoolExecutor(max_workers=4) as pool:
        for _ in range(2):
            run_round(serial)
            run_round(threaded, executor=pool)
    assert _same_state(serial, threaded)


def test_budget_silences_rounds():
    cfg = tiny_run_config("mapl_no_cgl", clients=4, rounds=4)
    cfg.comm_budget = 24
    result = run_experiment(cfg)
    assert result.comm["per_round_contacts"] == [12, 12, 0, 0]
    assert result.comm["rounds_communicating"] == 2


def test_zero_rounds_returns_initial_metrics():
    result = run_experiment(tiny_run_config("mapl", clients=4, rounds=0))
    assert {r.round for r in result.rows} == {0}
    assert len(result.rows) == 4
    assert result.comm["contacts"] == 0 and result.weight_snapshots == {}


def test_run_round_past_horizon_raises():
    state = initialize_network(tiny_run_config("mapl_no_cgl", clients=2, rounds=1))
    run_round(state)
    try:
        run_round(state)
    except MaplError:
        return
    raise AssertionError("round past T accepted")


def test_mixing_violation_aborts():
    state = initialize_network(tiny_run_config("mapl_no_cgl", clients=2, rounds=1))
    state.clients[1].w = np.array([0.9, 0.9])
    try:
        state.check_mixing()
    except StochasticityError:
        return
    raise AssertionError("non-stochastic row accepted")


def test_same_seed_same_result():
    a = run_experiment(tiny_run_config("mapl", clients=4, rounds=2, seed=5))
    b = run_experiment(tiny_run_config("mapl", clients=4, rounds=2, seed=5))
    assert a.rows == b.rows
    assert np.array_equal(a.final_weights, b.final_weights)
    assert a.summary() == b.summary()


if __name__ == "__main__":
    sys.exit(run_tests(globals(), "P2P 시뮬레이터 테스트"))
