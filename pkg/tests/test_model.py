import numpy as np
import pytest

import hgad
from hgad.errors import (EmptyCandidate, EmptyEdgeSet, NodeIndexOutOfRange,
                         TraceMismatch)
from hgad.model import compute_centroid
from hgad.nn import OptimizerState, optimizer_step

from conftest import random_instance, well_conditioned_for_gradcheck
from oracles import central_difference_grads, params_as_lists, straight_line_forward
import math


def close(a, b, rel=1e-4, floor=1e-7):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.all(np.abs(a - b) <= floor + rel * np.maximum(np.abs(a), np.abs(b)))


def test_forward_singleton_edges_zero_loss():
    rng = np.random.default_rng(0)
    h = hgad.build_hypergraph(3, [[0], [1], [2]], rng.normal(size=(3, 2)))
    cfg = hgad.ModelConfig(hidden_dim=4, embedding_dim=3)
    params = hgad.init_parameters(cfg, 2, seed=1)
    trace = hgad.forward(h, params, cfg)
    assert np.array_equal(trace.pooled, np.zeros((3, 3)))
    assert np.array_equal(trace.centroid, np.zeros(3))
    assert trace.loss == 0.0


def test_forward_identical_nodes_and_edges_zero_loss():
    feats = np.tile([1.5, -2.0], (4, 1))
    h = hgad.build_hypergraph(4, [[0, 1, 2]] * 3, feats)
    cfg = hgad.ModelConfig(hidden_dim=3, embedding_dim=2)
    params = hgad.init_parameters(cfg, 2, seed=2)
    trace = hgad.forward(h, params, cfg)
    assert np.array_equal(trace.scores, np.zeros(3))
    assert trace.loss == 0.0


@pytest.mark.parametrize("pooling", ["maxmin", "mean"])
def test_forward_matches_scalar_loop_oracle(small_hypergraph, pooling):
    cfg = hgad.ModelConfig(hidden_dim=3, embedding_dim=2, pooling_mode=pooling)
    params = hgad.init_parameters(cfg, small_hypergraph.feature_dim, seed=5)
    trace = hgad.forward(small_hypergraph, params, cfg)
    vnn, enn = params_as_lists(params)
    _, _, scores, loss = straight_line_forward(
        4, small_hypergraph.edge_lists(), small_hypergraph.features.tolist(),
        vnn, enn, pooling=pooling)
    assert abs(trace.loss - loss) < 1e-10
    assert np.allclose(trace.scores, scores, atol=1e-10)


def test_forward_oracle_random_instances():
    for seed in range(8):
        h, cfg, params = random_instance(seed)
        trace = hgad.forward(h, params, cfg)
        vnn, enn = params_as_lists(params)
        _, _, _, loss = straight_line_forward(
            h.num_nodes, h.edge_lists(), h.features.tolist(), vnn, enn,
            pooling=cfg.pooling_mode)
        assert abs(trace.loss - loss) < 1e-10


def test_centroid_trivials_and_oracle():
    assert np.array_equal(compute_centroid([[2.0, 3.0]]), [2.0, 3.0])
    assert np.array_equal(compute_centroid([[1.0, -4.0], [-1.0, 4.0]]), [0.0, 0.0])
    rng = np.random.default_rng(7)
    rows = rng.normal(size=(100, 5))
    expected = [math.fsum(rows[:, k]) / 100.0 for k in range(5)]
    assert np.allclose(compute_centroid(rows), expected, atol=1e-12)
    with pytest.raises(EmptyEdgeSet):
        compute_centroid(np.zeros((0, 3)))


def test_backward_zero_when_loss_zero():
    rng = np.random.default_rng(1)
    h = hgad.build_hypergraph(3, [[0], [1], [2]], rng.normal(size=(3, 2)))
    cfg = hgad.ModelConfig(hidden_dim=3, embedding_dim=2)
    params = hgad.init_parameters(cfg, 2, seed=3)
    trace = hgad.forward(h, params, cfg)
    hgad.backward(h, params, cfg, trace)
    assert all(np.all(g == 0.0) for _, _, g in params.parameters())


def test_backward_zero_for_single_edge():
    rng = np.random.default_rng(2)
    h = hgad.build_hypergraph(4, [[0, 1, 3]], rng.normal(size=(4, 3)))
    cfg = hgad.ModelConfig(hidden_dim=3, embedding_dim=2)
    params = hgad.init_parameters(cfg, 3, seed=4)
    trace = hgad.forward(h, params, cfg)
    assert trace.loss == 0.0  # centroid of one edge is that edge
    hgad.backward(h, params, cfg, trace)
    assert all(np.all(g == 0.0) for _, _, g in params.parameters())


def _fd_check(h, cfg, params, frozen=None):
    trace = hgad.forward(h, params, cfg, frozen_centroid=frozen)
    hgad.backward(h, params, cfg, trace)
    analytic = [g.copy() for _, _, g in params.parameters()]
    hgad.zero_grads(params)
    arrays = [v for _, v, _ in params.parameters()]

    def loss():
        return hgad.forward(h, params, cfg, frozen_centroid=frozen).loss

    numeric = central_difference_grads(loss, arrays)
    for a, n in zip(analytic, numeric):
        assert close(a.ravel(), n)


def test_backward_finite_difference_dynamic_maxmin():
    checked = 0
    seed = 0
    while checked < 3 and seed < 60:
        h, cfg, params = random_instance(seed)
        if well_conditioned_for_gradcheck(h, cfg, params):
            _fd_check(h, cfg, params)
            checked += 1
        seed += 1
    assert checked == 3


def test_backward_finite_difference_single_layer():
    # L=1: no message passing, pooling straight off VNN^0
    rng = np.random.default_rng(77)
    h = hgad.build_hypergraph(
        6, [rng.choice(6, size=3, replace=False) for _ in range(4)],
        rng.normal(size=(6, 3)))
    cfg = hgad.ModelConfig(num_layers=1, hidden_dim=3, embedding_dim=3)
    params = hgad.init_parameters(cfg, 3, seed=78)
    trace = hgad.forward(h, params, cfg)
    assert trace.scores.min() > 1e-3
    _fd_check(h, cfg, params)


def test_backward_finite_difference_mean_pooling():
    checked = 0
    seed = 100
    while checked < 2 and seed < 160:
        h, cfg, params = random_instance(seed, pooling="mean")
        trace = hgad.forward(h, params, cfg)
        if trace.scores.min() > 1e-3:
            _fd_check(h, cfg, params)
            checked += 1
        seed += 1
    assert checked == 2


def test_backward_finite_difference_frozen_centroid():
    checked = 0
    seed = 200
    while checked < 2 and seed < 260:
        h, cfg, params = random_instance(seed)
        cfg.centroid_mode = "fixed"
        frozen = hgad.forward(h, params, cfg).centroid + 0.05
        base = hgad.forward(h, params, cfg, frozen_centroid=frozen)
        if (base.scores.min() > 1e-3
                and well_conditioned_for_gradcheck(h, cfg, params)):
            _fd_check(h, cfg, params, frozen=frozen)
            checked += 1
        seed += 1
    assert checked == 2


def test_backward_detached_centroid_matches_frozen_gradient():
    h, cfg, params = random_instance(31)
    cfg.detach_centroid = True
    trace = hgad.forward(h, params, cfg)
    hgad.backward(h, params, cfg, trace)
    detached = [g.copy() for _, _, g in params.parameters()]
    hgad.zero_grads(params)
    frozen_trace = hgad.forward(h, params, cfg,
                                frozen_centroid=trace.centroid.copy())
    hgad.backward(h, params, cfg, frozen_trace)
    for a, b in zip(detached, (g for _, _, g in params.parameters())):
        assert np.allclose(a, b, atol=1e-12)


def test_trace_mismatch_after_step():
    h, cfg, params = random_instance(9)
    trace = hgad.forward(h, params, cfg)
    opt = OptimizerState.for_store(params)
    optimizer_step(params, opt)
    with pytest.raises(TraceMismatch):
        hgad.backward(h, params, cfg, trace)


def test_score_matches_training_trace_exactly():
    h, cfg, params = random_instance(12)
    trace = hgad.forward(h, params, cfg)
    model = hgad.TrainedModel(trace.node_embeddings[-1], trace.centroid,
                              cfg.pooling_mode)
    for i, e in enumerate(h.edges):
        assert hgad.score_hyperedge(e, model) == trace.scores[i]


def test_score_singleton_is_centroid_norm():
    rng = np.random.default_rng(3)
    model = hgad.TrainedModel(rng.normal(size=(5, 4)), rng.normal(size=4),
                              "maxmin")
    expected = float(np.sqrt(np.sum(model.centroid ** 2)))
    assert abs(hgad.score_hyperedge([2], model) - expected) < 1e-12


def test_score_union_candidate_matches_oracle(small_hypergraph):
    cfg = hgad.ModelConfig(hidden_dim=3, embedding_dim=2)
    params = hgad.init_parameters(cfg, 3, seed=8)
    trace = hgad.forward(small_hypergraph, params, cfg)
    model = hgad.TrainedModel(trace.node_embeddings[-1], trace.centroid, "maxmin")
    union = [0, 1, 2, 3]
    emb = trace.node_embeddings[-1]
    pooled = [max(emb[v][k] for v in union) - min(emb[v][k] for v in union)
              for k in range(emb.shape[1])]
    expected = math.sqrt(sum((p - c) ** 2
                             for p, c in zip(pooled, trace.centroid)))
    assert abs(hgad.score_hyperedge(union, model) - expected) < 1e-12


def test_score_validation():
    model = hgad.TrainedModel(np.zeros((3, 2)), np.zeros(2), "maxmin")
    with pytest.raises(EmptyCandidate):
        hgad.score_hyperedge([], model)
    with pytest.raises(NodeIndexOutOfRange):
        hgad.score_hyperedge([0, 5], model)


def test_pooling_tie_breaks_to_lowest_node_index():
    # identical features and symmetric membership force exact ties
    feats = np.tile([0.7, -0.2], (4, 1))
    h = hgad.build_hypergraph(4, [[1, 3], [0, 2]], feats)
    cfg = hgad.ModelConfig(hidden_dim=2, embedding_dim=2)
    params = hgad.init_parameters(cfg, 2, seed=0)
    trace = hgad.forward(h, params, cfg)
    assert np.all(trace.argmax_nodes[0] == 1)
    assert np.all(trace.argmin_nodes[0] == 1)
    assert np.all(trace.argmax_nodes[1] == 0)


def test_node_order_within_edge_is_irrelevant():
    rng = np.random.default_rng(4)
    feats = rng.normal(size=(5, 3))
    cfg = hgad.ModelConfig(hidden_dim=3, embedding_dim=3)
    params = hgad.init_parameters(cfg, 3, seed=11)
    a = hgad.forward(hgad.build_hypergraph(5, [[3, 0, 1], [4, 2]], feats), params, cfg)
    b = hgad.forward(hgad.build_hypergraph(5, [[0, 1, 3], [2, 4]], feats), params, cfg)
    assert np.array_equal(a.scores, b.scores)
    assert a.loss == b.loss


def test_edge_order_equivariance():
    rng = np.random.default_rng(5)
    feats = rng.normal(size=(6, 2))
    edges = [[0, 1], [2, 3], [1, 4, 5]]
    cfg = hgad.ModelConfig(hidden_dim=3, embedding_dim=3)
    params = hgad.init_parameters(cfg, 2, seed=12)
    perm = [2, 0, 1]
    a = hgad.forward(hgad.build_hypergraph(6, edges, feats), params, cfg)
    b = hgad.forward(
        hgad.build_hypergraph(6, [edges[i] for i in perm], feats), params, cfg)
    assert np.allclose(b.scores, a.scores[perm], rtol=1e-12, atol=1e-12)
    assert np.allclose(a.centroid, b.centroid, rtol=1e-12, atol=1e-12)
    assert abs(a.loss - b.loss) < 1e-12


def test_maxmin_nonnegative_and_loss_identity():
    for seed in range(5):
        h, cfg, params = random_instance(seed + 40)
        trace = hgad.forward(h, params, cfg)
        assert np.all(trace.pooled >= 0.0)
        assert trace.loss == trace.scores.mean()


def test_translation_coupling_of_maxmin_scores():
    h, cfg, params = random_instance(21)
    trace = hgad.forward(h, params, cfg)
    model = hgad.TrainedModel(trace.node_embeddings[-1], trace.centroid, "maxmin")
    shifted = hgad.TrainedModel(model.node_embeddings + 0.73, model.centroid,
                                "maxmin")
    s0 = hgad.score_hyperedges(h.edges, model)
    s1 = hgad.score_hyperedges(h.edges, shifted)
    assert np.allclose(s0, s1, rtol=1e-12, atol=1e-12)


def test_model_persistence_round_trip(tmp_path):
    h, cfg, params = random_instance(17)
    trace = hgad.forward(h, params, cfg)
    model = hgad.TrainedModel(trace.node_embeddings[-1], trace.centroid, "maxmin")
    path = tmp_path / "model.ckpt"
    hgad.save_model(model, path)
    back = hgad.load_model(path)
    assert back.node_embeddings.tobytes() == model.node_embeddings.tobytes()
    assert back.centroid.tobytes() == model.centroid.tobytes()
    assert back.pooling_mode == model.pooling_mode
    hgad.save_model(back, tmp_path / "again.ckpt")
    assert (tmp_path / "model.ckpt").read_bytes() == (tmp_path / "again.ckpt").read_bytes()


def test_config_validation():
    with pytest.raises(ValueError):
        hgad.ModelConfig(pooling_mode="sum").validate()
    with pytest.raises(ValueError):
        hgad.ModelConfig(num_layers=0).validate()
    with pytest.raises(ValueError):
        hgad.ModelConfig(centroid_mode="frozen").validate()
