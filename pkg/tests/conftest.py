import numpy as np
import pytest

import hgad


@pytest.fixture
def small_hypergraph():
    """4 nodes, two overlapping hyperedges {0,1,2} and {2,3}, random features."""
    rng = np.random.default_rng(0)
    return hgad.build_hypergraph(4, [[0, 1, 2], [2, 3]], rng.normal(size=(4, 3)))


def random_instance(seed, pooling="maxmin"):
    """Small random hypergraph + chained model config for oracle checks."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 11))
    num_edges = int(rng.integers(2, 7))
    d = int(rng.integers(2, 5))
    edges = []
    for _ in range(num_edges):
        size = int(rng.integers(2, min(4, n) + 1))
        edges.append(rng.choice(n, size=size, replace=False))
    features = rng.normal(size=(n, d))
    cfg = hgad.ModelConfig(
        num_layers=2,
        hidden_dim=int(rng.integers(2, 5)),
        embedding_dim=int(rng.integers(2, 5)),
        pooling_mode=pooling,
        activation="relu" if seed % 2 else "identity",
    )
    h = hgad.build_hypergraph(n, edges, features)
    params = hgad.init_parameters(cfg, d, seed=seed)
    return h, cfg, params


def well_conditioned_for_gradcheck(h, cfg, params, margin=1e-4, score_floor=1e-3):
    """True when finite differences are trustworthy at this point:

    per-edge scores above the floor, strictly unique pooling extrema with
    a margin, and every ReLU pre-activation away from its kink.
    """
    trace = hgad.forward(h, params, cfg)
    if trace.scores.min() <= score_floor:
        return False
    emb = trace.node_embeddings[-1]
    for e in h.edges:
        rows = np.sort(emb[e], axis=0)
        if rows.shape[0] < 2:
            return False
        if np.min(rows[-1] - rows[-2]) <= margin:   # argmax uniqueness
            return False
        if np.min(rows[1] - rows[0]) <= margin:     # argmin uniqueness
            return False
    for stack, ios in (list(zip(params.vnn, trace.vnn_io))
                       + list(zip(params.enn, trace.enn_io))):
        for layer, (inp, _) in zip(stack, ios):
            if layer.activation == "relu":
                pre = inp @ layer.weight + layer.bias
                if np.min(np.abs(pre)) <= margin:
                    return False
    return True
