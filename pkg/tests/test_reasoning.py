import random

import numpy as np
import pytest

from toporag.errors import DimensionMismatch, EmptySubcomplex, ValidationError
from toporag.lifting import CellComplex
from toporag.embedding import EmbeddingTable
from toporag.reasoning import (CellStates, ReasoningConfig, ReasoningWeights,
                               forward, init_states, pool, project,
                               stage1_pass, stage2_pass)
from toporag.retrieval import Subcomplex

from helpers import lift, make_graph, random_connected_graph, triangle
from reference_reasoning import naive_forward

D = 16


def full_subcomplex(cx) -> Subcomplex:
    return Subcomplex(
        complex=cx,
        cells0=tuple(cx.cell_ids(0)),
        cells1=tuple(cx.cell_ids(1)),
        cells2=tuple(cx.cell_ids(2)),
        total_prize=0.0, total_cost=0.0,
        certificate=(), provenance=(),
    )


def config(**kwargs):
    defaults = dict(layers=2, state_dim=D, activation="relu",
                    aggregation="sum", seed=3)
    defaults.update(kwargs)
    return ReasoningConfig(**defaults)


# --- init ---

def test_init_states_equal_embeddings():
    cx = lift(triangle(), dim=D)
    sub = full_subcomplex(cx)
    states = init_states(sub, state_dim=D)
    assert len(states.cell_ids) == cx.num_cells
    for cid in states.cell_ids:
        assert np.allclose(states.state(cid),
                           np.asarray(cx.vector(cid), dtype=np.float64))


def test_init_states_dim_mismatch():
    cx = lift(triangle(), dim=D)
    with pytest.raises(DimensionMismatch):
        init_states(full_subcomplex(cx), state_dim=D + 1)


def test_init_states_missing_embedding_errors():
    cx = lift(triangle(), dim=D)
    stripped = EmbeddingTable(dim=D, fingerprint="x", by_dim={
        0: cx.embeddings.by_dim[0],
        1: cx.embeddings.by_dim[1],
        2: cx.embeddings.by_dim[2][:0],  # drop the 2-cell embedding
    })
    import dataclasses
    broken = dataclasses.replace(cx, embeddings=stripped)
    with pytest.raises(ValidationError):
        init_states(full_subcomplex(broken))


# --- fixed point and locality ---

def test_identity_weights_are_fixed_point():
    cfg = config(activation="identity")
    cx = lift(triangle(), dim=D)
    sub = full_subcomplex(cx)
    weights = ReasoningWeights.identity(cfg)
    states = init_states(sub, state_dim=D)
    after1 = stage1_pass(states, sub, weights, cfg)
    after2 = stage2_pass(after1, sub, weights, cfg)
    assert np.array_equal(after2.states, states.states)
    assert after2.layer == cfg.layers + 1


def test_stage1_locality_on_path_graph():
    # path 0-1-2-3; perturbing node 3 must not move node 0's state
    # within L=2 incidence hops
    cfg = config(layers=2, activation="identity")
    g = make_graph(4, [(0, 1), (1, 2), (2, 3)])
    cx = lift(g, dim=D)
    weights = ReasoningWeights.initialize(cfg)

    def run(complex):
        sub = full_subcomplex(complex)
        return stage1_pass(init_states(sub, state_dim=D), sub, weights, cfg)

    base = run(cx)

    import dataclasses
    z0 = cx.embeddings.by_dim[0].copy()
    z0[3] = z0[3] + 1.5
    perturbed_cx = dataclasses.replace(
        cx, embeddings=EmbeddingTable(dim=D, fingerprint="p", by_dim={
            0: z0, 1: cx.embeddings.by_dim[1], 2: cx.embeddings.by_dim[2]}))
    moved = run(perturbed_cx)

    # node 0 is 5 incidence hops from node 3: unchanged, exactly
    assert np.array_equal(base.state(0), moved.state(0))
    # edge (0,1) is 4 hops away: unchanged
    assert np.array_equal(base.state(cx.one_cell_id(0)),
                          moved.state(cx.one_cell_id(0)))
    # node 2 is 2 hops away: must move
    assert not np.array_equal(base.state(2), moved.state(2))


def test_stage1_leaves_two_cells_untouched():
    cfg = config()
    cx = lift(triangle(), dim=D)
    sub = full_subcomplex(cx)
    weights = ReasoningWeights.initialize(cfg)
    states = init_states(sub, state_dim=D)
    out = stage1_pass(states, sub, weights, cfg)
    two_cell = cx.cell_ids(2)[0]
    assert np.array_equal(out.state(two_cell), states.state(two_cell))


def test_stage2_one_cells_ignore_upper_weights_without_two_cells():
    cfg = config(layers=1)
    g = make_graph(4, [(0, 1), (1, 2), (1, 3)])  # tree: no 2-cells
    cx = lift(g, dim=D)
    sub = full_subcomplex(cx)
    w1 = ReasoningWeights.initialize(cfg)
    params = {k: v.copy() for k, v in w1.params.items()}
    params["final.upper.w"] = params["final.upper.w"] + 10.0
    w2 = ReasoningWeights(config=cfg, params=params)
    s1 = stage2_pass(init_states(sub, state_dim=D), sub, w1, cfg)
    s2 = stage2_pass(init_states(sub, state_dim=D), sub, w2, cfg)
    for ecid in cx.cell_ids(1):
        assert np.array_equal(s1.state(ecid), s2.state(ecid))
    # 0-cells do have upper neighbors (via shared edges), so they move
    assert not np.array_equal(s1.state(0), s2.state(0))


# --- oracle equivalence ---

@pytest.mark.parametrize("activation,aggregation", [
    ("relu", "sum"), ("tanh", "mean"), ("identity", "sum"),
])
def test_forward_matches_naive_reference(activation, aggregation):
    rng = random.Random(1)
    for trial in range(6):
        g = random_connected_graph(rng, rng.randrange(4, 9),
                                   rng.randrange(8, 14))
        cx = lift(g, dim=D, seed=trial)
        sub = full_subcomplex(cx)
        cfg = config(layers=rng.randrange(1, 4), activation=activation,
                     aggregation=aggregation, seed=trial)
        weights = ReasoningWeights.initialize(cfg)
        states = forward(sub, weights, cfg)
        expected = naive_forward(sub, weights, cfg)
        for cid in states.cell_ids:
            assert np.allclose(states.state(cid), expected[cid], atol=1e-6)


# --- permutation equivariance ---

def permute_complex(cx: CellComplex, rng: random.Random) -> tuple[CellComplex, dict]:
    """Relabel cells within each dimension; returns (complex, old->new map)."""
    import dataclasses
    p0 = list(range(cx.n0))
    p1 = list(range(cx.n1))
    p2 = list(range(cx.n2))
    rng.shuffle(p0)
    rng.shuffle(p1)
    rng.shuffle(p2)
    mapping = {}
    for v in range(cx.n0):
        mapping[v] = p0[v]
    for i in range(cx.n1):
        mapping[cx.n0 + i] = cx.n0 + p1[i]
    for j in range(cx.n2):
        mapping[cx.n0 + cx.n1 + j] = cx.n0 + cx.n1 + p2[j]

    new_cells = [None] * cx.num_cells
    for cell in cx.cells:
        nid = mapping[cell.id]
        new_cells[nid] = dataclasses.replace(
            cell,
            id=nid,
            boundary=tuple(mapping[b] for b in cell.boundary),
            walk=tuple((mapping[v], mapping[e]) for v, e in cell.walk),
        )
    coboundary = [tuple()] * cx.num_cells
    for cid in range(cx.num_cells):
        coboundary[mapping[cid]] = tuple(mapping[c] for c in cx.coboundary[cid])
    z = cx.embeddings
    z0 = np.empty_like(z.by_dim[0])
    z1 = np.empty_like(z.by_dim[1])
    z2 = np.empty_like(z.by_dim[2])
    for v in range(cx.n0):
        z0[p0[v]] = z.by_dim[0][v]
    for i in range(cx.n1):
        z1[p1[i]] = z.by_dim[1][i]
    for j in range(cx.n2):
        z2[p2[j]] = z.by_dim[2][j]
    permuted = dataclasses.replace(
        cx,
        cells=tuple(new_cells),
        coboundary=tuple(coboundary),
        embeddings=EmbeddingTable(dim=z.dim, fingerprint=z.fingerprint,
                                  by_dim={0: z0, 1: z1, 2: z2}),
    )
    return permuted, mapping


def test_pooled_embedding_invariant_under_relabeling():
    rng = random.Random(2)
    cfg = config(layers=2)
    weights = ReasoningWeights.initialize(cfg)
    for trial in range(5):
        g = random_connected_graph(rng, 6, 10)
        cx = lift(g, dim=D, seed=trial)
        sub = full_subcomplex(cx)
        pooled = pool(forward(sub, weights, cfg), sub)

        permuted, mapping = permute_complex(cx, rng)
        psub = full_subcomplex(permuted)
        pstates = forward(psub, weights, cfg)
        ppooled = pool(pstates, psub)
        assert np.allclose(pooled, ppooled, atol=1e-6)

        # per-cell states are permuted along with the ids
        states = forward(sub, weights, cfg)
        for cid in states.cell_ids:
            assert np.allclose(states.state(cid), pstates.state(mapping[cid]),
                               atol=1e-6)


# --- pooling and projection ---

def test_pool_of_identical_states():
    cx = lift(triangle(), dim=D)
    sub = full_subcomplex(cx)
    v = np.arange(D, dtype=np.float64)
    states = CellStates(cell_ids=sub.all_cells(),
                        states=np.tile(v, (cx.num_cells, 1)), layer=0)
    assert np.allclose(pool(states, sub), v)


def test_pool_two_basis_states():
    cx = lift(make_graph(2, [(0, 1)]), dim=2)
    sub = Subcomplex(complex=cx, cells0=(0, 1), cells1=(), cells2=(),
                     total_prize=0, total_cost=0, certificate=(),
                     provenance=())
    states = CellStates(cell_ids=(0, 1),
                        states=np.array([[1.0, 0.0], [0.0, 1.0]]), layer=0)
    assert np.allclose(pool(states, sub), [0.5, 0.5])


def test_pool_empty_raises():
    cx = lift(triangle(), dim=D)
    sub = Subcomplex(complex=cx, cells0=(), cells1=(), cells2=(),
                     total_prize=0, total_cost=0, certificate=(),
                     provenance=())
    with pytest.raises(EmptySubcomplex):
        pool(CellStates(cell_ids=(), states=np.zeros((0, D)), layer=0), sub)


def test_identity_projection():
    cfg = config(activation="identity")
    weights = ReasoningWeights.identity(cfg)
    h = np.linspace(-1, 1, D)
    assert np.allclose(project(h, weights), h)


def test_zero_projection():
    cfg = config()
    weights = ReasoningWeights.identity(cfg)
    params = {k: v.copy() for k, v in weights.params.items()}
    params["proj.w"] = np.zeros_like(params["proj.w"])
    zeroed = ReasoningWeights(config=cfg, params=params)
    assert np.allclose(project(np.ones(D), zeroed), 0.0)


def test_projection_dim():
    cfg = config(proj_dim=7)
    weights = ReasoningWeights.initialize(cfg)
    out = project(np.ones(D), weights)
    assert out.shape == (7,)
    with pytest.raises(DimensionMismatch):
        project(np.ones(D + 1), weights)


# --- weight files ---

def test_weight_file_round_trip_bit_exact(tmp_path):
    cfg = config(layers=3, proj_dim=9)
    weights = ReasoningWeights.initialize(cfg)
    p1 = tmp_path / "w1.bin"
    p2 = tmp_path / "w2.bin"
    weights.save(p1)
    reloaded = ReasoningWeights.load(p1)
    assert reloaded.config == cfg
    for name, arr in weights.params.items():
        assert np.array_equal(arr, reloaded.params[name])
        assert arr.dtype == reloaded.params[name].dtype == np.float32
    reloaded.save(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_projection_bit_stable_through_file(tmp_path):
    cfg = config()
    weights = ReasoningWeights.initialize(cfg)
    path = tmp_path / "w.bin"
    weights.save(path)
    reloaded = ReasoningWeights.load(path)
    h = np.linspace(0, 1, D)
    a = project(h, weights)
    b = project(h, reloaded)
    assert np.array_equal(a, b)


def test_forward_deterministic():
    cfg = config()
    cx = lift(triangle(), dim=D)
    sub = full_subcomplex(cx)
    weights = ReasoningWeights.initialize(cfg)
    s1 = forward(sub, weights, cfg)
    s2 = forward(sub, weights, cfg)
    assert np.array_equal(s1.states, s2.states)
