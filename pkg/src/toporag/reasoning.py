"""Forward-pass message passing over a retrieved subcomplex.

Stage 1 runs L hops along the 1-skeleton: 0- and 1-cells exchange
face/coface messages while 2-cell states pass through untouched.
Stage 2 runs once over all cells and adds an upper-adjacency message
(neighbors sharing a coface, the coface state included). Messages and
updates are affine maps over concatenated inputs followed by the
configured activation; aggregation over a neighbor set is sum (default)
or mean, with the empty set contributing a zero message.

States are computed in float64; weights are stored as float32 so the
weight file round-trips bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySubcomplex, ValidationError
from .retrieval import Subcomplex

ACTIVATIONS = ("relu", "tanh", "identity")
AGGREGATIONS = ("sum", "mean")


@dataclass(frozen=True)
class ReasoningConfig:
    layers: int = 3
    state_dim: int = 1024
    activation: str = "relu"
    aggregation: str = "sum"
    seed: int = 0
    proj_dim: int | None = None  # generator hidden width; None = state_dim

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.state_dim <= 0:
            raise ValueError("state_dim must be positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"aggregation must be one of {AGGREGATIONS}")

    @property
    def projection_dim(self) -> int:
        return self.proj_dim if self.proj_dim is not None else self.state_dim


def _activate(x: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "tanh":
        return np.tanh(x)
    return x


def _layer_param_specs(config: ReasoningConfig) -> list[tuple[str, tuple[int, int]]]:
    d = config.state_dim
    specs = []
    for layer in range(config.layers):
        specs.append((f"layer{layer}.face.w", (d, 2 * d)))
        specs.append((f"layer{layer}.face.b", (d,)))
        specs.append((f"layer{layer}.coface.w", (d, 2 * d)))
        specs.append((f"layer{layer}.coface.b", (d,)))
        specs.append((f"layer{layer}.update.w", (d, 3 * d)))
        specs.append((f"layer{layer}.update.b", (d,)))
    specs.append(("final.face.w", (d, 2 * d)))
    specs.append(("final.face.b", (d,)))
    specs.append(("final.coface.w", (d, 2 * d)))
    specs.append(("final.coface.b", (d,)))
    specs.append(("final.upper.w", (d, 3 * d)))
    specs.append(("final.upper.b", (d,)))
    specs.append(("final.update.w", (d, 4 * d)))
    specs.append(("final.update.b", (d,)))
    specs.append(("proj.w", (config.projection_dim, d)))
    specs.append(("proj.b", (config.projection_dim,)))
    return specs


@dataclass(frozen=True)
class ReasoningWeights:
    """All affine-map parameters, keyed by name; float32 storage."""

    config: ReasoningConfig
    params: dict[str, np.ndarray]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]

    @classmethod
    def initialize(cls, config: ReasoningConfig) -> "ReasoningWeights":
        """Seeded uniform init in [-1/sqrt(d_s), 1/sqrt(d_s)]."""
        rng = np.random.Generator(np.random.PCG64(config.seed))
        bound = 1.0 / np.sqrt(config.state_dim)
        params = {
            name: rng.uniform(-bound, bound, size=shape).astype(np.float32)
            for name, shape in _layer_param_specs(config)
        }
        return cls(config=config, params=params)

    @classmethod
    def identity(cls, config: ReasoningConfig) -> "ReasoningWeights":
        """UPDATE passes the state through; all messages are zero.

        Combined with identity activation this makes every pass a
        fixed point, which the locality and fixed-point tests rely on.
        """
        d = config.state_dim
        params = {}
        for name, shape in _layer_param_specs(config):
            params[name] = np.zeros(shape, dtype=np.float32)
        for layer in range(config.layers):
            params[f"layer{layer}.update.w"][:, :d] = np.eye(d, dtype=np.float32)
        params["final.update.w"][:, :d] = np.eye(d, dtype=np.float32)
        params["proj.w"][:, :] = np.eye(config.projection_dim, d,
                                        dtype=np.float32)
        return cls(config=config, params=params)

    def save(self, path) -> None:
        """JSON header line (config + array shapes) then float32 LE payload."""
        names = [name for name, _ in _layer_param_specs(self.config)]
        header = {
            "layers": self.config.layers,
            "state_dim": self.config.state_dim,
            "activation": self.config.activation,
            "aggregation": self.config.aggregation,
            "seed": self.config.seed,
            "proj_dim": self.config.projection_dim,
            "arrays": [{"name": n, "shape": list(self.params[n].shape)}
                       for n in names],
        }
        with open(path, "wb") as fh:
            fh.write(json.dumps(header).encode("utf-8") + b"\n")
            for name in names:
                fh.write(np.ascontiguousarray(self.params[name],
                                              dtype="<f4").tobytes())

    @classmethod
    def load(cls, path) -> "ReasoningWeights":
        with open(path, "rb") as fh:
            try:
                header = json.loads(fh.readline().decode("utf-8"))
                config = ReasoningConfig(
                    layers=header["layers"],
                    state_dim=header["state_dim"],
                    activation=header["activation"],
                    aggregation=header["aggregation"],
                    seed=header["seed"],
                    proj_dim=header["proj_dim"],
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValidationError(f"bad weight file header: {exc}") from exc
            params = {}
            for spec in header["arrays"]:
                shape = tuple(spec["shape"])
                count = int(np.prod(shape)) if shape else 1
                payload = fh.read(count * 4)
                if len(payload) != count * 4:
                    raise ValidationError("truncated weight payload")
                params[spec["name"]] = np.frombuffer(
                    payload, dtype="<f4").reshape(shape).copy()
        expected = {name: shape for name, shape in _layer_param_specs(config)}
        got = {name: arr.shape for name, arr in params.items()}
        if {n: tuple(s) for n, s in expected.items()} != got:
            raise ValidationError("weight shapes do not match the config")
        return cls(config=config, params=params)


@dataclass(frozen=True)
class CellStates:
    """Per-cell state vectors at one layer; rows follow ``cell_ids``."""

    cell_ids: tuple[int, ...]
    states: np.ndarray  # (n_cells, d_s) float64
    layer: int

    def row(self, cell_id: int) -> int:
        return self.cell_ids.index(cell_id)

    def state(self, cell_id: int) -> np.ndarray:
        return self.states[self.row(cell_id)]


def init_states(sub: Subcomplex, state_dim: int | None = None) -> CellStates:
    """Layer-0 states: each cell's embedding from the parent complex."""
    cell_ids = sub.all_cells()
    if not cell_ids:
        raise EmptySubcomplex("cannot initialize states for an empty subcomplex")
    complex = sub.complex
    dim = complex.embeddings.dim
    if state_dim is not None and state_dim != dim:
        raise DimensionMismatch(
            f"embedding dim {dim} != configured state dim {state_dim}")
    rows = []
    for cid in cell_ids:
        cell = complex.cells[cid]
        table = complex.embeddings.by_dim.get(cell.dim)
        local = cid if cell.dim == 0 else (
            cid - complex.n0 if cell.dim == 1 else cid - complex.n0 - complex.n1)
        if table is None or local >= len(table):
            raise ValidationError(f"no embedding stored for cell {cid}")
        rows.append(np.asarray(table[local], dtype=np.float64))
    return CellStates(cell_ids=cell_ids, states=np.array(rows), layer=0)


class _Neighborhoods:
    """Subcomplex-restricted incidence, as row-index pair lists."""

    def __init__(self, sub: Subcomplex):
        complex = sub.complex
        cell_ids = sub.all_cells()
        self.cell_ids = cell_ids
        self.index = {cid: i for i, cid in enumerate(cell_ids)}
        selected = frozenset(cell_ids)
        self.dims = np.array([complex.cells[c].dim for c in cell_ids])

        def rows_of(pairs):
            return ([self.index[a] for a, b in pairs],
                    [self.index[b] for a, b in pairs])

        face_pairs, coface_pairs, skeleton_coface_pairs = [], [], []
        upper_triples = []
        for cid in cell_ids:
            cell = complex.cells[cid]
            for b in cell.boundary:
                if b in selected:
                    face_pairs.append((cid, b))
            for c in complex.coboundary[cid]:
                if c in selected:
                    coface_pairs.append((cid, c))
                    if complex.cells[c].dim == 1:
                        skeleton_coface_pairs.append((cid, c))
            for w, cof in complex.upper_adjacent(cid):
                if w in selected and cof in selected:
                    upper_triples.append((cid, w, cof))

        self.face = rows_of(face_pairs)
        self.coface = rows_of(coface_pairs)
        self.skeleton_coface = rows_of(skeleton_coface_pairs)
        self.upper = (
            [self.index[x] for x, w, c in upper_triples],
            [self.index[w] for x, w, c in upper_triples],
            [self.index[c] for x, w, c in upper_triples],
        )


def _aggregate_messages(h: np.ndarray, dst_rows: list[int],
                        inputs: np.ndarray, w: np.ndarray, b: np.ndarray,
                        config: ReasoningConfig) -> np.ndarray:
    """AGG of activated affine messages, scattered onto destination rows."""
    n, d = h.shape
    out = np.zeros((n, d))
    if not dst_rows:
        return out
    messages = _activate(inputs @ w.T.astype(np.float64) + b.astype(np.float64),
                         config.activation)
    np.add.at(out, np.asarray(dst_rows), messages)
    if config.aggregation == "mean":
        counts = np.zeros(n)
        np.add.at(counts, np.asarray(dst_rows), 1.0)
        nonzero = counts > 0
        out[nonzero] /= counts[nonzero, None]
    return out


def _face_coface_messages(h: np.ndarray, hoods: _Neighborhoods,
                          weights: ReasoningWeights, prefix: str,
                          config: ReasoningConfig,
                          skeleton_only: bool) -> tuple[np.ndarray, np.ndarray]:
    fx, fy = hoods.face
    coface = hoods.skeleton_coface if skeleton_only else hoods.coface
    cx, cz = coface
    m_face = _aggregate_messages(
        h, fx, np.concatenate([h[fx], h[fy]], axis=1) if fx else np.zeros((0, 2 * h.shape[1])),
        weights[f"{prefix}.face.w"], weights[f"{prefix}.face.b"], config)
    m_coface = _aggregate_messages(
        h, cx, np.concatenate([h[cx], h[cz]], axis=1) if cx else np.zeros((0, 2 * h.shape[1])),
        weights[f"{prefix}.coface.w"], weights[f"{prefix}.coface.b"], config)
    return m_face, m_coface


def stage1_pass(states: CellStates, sub: Subcomplex,
                weights: ReasoningWeights,
                config: ReasoningConfig) -> CellStates:
    """L hops along the 1-skeleton; 2-cell states pass through."""
    hoods = _Neighborhoods(sub)
    if hoods.cell_ids != states.cell_ids:
        raise ValidationError("states do not align with the subcomplex cells")
    h = states.states.copy()
    low = hoods.dims <= 1
    for layer in range(config.layers):
        m_face, m_coface = _face_coface_messages(
            h, hoods, weights, f"layer{layer}", config, skeleton_only=True)
        concat = np.concatenate([h, m_face, m_coface], axis=1)
        updated = _activate(
            concat @ weights[f"layer{layer}.update.w"].T.astype(np.float64)
            + weights[f"layer{layer}.update.b"].astype(np.float64),
            config.activation)
        h = np.where(low[:, None], updated, h)
    return CellStates(cell_ids=states.cell_ids, states=h,
                      layer=states.layer + config.layers)


def stage2_pass(states: CellStates, sub: Subcomplex,
                weights: ReasoningWeights,
                config: ReasoningConfig) -> CellStates:
    """One update of every cell with face, coface, and upper messages.

    The upper message for cell x aggregates, over neighbors w sharing
    a coface, an affine map of (h_x, h_w, h_coface); the coface state
    is its current (layer-L) state.
    """
    hoods = _Neighborhoods(sub)
    h = states.states
    m_face, m_coface = _face_coface_messages(
        h, hoods, weights, "final", config, skeleton_only=False)
    ux, uw, uc = hoods.upper
    if ux:
        inputs = np.concatenate([h[ux], h[uw], h[uc]], axis=1)
    else:
        inputs = np.zeros((0, 3 * h.shape[1]))
    m_upper = _aggregate_messages(h, ux, inputs, weights["final.upper.w"],
                                  weights["final.upper.b"], config)
    concat = np.concatenate([h, m_face, m_coface, m_upper], axis=1)
    updated = _activate(
        concat @ weights["final.update.w"].T.astype(np.float64)
        + weights["final.update.b"].astype(np.float64),
        config.activation)
    return CellStates(cell_ids=states.cell_ids, states=updated,
                      layer=states.layer + 1)


def forward(sub: Subcomplex, weights: ReasoningWeights,
            config: ReasoningConfig) -> CellStates:
    """init -> stage 1 (L hops) -> stage 2, returning final states."""
    states = init_states(sub, state_dim=config.state_dim)
    states = stage1_pass(states, sub, weights, config)
    return stage2_pass(states, sub, weights, config)


def pool(states: CellStates, sub: Subcomplex) -> np.ndarray:
    """Mean over the states of every cell of every dimension."""
    if len(states.cell_ids) == 0:
        raise EmptySubcomplex("cannot pool an empty subcomplex")
    return states.states.mean(axis=0)


def project(h: np.ndarray, weights: ReasoningWeights) -> np.ndarray:
    """Affine map of the pooled embedding to the generator width."""
    w = weights["proj.w"].astype(np.float64)
    b = weights["proj.b"].astype(np.float64)
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (w.shape[1],):
        raise DimensionMismatch(
            f"pooled embedding has shape {h.shape}, projection expects ({w.shape[1]},)")
    return w @ h + b
