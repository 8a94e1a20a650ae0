"""Naive per-cell, per-neighbor reference for the message-passing engine.

Kept independent of the package implementation: plain dict states and
explicit Python loops straight over the complex's incidence fields.
"""

import numpy as np


def _act(x, kind):
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "tanh":
        return np.tanh(x)
    return x


def _affine(weights, name, vecs, kind):
    w = weights[f"{name}.w"].astype(np.float64)
    b = weights[f"{name}.b"].astype(np.float64)
    return _act(w @ np.concatenate(vecs) + b, kind)


def _agg(messages, dim, config):
    if not messages:
        return np.zeros(dim)
    total = messages[0].copy()
    for m in messages[1:]:
        total += m
    if config.aggregation == "mean":
        total /= len(messages)
    return total


def naive_forward(sub, weights, config):
    """Returns {cell_id: final state} after stage 1 (L hops) + stage 2."""
    complex = sub.complex
    selected = set(sub.all_cells())
    d = config.state_dim
    h = {}
    for cid in sorted(selected):
        cell = complex.cells[cid]
        if cell.dim == 0:
            row = complex.embeddings.by_dim[0][cid]
        elif cell.dim == 1:
            row = complex.embeddings.by_dim[1][cid - complex.n0]
        else:
            row = complex.embeddings.by_dim[2][cid - complex.n0 - complex.n1]
        h[cid] = np.asarray(row, dtype=np.float64)

    kind = config.activation
    for layer in range(config.layers):
        prefix = f"layer{layer}"
        new = {}
        for cid in sorted(selected):
            cell = complex.cells[cid]
            if cell.dim == 2:
                new[cid] = h[cid]
                continue
            faces = [b for b in cell.boundary if b in selected]
            cofaces = [c for c in complex.coboundary[cid]
                       if c in selected and complex.cells[c].dim == 1]
            mf = _agg([_affine(weights, f"{prefix}.face", [h[cid], h[y]], kind)
                       for y in faces], d, config)
            mc = _agg([_affine(weights, f"{prefix}.coface", [h[cid], h[z]], kind)
                       for z in cofaces], d, config)
            new[cid] = _affine(weights, f"{prefix}.update",
                               [h[cid], mf, mc], kind)
        h = new

    final = {}
    for cid in sorted(selected):
        cell = complex.cells[cid]
        faces = [b for b in cell.boundary if b in selected]
        cofaces = [c for c in complex.coboundary[cid] if c in selected]
        uppers = [(w, cof) for w, cof in complex.upper_adjacent(cid)
                  if w in selected and cof in selected]
        mf = _agg([_affine(weights, "final.face", [h[cid], h[y]], kind)
                   for y in faces], d, config)
        mc = _agg([_affine(weights, "final.coface", [h[cid], h[z]], kind)
                   for z in cofaces], d, config)
        mu = _agg([_affine(weights, "final.upper", [h[cid], h[w], h[cof]], kind)
                   for w, cof in uppers], d, config)
        final[cid] = _affine(weights, "final.update", [h[cid], mf, mc, mu], kind)
    return final
