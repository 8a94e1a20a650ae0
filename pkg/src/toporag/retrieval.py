"""Query-driven subcomplex selection.

Given a query embedding, the top-k 0- and 1-cells by cosine similarity
receive descending prizes; 2-cell prizes are induced from their
boundary prizes minus a size cost. A connected, boundary-consistent
subcomplex maximizing total prize minus size cost is then extracted:
a Goemans-Williamson-style prize-collecting Steiner approximation over
the 1-skeleton, followed by staged addition of positive-prize 2-cells
with exact marginal-objective acceptance. ``brute_force_subcomplex``
is the exact (exponential) reference for small instances.

The objective of a selection ``S`` is::

    sum(prize(x) for x in S)
      - c_edge * #(selected 1-cells outside the ranked top-k)
      - sum(cost(x2) for selected 2-cells)

with ``cost(x2) = |boundary edges| * C2``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .embedding import cosine, embed_texts
from .errors import EmptyCandidates, TooLarge
from .lifting import CellComplex, connected_components

PRIZE_INDEXING = ("alg3", "eq14")


@dataclass(frozen=True)
class RankedCell:
    cell_id: int
    rank: int  # 0-based
    similarity: float
    prize: float


@dataclass(frozen=True)
class PrizeAssignment:
    """Per-cell prizes and the constants that produced them."""

    prize: dict[int, float]
    cost_2cell: dict[int, float]
    k0: int
    k1: int
    c2: float
    c_edge: float
    ranked0: tuple[RankedCell, ...]
    ranked1: tuple[RankedCell, ...]
    indexing: str = "alg3"

    def prize_of(self, cell_id: int) -> float:
        return self.prize.get(cell_id, 0.0)

    @property
    def ranked1_ids(self) -> frozenset[int]:
        return frozenset(r.cell_id for r in self.ranked1)


@dataclass(frozen=True)
class Subcomplex:
    """A connected, boundary-consistent cell selection with provenance."""

    complex: CellComplex
    cells0: tuple[int, ...]
    cells1: tuple[int, ...]
    cells2: tuple[int, ...]
    total_prize: float
    total_cost: float
    certificate: tuple[tuple[int, ...], ...]  # per component: spanning 1-cells
    provenance: tuple[dict, ...]
    degenerate: bool = False

    def all_cells(self) -> tuple[int, ...]:
        return tuple(sorted(self.cells0 + self.cells1 + self.cells2))

    @property
    def objective(self) -> float:
        return self.total_prize - self.total_cost


def encode_query(question: str, provider) -> np.ndarray:
    """Embed a single question string."""
    return embed_texts([question], provider)[0]


def topk_cells(complex: CellComplex, z_q: np.ndarray, dim: int,
               k: int) -> list[tuple[int, float]]:
    """Top-k cells of one dimension by cosine similarity to the query.

    Descending similarity, ties broken by ascending cell id; at most
    ``min(k, #cells)`` results.
    """
    if dim not in (0, 1):
        raise ValueError("similarity retrieval applies to 0- and 1-cells")
    if k <= 0:
        return []
    scored = ((cid, cosine(complex.vector(cid), z_q))
              for cid in complex.cell_ids(dim))
    best = heapq.nsmallest(k, scored, key=lambda t: (-t[1], t[0]))
    return best


def assign_prizes(ranked0: list[tuple[int, float]],
                  ranked1: list[tuple[int, float]],
                  complex: CellComplex,
                  k: int | tuple[int, int],
                  c2: float,
                  c_edge: float = 1.0,
                  indexing: str = "alg3") -> PrizeAssignment:
    """Turn similarity rankings into per-cell prizes.

    The r-th ranked cell (0-based) of dimension d gets ``k_d - r``
    under the default ``alg3`` indexing, or ``k_d - r - 1`` under
    ``eq14``. Every 2-cell gets the sum of its boundary 0/1-cell
    prizes minus ``|boundary edges| * C2``.
    """
    if indexing not in PRIZE_INDEXING:
        raise ValueError(f"indexing must be one of {PRIZE_INDEXING}")
    k0, k1 = (k, k) if isinstance(k, int) else k
    offset = 0 if indexing == "alg3" else 1
    prize: dict[int, float] = {}
    ranked_cells0, ranked_cells1 = [], []
    for out, ranked, kd in ((ranked_cells0, ranked0, k0),
                            (ranked_cells1, ranked1, k1)):
        for rank, (cid, sim) in enumerate(ranked):
            value = float(kd - rank - offset)
            prize[cid] = value
            out.append(RankedCell(cell_id=cid, rank=rank, similarity=sim,
                                  prize=value))
    cost_2cell: dict[int, float] = {}
    for cid in complex.cell_ids(2):
        cell = complex.cells[cid]
        boundary_prize = sum(prize.get(v, 0.0) for v, _ in cell.walk)
        boundary_prize += sum(prize.get(e, 0.0) for e in cell.boundary)
        cost = len(cell.boundary) * c2
        cost_2cell[cid] = cost
        prize[cid] = boundary_prize - cost
    return PrizeAssignment(
        prize=prize, cost_2cell=cost_2cell, k0=k0, k1=k1, c2=c2,
        c_edge=c_edge, ranked0=tuple(ranked_cells0),
        ranked1=tuple(ranked_cells1), indexing=indexing,
    )


def topk_two_cells(assignment: PrizeAssignment, complex: CellComplex,
                   k2: int) -> list[int]:
    """Top-k2 2-cells by prize; only strictly positive prizes qualify."""
    if k2 <= 0:
        return []
    eligible = [(cid, assignment.prize_of(cid)) for cid in complex.cell_ids(2)
                if assignment.prize_of(cid) > 0.0]
    eligible.sort(key=lambda t: (-t[1], t[0]))
    return [cid for cid, _ in eligible[:k2]]


def enforce_boundary_consistency(complex: CellComplex,
                                 cells: set[int] | frozenset[int]) -> frozenset[int]:
    """Close a selection under boundaries; idempotent.

    Every selected 2-cell pulls in its boundary 1-cells and cycle
    vertices; every selected 1-cell pulls in its endpoints.
    """
    closed = set(cells)
    for cid in list(closed):
        cell = complex.cells[cid]
        if cell.dim == 2:
            closed.update(cell.boundary)
            closed.update(v for v, _ in cell.walk)
    for cid in list(closed):
        cell = complex.cells[cid]
        if cell.dim == 1:
            closed.update(cell.boundary)
    return frozenset(closed)


def selection_objective(complex: CellComplex, assignment: PrizeAssignment,
                        cells: frozenset[int]) -> tuple[float, float]:
    """(total prize, total cost) of a selection under the assignment."""
    total_prize = sum(assignment.prize_of(c) for c in cells)
    ranked1 = assignment.ranked1_ids
    connective = sum(
        1 for c in cells
        if complex.cells[c].dim == 1 and c not in ranked1
    )
    cost = assignment.c_edge * connective
    cost += sum(assignment.cost_2cell[c] for c in cells
                if complex.cells[c].dim == 2)
    return total_prize, cost


def _skeleton_connected(complex: CellComplex, cells: frozenset[int]) -> bool:
    """True iff the selected 0/1-cells form one connected piece."""
    vertices = [c for c in cells if complex.cells[c].dim == 0]
    if not vertices:
        return False
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in cells:
        cell = complex.cells[c]
        if cell.dim == 1 and len(cell.boundary) == 2:
            u, v = cell.boundary
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
    roots = {find(v) for v in vertices}
    return len(roots) == 1


def is_feasible(complex: CellComplex, cells: frozenset[int]) -> bool:
    """Nonempty, boundary-closed, connected 1-skeleton."""
    if not cells:
        return False
    if enforce_boundary_consistency(complex, cells) != cells:
        return False
    return _skeleton_connected(complex, cells)


def _selection_certificate(complex: CellComplex,
                           cells: frozenset[int]) -> tuple[int, ...]:
    """Spanning 1-cells of the selection's 1-skeleton (BFS order)."""
    vertices = sorted(c for c in cells if complex.cells[c].dim == 0)
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in vertices}
    for c in sorted(cells):
        cell = complex.cells[c]
        if cell.dim == 1 and len(cell.boundary) == 2:
            u, v = cell.boundary
            adj[u].append((c, v))
            adj[v].append((c, u))
    seen, spanning = set(), []
    for root in vertices:
        if root in seen:
            continue
        seen.add(root)
        queue = [root]
        while queue:
            v = queue.pop(0)
            for ecid, w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    spanning.append(ecid)
                    queue.append(w)
    return tuple(spanning)


def _provenance(complex: CellComplex, assignment: PrizeAssignment,
                cells: frozenset[int]) -> tuple[dict, ...]:
    by_id = {r.cell_id: r for r in assignment.ranked0 + assignment.ranked1}
    entries = []
    for cid in sorted(cells):
        ranked = by_id.get(cid)
        entries.append({
            "cell": cid,
            "dim": complex.cells[cid].dim,
            "rank": ranked.rank if ranked else None,
            "similarity": ranked.similarity if ranked else None,
            "prize": assignment.prize_of(cid),
        })
    return tuple(entries)


def _make_subcomplex(complex: CellComplex, assignment: PrizeAssignment,
                     component_selections: list[frozenset[int]],
                     degenerate: bool = False) -> Subcomplex:
    all_cells = frozenset().union(*component_selections) if component_selections else frozenset()
    prize, cost = selection_objective(complex, assignment, all_cells)
    return Subcomplex(
        complex=complex,
        cells0=tuple(sorted(c for c in all_cells if complex.cells[c].dim == 0)),
        cells1=tuple(sorted(c for c in all_cells if complex.cells[c].dim == 1)),
        cells2=tuple(sorted(c for c in all_cells if complex.cells[c].dim == 2)),
        total_prize=prize,
        total_cost=cost,
        certificate=tuple(_selection_certificate(complex, sel)
                          for sel in component_selections),
        provenance=_provenance(complex, assignment, all_cells),
        degenerate=degenerate,
    )


# --- Goemans-Williamson-style moat growing over the 1-skeleton ---

_EPS = 1e-12


def _gw_pcst(vertices: list[int], edges: list[tuple[int, int, int, float]],
             node_prize: dict[int, float]) -> tuple[set[int], set[int]]:
    """Unrooted prize-collecting Steiner approximation.

    ``edges`` are (edge_cell_id, u, v, cost). Grows uniform moats
    around active clusters, merging on tight edges and deactivating
    exhausted clusters, then strong-prunes every forest tree and
    returns the best (vertex set, edge cell id set) by pruned value.

    Only edges incident to an active cluster can fire, so event scans
    are restricted to those; the result is identical to a full scan.
    """
    cluster_of = {v: i for i, v in enumerate(vertices)}
    members: dict[int, list[int]] = {i: [v] for i, v in enumerate(vertices)}
    prize_sum = {i: node_prize.get(v, 0.0) for i, v in enumerate(vertices)}
    dual_sum = {i: 0.0 for i in members}
    incident: dict[int, list[tuple[int, int, int, float]]] = {
        i: [] for i in members}
    for edge in edges:
        _, u, v, _ = edge
        incident[cluster_of[u]].append(edge)
        if cluster_of[v] != cluster_of[u]:
            incident[cluster_of[v]].append(edge)
    active = {i for i in members if prize_sum[i] > _EPS}
    moat = {v: 0.0 for v in vertices}  # accumulated growth around v
    forest_edges: list[tuple[int, int, int, float]] = []

    def grow(dt: float) -> None:
        if dt <= 0:
            return
        for cid in active:
            dual_sum[cid] += dt
            for v in members[cid]:
                moat[v] += dt

    while active:
        best_edge = None  # (dt, eid, edge)
        for cid in active:
            for edge in incident[cid]:
                eid, u, v, cost = edge
                cu, cv = cluster_of[u], cluster_of[v]
                if cu == cv:
                    continue
                rate = int(cu in active) + int(cv in active)
                dt = max(0.0, cost - moat[u] - moat[v]) / rate
                if best_edge is None or (dt, eid) < (best_edge[0], best_edge[1]):
                    best_edge = (dt, eid, edge)
        best_deact = None  # (dt, min_vertex, cid)
        for cid in active:
            dt = max(0.0, prize_sum[cid] - dual_sum[cid])
            key = (dt, min(members[cid]))
            if best_deact is None or key < (best_deact[0], best_deact[1]):
                best_deact = (dt, key[1], cid)

        if best_edge is not None and best_edge[0] <= best_deact[0] + _EPS:
            dt, eid, edge = best_edge
            _, u, v, cost = edge
            grow(dt)
            cu, cv = cluster_of[u], cluster_of[v]
            if len(members[cu]) < len(members[cv]):
                cu, cv = cv, cu
            forest_edges.append(edge)
            for w in members[cv]:
                cluster_of[w] = cu
            members[cu].extend(members[cv])
            incident[cu].extend(incident[cv])
            prize_sum[cu] += prize_sum[cv]
            dual_sum[cu] += dual_sum[cv]
            del members[cv], prize_sum[cv], dual_sum[cv], incident[cv]
            active.discard(cv)
            if prize_sum[cu] - dual_sum[cu] > _EPS:
                active.add(cu)
            else:
                active.discard(cu)
        else:
            grow(best_deact[0])
            active.discard(best_deact[2])

    return _best_pruned_tree(vertices, forest_edges, node_prize)


def _best_pruned_tree(vertices: list[int],
                      forest_edges: list[tuple[int, int, int, float]],
                      node_prize: dict[int, float]) -> tuple[set[int], set[int]]:
    """Strong-prune the GW forest; return the best tree's cells.

    For every vertex r, ``g(r)`` is the value of the tree strong-pruned
    with r as root: its own prize plus, per neighbor branch, the
    branch's pruned value minus the connecting edge cost when positive.
    The rerooting pass computes all g values in two sweeps, then the
    selection is extracted from the best root.
    """
    adj: dict[int, list[tuple[int, int, float]]] = {v: [] for v in vertices}
    for eid, u, v, cost in forest_edges:
        adj[u].append((eid, v, cost))
        adj[v].append((eid, u, cost))

    best = None  # ((-value, n_cells, vertex_tuple), (vset, eset))
    seen: set[int] = set()
    for component_root in vertices:
        if component_root in seen:
            continue
        # iterative DFS rooting; order has children after parents
        order = [(component_root, -1, 0.0)]
        seen.add(component_root)
        stack = [component_root]
        parent = {component_root: (-1, -1, 0.0)}
        while stack:
            v = stack.pop()
            for eid, w, cost in adj[v]:
                if w not in seen:
                    seen.add(w)
                    parent[w] = (v, eid, cost)
                    order.append((w, v, cost))
                    stack.append(w)

        # down[v]: pruned value of v's subtree under the initial rooting
        down: dict[int, float] = {}
        for v, par, cost in reversed(order):
            value = node_prize.get(v, 0.0)
            for _, w, ccost in adj[v]:
                if w != par and parent[w][0] == v:
                    value += max(0.0, down[w] - ccost)
            down[v] = value

        # uc[v]: contribution arriving from the parent side when v is
        # treated as root; g(v) is then the full rerooted value
        uc: dict[int, float] = {component_root: 0.0}
        g: dict[int, float] = {}
        for v, par, cost in order:
            base = node_prize.get(v, 0.0) + uc[v]
            total = base
            for _, w, ccost in adj[v]:
                if w != par and parent[w][0] == v:
                    total += max(0.0, down[w] - ccost)
            g[v] = total
            for _, w, ccost in adj[v]:
                if w != par and parent[w][0] == v:
                    exclude_w = total - max(0.0, down[w] - ccost)
                    uc[w] = max(0.0, exclude_w - ccost)

        root = min(g, key=lambda v: (-g[v], v))
        vset, eset = {root}, set()
        frontier = [(root, -1)]
        while frontier:
            v, came_from = frontier.pop()
            for eid, w, ccost in adj[v]:
                if w == came_from:
                    continue
                side = down[w] if parent[w][0] == v else g[w] - max(
                    0.0, down[v] - ccost)
                if side - ccost > _EPS:
                    vset.add(w)
                    eset.add(eid)
                    frontier.append((w, v))
        key = (-g[root], len(vset) + len(eset), tuple(sorted(vset)))
        if best is None or key < best[0]:
            best = (key, (vset, eset))
    assert best is not None
    return best[1]


def _connector_path(complex: CellComplex, selected: frozenset[int],
                    assignment: PrizeAssignment, component_vertices: list[int],
                    targets: set[int]) -> frozenset[int] | None:
    """Cheapest path of cells from the current selection to any target
    vertex; multi-source Dijkstra over the component's 1-skeleton.

    Edge weight is 0 for already-selected or ranked 1-cells, else
    ``c_edge``. Returns the cells to add (vertices and edges), or None
    if unreachable.
    """
    sources = {c for c in selected if complex.cells[c].dim == 0}
    if not sources:
        return None
    ranked1 = assignment.ranked1_ids
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in component_vertices}
    for cid in complex.cell_ids(1):
        cell = complex.cells[cid]
        if len(cell.boundary) != 2:
            continue
        u, v = cell.boundary
        if u in adj and v in adj:
            adj[u].append((cid, v))
            adj[v].append((cid, u))

    def weight(ecid: int) -> float:
        if ecid in selected or ecid in ranked1:
            return 0.0
        return assignment.c_edge

    dist: dict[int, tuple[float, int]] = {}
    prev: dict[int, tuple[int, int]] = {}
    heap = []
    for s in sorted(sources):
        dist[s] = (0.0, 0)
        heapq.heappush(heap, (0.0, 0, s))
    while heap:
        d, hops, v = heapq.heappop(heap)
        if (d, hops) > dist[v]:
            continue
        for ecid, w in sorted(adj[v]):
            nd, nh = d + weight(ecid), hops + 1
            cur = dist.get(w)
            if cur is None or (nd, nh) < cur:
                dist[w] = (nd, nh)
                prev[w] = (v, ecid)
                heapq.heappush(heap, (nd, nh, w))

    reachable = [t for t in sorted(targets) if t in dist]
    if not reachable:
        return None
    goal = min(reachable, key=lambda t: (dist[t][0], dist[t][1], t))
    cells = set()
    v = goal
    while v not in sources:
        cells.add(v)
        v, ecid = prev[v]
        cells.add(ecid)
    return frozenset(cells)


def _solve_component(complex: CellComplex, assignment: PrizeAssignment,
                     component_vertices: list[int],
                     selected2: list[int]) -> frozenset[int]:
    """Phase a+b of the solver for one graph component."""
    vset = set(component_vertices)
    ranked1 = assignment.ranked1_ids
    node_prize = {v: assignment.prize_of(v) for v in component_vertices}
    edges = []
    for cid in complex.cell_ids(1):
        cell = complex.cells[cid]
        if len(cell.boundary) != 2:
            continue
        u, v = cell.boundary
        if u not in vset:
            continue
        # ranked edge prizes are folded into endpoint half-prizes
        if cid in ranked1:
            half = assignment.prize_of(cid) / 2.0
            node_prize[u] += half
            node_prize[v] += half
            edges.append((cid, u, v, 0.0))
        else:
            edges.append((cid, u, v, assignment.c_edge))

    gw_vertices, gw_edges = _gw_pcst(sorted(component_vertices), edges,
                                     node_prize)
    base = set(gw_vertices) | set(gw_edges)
    # ranked 1-cells with both endpoints already selected are free prize
    for cid in sorted(ranked1):
        cell = complex.cells[cid]
        if all(v in base for v in cell.boundary):
            base.add(cid)
    candidates = [enforce_boundary_consistency(complex, base)]
    # trivial feasible answers: best single ranked 0-cell, each ranked
    # 1-cell's closure
    for r in assignment.ranked0:
        if r.cell_id in vset and r.prize > 0:
            candidates.append(frozenset([r.cell_id]))
    for r in assignment.ranked1:
        cell = complex.cells[r.cell_id]
        if cell.boundary[0] in vset and r.prize > 0:
            candidates.append(
                enforce_boundary_consistency(complex, {r.cell_id}))

    def objective_of(sel: frozenset[int]) -> float:
        prize, cost = selection_objective(complex, assignment, sel)
        return prize - cost

    current = min(candidates,
                  key=lambda sel: (-objective_of(sel), len(sel),
                                   tuple(sorted(sel))))

    def with_two_cell(selection: frozenset[int], cid: int) -> frozenset[int] | None:
        """Closure of selection plus the 2-cell, connected if needed."""
        cell = complex.cells[cid]
        cycle_vertices = {v for v, _ in cell.walk}
        if not cycle_vertices <= vset:
            return None
        addition = {cid}
        if not cycle_vertices & {c for c in selection
                                 if complex.cells[c].dim == 0}:
            connector = _connector_path(complex, selection, assignment,
                                        component_vertices, cycle_vertices)
            if connector is None:
                return None
            addition |= connector
        return enforce_boundary_consistency(complex, selection | addition)

    # staged 2-cell addition, exact marginal acceptance
    for cid in selected2:
        tentative = with_two_cell(current, cid)
        if tentative is not None and \
                objective_of(tentative) > objective_of(current) + _EPS:
            current = tentative
    # 2-cells with shared boundary can be jointly profitable while each
    # marginal alone is not; offer the leftovers as one batch
    remaining = [cid for cid in selected2 if cid not in current]
    if len(remaining) > 1:
        batch = current
        for cid in remaining:
            tentative = with_two_cell(batch, cid)
            if tentative is not None:
                batch = tentative
        if objective_of(batch) > objective_of(current) + _EPS:
            current = batch
    return current


def solve_subcomplex(complex: CellComplex, assignment: PrizeAssignment,
                     selected2: list[int],
                     fallback: tuple[int, float] | None = None) -> Subcomplex:
    """Extract a connected, boundary-consistent subcomplex.

    Candidate cells spanning several graph components are solved per
    component and unioned. With no positive-prize cell at all, the
    ``fallback`` (highest-similarity 0-cell) is returned as a
    degenerate single-cell subcomplex, or :class:`EmptyCandidates` is
    raised when none is supplied.
    """
    seeds = set()
    for r in assignment.ranked0:
        if r.prize > 0:
            seeds.add(r.cell_id)
    for r in assignment.ranked1:
        if r.prize > 0:
            seeds.add(complex.cells[r.cell_id].boundary[0])
    for cid in selected2:
        seeds.add(complex.cells[cid].walk[0][0])

    if not seeds:
        if fallback is None:
            raise EmptyCandidates("no cell has positive prize")
        return _make_subcomplex(complex, assignment,
                                [frozenset([fallback[0]])], degenerate=True)

    components = [comp for comp in connected_components(complex.graph)
                  if seeds & set(comp)]
    selections = [
        _solve_component(complex, assignment, comp, selected2)
        for comp in components
    ]
    return _make_subcomplex(complex, assignment, selections)


def brute_force_subcomplex(complex: CellComplex,
                           assignment: PrizeAssignment) -> Subcomplex:
    """Exact maximizer by exhaustive enumeration; guard: <= 20 cells.

    Ties broken by smaller cell count, then lexicographic ids.
    """
    n = complex.num_cells
    if n > 20:
        raise TooLarge(f"{n} cells exceeds the enumeration guard (20)")
    required = []
    for cid in range(n):
        closure = enforce_boundary_consistency(complex, {cid})
        mask = 0
        for c in closure:
            mask |= 1 << c
        required.append(mask)

    best = None  # (-objective, count, sorted_cells, frozenset)
    for mask in range(1, 1 << n):
        cells_list = [c for c in range(n) if mask >> c & 1]
        req = 0
        for c in cells_list:
            req |= required[c]
        if req != mask:
            continue
        cells = frozenset(cells_list)
        if not _skeleton_connected(complex, cells):
            continue
        prize, cost = selection_objective(complex, assignment, cells)
        key = (-(prize - cost), len(cells_list), tuple(cells_list))
        if best is None or key < best[0]:
            best = (key, cells)
    if best is None:
        raise EmptyCandidates("no feasible nonempty subcomplex")
    return _make_subcomplex(complex, assignment, [best[1]])


def subcomplex_stats(sub: Subcomplex) -> dict:
    """Size and value counters used by the evaluation harness."""
    return {
        "n0": len(sub.cells0),
        "n1": len(sub.cells1),
        "n2": len(sub.cells2),
        "total_prize": sub.total_prize,
        "total_cost": sub.total_cost,
    }


def subcomplex_to_dict(sub: Subcomplex) -> dict:
    """JSON-ready representation of a subcomplex."""
    return {
        "cells": {
            "0": list(sub.cells0),
            "1": list(sub.cells1),
            "2": list(sub.cells2),
        },
        "prize": sub.total_prize,
        "cost": sub.total_cost,
        "provenance": [dict(p) for p in sub.provenance],
        "certificate": [list(c) for c in sub.certificate],
        "degenerate": sub.degenerate,
    }


def retrieve_subcomplex(complex: CellComplex, z_q: np.ndarray, k0: int,
                        k1: int, k2: int, c2: float, c_edge: float = 1.0,
                        indexing: str = "alg3") -> Subcomplex:
    """Full retrieval: rank cells, assign prizes, solve.

    The highest-similarity 0-cell is always computed as the degenerate
    fallback, independent of ``k0``.
    """
    ranked0 = topk_cells(complex, z_q, 0, k0)
    ranked1 = topk_cells(complex, z_q, 1, k1)
    assignment = assign_prizes(ranked0, ranked1, complex, (k0, k1), c2,
                               c_edge=c_edge, indexing=indexing)
    selected2 = topk_two_cells(assignment, complex, k2)
    fallback_list = topk_cells(complex, z_q, 0, 1)
    fallback = fallback_list[0] if fallback_list else None
    return solve_subcomplex(complex, assignment, selected2, fallback=fallback)
