"""Ingest, validate, and serialize textual graphs and QA fixtures.

Graphs are node/edge lists where every element carries a free-text
attribute. On load, node ids are compacted to the dense range
``[0, |V|)``; the original ids are kept in ``original_ids`` so that
serialization and textualization can refer to them.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IoError, MissingGraphError, ParseError, ValidationError

VALID_DATASETS = ("explagraphs", "scenegraphs", "webqsp", "custom")


@dataclass(frozen=True)
class Node:
    id: int
    text: str


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    text: str


@dataclass(frozen=True)
class TextualGraph:
    """A graph whose nodes and edges carry textual attributes.

    ``nodes[i].id == i`` always holds (dense ids); ``original_ids[i]``
    is the id the node had in the source file. Direction is stored for
    rendering fidelity but the topological lifting treats edges as
    undirected.
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    directed: bool = False
    original_ids: tuple[int, ...] = field(default=(), compare=True)

    def __post_init__(self):
        if not self.original_ids:
            object.__setattr__(
                self, "original_ids", tuple(n.id for n in self.nodes)
            )

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def node_text(self, node_id: int) -> str:
        return self.nodes[node_id].text

    def original_id(self, node_id: int) -> int:
        return self.original_ids[node_id]


@dataclass(frozen=True)
class QaExample:
    """One QA instance: a question over a graph with gold answers."""

    idx: int
    question: str
    graph: TextualGraph
    answers: tuple[str, ...]
    dataset: str = "custom"


def _compact(raw_nodes: list[tuple[int, str]], raw_edges: list[tuple[int, int, str]],
             directed: bool) -> TextualGraph:
    """Validate raw node/edge tuples and compact ids to a dense range."""
    seen: dict[int, int] = {}
    for original, _ in raw_nodes:
        if original in seen:
            raise ValidationError(f"duplicate node_id {original}")
        seen[original] = len(seen)
    nodes = tuple(Node(id=seen[orig], text=text) for orig, text in raw_nodes)
    edges = []
    for src, dst, text in raw_edges:
        if src not in seen:
            raise ValidationError(f"edge references unknown node_id {src}")
        if dst not in seen:
            raise ValidationError(f"edge references unknown node_id {dst}")
        edges.append(Edge(src=seen[src], dst=seen[dst], text=text))
    return TextualGraph(
        nodes=nodes,
        edges=tuple(edges),
        directed=directed,
        original_ids=tuple(orig for orig, _ in raw_nodes),
    )


def _load_json_graph(path: Path) -> TextualGraph:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(data, dict) or "nodes" not in data or "edges" not in data:
        raise ParseError(f"{path}: expected object with 'nodes' and 'edges'")
    raw_nodes, raw_edges = [], []
    try:
        for entry in data["nodes"]:
            raw_nodes.append((int(entry["id"]), str(entry["text"])))
        for entry in data["edges"]:
            raw_edges.append((int(entry["src"]), int(entry["dst"]), str(entry["text"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed node/edge entry: {exc}") from exc
    return _compact(raw_nodes, raw_edges, bool(data.get("directed", False)))


def _load_csv_pair(directory: Path) -> TextualGraph:
    nodes_path = directory / "nodes.csv"
    edges_path = directory / "edges.csv"
    for p in (nodes_path, edges_path):
        if not p.exists():
            raise ParseError(f"csv-pair graph missing {p.name} in {directory}")
    raw_nodes, raw_edges = [], []
    try:
        with nodes_path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "node_id" not in reader.fieldnames:
                raise ParseError(f"{nodes_path}: expected header node_id,node_attr")
            for row in reader:
                raw_nodes.append((int(row["node_id"]), row.get("node_attr") or ""))
        with edges_path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "src" not in reader.fieldnames:
                raise ParseError(f"{edges_path}: expected header src,edge_attr,dst")
            for row in reader:
                raw_edges.append(
                    (int(row["src"]), int(row["dst"]), row.get("edge_attr") or "")
                )
    except ValueError as exc:
        raise ParseError(f"{directory}: non-integer id: {exc}") from exc
    return _compact(raw_nodes, raw_edges, directed=True)


def load_graph(path: str | Path, format: str | None = None) -> TextualGraph:
    """Load a textual graph from ``path``.

    ``format`` is ``"json"`` or ``"csv-pair"``; when omitted it is
    inferred (a directory means csv-pair). Raises :class:`ParseError`
    on malformed files and :class:`ValidationError` on dangling edge
    endpoints or duplicate node ids.
    """
    path = Path(path)
    if not path.exists():
        raise IoError(f"no such path: {path}")
    if format is None:
        format = "csv-pair" if path.is_dir() else "json"
    if format == "json":
        return _load_json_graph(path)
    if format == "csv-pair":
        return _load_csv_pair(path)
    raise ValueError(f"unknown graph format: {format!r}")


def graph_to_dict(graph: TextualGraph) -> dict:
    """JSON-schema dict for ``graph``, using original node ids."""
    return {
        "nodes": [
            {"id": graph.original_ids[n.id], "text": n.text} for n in graph.nodes
        ],
        "edges": [
            {
                "src": graph.original_ids[e.src],
                "dst": graph.original_ids[e.dst],
                "text": e.text,
            }
            for e in graph.edges
        ],
        "directed": graph.directed,
    }


def save_graph(graph: TextualGraph, path: str | Path) -> None:
    """Serialize ``graph`` as JSON; ``load_graph`` round-trips it exactly."""
    path = Path(path)
    payload = json.dumps(graph_to_dict(graph), ensure_ascii=False, indent=1)
    try:
        path.write_text(payload + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_qa_fixture(path: str | Path) -> list[QaExample]:
    """Load a QA fixture directory: ``questions.jsonl`` + per-example graphs.

    Each line is ``{"idx", "question", "answers", "graph"}`` with the graph
    path relative to the fixture root. Returns examples ordered by idx.
    """
    root = Path(path)
    questions = root / "questions.jsonl"
    if not questions.exists():
        if root.is_dir():
            return []
        raise IoError(f"no such fixture directory: {root}")
    examples = []
    for lineno, line in enumerate(questions.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            idx = int(record["idx"])
            question = str(record["question"])
            answers = tuple(str(a) for a in record["answers"])
            graph_rel = record["graph"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{questions}:{lineno}: {exc}") from exc
        if not question:
            raise ValidationError(f"{questions}:{lineno}: empty question")
        if not answers:
            raise ValidationError(f"{questions}:{lineno}: empty answers list")
        dataset = str(record.get("dataset", "custom"))
        if dataset not in VALID_DATASETS:
            raise ValidationError(f"{questions}:{lineno}: unknown dataset tag {dataset!r}")
        graph_path = root / graph_rel
        if not graph_path.exists():
            raise MissingGraphError(f"example {idx}: missing graph file {graph_path}")
        graph = load_graph(graph_path)
        examples.append(QaExample(idx=idx, question=question, graph=graph,
                                  answers=answers, dataset=dataset))
    examples.sort(key=lambda ex: ex.idx)
    return examples
