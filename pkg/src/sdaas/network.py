"""Skyway network: rooftop nodes joined by directed flight segments."""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from sdaas.errors import ValidationError
from sdaas.wind import WindCondition

NODES_FILE = "nodes.csv"
EDGES_FILE = "edges.csv"
NODES_HEADER = ("node_id", "x_m", "y_m")
EDGES_HEADER = ("edge_id", "src", "dst", "length_m")

# Mean nearest-neighbour distance targeted by the synthetic generator.
TARGET_SPACING_M = 400.0


def _q(value: float) -> float:
    # Everything is held at micrometre resolution so the 6-decimal CSV form is lossless.
    return round(float(value), 6)


@dataclass(frozen=True)
class SkywayNode:
    id: int
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError(f"node {self.id}: coordinates must be finite")
        object.__setattr__(self, "x", _q(self.x))
        object.__setattr__(self, "y", _q(self.y))


@dataclass(frozen=True)
class SkywaySegment:
    id: int
    src: int
    dst: int
    length_m: float
    wind: WindCondition | None = None

    def __post_init__(self):
        if self.src == self.dst:
            raise ValidationError(f"edge {self.id}: src and dst are both node {self.src}")
        if not (math.isfinite(self.length_m) and self.length_m > 0):
            raise ValidationError(f"edge {self.id}: length_m must be positive, got {self.length_m}")
        object.__setattr__(self, "length_m", _q(self.length_m))
        if self.length_m <= 0:
            raise ValidationError(f"edge {self.id}: length_m below 1e-6 m")


@dataclass(frozen=True)
class SkywayNetwork:
    nodes: tuple[SkywayNode, ...]
    segments: tuple[SkywaySegment, ...]
    _node_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes, key=lambda n: n.id))
        segments = tuple(sorted(self.segments, key=lambda s: s.id))
        index = {}
        for n in nodes:
            if n.id in index:
                raise ValidationError(f"duplicate node id {n.id}")
            index[n.id] = n
        seen = set()
        for s in segments:
            if s.id in seen:
                raise ValidationError(f"duplicate edge id {s.id}")
            seen.add(s.id)
            for end in (s.src, s.dst):
                if end not in index:
                    raise ValidationError(f"edge {s.id} references unknown node {end}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "_node_index", index)

    def node(self, node_id: int) -> SkywayNode:
        return self._node_index[node_id]

    def with_wind(self, wind: Mapping[int, WindCondition]) -> "SkywayNetwork":
        """Copy of the network with wind attached to every segment in ``wind``."""
        missing = [s.id for s in self.segments if s.id not in wind]
        if missing:
            raise ValidationError(
                f"wind assignment missing {len(missing)} segment(s), first is edge {missing[0]}"
            )
        unknown = set(wind) - {s.id for s in self.segments}
        if unknown:
            raise ValidationError(f"wind given for unknown edge {min(unknown)}")
        return SkywayNetwork(self.nodes, tuple(replace(s, wind=wind[s.id]) for s in self.segments))

    def is_connected(self) -> bool:
        """Weak connectivity, checked by breadth-first search."""
        if not self.nodes:
            return True
        adj: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        for s in self.segments:
            adj[s.src].append(s.dst)
            adj[s.dst].append(s.src)
        start = self.nodes[0].id
        seen = {start}
        frontier = [start]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
        return len(seen) == len(self.nodes)

    def digest(self) -> str:
        """SHA-256 over the serialized node and edge tables."""
        nodes_text, edges_text = _serialize(self)
        return hashlib.sha256((nodes_text + "\0" + edges_text).encode()).hexdigest()


def _serialize(network: SkywayNetwork) -> tuple[str, str]:
    nodes_buf, edges_buf = io.StringIO(), io.StringIO()
    w = csv.writer(nodes_buf, lineterminator="\n")
    w.writerow(NODES_HEADER)
    for n in network.nodes:
        w.writerow([n.id, f"{n.x:.6f}", f"{n.y:.6f}"])
    w = csv.writer(edges_buf, lineterminator="\n")
    w.writerow(EDGES_HEADER)
    for s in network.segments:
        w.writerow([s.id, s.src, s.dst, f"{s.length_m:.6f}"])
    return nodes_buf.getvalue(), edges_buf.getvalue()


def save_network(network: SkywayNetwork, out_dir: str | Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    nodes_text, edges_text = _serialize(network)
    nodes_path, edges_path = out_dir / NODES_FILE, out_dir / EDGES_FILE
    nodes_path.write_bytes(nodes_text.encode("utf-8"))
    edges_path.write_bytes(edges_text.encode("utf-8"))
    return nodes_path, edges_path


def _read_rows(path: Path, header: tuple[str, ...]) -> Iterable[tuple[int, dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != header:
            raise ValidationError(f"{path}: expected header {','.join(header)}")
        for row in reader:
            yield reader.line_num, row


def load_network(nodes_path: str | Path, edges_path: str | Path) -> SkywayNetwork:
    """Read a network from node and edge CSV files.

    Edges with an empty ``length_m`` get the Euclidean distance between their
    endpoints. Raises ``FileNotFoundError`` for missing files and
    ``ValidationError`` for malformed or inconsistent content.
    """
    nodes_path, edges_path = Path(nodes_path), Path(edges_path)
    nodes: dict[int, SkywayNode] = {}
    for line, row in _read_rows(nodes_path, NODES_HEADER):
        try:
            node = SkywayNode(int(row["node_id"]), float(row["x_m"]), float(row["y_m"]))
        except ValueError as exc:
            raise ValidationError(f"{nodes_path}: line {line}: {exc}") from None
        if node.id in nodes:
            raise ValidationError(f"{nodes_path}: duplicate node id {node.id}")
        nodes[node.id] = node

    segments = []
    for line, row in _read_rows(edges_path, EDGES_HEADER):
        try:
            edge_id, src, dst = int(row["edge_id"]), int(row["src"]), int(row["dst"])
        except ValueError as exc:
            raise ValidationError(f"{edges_path}: line {line}: {exc}") from None
        for end in (src, dst):
            if end not in nodes:
                raise ValidationError(f"edge {edge_id} references unknown node {end}")
        raw = (row["length_m"] or "").strip()
        if raw:
            try:
                length = float(raw)
            except ValueError:
                raise ValidationError(f"edge {edge_id}: bad length_m {raw!r}") from None
        else:
            a, b = nodes[src], nodes[dst]
            length = math.hypot(b.x - a.x, b.y - a.y)
        segments.append(SkywaySegment(edge_id, src, dst, length))
    return SkywayNetwork(tuple(nodes.values()), tuple(segments))


def _knn_pairs(coords: np.ndarray, k: int) -> set[tuple[int, int]]:
    tree = cKDTree(coords)
    _, idx = tree.query(coords, k=k + 1)
    pairs = set()
    for i, row in enumerate(idx):
        for j in row[1:]:
            j = int(j)
            pairs.add((min(i, j), max(i, j)))
    return pairs


def _bridge_components(coords: np.ndarray, pairs: set[tuple[int, int]]) -> None:
    """Add the shortest edge from the growing main component to the rest until connected."""
    n = len(coords)
    while True:
        if pairs:
            rows, cols = zip(*pairs)
        else:
            rows, cols = (), ()
        graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        n_comp, labels = connected_components(graph, directed=False)
        if n_comp == 1:
            return
        inside = np.flatnonzero(labels == labels[0])
        outside = np.flatnonzero(labels != labels[0])
        dist, nearest = cKDTree(coords[inside]).query(coords[outside])
        best = int(np.argmin(dist))
        a, b = int(inside[nearest[best]]), int(outside[best])
        pairs.add((min(a, b), max(a, b)))


def gen_network(node_count: int, seed: int, k: int = 3) -> SkywayNetwork:
    """Random geometric skyway network.

    Nodes are scattered uniformly over a square sized for a mean
    nearest-neighbour spacing of about 400 m, joined to their ``k`` nearest
    neighbours, then bridged into one component. Each undirected corridor
    becomes two directed segments: ids ``2p+1`` (low->high node id) and
    ``2p+2`` for the p-th corridor in sorted order. Node ids are 1-based.
    """
    if node_count < 2:
        raise ValidationError(f"node_count must be >= 2, got {node_count}")
    if seed < 0:
        raise ValidationError("seed must be a non-negative integer")
    if k < 1:
        raise ValidationError("k must be >= 1")
    # mean NN distance of a Poisson field is 1 / (2 sqrt(density))
    side = 2.0 * TARGET_SPACING_M * math.sqrt(node_count)
    rng = np.random.default_rng(seed)
    coords = np.round(rng.random((node_count, 2)) * side, 6)

    pairs = _knn_pairs(coords, min(k, node_count - 1))
    _bridge_components(coords, pairs)

    nodes = tuple(SkywayNode(i + 1, x, y) for i, (x, y) in enumerate(coords.tolist()))
    segments = []
    for p, (i, j) in enumerate(sorted(pairs)):
        length = math.hypot(coords[j, 0] - coords[i, 0], coords[j, 1] - coords[i, 1])
        segments.append(SkywaySegment(2 * p + 1, i + 1, j + 1, length))
        segments.append(SkywaySegment(2 * p + 2, j + 1, i + 1, length))
    return SkywayNetwork(nodes, tuple(segments))
