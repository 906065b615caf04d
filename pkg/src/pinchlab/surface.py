"""Pants groups, graph gluing and closed-geodesic length spectra.

A surface is described by an augmented admissible graph: trivalent vertices
(one pair of pants each), proper oriented-edge pairs (gluings) and phantom
edges (funnel or cusp ends).  Edge labels carry Fenchel-Nielsen length and
twist.  Assembly produces, per connected component, an explicit generating
set of Mobius matrices, and for every non-compact component a free basis
that drives the word enumeration behind the length spectrum.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from pinchlab.errors import BudgetExceededError, DegenerateInputError, DomainError, GraphError
from pinchlab.hyperbolic import (
    INF,
    Hexagon,
    MobiusMatrix,
    compose_reflections,
    geodesic_endpoints,
    halfplane_distance,
    hexagon,
    reflection,
    standard_form,
    translation_length,
)

# Gluing a fractional twist needs a hyperbolic holonomy; shorter labels are
# treated as numerically degenerate rather than silently parabolic.
MIN_GLUE_LENGTH = 1e-6


# ---------------------------------------------------------------------------
# Pairs of pants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PantsGroup:
    """Three side-pairing generators with gamma3 gamma2 gamma1 = 1."""

    gamma: Tuple[MobiusMatrix, MobiusMatrix, MobiusMatrix]
    lengths: Tuple[float, float, float]
    hexagon: Hexagon


def build_pants(l1: float, l2: float, l3: float) -> PantsGroup:
    """Pants group from boundary lengths; generator i realizes length l_i.

    gamma_i is the product of the reflections in the hexagon geodesics
    T_(i+2) and T_(i+1); it is parabolic exactly when l_i = 0.
    """
    hx = hexagon(l1, l2, l3)
    refl = [reflection(t) for t in hx.T]
    gammas = tuple(
        compose_reflections(refl[(i + 2) % 3], refl[(i + 1) % 3]) for i in range(3)
    )
    return PantsGroup(gammas, (l1, l2, l3), hx)


# ---------------------------------------------------------------------------
# Augmented graphs and labels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrientedEdge:
    id: str
    from_vertex: str
    slot: int
    pair: Optional[str] = None


class AugmentedGraph:
    """Validated augmented admissible graph."""

    def __init__(self, vertices: Sequence[str], edges: Sequence[OrientedEdge]):
        self.vertices = list(vertices)
        self.edges = {e.id: e for e in edges}
        if len(self.edges) != len(edges):
            raise GraphError("duplicate edge ids")
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex ids")
        self.slots: Dict[str, List[str]] = {}
        for v in self.vertices:
            incident = sorted(
                (e for e in edges if e.from_vertex == v), key=lambda e: e.slot
            )
            if [e.slot for e in incident] != [0, 1, 2]:
                raise GraphError(f"vertex {v!r} must carry slots 0, 1, 2 exactly once")
            self.slots[v] = [e.id for e in incident]
        for e in edges:
            if e.from_vertex not in self.slots:
                raise GraphError(f"edge {e.id!r} has unknown vertex {e.from_vertex!r}")
            if e.pair is not None:
                if e.pair == e.id:
                    raise GraphError(f"edge {e.id!r} pairs with itself")
                mate = self.edges.get(e.pair)
                if mate is None or mate.pair != e.id:
                    raise GraphError(f"involution broken at edge {e.id!r}")
        self.proper = sorted(e.id for e in edges if e.pair is not None)
        self.phantom = sorted(e.id for e in edges if e.pair is None)
        # derived topological type
        n_unoriented = len(self.proper) // 2
        v_count = len(self.vertices)
        self.genus = n_unoriented - v_count + 1
        self.punctures = 3 * v_count - 2 * n_unoriented
        if self.genus < 0 or self.punctures != len(self.phantom):
            raise GraphError("edge counts are inconsistent with a (p, n) type")
        if 2 * self.genus - 2 + self.punctures <= 0:
            raise GraphError("graph type violates 2p - 2 + n > 0")

    def iota(self, edge_id: str) -> Optional[str]:
        return self.edges[edge_id].pair

    def unoriented(self, edge_id: str) -> str:
        """Canonical representative of the unoriented edge."""
        mate = self.edges[edge_id].pair
        return edge_id if mate is None else min(edge_id, mate)

    def unoriented_edges(self) -> List[str]:
        reps = {self.unoriented(e) for e in self.edges}
        return sorted(reps)

    def descriptor(self) -> dict:
        return {
            "vertices": self.vertices,
            "edges": [
                {
                    "id": e.id,
                    "from_vertex": e.from_vertex,
                    "slot": e.slot,
                    "pair": e.pair,
                }
                for e in sorted(self.edges.values(), key=lambda e: e.id)
            ],
        }


@dataclass(frozen=True)
class FNLabel:
    """Length and twist per unoriented edge."""

    ell: Dict[str, float]
    tau: Dict[str, float]

    def __post_init__(self):
        for d, l in self.ell.items():
            if l < 0:
                raise GraphError(f"negative length label on edge {d!r}")


def graph_from_json(data: dict) -> Tuple[AugmentedGraph, FNLabel]:
    """Parse the graph/label JSON schema.

    ``{"vertices": [...], "edges": [{"id", "from_vertex", "slot", "pair"}],
    "labels": {edge-id: {"ell": float, "tau": float}}}``
    """
    try:
        edges = [
            OrientedEdge(
                id=str(e["id"]),
                from_vertex=str(e["from_vertex"]),
                slot=int(e["slot"]),
                pair=None if e.get("pair") is None else str(e["pair"]),
            )
            for e in data["edges"]
        ]
        graph = AugmentedGraph([str(v) for v in data["vertices"]], edges)
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed graph JSON: {exc}") from exc
    ell: Dict[str, float] = {}
    tau: Dict[str, float] = {}
    for eid, lab in data.get("labels", {}).items():
        if eid not in graph.edges:
            raise GraphError(f"label references unknown edge {eid!r}")
        rep = graph.unoriented(eid)
        ell[rep] = float(lab["ell"])
        tau[rep] = float(lab.get("tau", 0.0))
    for rep in graph.unoriented_edges():
        if rep not in ell:
            raise GraphError(f"missing label for edge {rep!r}")
    return graph, FNLabel(ell, tau)


def graph_to_json(graph: AugmentedGraph, label: FNLabel) -> dict:
    data = graph.descriptor()
    data["labels"] = {
        d: {"ell": label.ell[d], "tau": label.tau.get(d, 0.0)}
        for d in graph.unoriented_edges()
    }
    return data


# ---------------------------------------------------------------------------
# Gluing
# ---------------------------------------------------------------------------


def _axis_circle_radius(n: MobiusMatrix, circle) -> float:
    """Radius of N(T); N(T) is orthogonal to the imaginary axis."""
    p, q = geodesic_endpoints(circle)
    e1, e2 = n.apply(p), n.apply(q)
    if e1 == INF or e2 == INF:
        raise DegenerateInputError("hexagon circle maps through infinity")
    prod = e1 * e2
    if prod >= 0 or abs(e1 + e2) > 1e-7 * (abs(e1) + abs(e2)):
        raise DegenerateInputError(
            "circle pair fails the disjointness tolerance in standard position"
        )
    return math.sqrt(-prod)


def gluing_isometry(
    pants_from: PantsGroup,
    slot_from: int,
    pants_to: PantsGroup,
    slot_to: int,
    tau: float,
) -> MobiusMatrix:
    """Isometry g carrying the ``pants_to`` plane onto the ``pants_from`` plane.

    It satisfies g(axis_j') = axis_i, g gamma_j' g^(-1) = gamma_i^(-1), and
    gamma_i^tau maps T_(i+1) onto g(T_(j+1)').
    """
    gamma_i = pants_from.gamma[slot_from]
    gamma_j = pants_to.gamma[slot_to]
    ell = pants_from.lengths[slot_from]
    if ell < MIN_GLUE_LENGTH:
        raise DomainError(f"glued edge requires length >= {MIN_GLUE_LENGTH}")
    if abs(ell - pants_to.lengths[slot_to]) > 1e-12 * (1.0 + ell):
        raise GraphError("glued slots carry different lengths")
    n_i, _ = standard_form(gamma_i)
    n_j, _ = standard_form(gamma_j)
    r_i = _axis_circle_radius(n_i, pants_from.hexagon.T[(slot_from + 1) % 3])
    r_j = _axis_circle_radius(n_j, pants_to.hexagon.T[(slot_to + 1) % 3])
    mu_sq = math.exp(tau * ell) * r_i * r_j
    mu = math.sqrt(mu_sq)
    b = MobiusMatrix.from_entries(0.0, mu, -1.0 / mu, 0.0)
    return n_i.inverse() @ b @ n_j


# ---------------------------------------------------------------------------
# Assembled surfaces
# ---------------------------------------------------------------------------


@dataclass
class Component:
    """One connected component of the assembled surface."""

    vertices: List[str]
    root: str
    conjugators: Dict[str, MobiusMatrix]
    vertex_gens: Dict[str, Tuple[MobiusMatrix, MobiusMatrix, MobiusMatrix]]
    stable_letters: Dict[str, MobiusMatrix]
    free_basis: List[Tuple[str, MobiusMatrix]]
    is_free: bool
    core_points: List[complex]

    def basis_matrices(self) -> List[MobiusMatrix]:
        return [m for _, m in self.free_basis]


@dataclass
class AssembledSurface:
    graph: AugmentedGraph
    label: FNLabel
    pants: Dict[str, PantsGroup]
    components: List[Component]

    def component_of(self, vertex: str) -> Component:
        for comp in self.components:
            if vertex in comp.vertices:
                return comp
        raise KeyError(vertex)

    def generators_for_vertex(self, vertex: str) -> List[MobiusMatrix]:
        """Generating set of Gamma_q in the plane copy of vertex q."""
        comp = self.component_of(vertex)
        h = comp.conjugators[vertex]
        hinv = h.inverse()
        return [hinv @ m @ h for m in comp.basis_matrices()]

    def descriptor_hash(self) -> str:
        payload = json.dumps(graph_to_json(self.graph, self.label), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _gen_name(index: int) -> str:
    letters = "abcdefghijklmnopqrstuvwxyz"
    if index < len(letters):
        return letters[index]
    return f"g{index}"


def assemble(graph: AugmentedGraph, label: FNLabel) -> AssembledSurface:
    """Build per-vertex groups and glue them along the proper edges."""
    pants: Dict[str, PantsGroup] = {}
    for v in graph.vertices:
        ls = tuple(label.ell[graph.unoriented(e)] for e in graph.slots[v])
        pants[v] = build_pants(*ls)

    # glued proper edges (positive length) connect vertices
    glued: List[Tuple[str, str, str, int, str, int]] = []  # (d, q, i, q', j) info
    for d in graph.unoriented_edges():
        e = graph.edges[d]
        if e.pair is None or label.ell[d] < MIN_GLUE_LENGTH:
            continue
        mate = graph.edges[e.pair]
        glued.append((d, e.from_vertex, e.id, e.slot, mate.from_vertex, mate.slot))

    adjacency: Dict[str, List[Tuple[str, str, int, int]]] = {v: [] for v in graph.vertices}
    for d, q, _eid, i, qp, j in glued:
        adjacency[q].append((d, qp, i, j))
        adjacency[qp].append((d, q, j, i))

    seen: Dict[str, int] = {}
    components: List[Component] = []
    for start in graph.vertices:
        if start in seen:
            continue
        comp_index = len(components)
        comp_vertices = [start]
        seen[start] = comp_index
        conjugators = {start: MobiusMatrix.identity()}
        tree_edges: Dict[str, Tuple[str, int, str, int]] = {}
        frontier = [start]
        while frontier:
            q = frontier.pop(0)
            for d, qp, i, j in sorted(adjacency[q]):
                if qp in conjugators:
                    continue
                g = gluing_isometry(
                    pants[q], i, pants[qp], j, label.tau.get(d, 0.0)
                )
                conjugators[qp] = conjugators[q] @ g
                tree_edges[d] = (q, i, qp, j)
                seen[qp] = comp_index
                comp_vertices.append(qp)
                frontier.append(qp)

        vertex_gens: Dict[str, Tuple[MobiusMatrix, ...]] = {}
        for v in comp_vertices:
            h = conjugators[v]
            hinv = h.inverse()
            vertex_gens[v] = tuple(h @ g @ hinv for g in pants[v].gamma)

        # eliminations toward a free basis
        removed = {v: set() for v in comp_vertices}

        def eliminate(vertex: str, slot: int) -> bool:
            if slot in (0, 1):
                if slot in removed[vertex]:
                    return False
                removed[vertex].add(slot)
                return True
            # slot 2 is the dependent generator; drop gamma_1, else gamma_0
            for alt in (1, 0):
                if alt not in removed[vertex]:
                    removed[vertex].add(alt)
                    return True
            return False

        is_free = True
        for d, (q, i, qp, j) in sorted(tree_edges.items()):
            if not eliminate(qp, j):
                is_free = False

        stable_letters: Dict[str, MobiusMatrix] = {}
        for d, q, _eid, i, qp, j in glued:
            if d in tree_edges:
                continue
            if seen.get(q) != comp_index:
                continue
            g = gluing_isometry(pants[q], i, pants[qp], j, label.tau.get(d, 0.0))
            stable_letters[d] = conjugators[q] @ g @ conjugators[qp].inverse()
            if not (eliminate(qp, j) or eliminate(q, i)):
                is_free = False

        free_basis: List[Tuple[str, MobiusMatrix]] = []
        for v in comp_vertices:
            for slot in (0, 1):
                if slot not in removed[v]:
                    free_basis.append((_gen_name(len(free_basis)), vertex_gens[v][slot]))
        for d in sorted(stable_letters):
            free_basis.append((_gen_name(len(free_basis)), stable_letters[d]))

        core_points = []
        base = complex(0.5, 0.8)  # interior point of the anchored hexagon region
        for v in comp_vertices:
            core_points.append(conjugators[v].apply(base))

        components.append(
            Component(
                vertices=comp_vertices,
                root=start,
                conjugators=conjugators,
                vertex_gens=vertex_gens,
                stable_letters=stable_letters,
                free_basis=free_basis,
                is_free=is_free,
                core_points=core_points,
            )
        )
    return AssembledSurface(graph, label, pants, components)


def pants_surface(l1: float, l2: float, l3: float) -> AssembledSurface:
    """Convenience: the one-vertex graph with three phantom edges."""
    edges = [
        OrientedEdge("e0", "q", 0),
        OrientedEdge("e1", "q", 1),
        OrientedEdge("e2", "q", 2),
    ]
    graph = AugmentedGraph(["q"], edges)
    label = FNLabel(
        {"e0": l1, "e1": l2, "e2": l3}, {"e0": 0.0, "e1": 0.0, "e2": 0.0}
    )
    return assemble(graph, label)


def punctured_torus_surface(ell: float, tau: float, boundary: float) -> AssembledSurface:
    """One vertex, a self-glued handle edge and one phantom boundary edge."""
    edges = [
        OrientedEdge("h+", "q", 0, pair="h-"),
        OrientedEdge("h-", "q", 1, pair="h+"),
        OrientedEdge("b", "q", 2),
    ]
    graph = AugmentedGraph(["q"], edges)
    label = FNLabel({"h+": ell, "b": boundary}, {"h+": tau, "b": 0.0})
    return assemble(graph, label)


# ---------------------------------------------------------------------------
# Length spectrum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumEntry:
    length: float
    multiplicity: int
    primitive: bool
    words: Tuple[str, ...]


@dataclass
class LengthSpectrum:
    entries: List[SpectrumEntry]
    r_max: float
    descriptor_hash: str

    def lengths(self, primitive_only: bool = False) -> List[float]:
        return [
            e.length for e in self.entries if e.primitive or not primitive_only
        ]

    def counting_function(self, r: float) -> int:
        """Number of primitive unoriented classes of length at most r."""
        return sum(e.multiplicity for e in self.entries if e.primitive and e.length <= r)


def _cyclically_reduced(word: Tuple[int, ...]) -> bool:
    return not word or word[0] != -word[-1]


def _canonical_key(word: Tuple[int, ...]) -> Tuple[int, ...]:
    """Lexicographically minimal rotation of the word and of its inverse."""
    n = len(word)
    inv = tuple(-s for s in reversed(word))
    best = None
    for w in (word, inv):
        for k in range(n):
            rot = w[k:] + w[:k]
            if best is None or rot < best:
                best = rot
    return best


def _word_period_primitive(word: Tuple[int, ...]) -> bool:
    n = len(word)
    for d in range(1, n):
        if n % d == 0 and word == word[d:] + word[:d]:
            return False
    return True


def _render_word(word: Tuple[int, ...], names: List[str]) -> str:
    out = []
    for s in word:
        name = names[abs(s) - 1]
        out.append(name if s > 0 else name.upper())
    return "".join(out)


def component_length_spectrum(
    comp: Component,
    r_max: float,
    dedup_tol: float = 1e-9,
    max_frontier: int = 2_000_000,
    prune_slack: float = 4.0,
    word_length_cap: int = 400,
    descriptor_hash: str = "",
) -> LengthSpectrum:
    """Closed-geodesic lengths of one component by free-group BFS.

    Deduplication is exact: conjugacy classes of a free group are canonical
    cyclic words, unoriented classes identify a word with its inverse, and
    primitivity is the word-period test.
    """
    if not comp.is_free:
        raise DomainError(
            "length spectrum requires a free fundamental group "
            "(the component is a closed surface)"
        )
    basis = comp.basis_matrices()
    names = [name for name, _ in comp.free_basis]
    if not basis:
        return LengthSpectrum([], r_max, descriptor_hash)
    z0 = comp.core_points[0]
    u0, v0 = z0.real, z0.imag
    core_diam = 0.0
    for p in comp.core_points:
        core_diam = max(core_diam, halfplane_distance(u0, v0, p.real, p.imag))
    prune_radius = r_max + 2.0 * core_diam + prune_slack

    def displacement(m: MobiusMatrix) -> float:
        w = m.apply(z0)
        return halfplane_distance(u0, v0, w.real, w.imag)

    mats = {}
    for idx, m in enumerate(basis, start=1):
        mats[idx] = m
        mats[-idx] = m.inverse()

    classes: Dict[Tuple[int, ...], float] = {}
    frontier: List[Tuple[Tuple[int, ...], MobiusMatrix]] = [((), MobiusMatrix.identity())]
    processed = 0
    for _depth in range(word_length_cap):
        nxt: List[Tuple[Tuple[int, ...], MobiusMatrix]] = []
        for word, mat in frontier:
            last = word[-1] if word else 0
            for s in sorted(mats):
                if s == -last:
                    continue
                new_word = word + (s,)
                new_mat = mat @ mats[s]
                processed += 1
                if processed > max_frontier:
                    raise BudgetExceededError(
                        "word frontier outgrew the configured budget",
                        certified_r=max(0.0, r_max - prune_slack),
                    )
                if displacement(new_mat) > prune_radius:
                    continue
                nxt.append((new_word, new_mat))
                if not _cyclically_reduced(new_word):
                    continue
                if new_mat.classify() != "hyperbolic":
                    continue
                length = translation_length(new_mat)
                if length > r_max + dedup_tol:
                    continue
                key = _canonical_key(new_word)
                if key not in classes:
                    classes[key] = length
        if not nxt:
            break
        frontier = nxt

    records = sorted(
        (length, _word_period_primitive(key), key) for key, length in classes.items()
    )
    entries: List[SpectrumEntry] = []
    groups: List[Tuple[float, bool, List[Tuple[int, ...]]]] = []
    for length, primitive, key in records:
        placed = False
        for g in groups:
            if abs(g[0] - length) <= dedup_tol and g[1] == primitive:
                g[2].append(key)
                placed = True
                break
        if not placed:
            groups.append((length, primitive, [key]))
    groups.sort(key=lambda g: (g[0], not g[1]))
    for length, primitive, keys in groups:
        words = tuple(_render_word(k, names) for k in sorted(keys))
        entries.append(SpectrumEntry(length, len(keys), primitive, words))
    return LengthSpectrum(entries, r_max, descriptor_hash)


def length_spectrum(
    surface: AssembledSurface,
    r_max: float,
    dedup_tol: float = 1e-9,
    max_frontier: int = 2_000_000,
    prune_slack: float = 4.0,
    word_length_cap: int = 400,
) -> LengthSpectrum:
    """Merged spectrum over all components of an assembled surface."""
    if r_max <= 0:
        raise DomainError("r_max must be positive")
    all_entries: List[SpectrumEntry] = []
    h = surface.descriptor_hash()
    for comp in surface.components:
        spec = component_length_spectrum(
            comp,
            r_max,
            dedup_tol=dedup_tol,
            max_frontier=max_frontier,
            prune_slack=prune_slack,
            word_length_cap=word_length_cap,
            descriptor_hash=h,
        )
        all_entries.extend(spec.entries)
    all_entries.sort(key=lambda e: (e.length, not e.primitive))
    return LengthSpectrum(all_entries, r_max, h)


def spectrum_rows(spectrum: LengthSpectrum) -> List[Tuple[float, int, bool, str]]:
    """Rows for the spectrum CSV: length, multiplicity, primitive, word."""
    return [
        (e.length, e.multiplicity, e.primitive, e.words[0] if e.words else "")
        for e in spectrum.entries
    ]
