"""The deterministic directed graph on principal submatrices.

Vertices are index subsets J of {0, ..., n-1} (0-based; the empty tuple is the
empty matrix). Each non-terminal J splits its columns by the rule
``sum_{i in J} V_{ij}^2 <= L^2`` into sparse columns J' and dense columns J''.
Every dense column j contributes an edge labeled j to ``J minus (U_j + {j})``,
where U_j is the thresholded support of column j inside J; a non-empty J'
contributes one unlabeled edge to J'. Vertices with no dense columns are
terminals. The edge structure depends only on the profile, never on W.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .profile import VarianceProfile, stats, threshold

DEFAULT_VERTEX_CAP = 100_000
DEFAULT_STRUCTURE_CAP = 1_000_000


def canon(J) -> tuple:
    return tuple(sorted(int(x) for x in J))


@dataclass(frozen=True)
class GraphParams:
    n: int
    delta: float
    L: float
    beta: float
    z: complex | None = None
    kappa: float | None = None
    raw: bool = False
    exact_L2: float | None = None  # kept verbatim for raw overrides so sqrt never perturbs it

    @classmethod
    def from_shift(cls, n: int, z: complex, kappa: float) -> GraphParams:
        """delta = |z|/n, L = n^(-kappa)|z|, beta = n^(-3)."""
        if not 0 < kappa <= 1:
            raise ValueError("kappa must lie in (0, 1]")
        if z == 0:
            raise ValueError("the shift z must be non-zero")
        zabs = abs(z)
        return cls(n=n, delta=zabs / n, L=n ** (-kappa) * zabs, beta=float(n) ** -3, z=complex(z),
                   kappa=float(kappa))

    @classmethod
    def raw_override(cls, n: int, L2: float, delta: float = 0.0, beta: float | None = None) -> GraphParams:
        """Fix L^2 and delta directly, bypassing z (used to reproduce small hand examples)."""
        if L2 < 0 or delta < 0:
            raise ValueError("L2 and delta must be nonnegative")
        return cls(n=n, delta=float(delta), L=math.sqrt(L2), beta=float(n) ** -3 if beta is None else beta,
                   raw=True, exact_L2=float(L2))

    @property
    def L2(self) -> float:
        return self.exact_L2 if self.exact_L2 is not None else self.L * self.L

    def to_dict(self) -> dict:
        return {
            "n": self.n, "delta": self.delta, "L": self.L, "L2": self.L2, "beta": self.beta,
            "z": None if self.z is None else [self.z.real, self.z.imag],
            "kappa": self.kappa, "raw": self.raw,
        }


@dataclass(frozen=True)
class Edge:
    src: tuple
    dst: tuple
    label: int | None  # column index for labeled edges, None for the unlabeled edge


@dataclass(frozen=True)
class Split:
    sparse: tuple  # J'
    dense: tuple  # J''
    supports: dict  # j -> U_j for j in J''


@dataclass
class SubmatrixGraph:
    profile: VarianceProfile
    params: GraphParams
    vertices: list
    edges: list
    splits: dict
    vertex_cap: int
    truncated: bool = False
    _out: dict = field(default_factory=dict, repr=False)
    _in_deg: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._out = {v: [] for v in self.vertices}
        self._in_deg = {v: 0 for v in self.vertices}
        for e in self.edges:
            self._out[e.src].append(e)
            self._in_deg[e.dst] += 1

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def source(self) -> tuple:
        return tuple(range(self.n))

    def __contains__(self, J) -> bool:
        return canon(J) in self._out

    def out_edges(self, J) -> list:
        return list(self._out[canon(J)])

    def in_degree(self, J) -> int:
        return self._in_deg[canon(J)]

    def is_terminal(self, J) -> bool:
        J = canon(J)
        if J not in self._out:
            raise KeyError(f"{J} is not a vertex")
        # an unexpanded vertex of a truncated graph is not known to be terminal
        return J in self.splits and not self.splits[J].dense

    @property
    def terminals(self) -> list:
        return [v for v in self.vertices if v in self.splits and not self.splits[v].dense]

    @property
    def empty_terminal(self) -> bool:
        return () in self._out

    @property
    def non_empty_terminals(self) -> list:
        return [v for v in self.terminals if v]

    def path_length_bound(self) -> int:
        """ceil(2 n sigma*^2 / L^2)."""
        s = stats(self.profile).sigma_star
        if self.params.L2 == 0:
            return math.inf
        return math.ceil(2 * self.n * s * s / self.params.L2)

    def longest_path(self) -> int:
        longest = {}
        for v in sorted(self.vertices, key=len):
            longest[v] = max((1 + longest[e.dst] for e in self._out[v]), default=0)
        return longest[self.source]

    def paths(self, start=None):
        """Yield every directed path (tuple of vertices) from ``start`` to a terminal."""
        start = self.source if start is None else canon(start)
        stack = [(start,)]
        while stack:
            path = stack.pop()
            outs = self._out[path[-1]]
            if not outs:
                yield path
                continue
            for e in reversed(outs):
                stack.append(path + (e.dst,))

    def path_counts(self) -> dict:
        """Map length d -> number of source-to-terminal paths of length d."""
        counts = {}
        for v in sorted(self.vertices, key=len):
            outs = self._out[v]
            if not outs:
                counts[v] = {0: 1}
                continue
            acc = {}
            for e in outs:
                for d, c in counts[e.dst].items():
                    acc[d + 1] = acc.get(d + 1, 0) + c
            counts[v] = acc
        return dict(sorted(counts[self.source].items()))

    # --- export -----------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "indexBase": 0,
            "n": self.n,
            "params": self.params.to_dict(),
            "truncated": self.truncated,
            "vertices": [list(v) for v in self.vertices],
            "edges": [{"from": list(e.src), "to": list(e.dst), "label": e.label} for e in self.edges],
            "terminals": {
                "empty": self.empty_terminal,
                "nonEmpty": [list(v) for v in self.non_empty_terminals],
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def to_dot(self) -> str:
        """Graphviz source; vertex and edge labels are 1-based to match the usual matrix notation."""
        ids = {v: f"v{k}" for k, v in enumerate(self.vertices)}

        def name(v):
            return "{" + ",".join(str(i + 1) for i in v) + "}" if v else "∅"

        lines = ["digraph G {", "  rankdir=TB;", '  node [fontname="Helvetica"];']
        for v in self.vertices:
            shape = "box" if self.is_terminal(v) else "ellipse"
            extra = ", style=bold" if v == self.source else ""
            lines.append(f'  {ids[v]} [label="{name(v)}", shape={shape}{extra}];')
        for e in self.edges:
            label = str(e.label + 1) if e.label is not None else "ε"
            lines.append(f'  {ids[e.src]} -> {ids[e.dst]} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def split_vertex(sq: np.ndarray, vtilde: np.ndarray, J: tuple, L2: float) -> Split:
    """Sparse/dense column split of V_J and the thresholded supports U_j."""
    idx = np.asarray(J, dtype=int)
    colsq = sq[np.ix_(idx, idx)].sum(axis=0)
    sparse = tuple(int(j) for j, c in zip(idx, colsq) if c <= L2)
    dense = tuple(int(j) for j, c in zip(idx, colsq) if c > L2)
    supports = {j: tuple(int(i) for i in idx[vtilde[idx, j] != 0]) for j in dense}
    return Split(sparse, dense, supports)


def build_graph(profile: VarianceProfile, params: GraphParams, cap: int = DEFAULT_VERTEX_CAP) -> SubmatrixGraph:
    """Breadth-first construction from the source [n], deduplicating vertices by subset."""
    n = profile.n
    if params.n != n:
        raise ValueError(f"params are for n={params.n}, profile has n={n}")
    if not params.raw:
        s = stats(profile).sigma_star
        if s > abs(params.z):
            raise ValueError(f"construction assumes sigma* <= |z|; got sigma*={s:g} > |z|={abs(params.z):g}")
    sq = profile.entries ** 2
    vtilde = threshold(profile, params.delta).entries
    L2 = params.L2

    source = tuple(range(n))
    vertices = [source]
    seen = {source}
    edges = []
    splits = {}
    queue = deque([source])
    truncated = False

    def add(v) -> bool:
        nonlocal truncated
        if v in seen:
            return True
        if len(vertices) >= cap:
            truncated = True
            return False
        seen.add(v)
        vertices.append(v)
        queue.append(v)
        return True

    while queue:
        J = queue.popleft()
        if not J:
            splits[J] = Split((), (), {})
            continue
        sp = split_vertex(sq, vtilde, J, L2)
        splits[J] = sp
        if not sp.dense:
            continue
        Jset = set(J)
        for j in sp.dense:
            target = tuple(sorted(Jset - set(sp.supports[j]) - {j}))
            if add(target):
                edges.append(Edge(J, target, j))
        if sp.sparse:
            if add(sp.sparse):
                edges.append(Edge(J, sp.sparse, None))

    for e in edges:
        if not (set(e.dst) < set(e.src)):
            raise AssertionError(f"edge {e} does not go to a proper subset")
    return SubmatrixGraph(profile, params, vertices, edges, splits, cap, truncated)


def validate(graph: SubmatrixGraph) -> dict:
    """Check the structural invariants; returns name -> bool."""
    V2 = graph.profile.entries ** 2
    L2 = graph.params.L2
    source = graph.source
    checks = {
        "proper_subsets": all(set(e.dst) < set(e.src) for e in graph.edges),
        "source_in_degree_zero": graph.in_degree(source) == 0,
        "others_have_in_edges": all(graph.in_degree(v) >= 1 for v in graph.vertices if v != source),
        "terminal_column_rule": all(
            np.all(V2[np.ix_(v, v)].sum(axis=0) <= L2) for v in graph.non_empty_terminals
        ),
        "not_truncated": not graph.truncated,
    }
    if not graph.truncated:
        checks["path_length_bound"] = graph.longest_path() <= graph.path_length_bound()
    s = stats(graph.profile).sigma_star
    if s > 0:
        bound = L2 / (2 * s * s)
        checks["support_size_bound"] = all(
            len(U) > bound for sp in graph.splits.values() for U in sp.supports.values()
        )
    return checks


# --- dyadic ladder ----------------------------------------------------------


@dataclass(frozen=True)
class DyadicLadder:
    n: int
    beta: float
    p0: int
    p0_tilde: int
    p0_exact: bool  # False when no p in {0..n} met the defining inequality and the value was clamped
    p0_tilde_exact: bool

    def t(self, p: int) -> float:
        """t_p = 2^(-p), t_{-1} = +inf."""
        if p < -1:
            raise ValueError("ladder index must be >= -1")
        return math.inf if p == -1 else math.ldexp(1.0, -p)

    def largest_index_at_least(self, value: float) -> int:
        """Largest r in {-1..n} with t_r >= value (always >= -1 since t_{-1} = inf)."""
        if value == math.inf:
            return -1
        if value <= 0:
            return self.n
        # 2^-r >= value  <=>  r <= -log2(value)
        r = math.floor(-math.log2(value))
        while r >= 0 and math.ldexp(1.0, -r) < value:
            r -= 1
        while r + 1 <= self.n and math.ldexp(1.0, -(r + 1)) >= value:
            r += 1
        return max(-1, min(self.n, r))


def dyadic_ladder(n: int, params: GraphParams | float) -> DyadicLadder:
    """p0: largest p in {0..n} with 2^-p >= beta n^2; p0~: smallest p with 2^-p <= beta/(32 n^3)."""
    if n < 2:
        raise ValueError("the ladder needs n >= 2")
    beta = params.beta if isinstance(params, GraphParams) else float(params)
    b = Fraction(beta)
    upper = b * n * n
    lower = b / (32 * n ** 3)
    p0_candidates = [p for p in range(n + 1) if Fraction(1, 2 ** p) >= upper]
    p0 = max(p0_candidates) if p0_candidates else 0
    tilde_candidates = [p for p in range(n + 1) if Fraction(1, 2 ** p) <= lower]
    p0_tilde = min(tilde_candidates) if tilde_candidates else n
    return DyadicLadder(n, beta, p0, p0_tilde, bool(p0_candidates), bool(tilde_candidates))


# --- data structures ----------------------------------------------------------


@dataclass(frozen=True)
class DataStructure:
    path: tuple
    r_sequence: tuple

    @property
    def length(self) -> int:
        return len(self.path) - 1


@dataclass
class StructureEnumeration:
    count: int
    path_counts: dict
    bound: int
    structures: list | None  # None in count-only mode

    @property
    def materialized(self) -> bool:
        return self.structures is not None


def structure_count_bound(graph: SubmatrixGraph) -> int:
    n = graph.n
    return (n * (n + 2)) ** graph.path_length_bound()


def enumerate_structures(graph: SubmatrixGraph, r0: int, cap: int = DEFAULT_STRUCTURE_CAP) -> StructureEnumeration:
    """All (path, r-sequence) pairs with r_0 fixed and r_1..r_d in {-1..n}."""
    if graph.truncated:
        raise ValueError("cannot enumerate structures on a truncated graph")
    n = graph.n
    if not -1 <= r0 <= n:
        raise ValueError("r0 must lie in {-1..n}")
    pc = graph.path_counts()
    total = sum(c * (n + 2) ** d for d, c in pc.items())
    bound = structure_count_bound(graph)
    if total > cap:
        return StructureEnumeration(total, pc, bound, None)
    rs = range(-1, n + 1)
    out = []
    for path in graph.paths():
        for tail in itertools.product(rs, repeat=len(path) - 1):
            out.append(DataStructure(path, (r0,) + tail))
    return StructureEnumeration(total, pc, bound, out)


# --- single-step witness ----------------------------------------------------


@dataclass
class WitnessResult:
    outcome: str  # "labeled", "terminal", "violation", "precondition_failed"
    vertex: tuple
    q: int
    smin_vertex: float
    edge: Edge | None = None
    r: int | None = None
    normalized_pairing: float | None = None
    pairing_threshold: float | None = None
    smin_target: float | None = None
    zero_denominator_labels: list = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.outcome in ("labeled", "terminal")


def normalized_pairing(sample, J: tuple, j: int) -> tuple[float, float]:
    """(|<n_{J,j}, col_j(A_J - z Id)>|, sqrt(sum_k |n_k|^2 V_{kj}^2)) for k in J."""
    M = sample.principal(J)
    pos = J.index(j)
    vcol = sample.profile.entries[np.asarray(J), j]
    if len(J) == 1:
        comps = np.ones(1)
    else:
        comps = linalg.normal_vector_of(M, pos, subset=J).components
    num = abs(linalg.bilinear(comps, M[:, pos]))
    den = float(np.sqrt(np.sum(np.abs(comps) ** 2 * vcol ** 2)))
    return num, den


def deconstruction_witness(sample, graph: SubmatrixGraph, J, q: int, ladder: DyadicLadder) -> WitnessResult:
    """Search the out-edges of a non-terminal J for one of the two single-step alternatives.

    (i) a labeled edge j and r in {-1..n} with s_min(target) <= t_r|z| and the
        normalized pairing at most t_{max(q - r - p0~, -1)};
    (ii) the unlabeled edge, leading to a non-empty terminal with
        s_min < t_{p0}|z|.
    """
    J = canon(J)
    if J not in graph:
        raise ValueError(f"{J} is not a vertex of the graph")
    if graph.is_terminal(J) or not graph.out_edges(J):
        raise ValueError(f"{J} is a terminal; the step applies to non-terminal vertices only")
    if not 0 <= q <= ladder.n:
        raise ValueError("q must lie in {0..n}")
    zabs = abs(sample.shift)
    s_J = linalg.smin(sample.principal(J))
    result = WitnessResult("violation", J, q, s_J)
    if s_J > ladder.t(q) * zabs:
        result.outcome = "precondition_failed"
        return result
    smin_cache = {}

    def target_smin(v):
        if v not in smin_cache:
            smin_cache[v] = linalg.smin(sample.principal(v)) if v else math.inf
        return smin_cache[v]

    for e in graph.out_edges(J):
        s_t = target_smin(e.dst)
        if e.label is None:
            if e.dst and graph.is_terminal(e.dst) and s_t < ladder.t(ladder.p0) * zabs:
                result.outcome, result.edge, result.smin_target = "terminal", e, s_t
                return result
            continue
        num, den = normalized_pairing(sample, J, e.label)
        if den == 0:
            result.zero_denominator_labels.append(e.label)
            continue
        ratio = num / den
        # the pairing threshold only grows with r, so the largest admissible r is the best choice
        r = ladder.largest_index_at_least(s_t / zabs) if math.isfinite(s_t) else -1
        thr = ladder.t(max(q - r - ladder.p0_tilde, -1))
        if ratio <= thr:
            result.outcome, result.edge, result.r = "labeled", e, r
            result.normalized_pairing, result.pairing_threshold, result.smin_target = ratio, thr, s_t
            return result
    return result
