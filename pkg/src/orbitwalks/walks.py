"""Walk models on a graph family: transition relations with orbit coefficients.

A walk is stored as a virtual relation — one coefficient in Q(n) per stable
orbit of vertex pairs — so a single object describes the transition matrix of
every member of the family at once.  Stationary distributions, reversibility
and flow ratios are computed symbolically on the vertex-orbit quotient and
spot-validated exactly on full graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DisconnectedFamily, InvalidHold, NotReversible, SpecError
from .exactnum import RF_ONE, RF_ZERO, Poly, RationalFunc, fit_rational_auto, solve_linear, RatMatrix
from .fispec import FiGraphSpec, StableOrbitId, instantiate, vertex_orbit_size

_GRAPH_CACHE: dict = {}


def cached_graph(spec: FiGraphSpec, n: int, with_adjacency: bool = True):
    key = (id(spec), n, with_adjacency)
    g = _GRAPH_CACHE.get(key)
    if g is None:
        g = instantiate(spec, n, with_adjacency=with_adjacency)
        _GRAPH_CACHE[key] = g
    return g


@dataclass
class VirtualRelation:
    """Formal combination of orbit indicator matrices with Q(n) coefficients."""

    spec: FiGraphSpec
    coeffs: dict[StableOrbitId, RationalFunc]
    name: str = "relation"

    def coefficient(self, oid: StableOrbitId) -> RationalFunc:
        return self.coeffs.get(oid, RF_ZERO)

    def specialize_dense(self, graph, n: int):
        """Full matrix at size n as float64 (adjacency-supported orbits plus diagonal)."""
        import numpy as np

        mat = np.zeros((graph.total, graph.total))
        per_orbit = [float(self.coefficient(o)(n)) for o in graph.orbit_table]
        for u in range(graph.total):
            lo, hi = int(graph.indptr[u]), int(graph.indptr[u + 1])
            for p in range(lo, hi):
                mat[u, int(graph.indices[p])] = per_orbit[int(graph.edge_orbit_ids[p])]
        for orb in self.spec.vertex_orbits:
            diag = self.coefficient(self.spec.diagonal_orbit(orb.name))
            if not diag.is_zero():
                base = graph.offsets[orb.name]
                val = float(diag(n))
                for i in range(len(graph.vertices[orb.name])):
                    mat[base + i, base + i] = val
        return mat


@dataclass
class TransitionRelation:
    """A virtual relation whose specializations are stochastic matrices."""

    relation: VirtualRelation
    kind: str

    @property
    def spec(self) -> FiGraphSpec:
        return self.relation.spec

    def coefficient(self, oid: StableOrbitId) -> RationalFunc:
        return self.relation.coefficient(oid)

    def diagonal_coefficient(self, orbit_name: str) -> RationalFunc:
        return self.relation.coefficient(self.spec.diagonal_orbit(orbit_name))


@dataclass
class StationaryDist:
    """Per-vertex stationary mass on each vertex orbit, as functions of n."""

    spec: FiGraphSpec
    per_vertex: dict[str, RationalFunc]
    orbit_mass: dict[str, RationalFunc]
    validated_at: list[int] = field(default_factory=list)

    def vertex_value(self, orbit_name: str, n: int) -> Fraction:
        return self.per_vertex[orbit_name](n)


@dataclass
class RhoProfile:
    """Minimum probability-flow ratio against the weighted walk."""

    values: list[tuple[int, Fraction]]
    fitted: RationalFunc
    witness: tuple[str, str, StableOrbitId]


def _orbit_branch_tables(spec: FiGraphSpec):
    """Neighbor branches of each vertex orbit's canonical representative."""
    out = {}
    for orb in spec.vertex_orbits:
        rep = spec.canonical_rep(orb.name)
        out[orb.name] = spec.neighbor_branches(orb.name, rep, orb.arity)
    return out


def edge_orbit_info(spec: FiGraphSpec) -> dict[StableOrbitId, tuple[str, str]]:
    """Fine edge orbits (oriented), mapped to (left vertex orbit, edge class)."""
    info: dict[StableOrbitId, tuple[str, str]] = {}
    for orb_name, branches in _orbit_branch_tables(spec).items():
        for br in branches:
            prev = info.get(br.edge_orbit)
            if prev is not None and prev[1] != br.cls:
                raise SpecError(
                    f"{spec.name}: pair orbit {br.edge_orbit} belongs to classes "
                    f"{prev[1]} and {br.cls}; duplicate edges are not allowed"
                )
            info[br.edge_orbit] = (orb_name, br.cls)
    return info


def degree_poly(spec: FiGraphSpec, orbit_name: str) -> Poly:
    """Degree of a vertex in the orbit as a polynomial in n (loops count twice)."""
    rep = spec.canonical_rep(orbit_name)
    k = spec.orbit(orbit_name).arity
    total = Poly()
    diag = spec.diagonal_orbit(orbit_name)
    for br in spec.neighbor_branches(orbit_name, rep, k):
        c = br.count_poly(spec, k)
        if br.edge_orbit == diag:
            c = c * 2
        total = total + c
    return total


def class_count_poly(spec: FiGraphSpec, orbit_name: str, class_name: str) -> Poly:
    """Number of edges of the given class at a vertex of the orbit."""
    rep = spec.canonical_rep(orbit_name)
    k = spec.orbit(orbit_name).arity
    total = Poly()
    for br in spec.neighbor_branches(orbit_name, rep, k):
        if br.cls == class_name:
            total = total + br.count_poly(spec, k)
    return total


def check_connected(spec: FiGraphSpec, samples: int = 2) -> None:
    for n in range(spec.n0, spec.n0 + samples):
        if not cached_graph(spec, n).is_connected():
            raise DisconnectedFamily(f"{spec.name} is disconnected at n={n}")


def simple_walk(spec: FiGraphSpec, check: bool = True) -> TransitionRelation:
    """Uniform step to a neighbor: P(u, v) = 1/deg(u)."""
    if check:
        check_connected(spec)
    coeffs: dict[StableOrbitId, RationalFunc] = {}
    for orb_name, branches in _orbit_branch_tables(spec).items():
        mu = RationalFunc(degree_poly(spec, orb_name))
        diag = spec.diagonal_orbit(orb_name)
        for br in branches:
            weight = RF_ONE * 2 if br.edge_orbit == diag else RF_ONE
            coeffs[br.edge_orbit] = weight / mu
    rel = VirtualRelation(spec, coeffs, name="simple")
    return TransitionRelation(rel, "simple")


def lazy_walk(spec: FiGraphSpec, hold, check: bool = True) -> TransitionRelation:
    """Hold with probability `hold`, otherwise take a simple-walk step."""
    if isinstance(hold, (int, Fraction)):
        hold = RationalFunc.const(hold)
    for n in range(spec.n0, spec.n0 + 5):
        v = hold(n)
        if not (0 <= v < 1):
            raise InvalidHold(f"hold({n}) = {v} is outside [0, 1)")
    base = simple_walk(spec, check=check)
    stay = RF_ONE - hold
    coeffs = {oid: stay * c for oid, c in base.relation.coeffs.items()}
    if not hold.is_zero():
        for orb in spec.vertex_orbits:
            diag = spec.diagonal_orbit(orb.name)
            coeffs[diag] = coeffs.get(diag, RF_ZERO) + hold
    rel = VirtualRelation(spec, coeffs, name=f"lazy:{hold}")
    return TransitionRelation(rel, f"lazy({hold})")


def weighted_walk(spec: FiGraphSpec, check: bool = True) -> TransitionRelation:
    """Pick an incident edge class uniformly, then an edge uniformly inside it."""
    if check:
        check_connected(spec)
    coeffs: dict[StableOrbitId, RationalFunc] = {}
    for orb_name, branches in _orbit_branch_tables(spec).items():
        classes = sorted({br.cls for br in branches})
        k_classes = len(classes)
        counts = {c: RationalFunc(class_count_poly(spec, orb_name, c)) for c in classes}
        for br in branches:
            coeffs[br.edge_orbit] = RationalFunc.const(Fraction(1, k_classes)) / counts[br.cls]
    rel = VirtualRelation(spec, coeffs, name="weighted")
    return TransitionRelation(rel, "weighted")


def custom_walk(spec: FiGraphSpec, table: dict[StableOrbitId, RationalFunc], name: str = "custom") -> TransitionRelation:
    """Wrap a user-provided coefficient table; invariants are checked, not assumed."""
    rel = VirtualRelation(spec, dict(table), name=name)
    walk = TransitionRelation(rel, name)
    validate_transition(walk)
    return walk


def validate_transition(walk: TransitionRelation, samples: int = 3) -> None:
    """Exact row-sum and coefficient-range checks at sampled sizes."""
    spec = walk.spec
    for n in range(spec.n0, spec.n0 + samples):
        for orb in spec.vertex_orbits:
            rep = spec.canonical_rep(orb.name)
            total = walk.diagonal_coefficient(orb.name)(n)
            if not (0 <= total <= 1):
                raise SpecError(f"diagonal coefficient out of [0,1] at n={n}")
            for br in spec.neighbor_branches(orb.name, rep, orb.arity):
                c = walk.coefficient(br.edge_orbit)(n)
                if not (0 <= c <= 1):
                    raise SpecError(
                        f"coefficient of {br.edge_orbit} out of [0,1] at n={n}"
                    )
                total += c * br.count_poly(spec, orb.arity)(n)
            if total != 1:
                raise SpecError(
                    f"row sum over orbit {orb.name} is {total} != 1 at n={n}"
                )


def stationary(spec: FiGraphSpec, walk: TransitionRelation, validate_samples: int = 3) -> StationaryDist:
    """Stationary distribution via the vertex-orbit quotient chain.

    The quotient transition matrix is assembled symbolically, its stationary
    row vector solved over Q(n), and the result validated exactly against
    pi P = pi on representatives of the full graph at sampled sizes.
    """
    names = [o.name for o in spec.vertex_orbits]
    k = len(names)
    tables = _orbit_branch_tables(spec)
    quot = [[RF_ZERO] * k for _ in range(k)]
    for i, uname in enumerate(names):
        quot[i][i] = quot[i][i] + walk.diagonal_coefficient(uname)
        arity = spec.orbit(uname).arity
        for br in tables[uname]:
            j = names.index(br.w_orbit)
            contrib = walk.coefficient(br.edge_orbit) * RationalFunc(br.count_poly(spec, arity))
            quot[i][j] = quot[i][j] + contrib
    # pi (Q - I) = 0 with sum(pi) = 1: transpose, replace last equation by the sum
    rows = []
    rhs = []
    for j in range(k - 1):
        rows.append([quot[i][j] - (RF_ONE if i == j else RF_ZERO) for i in range(k)])
        rhs.append(RF_ZERO)
    rows.append([RF_ONE] * k)
    rhs.append(RF_ONE)
    masses = solve_linear(RatMatrix(rows), rhs)
    per_vertex = {}
    orbit_mass = {}
    for i, name in enumerate(names):
        orbit_mass[name] = masses[i]
        per_vertex[name] = masses[i] / RationalFunc(vertex_orbit_size(spec, name))
    dist = StationaryDist(spec, per_vertex, orbit_mass)
    for n in range(spec.n0, spec.n0 + validate_samples):
        _check_stationary_at(spec, walk, dist, n)
        dist.validated_at.append(n)
    return dist


def _check_stationary_at(spec: FiGraphSpec, walk: TransitionRelation, dist: StationaryDist, n: int) -> None:
    for orb in spec.vertex_orbits:
        rep = spec.canonical_rep(orb.name)
        acc = dist.per_vertex[orb.name](n) * walk.diagonal_coefficient(orb.name)(n)
        for br in spec.neighbor_branches(orb.name, rep, orb.arity):
            back = spec.reverse_orbit(br.edge_orbit)
            acc += (
                br.count_poly(spec, orb.arity)(n)
                * dist.per_vertex[br.w_orbit](n)
                * walk.coefficient(back)(n)
            )
        if acc != dist.per_vertex[orb.name](n):
            raise SpecError(
                f"stationary validation failed on orbit {orb.name} at n={n}: "
                f"(pi P) = {acc} != pi = {dist.per_vertex[orb.name](n)}"
            )


def check_reversible(
    spec: FiGraphSpec, walk: TransitionRelation, dist: StationaryDist | None = None
) -> tuple[bool, StableOrbitId | None]:
    """Detailed balance pi(x) P(x,y) = pi(y) P(y,x), checked symbolically.

    Symbolic equality of the two flows per stable edge orbit implies the exact
    per-n checks at every admissible size.  Returns (ok, violating orbit).
    """
    if dist is None:
        dist = stationary(spec, walk)
    for oid, (left, _cls) in sorted(edge_orbit_info(spec).items()):
        rev = spec.reverse_orbit(oid)
        flow = dist.per_vertex[left] * walk.coefficient(oid)
        back = dist.per_vertex[oid.right] * walk.coefficient(rev)
        if flow != back:
            return False, oid
    return True, None


def flow_ratios(
    spec: FiGraphSpec, walk: TransitionRelation, dist: StationaryDist | None = None
) -> dict[StableOrbitId, RationalFunc]:
    """Per edge orbit: probability flow of the walk over that of the weighted walk."""
    if dist is None:
        dist = stationary(spec, walk)
    wwalk = weighted_walk(spec, check=False)
    wdist = stationary(spec, wwalk)
    ratios = {}
    for oid, (left, _cls) in edge_orbit_info(spec).items():
        flow = dist.per_vertex[left] * walk.coefficient(oid)
        wflow = wdist.per_vertex[left] * wwalk.coefficient(oid)
        ratios[oid] = flow / wflow
    return ratios


def rho(spec: FiGraphSpec, walk: TransitionRelation, n_range: tuple[int, int]) -> RhoProfile:
    """Smallest flow ratio against the weighted walk, per n and fitted in n.

    Requires reversibility: an irreversible walk is outside the scope of the
    flow-comparison bound.
    """
    dist = stationary(spec, walk)
    ok, witness_orbit = check_reversible(spec, walk, dist)
    if not ok:
        raise NotReversible(f"detailed balance fails on orbit {witness_orbit}")
    ratios = flow_ratios(spec, walk, dist)
    info = edge_orbit_info(spec)
    lo, hi = n_range
    lo = max(lo, spec.n0)
    values: list[tuple[int, Fraction]] = []
    best_orbit = None
    for n in range(lo, hi + 1):
        best = None
        for oid in sorted(ratios):
            v = ratios[oid](n)
            if best is None or v < best:
                best = v
                if n == hi:
                    best_orbit = oid
        values.append((n, best))
    if len(values) < 7:
        raise ValueError("rho needs at least 7 sizes to fit and validate")
    cap = min(8, (len(values) - 5) // 2)
    fitted = fit_rational_auto(values, cap, cap)
    left, cls = info[best_orbit]
    return RhoProfile(values=values, fitted=fitted, witness=(left, cls, best_orbit))


def walk_from_selector(spec: FiGraphSpec, selector: str) -> TransitionRelation:
    """Parse a walk selector: simple | lazy:<p> | weighted | custom:<json file>."""
    sel = selector.strip().lower()
    if sel == "simple":
        return simple_walk(spec)
    if sel == "weighted":
        return weighted_walk(spec)
    if sel.startswith("lazy:"):
        p = Fraction(sel.split(":", 1)[1])
        return lazy_walk(spec, p)
    if sel.startswith("custom:"):
        import json

        path = selector.split(":", 1)[1]
        with open(path) as fh:
            doc = json.load(fh)
        table = {
            StableOrbitId.from_key(key): RationalFunc(
                Poly([Fraction(c) for c in entry["num"]]),
                Poly([Fraction(c) for c in entry["den"]]),
            )
            for key, entry in doc["coefficients"].items()
        }
        return custom_walk(spec, table)
    raise SpecError(f"unknown walk selector {selector!r}")
