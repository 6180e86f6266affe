"""Orbit-level specifications of symmetric graph families and their instantiation.

A family is described by vertex-orbit shapes (tuple arity plus a symmetry
subgroup of S_k) and edge classes (forced slot identifications between two
orbits).  At size n a vertex orbit consists of the injective k-tuples over the
label pool, identified under the subgroup; an edge class contributes all pairs
satisfying its identifications.  Pairs of vertices are classified into stable
orbits by a canonical relabeled word, which is the same for every n large
enough — this is what lets walk statistics collapse onto constantly many
states.
"""

from __future__ import annotations

import itertools
import json
from array import array
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import SpecError, TooSmallN, UnknownFamily
from .exactnum import Poly, fit_polynomial

Perm = tuple[int, ...]


def apply_perm(p: Perm, t: tuple) -> tuple:
    return tuple(t[p[i]] for i in range(len(p)))


def _compose(p: Perm, q: Perm) -> Perm:
    # apply(compose(p, q), t) == apply(p, apply(q, t))
    return tuple(q[p[i]] for i in range(len(p)))


def close_group(generators: tuple[Perm, ...], arity: int) -> tuple[Perm, ...]:
    """Closure of the generators under composition (identity always included)."""
    ident = tuple(range(arity))
    for g in generators:
        if sorted(g) != list(range(arity)):
            raise SpecError(f"{g} is not a permutation of range({arity})")
    els = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in generators:
            for h in frontier:
                c = _compose(g, h)
                if c not in els:
                    els.add(c)
                    nxt.append(c)
        frontier = nxt
    return tuple(sorted(els))


def symmetric_generators(k: int) -> tuple[Perm, ...]:
    if k < 2:
        return ()
    gens = [tuple([1, 0] + list(range(2, k)))]
    if k > 2:
        gens.append(tuple(list(range(1, k)) + [0]))
    return tuple(gens)


def cyclic_generators(k: int) -> tuple[Perm, ...]:
    if k < 2:
        return ()
    return (tuple(list(range(1, k)) + [0]),)


@dataclass(frozen=True)
class VertexOrbitSpec:
    """One vertex orbit: k-tuples over the label pool identified under H <= S_k."""

    name: str
    arity: int
    generators: tuple[Perm, ...] = ()

    @property
    def group(self) -> tuple[Perm, ...]:
        key = (self.arity, self.generators)
        grp = _GROUP_CACHE.get(key)
        if grp is None:
            grp = close_group(self.generators, self.arity)
            _GROUP_CACHE[key] = grp
        return grp

    def canonical(self, t: tuple) -> tuple:
        return min(apply_perm(h, t) for h in self.group)


_GROUP_CACHE: dict = {}


@dataclass(frozen=True)
class EdgeClass:
    """A declared class of edges between two vertex orbits.

    ``matches`` forces left slot i equal to right slot j.  With ``strict`` the
    unmatched symbols of the two endpoints are pairwise distinct (a single
    stable orbit of pairs); without it only tuple injectivity constrains them,
    so the class is a union of stable orbits (e.g. a clique on an orbit).
    """

    name: str
    left: str
    right: str
    matches: tuple[tuple[int, int], ...] = ()
    strict: bool = True

    def validate(self, orbits: dict[str, VertexOrbitSpec]) -> None:
        if self.left not in orbits or self.right not in orbits:
            raise SpecError(f"edge class {self.name} references unknown orbit")
        kl, kr = orbits[self.left].arity, orbits[self.right].arity
        ls = [i for i, _ in self.matches]
        rs = [j for _, j in self.matches]
        if len(set(ls)) != len(ls) or len(set(rs)) != len(rs):
            raise SpecError(f"edge class {self.name}: matches must be injective")
        if any(i < 0 or i >= kl for i in ls) or any(j < 0 or j >= kr for j in rs):
            raise SpecError(f"edge class {self.name}: match slot out of range")


@dataclass(frozen=True, order=True)
class StableOrbitId:
    """Canonical identifier of a stable orbit of ordered vertex pairs.

    ``word`` is the concatenated pair of tuples relabeled by first occurrence
    and minimized over both orbit symmetry groups; it is invariant under
    simultaneous relabeling of the underlying labels.
    """

    left: str
    right: str
    word: tuple[int, ...]

    @property
    def n_symbols(self) -> int:
        return max(self.word) + 1 if self.word else 0

    def key(self) -> str:
        return f"{self.left}|{self.right}|" + ".".join(map(str, self.word))

    def __str__(self) -> str:
        return self.key()

    @staticmethod
    def from_key(s: str) -> "StableOrbitId":
        left, right, word = s.split("|")
        w = tuple(int(x) for x in word.split(".")) if word else ()
        return StableOrbitId(left, right, w)


def _relabel(seq) -> tuple[int, ...]:
    seen: dict = {}
    out = []
    for s in seq:
        if s not in seen:
            seen[s] = len(seen)
        out.append(seen[s])
    return tuple(out)


@dataclass
class FiGraphSpec:
    """Blueprint of a graph family: vertex orbits plus edge classes."""

    name: str
    vertex_orbits: tuple[VertexOrbitSpec, ...]
    edge_classes: tuple[EdgeClass, ...]
    loops_allowed: bool = False
    label_offset: int = 0
    n0: int | None = None
    _classify_cache: dict = field(default_factory=dict, repr=False)
    _branch_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        names = [o.name for o in self.vertex_orbits]
        if len(set(names)) != len(names):
            raise SpecError("duplicate vertex orbit names")
        omap = self.orbit_map()
        for c in self.edge_classes:
            c.validate(omap)
        cnames = [c.name for c in self.edge_classes]
        if len(set(cnames)) != len(cnames):
            raise SpecError("duplicate edge class names")
        if self.n0 is None:
            self.n0 = self.default_n0()

    def orbit_map(self) -> dict[str, VertexOrbitSpec]:
        return {o.name: o for o in self.vertex_orbits}

    def orbit(self, name: str) -> VertexOrbitSpec:
        try:
            return self.orbit_map()[name]
        except KeyError:
            raise SpecError(f"unknown vertex orbit {name!r}") from None

    def pool(self, n: int) -> int:
        return n + self.label_offset

    def pool_poly(self) -> Poly:
        return Poly([self.label_offset, 1])

    def max_arity(self) -> int:
        return max((o.arity for o in self.vertex_orbits), default=0)

    def default_n0(self) -> int:
        """Safe stabilization onset: twice the largest symbol count in a pair pattern."""
        omap = self.orbit_map()
        worst = self.max_arity()
        for c in self.edge_classes:
            worst = max(worst, omap[c.left].arity + omap[c.right].arity)
        return max(2 * worst - self.label_offset, self.max_arity() - self.label_offset, 1)

    # -- pair classification ------------------------------------------------

    def classify_pair(self, left: str, u: tuple, right: str, v: tuple) -> StableOrbitId:
        """Stable orbit of the ordered pair (u, v); constant under relabeling."""
        key = (left, u, right, v)
        hit = self._classify_cache.get(key)
        if hit is not None:
            return hit
        gl = self.orbit(left).group
        gr = self.orbit(right).group
        best = None
        for hl in gl:
            uu = apply_perm(hl, u)
            for hr in gr:
                cand = _relabel(uu + apply_perm(hr, v))
                if best is None or cand < best:
                    best = cand
        oid = StableOrbitId(left, right, best)
        self._classify_cache[key] = oid
        return oid

    def realize_pair(self, oid: StableOrbitId) -> tuple[tuple, tuple]:
        """A concrete representative pair using labels 0..s-1."""
        kl = self.orbit(oid.left).arity
        u = tuple(oid.word[:kl])
        v = tuple(oid.word[kl:])
        return self.orbit(oid.left).canonical(u), self.orbit(oid.right).canonical(v)

    def reverse_orbit(self, oid: StableOrbitId) -> StableOrbitId:
        u, v = self.realize_pair(oid)
        return self.classify_pair(oid.right, v, oid.left, u)

    def diagonal_orbit(self, orbit_name: str) -> StableOrbitId:
        k = self.orbit(orbit_name).arity
        rep = tuple(range(k))
        return self.classify_pair(orbit_name, rep, orbit_name, rep)

    def canonical_rep(self, orbit_name: str) -> tuple:
        return tuple(range(self.orbit(orbit_name).arity))

    # -- neighbor pattern engine ---------------------------------------------

    def neighbor_branches(self, z_orbit: str, z: tuple, n_known: int):
        """Neighbor patterns of z relative to the known labels 0..n_known-1.

        z must use only known labels.  Returns a list of ``Branch`` records
        covering every neighbor of z in every edge class; the neighbors with a
        given pattern relative to the knowns form one record, whose count at
        size n is falling(pool - n_known, fresh) / stab.
        """
        ck = (z_orbit, z, n_known)
        hit = self._branch_cache.get(ck)
        if hit is not None:
            return hit
        assert all(0 <= s < n_known for s in z), "z must be over the known labels"
        out: list[Branch] = []
        seen: set = set()
        for cls in self.edge_classes:
            for flip in (False, True):
                if not flip and cls.left != z_orbit:
                    continue
                if flip and (cls.right != z_orbit or (cls.left == cls.right and _symmetric_matches(cls.matches))):
                    continue
                matches = cls.matches if not flip else tuple((j, i) for i, j in cls.matches)
                w_orbit = cls.right if not flip else cls.left
                self._enum_class_branches(cls, matches, z_orbit, z, w_orbit, n_known, seen, out)
        self._branch_cache[ck] = out
        return out

    def _enum_class_branches(self, cls, matches, z_orbit, z, w_orbit, n_known, seen, out):
        gl = self.orbit(z_orbit).group
        gr = self.orbit(w_orbit).group
        kr = self.orbit(w_orbit).arity
        z_syms = set(z)
        for hl in gl:
            uu = apply_perm(hl, z)
            w0: list = [None] * kr
            ok = True
            for i, j in matches:
                if w0[j] is not None and w0[j] != uu[i]:
                    ok = False
                    break
                w0[j] = uu[i]
            if not ok or len({x for x in w0 if x is not None}) != sum(x is not None for x in w0):
                continue
            free_slots = [j for j in range(kr) if w0[j] is None]
            if cls.strict:
                pool_known: list[int] = [s for s in range(n_known) if s not in z_syms]
            else:
                pool_known = list(range(n_known))
            self._fill_free(cls, w_orbit, gr, z_orbit, z, w0, free_slots, 0, pool_known, n_known, seen, out)

    def _fill_free(self, cls, w_orbit, gr, z_orbit, z, w0, free_slots, pos, pool_known, n_known, seen, out):
        if pos == len(free_slots):
            w = tuple(w0)
            canon, fresh, stab = _canonical_with_fresh(w, n_known, gr)
            key = (cls.name, w_orbit, canon)
            if key in seen:
                return
            seen.add(key)
            w_real = self.orbit(w_orbit).canonical(canon)
            if w_orbit == z_orbit and fresh == 0 and w_real == self.orbit(z_orbit).canonical(z):
                if not self.loops_allowed:
                    return
            out.append(
                Branch(
                    cls=cls.name,
                    w_orbit=w_orbit,
                    w=w_real,
                    fresh=fresh,
                    stab=stab,
                    edge_orbit=self.classify_pair(z_orbit, z, w_orbit, w_real),
                )
            )
            return
        j = free_slots[pos]
        used = {x for x in w0 if x is not None}
        for s in pool_known:
            if s in used:
                continue
            w0[j] = s
            self._fill_free(cls, w_orbit, gr, z_orbit, z, w0, free_slots, pos + 1, pool_known, n_known, seen, out)
        # one fresh formal; later free slots may add more
        w0[j] = n_known + sum(1 for x in w0 if x is not None and x >= n_known)
        self._fill_free(cls, w_orbit, gr, z_orbit, z, w0, free_slots, pos + 1, pool_known, n_known, seen, out)
        w0[j] = None


def _symmetric_matches(matches) -> bool:
    return set(matches) == {(j, i) for i, j in matches}


def _canonical_with_fresh(w: tuple, n_known: int, group) -> tuple[tuple, int, int]:
    """Canonicalize w over the group, relabeling fresh symbols by first occurrence.

    Returns (canonical tuple, fresh symbol count, stabilizer size), where the
    stabilizer counts group elements fixing the canonical pattern up to fresh
    relabeling — the overcount factor between ordered fresh fills and vertices.
    """
    best = None
    for h in group:
        ww = apply_perm(h, w)
        nxt = n_known
        ren = {}
        cand = []
        for s in ww:
            if s >= n_known:
                if s not in ren:
                    ren[s] = nxt
                    nxt += 1
                cand.append(ren[s])
            else:
                cand.append(s)
        cand_t = tuple(cand)
        if best is None or cand_t < best:
            best = cand_t
    fresh = sum(1 for s in set(best) if s >= n_known)
    stab = 0
    for h in group:
        ww = apply_perm(h, best)
        nxt = n_known
        ren = {}
        cand = []
        for s in ww:
            if s >= n_known:
                if s not in ren:
                    ren[s] = nxt
                    nxt += 1
                cand.append(ren[s])
            else:
                cand.append(s)
        if tuple(cand) == best:
            stab += 1
    return best, fresh, stab


@dataclass(frozen=True)
class Branch:
    """One neighbor pattern: all neighbors sharing a shape relative to the knowns."""

    cls: str
    w_orbit: str
    w: tuple[int, ...]
    fresh: int
    stab: int
    edge_orbit: StableOrbitId

    def count_poly(self, spec: FiGraphSpec, n_known: int) -> Poly:
        free = Poly([spec.label_offset - n_known, 1])
        return Poly.falling(free, self.fresh) * Fraction(1, self.stab)


# -- concrete graphs ----------------------------------------------------------


class ConcreteGraph:
    """One member of the family, with optional class-annotated adjacency."""

    def __init__(self, spec: FiGraphSpec, n: int, with_adjacency: bool = True):
        if spec.pool(n) < spec.max_arity() or spec.pool(n) < 1:
            raise TooSmallN(
                f"{spec.name} needs a label pool of at least {spec.max_arity()}; "
                f"n={n} gives {spec.pool(n)}"
            )
        self.spec = spec
        self.n = n
        self.pool = spec.pool(n)
        self.vertices: dict[str, list[tuple]] = {}
        self.offsets: dict[str, int] = {}
        total = 0
        for orb in spec.vertex_orbits:
            verts = _enumerate_orbit(orb, self.pool)
            self.vertices[orb.name] = verts
            self.offsets[orb.name] = total
            total += len(verts)
        self.total = total
        self._index: dict[tuple[str, tuple], int] = {}
        self._labels: list[tuple[str, tuple]] = [None] * total
        for name, verts in self.vertices.items():
            base = self.offsets[name]
            for i, v in enumerate(verts):
                self._index[(name, v)] = base + i
                self._labels[base + i] = (name, v)
        self.indptr = None
        self.indices = None
        self.edge_class_ids = None
        self.edge_orbit_ids = None
        self.class_names = [c.name for c in spec.edge_classes]
        self.orbit_table: list[StableOrbitId] = []
        if with_adjacency:
            self._build_adjacency()

    def index_of(self, orbit: str, v: tuple) -> int:
        return self._index[(orbit, v)]

    def label_of(self, idx: int) -> tuple[str, tuple]:
        return self._labels[idx]

    def orbit_of(self, idx: int) -> str:
        return self._labels[idx][0]

    def _build_adjacency(self):
        spec = self.spec
        class_id = {c.name: i for i, c in enumerate(spec.edge_classes)}
        orbit_id: dict[StableOrbitId, int] = {}
        indptr = array("q", [0])
        indices = array("l")
        eclass = array("h")
        eorbit = array("h")
        for orb in spec.vertex_orbits:
            k = orb.arity
            rep = tuple(range(k))
            branches = spec.neighbor_branches(orb.name, rep, k)
            for u in self.vertices[orb.name]:
                seen: set[int] = set()
                row: list[tuple[int, int, int]] = []
                for br in branches:
                    oid = orbit_id.get(br.edge_orbit)
                    if oid is None:
                        oid = len(self.orbit_table)
                        orbit_id[br.edge_orbit] = oid
                        self.orbit_table.append(br.edge_orbit)
                    cid = class_id[br.cls]
                    worb = spec.orbit(br.w_orbit)
                    for w in _realize_branch(br, u, k, self.pool, worb):
                        widx = self._index.get((br.w_orbit, w))
                        if widx is None or widx in seen:
                            continue
                        seen.add(widx)
                        row.append((widx, cid, oid))
                row.sort()
                for widx, cid, oid in row:
                    indices.append(widx)
                    eclass.append(cid)
                    eorbit.append(oid)
                indptr.append(len(indices))
        import numpy as np

        self.indptr = np.frombuffer(indptr, dtype=np.int64)
        self.indices = np.frombuffer(indices, dtype={8: np.int64, 4: np.int32}[indices.itemsize])
        self.edge_class_ids = np.frombuffer(eclass, dtype=np.int16)
        self.edge_orbit_ids = np.frombuffer(eorbit, dtype=np.int16)
        if len(self.indices) % 2 != 0:
            raise SpecError(f"{spec.name}: adjacency is not symmetric at n={self.n}")

    def degree(self, idx: int) -> int:
        return int(self.indptr[idx + 1] - self.indptr[idx])

    def neighbors(self, idx: int):
        lo, hi = int(self.indptr[idx]), int(self.indptr[idx + 1])
        return self.indices[lo:hi]

    def neighbor_rows(self, idx: int):
        lo, hi = int(self.indptr[idx]), int(self.indptr[idx + 1])
        for p in range(lo, hi):
            yield int(self.indices[p]), int(self.edge_class_ids[p]), int(self.edge_orbit_ids[p])

    def edge_count(self) -> int:
        return len(self.indices) // 2

    def vertex_counts(self) -> dict[str, int]:
        return {name: len(v) for name, v in self.vertices.items()}

    def is_connected(self) -> bool:
        if self.total == 0:
            return False
        seen = bytearray(self.total)
        stack = [0]
        seen[0] = 1
        cnt = 1
        while stack:
            v = stack.pop()
            for w in self.neighbors(v):
                w = int(w)
                if not seen[w]:
                    seen[w] = 1
                    cnt += 1
                    stack.append(w)
        return cnt == self.total


def _enumerate_orbit(orb: VertexOrbitSpec, pool: int) -> list[tuple]:
    if orb.arity == 0:
        return [()]
    group = orb.group
    out = []
    if len(group) == 1:
        out = list(itertools.permutations(range(pool), orb.arity))
    else:
        for t in itertools.permutations(range(pool), orb.arity):
            if min(apply_perm(h, t) for h in group) == t:
                out.append(t)
    return out


def _realize_branch(br: Branch, u: tuple, n_known: int, pool: int, worb: VertexOrbitSpec):
    """Concrete neighbors of u produced by a branch pattern.

    The branch was computed against the canonical representative (0..k-1); the
    substitution symbol i -> u[i] transports it to u, and the fresh formals
    range injectively over the labels unused by u.
    """
    w_pat = br.w
    if br.fresh == 0:
        w = tuple(u[s] for s in w_pat)
        yield worb.canonical(w)
        return
    others = [x for x in range(pool) if x not in set(u)]
    seen = set()
    for fill in itertools.permutations(others, br.fresh):
        w = tuple(u[s] if s < n_known else fill[s - n_known] for s in w_pat)
        w = worb.canonical(w)
        if w not in seen:
            seen.add(w)
            yield w


def instantiate(spec: FiGraphSpec, n: int, with_adjacency: bool = True) -> ConcreteGraph:
    """Concrete member of the family at size n."""
    return ConcreteGraph(spec, n, with_adjacency=with_adjacency)


def classify_pair(spec: FiGraphSpec, left: str, u: tuple, right: str, v: tuple) -> StableOrbitId:
    return spec.classify_pair(left, u, right, v)


# -- orbit sizes ---------------------------------------------------------------


def vertex_orbit_size(spec: FiGraphSpec, orbit_name: str) -> Poly:
    orb = spec.orbit(orbit_name)
    return Poly.falling(spec.pool_poly(), orb.arity) * Fraction(1, len(orb.group))


def pair_orbit_size(spec: FiGraphSpec, oid: StableOrbitId) -> Poly:
    """Number of ordered pairs in the stable orbit, as a polynomial in n."""
    u, v = spec.realize_pair(oid)
    s = oid.n_symbols
    gl = spec.orbit(oid.left).group
    gr = spec.orbit(oid.right).group
    c = 0
    for hl in gl:
        uu = apply_perm(hl, u)
        for hr in gr:
            if _relabel(uu + apply_perm(hr, v)) == oid.word:
                c += 1
    return Poly.falling(spec.pool_poly(), s) * Fraction(1, c)


def orbit_size(spec: FiGraphSpec, orbit) -> Poly:
    """Counting polynomial of a vertex orbit or a stable pair orbit.

    The closed-form count is sampled at enough sizes and re-fit with held-out
    validation, so a pattern-counting bug shows up as a failed fit rather than
    a silently wrong polynomial.
    """
    if isinstance(orbit, VertexOrbitSpec):
        poly = vertex_orbit_size(spec, orbit.name)
    elif isinstance(orbit, str):
        poly = vertex_orbit_size(spec, orbit)
    elif isinstance(orbit, StableOrbitId):
        poly = pair_orbit_size(spec, orbit)
    else:
        raise TypeError(f"cannot size {orbit!r}")
    deg = max(poly.degree, 0)
    base = max(spec.n0, spec.max_arity() - spec.label_offset)
    pts = [(n, poly(n)) for n in range(base, base + deg + 4)]
    return fit_polynomial(pts, deg)


def state_size(spec: FiGraphSpec, oid: StableOrbitId) -> Poly:
    """Vertices per roofed state: pair-orbit size over the roof orbit size."""
    num = pair_orbit_size(spec, oid)
    den = vertex_orbit_size(spec, oid.right)
    return num // den


def pair_orbit_inventory(spec: FiGraphSpec, n: int) -> set[StableOrbitId]:
    """All stable pair orbits realized at size n (left component at its rep)."""
    g = instantiate(spec, n, with_adjacency=False)
    out: set[StableOrbitId] = set()
    for orb in spec.vertex_orbits:
        rep = spec.canonical_rep(orb.name)
        if spec.pool(n) < orb.arity:
            continue
        for other in spec.vertex_orbits:
            for v in g.vertices[other.name]:
                out.add(spec.classify_pair(orb.name, rep, other.name, v))
    return out


# -- JSON interchange -----------------------------------------------------------


def spec_to_json(spec: FiGraphSpec) -> str:
    doc = {
        "name": spec.name,
        "vertex_orbits": [
            {"name": o.name, "arity": o.arity, "generators": [list(g) for g in o.generators]}
            for o in spec.vertex_orbits
        ],
        "edge_orbits": [
            {
                "name": c.name,
                "left": c.left,
                "right": c.right,
                "matches": [list(m) for m in c.matches],
                "strict": c.strict,
            }
            for c in spec.edge_classes
        ],
        "loops_allowed": spec.loops_allowed,
        "label_offset": spec.label_offset,
        "n0": spec.n0,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def spec_from_json(text: str) -> FiGraphSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from exc
    try:
        orbits = tuple(
            VertexOrbitSpec(
                name=str(o["name"]),
                arity=int(o["arity"]),
                generators=tuple(tuple(int(x) for x in g) for g in o.get("generators", [])),
            )
            for o in doc["vertex_orbits"]
        )
        classes = tuple(
            EdgeClass(
                name=str(c.get("name", f"edge{i}")),
                left=str(c["left"]),
                right=str(c["right"]),
                matches=tuple(tuple(int(x) for x in m) for m in c.get("matches", [])),
                strict=bool(c.get("strict", True)),
            )
            for i, c in enumerate(doc["edge_orbits"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed family spec: {exc}") from exc
    if not orbits:
        raise SpecError("family spec declares no vertex orbits")
    if not classes:
        raise SpecError("family spec declares no edge orbits")
    return FiGraphSpec(
        name=str(doc.get("name", "custom")),
        vertex_orbits=orbits,
        edge_classes=classes,
        loops_allowed=bool(doc.get("loops_allowed", False)),
        label_offset=int(doc.get("label_offset", 0)),
        n0=int(doc["n0"]) if "n0" in doc and doc["n0"] is not None else None,
    )


# -- built-in families ------------------------------------------------------------


def _make_complete() -> FiGraphSpec:
    return FiGraphSpec(
        name="complete",
        vertex_orbits=(VertexOrbitSpec("v", 1),),
        edge_classes=(EdgeClass("edge", "v", "v"),),
        n0=3,
    )


def _make_complete_bipartite() -> FiGraphSpec:
    return FiGraphSpec(
        name="complete_bipartite",
        vertex_orbits=(VertexOrbitSpec("left", 1), VertexOrbitSpec("right", 1)),
        edge_classes=(EdgeClass("cross", "left", "right", strict=False),),
        n0=2,
    )


def _make_star() -> FiGraphSpec:
    # Indexed so that size n is the star on n vertices (n-1 leaves), matching
    # the usual K_{n,1} tables.
    return FiGraphSpec(
        name="star",
        vertex_orbits=(VertexOrbitSpec("center", 0), VertexOrbitSpec("leaf", 1)),
        edge_classes=(EdgeClass("ray", "center", "leaf"),),
        label_offset=-1,
        n0=3,
    )


def _make_kneser(r: int) -> FiGraphSpec:
    return FiGraphSpec(
        name=f"kneser:{r}",
        vertex_orbits=(VertexOrbitSpec("set", r, symmetric_generators(r)),),
        edge_classes=(EdgeClass("disjoint", "set", "set"),),
        n0=2 * r + 1,
    )


def _make_johnson(r: int) -> FiGraphSpec:
    return FiGraphSpec(
        name=f"johnson:{r}",
        vertex_orbits=(VertexOrbitSpec("set", r, symmetric_generators(r)),),
        edge_classes=(
            EdgeClass("share", "set", "set", tuple((i, i) for i in range(r - 1))),
        ),
        n0=max(2 * r, r + 2),
    )


def _make_crown() -> FiGraphSpec:
    return FiGraphSpec(
        name="crown",
        vertex_orbits=(VertexOrbitSpec("left", 1), VertexOrbitSpec("right", 1)),
        edge_classes=(EdgeClass("cross", "left", "right"),),
        n0=3,
    )


def _make_different_orbits() -> FiGraphSpec:
    return FiGraphSpec(
        name="different_orbits",
        vertex_orbits=(VertexOrbitSpec("t", 4),),
        edge_classes=(
            EdgeClass("first", "t", "t", ((0, 0),), strict=False),
            EdgeClass("tail", "t", "t", ((1, 1), (2, 2), (3, 3)), strict=False),
        ),
        n0=8,
    )


def _make_bottleneck(r: int) -> FiGraphSpec:
    return FiGraphSpec(
        name=f"bottleneck:{r}",
        vertex_orbits=(
            VertexOrbitSpec("red", r, symmetric_generators(r)),
            VertexOrbitSpec("blue", r, symmetric_generators(r)),
            VertexOrbitSpec("green", 0),
        ),
        edge_classes=(
            EdgeClass("red_red", "red", "red", strict=False),
            EdgeClass("blue_blue", "blue", "blue", strict=False),
            EdgeClass("green_red", "green", "red", strict=False),
            EdgeClass("green_blue", "green", "blue", strict=False),
        ),
        n0=max(2 * r, 2),
    )


def _make_nocutoff() -> FiGraphSpec:
    return FiGraphSpec(
        name="nocutoff",
        vertex_orbits=(VertexOrbitSpec("red", 1), VertexOrbitSpec("blue", 1)),
        edge_classes=(
            EdgeClass("red_red", "red", "red"),
            EdgeClass("blue_blue", "blue", "blue"),
            EdgeClass("cross", "red", "blue", ((0, 0),)),
        ),
        n0=3,
    )


def _make_variety() -> FiGraphSpec:
    return FiGraphSpec(
        name="variety",
        vertex_orbits=(
            VertexOrbitSpec("red", 3),
            VertexOrbitSpec("blue", 2, symmetric_generators(2)),
            VertexOrbitSpec("green", 4, cyclic_generators(4)),
        ),
        edge_classes=(
            EdgeClass("rb_prefix", "red", "blue", ((0, 0), (1, 1))),
            EdgeClass("rb_first", "red", "blue", ((0, 0),)),
            EdgeClass("rg", "red", "green", ((0, 0), (1, 1), (2, 2))),
            EdgeClass("gg", "green", "green", ((0, 0), (1, 1), (2, 3), (3, 2))),
        ),
        n0=8,
    )


_PLAIN_FAMILIES = {
    "complete": _make_complete,
    "complete_bipartite": _make_complete_bipartite,
    "star": _make_star,
    "crown": _make_crown,
    "different_orbits": _make_different_orbits,
    "nocutoff": _make_nocutoff,
    "variety": _make_variety,
}

_PARAM_FAMILIES = {
    "kneser": _make_kneser,
    "johnson": _make_johnson,
    "bottleneck": _make_bottleneck,
}


def builtin_family(name: str) -> FiGraphSpec:
    """Look up a registered family; parametrized ones as 'kneser:2' or 'kneser(2)'."""
    key = name.strip().lower().replace("(", ":").rstrip(")")
    if key in _PLAIN_FAMILIES:
        return _PLAIN_FAMILIES[key]()
    if ":" in key:
        base, _, arg = key.partition(":")
        if base in _PARAM_FAMILIES:
            try:
                r = int(arg)
            except ValueError:
                raise UnknownFamily(f"bad parameter in family name {name!r}") from None
            if r < 1:
                raise UnknownFamily(f"family parameter must be >= 1 in {name!r}")
            return _PARAM_FAMILIES[base](r)
    raise UnknownFamily(f"no built-in family named {name!r}")


def registry_names() -> list[str]:
    """Canonical list of families used by the verification suites."""
    return [
        "complete",
        "complete_bipartite",
        "star",
        "kneser:2",
        "johnson:2",
        "johnson:3",
        "crown",
        "different_orbits",
        "bottleneck:1",
        "bottleneck:2",
        "nocutoff",
        "variety",
    ]
