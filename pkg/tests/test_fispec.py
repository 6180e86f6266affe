"""Family specifications: instantiation, classification, orbit sizes, stability."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

import conftest as ctx
from orbitwalks import (
    EdgeClass,
    FiGraphSpec,
    Poly,
    SpecError,
    TooSmallN,
    UnknownFamily,
    VertexOrbitSpec,
    builtin_family,
    instantiate,
    orbit_size,
    pair_orbit_size,
    registry_names,
    spec_from_json,
    spec_to_json,
    state_size,
    vertex_orbit_size,
)
from orbitwalks.fispec import apply_perm, pair_orbit_inventory

N = Poly.x()

SMALL_FAMILIES = [
    "complete",
    "complete_bipartite",
    "star",
    "kneser:2",
    "johnson:2",
    "crown",
    "bottleneck:1",
    "bottleneck:2",
    "nocutoff",
]


def test_complete_counts():
    g = ctx.graph("complete", 4)
    assert g.total == 4
    assert g.edge_count() == 6


def test_kneser_is_petersen_at_5():
    g = ctx.graph("kneser:2", 5)
    assert g.total == 10
    assert g.edge_count() == 15
    # brute-force oracle: disjoint 2-subsets of {0..4}
    subsets = list(itertools.combinations(range(5), 2))
    expect = {
        (a, b) for a in subsets for b in subsets if not set(a) & set(b) and a != b
    }
    got = set()
    for idx in range(g.total):
        _, u = g.label_of(idx)
        for w in g.neighbors(idx):
            got.add((u, g.label_of(int(w))[1]))
    assert got == expect


def test_different_orbits_counts():
    g = instantiate(builtin_family("different_orbits"), 5, with_adjacency=False)
    assert g.total == 120  # 5*4*3*2 labeled injective 4-tuples


def test_variety_counts():
    g = instantiate(builtin_family("variety"), 6, with_adjacency=False)
    counts = g.vertex_counts()
    assert counts["red"] == 120
    assert counts["blue"] == 15
    # brute force: 4-tuples of distinct labels modulo cyclic rotation
    tuples = set()
    for t in itertools.permutations(range(6), 4):
        rots = [t[i:] + t[:i] for i in range(4)]
        tuples.add(min(rots))
    assert counts["green"] == len(tuples) == 90


def test_star_has_n_minus_1_leaves():
    g = ctx.graph("star", 5)
    assert g.vertex_counts() == {"center": 1, "leaf": 4}
    assert g.edge_count() == 4


def test_too_small_n():
    with pytest.raises(TooSmallN):
        instantiate(builtin_family("different_orbits"), 3)


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        builtin_family("dodecahedron")
    with pytest.raises(UnknownFamily):
        builtin_family("kneser:x")


def test_classify_complete_pairs():
    spec = ctx.family("complete")
    diag = spec.classify_pair("v", (0,), "v", (0,))
    off = spec.classify_pair("v", (0,), "v", (1,))
    assert diag != off
    assert diag == spec.diagonal_orbit("v")
    assert spec.classify_pair("v", (3,), "v", (3,)) == diag
    assert spec.classify_pair("v", (2,), "v", (5,)) == off


def test_classify_kneser_overlap_pattern():
    spec = ctx.family("kneser:2")
    a = spec.classify_pair("set", (0, 1), "set", (0, 2))
    b = spec.classify_pair("set", (3, 4), "set", (1, 3))
    assert a == b
    # explicit permutation witness: sigma maps {0,1}->{3,4}, {0,2}->{3,1}
    sigma = {0: 3, 1: 4, 2: 1, 3: 0, 4: 2}
    u = tuple(sorted(sigma[x] for x in (0, 1)))
    v = tuple(sorted(sigma[x] for x in (0, 2)))
    assert spec.classify_pair("set", u, "set", v) == a
    disj = spec.classify_pair("set", (0, 1), "set", (2, 3))
    assert disj != a


@pytest.mark.parametrize("name", registry_names())
def test_classify_equivariance(name):
    spec = ctx.family(name)
    n = max(spec.n0, spec.max_arity() + 2)
    if n > 8:
        n = spec.n0
    g = instantiate(spec, n, with_adjacency=False)
    rng = random.Random(hash(name) & 0xFFFF)
    pool = spec.pool(n)
    verts = [(o.name, v) for o in spec.vertex_orbits for v in g.vertices[o.name]]
    for _ in range(30):
        sigma = list(range(pool))
        rng.shuffle(sigma)
        (ou, u), (ov, v) = rng.choice(verts), rng.choice(verts)
        su = spec.orbit(ou).canonical(tuple(sigma[x] for x in u))
        sv = spec.orbit(ov).canonical(tuple(sigma[x] for x in v))
        assert spec.classify_pair(ou, u, ov, v) == spec.classify_pair(ou, su, ov, sv)


def test_orbit_size_polynomials():
    spec = ctx.family("complete")
    assert orbit_size(spec, "v") == N
    off = spec.classify_pair("v", (0,), "v", (1,))
    assert orbit_size(spec, off) == N * (N - 1)

    kn = ctx.family("kneser:2")
    assert orbit_size(kn, "set") == N * (N - 1) * Fraction(1, 2)


@pytest.mark.parametrize("name", SMALL_FAMILIES + ["variety"])
def test_vertex_counts_match_polynomials(name):
    spec = ctx.family(name)
    for orb in spec.vertex_orbits:
        poly = vertex_orbit_size(spec, orb.name)
        base = max(spec.n0, orb.arity - spec.label_offset)
        for n in list(range(base, base + 3)) + [base + 7]:
            g = instantiate(spec, n, with_adjacency=False)
            assert len(g.vertices[orb.name]) == poly(n)


def test_pair_orbit_size_against_enumeration():
    for name, n in (("kneser:2", 5), ("variety", 5), ("complete_bipartite", 3)):
        spec = ctx.family(name)
        g = instantiate(spec, n, with_adjacency=False)
        verts = [(o.name, v) for o in spec.vertex_orbits for v in g.vertices[o.name]]
        counts = {}
        for ou, u in verts:
            for ov, v in verts:
                oid = spec.classify_pair(ou, u, ov, v)
                counts[oid] = counts.get(oid, 0) + 1
        for oid, c in counts.items():
            assert pair_orbit_size(spec, oid)(n) == c


def test_state_size_matches_pair_over_roof():
    spec = ctx.family("kneser:2")
    oid = spec.classify_pair("set", (0, 2), "set", (0, 1))
    expect = pair_orbit_size(spec, oid)(7) / vertex_orbit_size(spec, "set")(7)
    assert state_size(spec, oid)(7) == expect


@pytest.mark.parametrize("name", SMALL_FAMILIES)
def test_adjacency_symmetric_no_duplicates(name):
    spec = ctx.family(name)
    for n in (spec.n0, spec.n0 + 1):
        g = instantiate(spec, n)
        pairs = set()
        for u in range(g.total):
            row = list(g.neighbors(u))
            assert len(row) == len(set(row)), "duplicate edge"
            assert u not in row, "unexpected loop"
            for w in row:
                pairs.add((u, int(w)))
        assert all((w, u) in pairs for (u, w) in pairs), "asymmetric adjacency"


@pytest.mark.parametrize("name", registry_names())
def test_orbit_inventory_stabilizes(name):
    spec = ctx.family(name)
    base = pair_orbit_inventory(spec, spec.n0)
    for n in range(spec.n0 + 1, spec.n0 + 5):
        assert pair_orbit_inventory(spec, n) == base


@pytest.mark.parametrize("name", SMALL_FAMILIES)
def test_embedding_is_graph_homomorphism(name):
    spec = ctx.family(name)
    n = spec.n0
    g1 = instantiate(spec, n)
    g2 = instantiate(spec, n + 1)
    for u in range(g1.total):
        ou, tu = g1.label_of(u)
        u2 = g2.index_of(ou, tu)  # vertices persist under the label inclusion
        nbrs2 = {int(w) for w in g2.neighbors(u2)}
        for w in g1.neighbors(u):
            ow, tw = g1.label_of(int(w))
            assert g2.index_of(ow, tw) in nbrs2


def test_branch_counts_match_concrete_degrees():
    for name in SMALL_FAMILIES + ["different_orbits", "variety"]:
        spec = ctx.family(name)
        n = spec.n0
        g = instantiate(spec, n)
        for orb in spec.vertex_orbits:
            rep = spec.canonical_rep(orb.name)
            branches = spec.neighbor_branches(orb.name, rep, orb.arity)
            total = sum(br.count_poly(spec, orb.arity)(n) for br in branches)
            crep = spec.orbit(orb.name).canonical(rep)
            assert total == g.degree(g.index_of(orb.name, crep))


def test_group_closure_and_canonical():
    orb = VertexOrbitSpec("s", 3, (((1, 0, 2)), (1, 2, 0)))
    assert len(orb.group) == 6  # full symmetric group from a transposition and a cycle
    assert orb.canonical((2, 0, 1)) == (0, 1, 2)
    cyc = VertexOrbitSpec("c", 4, ((1, 2, 3, 0),))
    assert len(cyc.group) == 4
    assert cyc.canonical((3, 0, 1, 2)) == (0, 1, 2, 3)
    assert cyc.canonical((0, 2, 1, 3)) == (0, 2, 1, 3)


def test_json_roundtrip():
    spec = ctx.family("variety")
    doc = spec_to_json(spec)
    back = spec_from_json(doc)
    assert back.name == spec.name
    assert back.vertex_orbits == spec.vertex_orbits
    assert back.edge_classes == spec.edge_classes
    assert back.n0 == spec.n0

    g1 = instantiate(spec, 5, with_adjacency=False)
    g2 = instantiate(back, 5, with_adjacency=False)
    assert g1.vertex_counts() == g2.vertex_counts()


def test_bad_spec_errors():
    with pytest.raises(SpecError):
        spec_from_json("{not json")
    with pytest.raises(SpecError):
        spec_from_json('{"vertex_orbits": [], "edge_orbits": []}')
    with pytest.raises(SpecError):
        spec_from_json(
            '{"vertex_orbits": [{"name": "v", "arity": 1}],'
            ' "edge_orbits": [{"left": "v", "right": "w", "matches": []}]}'
        )
    with pytest.raises(SpecError):
        FiGraphSpec(
            name="bad",
            vertex_orbits=(VertexOrbitSpec("v", 2),),
            edge_classes=(EdgeClass("e", "v", "v", ((0, 0), (0, 1))),),
        )


def test_loops_supported_when_allowed():
    spec = FiGraphSpec(
        name="loopy",
        vertex_orbits=(VertexOrbitSpec("v", 1),),
        edge_classes=(
            EdgeClass("edge", "v", "v"),
            EdgeClass("self", "v", "v", ((0, 0),)),
        ),
        loops_allowed=True,
        n0=3,
    )
    g = instantiate(spec, 4)
    assert g.degree(0) == 4  # 3 neighbors + its own loop entry


def test_apply_perm_convention():
    assert apply_perm((1, 2, 0), ("a", "b", "c")) == ("b", "c", "a")
