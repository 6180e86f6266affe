"""Exact total-variation mixing profiles, trend diagnostics and spectra.

Because the collapsed chain has constantly many states, the distribution of
the walk after t steps is computed by exact integer powering: with D the
common denominator of the chain matrix at size n, the numerator vector
against D^t stays integral, so every reported total-variation distance is an
exact rational.  Full-state-space floating-point powering is kept alongside
as the independent check of the collapse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, comb

import numpy as np

from .errors import ComplexSpectrum, NoPolynomialFit, PeriodicChain, SpecError
from .exactnum import Poly, RationalFunc, fit_polynomial
from .fispec import FiGraphSpec, StableOrbitId
from .hitting import RoofedOrbitChain, build_roofed_chain
from .walks import (
    StationaryDist,
    TransitionRelation,
    VirtualRelation,
    cached_graph,
    degree_poly,
    edge_orbit_info,
    rho,
    stationary,
)

try:  # pragma: no cover - optional accelerator
    from gmpy2 import mpz
except ImportError:  # pragma: no cover
    mpz = int

_CHAIN_CACHE: dict = {}


def cached_chain(spec: FiGraphSpec, walk: TransitionRelation, roof: str) -> RoofedOrbitChain:
    key = (id(spec), id(walk), roof)
    c = _CHAIN_CACHE.get(key)
    if c is None:
        c = build_roofed_chain(spec, walk, roof)
        _CHAIN_CACHE[key] = c
    return c


def chain_period(chain: RoofedOrbitChain, n: int) -> int:
    """Period of the walk at size n, read off the collapsed chain.

    The diagonal state is the single vertex of the roof, so return-time gcds
    of the collapsed chain at that state equal those of the full walk.
    """
    snap = chain.snapshot(n)
    k = len(chain.states)
    adj = [[j for j in range(k) if snap[i][j] != 0] for i in range(k)]
    level = {chain.diagonal: 0}
    queue = [chain.diagonal]
    g = 0
    while queue:
        nxt = []
        for u in queue:
            for v in adj[u]:
                if v not in level:
                    level[v] = level[u] + 1
                    nxt.append(v)
        queue = nxt
    if len(level) != k:
        raise SpecError(f"collapsed chain not irreducible at n={n}")
    for u in range(k):
        for v in adj[u]:
            g = gcd(g, level[u] + 1 - level[v])
    return abs(g)


@dataclass
class MixingProfile:
    """Worst-case total-variation distance per step, exactly, at one size."""

    spec_name: str
    walk_kind: str
    n: int
    d: list[tuple[int, Fraction]]
    t_mix: dict[object, int]
    worst_roof: dict[int, str] = field(default_factory=dict)

    def d_at(self, t: int) -> Fraction:
        return self.d[t - 1][1]


def _epsilon_leq(d: Fraction, eps) -> bool:
    if isinstance(eps, Fraction):
        return d <= eps
    return float(d) <= eps


def tv_profile(
    spec: FiGraphSpec,
    walk: TransitionRelation,
    n: int,
    epsilons=(Fraction(1, 4), Fraction(1, 10)),
    t_max: int | None = None,
    dist: StationaryDist | None = None,
) -> MixingProfile:
    """Exact worst-case TV distance to stationarity for each step count.

    Powers the collapsed chain from each starting vertex orbit in integer
    arithmetic.  Periodic walks are rejected: the worst-case distance does not
    converge for them.
    """
    if n < spec.n0:
        raise ValueError(f"n={n} below the stabilization onset {spec.n0}")
    if dist is None:
        dist = stationary(spec, walk)
    chains = [cached_chain(spec, walk, orb.name) for orb in spec.vertex_orbits]
    for ch in chains:
        if chain_period(ch, n) != 1:
            raise PeriodicChain(
                f"{spec.name} walk {walk.kind} is periodic at n={n}; "
                "no total-variation profile exists"
            )
    if t_max is None:
        t_max = max(200, 8 * n * n)

    runs = []
    for ch in chains:
        mat, den = ch.integer_snapshot(n)
        k = len(ch.states)
        rows = [[(j, mpz(mat[i][j])) for j in range(k) if mat[i][j]] for i in range(k)]
        mass_num = []
        mass_q = 1
        for s, size in zip(ch.states, ch.state_sizes):
            m = Fraction(size(n)) * dist.per_vertex[s.left](n)
            mass_q = mass_q * m.denominator // gcd(mass_q, m.denominator)
            mass_num.append(m)
        if sum(mass_num) != 1:
            raise SpecError(f"stationary mass over roofed states sums to {sum(mass_num)}")
        mass_int = [int(m * mass_q) for m in mass_num]
        vec = [mpz(0)] * k
        vec[ch.diagonal] = mpz(1)
        runs.append({"rows": rows, "den": mpz(den), "massq": mpz(mass_q), "mass": [mpz(m) for m in mass_int], "vec": vec, "dpow": mpz(1), "roof": ch.roof})

    eps_sorted = sorted(epsilons, key=float)
    smallest = eps_sorted[0]
    profile: list[tuple[int, Fraction]] = []
    t_mix: dict = {}
    worst_roof: dict[int, str] = {}
    for t in range(1, t_max + 1):
        worst = None
        who = None
        for run in runs:
            rows, den, vec = run["rows"], run["den"], run["vec"]
            k = len(vec)
            new = [mpz(0)] * k
            for i in range(k):
                vi = vec[i]
                if vi:
                    for j, m in rows[i]:
                        new[j] += vi * m
            run["vec"] = new
            run["dpow"] *= den
            dpow, massq, mass = run["dpow"], run["massq"], run["mass"]
            acc = mpz(0)
            for vj, mj in zip(new, mass):
                acc += abs(vj * massq - mj * dpow)
            tv = Fraction(int(acc), int(2 * dpow * massq))
            if worst is None or tv > worst:
                worst = tv
                who = run["roof"]
        profile.append((t, worst))
        worst_roof[t] = who
        for eps in epsilons:
            if eps not in t_mix and _epsilon_leq(worst, eps):
                t_mix[eps] = t
        if smallest in t_mix:
            break
    missing = [eps for eps in epsilons if eps not in t_mix]
    if missing:
        raise SpecError(
            f"t_max={t_max} too small: d(t) never reached {missing} at n={n}"
        )
    return MixingProfile(spec.name, walk.kind, n, profile, t_mix, worst_roof)


@dataclass
class SweepResult:
    """Mixing times across sizes, with a growth-shape classification."""

    eps: object
    points: list[tuple[int, int]]
    trend: str
    coefficient: float
    rmse: dict[str, float]
    unambiguous: bool
    profiles: dict[int, MixingProfile]


_SHAPES = ("constant", "linear", "quadratic", "cubic")


def _shape_value(shape: str, n: int) -> float:
    return {"constant": 1.0, "linear": n, "quadratic": n * n, "cubic": n**3}[shape]


def classify_trend(points: list[tuple[int, int]]) -> tuple[str, float, dict[str, float], bool]:
    """Least-squares fit of t(n) against c*shape(n) on the largest half of the sweep."""
    half = sorted(points)[len(points) // 2 :]
    rmse = {}
    coefs = {}
    mean_t = sum(t for _, t in half) / len(half)
    for shape in _SHAPES:
        xs = [_shape_value(shape, n) for n, _ in half]
        ts = [t for _, t in half]
        c = sum(x * t for x, t in zip(xs, ts)) / sum(x * x for x in xs)
        err = sum((t - c * x) ** 2 for x, t in zip(xs, ts)) / len(half)
        rmse[shape] = err**0.5 / max(mean_t, 1e-12)
        coefs[shape] = c
    ordered = sorted(_SHAPES, key=lambda s: rmse[s])
    best, second = ordered[0], ordered[1]
    unambiguous = rmse[best] < 0.5 * rmse[second]
    return best, coefs[best], rmse, unambiguous


def mixing_sweep(
    spec: FiGraphSpec,
    walk: TransitionRelation,
    n_range: tuple[int, int],
    eps=Fraction(1, 4),
    t_max: int | None = None,
) -> SweepResult:
    """Mixing times over a size range plus a trend classification."""
    dist = stationary(spec, walk)
    lo, hi = n_range
    profiles = {}
    points = []
    for n in range(lo, hi + 1):
        prof = tv_profile(spec, walk, n, epsilons=(eps,), t_max=t_max, dist=dist)
        profiles[n] = prof
        points.append((n, prof.t_mix[eps]))
    trend, coef, rmse, unamb = classify_trend(points)
    return SweepResult(eps, points, trend, coef, rmse, unamb, profiles)


@dataclass
class RhoBoundReport:
    """Empirical check of t_mix <= C / rho over a sweep."""

    eps: object
    rows: list[tuple[int, int, Fraction, Fraction]]  # n, t_mix, rho, t_mix * rho
    minimal_c: Fraction

    def holds(self, c: Fraction) -> bool:
        return all(tm <= c / r for _, tm, r, _ in self.rows)


def rho_bound_check(
    spec: FiGraphSpec,
    walk: TransitionRelation,
    n_range: tuple[int, int],
    eps=Fraction(1, 4),
) -> RhoBoundReport:
    """Smallest single constant C with t_mix(eps)(n) <= C * rho(n)^-1 on the sweep."""
    sweep = mixing_sweep(spec, walk, n_range, eps=eps)
    prof = rho(spec, walk, n_range)
    rho_at = dict(prof.values)
    rows = []
    cmin = Fraction(0)
    for n, tm in sweep.points:
        r = rho_at[n]
        prod = tm * r
        rows.append((n, tm, r, prod))
        cmin = max(cmin, prod)
    return RhoBoundReport(eps, rows, cmin)


@dataclass
class CutoffDiagnostic:
    """Profile window widths across the sweep; trend is descriptive only."""

    eps: object
    widths: list[tuple[int, int]]
    trend: str  # narrowing | flat | widening


def cutoff_diagnostic(
    spec: FiGraphSpec,
    walk: TransitionRelation,
    n_range: tuple[int, int],
    eps=Fraction(1, 10),
    t_max: int | None = None,
) -> CutoffDiagnostic:
    """Width t_mix(eps) - t_mix(1 - eps) per size, classified by its growth."""
    if not isinstance(eps, Fraction):
        eps = Fraction(eps).limit_denominator(10**6)
    hi_eps = 1 - eps
    dist = stationary(spec, walk)
    widths = []
    for n in range(n_range[0], n_range[1] + 1):
        prof = tv_profile(spec, walk, n, epsilons=(eps, hi_eps), t_max=t_max, dist=dist)
        widths.append((n, prof.t_mix[eps] - prof.t_mix[hi_eps]))
    if any(w < 0 for _, w in widths):
        raise SpecError("negative cutoff window width")
    first = [w for _, w in widths[: len(widths) // 2]]
    last = [w for _, w in widths[(len(widths) + 1) // 2 :]]
    a = sum(first) / max(len(first), 1)
    b = sum(last) / max(len(last), 1)
    if b > a * 1.15 + 0.25:
        trend = "widening"
    elif b < a * 0.87 - 0.25:
        trend = "narrowing"
    else:
        trend = "flat"
    return CutoffDiagnostic(eps, widths, trend)


# -- spectra -----------------------------------------------------------------


def adjacency_relation(spec: FiGraphSpec) -> VirtualRelation:
    coeffs = {oid: RationalFunc.const(1) for oid in edge_orbit_info(spec)}
    return VirtualRelation(spec, coeffs, name="adjacency")


def laplacian_relation(spec: FiGraphSpec) -> VirtualRelation:
    coeffs = {oid: RationalFunc.const(-1) for oid in edge_orbit_info(spec)}
    for orb in spec.vertex_orbits:
        coeffs[spec.diagonal_orbit(orb.name)] = RationalFunc(degree_poly(spec, orb.name))
    return VirtualRelation(spec, coeffs, name="laplacian")


@dataclass
class SpectrumReport:
    """Clustered spectra of a specialized virtual relation across a sweep."""

    relation_name: str
    clusters: dict[int, list[tuple[float, int]]]
    distinct_counts: dict[int, int]
    stable_count: bool
    multiplicity_polys: list[Poly] | None
    validated: bool


def spectrum_sweep(
    spec: FiGraphSpec,
    relation: VirtualRelation,
    n_range: tuple[int, int],
    cluster_tol: float = 1e-7,
) -> SpectrumReport:
    """Numeric eigenvalues per size, clustered, with multiplicity polynomials.

    Clusters are matched across sizes by their sorted position, and their
    multiplicities fit against polynomials with 3 held-out sizes, mirroring
    the stabilization of the distinct-eigenvalue count.
    """
    clusters: dict[int, list[tuple[float, int]]] = {}
    for n in range(n_range[0], n_range[1] + 1):
        g = cached_graph(spec, n)
        mat = relation.specialize_dense(g, n)
        asym = float(np.abs(mat - mat.T).max())
        scale = max(float(np.abs(mat).max()), 1.0)
        if asym <= 1e-12 * scale:
            eigs = np.linalg.eigvalsh(mat)
        else:
            ev = np.linalg.eigvals(mat)
            if float(np.abs(ev.imag).max()) > cluster_tol * scale:
                raise ComplexSpectrum(
                    f"non-real eigenvalues at n={n}: max imag {np.abs(ev.imag).max():.3e}"
                )
            eigs = np.sort(ev.real)
        tol_abs = cluster_tol * max(1.0, float(np.abs(eigs).max()))
        groups: list[tuple[float, int]] = []
        start = 0
        for i in range(1, len(eigs) + 1):
            if i == len(eigs) or eigs[i] - eigs[i - 1] > tol_abs:
                chunk = eigs[start:i]
                groups.append((float(chunk.mean()), len(chunk)))
                start = i
        if sum(m for _, m in groups) != g.total:
            raise SpecError("cluster multiplicities do not sum to the state count")
        clusters[n] = groups
    counts = {n: len(gr) for n, gr in clusters.items()}
    stable = len(set(counts.values())) == 1
    polys = None
    validated = False
    if stable:
        k = next(iter(counts.values()))
        try:
            polys = []
            for i in range(k):
                pts = [(n, Fraction(clusters[n][i][1])) for n in sorted(clusters)]
                deg = max(0, len(pts) - 4)
                polys.append(fit_polynomial(pts, min(deg, spec.max_arity() + 2)))
            validated = True
        except (NoPolynomialFit, ValueError):
            polys = None
    return SpectrumReport(relation.name, clusters, counts, stable, polys, validated)


# -- full-state-space oracle --------------------------------------------------


def full_tv_profile(
    spec: FiGraphSpec,
    walk: TransitionRelation,
    n: int,
    t_max: int,
    dist: StationaryDist | None = None,
) -> list[tuple[int, float]]:
    """Worst-case TV profile computed on the whole graph in floating point.

    Independent of the orbit collapse: builds the full sparse transition
    matrix and powers indicator vectors from one representative per orbit.
    """
    import scipy.sparse

    if dist is None:
        dist = stationary(spec, walk)
    g = cached_graph(spec, n)
    coefs = [float(walk.coefficient(o)(n)) for o in g.orbit_table]
    data = np.array([coefs[i] for i in g.edge_orbit_ids], dtype=np.float64)
    mat = scipy.sparse.csr_matrix((data, g.indices, g.indptr), shape=(g.total, g.total))
    diag = np.zeros(g.total)
    for orb in spec.vertex_orbits:
        c = float(walk.diagonal_coefficient(orb.name)(n))
        if c:
            base = g.offsets[orb.name]
            diag[base : base + len(g.vertices[orb.name])] = c
    if diag.any():
        mat = mat + scipy.sparse.diags(diag)
    pi = np.empty(g.total)
    for orb in spec.vertex_orbits:
        base = g.offsets[orb.name]
        pi[base : base + len(g.vertices[orb.name])] = float(dist.per_vertex[orb.name](n))
    starts = []
    for orb in spec.vertex_orbits:
        rep = spec.orbit(orb.name).canonical(spec.canonical_rep(orb.name))
        starts.append(g.index_of(orb.name, rep))
    vecs = np.zeros((len(starts), g.total))
    for i, s in enumerate(starts):
        vecs[i, s] = 1.0
    out = []
    matT = mat.T.tocsr()
    for t in range(1, t_max + 1):
        vecs = (matT @ vecs.T).T
        dists = 0.5 * np.abs(vecs - pi).sum(axis=1)
        out.append((t, float(dists.max())))
    return out


# -- augmented orbit bookkeeping ------------------------------------------------


def augmented_state(spec: FiGraphSpec, orbit: str, v: tuple, label: int) -> tuple[str, int]:
    """Vertex orbit plus the canonical position of a tracked label (-1 if absent)."""
    orb = spec.orbit(orbit)
    best = None
    for h in orb.group:
        vv = tuple(v[h[i]] for i in range(len(v)))
        pos = -1
        for i, s in enumerate(vv):
            if s == label:
                pos = i
                break
        if pos >= 0 and (best is None or pos < best):
            best = pos
    return (orbit, best if best is not None else -1)


def augmented_projection_check(
    spec: FiGraphSpec, walk: TransitionRelation, n: int, label: int = 0
) -> bool:
    """The label-augmented lumping is Markov and projects onto the orbit chain.

    Checks exactly, on the full graph: (i) transition rows are constant on
    augmented classes, and (ii) summing the augmented chain over label
    positions reproduces one step of the vertex-orbit quotient chain.
    """
    g = cached_graph(spec, n)
    coefs = [walk.coefficient(o)(n) for o in g.orbit_table]
    aug_of = []
    for idx in range(g.total):
        orb, v = g.label_of(idx)
        aug_of.append(augmented_state(spec, orb, v, label))
    aug_states = sorted(set(aug_of))
    aug_index = {a: i for i, a in enumerate(aug_states)}
    rows: dict[int, dict[int, Fraction]] = {}
    for idx in range(g.total):
        a = aug_index[aug_of[idx]]
        row: dict[int, Fraction] = {}
        dc = walk.diagonal_coefficient(g.orbit_of(idx))(n)
        if dc:
            row[a] = row.get(a, Fraction(0)) + dc
        for w, _cid, oidx in g.neighbor_rows(idx):
            b = aug_index[aug_of[w]]
            row[b] = row.get(b, Fraction(0)) + coefs[oidx]
        if a in rows:
            if rows[a] != row:
                return False
        else:
            rows[a] = row
    # project: sum augmented transitions over positions, compare to orbit quotient
    names = [o.name for o in spec.vertex_orbits]
    expect: dict[str, dict[str, Fraction]] = {}
    for uname in names:
        rep = spec.canonical_rep(uname)
        arity = spec.orbit(uname).arity
        row: dict[str, Fraction] = {w: Fraction(0) for w in names}
        row[uname] += walk.diagonal_coefficient(uname)(n)
        for br in spec.neighbor_branches(uname, rep, arity):
            row[br.w_orbit] += walk.coefficient(br.edge_orbit)(n) * br.count_poly(spec, arity)(n)
        expect[uname] = row
    for (uname, _pos), i in aug_index.items():
        proj: dict[str, Fraction] = {w: Fraction(0) for w in names}
        for j, val in rows[i].items():
            proj[aug_states[j][0]] += val
        if proj != expect[uname]:
            return False
    return True
