"""Roofed orbit chains, hitting-time moments and discrete Green's functions.

Fixing a roof vertex y and tracking only the orbit of (X_t, y) collapses the
walk to a chain on constantly many states; expected hitting times into y then
solve a small linear system over Q(n).  Every symbolic result has a
full-state-space oracle companion that repeats the computation without any
orbit collapse, in exact arithmetic, on a concrete graph.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np
import scipy.sparse

from .errors import (
    NoPolynomialFit,
    NoRationalFit,
    NotReversible,
    SingularMatrix,
    ToleranceExceeded,
)
from .exactnum import (
    RF_ONE,
    RF_ZERO,
    Poly,
    RatMatrix,
    RationalFunc,
    SqrtRational,
    fit_polynomial,
    fit_rational_auto,
    solve_linear,
)
from .exactsolve import ExactSolver, IntMatrix
from .fispec import FiGraphSpec, StableOrbitId, state_size, vertex_orbit_size
from .walks import (
    TransitionRelation,
    cached_graph,
    check_reversible,
    class_count_poly,
    custom_walk,
    degree_poly,
    edge_orbit_info,
    stationary,
)

_SYMBOLIC_SOLVE_MAX = 16


def _realize_roofed(spec: FiGraphSpec, oid: StableOrbitId) -> tuple[tuple, int]:
    """Realize the state with its roof at the canonical representative.

    Returns (z, n_known): the roof occupies labels 0..k_roof-1 and z is spread
    over 0..n_known-1.
    """
    kl = spec.orbit(oid.left).arity
    zw, yw = oid.word[:kl], oid.word[kl:]
    mapping = {s: i for i, s in enumerate(yw)}
    nxt = len(yw)
    for s in zw:
        if s not in mapping:
            mapping[s] = nxt
            nxt += 1
    return tuple(mapping[s] for s in zw), nxt


@dataclass
class RoofedOrbitChain:
    """Walk collapsed onto the orbits of pairs (z, roof)."""

    spec: FiGraphSpec
    walk: TransitionRelation
    roof: str
    states: list[StableOrbitId]
    index: dict[StableOrbitId, int]
    diagonal: int
    rows: list[dict[int, RationalFunc]]
    state_sizes: list[Poly]
    _snapshots: dict[int, list[list[Fraction]]] = field(default_factory=dict)

    @property
    def n0(self) -> int:
        return self.spec.n0

    def matrix(self) -> RatMatrix:
        k = len(self.states)
        dense = [[RF_ZERO] * k for _ in range(k)]
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                dense[i][j] = v
        return RatMatrix(dense)

    def snapshot(self, n: int) -> list[list[Fraction]]:
        """Exact transition matrix of the collapsed chain at size n."""
        hit = self._snapshots.get(n)
        if hit is not None:
            return hit
        k = len(self.states)
        mat = [[Fraction(0)] * k for _ in range(k)]
        for i, row in enumerate(self.rows):
            total = Fraction(0)
            for j, v in row.items():
                val = v(n)
                mat[i][j] = val
                total += val
            if total != 1:
                raise SingularMatrix(
                    f"roofed chain row {self.states[i]} sums to {total} != 1 at n={n}"
                )
        self._snapshots[n] = mat
        return mat

    def integer_snapshot(self, n: int) -> tuple[list[list[int]], int]:
        """Snapshot scaled to integers: returns (D*P, D)."""
        snap = self.snapshot(n)
        den = 1
        for row in snap:
            for v in row:
                d = v.denominator
                if den % d:
                    g = _igcd(den, d)
                    den = den // g * d
        return [[int(v * den) for v in row] for row in snap], den


def _igcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def build_roofed_chain(
    spec: FiGraphSpec, walk: TransitionRelation, roof_orbit: str
) -> RoofedOrbitChain:
    """Collapse the walk onto roofed pair orbits, with symbolic entries.

    States are discovered by search from the diagonal orbit; each row is
    assembled from the neighbor patterns of a state representative, so the
    entries are exact rational functions valid for every n >= n0.  Row sums
    are verified to be identically 1.
    """
    diag = spec.diagonal_orbit(roof_orbit)
    found: dict[StableOrbitId, dict[StableOrbitId, RationalFunc]] = {}
    queue = [diag]
    while queue:
        oid = queue.pop()
        if oid in found:
            continue
        z, n_known = _realize_roofed(spec, oid)
        roof_rep = tuple(range(spec.orbit(roof_orbit).arity))
        # group branch counts per (target, coefficient) before any Q(n) work:
        # polynomial count sums are cheap, reductions happen once per group
        groups: dict[tuple[StableOrbitId, StableOrbitId], Poly] = {}
        for br in spec.neighbor_branches(oid.left, z, n_known):
            target = spec.classify_pair(br.w_orbit, br.w, roof_orbit, roof_rep)
            key = (target, br.edge_orbit)
            cnt = br.count_poly(spec, n_known)
            groups[key] = groups[key] + cnt if key in groups else cnt
        row: dict[StableOrbitId, RationalFunc] = {}
        for (target, eorb), cnt in groups.items():
            coef = walk.coefficient(eorb)
            if coef.is_zero():
                continue
            term = coef * RationalFunc(cnt)
            row[target] = row.get(target, RF_ZERO) + term
        hold = walk.diagonal_coefficient(oid.left)
        if not hold.is_zero():
            row[oid] = row.get(oid, RF_ZERO) + hold
        found[oid] = row
        for t in row:
            if t not in found:
                queue.append(t)
    states = sorted(found)
    index = {s: i for i, s in enumerate(states)}
    rows: list[dict[int, RationalFunc]] = []
    for s in states:
        row = {index[t]: v for t, v in found[s].items()}
        total = RF_ZERO
        for v in row.values():
            total = total + v
        if total != RF_ONE:
            raise SingularMatrix(f"symbolic row sum of state {s} is {total} != 1")
        rows.append(row)
    sizes = [state_size(spec, s) for s in states]
    return RoofedOrbitChain(
        spec=spec,
        walk=walk,
        roof=roof_orbit,
        states=states,
        index=index,
        diagonal=index[diag],
        rows=rows,
        state_sizes=sizes,
    )


@dataclass
class HittingTable:
    """Expected hitting times into the roof, per roofed orbit, over Q(n)."""

    chain: RoofedOrbitChain
    values: dict[StableOrbitId, RationalFunc]
    validated_at: list[int] = field(default_factory=list)

    def value(self, oid: StableOrbitId) -> RationalFunc:
        return self.values[oid]


def _restricted(chain: RoofedOrbitChain) -> tuple[list[int], list[dict[int, RationalFunc]]]:
    keep = [i for i in range(len(chain.states)) if i != chain.diagonal]
    pos = {s: r for r, s in enumerate(keep)}
    rows = []
    for i in keep:
        rows.append({pos[j]: v for j, v in chain.rows[i].items() if j != chain.diagonal})
    return keep, rows


def hitting_symbolic(chain: RoofedOrbitChain) -> HittingTable:
    """Solve (I - P restricted away from the diagonal) Q = 1 over Q(n).

    Small chains are solved directly by fraction-free elimination.  Larger
    ones are solved exactly at a sweep of sizes and the entries recovered by
    validated rational interpolation, which detects an insufficient sweep as
    a fit failure rather than returning a wrong function.
    """
    keep, rows = _restricted(chain)
    k = len(keep)
    values: dict[StableOrbitId, RationalFunc] = {chain.states[chain.diagonal]: RF_ZERO}
    if k == 0:
        return HittingTable(chain, values)
    if k <= _SYMBOLIC_SOLVE_MAX:
        dense = [[(RF_ONE if i == j else RF_ZERO) for j in range(k)] for i in range(k)]
        for i, row in enumerate(rows):
            for j, v in row.items():
                dense[i][j] = dense[i][j] - v
        sol = solve_linear(RatMatrix(dense), [RF_ONE] * k)
    else:
        sol = _interpolated_solve(chain, k, orders=1)[0]
    for r, i in enumerate(keep):
        values[chain.states[i]] = sol[r]
    for n in (chain.n0, chain.n0 + 1, chain.n0 + 2):
        for oid, q in values.items():
            v = q(n)
            if oid != chain.states[chain.diagonal] and v <= 0:
                raise SingularMatrix(f"nonpositive hitting time {v} for {oid} at n={n}")
    return HittingTable(chain, values)


def _moment_samples(chain, keep, order: int, ns) -> dict[int, list[list[Fraction]]]:
    """Exact per-size moment solves, cached incrementally on the chain.

    Each size gets one integer-scaled copy of I - P (restricted) whose solver
    and factorization are reused across moment orders; right-hand sides are
    assembled in pure integer arithmetic over a running common denominator.
    """
    cache = chain.__dict__.setdefault("_sample_cache", {})
    k = len(keep)
    for n in ns:
        entry = cache.get(n)
        if entry is None:
            snap = chain.snapshot(n)
            scales, prow_int, data, indices, indptr = [], [], [], [], [0]
            for r in range(k):
                row = [snap[keep[r]][keep[c]] for c in range(k)]
                s = 1
                for p in row:
                    d = p.denominator
                    if s % d:
                        s = s // _igcd(s, d) * d
                cols, vals = [], []
                for c, p in enumerate(row):
                    if p:
                        cols.append(c)
                        vals.append(int(p * s))
                scales.append(s)
                prow_int.append((cols, vals))
                ents = {c: -v for c, v in zip(cols, vals)}
                ents[r] = ents.get(r, 0) + s
                for c in sorted(ents):
                    if ents[c]:
                        indices.append(c)
                        data.append(ents[c])
                indptr.append(len(indices))
            csr = scipy.sparse.csr_matrix(
                (
                    np.array(data, dtype=np.int64),
                    np.array(indices, dtype=np.int64),
                    np.array(indptr, dtype=np.int64),
                ),
                shape=(k, k),
            )
            entry = {
                "scales": scales,
                "prow_int": prow_int,
                "solver": ExactSolver(IntMatrix(csr=csr)),
                "sols": [],
            }
            cache[n] = entry
        sols = entry["sols"]
        scales = entry["scales"]
        hints = chain.__dict__.setdefault("_den_hints", {})
        while len(sols) < order:
            i = len(sols) + 1
            den_all = 1
            for _nums, dj in sols:
                if den_all % dj:
                    den_all = den_all // _igcd(den_all, dj) * dj
            b = []
            for r in range(k):
                cols, vals = entry["prow_int"][r]
                acc = scales[r] * den_all
                for j, (nums, dj) in enumerate(sols, start=1):
                    cij = comb(i, j) * (den_all // dj)
                    dot = 0
                    for c, v in zip(cols, vals):
                        dot += v * nums[c]
                    acc += cij * dot
                b.append(acc)
            # solved M x = den_all * (scaled rhs), so m_i = x / den_all
            sol = entry["solver"].solve(b, den_hint=hints.get(i, 1))
            lcm = 1
            for x in sol:
                d = x.denominator
                if lcm % d:
                    lcm = lcm // _igcd(lcm, d) * d
            sols.append(([int(x * lcm) for x in sol], lcm * den_all))
            hints[i] = max(hints.get(i, 1), lcm * den_all)
    return {
        n: [
            [Fraction(nums[r], dj) for r in range(k)]
            for nums, dj in cache[n]["sols"][:order]
        ]
        for n in ns
    }


def _fit_with_known_dens(pts, dens) -> RationalFunc | None:
    """Try fitting with an already-seen denominator: one polynomial fit each."""
    for den in dens:
        num_pts = [(n, v * den(n)) for n, v in pts if den(n) != 0]
        if len(num_pts) < 4:
            continue
        try:
            num = fit_polynomial(num_pts, len(num_pts) - 4)
        except (NoPolynomialFit, ValueError):
            continue
        cand = RationalFunc(num, den)
        if all(cand.den(n) != 0 and cand(n) == v for n, v in pts):
            return cand
    return None


def _interpolated_solve(chain, k, orders: int) -> list[list[RationalFunc]]:
    """Exact per-n solves plus validated rational interpolation, per moment order.

    Hitting-moment entries over one chain share denominators, so a successful
    fit's denominator is retried on later entries (a single polynomial fit)
    before falling back to full degree escalation.
    """
    keep, _ = _restricted(chain)
    known_dens: list = []

    def dens_to_try():
        base = sorted(set(known_dens), key=lambda d: d.degree)
        prods = []
        for i, a in enumerate(base):
            for b in base[i:]:
                p = (a * b).monic()
                if p.degree <= 30 and p not in base:
                    prods.append(p)
        return base + sorted(set(prods), key=lambda d: d.degree)

    out: list[list[RationalFunc | None]] = [[None] * k for _ in range(orders)]
    for npts, cap in ((29, 10), (45, 18)):
        ns = list(range(chain.n0, chain.n0 + npts))
        samples = _moment_samples(chain, keep, orders, ns)
        done = True
        for order in range(orders):
            cands = dens_to_try()
            for r in range(k):
                if out[order][r] is not None:
                    continue
                pts = sorted((n, samples[n][order][r]) for n in ns)
                cand = _fit_with_known_dens(pts, cands)
                if cand is None:
                    try:
                        cand = fit_rational_auto(pts, cap, cap)
                    except NoRationalFit:
                        done = False
                        continue
                if cand.den not in known_dens:
                    known_dens.append(cand.den)
                    cands = dens_to_try()
                out[order][r] = cand
        if done:
            return out
    missing = sum(1 for row in out for v in row if v is None)
    raise NoRationalFit(
        f"{missing} chain entries did not stabilize to rational functions "
        f"within the sweep; enlarge the size range"
    )


@dataclass
class MomentTable:
    """Raw moments, central moments and cumulants of hitting times, over Q(n)."""

    chain: RoofedOrbitChain
    order: int
    raw: dict[StableOrbitId, list[RationalFunc]]
    central: dict[StableOrbitId, list[RationalFunc]]
    cumulants: dict[StableOrbitId, list[RationalFunc]]

    def raw_moment(self, oid: StableOrbitId, i: int) -> RationalFunc:
        return self.raw[oid][i - 1]

    def variance(self, oid: StableOrbitId) -> RationalFunc:
        return self.central[oid][1]


def moments_symbolic(chain: RoofedOrbitChain, order: int) -> MomentTable:
    """Raw moments by the binomial first-step recursion, one system per order.

    E[tau^i] from a state is sum_w P(., w) sum_{j<=i} C(i,j) E[tau_w^j]; the
    matrix I - P restricted is shared across orders, only the right-hand side
    changes.  Central moments and cumulants follow by polynomial identities.
    """
    keep, rows = _restricted(chain)
    k = len(keep)
    diag_oid = chain.states[chain.diagonal]
    if k == 0:
        zero = [RF_ZERO] * order
        return MomentTable(chain, order, {diag_oid: zero}, {diag_oid: zero}, {diag_oid: zero})
    if k <= _SYMBOLIC_SOLVE_MAX:
        dense = [[(RF_ONE if i == j else RF_ZERO) for j in range(k)] for i in range(k)]
        for i, row in enumerate(rows):
            for j, v in row.items():
                dense[i][j] = dense[i][j] - v
        mat = RatMatrix(dense)
        raws: list[list[RationalFunc]] = []
        for i in range(1, order + 1):
            rhs = []
            for r in range(k):
                acc = RF_ONE
                for j, mj in enumerate(raws, start=1):
                    dot = RF_ZERO
                    for c, p in rows[r].items():
                        dot = dot + p * mj[c]
                    acc = acc + comb(i, j) * dot
                rhs.append(acc)
            raws.append(solve_linear(mat, rhs))
    else:
        raws = _interpolated_solve(chain, k, orders=order)

    raw: dict[StableOrbitId, list[RationalFunc]] = {diag_oid: [RF_ZERO] * order}
    central: dict[StableOrbitId, list[RationalFunc]] = {diag_oid: [RF_ZERO] * order}
    cumul: dict[StableOrbitId, list[RationalFunc]] = {diag_oid: [RF_ZERO] * order}
    for r, i in enumerate(keep):
        ms = [raws[j][r] for j in range(order)]
        raw[chain.states[i]] = ms
        central[chain.states[i]] = _central_from_raw(ms)
        cumul[chain.states[i]] = _cumulants_from_raw(ms)
    return MomentTable(chain, order, raw, central, cumul)


def _central_from_raw(ms: list[RationalFunc]) -> list[RationalFunc]:
    m1 = ms[0]
    out = []
    for kk in range(1, len(ms) + 1):
        acc = RF_ZERO
        for j in range(kk + 1):
            mj = RF_ONE if j == 0 else ms[j - 1]
            acc = acc + comb(kk, j) * mj * (-m1) ** (kk - j)
        out.append(acc)
    return out


def _cumulants_from_raw(ms: list[RationalFunc]) -> list[RationalFunc]:
    out: list[RationalFunc] = []
    for kk in range(1, len(ms) + 1):
        acc = ms[kk - 1]
        for j in range(1, kk):
            acc = acc - comb(kk - 1, j - 1) * out[j - 1] * ms[kk - j - 1]
        out.append(acc)
    return out


# -- full-state-space oracles ---------------------------------------------------


class WalkSystem:
    """Integer-scaled full-state hitting system (I - P without the target)."""

    def __init__(self, graph, walk: TransitionRelation, n: int, target: int):
        self.graph = graph
        self.n = n
        self.target = target
        spec = graph.spec
        coefs = [walk.coefficient(o)(n) for o in graph.orbit_table]
        diag_coef = {
            orb.name: walk.diagonal_coefficient(orb.name)(n) for orb in spec.vertex_orbits
        }
        scale_of: dict[str, int] = {}
        for orb in spec.vertex_orbits:
            den = diag_coef[orb.name].denominator
            for oid, c in zip(graph.orbit_table, coefs):
                if oid.left == orb.name and c.denominator != 1:
                    g = _igcd(den, c.denominator)
                    den = den // g * c.denominator
            scale_of[orb.name] = den
        keep = [v for v in range(graph.total) if v != target]
        self.pos = {v: r for r, v in enumerate(keep)}
        self.keep = keep
        data, indices, indptr = [], [], [0]
        b = []
        self.row_scale = []
        self.p_rows = []  # (cols over kept states, int coefs, diag int, scale)
        for v in keep:
            orbname = graph.orbit_of(v)
            s = scale_of[orbname]
            diag_val = int(diag_coef[orbname] * s)
            cols, vals = [], []
            for w, _cid, oidx in graph.neighbor_rows(v):
                c = int(coefs[oidx] * s)
                if w == v:
                    diag_val += c
                    continue
                if w == target:
                    continue
                cols.append(self.pos[w])
                vals.append(c)
            entries = sorted(zip(cols + [self.pos[v]], [-x for x in vals] + [s - diag_val]))
            for cc, vv in entries:
                indices.append(cc)
                data.append(vv)
            indptr.append(len(indices))
            b.append(s)
            self.row_scale.append(s)
            self.p_rows.append((cols, vals, diag_val, s))
        m = len(keep)
        csr = scipy.sparse.csr_matrix(
            (np.array(data, dtype=np.int64), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
            shape=(m, m),
        )
        self.solver = ExactSolver(IntMatrix(csr=csr))
        self.b_unit = b

    def solve_hitting(self) -> list[Fraction]:
        sol = self.solver.solve(self.b_unit)
        out = [Fraction(0)] * self.graph.total
        for r, v in enumerate(self.keep):
            out[v] = sol[r]
        return out

    def restricted_apply(self, vec: list[Fraction]) -> list[Fraction]:
        """P restricted to non-target states, applied exactly."""
        out = []
        for r, (cols, vals, diag_val, s) in enumerate(self.p_rows):
            acc = Fraction(diag_val, s) * vec[r] if diag_val else Fraction(0)
            for c, v in zip(cols, vals):
                acc += Fraction(v, s) * vec[c]
            out.append(acc)
        return out

    def solve_with_rhs(self, rhs: list[Fraction]) -> list[Fraction]:
        den = 1
        for r, s in zip(rhs, self.row_scale):
            d = (r * s).denominator
            if den % d:
                g = _igcd(den, d)
                den = den // g * d
        b = [int(r * s * den) for r, s in zip(rhs, self.row_scale)]
        sol = self.solver.solve(b)
        return [x / den for x in sol]


def hitting_oracle(graph, walk: TransitionRelation, target: int) -> list[Fraction]:
    """Exact expected hitting times into the target over the full state space.

    Solves the first-step recursion Q(x) = 1 + sum_z P(x,z) Q(z) on all
    vertices except the target; no orbit information is used.
    """
    return WalkSystem(graph, walk, graph.n, target).solve_hitting()


def moments_oracle(graph, walk: TransitionRelation, target: int, order: int) -> list[list[Fraction]]:
    """Exact raw hitting-time moments E[tau^i], i = 1..order, on the full graph."""
    sysm = WalkSystem(graph, walk, graph.n, target)
    sols: list[list[Fraction]] = []
    for i in range(1, order + 1):
        rhs = [Fraction(1)] * len(sysm.keep)
        for j, mj in enumerate(sols, start=1):
            pj = sysm.restricted_apply(mj)
            cij = comb(i, j)
            rhs = [a + cij * p for a, p in zip(rhs, pj)]
        sols.append(sysm.solve_with_rhs(rhs))
    out = []
    for sol in sols:
        full = [Fraction(0)] * graph.total
        for r, v in enumerate(sysm.keep):
            full[v] = sol[r]
        out.append(full)
    return out


def simulate_hitting(
    graph, walk: TransitionRelation, start: int, target: int, n_walks: int, seed: int, order: int = 3
) -> tuple[list[float], list[float]]:
    """Monte-Carlo raw moments of the hitting time, with standard errors."""
    n = graph.n
    rng = random.Random(seed)
    probs: dict[int, tuple[list[int], list[float]]] = {}

    def row(v: int):
        hit = probs.get(v)
        if hit is None:
            targets, weights = [], []
            dc = walk.diagonal_coefficient(graph.orbit_of(v))(n)
            if dc:
                targets.append(v)
                weights.append(float(dc))
            for w, _cid, oidx in graph.neighbor_rows(v):
                targets.append(w)
                weights.append(float(walk.coefficient(graph.orbit_table[oidx])(n)))
            hit = (targets, weights)
            probs[v] = hit
        return hit

    sums = [0.0] * order
    sqsums = [0.0] * order
    for _ in range(n_walks):
        v = start
        t = 0
        while v != target:
            targets, weights = row(v)
            v = rng.choices(targets, weights)[0]
            t += 1
        p = 1
        for i in range(order):
            p *= t
            sums[i] += p
            sqsums[i] += p * p
    means = [s / n_walks for s in sums]
    errs = []
    for i in range(order):
        var = max(sqsums[i] / n_walks - means[i] ** 2, 0.0)
        errs.append((var / n_walks) ** 0.5)
    return means, errs


# -- discrete Green's functions ---------------------------------------------------


@dataclass
class GreensTable:
    """Green's function entries per stable pair orbit, symbolic in n.

    ``entries`` holds the values in the same normalization as the classical
    worked tables (the quasi-inverse conjugated by T^{-1/2} on both sides);
    ``normalized`` carries sqrt(d_x d_y) times that — the entries of the
    quasi-inverse of the symmetric normalized Laplacian — which may involve a
    square root of a polynomial.
    """

    spec: FiGraphSpec
    weights: dict[str, RationalFunc]
    entries: dict[str, dict[StableOrbitId, RationalFunc]]
    normalized: dict[str, dict[StableOrbitId, "SqrtRational | RationalFunc"]]
    degrees: dict[str, RationalFunc]
    volume: RationalFunc
    hitting: dict[str, HittingTable]

    def entry(self, oid: StableOrbitId) -> RationalFunc:
        return self.entries[oid.right][oid]


def weight_walk(spec: FiGraphSpec, weights: dict[str, RationalFunc]) -> TransitionRelation:
    """The random walk of a weighted graph: P(u, v) = w(uv) / weighted degree."""
    degs = {}
    for orb in spec.vertex_orbits:
        d = RF_ZERO
        for cls in spec.edge_classes:
            cnt = class_count_poly(spec, orb.name, cls.name)
            if not cnt.is_zero():
                d = d + weights.get(cls.name, RF_ONE) * RationalFunc(cnt)
        degs[orb.name] = d
    coeffs: dict[StableOrbitId, RationalFunc] = {}
    for oid, (left, cls) in edge_orbit_info(spec).items():
        coeffs[oid] = weights.get(cls, RF_ONE) / degs[left]
    from .walks import VirtualRelation

    walk = TransitionRelation(VirtualRelation(spec, coeffs, name="weight-walk"), "weight-walk")
    return walk


def greens_symbolic(
    spec: FiGraphSpec,
    weights: dict[str, RationalFunc] | None = None,
    walk: TransitionRelation | None = None,
) -> GreensTable:
    """Green's function of the weighted family from hitting times.

    With weighted degrees d and volume = sum of degrees, the entry for the
    pair orbit of (x, y) is

        (1/vol) * ( (1/vol) * sum_z d_z Q(z, y)  -  Q(x, y) ),

    which reproduces the classical worked values for complete graphs and
    stars; multiplying by sqrt(d_x d_y) gives the quasi-inverse of the
    symmetric normalized Laplacian (verified by ``greens_oracle``).  Hitting
    times are invariant under global weight scaling, so the stochastic
    rescaling of the weights is implicit.
    """
    if walk is None:
        weights = weights or {}
        weights = {c.name: _as_rfc(weights.get(c.name, RF_ONE)) for c in spec.edge_classes}
        walk = weight_walk(spec, weights)
        degrees = {}
        for orb in spec.vertex_orbits:
            d = RF_ZERO
            for cls in spec.edge_classes:
                cnt = class_count_poly(spec, orb.name, cls.name)
                if not cnt.is_zero():
                    d = d + weights[cls.name] * RationalFunc(cnt)
            degrees[orb.name] = d
        ok, witness = check_reversible(spec, walk)
        if not ok:
            raise NotReversible(f"detailed balance fails on orbit {witness}")
    else:
        dist = stationary(spec, walk)
        ok, witness = check_reversible(spec, walk, dist)
        if not ok:
            raise NotReversible(f"detailed balance fails on orbit {witness}")
        weights = {}
        degrees = dict(dist.per_vertex)

    vol = RF_ZERO
    for orb in spec.vertex_orbits:
        vol = vol + RationalFunc(vertex_orbit_size(spec, orb.name)) * degrees[orb.name]

    entries: dict[str, dict[StableOrbitId, RationalFunc]] = {}
    normalized: dict[str, dict[StableOrbitId, SqrtRational | RationalFunc]] = {}
    hittables: dict[str, HittingTable] = {}
    for orb in spec.vertex_orbits:
        chain = build_roofed_chain(spec, walk, orb.name)
        table = hitting_symbolic(chain)
        hittables[orb.name] = table
        avg = RF_ZERO
        for oid, size in zip(chain.states, chain.state_sizes):
            avg = avg + RationalFunc(size) * degrees[oid.left] * table.values[oid]
        avg = avg / vol
        ent: dict[StableOrbitId, RationalFunc] = {}
        nrm: dict[StableOrbitId, SqrtRational | RationalFunc] = {}
        for oid in chain.states:
            g = (avg - table.values[oid]) / vol
            ent[oid] = g
            rad = degrees[oid.left] * degrees[orb.name]
            if rad.den == Poly.const(1):
                nrm[oid] = SqrtRational(rad.num, g).simplified()
        entries[orb.name] = ent
        normalized[orb.name] = nrm
    return GreensTable(
        spec=spec,
        weights=weights,
        entries=entries,
        normalized=normalized,
        degrees=degrees,
        volume=vol,
        hitting=hittables,
    )


def _as_rfc(v) -> RationalFunc:
    if isinstance(v, RationalFunc):
        return v
    return RationalFunc.const(v)


def greens_oracle(
    graph,
    table: GreensTable,
    n: int,
    tol: float = 1e-9,
) -> float:
    """Check the defining identities of the Green's function at a concrete n.

    Builds the normalized Laplacian L = T^{-1/2} (T - W) T^{-1/2} in floating
    point, conjugates the candidate table into the normalized scale
    M = T^{1/2} G T^{1/2}, and verifies M L = L M = I - P0 and M P0 = 0,
    where P0 projects onto the kernel direction of L.  Returns the largest
    residual in the spectral norm; raises ToleranceExceeded beyond tol.
    """
    spec = graph.spec
    N = graph.total
    wmat = np.zeros((N, N))
    wvals = {c.name: float(table.weights.get(c.name, RF_ONE)(n)) if table.weights else 1.0 for c in spec.edge_classes}
    for u in range(N):
        for w, cid, _oidx in graph.neighbor_rows(u):
            wmat[u, w] = wvals[graph.class_names[cid]]
    d = wmat.sum(axis=1)
    if np.any(d <= 0):
        raise ToleranceExceeded("isolated vertex: normalized Laplacian undefined")
    tsqrt = np.sqrt(d)
    lap = np.diag(d) - wmat
    norm_lap = lap / np.outer(tsqrt, tsqrt)

    gmat = np.zeros((N, N))
    for x in range(N):
        ox, tx = graph.label_of(x)
        for y in range(N):
            oy, ty = graph.label_of(y)
            oid = spec.classify_pair(ox, tx, oy, ty)
            gmat[x, y] = float(table.entries[oy][oid](n))
    m = gmat * np.outer(tsqrt, tsqrt)

    vol = d.sum()
    phi0 = tsqrt / np.sqrt(vol)
    p0 = np.outer(phi0, phi0)
    eye = np.eye(N)
    res = max(
        np.linalg.norm(m @ norm_lap - (eye - p0), 2),
        np.linalg.norm(norm_lap @ m - (eye - p0), 2),
        np.linalg.norm(m @ p0, 2),
    )
    if res > tol:
        raise ToleranceExceeded(
            f"Green's identities violated at n={n}: residual {res:.3e} > {tol}", residual=res
        )
    return float(res)
