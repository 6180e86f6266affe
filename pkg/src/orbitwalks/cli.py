"""Command-line interface: family reports, structure polynomials, verification.

Reports are written as CSV plus JSON with every number serialized exactly
(``p/q`` strings); identical configurations produce byte-identical files.
Exit codes: 0 all validations passed, 2 validation mismatch, 3 stabilization
not reached (enlarge the size range), 4 input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import (
    NoPolynomialFit,
    NoRationalFit,
    OrbitWalksError,
    SpecError,
    TooSmallN,
    UnknownFamily,
)
from .exactnum import Poly, RationalFunc, fit_polynomial
from .fispec import (
    FiGraphSpec,
    StableOrbitId,
    builtin_family,
    instantiate,
    registry_names,
    spec_from_json,
    spec_to_json,
    vertex_orbit_size,
)
from .hitting import (
    build_roofed_chain,
    greens_oracle,
    greens_symbolic,
    hitting_oracle,
    hitting_symbolic,
    moments_oracle,
    moments_symbolic,
)
from .mixing import (
    adjacency_relation,
    cutoff_diagnostic,
    mixing_sweep,
    spectrum_sweep,
    tv_profile,
)
from .walks import cached_graph, rho, stationary, walk_from_selector

EXIT_OK = 0
EXIT_MISMATCH = 2
EXIT_UNSTABLE = 3
EXIT_INPUT = 4


@dataclass
class RunConfig:
    """Parsed invocation: family, walk, size range and output options."""

    family: str | None = None
    spec_path: str | None = None
    walk: str = "simple"
    n_range: tuple[int, int] | None = None
    epsilons: tuple[Fraction, ...] = (Fraction(1, 4),)
    order: int = 2
    out: str | None = None
    jobs: int = 1
    seed: int = 2024

    def load_spec(self) -> FiGraphSpec:
        if self.spec_path:
            text = Path(self.spec_path).read_text()
            return spec_from_json(text)
        if not self.family:
            raise SpecError("either --family or --spec is required")
        return builtin_family(self.family)

    def resolved_range(self, spec: FiGraphSpec) -> tuple[int, int]:
        if self.n_range is None:
            return (spec.n0, spec.n0 + 9)
        lo, hi = self.n_range
        if lo < spec.n0:
            raise SpecError(
                f"n-range starts at {lo} but {spec.name} stabilizes at n0={spec.n0}"
            )
        return lo, hi


def _frac_str(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)


def _write_report(out_dir: str | None, stem: str, rows: list[dict], meta: dict) -> None:
    if out_dir is None:
        return
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    if rows:
        cols = list(rows[0].keys())
        with open(path / f"{stem}.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=cols)
            writer.writeheader()
            writer.writerows(rows)
    with open(path / f"{stem}.json", "w") as fh:
        json.dump({"meta": meta, "rows": rows}, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- structure polynomials -------------------------------------------------------


@dataclass
class StructurePolyReport:
    """Composition of two orbit indicator relations in the orbit basis."""

    left: StableOrbitId
    right: StableOrbitId
    coefficients: dict[StableOrbitId, Poly]
    validated_n: list[int]


def structure_polynomials(
    spec: FiGraphSpec,
    o1: StableOrbitId,
    o2: StableOrbitId,
    n_range: tuple[int, int] | None = None,
) -> StructurePolyReport:
    """Fit the coefficients expressing r^{o1} . r^{o2} over the orbit basis.

    Composition counts are taken exactly on concrete graphs at each size,
    decomposed per target pair orbit, and fit as polynomials with 3 held-out
    sizes; integer-valuedness is what makes the fits polynomials at all.
    """
    if o1.right != o2.left:
        raise SpecError("inner orbits of the composition do not match")
    lo, hi = n_range if n_range else (spec.n0, spec.n0 + 8)
    if hi - lo + 1 < 5:
        raise SpecError("structure polynomials need at least 5 sizes")
    counts: dict[StableOrbitId, dict[int, Fraction]] = {}
    targets: set[StableOrbitId] = set()
    samples = list(range(lo, hi + 1))
    for n in samples:
        g = cached_graph(spec, n, with_adjacency=False)
        mids = g.vertices[o1.right]
        # representatives (x, y) per realized target orbit
        reps: dict[StableOrbitId, tuple[tuple, tuple]] = {}
        for x in g.vertices[o1.left][:1]:
            for y in g.vertices[o2.right]:
                t = spec.classify_pair(o1.left, x, o2.right, y)
                reps.setdefault(t, (x, y))
        targets.update(reps)
        for t, (x, y) in reps.items():
            c = 0
            for z in mids:
                if (
                    spec.classify_pair(o1.left, x, o1.right, z) == o1
                    and spec.classify_pair(o2.left, z, o2.right, y) == o2
                ):
                    c += 1
            counts.setdefault(t, {})[n] = Fraction(c)
    coeffs: dict[StableOrbitId, Poly] = {}
    validated = samples[-3:]
    for t in sorted(targets):
        pts = sorted(counts[t].items())
        missing = [n for n in samples if n not in counts[t]]
        for n in missing:
            pts.append((n, Fraction(0)))
        pts.sort()
        poly = fit_polynomial(pts, spec.max_arity() * 2)
        for n, v in pts:
            if poly(n) != v or poly(n).denominator != 1:
                raise NoPolynomialFit(f"structure coefficient for {t} not integral")
        if not poly.is_zero():
            coeffs[t] = poly
    return StructurePolyReport(o1, o2, coeffs, validated)


# -- verification suite -----------------------------------------------------------


def verify_family(
    spec: FiGraphSpec,
    walks: tuple[str, ...] = ("simple", "lazy:1/2", "weighted"),
    extra_sizes: int = 4,
    order: int = 2,
    log=None,
) -> list[dict]:
    """Oracle-equivalence suite: symbolic moments against full-state solves.

    For each walk and each n in [n0, n0 + extra_sizes - 1], specializes the
    symbolic hitting times and raw moments on every roofed orbit and compares
    with the uncollapsed exact solve on the concrete graph, entry for entry.
    """
    rows = []
    for wname in walks:
        walk = walk_from_selector(spec, wname)
        tables = {}
        for orb in spec.vertex_orbits:
            chain = build_roofed_chain(spec, walk, orb.name)
            mt = moments_symbolic(chain, order)
            ht = hitting_symbolic(chain)
            tables[orb.name] = (chain, ht, mt)
        for n in range(spec.n0, spec.n0 + extra_sizes):
            g = cached_graph(spec, n)
            for orb in spec.vertex_orbits:
                chain, ht, mt = tables[orb.name]
                rep = spec.orbit(orb.name).canonical(spec.canonical_rep(orb.name))
                target = g.index_of(orb.name, rep)
                oq = hitting_oracle(g, walk, target)
                om = moments_oracle(g, walk, target, order)
                match = True
                for idx in range(g.total):
                    o, v = g.label_of(idx)
                    oid = spec.classify_pair(o, v, orb.name, rep)
                    if ht.values[oid](n) != oq[idx]:
                        match = False
                        break
                    for i in range(order):
                        if mt.raw[oid][i](n) != om[i][idx]:
                            match = False
                            break
                    if not match:
                        break
                ht.validated_at.append(n)
                rows.append(
                    {
                        "family": spec.name,
                        "walk": wname,
                        "roof_orbit": orb.name,
                        "n": n,
                        "states": g.total,
                        "match": match,
                    }
                )
                if log:
                    log(
                        f"  {spec.name:>20} {wname:>9} roof={orb.name:<7} n={n:<3}"
                        f" |V|={g.total:<6} {'ok' if match else 'MISMATCH'}"
                    )
    return rows


# -- subcommands ------------------------------------------------------------------


def cmd_instantiate(cfg: RunConfig, args) -> int:
    spec = cfg.load_spec()
    n = args.n
    g = instantiate(spec, n)
    print(f"family {spec.name} at n={n}: {g.total} vertices, {g.edge_count()} edges")
    for name, cnt in sorted(g.vertex_counts().items()):
        poly = vertex_orbit_size(spec, name)
        print(f"  orbit {name}: {cnt} vertices (size polynomial {poly})")
    sample = []
    for idx in range(min(4, g.total)):
        orb, v = g.label_of(idx)
        nbrs = [g.label_of(int(w))[1] for w in g.neighbors(idx)][:4]
        sample.append(f"  {orb}{v} ~ {nbrs}")
    print("adjacency sample:")
    print("\n".join(sample))
    print("canonical spec:")
    print(spec_to_json(spec))
    return EXIT_OK


def cmd_structure_polys(cfg: RunConfig, args) -> int:
    spec = cfg.load_spec()
    o1 = StableOrbitId.from_key(args.left)
    o2 = StableOrbitId.from_key(args.right)
    rng = cfg.n_range
    report = structure_polynomials(spec, o1, o2, rng)
    rows = [
        {
            "family": spec.name,
            "left": report.left.key(),
            "right": report.right.key(),
            "target": t.key(),
            "coefficient": str(p),
            "validated_n": " ".join(map(str, report.validated_n)),
        }
        for t, p in sorted(report.coefficients.items())
    ]
    for r in rows:
        print(f"{r['target']}: {r['coefficient']}")
    _write_report(cfg.out, "structure_polys", rows, {"family": spec.name})
    return EXIT_OK


def _hitting_rows(cfg: RunConfig, spec: FiGraphSpec, quantities: tuple[str, ...]) -> tuple[list[dict], bool]:
    walk = walk_from_selector(spec, cfg.walk)
    lo, hi = cfg.resolved_range(spec)
    rows = []
    all_ok = True
    for orb in spec.vertex_orbits:
        chain = build_roofed_chain(spec, walk, orb.name)
        ht = hitting_symbolic(chain)
        mt = moments_symbolic(chain, cfg.order) if any(q != "Q" for q in quantities) else None
        rep = spec.orbit(orb.name).canonical(spec.canonical_rep(orb.name))
        oracles = {}
        for n in range(lo, hi + 1):
            g = cached_graph(spec, n)
            target = g.index_of(orb.name, rep)
            oq = hitting_oracle(g, walk, target)
            om = moments_oracle(g, walk, target, cfg.order) if mt else None
            oracles[n] = (g, target, oq, om)
        for oid in chain.states:
            quants: list[tuple[str, RationalFunc, int]] = []
            if "Q" in quantities:
                quants.append(("Q", ht.values[oid], 0))
            if mt:
                quants.append(("var", mt.variance(oid), 1))
                for i in range(2, cfg.order + 1):
                    quants.append((f"cum_{i}", mt.cumulants[oid][i - 1], i - 1))
            for qname, sym, _lvl in quants:
                for n in range(lo, hi + 1):
                    g, target, oq, om = oracles[n]
                    exact = sym(n)
                    # oracle value per quantity
                    u, v = spec.realize_pair(oid)
                    try:
                        idx = g.index_of(oid.left, u)
                    except KeyError:
                        continue
                    if qname == "Q":
                        ov = oq[idx]
                    elif qname == "var":
                        ov = om[1][idx] - om[0][idx] ** 2
                    else:
                        ov = None
                    ok = ov is None or ov == exact
                    all_ok = all_ok and ok
                    rows.append(
                        {
                            "family": spec.name,
                            "walk": cfg.walk,
                            "roof_orbit": orb.name,
                            "pair_orbit": oid.key(),
                            "quantity": qname,
                            "symbolic": str(sym),
                            "n": n,
                            "exact_value": _frac_str(exact),
                            "oracle_value": _frac_str(ov) if ov is not None else "",
                            "match": ok,
                        }
                    )
    return rows, all_ok


def cmd_hitting(cfg: RunConfig, args) -> int:
    spec = cfg.load_spec()
    rows, ok = _hitting_rows(cfg, spec, ("Q",))
    for r in rows:
        if r["n"] == cfg.resolved_range(spec)[0]:
            print(f"{r['pair_orbit']}: Q = {r['symbolic']}")
    matches = sum(1 for r in rows if r["match"])
    print(f"oracle matches: {matches}/{len(rows)}")
    _write_report(cfg.out, "hitting", rows, {"family": spec.name, "walk": cfg.walk})
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_moments(cfg: RunConfig, args) -> int:
    spec = cfg.load_spec()
    rows, ok = _hitting_rows(cfg, spec, ("Q", "var"))
    shown = set()
    for r in rows:
        key = (r["pair_orbit"], r["quantity"])
        if key not in shown:
            shown.add(key)
            print(f"{r['pair_orbit']}: {r['quantity']} = {r['symbolic']}")
    _write_report(cfg.out, "moments", rows, {"family": spec.name, "walk": cfg.walk})
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_greens(cfg: RunConfig, args) -> int:
    spec = cfg.load_spec()
    table = greens_symbolic(spec)
    lo, hi = cfg.resolved_range(spec)
    rows = []
    ok = True
    for roof, entries in sorted(table.entries.items()):
        for oid, gval in sorted(entries.items()):
            nrm = table.normalized.get(roof, {}).get(oid)
            for n in range(lo, hi + 1):
                rows.append(
                    {
                        "family": spec.name,
                        "walk": "weight-walk",
                        "roof_orbit": roof,
                        "pair_orbit": oid.key(),
                        "quantity": "greens",
                        "symbolic": str(gval),
                        "normalized": str(nrm) if nrm is not None else "",
                        "n": n,
                        "exact_value": _frac_str(gval(n)),
                        "oracle_value": "",
                        "match": True,
                    }
                )
    for n in (lo, min(hi, lo + 3)):
        g = cached_graph(spec, n)
        try:
            res = greens_oracle(g, table, n)
            print(f"greens oracle at n={n}: residual {res:.3e}")
        except OrbitWalksError as exc:
            print(f"greens oracle at n={n}: {exc}")
            ok = False
    for roof, entries in sorted(table.entries.items()):
        for oid, gval in sorted(entries.items()):
            print(f"G[{oid.key()}] = {gval}")
    _write_report(cfg.out, "greens", rows, {"family": spec.name})
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_mixing(cfg: RunConfig, args) -> int:
    spec = cfg.load_spec()
    walk = walk_from_selector(spec, cfg.walk)
    lo, hi = cfg.resolved_range(spec)
    dist = stationary(spec, walk)
    rows = []
    summary = []
    for n in range(lo, hi + 1):
        prof = tv_profile(spec, walk, n, epsilons=cfg.epsilons, dist=dist)
        for t, d in prof.d:
            rows.append(
                {"family": spec.name, "walk": cfg.walk, "n": n, "t": t, "d_t": _frac_str(d)}
            )
        for eps in cfg.epsilons:
            summary.append(
                {
                    "family": spec.name,
                    "walk": cfg.walk,
                    "n": n,
                    "eps": _frac_str(eps) if isinstance(eps, Fraction) else repr(eps),
                    "t_mix": prof.t_mix[eps],
                }
            )
    for s in summary:
        print(f"n={s['n']} eps={s['eps']}: t_mix = {s['t_mix']}")
    _write_report(cfg.out, "mixing_profile", rows, {"family": spec.name, "walk": cfg.walk})
    _write_report(cfg.out, "mixing_summary", summary, {"family": spec.name, "walk": cfg.walk})
    return EXIT_OK


def cmd_rho(cfg: RunConfig, args) -> int:
    spec = cfg.load_spec()
    walk = walk_from_selector(spec, cfg.walk)
    lo, hi = cfg.resolved_range(spec)
    prof = rho(spec, walk, (lo, hi))
    rows = [
        {"family": spec.name, "walk": cfg.walk, "n": n, "rho": _frac_str(v)}
        for n, v in prof.values
    ]
    print(f"rho(n) = {prof.fitted}")
    print(f"witness: vertex orbit {prof.witness[0]}, edge class {prof.witness[1]}")
    _write_report(
        cfg.out,
        "rho",
        rows,
        {"family": spec.name, "walk": cfg.walk, "fitted": str(prof.fitted)},
    )
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, args) -> int:
    spec = cfg.load_spec()
    lo, hi = cfg.resolved_range(spec)
    report = spectrum_sweep(spec, adjacency_relation(spec), (lo, hi))
    rows = []
    for n in sorted(report.clusters):
        for val, mult in report.clusters[n]:
            rows.append(
                {
                    "family": spec.name,
                    "relation": report.relation_name,
                    "n": n,
                    "eigenvalue": f"{val:.17g}",
                    "multiplicity": mult,
                }
            )
    print(f"distinct eigenvalue counts: {report.distinct_counts}")
    print(f"stable: {report.stable_count}; multiplicity fits validated: {report.validated}")
    if report.multiplicity_polys:
        for p in report.multiplicity_polys:
            print(f"  multiplicity ~ {p}")
    _write_report(cfg.out, "spectrum", rows, {"family": spec.name})
    return EXIT_OK if report.stable_count else EXIT_MISMATCH


def cmd_cutoff(cfg: RunConfig, args) -> int:
    spec = cfg.load_spec()
    walk = walk_from_selector(spec, cfg.walk)
    lo, hi = cfg.resolved_range(spec)
    eps = cfg.epsilons[0]
    diag = cutoff_diagnostic(spec, walk, (lo, hi), eps=eps)
    rows = [
        {"family": spec.name, "walk": cfg.walk, "n": n, "width": w} for n, w in diag.widths
    ]
    print(f"window widths: {diag.widths}")
    print(f"trend: {diag.trend}")
    _write_report(cfg.out, "cutoff", rows, {"family": spec.name, "trend": diag.trend})
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    if cfg.family:
        fams = [cfg.family]
    elif cfg.spec_path:
        fams = [None]
    else:
        fams = registry_names()
    all_rows = []
    for fam in fams:
        spec = builtin_family(fam) if fam else cfg.load_spec()
        print(f"verifying {spec.name} ...")
        rows = verify_family(spec, order=cfg.order, log=print)
        all_rows.extend(rows)
    bad = [r for r in all_rows if not r["match"]]
    print(f"verify: {len(all_rows) - len(bad)}/{len(all_rows)} checks passed")
    _write_report(cfg.out, "verify", all_rows, {"families": [f or "custom" for f in fams]})
    return EXIT_OK if not bad else EXIT_MISMATCH


# -- argument parsing ---------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", help="built-in family name, e.g. complete or kneser:2")
    p.add_argument("--spec", dest="spec_path", help="path to a family spec JSON file")
    p.add_argument("--walk", default="simple", help="simple | lazy:<p> | weighted | custom:<file>")
    p.add_argument("--n-range", dest="n_range", help="inclusive size range a:b")
    p.add_argument("--eps", default="1/4", help="comma-separated thresholds, e.g. 1/4,1/10")
    p.add_argument("--order", type=int, default=2, help="highest moment order")
    p.add_argument("--out", help="report output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallelism degree (reports stay ordered)")
    p.add_argument("--seed", type=int, default=2024, help="seed for the simulation oracle")


def _parse_config(args) -> RunConfig:
    n_range = None
    if args.n_range:
        a, _, b = args.n_range.partition(":")
        n_range = (int(a), int(b))
    eps = tuple(Fraction(e) for e in str(args.eps).split(","))
    return RunConfig(
        family=args.family,
        spec_path=args.spec_path,
        walk=args.walk,
        n_range=n_range,
        epsilons=eps,
        order=args.order,
        out=args.out,
        jobs=args.jobs,
        seed=args.seed,
    )


_COMMANDS = {
    "instantiate": cmd_instantiate,
    "structure-polys": cmd_structure_polys,
    "hitting": cmd_hitting,
    "moments": cmd_moments,
    "greens": cmd_greens,
    "mixing": cmd_mixing,
    "rho": cmd_rho,
    "spectrum": cmd_spectrum,
    "cutoff": cmd_cutoff,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitwalks",
        description="Exact walk statistics on symmetric graph families",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("instantiate", help="build one member and print a summary")
    p.add_argument("--n", type=int, required=True)
    _add_common(p)
    p = sub.add_parser("structure-polys", help="fit composition coefficients of two pair orbits")
    p.add_argument("--left", required=True, help="pair orbit key, e.g. 'v|v|0.1'")
    p.add_argument("--right", required=True)
    _add_common(p)
    for name in ("hitting", "moments", "greens", "mixing", "rho", "spectrum", "cutoff", "verify"):
        p = sub.add_parser(name)
        _add_common(p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _parse_config(args)
        return _COMMANDS[args.command](cfg, args)
    except (UnknownFamily, SpecError, TooSmallN, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_INPUT
    except (NoRationalFit, NoPolynomialFit) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_UNSTABLE
    except OrbitWalksError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
