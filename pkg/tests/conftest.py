"""Shared cached constructors so expensive objects build once per session."""

from __future__ import annotations

from functools import lru_cache

from orbitwalks import builtin_family, instantiate
from orbitwalks.hitting import build_roofed_chain, hitting_symbolic, moments_symbolic
from orbitwalks.walks import lazy_walk, simple_walk, stationary, weighted_walk


@lru_cache(maxsize=None)
def family(name: str):
    return builtin_family(name)


@lru_cache(maxsize=None)
def walk(name: str, kind: str):
    spec = family(name)
    if kind == "simple":
        return simple_walk(spec)
    if kind == "weighted":
        return weighted_walk(spec)
    if kind.startswith("lazy"):
        from fractions import Fraction

        return lazy_walk(spec, Fraction(kind.split(":")[1]))
    raise ValueError(kind)


@lru_cache(maxsize=None)
def graph(name: str, n: int, with_adjacency: bool = True):
    from orbitwalks.walks import cached_graph

    return cached_graph(family(name), n, with_adjacency)


@lru_cache(maxsize=None)
def chain(name: str, kind: str, roof: str):
    return build_roofed_chain(family(name), walk(name, kind), roof)


@lru_cache(maxsize=None)
def hitting_table(name: str, kind: str, roof: str):
    return hitting_symbolic(chain(name, kind, roof))


@lru_cache(maxsize=None)
def moment_table(name: str, kind: str, roof: str, order: int):
    return moments_symbolic(chain(name, kind, roof), order)


@lru_cache(maxsize=None)
def stationary_dist(name: str, kind: str):
    return stationary(family(name), walk(name, kind))
