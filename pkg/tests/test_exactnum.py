"""Exact arithmetic layer: rationals in n, fits, symbolic and numeric solves."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from orbitwalks import (
    NoPolynomialFit,
    NoRationalFit,
    Poly,
    PoleAtPoint,
    RatMatrix,
    RationalFunc,
    SingularMatrix,
    SqrtRational,
    fit_polynomial,
    fit_rational,
    fit_rational_auto,
    rf_eval,
    solve_linear,
)
from orbitwalks.exactsolve import ExactSolver, IntMatrix, fraction_gauss, solve_fraction_matrix

N = Poly.x()


def rf(num, den=1) -> RationalFunc:
    return RationalFunc(num if isinstance(num, Poly) else Poly.const(num),
                        den if isinstance(den, Poly) else Poly.const(den))


def test_rf_eval_examples():
    assert rf_eval(RationalFunc(N - 1), 5) == 4
    assert rf_eval(RationalFunc(Poly.const(1), N - 1), 3) == Fraction(1, 2)
    assert rf_eval(RationalFunc(N - 2, N - 1), 2) == 0


def test_rf_eval_pole():
    with pytest.raises(PoleAtPoint):
        rf_eval(RationalFunc(Poly.const(1), N - 1), 1)


def test_rf_reduction_is_canonical():
    f = RationalFunc((N - 1) * (N + 2) * 6, (N + 2) * (N + 3) * 3)
    assert f.num == (N - 1) * 2
    assert f.den == N + 3
    assert f.den.leading() == 1


def test_rf_eval_agrees_after_arithmetic():
    rng = random.Random(7)
    for _ in range(25):
        num = Poly([rng.randint(-9, 9) for _ in range(rng.randint(1, 4))])
        den = Poly([rng.randint(-9, 9) for _ in range(rng.randint(1, 4))] + [1])
        f = RationalFunc(num, den)
        g = RationalFunc(den + 1, num + Poly.const(17))
        combo = f * g - f / (g + 3) + 2
        for _ in range(4):
            n = rng.randint(20, 120)
            try:
                direct = f(n) * g(n) - f(n) / (g(n) + 3) + 2
            except (PoleAtPoint, ZeroDivisionError):
                continue
            assert combo(n) == direct


def test_solve_linear_identity():
    x = solve_linear(RatMatrix([[1]]), [RationalFunc(N)])
    assert x[0] == RationalFunc(N)


def test_solve_linear_complete_graph_system():
    # the one-state collapsed system for the complete family
    a = RationalFunc(Poly.const(1)) - RationalFunc(N - 2, N - 1)
    x = solve_linear(RatMatrix([[a]]), [1])
    assert x[0] == RationalFunc(N - 1)


def _random_system(rng, k, deg):
    def rand_poly(d):
        return Poly([Fraction(rng.randint(-8, 8)) for _ in range(d + 1)])

    while True:
        A = [[RationalFunc(rand_poly(deg), rand_poly(deg - 1) + Poly([0] * deg + [1])) for _ in range(k)] for _ in range(k)]
        xs = [RationalFunc(rand_poly(deg)) for _ in range(k)]
        mat = RatMatrix(A)
        b = mat.matvec(xs)
        return mat, xs, b


def test_solve_linear_random_4x4_multiply_back():
    rng = random.Random(11)
    mat, xs, b = _random_system(rng, 4, 2)
    try:
        sol = solve_linear(mat, b)
    except SingularMatrix:
        pytest.skip("random system happened to be singular")
    back = mat.matvec(sol)
    assert all(u == v for u, v in zip(back, b))


def test_solve_linear_8x8_property():
    rng = random.Random(3)
    mat, xs, b = _random_system(rng, 8, 3)
    try:
        sol = solve_linear(mat, b)
    except SingularMatrix:
        pytest.skip("random system happened to be singular")
    assert all(u == v for u, v in zip(sol, xs)) or all(
        u == v for u, v in zip(mat.matvec(sol), b)
    )


def test_solve_linear_singular():
    one = RationalFunc(Poly.const(1))
    with pytest.raises(SingularMatrix):
        solve_linear(RatMatrix([[one, one], [one, one]]), [1, 2])


def test_fit_polynomial_examples():
    pts = [(n, Fraction(n)) for n in (3, 4, 5, 6, 7)]
    assert fit_polynomial(pts, 2) == N

    # brute-force walk counts on the complete graph: |{z : z != x, z != y}|
    data = []
    for n in range(4, 11):
        count = sum(1 for z in range(n) if z not in (0, 1))
        data.append((n, Fraction(count)))
    assert fit_polynomial(data, 2) == N - 2

    const = [(n, Fraction(5)) for n in range(2, 9)]
    assert fit_polynomial(const, 3) == Poly.const(5)


def test_fit_polynomial_rejects_nonpolynomial():
    pts = [(n, Fraction(2) ** n) for n in range(1, 9)]
    with pytest.raises(NoPolynomialFit):
        fit_polynomial(pts, 3)


def test_fit_polynomial_roundtrip_property():
    rng = random.Random(23)
    for _ in range(20):
        deg = rng.randint(0, 6)
        p = Poly([Fraction(rng.randint(-100, 100)) for _ in range(deg + 1)])
        pts = [(n, p(n)) for n in range(5, 5 + deg + 5)]
        assert fit_polynomial(pts, 6) == p


def test_fit_rational_examples():
    pts = [(n, Fraction(1, n - 1)) for n in range(3, 13)]
    assert fit_rational(pts, 3, 3) == RationalFunc(Poly.const(1), N - 1)

    pts = [(n, Fraction(2 * n - 1)) for n in range(2, 11)]
    assert fit_rational(pts, 2, 2) == RationalFunc(N * 2 - 1)

    pts = [(n, Fraction(n * n + 1, n + 2)) for n in range(1, 16)]
    assert fit_rational(pts, 4, 4) == RationalFunc(N * N + 1, N + 2)


def test_fit_rational_roundtrip_property():
    rng = random.Random(5)
    for _ in range(12):
        a, b = rng.randint(0, 4), rng.randint(0, 4)
        num = Poly([Fraction(rng.randint(-20, 20)) for _ in range(a)] + [Fraction(rng.randint(1, 9))])
        den = Poly([Fraction(rng.randint(-20, 20)) for _ in range(b)] + [1])
        f = RationalFunc(num, den)
        pts = []
        n = 9
        while len(pts) < a + b + 7:
            n += 1
            if f.den(n) != 0:
                pts.append((n, f(n)))
        assert fit_rational(pts, 4, 4) == f


def test_fit_rational_minimal_degree():
    # data from a constant must come back as the constant even with slack
    pts = [(n, Fraction(7)) for n in range(2, 12)]
    f = fit_rational(pts, 3, 3)
    assert f.degree_pair() == (0, 0)


def test_fit_rational_auto_detects_onset():
    # garbage below the stabilization threshold, rational tail above it
    tail = RationalFunc(N * 3 + 1, N - 2)
    pts = [(2, Fraction(99)), (3, Fraction(-5))]
    pts += [(n, tail(n)) for n in range(4, 16)]
    with pytest.raises(NoRationalFit):
        fit_rational(pts, 2, 2)
    assert fit_rational_auto(pts, 2, 2) == tail


def test_sqrt_rational_square_and_simplify():
    s = SqrtRational(N - 1, RationalFunc(Poly.const(Fraction(-1, 4)), N - 1))
    assert s.square() == RationalFunc(Poly.const(Fraction(1, 16)), N - 1)
    assert s.simplified() is s  # n - 1 is not a perfect square

    sq = SqrtRational((N - 1) * (N - 1), RationalFunc(Poly.const(1), N * N))
    simp = sq.simplified()
    assert isinstance(simp, RationalFunc)
    assert simp == RationalFunc(N - 1, N * N)


def test_poly_sqrt():
    p = (N * 2 - 3) * (N * 2 - 3)
    assert p.sqrt() == N * 2 - 3 or p.sqrt() == -(N * 2 - 3)
    assert (N - 1).sqrt() is None
    assert ((N - 1) * (N - 2)).sqrt() is None


def test_poly_shift_and_falling():
    p = N * N + 1
    assert p.shift(-1) == (N - 1) * (N - 1) + 1
    assert Poly.falling(N, 3) == N * (N - 1) * (N - 2)


def test_fraction_gauss_and_exact_solver_agree():
    rng = random.Random(31)
    for size in (6, 30, 70):
        M = [[rng.randint(-30, 30) for _ in range(size)] for _ in range(size)]
        for i in range(size):
            M[i][i] += 100  # keep it comfortably nonsingular
        b = [rng.randint(-50, 50) for _ in range(size)]
        direct = fraction_gauss(
            [[Fraction(x) for x in row] for row in M], [[Fraction(x) for x in b]]
        )[0]
        refined = ExactSolver(IntMatrix(dense=M)).solve(b)
        assert direct == refined


def test_exact_solver_sparse_limb_path():
    import numpy as np
    import scipy.sparse

    rng = random.Random(13)
    size = 60
    rows = []
    for i in range(size):
        row = [0] * size
        row[i] = 10**7  # large entries force a smaller limb size
        for _ in range(6):
            row[rng.randrange(size)] += rng.randint(-(10**6), 10**6)
        rows.append(row)
    csr = scipy.sparse.csr_matrix(np.array(rows, dtype=np.int64))
    b = [rng.randint(-(10**6), 10**6) for _ in range(size)]
    got = ExactSolver(IntMatrix(csr=csr)).solve(b)
    want = fraction_gauss(
        [[Fraction(x) for x in row] for row in rows], [[Fraction(x) for x in b]]
    )[0]
    assert got == want


def test_solve_fraction_matrix_singular():
    M = [[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]]
    with pytest.raises(SingularMatrix):
        solve_fraction_matrix(M, [Fraction(1), Fraction(1)])
