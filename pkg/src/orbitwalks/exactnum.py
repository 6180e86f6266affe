"""Exact arithmetic: rationals, polynomials in n, rational functions, radicals.

Everything here is over Q.  ``BigRational`` is the standard-library Fraction,
which already maintains the reduced-form / positive-denominator invariants.
Polynomials are stored densely by ascending degree.  Rational functions are
kept in lowest terms with a monic denominator, so equality is structural.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NoPolynomialFit, NoRationalFit, PoleAtPoint, SingularMatrix

BigRational = Fraction


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class Poly:
    """Univariate polynomial over Q, coefficients ascending; () is the zero poly."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @staticmethod
    def const(c) -> "Poly":
        return Poly([_frac(c)])

    # x = the parameter n
    @staticmethod
    def x() -> "Poly":
        return Poly([0, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> Fraction:
        if not self.coeffs:
            return Fraction(0)
        return self.coeffs[-1]

    def __call__(self, n) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * n + c
        return acc

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __add__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    __radd__ = __add__

    def __sub__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return Poly([c * other for c in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly(), self
        quot = [Fraction(0)] * (dq + 1)
        lead = other.leading()
        for i in range(dq, -1, -1):
            if len(rem) != i + len(other.coeffs):
                continue
            c = rem[-1] / lead
            quot[i] = c
            for j, oc in enumerate(other.coeffs):
                rem[i + j] -= c * oc
            while rem and rem[-1] == 0:
                rem.pop()
        return Poly(quot), Poly(rem)

    def __floordiv__(self, other: "Poly") -> "Poly":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ValueError("inexact polynomial division")
        return q

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        lead = self.leading()
        return Poly([c / lead for c in self.coeffs])

    def gcd(self, other: "Poly") -> "Poly":
        """Monic gcd via integer pseudo-remainders with primitive-part reduction."""
        a = _int_primitive(self.coeffs)
        b = _int_primitive(other.coeffs)
        if len(a) < len(b):
            a, b = b, a
        while b:
            a, b = b, _int_primitive_seq(_pseudo_rem(a, b))
        if not a:
            return Poly()
        return Poly(a).monic()

    def lcm(self, other: "Poly") -> "Poly":
        if self.is_zero() or other.is_zero():
            return Poly()
        return ((self * other) // self.gcd(other)).monic()

    def shift(self, offset: int) -> "Poly":
        """Compose with (n + offset)."""
        out = Poly()
        base = Poly([offset, 1])
        for c in reversed(self.coeffs):
            out = out * base + Poly.const(c)
        return out

    def sqrt(self) -> "Poly | None":
        """Exact polynomial square root, or None if not a perfect square."""
        if self.is_zero():
            return Poly()
        if self.degree % 2 != 0:
            return None
        lead = self.leading()
        root_lead2 = _frac_sqrt(lead)
        if root_lead2 is None:
            return None
        half = self.degree // 2
        root = [Fraction(0)] * (half + 1)
        root[half] = root_lead2
        # Solve coefficient equations from the top down.
        for i in range(half - 1, -1, -1):
            # coefficient of n^(i+half) in root^2 must match self
            k = i + half
            target = self.coeffs[k] if k < len(self.coeffs) else Fraction(0)
            acc = Fraction(0)
            for j in range(i + 1, half):
                if i + half - j <= half:
                    acc += root[j] * root[i + half - j]
            root[i] = (target - acc) / (2 * root[half])
        cand = Poly(root)
        if cand * cand == self:
            return cand
        if cand * cand == -1 * self:
            return None
        # try the negative branch just in case of sign conventions
        cand2 = -cand
        if cand2 * cand2 == self:
            return cand2
        return None

    @staticmethod
    def falling(start: "Poly", k: int) -> "Poly":
        """(start)(start-1)...(start-k+1)."""
        out = Poly.const(1)
        for i in range(k):
            out = out * (start - i)
        return out

    @staticmethod
    def lagrange(points: Sequence[tuple[int, Fraction]]) -> "Poly":
        """Interpolating polynomial through the given (n, value) points."""
        xs = [p[0] for p in points]
        if len(set(xs)) != len(xs):
            raise ValueError("interpolation points must have distinct n")
        result = Poly()
        for i, (xi, yi) in enumerate(points):
            if yi == 0:
                continue
            term = Poly.const(_frac(yi))
            for j, (xj, _) in enumerate(points):
                if i == j:
                    continue
                term = term * Poly([Fraction(-xj, 1), 1]) * Fraction(1, xi - xj)
            result = result + term
        return result

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            if i == 0:
                term = str(c)
            else:
                mag = "" if abs(c) == 1 else f"{abs(c)}*"
                var = "n" if i == 1 else f"n^{i}"
                term = f"{mag}{var}"
                if c < 0:
                    term = "-" + term
            if parts and not term.startswith("-"):
                parts.append("+ " + term)
            elif parts:
                parts.append("- " + term[1:])
            else:
                parts.append(term)
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Poly({self})"


def _igcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _int_primitive(coeffs: tuple[Fraction, ...]) -> list[int]:
    """Clear denominators and divide out the integer content."""
    if not coeffs:
        return []
    mul = 1
    for c in coeffs:
        mul = mul * c.denominator // _igcd(mul, c.denominator)
    ints = [int(c * mul) for c in coeffs]
    return _int_primitive_seq(ints)


def _int_primitive_seq(ints: list[int]) -> list[int]:
    while ints and ints[-1] == 0:
        ints.pop()
    if not ints:
        return []
    g = 0
    for c in ints:
        g = _igcd(g, abs(c))
        if g == 1:
            return ints
    return [c // g for c in ints]


def _pseudo_rem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of integer polynomials (coefficients stay integral)."""
    r = list(a)
    lead = b[-1]
    db = len(b) - 1
    while len(r) - 1 >= db and r:
        shift = len(r) - 1 - db
        top = r[-1]
        r = [c * lead for c in r]
        for i, bc in enumerate(b):
            r[shift + i] -= top * bc
        while r and r[-1] == 0:
            r.pop()
    return r


def _frac_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    from math import isqrt

    pn, pd = isqrt(q.numerator), isqrt(q.denominator)
    if pn * pn == q.numerator and pd * pd == q.denominator:
        return Fraction(pn, pd)
    return None


class RationalFunc:
    """Element of Q(n): num/den in lowest terms, den monic and nonzero."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if isinstance(num, (int, Fraction)):
            num = Poly.const(num)
        if den is None:
            den = Poly.const(1)
        elif isinstance(den, (int, Fraction)):
            den = Poly.const(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            self.num, self.den = Poly(), Poly.const(1)
            return
        g = num.gcd(den)
        num, den = num // g, den // g
        lead = den.leading()
        self.num = num * (1 / lead)
        self.den = den * (1 / lead)

    @staticmethod
    def const(c) -> "RationalFunc":
        return RationalFunc(Poly.const(c))

    @staticmethod
    def x() -> "RationalFunc":
        return RationalFunc(Poly.x())

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RationalFunc.const(other)
        if isinstance(other, Poly):
            other = RationalFunc(other)
        return (
            isinstance(other, RationalFunc)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __neg__(self):
        return RationalFunc(-self.num, self.den)

    def __add__(self, other):
        other = _as_rf(other)
        if self.den == other.den:
            return RationalFunc(self.num + other.num, self.den)
        return RationalFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_rf(other))

    def __rsub__(self, other):
        return (-self) + _as_rf(other)

    def __mul__(self, other):
        other = _as_rf(other)
        return RationalFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_rf(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return _as_rf(other) / self

    def __pow__(self, k: int) -> "RationalFunc":
        if k < 0:
            return RF_ONE / (self ** (-k))
        out = RF_ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __call__(self, n) -> Fraction:
        dv = self.den(n)
        if dv == 0:
            raise PoleAtPoint(f"denominator vanishes at n={n}")
        return self.num(n) / dv

    def degree_pair(self) -> tuple[int, int]:
        return self.num.degree, self.den.degree

    def __str__(self) -> str:
        if self.den == Poly.const(1):
            return str(self.num)
        # clear denominators of the coefficients for display
        mul = 1
        for c in self.num.coeffs + self.den.coeffs:
            mul = mul * c.denominator // _igcd(mul, c.denominator)
        num = str(self.num * mul)
        den = str(self.den * mul)
        if " " in num:
            num = f"({num})"
        if " " in den:
            den = f"({den})"
        return f"{num} / {den}"

    def __repr__(self) -> str:
        return f"RationalFunc({self})"


def _as_rf(v) -> RationalFunc:
    if isinstance(v, RationalFunc):
        return v
    if isinstance(v, Poly):
        return RationalFunc(v)
    return RationalFunc.const(v)


RF_ZERO = RationalFunc.const(0)
RF_ONE = RationalFunc.const(1)


def rf_eval(f: RationalFunc, n: int) -> Fraction:
    """Exact specialization of f at the integer n; raises PoleAtPoint on poles."""
    return f(n)


class SqrtRational:
    """Value of the form factor(n) * sqrt(radicand(n)).

    The radicand is a polynomial that is nonnegative for all large integer n.
    ``simplified`` collapses to a plain RationalFunc when the radicand is a
    perfect square.
    """

    __slots__ = ("radicand", "factor")

    def __init__(self, radicand: Poly, factor: RationalFunc):
        if radicand.is_zero() or factor.is_zero():
            self.radicand = Poly.const(1)
            self.factor = RF_ZERO if factor.is_zero() or radicand.is_zero() else factor
            if radicand.is_zero():
                self.factor = RF_ZERO
            return
        if radicand.leading() < 0:
            raise ValueError("radicand is eventually negative")
        self.radicand = radicand
        self.factor = factor

    def square(self) -> RationalFunc:
        return self.factor * self.factor * RationalFunc(self.radicand)

    def simplified(self) -> "RationalFunc | SqrtRational":
        root = self.radicand.sqrt()
        if root is not None:
            return self.factor * RationalFunc(root)
        return self

    def is_rational(self) -> bool:
        return isinstance(self.simplified(), RationalFunc)

    def __call__(self, n) -> float:
        import math

        rad = self.radicand(n)
        if rad < 0:
            raise ValueError(f"radicand negative at n={n}")
        rt = _frac_sqrt(rad)
        if rt is not None:
            return float(self.factor(n) * rt)
        return float(self.factor(n)) * math.sqrt(float(rad))

    def eval_exact(self, n) -> Fraction:
        """Exact value at n; only defined when the radicand value is a square."""
        rt = _frac_sqrt(self.radicand(n))
        if rt is None:
            raise ValueError(f"radicand is not a perfect square at n={n}")
        return self.factor(n) * rt

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SqrtRational)
            and self.radicand == other.radicand
            and self.factor == other.factor
        )

    def __str__(self) -> str:
        return f"({self.factor}) * sqrt({self.radicand})"

    def __repr__(self) -> str:
        return f"SqrtRational({self})"


class RatMatrix:
    """Dense matrix over Q(n)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence]):
        self.entries = [[_as_rf(e) for e in row] for row in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.entries else 0
        if any(len(r) != self.cols for r in self.entries):
            raise ValueError("ragged matrix")

    @staticmethod
    def identity(k: int) -> "RatMatrix":
        return RatMatrix([[RF_ONE if i == j else RF_ZERO for j in range(k)] for i in range(k)])

    def __getitem__(self, ij):
        return self.entries[ij[0]][ij[1]]

    def specialize(self, n) -> list[list[Fraction]]:
        return [[e(n) for e in row] for row in self.entries]

    def matvec(self, vec: Sequence[RationalFunc]) -> list[RationalFunc]:
        out = []
        for row in self.entries:
            acc = RF_ZERO
            for e, v in zip(row, vec):
                if not e.is_zero() and not _as_rf(v).is_zero():
                    acc = acc + e * v
            out.append(acc)
        return out


def solve_linear(A: RatMatrix, b: Sequence) -> list[RationalFunc]:
    """Solve A x = b exactly over Q(n) for square nonsingular A.

    Denominators are cleared row by row and the elimination runs fraction-free
    (Bareiss) over Q[n], which keeps intermediate polynomial growth polynomial
    instead of exponential.
    """
    k = A.rows
    if A.cols != k or len(b) != k:
        raise ValueError("solve_linear requires a square system")
    # clear denominators: each row of [A | b] becomes polynomial
    M: list[list[Poly]] = []
    for i in range(k):
        row = [A.entries[i][j] for j in range(k)] + [_as_rf(b[i])]
        denmul = Poly.const(1)
        for e in row:
            denmul = denmul.lcm(e.den)
        M.append([e.num * (denmul // e.den) for e in row])

    prev = Poly.const(1)
    for col in range(k):
        piv = None
        for r in range(col, k):
            if not M[r][col].is_zero():
                piv = r
                break
        if piv is None:
            raise SingularMatrix("matrix is rank-deficient over Q(n)")
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
        for r in range(col + 1, k):
            for c in range(col + 1, k + 1):
                M[r][c] = (M[col][col] * M[r][c] - M[r][col] * M[col][c]) // prev
            M[r][col] = Poly()
        prev = M[col][col]

    x: list[RationalFunc] = [RF_ZERO] * k
    for i in range(k - 1, -1, -1):
        acc = RationalFunc(M[i][k])
        for j in range(i + 1, k):
            acc = acc - RationalFunc(M[i][j]) * x[j]
        x[i] = acc / RationalFunc(M[i][i])
    return x


def fraction_nullvector(rows: list[list[Fraction]], ncols: int) -> list[Fraction] | None:
    """One nonzero kernel vector of the given underdetermined system, or None."""
    m = [list(r) for r in rows]
    nrows = len(m)
    pivots: list[tuple[int, int]] = []
    prow = 0
    for col in range(ncols):
        sel = None
        for r in range(prow, nrows):
            if m[r][col] != 0:
                sel = r
                break
        if sel is None:
            continue
        m[prow], m[sel] = m[sel], m[prow]
        pv = m[prow][col]
        m[prow] = [v / pv for v in m[prow]]
        for r in range(nrows):
            if r != prow and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * bb for a, bb in zip(m[r], m[prow])]
        pivots.append((prow, col))
        prow += 1
        if prow == nrows:
            break
    pivot_cols = {c for _, c in pivots}
    free = [c for c in range(ncols) if c not in pivot_cols]
    if not free:
        return None
    fc = free[-1]
    vec = [Fraction(0)] * ncols
    vec[fc] = Fraction(1)
    for r, c in pivots:
        vec[c] = -m[r][fc]
    return vec


def fit_polynomial(points: Sequence[tuple[int, Fraction]], max_degree: int) -> Poly:
    """Minimal-degree polynomial through all points, with held-out validation.

    Degrees are tried from 0 upward: a degree-d candidate interpolates the
    first d+1 points and must pass through every remaining point, of which at
    least 3 are held out.  The data must therefore exceed the accepted degree
    by at least 4 points; max_degree is capped accordingly.
    """
    pts = [(int(n), _frac(v)) for n, v in points]
    if len({n for n, _ in pts}) != len(pts):
        raise ValueError("fit_polynomial requires distinct n values")
    if len(pts) < 4:
        raise ValueError(f"need at least 4 points (3 held out); got {len(pts)}")
    usable = min(max_degree, len(pts) - 4)
    # Newton divided differences through the first usable+1 points; trailing
    # zero coefficients make the interpolant minimal-degree automatically.
    xs = [Fraction(n) for n, _ in pts[: usable + 1]]
    dd = [v for _, v in pts[: usable + 1]]
    for level in range(1, usable + 1):
        for i in range(usable, level - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level])
    top = usable
    while top > 0 and dd[top] == 0:
        top -= 1
    cand = Poly.const(dd[top])
    for i in range(top - 1, -1, -1):
        cand = cand * Poly([-xs[i], 1]) + Poly.const(dd[i])
    if all(cand(n) == v for n, v in pts):
        return cand
    raise NoPolynomialFit(
        f"no polynomial of degree <= {usable} passes all {len(pts)} points"
    )


def fit_rational(
    points: Sequence[tuple[int, Fraction]],
    max_deg_num: int,
    max_deg_den: int,
) -> RationalFunc:
    """Fit a rational function, escalating total degree, with held-out validation.

    For each candidate degree pair (a, b) — total degree ascending, ties broken
    toward the smaller denominator degree — a kernel vector of the homogeneous
    interpolation system p(n_i) - v_i q(n_i) = 0 on the first a+b+1 points is
    computed exactly and then validated against every point, at least 3 of
    which are held out from the fit.  The first validating candidate (hence
    minimal total degree) is returned.
    """
    pts = [(int(n), _frac(v)) for n, v in points]
    if len({n for n, _ in pts}) != len(pts):
        raise ValueError("fit_rational requires distinct n values")
    if len(pts) < 5:
        raise ValueError(f"need at least 5 points (3 held out); got {len(pts)}")
    # at least 3 held-out points per attempted degree pair
    max_total = min(max_deg_num + max_deg_den, len(pts) - 5)
    for total in range(max_total + 1):
        for b in range(min(total, max_deg_den) + 1):
            a = total - b
            if a > max_deg_num:
                continue
            train = pts[: a + b + 1]
            rows = []
            for n, v in train:
                npow = [Fraction(n) ** i for i in range(max(a, b) + 1)]
                rows.append([npow[i] for i in range(a + 1)] + [-v * npow[i] for i in range(b + 1)])
            vec = fraction_nullvector(rows, a + b + 2)
            if vec is None:
                continue
            den = Poly(vec[a + 1 :])
            if den.is_zero():
                continue
            cand = RationalFunc(Poly(vec[: a + 1]), den)
            ok = True
            for n, v in pts:
                if cand.den(n) == 0 or cand(n) != v:
                    ok = False
                    break
            if ok:
                return cand
    raise NoRationalFit(
        f"no rational function with degrees <= ({max_deg_num}, {max_deg_den}) "
        "validates; the stabilization threshold may not be reached — drop "
        "small-n points and retry"
    )


def fit_rational_auto(
    points: Sequence[tuple[int, Fraction]],
    max_deg_num: int,
    max_deg_den: int,
) -> RationalFunc:
    """fit_rational with stabilization-onset detection.

    Retries after dropping the smallest n until validation passes or too few
    points remain.
    """
    pts = sorted(((int(n), _frac(v)) for n, v in points), key=lambda p: p[0])
    need = 5
    last: Exception | None = None
    while len(pts) >= need:
        try:
            return fit_rational(pts, max_deg_num, max_deg_den)
        except NoRationalFit as exc:
            last = exc
            pts = pts[1:]
    raise NoRationalFit(f"data exhausted while searching for stabilization: {last}")
