"""Exact solutions of integer/rational linear systems at numeric scale.

Symbolic systems over Q(n) go through ``exactnum.solve_linear``.  The solvers
here handle the *specialized* systems (full state spaces can reach a few
thousand unknowns): a float LU provides candidate directions, a dyadic
iterative refinement with exactly computed residuals drives the error far
below reconstruction level, each entry is recovered as a small fraction, and
the candidate is certified by an exact integer residual check.  Every value
returned has therefore been verified to satisfy the system exactly.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import SingularMatrix

_LIMB_BITS = 30
_LIMB_HALF = 1 << (_LIMB_BITS - 1)
_LIMB_MASK = (1 << _LIMB_BITS) - 1


def fraction_gauss(M: list[list[Fraction]], rhs: list[list[Fraction]]) -> list[list[Fraction]]:
    """Solve M X = rhs (columns of rhs independent) by exact Gaussian elimination."""
    k = len(M)
    nrhs = len(rhs)
    aug = [[*row] + [rhs[j][i] for j in range(nrhs)] for i, row in enumerate(M)]
    for col in range(k):
        piv = None
        for r in range(col, k):
            if aug[r][col] != 0:
                piv = r
                break
        if piv is None:
            raise SingularMatrix("exact elimination found a zero pivot column")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        for r in range(col + 1, k):
            f = aug[r][col]
            if f == 0:
                continue
            ratio = f / pv
            rowc, rowr = aug[col], aug[r]
            for c in range(col, k + nrhs):
                rowr[c] -= ratio * rowc[c]
    out = [[Fraction(0)] * k for _ in range(nrhs)]
    for j in range(nrhs):
        for i in range(k - 1, -1, -1):
            acc = aug[i][k + j]
            row = aug[i]
            for c in range(i + 1, k):
                if row[c]:
                    acc -= row[c] * out[j][c]
            out[j][i] = acc / row[i]
    return out


def _to_limbs(vec: list[int], bits: int) -> list[np.ndarray]:
    """Balanced signed base-2^bits digit expansion, least significant first."""
    n = len(vec)
    half = 1 << (bits - 1)
    mask = (1 << bits) - 1
    cur = list(vec)
    limbs = []
    while any(cur):
        digs = np.empty(n, dtype=np.int64)
        for i in range(n):
            x = cur[i]
            d = ((x + half) & mask) - half
            digs[i] = d
            cur[i] = (x - d) >> bits
        limbs.append(digs)
    return limbs


class IntMatrix:
    """Integer matrix with an exact big-int matvec and a float shadow.

    Small instances keep an object-dtype dense copy; large sparse ones use an
    int64 CSR applied limb-by-limb (entry magnitudes are checked against the
    int64 overflow bound at construction).
    """

    def __init__(self, csr: scipy.sparse.csr_matrix | None = None, dense: list[list[int]] | None = None):
        if (csr is None) == (dense is None):
            raise ValueError("provide exactly one of csr, dense")
        self.csr = csr
        self.dense = dense
        self._limb_bits = 0
        if csr is not None:
            self.n = csr.shape[0]
            max_abs = int(abs(csr.data).max()) if csr.nnz else 0
            row_nnz = int(np.diff(csr.indptr).max()) if csr.nnz else 1
            # pick the largest limb size whose dot products stay inside int64
            bits = _LIMB_BITS
            while bits >= 8 and max_abs * row_nnz * (1 << (bits - 1)) >= (1 << 62):
                bits -= 2
            if bits >= 8:
                self._limb_bits = bits
        else:
            self.n = len(dense)
        self._obj = None

    def _object_matrix(self):
        if self._obj is None:
            if self.dense is not None:
                self._obj = np.array(self.dense, dtype=object)
            else:
                self._obj = np.array(self.csr.todense(), dtype=object)
        return self._obj

    def to_float(self) -> np.ndarray:
        if self.dense is not None:
            return np.array(self.dense, dtype=np.float64)
        return np.asarray(self.csr.todense(), dtype=np.float64)

    def matvec(self, vec: list[int]) -> list[int]:
        bits = self._limb_bits
        if self.csr is not None and bits:
            out = [0] * self.csr.shape[0]
            shift = 0
            for digs in _to_limbs(vec, bits):
                part = self.csr.dot(digs)
                for i in range(len(out)):
                    p = part[i]
                    if p:
                        out[i] += int(p) << shift
                shift += bits
            return out
        prod = self._object_matrix().dot(np.array(vec, dtype=object))
        return [int(x) for x in prod]


def _dyadic_shift_add(v: list[int], k: int, delta: np.ndarray, extra_bits: int) -> tuple[list[int], int]:
    """Return (v', k') representing v/2^k + delta at precision k' = k + extra_bits."""
    k2 = k + extra_bits
    out = []
    for vi, d in zip(v, delta):
        base = vi << extra_bits
        df = Fraction(float(d))
        # df * 2^k2 rounded to nearest integer, exactly
        num = df.numerator << k2 if k2 >= 0 else df.numerator
        q, r = divmod(num, df.denominator)
        if 2 * r >= df.denominator:
            q += 1
        out.append(base + q)
    return out, k2


class ExactSolver:
    """Certified exact solves of A x = b for an integer matrix A.

    Dimensions up to ``dense_cutoff`` use pure Fraction elimination.  Larger
    systems use a cached float LU with exact-residual refinement; results are
    always verified by an exact residual before being returned.
    """

    def __init__(self, A: IntMatrix, dense_cutoff: int = 24):
        self.A = A
        self.n = A.n
        self._dense_cutoff = dense_cutoff
        self._lu = None
        self._fraction_rows = None

    def _fractions(self) -> list[list[Fraction]]:
        if self._fraction_rows is None:
            obj = self.A._object_matrix()
            self._fraction_rows = [[Fraction(int(x)) for x in row] for row in obj]
        return self._fraction_rows

    def _lu_factor(self):
        if self._lu is None:
            mat = self.A.to_float()
            try:
                self._lu = scipy.linalg.lu_factor(mat, overwrite_a=True, check_finite=False)
            except scipy.linalg.LinAlgError as exc:
                raise SingularMatrix(f"float factorization failed: {exc}") from exc
        return self._lu

    def _verify(self, cand: list[Fraction], b: list[int], lcm_cap: int | None = None) -> bool:
        den_lcm = 1
        for c in cand:
            d = c.denominator
            if den_lcm % d:
                g = _gcd(den_lcm, d)
                den_lcm = den_lcm // g * d
            if lcm_cap is not None and den_lcm > lcm_cap:
                # a garbled reconstruction: the true common denominator of a
                # rational solution cannot exceed the reconstruction range
                return False
        scaled = [int(c * den_lcm) for c in cand]
        lhs = self.A.matvec(scaled)
        return all(l == bi * den_lcm for l, bi in zip(lhs, b))

    def solve(self, b: Sequence[int], den_hint: int = 1) -> list[Fraction]:
        b = [int(x) for x in b]
        if self.n <= self._dense_cutoff:
            sol = fraction_gauss(self._fractions(), [list(map(Fraction, b))])[0]
            return sol
        return self._solve_refine(b, den_hint)

    def _solve_refine(self, b: list[int], den_hint: int = 1) -> list[Fraction]:
        lu = self._lu_factor()
        n = self.n
        v = [0] * n
        k = 0
        prev_norm = None
        for it in range(48):
            if k == 0:
                r = list(b)
            else:
                av = self.A.matvec(v)
                r = [(bi << k) - avi for bi, avi in zip(b, av)]
            if not any(r):
                return [Fraction(vi, 1 << k) for vi in v]
            if it >= 1 and k >= 100 and isqrt(1 << max(k - 40, 2)) >= den_hint:
                cand = self._reconstruct(v, k)
                if cand is not None and self._verify(cand, b, lcm_cap=1 << (k // 2 + 30)):
                    return cand
            rf = np.array([float(Fraction(ri, 1 << k)) for ri in r], dtype=np.float64)
            norm = float(np.max(np.abs(rf)))
            if prev_norm is not None and it >= 4 and norm > prev_norm * 0.9 and norm > 1e-290:
                break
            prev_norm = norm
            try:
                delta = scipy.linalg.lu_solve(lu, rf, check_finite=False)
            except scipy.linalg.LinAlgError as exc:
                raise SingularMatrix(f"refinement solve failed: {exc}") from exc
            if not np.all(np.isfinite(delta)):
                raise SingularMatrix("float solve produced non-finite values")
            v, k = _dyadic_shift_add(v, k, delta, 56)
        # refinement stalled or reconstruction kept failing
        if self.n <= 2500:
            sol = fraction_gauss(self._fractions(), [list(map(Fraction, b))])[0]
            return sol
        raise SingularMatrix("iterative refinement failed to converge to a rational solution")

    def _reconstruct(self, v: list[int], k: int) -> list[Fraction] | None:
        dmax = isqrt(1 << max(k - 40, 2))
        out = []
        for vi in v:
            f = Fraction(vi, 1 << k).limit_denominator(dmax)
            out.append(f)
        return out


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def solve_fraction_matrix(M: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Exact solve for a dense Fraction matrix via integer row scaling."""
    n = len(M)
    if n <= 24:
        return fraction_gauss(M, [list(b)])[0]
    rows_int: list[list[int]] = []
    b_int: list[int] = []
    for row, bi in zip(M, b):
        scale = 1
        for e in list(row) + [bi]:
            d = e.denominator
            if scale % d:
                g = _gcd(scale, d)
                scale = scale // g * d
        rows_int.append([int(e * scale) for e in row])
        b_int.append(int(bi * scale))
    solver = ExactSolver(IntMatrix(dense=rows_int))
    return solver.solve(b_int)
