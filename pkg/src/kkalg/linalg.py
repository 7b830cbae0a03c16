"""Exact linear algebra over Z, Q and Z/p.

Matrices are lists of rows.  Over Z everything goes through a Smith normal
form with unimodular transforms, so kernels are saturated lattice bases and
``solve`` decides integral solvability.  Over a field we row reduce.
Composite moduli are refused for kernel/solve, since Z/m is not a PID-like
setting where our reductions are valid.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence

from .rings import ZZ, BaseRing

Matrix = List[List]


def zeros(r: int, c: int) -> Matrix:
    return [[0] * c for _ in range(r)]


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(A: Matrix, ncols: int = None) -> Matrix:
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def matmul(A: Matrix, B: Matrix, base: BaseRing = ZZ) -> Matrix:
    if not A:
        return []
    inner = len(A[0])
    if inner != len(B):
        raise ValueError("shape mismatch")
    cols = len(B[0]) if B else 0
    return [
        [base(sum(A[i][k] * B[k][j] for k in range(inner))) for j in range(cols)]
        for i in range(len(A))
    ]


def matvec(A: Matrix, v: Sequence, base: BaseRing = ZZ) -> list:
    return [base(sum(a * x for a, x in zip(row, v))) for row in A]


def _check_base(base: BaseRing):
    if base.kind == "ZZmod" and not base.is_field:
        raise NotImplementedError(f"kernels over {base} need a prime modulus")


# ---------------------------------------------------------------------------
# Smith normal form over Z


def smith_normal_form(A: Matrix, ncols: int = None):
    """Return (S, D, T) with S·A·T = D diagonal, S and T unimodular.

    The diagonal entries are non-negative and each divides the next.
    """
    m = len(A)
    n = len(A[0]) if A else (ncols or 0)
    D = [list(map(int, row)) for row in A]
    S = identity(m)
    T = identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        S[i], S[j] = S[j], S[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in T:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, k):  # row dst += k*row src
        if k:
            D[dst] = [a + k * b for a, b in zip(D[dst], D[src])]
            S[dst] = [a + k * b for a, b in zip(S[dst], S[src])]

    def add_col(src, dst, k):
        if k:
            for row in D:
                row[dst] += k * row[src]
            for row in T:
                row[dst] += k * row[src]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero |entry| in the remaining block
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] and (piv is None or abs(D[i][j]) < abs(D[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            done = True
            for i in range(t + 1, m):
                if D[i][t]:
                    q = D[i][t] // D[t][t]
                    add_row(t, i, -q)
                    if D[i][t]:
                        done = False
            for j in range(t + 1, n):
                if D[t][j]:
                    q = D[t][j] // D[t][t]
                    add_col(t, j, -q)
                    if D[t][j]:
                        done = False
            if done:
                # divisibility condition on the rest of the block
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if D[i][j] % D[t][t]:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                add_row(bad, t, 1)
                continue
            # move the smallest entry of row/column t into the pivot
            best = (t, t)
            for i in range(t, m):
                if D[i][t] and abs(D[i][t]) < abs(D[best[0]][best[1]]):
                    best = (i, t)
            for j in range(t, n):
                if D[t][j] and abs(D[t][j]) < abs(D[best[0]][best[1]]):
                    best = (t, j)
            swap_rows(t, best[0])
            swap_cols(t, best[1])
        if D[t][t] < 0:
            D[t] = [-a for a in D[t]]
            S[t] = [-a for a in S[t]]
        t += 1
    return S, D, T


def snf_diagonal(A: Matrix, ncols: int = None) -> list:
    _, D, _ = smith_normal_form(A, ncols)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0))]


def invariant_factors(relations: Matrix, ngens: int) -> tuple[int, list]:
    """Structure of Z^ngens / rowspace(relations): (free rank, torsion list)."""
    if ngens == 0:
        return 0, []
    if not relations:
        return ngens, []
    diag = snf_diagonal(relations, ngens)
    nonzero = [d for d in diag if d]
    torsion = [d for d in nonzero if d != 1]
    return ngens - len(nonzero), torsion


# ---------------------------------------------------------------------------
# field row reduction


def rref(A: Matrix, base: BaseRing, ncols: int = None):
    """Reduced row echelon form over a field; returns (R, pivot columns)."""
    _check_base(base)
    n = len(A[0]) if A else (ncols or 0)
    R = [[base(x) for x in row] for row in A]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(R)) if R[i][c] != 0), None)
        if p is None:
            continue
        R[r], R[p] = R[p], R[r]
        inv = base.inverse(R[r][c])
        R[r] = [base(x * inv) for x in R[r]]
        for i in range(len(R)):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [base(a - f * b) for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == len(R):
            break
    return R[:r], pivots


# ---------------------------------------------------------------------------
# public API


def rank(A: Matrix, base: BaseRing = ZZ, ncols: int = None) -> int:
    if not A:
        return 0
    if base == ZZ:
        return sum(1 for d in snf_diagonal(A, ncols) if d)
    _check_base(base)
    return len(rref(A, base, ncols)[1])


def nullspace(A: Matrix, base: BaseRing = ZZ, ncols: int = None) -> Matrix:
    """Basis (list of vectors) of {v : A v = 0}; saturated lattice basis over Z."""
    n = len(A[0]) if A else (ncols if ncols is not None else 0)
    if not A:
        return identity(n)
    if base == ZZ:
        _, D, T = smith_normal_form(A, n)
        r = sum(1 for i in range(min(len(D), n)) if D[i][i])
        return [[T[i][j] for i in range(n)] for j in range(r, n)]
    _check_base(base)
    R, pivots = rref(A, base, n)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [base(0)] * n
        v[f] = base(1)
        for row, pc in zip(R, pivots):
            v[pc] = base(-row[f])
        basis.append(v)
    return basis


def solve(A: Matrix, b: Sequence, base: BaseRing = ZZ, ncols: int = None) -> Optional[list]:
    """Some x with A x = b, or None.  Over Z the solution must be integral."""
    m = len(A)
    n = len(A[0]) if A else (ncols if ncols is not None else 0)
    if len(b) != m:
        raise ValueError("right-hand side has wrong length")
    if m == 0:
        return [base(0)] * n
    if base == ZZ:
        S, D, T = smith_normal_form(A, n)
        c = matvec(S, b)
        y = [0] * n
        for i in range(m):
            d = D[i][i] if i < n else 0
            if d == 0:
                if c[i] != 0:
                    return None
            else:
                if c[i] % d:
                    return None
                y[i] = c[i] // d
        return matvec(T, y)
    _check_base(base)
    aug = [list(row) + [bv] for row, bv in zip(A, b)]
    R, pivots = rref(aug, base, n + 1)
    if n in pivots:
        return None
    x = [base(0)] * n
    for row, pc in zip(R, pivots):
        x[pc] = row[n]
    return x


def in_span(vectors: Matrix, v: Sequence, base: BaseRing = ZZ) -> bool:
    """Is v a combination (integral over Z) of the given vectors?"""
    if not vectors:
        return all(base(x) == 0 for x in v)
    A = transpose(vectors)
    return solve(A, list(v), base) is not None


def span_contains(big: Matrix, small: Matrix, base: BaseRing = ZZ) -> Optional[list]:
    """Return the first vector of ``small`` outside span(big), or None."""
    for v in small:
        if not in_span(big, v, base):
            return v
    return None


def same_span(a: Matrix, b: Matrix, base: BaseRing = ZZ) -> bool:
    return span_contains(a, b, base) is None and span_contains(b, a, base) is None


def to_fractions(A: Matrix) -> Matrix:
    return [[Fraction(x) for x in row] for row in A]
