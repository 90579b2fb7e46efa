"""Small dense linear-algebra helpers that work on both Fraction and float arrays."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

SVD_RANK_RTOL = 1e-10


def is_exact_array(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def coerce_matrix(value, shape=None) -> np.ndarray:
    """Return an object array of Fractions when every entry is rational, else float64.

    Accepted rational inputs are int, Fraction and "p/q" strings; any float
    entry pushes the whole matrix onto the float path.
    """
    arr = np.array(value, dtype=object)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if shape is not None:
        arr = arr.reshape(shape)
    flat = arr.ravel()
    out = []
    exact = True
    for v in flat:
        if isinstance(v, bool):
            raise TypeError("boolean matrix entries are not allowed")
        if isinstance(v, (int, np.integer)):
            out.append(Fraction(int(v)))
        elif isinstance(v, Fraction):
            out.append(v)
        elif isinstance(v, str):
            out.append(Fraction(v.strip()))
        else:
            exact = False
            out.append(v)
    if exact:
        return np.array(out, dtype=object).reshape(arr.shape)
    return np.array([float(v) for v in out], dtype=float).reshape(arr.shape)


def to_float(a) -> np.ndarray:
    return np.asarray(a, dtype=float) if is_exact_array(a) else a


def unify(*arrays):
    """Bring arrays onto a common path: exact only if all of them are exact."""
    if all(is_exact_array(a) for a in arrays):
        return arrays
    return tuple(to_float(a) for a in arrays)


def zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        z = np.empty(shape, dtype=object)
        z.fill(Fraction(0))
        return z
    return np.zeros(shape)


def eye(n: int, exact: bool) -> np.ndarray:
    m = zeros((n, n), exact)
    one = Fraction(1) if exact else 1.0
    for i in range(n):
        m[i, i] = one
    return m


def half(exact: bool):
    return Fraction(1, 2) if exact else 0.5


def all_zero(a, tol: float = 0.0) -> bool:
    if is_exact_array(a):
        return all(v == 0 for v in a.ravel())
    return a.size == 0 or float(np.max(np.abs(a))) <= tol


def max_abs(a) -> float:
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(to_float(a))))


def inverse(m: np.ndarray) -> np.ndarray:
    """Matrix inverse; Gauss-Jordan over Fractions on the exact path."""
    if not is_exact_array(m):
        return np.linalg.inv(m)
    n = m.shape[0]
    aug = [list(m[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise np.linalg.LinAlgError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [v * inv_p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return np.array([row[n:] for row in aug], dtype=object)


def det_exact(m: np.ndarray) -> Fraction:
    n = m.shape[0]
    rows = [list(m[i]) for i in range(n)]
    d = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            d = -d
        d *= rows[col][col]
        for r in range(col + 1, n):
            if rows[r][col] != 0:
                f = rows[r][col] / rows[col][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return d


def _rref_sparse(rows: list[dict], ncols: int):
    """Reduced row echelon form of sparse Fraction rows; returns (rows, pivot columns)."""
    pivots: list[int] = []
    reduced: list[dict] = []
    for row in rows:
        row = {c: v for c, v in row.items() if v != 0}
        for prow, pc in zip(reduced, pivots):
            f = row.get(pc)
            if f:
                for c, v in prow.items():
                    nv = row.get(c, 0) - f * v
                    if nv:
                        row[c] = nv
                    else:
                        row.pop(c, None)
        if not row:
            continue
        pc = min(row)
        inv_p = 1 / row[pc]
        row = {c: v * inv_p for c, v in row.items()}
        for prow in reduced:
            f = prow.get(pc)
            if f:
                for c, v in row.items():
                    nv = prow.get(c, 0) - f * v
                    if nv:
                        prow[c] = nv
                    else:
                        prow.pop(c, None)
        reduced.append(row)
        pivots.append(pc)
    return reduced, pivots


def solve_affine(a: np.ndarray, b: np.ndarray):
    """General solution of a x = b as (particular, nullspace basis columns) or None.

    Exact arrays are reduced by sparse Gauss-Jordan elimination; float arrays
    by an SVD with relative rank threshold SVD_RANK_RTOL.
    """
    m, ncols = a.shape
    if is_exact_array(a) and is_exact_array(b):
        rows = []
        for i in range(m):
            row = {j: a[i, j] for j in range(ncols) if a[i, j] != 0}
            if b[i] != 0:
                row[ncols] = b[i]
            rows.append(row)
        reduced, pivots = _rref_sparse(rows, ncols + 1)
        if ncols in pivots:
            return None
        x0 = zeros(ncols, True)
        for row, pc in zip(reduced, pivots):
            x0[pc] = row.get(ncols, Fraction(0))
        free = [j for j in range(ncols) if j not in set(pivots)]
        basis = zeros((ncols, len(free)), True)
        for k, fj in enumerate(free):
            basis[fj, k] = Fraction(1)
            for row, pc in zip(reduced, pivots):
                v = row.get(fj)
                if v:
                    basis[pc, k] = -v
        return x0, basis
    a = to_float(a)
    b = to_float(b)
    u, s, vt = np.linalg.svd(a)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > SVD_RANK_RTOL * max(smax, 1e-300))) if smax > 0 else 0
    x0 = vt[:rank].T @ ((u[:, :rank].T @ b) / s[:rank])
    scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
    if np.max(np.abs(a @ x0 - b), initial=0.0) > 1e-8 * scale * max(1.0, smax):
        return None
    return x0, vt[rank:].T.copy()


def nullspace(a: np.ndarray) -> np.ndarray:
    sol = solve_affine(a, zeros(a.shape[0], is_exact_array(a)))
    return sol[1]
