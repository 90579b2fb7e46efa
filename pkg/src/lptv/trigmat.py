"""Matrix-valued trigonometric polynomials with coefficients polynomial in omega.

A ``TrigMatrix`` stores

    M(t) = sum_r omega**r * sum_l ( C[r, l] cos(l omega t) + S[r, l] sin(l omega t) )

with l >= 0 and no sine term at l = 0.  The l = 0 cosine coefficient is the
whole constant term of the series (half of the doubled Fourier coefficient
``A_0^even`` used in the classical cosine-sine formulas).  Every coefficient is
either an object array of ``Fraction`` (exact path) or a float64 array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import _linalg as la

COS, SIN = 0, 1
_PARITY = {"c": COS, "cos": COS, COS: COS, "s": SIN, "sin": SIN, SIN: SIN}

TRIM_RTOL = 1e-12


class NonConstantDeterminant(ValueError):
    pass


class SingularDeterminant(ValueError):
    pass


def _number(x, exact: bool):
    if exact:
        return x if isinstance(x, Fraction) else Fraction(x)
    return float(x)


def _trim_terms(terms: dict, exact: bool) -> dict:
    if exact:
        return {k: v for k, v in terms.items() if not la.all_zero(v)}
    if not terms:
        return {}
    big = max(la.max_abs(v) for v in terms.values())
    tol = TRIM_RTOL * (1.0 + big)
    return {k: v for k, v in terms.items() if la.max_abs(v) > tol}


# --------------------------------------------------------------------------
# polynomials in omega
# --------------------------------------------------------------------------


class OmegaPoly:
    """Scalar polynomial sum_r c_r omega**r with trimmed degree."""

    __slots__ = ("coeffs", "exact")

    def __init__(self, coeffs: Iterable = (0,)):
        arr = la.coerce_matrix(list(coeffs) or [0], shape=(-1,))
        exact = la.is_exact_array(arr)
        vals = list(arr)
        if exact:
            while len(vals) > 1 and vals[-1] == 0:
                vals.pop()
        else:
            tol = TRIM_RTOL * (1.0 + max(abs(v) for v in vals))
            while len(vals) > 1 and abs(vals[-1]) <= tol:
                vals.pop()
        self.coeffs = tuple(vals)
        self.exact = exact

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, omega):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * omega + c
        return acc

    def _other(self, other):
        return other if isinstance(other, OmegaPoly) else OmegaPoly([other])

    def __add__(self, other):
        other = self._other(other)
        m = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (m - len(self.coeffs))
        b = other.coeffs + (0,) * (m - len(other.coeffs))
        return OmegaPoly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return OmegaPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        other = self._other(other)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(other.coeffs):
                out[i + j] = out[i + j] + x * y
        return OmegaPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, OmegaPoly):
            other = OmegaPoly([other])
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def to_float(self) -> "OmegaPoly":
        return OmegaPoly([float(c) for c in self.coeffs])

    def __repr__(self):
        return f"OmegaPoly({[str(c) for c in self.coeffs]})"


OMEGA = OmegaPoly([0, 1])


class OmegaPolyMatrix:
    """Constant-in-time square matrix whose entries are polynomials in omega."""

    __slots__ = ("n", "slices", "exact")

    def __init__(self, slices):
        mats = [s if isinstance(s, np.ndarray) and s.dtype == np.float64 else la.coerce_matrix(s)
                for s in slices]
        if not mats:
            raise ValueError("need at least one slice")
        exact = all(la.is_exact_array(m) for m in mats)
        if not exact:
            mats = [la.to_float(m) for m in mats]
        n = mats[0].shape[0]
        if exact:
            while len(mats) > 1 and la.all_zero(mats[-1]):
                mats.pop()
        else:
            big = max(la.max_abs(m) for m in mats)
            while len(mats) > 1 and la.max_abs(mats[-1]) <= TRIM_RTOL * (1.0 + big):
                mats.pop()
        self.n = n
        self.slices = tuple(mats)
        self.exact = exact

    @classmethod
    def constant(cls, m) -> "OmegaPolyMatrix":
        return cls([la.coerce_matrix(m)])

    @classmethod
    def from_entries(cls, grid) -> "OmegaPolyMatrix":
        """Build from an n x n grid of OmegaPoly or numbers."""
        polys = [[g if isinstance(g, OmegaPoly) else OmegaPoly([g]) for g in row] for row in grid]
        n = len(polys)
        deg = max(p.degree for row in polys for p in row)
        exact = all(p.exact for row in polys for p in row)
        slices = []
        for r in range(deg + 1):
            s = la.zeros((n, n), exact)
            for i in range(n):
                for j in range(n):
                    c = polys[i][j].coeffs
                    if r < len(c):
                        s[i, j] = c[r] if exact else float(c[r])
            slices.append(s)
        return cls(slices)

    @property
    def degree(self) -> int:
        return len(self.slices) - 1

    def slice(self, r: int) -> np.ndarray:
        if r < len(self.slices):
            return self.slices[r]
        return la.zeros((self.n, self.n), self.exact)

    def entry(self, i: int, j: int) -> OmegaPoly:
        return OmegaPoly([s[i, j] for s in self.slices])

    def __call__(self, omega) -> np.ndarray:
        acc = la.zeros((self.n, self.n), self.exact and isinstance(omega, (int, Fraction)))
        for s in reversed(self.slices):
            acc = acc * omega + s
        return acc if la.is_exact_array(acc) else np.asarray(acc, dtype=float)

    def evaluate(self, omega) -> np.ndarray:
        return la.to_float(self(omega))

    def __add__(self, other):
        other = _as_opm(other, self.n)
        m = max(len(self.slices), len(other.slices))
        return OmegaPolyMatrix([self.slice(r) + other.slice(r) for r in range(m)])

    def __neg__(self):
        return OmegaPolyMatrix([-s for s in self.slices])

    def __sub__(self, other):
        return self + (-_as_opm(other, self.n))

    def __matmul__(self, other):
        other = _as_opm(other, self.n)
        a, b = self.slices, other.slices
        exact = self.exact and other.exact
        out = [la.zeros((self.n, other.n), exact) for _ in range(len(a) + len(b) - 1)]
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                x_, y_ = la.unify(x, y)
                out[i + j] = out[i + j] + x_ @ y_
        return OmegaPolyMatrix(out)

    def __rmatmul__(self, other):
        return _as_opm(other, self.n) @ self

    def scale(self, s) -> "OmegaPolyMatrix":
        s = s if isinstance(s, OmegaPoly) else OmegaPoly([s])
        out = [la.zeros((self.n, self.n), self.exact and s.exact)
               for _ in range(len(self.slices) + s.degree)]
        for i, c in enumerate(s.coeffs):
            for j, m in enumerate(self.slices):
                out[i + j] = out[i + j] + (m * c if la.is_exact_array(m) and s.exact else la.to_float(m) * float(c))
        return OmegaPolyMatrix(out)

    def trace(self) -> OmegaPoly:
        return OmegaPoly([sum(s[i, i] for i in range(self.n)) for s in self.slices])

    def similar(self, v) -> "OmegaPolyMatrix":
        """Return V^{-1} R V for a constant invertible V."""
        v = la.coerce_matrix(v)
        vinv = la.inverse(v)
        return OmegaPolyMatrix([_mm(_mm(vinv, s), v) for s in self.slices])

    def charpoly(self) -> list[OmegaPoly]:
        """Coefficients c_0..c_n of det(lambda I - R) as polynomials in omega."""
        n = self.n
        ident = OmegaPolyMatrix([la.eye(n, self.exact)])
        coeffs = [OmegaPoly([0])] * (n + 1)
        coeffs[n] = OmegaPoly([1])
        m_prev = OmegaPolyMatrix([la.zeros((n, n), self.exact)])
        for k in range(1, n + 1):
            m_k = self @ m_prev + ident.scale(coeffs[n - k + 1])
            tr = (self @ m_k).trace()
            inv_k = Fraction(-1, k) if self.exact else -1.0 / k
            coeffs[n - k] = tr * inv_k
            m_prev = m_k
        return coeffs

    def to_float(self) -> "OmegaPolyMatrix":
        return OmegaPolyMatrix([la.to_float(s) for s in self.slices])

    def equals(self, other, tol: float = 0.0) -> bool:
        other = _as_opm(other, self.n)
        m = max(len(self.slices), len(other.slices))
        for r in range(m):
            a, b = la.unify(self.slice(r), other.slice(r))
            if la.is_exact_array(a):
                if not la.all_zero(a - b):
                    return False
            elif la.max_abs(a - b) > tol:
                return False
        return True

    def __repr__(self):
        return f"OmegaPolyMatrix(n={self.n}, degree={self.degree})"


def _as_opm(x, n) -> OmegaPolyMatrix:
    if isinstance(x, OmegaPolyMatrix):
        return x
    return OmegaPolyMatrix([la.coerce_matrix(x) if not isinstance(x, np.ndarray) else x])


def _mm(a, b):
    a, b = la.unify(a, b)
    return a @ b


# --------------------------------------------------------------------------
# trigonometric matrices
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodicAntiderivative:
    """Closed-form antiderivative of a zero-mean scalar series, zero at t = 0.

    Each term is (r, l, parity, c) for c * omega**r * cos/sin(l omega t).  The
    antiderivative carries 1/(l omega) factors, so it lives outside the
    polynomial-in-omega class and is only evaluated pointwise.
    """

    terms: tuple

    def __call__(self, omega: float, t: float) -> float:
        total = 0.0
        for r, l, parity, c in self.terms:
            c = float(c)
            if omega == 0:
                if r == 0 and parity == COS:
                    total += c * t
                continue
            w_pow = omega ** (r - 1)
            if parity == COS:
                total += c * w_pow * math.sin(l * omega * t) / l
            else:
                total += c * w_pow * (1.0 - math.cos(l * omega * t)) / l
        return total

    def is_zero(self) -> bool:
        return not self.terms


@dataclass(frozen=True)
class TraceInfo:
    total: "TrigMatrix"
    psi: "TrigMatrix"
    psi0: OmegaPoly
    psi1: "TrigMatrix"
    Psi1: PeriodicAntiderivative


class TrigMatrix:
    """Immutable matrix trigonometric polynomial; see the module docstring."""

    __slots__ = ("n", "_terms", "exact", "scalar")

    def __init__(self, n: int, terms: dict | None = None, *, scalar: bool | None = None):
        terms = dict(terms or {})
        fixed = {}
        for (r, l, parity), mat in terms.items():
            parity = _PARITY[parity]
            if l < 0 or r < 0:
                raise ValueError("negative harmonic or omega power")
            if l == 0 and parity == SIN:
                continue
            if not (isinstance(mat, np.ndarray) and mat.dtype == np.float64):
                mat = la.coerce_matrix(mat)
            if mat.shape != (n, n):
                raise ValueError(f"coefficient shape {mat.shape} does not match n={n}")
            key = (int(r), int(l), parity)
            if key in fixed:
                a, b = la.unify(fixed[key], mat)
                mat = a + b
            fixed[key] = mat
        exact = all(la.is_exact_array(m) for m in fixed.values())
        if not exact:
            fixed = {k: la.to_float(m) for k, m in fixed.items()}
        self.n = n
        self._terms = _trim_terms(fixed, exact)
        self.exact = exact
        self.scalar = (n == 1) if scalar is None else scalar

    # construction -----------------------------------------------------------

    @classmethod
    def zeros(cls, n: int) -> "TrigMatrix":
        return cls(n, {})

    @classmethod
    def constant(cls, m) -> "TrigMatrix":
        m = la.coerce_matrix(m)
        return cls(m.shape[0], {(0, 0, COS): m})

    @classmethod
    def identity(cls, n: int, exact: bool = True) -> "TrigMatrix":
        return cls(n, {(0, 0, COS): la.eye(n, exact)})

    @classmethod
    def from_terms(cls, terms: Iterable, n: int | None = None) -> "TrigMatrix":
        """Build from (r, l, parity, matrix) tuples; repeated keys are summed."""
        acc: dict = {}
        for r, l, parity, mat in terms:
            mat = la.coerce_matrix(mat)
            n = mat.shape[0] if n is None else n
            key = (r, l, _PARITY[parity])
            if key in acc:
                a, b = la.unify(acc[key], mat)
                acc[key] = a + b
            else:
                acc[key] = mat
        return cls(n if n is not None else 1, acc)

    @classmethod
    def from_entries(cls, grid) -> "TrigMatrix":
        """Assemble an n x n matrix from a grid of scalar TrigMatrix or numbers."""
        rows = len(grid)
        entries = [[g if isinstance(g, TrigMatrix) else cls.constant([[g]]) for g in row] for row in grid]
        exact = all(e.exact for row in entries for e in row)
        acc: dict = {}
        for i in range(rows):
            for j in range(rows):
                e = entries[i][j]
                if e.n != 1:
                    raise ValueError("grid entries must be scalar")
                for key, c in e._terms.items():
                    if key not in acc:
                        acc[key] = la.zeros((rows, rows), exact)
                    acc[key][i, j] = c[0, 0] if exact else float(c[0, 0])
        return cls(rows, acc)

    @classmethod
    def block(cls, grid) -> "TrigMatrix":
        """Assemble a block matrix from a square grid of equally sized TrigMatrix blocks."""
        k = len(grid)
        m = grid[0][0].n
        exact = all(b.exact for row in grid for b in row)
        acc: dict = {}
        for i in range(k):
            for j in range(k):
                for key, c in grid[i][j]._terms.items():
                    if key not in acc:
                        acc[key] = la.zeros((k * m, k * m), exact)
                    acc[key][i * m:(i + 1) * m, j * m:(j + 1) * m] = c if exact else la.to_float(c)
        return cls(k * m, acc)

    # inspection -------------------------------------------------------------

    @property
    def L(self) -> int:
        return max((l for _, l, _ in self._terms), default=0)

    @property
    def N(self) -> int:
        return max((r for r, _, _ in self._terms), default=0)

    def terms(self):
        """Sorted (r, l, parity, matrix) tuples of the nonzero coefficients."""
        return [(r, l, p, self._terms[(r, l, p)]) for (r, l, p) in sorted(self._terms)]

    def coeff(self, r: int, l: int, parity) -> np.ndarray:
        key = (r, l, _PARITY[parity])
        if key in self._terms:
            return self._terms[key]
        return la.zeros((self.n, self.n), self.exact)

    def even(self, r: int, l: int) -> np.ndarray:
        """Cosine coefficient extended to negative l by even symmetry."""
        return self.coeff(r, abs(l), COS)

    def odd(self, r: int, l: int) -> np.ndarray:
        """Sine coefficient extended to negative l by odd symmetry."""
        if l == 0:
            return la.zeros((self.n, self.n), self.exact)
        c = self.coeff(r, abs(l), SIN)
        return c if l > 0 else -c

    def omega_slice(self, r: int) -> "TrigMatrix":
        """The time series multiplying omega**r."""
        return TrigMatrix(self.n, {(0, l, p): c for (rr, l, p), c in self._terms.items() if rr == r})

    def is_zero(self) -> bool:
        return not self._terms

    def max_coeff(self) -> float:
        return max((la.max_abs(c) for c in self._terms.values()), default=0.0)

    def entry(self, i: int, j: int) -> "TrigMatrix":
        return TrigMatrix(1, {k: c[i:i + 1, j:j + 1] for k, c in self._terms.items()})

    def to_float(self) -> "TrigMatrix":
        return TrigMatrix(self.n, {k: la.to_float(c) for k, c in self._terms.items()}, scalar=self.scalar)

    def equals(self, other: "TrigMatrix", tol: float = 0.0) -> bool:
        diff = self - other
        if diff.exact:
            return diff.is_zero()
        return diff.max_coeff() <= tol

    def __eq__(self, other):
        return isinstance(other, TrigMatrix) and self.n == other.n and self.equals(other)

    __hash__ = None

    def __repr__(self):
        kind = "exact" if self.exact else "float"
        return f"TrigMatrix(n={self.n}, L={self.L}, N={self.N}, {kind}, terms={len(self._terms)})"

    # evaluation -------------------------------------------------------------

    def coefficients_at(self, omega: float):
        """Collapse omega powers: float arrays (cos[L+1,n,n], sin[L+1,n,n])."""
        L = self.L
        cos_c = np.zeros((L + 1, self.n, self.n))
        sin_c = np.zeros((L + 1, self.n, self.n))
        for (r, l, p), c in self._terms.items():
            target = cos_c if p == COS else sin_c
            target[l] += (float(omega) ** r) * la.to_float(c)
        return cos_c, sin_c

    def evaluate(self, omega: float, t: float) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        wt = float(omega) * float(t)
        for (r, l, p), c in self._terms.items():
            f = math.cos(l * wt) if p == COS else math.sin(l * wt)
            out += (float(omega) ** r) * f * la.to_float(c)
        return out

    def sample(self, omega: float, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        cos_c, sin_c = self.coefficients_at(omega)
        ls = np.arange(cos_c.shape[0])
        phase = np.outer(ts, ls) * float(omega)
        return np.einsum("tl,lij->tij", np.cos(phase), cos_c) + np.einsum("tl,lij->tij", np.sin(phase), sin_c)

    def at_omega_zero(self) -> np.ndarray:
        """A(t | omega = 0): only the omega**0 cosine coefficients survive."""
        out = la.zeros((self.n, self.n), self.exact)
        for (r, l, p), c in self._terms.items():
            if r == 0 and p == COS:
                out = out + c
        return out

    def at_phase_zero(self, r: int) -> np.ndarray:
        """Value of the omega**r slice at omega t = 0 (sum of its cosine coefficients)."""
        out = la.zeros((self.n, self.n), self.exact)
        for (rr, l, p), c in self._terms.items():
            if rr == r and p == COS:
                out = out + c
        return out

    def average(self) -> OmegaPolyMatrix:
        """Mean over one period as a polynomial in omega."""
        return OmegaPolyMatrix([self.coeff(r, 0, COS) for r in range(self.N + 1)])

    # arithmetic -------------------------------------------------------------

    def _check(self, other: "TrigMatrix"):
        if not isinstance(other, TrigMatrix):
            raise TypeError("expected TrigMatrix")
        if other.n != self.n:
            raise ValueError(f"size mismatch: {self.n} vs {other.n}")

    def _lift(self, other) -> "TrigMatrix":
        if isinstance(other, TrigMatrix):
            return other
        if isinstance(other, OmegaPoly):
            return TrigMatrix.identity(self.n, other.exact).scale(other)
        if np.ndim(other) == 0:
            return TrigMatrix.identity(self.n).scale(other)
        return TrigMatrix.constant(other)

    def __add__(self, other):
        other = self._lift(other)
        self._check(other)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            if k in acc:
                a, b = la.unify(acc[k], c)
                acc[k] = a + b
            else:
                acc[k] = c
        return TrigMatrix(self.n, acc)

    __radd__ = __add__

    def __neg__(self):
        return TrigMatrix(self.n, {k: -c for k, c in self._terms.items()}, scalar=self.scalar)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "TrigMatrix":
        """Multiply by a real number or an OmegaPoly."""
        if isinstance(s, OmegaPoly):
            acc: dict = {}
            for i, c in enumerate(s.coeffs):
                for (r, l, p), m in self._terms.items():
                    key = (r + i, l, p)
                    term = m * c if (la.is_exact_array(m) and s.exact) else la.to_float(m) * float(c)
                    if key in acc:
                        a, b = la.unify(acc[key], term)
                        acc[key] = a + b
                    else:
                        acc[key] = term
            return TrigMatrix(self.n, acc, scalar=self.scalar)
        if isinstance(s, (int, Fraction)) and not isinstance(s, bool):
            s = Fraction(s)
            return TrigMatrix(self.n, {k: (m * s if la.is_exact_array(m) else m * float(s))
                                       for k, m in self._terms.items()}, scalar=self.scalar)
        return TrigMatrix(self.n, {k: la.to_float(m) * float(s) for k, m in self._terms.items()},
                          scalar=self.scalar)

    def __mul__(self, other):
        if isinstance(other, TrigMatrix):
            if other.n == 1 and self.n != 1:
                return self._product(other, scalar_right=True)
            if self.n == 1 and other.n != 1:
                return other._product(self, scalar_right=True)
            return self._product(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __matmul__(self, other):
        if not isinstance(other, TrigMatrix):
            other = TrigMatrix.constant(other)
        self._check(other)
        return self._product(other)

    def __rmatmul__(self, other):
        return TrigMatrix.constant(other)._product(self)

    def multiply(self, other: "TrigMatrix") -> "TrigMatrix":
        return self @ other

    def _product(self, other: "TrigMatrix", scalar_right: bool = False) -> "TrigMatrix":
        """Exact product via the product-to-sum identities."""
        exact = self.exact and other.exact
        h = la.half(exact)
        acc: dict = {}

        def put(r, l, p, sign, mat):
            if l < 0:
                if p == SIN:
                    sign = -sign
                l = -l
            if l == 0 and p == SIN:
                return
            key = (r, l, p)
            val = mat * h if sign > 0 else mat * (-h)
            if key in acc:
                acc[key] = acc[key] + val
            else:
                acc[key] = val

        for (r1, l1, p1), x in self._terms.items():
            for (r2, l2, p2), y in other._terms.items():
                x_, y_ = la.unify(x, y)
                xy = x_ * y_[0, 0] if scalar_right else x_ @ y_
                r = r1 + r2
                if p1 == COS and p2 == COS:
                    put(r, l1 - l2, COS, 1, xy)
                    put(r, l1 + l2, COS, 1, xy)
                elif p1 == SIN and p2 == SIN:
                    put(r, l1 - l2, COS, 1, xy)
                    put(r, l1 + l2, COS, -1, xy)
                elif p1 == COS and p2 == SIN:
                    put(r, l1 + l2, SIN, 1, xy)
                    put(r, l1 - l2, SIN, -1, xy)
                else:
                    put(r, l1 + l2, SIN, 1, xy)
                    put(r, l1 - l2, SIN, 1, xy)
        return TrigMatrix(self.n, acc, scalar=self.scalar and other.scalar)

    def transpose(self) -> "TrigMatrix":
        return TrigMatrix(self.n, {k: c.T.copy() for k, c in self._terms.items()})

    def conjugate_by(self, u) -> "TrigMatrix":
        """Coefficient-wise U^{-1} M U for a constant invertible U."""
        u = la.coerce_matrix(u)
        uinv = la.inverse(u)
        return TrigMatrix(self.n, {k: _mm(_mm(uinv, c), u) for k, c in self._terms.items()})

    def right_multiply(self, v) -> "TrigMatrix":
        v = la.coerce_matrix(v)
        return TrigMatrix(self.n, {k: _mm(c, v) for k, c in self._terms.items()})

    def left_multiply(self, v) -> "TrigMatrix":
        v = la.coerce_matrix(v)
        return TrigMatrix(self.n, {k: _mm(v, c) for k, c in self._terms.items()})

    # calculus ---------------------------------------------------------------

    def differentiate(self) -> "TrigMatrix":
        """d/dt termwise; each term gains one power of omega."""
        acc = {}
        for (r, l, p), c in self._terms.items():
            if l == 0:
                continue
            if p == COS:
                acc[(r + 1, l, SIN)] = c * (-l)
            else:
                acc[(r + 1, l, COS)] = c * l
        return TrigMatrix(self.n, acc, scalar=self.scalar)

    def even_odd_split(self):
        even = {k: c for k, c in self._terms.items() if k[2] == COS}
        odd = {k: c for k, c in self._terms.items() if k[2] == SIN}
        return TrigMatrix(self.n, even), TrigMatrix(self.n, odd)

    def trace_series(self) -> TraceInfo:
        acc = {}
        for k, c in self._terms.items():
            acc[k] = np.array([[sum(c[i, i] for i in range(self.n))]], dtype=c.dtype)
        total = TrigMatrix(1, acc)
        inv_n = Fraction(1, self.n) if self.exact else 1.0 / self.n
        psi = total.scale(inv_n)
        psi0 = OmegaPoly([psi.coeff(r, 0, COS)[0, 0] for r in range(psi.N + 1)])
        psi1 = TrigMatrix(1, {k: c for k, c in psi._terms.items() if k[1] != 0})
        anti = tuple((r, l, p, c[0, 0]) for (r, l, p), c in sorted(psi1._terms.items()))
        return TraceInfo(total, psi, psi0, psi1, PeriodicAntiderivative(anti))

    # determinant and inverse ------------------------------------------------

    def determinant(self) -> "TrigMatrix":
        return _det([[self.entry(i, j) for j in range(self.n)] for i in range(self.n)])

    def adjugate(self) -> "TrigMatrix":
        n = self.n
        if n == 1:
            return TrigMatrix.identity(1, self.exact)
        grid = [[self.entry(i, j) for j in range(n)] for i in range(n)]
        adj = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = [[grid[a][b] for b in range(n) if b != j] for a in range(n) if a != i]
                cof = _det(minor)
                adj[j][i] = cof if (i + j) % 2 == 0 else -cof
        return TrigMatrix.from_entries(adj)

    def inverse_if_const_det(self) -> "TrigMatrix":
        d = self.determinant()
        if d.is_zero():
            raise SingularDeterminant("determinant is identically zero")
        if d.L > 0 or d.N > 0:
            raise NonConstantDeterminant(f"determinant has L={d.L}, N={d.N}")
        value = d.coeff(0, 0, COS)[0, 0]
        inv = (1 / value) if d.exact else 1.0 / float(value)
        return self.adjugate().scale(inv)

    # exponential form -------------------------------------------------------

    def to_exponential(self, omega: float) -> "ExpTrigMatrix":
        cos_c, sin_c = self.coefficients_at(omega)
        coeffs = {0: cos_c[0].astype(complex)}
        for l in range(1, cos_c.shape[0]):
            coeffs[l] = (cos_c[l] - 1j * sin_c[l]) / 2
            coeffs[-l] = (cos_c[l] + 1j * sin_c[l]) / 2
        return ExpTrigMatrix(self.n, coeffs)


def _det(grid) -> TrigMatrix:
    n = len(grid)
    if n == 1:
        return grid[0][0]
    if n == 2:
        return grid[0][0] * grid[1][1] - grid[0][1] * grid[1][0]
    total = None
    for j in range(n):
        if grid[0][j].is_zero():
            continue
        minor = [[grid[a][b] for b in range(n) if b != j] for a in range(1, n)]
        term = grid[0][j] * _det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total if total is not None else TrigMatrix.zeros(1)


class ExpTrigMatrix:
    """Complex exponential form sum_l A_l exp(i l omega t) at a fixed omega."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: dict):
        self.n = n
        self.coeffs = {int(l): np.asarray(c, dtype=complex).reshape(n, n) for l, c in coeffs.items()}

    @property
    def L(self) -> int:
        return max((abs(l) for l, c in self.coeffs.items() if np.any(c != 0)), default=0)

    def coeff(self, l: int) -> np.ndarray:
        return self.coeffs.get(l, np.zeros((self.n, self.n), dtype=complex))

    def is_real(self, tol: float = 1e-14) -> bool:
        return all(np.max(np.abs(self.coeff(-l) - np.conj(self.coeff(l))), initial=0.0) <= tol
                   for l in range(self.L + 1))

    def evaluate(self, omega: float, t: float) -> np.ndarray:
        return sum(c * np.exp(1j * l * omega * t) for l, c in self.coeffs.items())

    def from_exponential(self, tol: float = 1e-14) -> TrigMatrix:
        if not self.is_real(tol):
            raise ValueError("coefficients do not describe a real matrix function")
        terms = {(0, 0, COS): self.coeff(0).real.copy()}
        for l in range(1, self.L + 1):
            terms[(0, l, COS)] = (self.coeff(l) + self.coeff(-l)).real
            terms[(0, l, SIN)] = (1j * (self.coeff(l) - self.coeff(-l))).real
        return TrigMatrix(self.n, terms)


def from_exponential(e: ExpTrigMatrix) -> TrigMatrix:
    return e.from_exponential()


# --------------------------------------------------------------------------
# scalar helpers and embeddings
# --------------------------------------------------------------------------


def cos_term(l: int, coeff=1, r: int = 0) -> TrigMatrix:
    """Scalar coeff * omega**r * cos(l omega t)."""
    return TrigMatrix(1, {(r, l, COS): [[coeff]]})


def sin_term(l: int, coeff=1, r: int = 0) -> TrigMatrix:
    """Scalar coeff * omega**r * sin(l omega t)."""
    return TrigMatrix(1, {(r, l, SIN): [[coeff]]})


def scalar(value, r: int = 0) -> TrigMatrix:
    return TrigMatrix(1, {(r, 0, COS): [[value]]})


def _zero_like(m: TrigMatrix) -> TrigMatrix:
    return TrigMatrix.zeros(m.n)


def complex_embed(re: TrigMatrix, im: TrigMatrix | None = None) -> TrigMatrix:
    """Real 2n representation [[A, -B], [B, A]] of A + iB."""
    im = _zero_like(re) if im is None else im
    re._check(im)
    return TrigMatrix.block([[re, -im], [im, re]])


def split_embed(re: TrigMatrix, im: TrigMatrix | None = None) -> TrigMatrix:
    """Real 2n representation [[A, B], [B, A]] of the split-complex A + jB."""
    im = _zero_like(re) if im is None else im
    re._check(im)
    return TrigMatrix.block([[re, im], [im, re]])


def evenodd_embed(a: TrigMatrix) -> TrigMatrix:
    """[[A_odd, A_even], [A_even, A_odd]] acting on (x_even, x_odd)."""
    even, odd = a.even_odd_split()
    return TrigMatrix.block([[odd, even], [even, odd]])


def evenodd_solution(p: TrigMatrix, r: OmegaPolyMatrix):
    """Factor pair solving the even-odd embedding when (p, r) solves the original system."""
    even, odd = p.even_odd_split()
    p_emb = TrigMatrix.block([[even, odd], [odd, even]])
    n = r.n
    slices = []
    for s in r.slices:
        z = la.zeros((n, n), la.is_exact_array(s))
        slices.append(np.block([[z, s], [s, z]]))
    return p_emb, OmegaPolyMatrix(slices)


def block_omega_matrix(grid) -> OmegaPolyMatrix:
    deg = max(m.degree for row in grid for m in row)
    slices = [np.block([[m.slice(r) for m in row] for row in grid]) for r in range(deg + 1)]
    return OmegaPolyMatrix(slices)
