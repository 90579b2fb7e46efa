"""Exponential stability of Floquet solutions from R(omega), and frequency sweeps."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _linalg as la
from .trigmat import OmegaPoly, OmegaPolyMatrix

AXIS_RTOL = 1e-9


class StabilityClass(str, enum.Enum):
    STABLE = "stable"
    MARGINAL = "marginal"
    UNSTABLE = "unstable"


@dataclass
class StabilityVerdict:
    cls: StabilityClass
    eigenvalues: np.ndarray
    max_real_part: float
    semisimple_on_axis: bool


@dataclass
class SweepRow:
    omega: float
    eigenvalues: np.ndarray
    cls: StabilityClass
    discriminant: float | None = None


def _as_opm(R) -> OmegaPolyMatrix:
    if isinstance(R, OmegaPolyMatrix):
        return R
    return OmegaPolyMatrix([la.coerce_matrix(R)])


def _exact_omega(omega):
    if isinstance(omega, (int, Fraction)):
        return Fraction(omega)
    return Fraction(float(omega))  # exact binary value of the float


def _poly_at(poly: OmegaPoly, omega):
    if poly.exact:
        return float(poly(_exact_omega(omega)))
    return float(poly(float(omega)))


def trace_det(R) -> tuple[OmegaPoly, OmegaPoly]:
    """trace and determinant of a 2 x 2 R as polynomials in omega."""
    R = _as_opm(R)
    if R.n != 2:
        raise ValueError("trace/determinant conditions need a 2 x 2 R")
    a, b, c, d = R.entry(0, 0), R.entry(0, 1), R.entry(1, 0), R.entry(1, 1)
    return a + d, a * d - b * c


def discriminant(R) -> OmegaPoly:
    tr, det = trace_det(R)
    return tr * tr - det * 4


def eigenvalues(R, omega) -> np.ndarray:
    """Eigenvalues of R(omega); closed form for 2 x 2 so double roots stay accurate."""
    R = _as_opm(R)
    if R.n == 2:
        tr, det = trace_det(R)
        t, d = _poly_at(tr, omega), _poly_at(discriminant(R), omega)
        root = math.sqrt(d) if d >= 0 else 1j * math.sqrt(-d)
        return np.array([(t + root) / 2, (t - root) / 2], dtype=complex)
    return np.linalg.eigvals(R.evaluate(float(omega))).astype(complex)


def _on_axis(lam: complex, tol: float) -> bool:
    return abs(lam.real) <= tol * (1.0 + abs(lam))


def _semisimple(M: np.ndarray, lam: complex, vals: np.ndarray) -> bool:
    n = M.shape[0]
    mult = int(np.sum(np.abs(vals - lam) <= 1e-7 * (1.0 + abs(lam))))
    s = np.linalg.svd(M - lam * np.eye(n), compute_uv=False)
    rank = int(np.sum(s > 1e-8 * max(1.0, s[0])))
    return rank == n - mult


def classify(R, omega, tol: float = AXIS_RTOL) -> StabilityVerdict:
    R = _as_opm(R)
    vals = eigenvalues(R, omega)
    M = R.evaluate(float(omega))
    max_re = float(np.max(vals.real))
    axis = [v for v in vals if _on_axis(v, tol)]
    semisimple = all(_semisimple(M, v, vals) for v in axis)
    if any(v.real > 0 and not _on_axis(v, tol) for v in vals):
        cls = StabilityClass.UNSTABLE
    elif axis:
        cls = StabilityClass.MARGINAL if semisimple else StabilityClass.UNSTABLE
    else:
        cls = StabilityClass.STABLE
    return StabilityVerdict(cls, vals, max_re, semisimple)


def conditions_2x2(R, omega):
    """(trace, det, stable) with stable iff trace < 0 and det > 0."""
    tr, det = trace_det(R)
    t, d = _poly_at(tr, omega), _poly_at(det, omega)
    return t, d, (t < 0 and d > 0)


def sweep(R, omega_grid) -> list[SweepRow]:
    R = _as_opm(R)
    disc = discriminant(R) if R.n == 2 else None
    rows = []
    for omega in sorted(omega_grid, key=float):
        v = classify(R, omega)
        rows.append(SweepRow(float(omega), v.eigenvalues, v.cls,
                             _poly_at(disc, omega) if disc is not None else None))
    return rows


def _real_roots(poly: OmegaPoly) -> list[float]:
    if poly.degree < 1:
        return []
    if poly.exact:
        import sympy as sp

        x = sp.Symbol("x")
        expr = sum(sp.Rational(c.numerator, c.denominator) * x ** k for k, c in enumerate(poly.coeffs))
        return sorted({float(r) for r in sp.real_roots(sp.Poly(expr, x))})
    roots = np.roots(list(reversed([float(c) for c in poly.coeffs])))
    return sorted({float(r.real) for r in roots if abs(r.imag) <= 1e-10 * (1 + abs(r))})


def critical_frequencies(R, grid=None) -> list[tuple[float, str]]:
    """Frequencies where the spectrum of R(omega) changes character.

    2 x 2: roots of the discriminant ("discriminant"), real eigenvalue
    crossing zero ("eigenvalue-zero", roots of det R) and complex pairs
    crossing the axis ("trace-zero" with negative discriminant).  Larger R
    needs a grid; sign changes of max Re(lambda) are refined by bisection.
    """
    R = _as_opm(R)
    events = []
    if R.n == 2:
        tr, det = trace_det(R)
        disc = discriminant(R)
        events += [(w, "discriminant") for w in _real_roots(disc)]
        events += [(w, "eigenvalue-zero") for w in _real_roots(det)]
        events += [(w, "trace-zero") for w in _real_roots(tr) if _poly_at(disc, w) < 0]
        return sorted(events)
    if grid is None:
        return []

    def g(w):
        return float(np.max(np.linalg.eigvals(R.evaluate(w)).real))

    ws = sorted(float(w) for w in grid)
    for lo, hi in zip(ws[:-1], ws[1:]):
        glo, ghi = g(lo), g(hi)
        if glo == 0.0:
            events.append((lo, "max-real-zero"))
            continue
        if glo * ghi < 0:
            while hi - lo > 1e-10:
                mid = 0.5 * (lo + hi)
                if g(mid) * glo > 0:
                    lo = mid
                else:
                    hi = mid
            events.append((0.5 * (lo + hi), "max-real-zero"))
    return events
