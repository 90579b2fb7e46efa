"""Finite cosine-sine block systems and the power-of-omega Floquet solver.

Stacked unknown layout (one n x n block per slot)::

    [2 P_0, P_1^even, P_1^odd, ..., P_p^even, P_p^odd]

so that slot 0 holds the doubled constant term, matching the classical
cosine-sine block formulas where A_0^even is twice the mean.  The identity
A P = dP/dt + P R then reads, slice by slice in powers of omega,

    At^{r} X = E X R^{r}

where E pads X with zero blocks for the harmonics above p.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import _linalg as la
from .trigmat import (COS, SIN, OmegaPoly, OmegaPolyMatrix, PeriodicAntiderivative, TrigMatrix,
                      NonConstantDeterminant, SingularDeterminant)

RESIDUAL_TOL = 1e-9
CONSTANCY_RTOL = 1e-8


def default_tolerance() -> float:
    env = os.environ.get("LPTV_TOL")
    return float(env) if env else RESIDUAL_TOL


class NoSolutionWithinPMax(RuntimeError):
    pass


class NotConstantInT(ValueError):
    pass


class SingularP(ValueError):
    pass


class CanonicalFormUnreliable(ValueError):
    pass


class SizeMismatch(ValueError):
    pass


# --------------------------------------------------------------------------
# block assembly
# --------------------------------------------------------------------------


def slot(k: int, parity: int) -> int:
    """Block index of harmonic k with the given parity in the stacked layout."""
    if k == 0:
        if parity != COS:
            raise ValueError("no sine slot at k = 0")
        return 0
    return 2 * k - 1 + (1 if parity == SIN else 0)


def _even(A: TrigMatrix, r: int, m: int):
    """Doubled-convention cosine coefficient: e_0 is twice the mean."""
    c = A.even(r, m)
    return c * 2 if m == 0 else c


def _odd(A: TrigMatrix, r: int, m: int):
    return A.odd(r, m)


@dataclass(frozen=True)
class BlockSystem:
    n: int
    p: int
    rows: int  # highest harmonic index K carried by the row blocks (K >= p)
    N: int
    slices: tuple  # slice r: array (n(2K+1), n(2p+1))
    zero_row_check: bool = True

    def block(self, r: int) -> np.ndarray:
        """Square Ã^{r} (rows k <= p)."""
        m = self.n * (2 * self.p + 1)
        return self.slices[r][:m, :m] if r < len(self.slices) else la.zeros((m, m), self.exact)

    @property
    def exact(self) -> bool:
        return la.is_exact_array(self.slices[0])

    @property
    def size(self) -> int:
        return self.n * (2 * self.p + 1)

    def symbolic(self, omega) -> np.ndarray:
        """Square block matrix with all omega powers summed at a numeric omega."""
        acc = la.to_float(self.block(0)).astype(float)
        for r in range(1, len(self.slices)):
            acc = acc + omega ** r * la.to_float(self.block(r))
        return acc


def assemble(A: TrigMatrix, p: int, extra_rows: int = 0) -> BlockSystem:
    """Per-power cosine-sine block matrices for the hypothesis that P has p harmonics."""
    if p < 0:
        raise ValueError("p must be non-negative")
    n = A.n
    K = p + extra_rows
    exact = A.exact
    N = max(A.N, 1)
    half = la.half(exact)
    ncols = n * (2 * p + 1)
    nrows = n * (2 * K + 1)
    slices = []
    for r in range(N + 1):
        M = la.zeros((nrows, ncols), exact)

        def put(kr, pr, kc, pc, blk):
            i, j = slot(kr, pr) * n, slot(kc, pc) * n
            M[i:i + n, j:j + n] = M[i:i + n, j:j + n] + blk

        # row k = 0 (the doubled constant equation)
        put(0, COS, 0, COS, A.even(r, 0))
        for l in range(1, p + 1):
            put(0, COS, l, COS, _even(A, r, l))
            put(0, COS, l, SIN, _odd(A, r, l))
        for k in range(1, K + 1):
            put(k, COS, 0, COS, _even(A, r, k) * half)
            put(k, SIN, 0, COS, _odd(A, r, k) * half)
            for l in range(1, p + 1):
                put(k, COS, l, COS, (_even(A, r, k + l) + _even(A, r, k - l)) * half)
                put(k, COS, l, SIN, (_odd(A, r, k + l) - _odd(A, r, k - l)) * half)
                put(k, SIN, l, COS, (_odd(A, r, k - l) + _odd(A, r, k + l)) * half)
                put(k, SIN, l, SIN, (_even(A, r, k - l) - _even(A, r, k + l)) * half)
        if r == 1:
            one = la.eye(n, exact)
            for k in range(1, p + 1):
                put(k, COS, k, SIN, -k * one)
                put(k, SIN, k, COS, k * one)
        slices.append(M)
    _check_zero_sine_row(A, p)
    return BlockSystem(n, p, K, A.N, tuple(slices))


def zero_sine_row(A: TrigMatrix, r: int, p: int) -> np.ndarray:
    """The k = 0 sine-row blocks [(o_l + o_{-l})/2, (e_{-l} - e_l)/2] for l = 0..p."""
    exact = A.exact
    half = la.half(exact)
    blocks = [_odd(A, r, 0) * half]
    for l in range(1, p + 1):
        blocks.append((_odd(A, r, -l) + _odd(A, r, l)) * half)
        blocks.append((_even(A, r, -l) - _even(A, r, l)) * half)
    return np.concatenate(blocks, axis=1)


def _check_zero_sine_row(A: TrigMatrix, p: int):
    for r in range(A.N + 1):
        if not la.all_zero(zero_sine_row(A, r, p), 0.0):
            raise AssertionError("k = 0 sine row does not vanish for a real system")


def stack(P: TrigMatrix, p: int | None = None) -> np.ndarray:
    """Stacked coefficient column of an omega-independent P."""
    if P.N > 0:
        raise ValueError("P must not depend on omega")
    p = P.L if p is None else p
    n = P.n
    blocks = [P.coeff(0, 0, COS) * 2]
    for k in range(1, p + 1):
        blocks.append(P.coeff(0, k, COS))
        blocks.append(P.coeff(0, k, SIN))
    return np.concatenate(blocks, axis=0)


def unstack(X: np.ndarray, n: int) -> TrigMatrix:
    p = (X.shape[0] // n - 1) // 2
    exact = la.is_exact_array(X)
    terms = [(0, 0, COS, X[0:n] * la.half(exact))]
    for k in range(1, p + 1):
        terms.append((0, k, COS, X[slot(k, COS) * n:(slot(k, COS) + 1) * n]))
        terms.append((0, k, SIN, X[slot(k, SIN) * n:(slot(k, SIN) + 1) * n]))
    return TrigMatrix.from_terms(terms, n=n)


# --------------------------------------------------------------------------
# residual and recovery of R
# --------------------------------------------------------------------------


def times_omega_matrix(P: TrigMatrix, R: OmegaPolyMatrix) -> TrigMatrix:
    acc = TrigMatrix.zeros(P.n)
    for r, sl in enumerate(R.slices):
        acc = acc + P.right_multiply(sl).scale(OmegaPoly([0] * r + [1]))
    return acc


def residual(A: TrigMatrix, P: TrigMatrix, R: OmegaPolyMatrix) -> TrigMatrix:
    """A P - dP/dt - P R as a TrigMatrix."""
    if not (A.n == P.n == R.n):
        raise SizeMismatch(f"sizes {A.n}, {P.n}, {R.n}")
    return A @ P - P.differentiate() - times_omega_matrix(P, R)


def residual_norm(A: TrigMatrix, P: TrigMatrix, R: OmegaPolyMatrix) -> float:
    return residual(A, P, R).max_coeff()


def recover_R(A: TrigMatrix, P: TrigMatrix, omega_samples=None, t_samples=None,
              tol: float = CONSTANCY_RTOL) -> OmegaPolyMatrix:
    """R = P^{-1}(A P - dP/dt), checked for constancy in t.

    With a constant-determinant P the product is formed exactly; otherwise the
    right-hand side is sampled on a (omega, t) grid and fitted by a polynomial
    in omega of degree at most N_A + 1.
    """
    try:
        p_inv = P.inverse_if_const_det()
    except NonConstantDeterminant:
        p_inv = None
    except SingularDeterminant as exc:
        raise SingularP(str(exc)) from None
    if p_inv is not None:
        rhs = p_inv @ (A @ P - P.differentiate())
        if rhs.exact:
            if rhs.L > 0:
                raise NotConstantInT(f"P^-1 (A P - dP/dt) still has harmonics up to {rhs.L}")
            return rhs.average()
        big = max(1.0, rhs.max_coeff())
        periodic = TrigMatrix(rhs.n, {k: c for k, c in rhs._terms.items() if k[1] != 0})
        if periodic.max_coeff() > tol * big:
            raise NotConstantInT(f"periodic remainder {periodic.max_coeff():.3e}")
        return rhs.average()
    return _recover_R_sampled(A, P, omega_samples, t_samples, tol)


def _recover_R_sampled(A, P, omega_samples, t_samples, tol):
    deg = A.N + 1
    omegas = list(omega_samples) if omega_samples is not None else [0.5 + 0.37 * i for i in range(deg + 3)]
    dP = P.differentiate()
    values = []
    for w in omegas:
        T = 2 * math.pi / w
        ts = list(t_samples) if t_samples is not None else [T * j / 9 for j in range(9)]
        per_t = []
        for t in ts:
            Pt = P.evaluate(w, t)
            if abs(np.linalg.det(Pt)) < 1e-14:
                raise SingularP(f"P singular at omega={w}, t={t}")
            per_t.append(np.linalg.solve(Pt, A.evaluate(w, t) @ Pt - dP.evaluate(w, t)))
        per_t = np.array(per_t)
        spread = np.max(np.abs(per_t - per_t[0]))
        if spread > tol * (1.0 + np.max(np.abs(per_t[0]))):
            raise NotConstantInT(f"spread {spread:.3e} at omega={w}")
        values.append(per_t.mean(axis=0))
    V = np.vander(np.array(omegas), deg + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(V, np.array(values).reshape(len(omegas), -1), rcond=None)
    n = A.n
    return OmegaPolyMatrix([coef[r].reshape(n, n) for r in range(deg + 1)])


# --------------------------------------------------------------------------
# transformations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceShift:
    psi0: OmegaPoly
    Psi1: PeriodicAntiderivative
    psi1: TrigMatrix | None = None

    @property
    def is_zero(self) -> bool:
        return self.psi0.is_zero() and self.Psi1.is_zero()


def shift_trace(A: TrigMatrix):
    """A - (trace A / n) I, with the removed scalar recorded."""
    info = A.trace_series()
    shifted = A - TrigMatrix.identity(A.n, A.exact) * info.psi
    return shifted, TraceShift(info.psi0, info.Psi1, info.psi1)


@dataclass(frozen=True)
class FloquetSolution:
    P: TrigMatrix
    R: OmegaPolyMatrix
    p: int
    detP: OmegaPoly
    transforms: dict = field(default_factory=dict)
    residual_norm: float = 0.0
    shift: TraceShift | None = None

    def P_eval(self, omega: float, t: float) -> np.ndarray:
        """P(t) including the scalar exp(Psi1) factor of a trace shift."""
        value = self.P.evaluate(omega, t)
        if self.shift is not None and not self.shift.Psi1.is_zero():
            value = value * math.exp(self.shift.Psi1(omega, t))
        return value

    def R_eval(self, omega: float) -> np.ndarray:
        return self.R.evaluate(omega)


def _det_poly(P: TrigMatrix) -> OmegaPoly:
    d = P.determinant()
    if d.L > 0:
        raise NonConstantDeterminant("det P is not constant in t")
    return OmegaPoly([d.coeff(r, 0, COS)[0, 0] for r in range(d.N + 1)])


def unshift(sol: FloquetSolution, shift: TraceShift) -> FloquetSolution:
    if shift.is_zero:
        return sol
    psi0 = shift.psi0
    slices = list(sol.R.slices)
    exact = sol.R.exact and psi0.exact
    n = sol.R.n
    while len(slices) < len(psi0.coeffs):
        slices.append(la.zeros((n, n), exact))
    out = []
    for r, sl in enumerate(slices):
        c = psi0.coeffs[r] if r < len(psi0.coeffs) else 0
        sl, eye = la.unify(sl, la.eye(n, exact))
        out.append(sl + eye * (c if la.is_exact_array(sl) else float(c)))
    R = OmegaPolyMatrix(out)
    transforms = dict(sol.transforms)
    transforms["trace_shift"] = {"psi0": psi0, "Psi1_terms": shift.Psi1.terms}
    return replace(sol, R=R, transforms=transforms, shift=shift if not shift.Psi1.is_zero() else None)


def similarity_R(sol: FloquetSolution, V) -> FloquetSolution:
    """(P V, V^{-1} R V)."""
    V = la.coerce_matrix(V)
    if la.is_exact_array(V):
        if la.det_exact(V) == 0:
            raise np.linalg.LinAlgError("singular V")
    elif abs(np.linalg.det(V)) < 1e-14:
        raise np.linalg.LinAlgError("singular V")
    P = sol.P.right_multiply(V)
    R = sol.R.similar(V)
    det_v = la.det_exact(V) if la.is_exact_array(V) else float(np.linalg.det(V))
    transforms = dict(sol.transforms)
    transforms.setdefault("right_factors", []).append(V)
    return replace(sol, P=P, R=R, detP=sol.detP * det_v, transforms=transforms)


def similarity_A(A: TrigMatrix, U) -> TrigMatrix:
    """U^{-1} A U; if (P, R) solves the result then (U P, R) solves A."""
    U = la.coerce_matrix(U)
    if la.is_exact_array(U):
        if la.det_exact(U) == 0:
            raise np.linalg.LinAlgError("singular U")
    elif abs(np.linalg.det(U)) < 1e-14:
        raise np.linalg.LinAlgError("singular U")
    return A.conjugate_by(U)


def canonicalize_at_zero(A: TrigMatrix, U=None):
    """(U, J, U^{-1} A U) with J the real canonical form of A(t | omega = 0)."""
    A0 = A.at_omega_zero()
    if U is None:
        U, J = real_canonical_form(A0)
    else:
        U = la.coerce_matrix(U)
        J = _mm(_mm(la.inverse(U), A0), U)
    return U, J, A.conjugate_by(U)


def _mm(a, b):
    a, b = la.unify(a, b)
    return a @ b if not la.is_exact_array(a) else np.dot(a, b)


def real_canonical_form(M):
    """U, J with U^{-1} M U = J in real Jordan form.

    Rational matrices go through sympy's Jordan form; complex eigenvalue
    pairs alpha +- i beta become [[alpha, beta], [-beta, alpha]] blocks taken
    from U = [Re v, Im v] for the eigenvector of alpha + i beta.  If the
    eigenvalues are irrational or the input is float, a float real Schur
    style construction is used and CanonicalFormUnreliable is raised when
    eigenvalues cluster.
    """
    if _is_real_canonical(M):
        return la.eye(M.shape[0], la.is_exact_array(M)), M
    if la.is_exact_array(M):
        res = _real_jordan_exact(M)
        if res is not None:
            return res
    return _real_canonical_float(la.to_float(M))


def _is_real_canonical(M) -> bool:
    """Already a real Jordan form: Jordan ones on the superdiagonal, [[a, b], [-b, a]] blocks."""
    n = M.shape[0]
    for i in range(n):
        for j in range(n):
            if abs(i - j) > 1 and M[i, j] != 0:
                return False
    i = 0
    while i < n:
        if i + 1 < n and M[i + 1, i] != 0:
            if M[i, i] != M[i + 1, i + 1] or M[i, i + 1] != -M[i + 1, i]:
                return False
            if i + 2 < n and (M[i + 1, i + 2] != 0 or M[i + 2, i + 1] != 0):
                return False
            i += 2
            continue
        if i + 1 < n and M[i, i + 1] != 0 and (M[i, i + 1] != 1 or M[i, i] != M[i + 1, i + 1]):
            return False
        i += 1
    return True


def _real_jordan_exact(M):
    import sympy as sp

    n = M.shape[0]
    S = sp.Matrix(n, n, lambda i, j: sp.Rational(M[i, j].numerator, M[i, j].denominator))
    # jordan_form on irrational spectra is very slow and useless here
    x = sp.Symbol("x")
    for fac, _ in sp.factor_list(S.charpoly(x).as_expr(), x)[1]:
        deg = sp.degree(fac, x)
        if deg == 1:
            continue
        if deg != 2:
            return None
        a2, a1, a0 = sp.Poly(fac, x).all_coeffs()
        disc = a1 * a1 - 4 * a2 * a0
        if disc >= 0 or not sp.sqrt(-disc).is_rational:
            return None
    try:
        Pm, Jm = S.jordan_form()
    except Exception:
        return None
    # group columns into Jordan chains
    chains = []
    i = 0
    while i < n:
        lam = Jm[i, i]
        j = i
        while j + 1 < n and Jm[j, j + 1] == 1 and Jm[j + 1, j + 1] == lam:
            j += 1
        chains.append((lam, list(range(i, j + 1))))
        i = j + 1
    cols, blocks = [], []
    used = set()
    for idx, (lam, cidx) in enumerate(chains):
        if idx in used:
            continue
        lam = sp.nsimplify(sp.simplify(lam))
        re, im = sp.re(lam), sp.im(lam)
        if im == 0:
            if not lam.is_rational:
                return None
            for c in cidx:
                cols.append([Pm[r, c] for r in range(n)])
            blocks.append(("real", lam, len(cidx)))
            used.add(idx)
            continue
        if im < 0:
            continue
        # find the conjugate chain and drop it
        for jdx, (mu, didx) in enumerate(chains):
            if jdx not in used and jdx != idx and sp.simplify(mu - sp.conjugate(lam)) == 0 and len(didx) == len(cidx):
                used.add(jdx)
                break
        used.add(idx)
        if not (re.is_rational and im.is_rational):
            return None
        for c in cidx:
            v = [sp.expand(Pm[r, c]) for r in range(n)]
            cols.append([sp.re(x) for x in v])
            cols.append([sp.im(x) for x in v])
        blocks.append(("complex", (re, im), len(cidx)))
    # mark blocks that were skipped as conjugates
    if len(cols) != n:
        return None
    U = np.array([[Fraction(int(sp.fraction(sp.nsimplify(cols[j][i]))[0]), int(sp.fraction(sp.nsimplify(cols[j][i]))[1]))
                   for j in range(n)] for i in range(n)], dtype=object)
    if la.det_exact(U) == 0:
        return None
    J = _mm(_mm(la.inverse(U), M), U)
    return U, J


def _real_canonical_float(M: np.ndarray, cluster_tol: float = 1e-6):
    vals, vecs = np.linalg.eig(M)
    n = M.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if abs(vals[i] - vals[j]) < cluster_tol * (1 + abs(vals[i])):
                raise CanonicalFormUnreliable("clustered eigenvalues on the float path")
    cols = []
    done = set()
    order = sorted(range(n), key=lambda i: (vals[i].real, -vals[i].imag))
    for i in order:
        if i in done:
            continue
        lam = vals[i]
        if abs(lam.imag) <= 1e-12 * (1 + abs(lam)):
            cols.append(vecs[:, i].real / np.max(np.abs(vecs[:, i].real)))
            done.add(i)
            continue
        if lam.imag < 0:
            continue
        j = min((k for k in range(n) if k not in done and k != i), key=lambda k: abs(vals[k] - lam.conjugate()))
        done.update({i, j})
        cols.append(vecs[:, i].real)
        cols.append(vecs[:, i].imag)
    U = np.array(cols).T
    if np.linalg.cond(U) > 1e8:
        raise CanonicalFormUnreliable("ill-conditioned eigenvector basis")
    J = np.linalg.solve(U, M @ U)
    return U, J


# --------------------------------------------------------------------------
# the solver
# --------------------------------------------------------------------------

QUADRATIC_MAX_FREE = 8
CANDIDATE_LIMIT = 4000


@dataclass(frozen=True)
class _Family:
    """Affine family vec(X) = x0 + N c of stacked coefficients meeting every linear equation."""

    A: TrigMatrix
    p: int
    x0: np.ndarray
    N: np.ndarray

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def m(self) -> int:
        return self.n * (2 * self.p + 1)

    def matrix(self, vec) -> np.ndarray:
        return np.asarray(vec).reshape(self.n, self.m).T  # column-major vec


def _vec_ops(A: TrigMatrix, p: int):
    """Lifted linear equations on vec(X); returns (matrix, rhs)."""
    n, exact = A.n, A.exact
    bs = assemble(A, p, extra_rows=A.L)
    m = n * (2 * p + 1)
    M = n * (2 * bs.rows + 1)
    E = la.zeros((M, m), exact)
    for i in range(m):
        E[i, i] = Fraction(1) if exact else 1.0
    I = la.eye(n, exact)
    ops, rhs = [], []
    for r, S in enumerate(bs.slices):
        if r == 1:
            op = np.kron(I, S[m:])
        else:
            op = np.kron(I, S) - np.kron(A.at_phase_zero(r).T, E)
        ops.append(op)
        rhs.append(la.zeros(op.shape[0], exact))
    norm = la.zeros((n * n, m * n), exact)
    b = la.zeros(n * n, exact)
    one = Fraction(1) if exact else 1.0
    for j in range(n):
        for i in range(n):
            row = j * n + i
            norm[row, j * m + i] = la.half(exact)
            for k in range(1, p + 1):
                norm[row, j * m + slot(k, COS) * n + i] = one
            b[row] = I[i, j]
    ops.append(norm)
    rhs.append(b)
    return np.concatenate(ops), np.concatenate(rhs), bs


def _linear_family(A: TrigMatrix, p: int):
    op, rhs, _ = _vec_ops(A, p)
    sol = la.solve_affine(op, rhs)
    if sol is None:
        return None
    return _Family(A, p, sol[0], sol[1])


def _first_order_R(A: TrigMatrix, X, p: int):
    """R^{1} = A^{1}(t=0) - sum_k k P_k^odd (from P(0) = I)."""
    n = A.n
    R1 = A.at_phase_zero(1)
    R1, X = la.unify(R1, X)
    for k in range(1, p + 1):
        i = slot(k, SIN) * n
        R1 = R1 - X[i:i + n] * k
    return R1


def _quadratic_defect(fam: _Family, X) -> np.ndarray:
    bs = assemble(fam.A, fam.p)
    S1 = bs.block(1)
    R1 = _first_order_R(fam.A, X, fam.p)
    S1, X, R1 = la.unify(S1, X, R1)
    return _mm(S1, X) - _mm(X, R1)


def _solve_quadratic_exact(fam: _Family):
    """All real rational points of the family that satisfy the first-order slice."""
    import sympy as sp

    d = fam.N.shape[1]
    cs = sp.symbols(f"c0:{d}")

    def rat(v):
        return sp.Rational(v.numerator, v.denominator)

    x = [rat(fam.x0[i]) + sum(rat(fam.N[i, j]) * cs[j] for j in range(d) if fam.N[i, j] != 0)
         for i in range(len(fam.x0))]
    X = sp.Matrix(fam.n, fam.m, x).T
    S1 = sp.Matrix(assemble(fam.A, fam.p).block(1).tolist())
    R1 = sp.Matrix(fam.A.at_phase_zero(1).tolist())
    for k in range(1, fam.p + 1):
        R1 -= k * X[slot(k, SIN) * fam.n:(slot(k, SIN) + 1) * fam.n, :]
    eqs = list({sp.expand(v) for v in (S1 * X - X * R1) if sp.expand(v) != 0})
    if not eqs:
        sols = [{}]
    else:
        sols = sp.solve(eqs, cs, dict=True)
    out = []
    for s in sols:
        vals = []
        ok = True
        for c in cs:
            v = sp.sympify(s.get(c, c)).subs({cc: 0 for cc in cs})
            v = sp.nsimplify(v)
            if not (v.is_real and v.is_rational):
                ok = False
                break
            vals.append(Fraction(int(v.p), int(v.q)))
        if ok:
            out.append(tuple(vals))
    out = sorted(set(out), key=lambda v: (sum(abs(x) for x in v), v))
    for vals in out:
        vec = fam.x0.copy()
        for j, v in enumerate(vals):
            if v:
                vec = vec + fam.N[:, j] * v
        yield fam.matrix(vec)


def _solve_quadratic_float(fam: _Family, tol: float):
    from scipy.optimize import least_squares

    d = fam.N.shape[1]
    x0 = la.to_float(fam.x0)
    N = la.to_float(fam.N)

    def fun(c):
        X = fam.matrix(x0 + N @ c)
        return np.ravel(_quadratic_defect(fam, X))

    rng = np.random.default_rng(0)
    starts = [np.zeros(d)] + [rng.normal(size=d) for _ in range(7)]
    for c0 in starts:
        res = least_squares(fun, c0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.max(np.abs(res.fun), initial=0.0) <= tol:
            yield fam.matrix(x0 + N @ res.x)


def _eigen_blocks(S1):
    """Real invariant blocks (m x k bases) of the first-order block matrix.

    Ordered by ascending block size, then ascending |eigenvalue|, then index.
    """
    Sf = la.to_float(S1).astype(float)
    vals, vecs = np.linalg.eig(Sf)
    order = sorted(range(len(vals)), key=lambda i: (abs(vals[i].imag) > 1e-9, abs(vals[i]), i))
    blocks, used = [], set()
    for i in order:
        if i in used:
            continue
        lam = vals[i]
        if abs(lam.imag) <= 1e-9 * (1 + abs(lam)):
            blocks.append((1, abs(lam), np.real(vecs[:, [i]])))
            used.add(i)
            continue
        j = min((k for k in range(len(vals)) if k not in used and k != i),
                key=lambda k: abs(vals[k] - np.conj(lam)))
        used.update({i, j})
        v = vecs[:, i]
        blocks.append((2, abs(lam), np.column_stack([v.real, v.imag])))
    blocks.sort(key=lambda b: (b[0], b[1]))
    return [b[2] for b in blocks]


def _candidates(fam: _Family, tol: float):
    """Example-driven route: X restricted to invariant subspaces of the first-order block."""
    S1 = assemble(fam.A, fam.p).block(1)
    blocks = _eigen_blocks(S1)
    n = fam.n
    x0 = la.to_float(fam.x0)
    N = la.to_float(fam.N)
    count = 0
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(len(blocks)), size):
            W = np.column_stack([blocks[i] for i in combo])
            if W.shape[1] != n:
                continue
            count += 1
            if count > CANDIDATE_LIMIT:
                return
            # x0 + N c = vec(W Y)
            lift = np.kron(np.eye(n), W)
            sys = np.column_stack([N, -lift]) if N.size else -lift
            sol, *_ = np.linalg.lstsq(sys, -x0, rcond=None)
            if np.max(np.abs(sys @ sol + x0)) > 1e-8:
                continue
            vec = x0 + (N @ sol[:N.shape[1]] if N.size else 0)
            X = fam.matrix(vec)
            exact = _rationalize(X)
            if exact is not None and la.all_zero(_quadratic_defect(_Family(fam.A, fam.p, fam.x0, fam.N), exact)):
                yield exact
            elif np.max(np.abs(_quadratic_defect(fam, X))) <= tol:
                yield X


def _rationalize(X, max_den: int = 10 ** 6):
    out = np.empty(X.shape, dtype=object)
    for idx, v in np.ndenumerate(X):
        f = Fraction(float(v)).limit_denominator(max_den)
        if abs(float(f) - float(v)) > 1e-9:
            return None
        out[idx] = f
    return out


def _is_exact_zero(t: TrigMatrix, tol: float) -> bool:
    return t.is_zero() if t.exact else t.max_coeff() <= tol


def solve(A: TrigMatrix, p_hint: int | None = None, p_max: int | None = None, r_select: bool = True,
          tol: float | None = None, U=None, method: str = "auto") -> FloquetSolution:
    """Floquet pair (P, R) of A with P omega-independent and P(t | omega = 0) = I.

    method: "auto" tries the algebraic route then the invariant-subspace
    candidates; "algebraic" and "eigen" force one of them.
    """
    tol = default_tolerance() if tol is None else tol
    if A.L == 1:
        return _solve_halved(A, p_hint, p_max, r_select, tol, U, method)
    shifted, shift = shift_trace(A)
    U_c, J, Ac = _canonical_or_skip(shifted, U)
    L, n = Ac.L, Ac.n
    p_lo = max(0, -(-L // n)) if p_hint is None else p_hint
    p_hi = max(p_lo, L) if p_max is None else p_max
    for p in range(p_lo, p_hi + 1):
        fam = _linear_family(Ac, p)
        if fam is None:
            continue
        found = []
        for X, route in _routes(fam, method, r_select, tol):
            verified = _verify_candidate(Ac, X, tol)
            if verified is None:
                continue
            found.append((verified, route))
            # the algebraic route yields a short list; candidates stop at the first hit
            if route == "eigen-candidate" or len(found) >= 16:
                break
        if not found:
            continue
        # prefer the lowest omega-degree R, then discovery order
        (P, R, res), route = min(found, key=lambda item: item[0][1].degree)
        detP = _det_poly(P)
        transforms = {"route": route, "p": p, "canonical": U_c is not None}
        if U_c is not None:
            P = _unconjugate(P, U_c)
            R = _unconjugate_R(R, U_c)
            transforms["U"] = U_c
            transforms["J"] = J
        sol = FloquetSolution(P, R, p, detP, transforms, res)
        sol = unshift(sol, shift)
        return replace(sol, residual_norm=residual_norm_full(A, sol))
    raise NoSolutionWithinPMax(f"no omega-independent P with p in [{p_lo}, {p_hi}]")


def _canonical_or_skip(A: TrigMatrix, U):
    """Canonicalize at omega = 0 when a rational real Jordan form exists.

    Exact inputs whose canonical form would be irrational keep U = I so that
    the whole solve stays on the rational path.
    """
    if U is not None:
        return canonicalize_at_zero(A, U)
    A0 = A.at_omega_zero()
    if la.is_exact_array(A0):
        res = (la.eye(A.n, True), A0) if _is_real_canonical(A0) else _real_jordan_exact(A0)
        if res is None:
            return None, A0, A
        U, J = res
        return U, J, A.conjugate_by(U)
    try:
        return canonicalize_at_zero(A)
    except CanonicalFormUnreliable:
        return None, A0, A


def _verify_candidate(Ac: TrigMatrix, X, tol: float):
    P = unstack(X, Ac.n)
    try:
        R = recover_R(Ac, P)
    except (NotConstantInT, SingularP):
        return None
    res = residual(Ac, P, R)
    if not _is_exact_zero(res, tol):
        return None
    if any(not _trace_zero(sl, tol) for sl in R.slices):
        return None
    return P, R, res.max_coeff()


def _routes(fam: _Family, method: str, r_select: bool, tol: float):
    d = fam.N.shape[1]
    if method in ("auto", "algebraic"):
        if d == 0:
            yield fam.matrix(fam.x0), "linear"
        elif fam.A.exact and d <= QUADRATIC_MAX_FREE:
            for X in _solve_quadratic_exact(fam):
                yield X, "quadratic"
        elif not fam.A.exact:
            for X in _solve_quadratic_float(fam, tol):
                yield X, "quadratic"
    if method == "eigen" or (method == "auto" and r_select):
        for X in _candidates(fam, tol):
            yield X, "eigen-candidate"


def _trace_zero(m, tol) -> bool:
    t = sum(m[i, i] for i in range(m.shape[0]))
    return t == 0 if la.is_exact_array(m) else abs(t) <= tol


def _unconjugate(P: TrigMatrix, U) -> TrigMatrix:
    """U P U^{-1}."""
    U = la.coerce_matrix(U)
    return P.conjugate_by(la.inverse(U))


def _unconjugate_R(R: OmegaPolyMatrix, U) -> OmegaPolyMatrix:
    U = la.coerce_matrix(U)
    return R.similar(la.inverse(U))


def residual_norm_full(A: TrigMatrix, sol: FloquetSolution) -> float:
    """Residual of the original system, accounting for a periodic trace shift.

    With P_full = exp(Psi1) P the identity A P_full = dP_full/dt + P_full R
    becomes (A - psi1 I) P = dP/dt + P R, which is checked instead.
    """
    A_eff = A
    if sol.shift is not None and sol.shift.psi1 is not None:
        A_eff = A - TrigMatrix.identity(A.n, A.exact) * sol.shift.psi1
    return residual_norm(A_eff, sol.P, sol.R)


def _solve_halved(A, p_hint, p_max, r_select, tol, U, method):
    """L = 1: write the fundamental as harmonic 2 of half the frequency."""
    terms = []
    for r, l, par, c in A.terms():
        scale = Fraction(2) ** r if A.exact else 2.0 ** r
        terms.append((r, 2 * l, par, c * scale))
    A2 = TrigMatrix.from_terms(terms, n=A.n)
    sol = solve(A2, p_hint, p_max, r_select, tol, U, method)
    # map back when only even harmonics appear in P
    if all(l % 2 == 0 for _, l, _, _ in sol.P.terms()):
        P = TrigMatrix.from_terms([(r, l // 2, par, c) for r, l, par, c in sol.P.terms()], n=A.n)
        R = OmegaPolyMatrix([sl / (Fraction(2) ** r if sol.R.exact else 2.0 ** r)
                             for r, sl in enumerate(sol.R.slices)])
        transforms = dict(sol.transforms, frequency_halved=True, mapped_back=True)
        out = replace(sol, P=P, R=R, transforms=transforms, shift=None)
        shifted, shift = shift_trace(A)
        out = replace(out, shift=shift if not shift.Psi1.is_zero() else None)
        return replace(out, residual_norm=residual_norm_full(A, out))
    transforms = dict(sol.transforms, frequency_halved=True, mapped_back=False)
    return replace(sol, transforms=transforms)


# --------------------------------------------------------------------------
# classical identities
# --------------------------------------------------------------------------


def lemma_checks(A: TrigMatrix, sol: FloquetSolution, omega: float = 1.0, tol: float = 1e-8) -> dict:
    from . import monodromy

    report = {}
    trace_R = sol.R.trace()
    trace_mean = A.average().trace()
    diff = trace_R - trace_mean
    report["trace_identity"] = {
        "pass": diff.is_zero() if diff.exact else max(abs(float(c)) for c in diff.coeffs) <= tol,
        "defect": max(abs(float(c)) for c in diff.coeffs),
    }
    det_series = sol.P.determinant()
    det_const = det_series.L == 0 and (sol.shift is None or sol.shift.Psi1.is_zero())
    dev = A.trace_series().total - TrigMatrix.constant([[0]])
    periodic_dev = TrigMatrix(1, {k: c for k, c in dev._terms.items() if k[1] != 0})
    zero_mean_dev = periodic_dev.is_zero() if periodic_dev.exact else periodic_dev.max_coeff() <= tol
    report["det_constancy_equivalence"] = {"pass": det_const == zero_mean_dev,
                                           "det_constant": det_const, "trace_constant": zero_mean_dev}
    T = 2 * math.pi / omega
    worst = 0.0
    for t, t0 in [(0.3, 0.1), (1.1, 0.4), (2.0, 1.7), (0.9, 2.5)]:
        a = monodromy.reconstruct_phi(sol, omega, t + T, t0 + T)
        b = monodromy.reconstruct_phi(sol, omega, t, t0)
        worst = max(worst, float(np.max(np.abs(a - b))))
    report["period_shift_invariance"] = {"pass": worst <= 1e-8 * max(1.0, 1.0), "defect": worst}
    n = A.n
    psi0 = A.trace_series().psi0
    traces = []
    for r, sl in enumerate(sol.R.slices):
        tr = sum(sl[i, i] for i in range(n))
        c = psi0.coeffs[r] if r < len(psi0.coeffs) else 0
        traces.append(tr - n * c)
    defect = max(abs(float(x)) for x in traces)
    report["shifted_trace_zero"] = {"pass": all(x == 0 for x in traces) if sol.R.exact else defect <= tol,
                                    "defect": defect}
    report["all_pass"] = all(v["pass"] for v in report.values() if isinstance(v, dict))
    return report
