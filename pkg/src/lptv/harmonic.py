"""Truncated harmonic (Toeplitz) operators: exponential block system, HSS, HTF, poles, zeros.

Harmonic blocks are ordered l = -M..M, so the central block (index M) is
the zeroth harmonic.  Complex arithmetic is kept inside this module.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from . import _linalg as la
from .trigmat import COS, SIN, ExpTrigMatrix, TrigMatrix

DEFAULT_TRUNC = 8
EDGE_MASS_TOL = 1e-6
FFT_SAMPLES = 512


class ResolventSingular(ValueError):
    pass


class DegeneratePencil(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass
class HarmonicStateSpace:
    trunc: int
    omega: float
    A: np.ndarray  # Toeplitz transform of A(t)
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    N: np.ndarray  # blkdiag(i l omega I)

    @property
    def nx(self) -> int:
        return self.A.shape[0] // (2 * self.trunc + 1)

    @property
    def nu(self) -> int:
        return self.B.shape[1] // (2 * self.trunc + 1)

    @property
    def ny(self) -> int:
        return self.C.shape[0] // (2 * self.trunc + 1)

    @property
    def state_matrix(self) -> np.ndarray:
        return self.A - self.N


@dataclass
class ExpBlockSystem:
    matrix: np.ndarray  # square, rows/cols (P0re; P1re; P1im; ...; Ppre; Ppim)
    n: int
    p: int
    omega: object


@dataclass
class PoleReport:
    values: np.ndarray
    reliable: np.ndarray

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


# --------------------------------------------------------------------------
# Fourier coefficients and the Toeplitz transform
# --------------------------------------------------------------------------


def _fft_coeffs(evaluate, omega: float, harmonics: int, samples: int = FFT_SAMPLES) -> dict:
    period = 2 * math.pi / omega
    ts = np.arange(samples) * period / samples
    vals = np.array([np.asarray(evaluate(t), dtype=complex) for t in ts])
    spec = np.fft.fft(vals, axis=0) / samples
    # samples are f(j T / N) = sum_l c_l exp(2 pi i l j / N), so c_l sits in bin l mod N
    return {l: spec[l % samples] for l in range(-harmonics, harmonics + 1)}


def exp_coefficients(X, omega: float, harmonics: int) -> dict:
    """Exponential Fourier coefficients {l: complex matrix} of a periodic matrix."""
    if isinstance(X, ExpTrigMatrix):
        return dict(X.coeffs)
    if isinstance(X, dict):
        return {int(l): np.asarray(c, dtype=complex) for l, c in X.items()}
    if isinstance(X, TrigMatrix):
        return dict(X.to_exponential(omega).coeffs)
    if callable(X):
        return _fft_coeffs(lambda t: X(omega, t), omega, harmonics)
    M = np.atleast_2d(la.to_float(la.coerce_matrix(X)))
    return {0: M.astype(complex)}


def toeplitz_transform(E, trunc: int, omega: float | None = None) -> np.ndarray:
    """Block Toeplitz matrix with block (k, l) = E_{k-l}, harmonics -trunc..trunc."""
    coeffs = exp_coefficients(E, 1.0 if omega is None else omega, 2 * trunc)
    shape = next(iter(coeffs.values())).shape
    r, c = shape
    size = 2 * trunc + 1
    out = np.zeros((r * size, c * size), dtype=complex)
    for k in range(size):
        for l in range(size):
            blk = coeffs.get(k - l)
            if blk is not None:
                out[k * r:(k + 1) * r, l * c:(l + 1) * c] = blk
    return out


def _harmonic_diag(n: int, trunc: int, omega: float) -> np.ndarray:
    ls = np.arange(-trunc, trunc + 1)
    return np.kron(np.diag(1j * ls * omega), np.eye(n))


# --------------------------------------------------------------------------
# real-imaginary block system
# --------------------------------------------------------------------------


def _re_im(A: TrigMatrix, w, exact: bool, l: int):
    """(A_l^real, A_l^im) at a numeric omega; exact when A and omega are."""
    m = abs(l)
    even = la.zeros((A.n, A.n), exact)
    odd = la.zeros((A.n, A.n), exact)
    for r in range(A.N + 1):
        even = even + A.coeff(r, m, COS) * w ** r
        odd = odd + A.coeff(r, m, SIN) * w ** r
    if not exact:
        even, odd = la.to_float(even), la.to_float(odd)
    if m == 0:
        return even, odd * 0
    half = la.half(exact)
    im = -odd * half
    return even * half, (im if l > 0 else -im)


def assemble_exp_block(A: TrigMatrix, omega, p: int) -> ExpBlockSystem:
    """Square real-imaginary block system over (P0re; P1re; P1im; ...)."""
    n = A.n
    exact = A.exact and isinstance(omega, (int, Fraction))
    w = Fraction(omega) if exact else float(omega)
    size = n * (2 * p + 1)
    M = la.zeros((size, size), exact) if exact else np.zeros((size, size))
    ident = la.eye(n, exact) if exact else np.eye(n)

    def put(i, j, blk):
        M[i * n:(i + 1) * n, j * n:(j + 1) * n] = M[i * n:(i + 1) * n, j * n:(j + 1) * n] + blk

    cache = {}

    def part(l):
        if l not in cache:
            cache[l] = _re_im(A, w, exact, l)
        return cache[l]

    put(0, 0, part(0)[0])
    for l in range(1, p + 1):
        put(0, 2 * l - 1, part(-l)[0] + part(l)[0])
        put(0, 2 * l, part(l)[1] - part(-l)[1])
    for k in range(1, p + 1):
        re_row, im_row = 2 * k - 1, 2 * k
        put(re_row, 0, part(k)[0])
        put(im_row, 0, part(k)[1])
        for l in range(1, p + 1):
            re_col, im_col = 2 * l - 1, 2 * l
            put(re_row, re_col, part(k - l)[0] + part(k + l)[0])
            put(re_row, im_col, part(k + l)[1] - part(k - l)[1])
            put(im_row, re_col, part(k + l)[1] + part(k - l)[1])
            put(im_row, im_col, part(k - l)[0] - part(k + l)[0])
        put(re_row, im_row, ident * (k * w))
        put(im_row, re_row, -ident * (k * w))
    return ExpBlockSystem(M, n, p, omega)


def signature_similarity(n: int, p: int, exact: bool = True) -> np.ndarray:
    """S = blkdiag(I, I, -I, I, -I, ...) relating the exponential and cosine-sine blocks."""
    signs = [1] + [s for _ in range(p) for s in (1, -1)]
    S = la.zeros((n * len(signs), n * len(signs)), exact) if exact else np.zeros((n * len(signs),) * 2)
    for b, s in enumerate(signs):
        for i in range(n):
            S[b * n + i, b * n + i] = s
    return S


# --------------------------------------------------------------------------
# harmonic state space
# --------------------------------------------------------------------------


def build_hss(A, B, C, D, omega: float, trunc: int = DEFAULT_TRUNC) -> HarmonicStateSpace:
    omega = float(omega)
    TA = toeplitz_transform(A, trunc, omega)
    TB = toeplitz_transform(B, trunc, omega)
    TC = toeplitz_transform(C, trunc, omega)
    TD = toeplitz_transform(D, trunc, omega)
    size = 2 * trunc + 1
    nx = TA.shape[0] // size
    if TA.shape[0] != TA.shape[1]:
        raise DimensionMismatch("A must be square")
    if TB.shape[0] != TA.shape[0] or TC.shape[1] != TA.shape[1]:
        raise DimensionMismatch("B rows and C columns must match the state size")
    if TD.shape != (TC.shape[0], TB.shape[1]):
        raise DimensionMismatch("D must be outputs x inputs")
    return HarmonicStateSpace(trunc, omega, TA, TB, TC, TD, _harmonic_diag(nx, trunc, omega))


def _evaluator(X):
    if isinstance(X, (TrigMatrix, ExpTrigMatrix)):
        return lambda omega, t: X.evaluate(omega, t)
    if callable(X):
        return X
    M = np.atleast_2d(la.to_float(la.coerce_matrix(X)))
    return lambda omega, t: M


def time_invariant_hss(sol, B, C, D, omega: float, trunc: int = DEFAULT_TRUNC) -> HarmonicStateSpace:
    """Operators of the Lyapunov-reduced system x = P(t) z: {R, P^-1 B, C P, D}."""
    omega = float(omega)
    Bf, Cf = _evaluator(B), _evaluator(C)

    def P_inv_B(t):
        P = sol.P_eval(omega, t)
        return np.linalg.solve(P, Bf(omega, t))

    def C_P(t):
        return Cf(omega, t) @ sol.P_eval(omega, t)

    P0 = sol.P_eval(omega, 0.0)
    if abs(np.linalg.det(P0)) < 1e-13:
        from .floquet import SingularP

        raise SingularP("P(0) is singular")
    R = sol.R_eval(omega)
    TR = np.kron(np.eye(2 * trunc + 1), R).astype(complex)
    TB = toeplitz_transform(_fft_coeffs(P_inv_B, omega, 2 * trunc), trunc, omega)
    TC = toeplitz_transform(_fft_coeffs(C_P, omega, 2 * trunc), trunc, omega)
    TD = toeplitz_transform(D, trunc, omega)
    return HarmonicStateSpace(trunc, omega, TR, TB, TC, TD, _harmonic_diag(R.shape[0], trunc, omega))


def htf(hss: HarmonicStateSpace, s: complex) -> np.ndarray:
    """C (s I - (A - N))^{-1} B + D on the truncated operators."""
    K = s * np.eye(hss.A.shape[0]) - hss.state_matrix
    try:
        with warnings.catch_warnings():
            # an exactly singular pivot is reported below as ResolventSingular
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu = scipy.linalg.lu_factor(K, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ResolventSingular(str(exc)) from exc
    if np.min(np.abs(np.diag(lu[0]))) <= 1e-14 * max(1.0, np.max(np.abs(K))):
        raise ResolventSingular(f"s = {s} is a pole of the truncated system")
    return hss.C @ scipy.linalg.lu_solve(lu, hss.B) + hss.D


def central_block(hss: HarmonicStateSpace, G: np.ndarray, k: int = 0, l: int = 0) -> np.ndarray:
    """Block of G relating input harmonic l to output harmonic k."""
    ny, nu, M = hss.ny, hss.nu, hss.trunc
    i, j = (M + k) * ny, (M + l) * nu
    return G[i:i + ny, j:j + nu]


def _in_strip(z: complex, omega: float) -> bool:
    return -omega / 2 < z.imag <= omega / 2


def poles(hss: HarmonicStateSpace) -> PoleReport:
    """Eigenvalues of A - N in the strip -omega/2 < Im s <= omega/2, with an edge-mass flag."""
    vals, vecs = np.linalg.eig(hss.state_matrix)
    n, M = hss.nx, hss.trunc
    keep, reliable = [], []
    for idx, z in enumerate(vals):
        if not _in_strip(z, hss.omega):
            continue
        v = np.abs(vecs[:, idx]) ** 2
        total = float(np.sum(v))
        edge = float(np.sum(v[:2 * n]) + np.sum(v[-2 * n:])) if M >= 2 else total
        keep.append(z)
        reliable.append(edge <= EDGE_MASS_TOL * total)
    order = np.argsort([(-z.real, z.imag) for z in keep], axis=0)[:, 0] if keep else []
    return PoleReport(np.array(keep, dtype=complex)[order], np.array(reliable, dtype=bool)[order])


def _square_pencils(hss: HarmonicStateSpace, rng):
    Asys = hss.state_matrix
    nx = Asys.shape[0]
    B, C, D = hss.B, hss.C, hss.D
    ny, nu = C.shape[0], B.shape[1]
    if ny > nu:
        Q = rng.standard_normal((nu, ny))
        C, D = Q @ C, Q @ D
    elif nu > ny:
        Q = rng.standard_normal((nu, ny))
        B, D = B @ Q, D @ Q
    m = C.shape[0]
    top = np.hstack([Asys, B])
    bottom = np.hstack([C, D])
    Mx = np.vstack([top, bottom])
    E = np.zeros_like(Mx)
    E[:nx, :nx] = np.eye(nx)
    return Mx, E, m


def transmission_zeros(hss: HarmonicStateSpace, tol: float = 1e-8) -> np.ndarray:
    """Finite generalized eigenvalues of the system pencil, strip-filtered."""
    rng = np.random.default_rng(0)
    results = []
    tries = 1 if hss.ny == hss.nu else 2
    for _ in range(tries):
        Mx, E, _ = _square_pencils(hss, rng)
        for s in (0.3127 + 0.1234j, -1.711 + 0.0457j):
            sv = np.linalg.svd(Mx - s * E, compute_uv=False)
            if sv[-1] <= 1e-12 * max(1.0, sv[0]):
                raise DegeneratePencil("the system pencil is singular for every s")
        vals = scipy.linalg.eig(Mx, E, right=False, homogeneous_eigvals=True)
        alpha, beta = vals
        finite = [a / b for a, b in zip(alpha, beta) if abs(b) > 1e-12 * max(1.0, abs(a))]
        results.append([z for z in finite if _in_strip(z, hss.omega)])
    zeros = results[0]
    if tries == 2:
        zeros = [z for z in zeros if any(abs(z - w) <= tol * (1 + abs(z)) for w in results[1])]
    return np.array(sorted(zeros, key=lambda z: (z.real, z.imag)), dtype=complex)
