"""Transition matrices by integration, monodromy, and real Floquet factorization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.linalg

from . import _kernels
from .trigmat import COS, TrigMatrix

DEFAULT_STEPS = 4096
NEGATIVE_AXIS_RTOL = 1e-10
INVOLUTION_TOL = 1e-6


class SingularMonodromy(ValueError):
    pass


class RealLogNonexistent(ValueError):
    pass


class LogBranchAmbiguity(RealLogNonexistent):
    """Eigenvalues on the negative real axis: any real log depends on a choice."""


class SingularP(ValueError):
    pass


@dataclass
class TransitionMatrix:
    value: np.ndarray
    t0: float
    t1: float
    method: str
    checks: dict = field(default_factory=dict)


@dataclass
class MonodromyFactorization:
    R: np.ndarray
    period_multiplier: int
    Y: np.ndarray
    P_samples: np.ndarray | None
    t_samples: np.ndarray | None
    monodromy: np.ndarray
    branch_ambiguous: bool = False
    checks: dict = field(default_factory=dict)


@dataclass
class SpectralReport:
    multipliers: np.ndarray
    exponents: np.ndarray
    product: complex
    expected_product: float
    product_check: bool
    note: str = "exponents are principal-branch values, defined modulo 2*pi*i/T"


# --------------------------------------------------------------------------
# system descriptors
# --------------------------------------------------------------------------


def _system(A):
    """Unwrap catalog entries; leave TrigMatrix, piecewise and callables alone."""
    inner = getattr(A, "A", None)
    if inner is not None and hasattr(A, "A_eval"):
        return inner
    return A


def _is_piecewise(A) -> bool:
    return hasattr(A, "segments_at")


def _sampler(A):
    """Return f(omega, ts) -> array (len(ts), n, n)."""
    A = _system(A)
    if isinstance(A, TrigMatrix):
        Af = A.to_float()
        return lambda omega, ts: Af.sample(omega, ts)
    if isinstance(A, np.ndarray) or isinstance(A, (list, tuple)):
        M = np.asarray(A, dtype=float)
        return lambda omega, ts: np.broadcast_to(M, (len(ts),) + M.shape).copy()
    if hasattr(A, "evaluate"):
        return lambda omega, ts: np.array([A.evaluate(omega, t) for t in ts], dtype=float)
    if callable(A):
        return lambda omega, ts: np.array([np.asarray(A(omega, t), dtype=float).real for t in ts])
    raise TypeError(f"cannot evaluate a system of type {type(A).__name__}")


def _rk4(sample, omega, t0, t1, steps, phi0=None, path=False):
    h = (t1 - t0) / steps
    ts = t0 + 0.5 * h * np.arange(2 * steps + 1)
    nodes = sample(omega, ts)
    return _kernels.integrate_nodes(nodes, h, phi0, path=path)


def _piece_breaks(A, omega, t0, t1):
    """Segment boundaries of a piecewise system that fall inside [t0, t1]."""
    period = 2 * math.pi / omega
    fracs = np.cumsum([0.0] + [f for _, f in A.segments])
    first = math.floor(t0 / period)
    last = math.ceil(t1 / period)
    cuts = {t0, t1}
    for k in range(first, last + 1):
        for f in fracs:
            s = (k + f) * period
            if t0 < s < t1:
                cuts.add(s)
    return sorted(cuts)


# --------------------------------------------------------------------------
# integration
# --------------------------------------------------------------------------


def integrate_transition(A, omega: float, t0: float, t1: float, steps: int = DEFAULT_STEPS) -> TransitionMatrix:
    """Phi(t1, t0) by classical RK4 with Phi(t0) = I."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    system = _system(A)
    if t1 == t0:
        n = _sampler(system)(omega, [t0]).shape[1]
        return TransitionMatrix(np.eye(n), t0, t1, "rk4")
    if _is_piecewise(system):
        # integrate each constant piece separately so no step straddles a jump
        cuts = _piece_breaks(system, omega, t0, t1)
        span = t1 - t0
        phi = None
        for a, b in zip(cuts[:-1], cuts[1:]):
            mid = 0.5 * (a + b)
            M = system.evaluate(omega, mid)
            k = max(1, int(round(steps * (b - a) / span)))
            piece = _rk4(lambda w, ts, M=M: np.broadcast_to(M, (len(ts),) + M.shape).copy(), omega, a, b, k)
            phi = piece if phi is None else piece @ phi
        return TransitionMatrix(phi, t0, t1, "rk4-piecewise")
    phi = _rk4(_sampler(system), omega, t0, t1, steps)
    return TransitionMatrix(phi, t0, t1, "rk4")


def transition_path(A, omega: float, t0: float, t1: float, steps: int = DEFAULT_STEPS):
    """(times, Phi(t_j, t0)) on the RK4 grid."""
    system = _system(A)
    if _is_piecewise(system):
        ts = np.linspace(t0, t1, steps + 1)
        out = [np.eye(system.evaluate(omega, t0).shape[0])]
        for a, b in zip(ts[:-1], ts[1:]):
            out.append(integrate_transition(system, omega, a, b, 1).value @ out[-1])
        return ts, np.array(out)
    path = _rk4(_sampler(system), omega, t0, t1, steps, path=True)
    return np.linspace(t0, t1, steps + 1), path


def _closed_integral(M: TrigMatrix, omega: float, t0: float, t1: float) -> np.ndarray:
    out = np.zeros((M.n, M.n))
    w = float(omega)
    for r, l, parity, c in M.terms():
        scale = w ** r
        if l == 0:
            if parity == COS:
                out += scale * (t1 - t0) * np.asarray(c, dtype=float)
            continue
        lw = l * w
        if parity == COS:
            val = (math.sin(lw * t1) - math.sin(lw * t0)) / lw
        else:
            val = -(math.cos(lw * t1) - math.cos(lw * t0)) / lw
        out += scale * val * np.asarray(c, dtype=float)
    return out


def _integral(A, omega, t0, t1) -> np.ndarray:
    system = _system(A)
    if isinstance(system, TrigMatrix):
        return _closed_integral(system, omega, t0, t1)
    sample = _sampler(system)
    value, _ = scipy.integrate.quad_vec(lambda t: sample(omega, [t])[0], t0, t1, epsabs=1e-13, epsrel=1e-12)
    return value


def commuting_shortcut(A, omega: float, t0: float, t1: float, tol: float = 1e-9, samples: int = 16):
    """exp of the integral of A when A(t) commutes with that integral; else None."""
    system = _system(A)
    sample = _sampler(system)
    pairs = [(t0, t1)]
    if isinstance(system, TrigMatrix):
        period = 2 * math.pi / omega
        pairs += [(0.0, 0.37 * period), (0.21 * period, 0.88 * period), (0.5 * period, 1.3 * period)]
    for a, b in pairs:
        B = _integral(system, omega, a, b)
        ts = np.linspace(a, b, samples)
        for At in sample(omega, ts):
            scale = 1.0 + np.max(np.abs(At)) * max(1.0, np.max(np.abs(B)))
            if np.max(np.abs(At @ B - B @ At)) > tol * scale:
                return None
    return TransitionMatrix(matrix_exp(_integral(system, omega, t0, t1)), t0, t1, "expm-commuting")


def piecewise_transition(segments) -> TransitionMatrix:
    """Ordered product exp(A_m d_m) ... exp(A_1 d_1)."""
    phi = None
    total = 0.0
    for M, d in segments:
        M = np.asarray(M, dtype=float)
        factor = matrix_exp(M * d)
        phi = factor if phi is None else factor @ phi
        total += d
    if phi is None:
        raise ValueError("no segments")
    return TransitionMatrix(phi, 0.0, total, "piecewise")


def monodromy_matrix(A, omega: float, steps: int = DEFAULT_STEPS, check_powers: bool = True) -> TransitionMatrix:
    """Phi(T, 0) with T = 2 pi / omega; optionally checks Phi(kT, 0) = M^k for k = 2, 3."""
    system = _system(A)
    period = 2 * math.pi / omega
    if _is_piecewise(system):
        segs = system.segments_at(omega)
        M = piecewise_transition(segs).value
        method = "piecewise"
    else:
        M = integrate_transition(system, omega, 0.0, period, steps).value
        method = "rk4"
    result = TransitionMatrix(M, 0.0, period, method)
    if check_powers:
        worst = 0.0
        for k in (2, 3):
            if _is_piecewise(system):
                Mk = piecewise_transition(system.segments_at(omega) * k).value
            else:
                Mk = integrate_transition(system, omega, 0.0, k * period, k * steps).value
            ref = np.linalg.matrix_power(M, k)
            worst = max(worst, float(np.max(np.abs(Mk - ref)) / max(1.0, np.max(np.abs(ref)))))
        result.checks["power_law"] = worst
    return result


# --------------------------------------------------------------------------
# exp / log
# --------------------------------------------------------------------------


def matrix_exp(M) -> np.ndarray:
    return scipy.linalg.expm(np.asarray(M, dtype=float))


def _negative_clusters(vals, rtol=NEGATIVE_AXIS_RTOL):
    neg = [v.real for v in vals if v.real < 0 and abs(v.imag) <= rtol * abs(v)]
    clusters = []
    for v in sorted(neg):
        if clusters and abs(v - clusters[-1][0]) <= 1e-8 * abs(v):
            clusters[-1][1] += 1
        else:
            clusters.append([v, 1])
    return clusters


def _log_no_negative(M: np.ndarray) -> np.ndarray:
    L = scipy.linalg.logm(M)
    if np.iscomplexobj(L):
        if np.max(np.abs(L.imag)) > 1e-8 * max(1.0, np.max(np.abs(L.real))):
            raise RealLogNonexistent("principal logarithm is not real")
        L = L.real
    return L


def matrix_log_real(M) -> np.ndarray:
    """Real logarithm of M.

    Negative real eigenvalues are accepted only when each one is semisimple
    with even multiplicity; its eigenspace then gets log|lambda| I + pi J with
    J a block rotation generator.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    vals = np.linalg.eigvals(M)
    if np.min(np.abs(vals)) <= 1e-14 * max(1.0, np.max(np.abs(vals))):
        raise SingularMonodromy("matrix has an eigenvalue at zero")
    clusters = _negative_clusters(vals)
    if not clusters:
        return _log_no_negative(M)
    lam, mult = clusters[0]
    if mult % 2:
        raise RealLogNonexistent(f"negative eigenvalue {lam:g} has odd multiplicity")
    shifted = M - lam * np.eye(n)
    kernel = scipy.linalg.null_space(shifted, rcond=1e-9)
    if kernel.shape[1] != mult:
        raise RealLogNonexistent(f"negative eigenvalue {lam:g} is not semisimple")
    image = scipy.linalg.orth(shifted, rcond=1e-9)
    S = np.hstack([image, kernel])
    Sinv = np.linalg.inv(S)
    block = Sinv @ M @ S
    k = image.shape[1]
    out = np.zeros((n, n))
    if k:
        out[:k, :k] = matrix_log_real(block[:k, :k])
    rot = np.zeros((mult, mult))
    for j in range(0, mult, 2):
        rot[j, j + 1], rot[j + 1, j] = -math.pi, math.pi
    out[k:, k:] = math.log(-lam) * np.eye(mult) + rot
    return S @ out @ Sinv


def _nearest_involution(Y: np.ndarray) -> np.ndarray:
    # the matrix sign iteration converges to the nearest involution
    Z = Y.copy()
    for _ in range(50):
        nxt = 0.5 * (Z + np.linalg.inv(Z))
        if np.max(np.abs(nxt - Z)) < 1e-15:
            return nxt
        Z = nxt
    return Z


def factorize_monodromy(M, period: float):
    """(R, multiplier, Y, branch_ambiguous) from a monodromy matrix alone."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    vals = np.linalg.eigvals(M)
    if np.min(np.abs(vals)) <= 1e-14 * max(1.0, np.max(np.abs(vals))):
        raise SingularMonodromy("monodromy matrix is singular")
    ambiguous = bool(_negative_clusters(vals))
    if not ambiguous:
        R = _log_no_negative(M) / period
        return R, 1, np.eye(n), False
    R = matrix_log_real(M @ M) / (2 * period)
    Y = M @ matrix_exp(-period * R)
    if np.max(np.abs(Y @ Y - np.eye(n))) <= INVOLUTION_TOL:
        Y = _nearest_involution(Y)
    return R, 2, Y, True


def log_factorize(A, omega: float, steps: int = DEFAULT_STEPS, samples: int = 16,
                  monodromy: np.ndarray | None = None) -> MonodromyFactorization:
    """Real Floquet factorization from the monodromy matrix.

    Any eigenvalue of the monodromy on the negative real axis sends the
    computation through the doubled-period route, where P is 2T-periodic and
    P(t + T) = P(t) Y with Y an involution commuting with R.
    """
    period = 2 * math.pi / omega
    M = monodromy if monodromy is not None else monodromy_matrix(A, omega, steps, check_powers=False).value
    R, mult, Y, ambiguous = factorize_monodromy(M, period)
    checks = {"commutes": float(np.max(np.abs(R @ Y - Y @ R)))}
    if A is None:
        return MonodromyFactorization(R, mult, Y, None, None, M, ambiguous, checks)

    # Phi(t, 0) on [0, (m + 1) T] to test P periodicity and the shift relation
    reach = mult + 1
    ts, path = transition_path(A, omega, 0.0, reach * period, reach * steps)
    stride = steps // samples
    idx = np.arange(0, steps, stride)[:samples]

    def P_at(j):
        return path[j] @ matrix_exp(-ts[j] * R)

    P_samples = np.array([P_at(j) for j in idx])
    period_dev = max(float(np.max(np.abs(P_at(j + mult * steps) - P_at(j)))) for j in idx)
    P_T = P_at(steps)
    shift_dev = 0.0
    for j in idx:
        t = ts[j]
        rhs = P_at(j) @ matrix_exp(t * R) @ P_T @ matrix_exp(-t * R)
        shift_dev = max(shift_dev, float(np.max(np.abs(P_at(j + steps) - rhs))))
    checks.update({"periodicity": period_dev, "shift_relation": shift_dev,
                   "Y_from_P": float(np.max(np.abs(np.linalg.inv(P_T) - Y)))})
    return MonodromyFactorization(R, mult, Y, P_samples, ts[idx], M, ambiguous, checks)


# --------------------------------------------------------------------------
# spectral checks
# --------------------------------------------------------------------------


def trace_integral(A, omega: float, t0: float, t1: float) -> float:
    system = _system(A)
    if isinstance(system, TrigMatrix):
        return float(_closed_integral(system.trace_series().total, omega, t0, t1)[0, 0])
    if _is_piecewise(system):
        cuts = _piece_breaks(system, omega, t0, t1)
        return float(sum(np.trace(system.evaluate(omega, 0.5 * (a + b))) * (b - a)
                         for a, b in zip(cuts[:-1], cuts[1:])))
    sample = _sampler(system)
    value, _ = scipy.integrate.quad(lambda t: float(np.trace(sample(omega, [t])[0])), t0, t1,
                                    epsabs=1e-13, epsrel=1e-12, limit=200)
    return value


def characteristic_spectrum(M, A, omega: float, tol: float = 1e-8) -> SpectralReport:
    value = M.value if isinstance(M, TransitionMatrix) else np.asarray(M, dtype=float)
    period = 2 * math.pi / omega
    rho = np.linalg.eigvals(value)
    mu = np.log(rho.astype(complex)) / period
    product = complex(np.prod(rho))
    system = _system(A)
    if isinstance(system, TrigMatrix):
        # only the mean of the trace survives a full period
        expected = math.exp(period * float(np.trace(system.average().evaluate(omega))))
    else:
        expected = math.exp(trace_integral(system, omega, 0.0, period))
    ok = abs(product - expected) <= tol * (1.0 + abs(expected))
    return SpectralReport(rho, mu, product, expected, ok)


def jacobi_liouville_check(A, omega: float, phi: TransitionMatrix, tol: float = 1e-8) -> bool:
    det = float(np.linalg.det(phi.value))
    expected = math.exp(trace_integral(A, omega, phi.t0, phi.t1))
    return abs(det - expected) <= tol * (1.0 + abs(det))


def reconstruct_phi(sol, omega: float, t: float, t0: float) -> np.ndarray:
    """P(t) exp((t - t0) R) P(t0)^{-1} from a Floquet solution."""
    P0 = sol.P_eval(omega, t0)
    if abs(np.linalg.det(P0)) <= 1e-13 * max(1.0, np.max(np.abs(P0))) ** P0.shape[0]:
        raise SingularP(f"P({t0}) is singular")
    return sol.P_eval(omega, t) @ matrix_exp((t - t0) * sol.R_eval(omega)) @ np.linalg.inv(P0)
