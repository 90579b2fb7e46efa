"""Named periodic systems with known Floquet pairs, and generators of new ones."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import _linalg as la
from .trigmat import (OMEGA, NonConstantDeterminant, OmegaPoly, OmegaPolyMatrix, TrigMatrix,
                      cos_term, sin_term)

F = Fraction


class UnknownEntry(KeyError):
    pass


class NonPeriodicGenerator(ValueError):
    pass


@dataclass(frozen=True)
class PiecewiseSystem:
    """Piecewise-constant periodic system: segments of (matrix(omega), fraction of period)."""

    segments: tuple  # (callable omega -> matrix, fraction of the period)

    def segments_at(self, omega: float):
        period = 2 * math.pi / omega
        return [(np.asarray(m(omega), dtype=float), frac * period) for m, frac in self.segments]

    def evaluate(self, omega: float, t: float) -> np.ndarray:
        period = 2 * math.pi / omega
        phase = (t % period) / period
        acc = 0.0
        for m, frac in self.segments:
            acc += frac
            if phase < acc:
                return np.asarray(m(omega), dtype=float)
        return np.asarray(self.segments[-1][0](omega), dtype=float)


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    A: object  # TrigMatrix, PiecewiseSystem, or callable (omega, t) -> matrix
    known_P: object = None  # TrigMatrix or callable (omega, t) -> matrix
    known_R: object = None  # OmegaPolyMatrix or callable omega -> matrix
    params: dict = field(default_factory=dict)
    case: int | None = None  # 1..4 finiteness class; None when not a table row
    description: str = ""
    default_omega: float | None = None
    printed_A: object = None  # the system exactly as typeset, when it differs from A
    printed_P: object = None
    errata: tuple = ()

    @property
    def finiteness(self):
        """(L finite, p finite) for the table cases."""
        return {1: (False, False), 2: (False, True), 3: (True, False), 4: (True, True)}.get(self.case)

    @property
    def is_trig(self) -> bool:
        return isinstance(self.A, TrigMatrix)

    def A_eval(self, omega: float, t: float) -> np.ndarray:
        if isinstance(self.A, (TrigMatrix, PiecewiseSystem)):
            return self.A.evaluate(omega, t)
        return np.asarray(self.A(omega, t))

    def P_eval(self, omega: float, t: float) -> np.ndarray:
        if isinstance(self.known_P, TrigMatrix):
            return self.known_P.evaluate(omega, t)
        return np.asarray(self.known_P(omega, t))

    def R_eval(self, omega: float) -> np.ndarray:
        if isinstance(self.known_R, OmegaPolyMatrix):
            return self.known_R.evaluate(omega)
        return np.asarray(self.known_R(omega), dtype=float)


# --------------------------------------------------------------------------
# small builders
# --------------------------------------------------------------------------


def c(l: int, k=1) -> TrigMatrix:
    return cos_term(l, k)


def s(l: int, k=1) -> TrigMatrix:
    return sin_term(l, k)


def k_(value) -> TrigMatrix:
    return cos_term(0, value)


def mat(grid) -> TrigMatrix:
    return TrigMatrix.from_entries(grid)


def _rat(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return x


def _poly(x) -> OmegaPoly:
    if isinstance(x, OmegaPoly):
        return x
    if isinstance(x, (tuple, list)):
        return OmegaPoly([_rat(v) for v in x])
    return OmegaPoly([_rat(x)])


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------


def generate_from_pair(P: TrigMatrix, R: OmegaPolyMatrix) -> TrigMatrix:
    """A = (dP/dt + P R) P^{-1}; requires a constant nonzero det P."""
    p_inv = P.inverse_if_const_det()
    pr = _times_opm(P, R)
    return (P.differentiate() + pr) @ p_inv


def _times_opm(P: TrigMatrix, R: OmegaPolyMatrix) -> TrigMatrix:
    acc = TrigMatrix.zeros(P.n)
    for r, sl in enumerate(R.slices):
        acc = acc + P.right_multiply(sl).scale(OmegaPoly([0] * r + [1]))
    return acc


def exp_sandwich(B, G=((0, -1), (1, 0))):
    """A(t) = exp(-w t G) B exp(w t G), P(t) = exp(-w t G), R = B + w G.

    Only generators whose flow exp(w t G) is a rotation by w t (G equal to
    [[0, -1], [1, 0]]) or G = 0 are accepted; both give 2 pi / w periodic P.
    """
    B = la.coerce_matrix(B)
    G = la.coerce_matrix(G)
    rot = la.coerce_matrix([[0, -1], [1, 0]])
    if la.all_zero(G):
        A = TrigMatrix.constant(B)
        return A, TrigMatrix.identity(B.shape[0]), OmegaPolyMatrix([B])
    if G.shape != (2, 2) or not la.all_zero(la.to_float(G) - la.to_float(rot)):
        raise NonPeriodicGenerator("only the unit rotation generator is supported")
    # exp(-w t G) = [[cos, sin], [-sin, cos]]
    P = mat([[c(1), s(1)], [-s(1), c(1)]])
    P_inv = P.transpose()
    A = P @ TrigMatrix.constant(B) @ P_inv
    R = OmegaPolyMatrix([B, G])
    return A, P, R


# --------------------------------------------------------------------------
# the Wu-type family and its relatives
# --------------------------------------------------------------------------


def wu_rowH(a0=0, a1=0, b0=0, b1=0, c0=0, c1=0, d0=0, d1=0, *, id="4-4:H", **extra) -> CatalogEntry:
    """aI + bJ + c S(t) + d C(t) with every parameter of the form x0 + x1 * omega."""
    a, b, cc, d = (_poly((a0, a1)), _poly((b0, b1)), _poly((c0, c1)), _poly((d0, d1)))
    ident = TrigMatrix.identity(2)
    jmat = TrigMatrix.constant([[0, 1], [-1, 0]])
    smat = mat([[s(2), c(2)], [c(2), -s(2)]])
    cmat = mat([[-c(2), s(2)], [s(2), c(2)]])
    A = ident.scale(a) + jmat.scale(b) + smat.scale(cc) + cmat.scale(d)
    P = mat([[c(1), s(1)], [-s(1), c(1)]])
    R = OmegaPolyMatrix.from_entries([[a - d, cc + b - OMEGA], [cc - b + OMEGA, a + d]])
    params = dict(a0=a0, a1=a1, b0=b0, b1=b1, c0=c0, c1=c1, d0=d0, d1=d1)
    return CatalogEntry(id, A, P, R, {**params, **extra.get("params", {})}, case=extra.get("case", 4),
                        description=extra.get("description", "rotating-frame family a, b, c, d linear in omega"),
                        default_omega=extra.get("default_omega"))


def markus_yamabe(a=F(3, 2)) -> CatalogEntry:
    """Constant negative-real-part eigenvalues of A(t), yet unstable near omega = 1."""
    a = _rat(a)
    half = a / 2 if isinstance(a, Fraction) else a / 2.0
    e = wu_rowH(a0=-1 + half, b0=1, d0=-half, id="markus-yamabe",
                description="Markus-Yamabe system with free frequency", case=None, default_omega=1.0)
    return CatalogEntry(e.id, e.A, e.known_P, e.known_R, {"a": a}, None, e.description, 1.0)


def aggarwal_infante(beta=F(3, 2)) -> CatalogEntry:
    e = markus_yamabe(beta)
    return CatalogEntry("aggarwal-infante", e.A, e.known_P, e.known_R, {"beta": _rat(beta)}, None,
                        "Aggarwal-Infante system (unit frequency)", 1.0)


def rosenbrock() -> CatalogEntry:
    e = wu_rowH(a0=F(-11, 2), b0=6, c0=6, d0=F(9, 2), id="rosenbrock",
                description="Rosenbrock example, unstable at omega = 6", case=None, default_omega=6.0)
    return CatalogEntry(e.id, e.A, e.known_P, e.known_R,
                        {"a": F(-11, 2), "b": 6, "c": 6, "d": F(9, 2), "omega": 6}, None, e.description, 6.0)


# --------------------------------------------------------------------------
# Hill-type equations
# --------------------------------------------------------------------------


def hill(a, q, psi: TrigMatrix, *, id="hill", damping=0) -> CatalogEntry:
    a, q, damping = _rat(a), _rat(q), _rat(damping)
    lower = psi.scale(2 * q) - a
    A = mat([[0, 1], [lower, -damping if damping else 0]])
    return CatalogEntry(id, A, params={"a": a, "q": q}, description="Hill equation, first-order form",
                        default_omega=2.0)


def mathieu(a=1, q=F(1, 5)) -> CatalogEntry:
    e = hill(a, q, c(1), id="mathieu")
    return CatalogEntry("mathieu", e.A, params=e.params, description="Mathieu equation (psi = cos)",
                        default_omega=2.0)


def meissner(a=1, q=F(3, 10)) -> CatalogEntry:
    """Square-wave Hill equation: psi = +1 on the first half period, -1 on the second."""
    a_, q_ = float(_rat(a)), float(_rat(q))
    up = np.array([[0.0, 1.0], [2 * q_ - a_, 0.0]])
    down = np.array([[0.0, 1.0], [-2 * q_ - a_, 0.0]])
    A = PiecewiseSystem(((lambda w, m=up: m, 0.5), (lambda w, m=down: m, 0.5)))
    return CatalogEntry("meissner", A, params={"a": _rat(a), "q": _rat(q)},
                        description="Meissner equation, piecewise constant", default_omega=2.0)


def pendulum(length=1, g=F(981, 100), Y0=F(1, 10)) -> CatalogEntry:
    """Vertically driven pendulum near the hanging equilibrium, Y(t) = Y0 cos(w t)."""
    length, g, Y0 = _rat(length), _rat(g), _rat(Y0)
    lower = cos_term(1, Y0 / length, r=2) - g / length
    A = mat([[0, 1], [lower, 0]])
    return CatalogEntry("pendulum", A, params={"l": length, "g": g, "Y0": Y0},
                        description="driven pendulum, hanging", default_omega=2.0)


def inverted_pendulum(length=1, g=F(981, 100), Y0=F(1, 10)) -> CatalogEntry:
    length, g, Y0 = _rat(length), _rat(g), _rat(Y0)
    lower = cos_term(1, -Y0 / length, r=2) + g / length
    A = mat([[0, 1], [lower, 0]])
    return CatalogEntry("inverted-pendulum", A, params={"l": length, "g": g, "Y0": Y0},
                        description="driven pendulum, inverted", default_omega=2.0)


def rlc(Rres=F(1, 10), Lind=1, s0=1, s1=F(1, 5), g: TrigMatrix | None = None) -> CatalogEntry:
    """Series RLC loop with periodically modulated elastance s0 - s1 g(t)."""
    Rres, Lind, s0, s1 = map(_rat, (Rres, Lind, s0, s1))
    g = c(1) if g is None else g
    lower = g.scale(s1 / Lind) - s0 / Lind
    A = mat([[0, 1], [lower, -Rres / Lind]])
    return CatalogEntry("rlc", A, params={"R": Rres, "L": Lind, "s0": s0, "s1": s1},
                        description="damped Mathieu circuit", default_omega=2.0)


def cauchy_euler() -> CatalogEntry:
    """A(t) = [[0, 1], [6 / t^2, 0]] on t > 0; not periodic, used as an integrator oracle."""

    def A(omega, t):
        return np.array([[0.0, 1.0], [6.0 / t ** 2, 0.0]])

    return CatalogEntry("cauchy-euler", A, description="Cauchy-Euler system (non-periodic)")


def cauchy_euler_fundamental(t: float) -> np.ndarray:
    """Columns t^-2 and t^3 with their derivatives."""
    return np.array([[t ** -2, t ** 3], [-2 * t ** -3, 3 * t ** 2]])


def cauchy_euler_transition(t: float, t0: float) -> np.ndarray:
    """W(t) W(t0)^{-1}; the typeset closed form has wrong powers in two entries."""
    t5, s5 = t ** 5, t0 ** 5
    return np.array([[(2 * t5 + 3 * s5) / (5 * t ** 2 * t0 ** 3), (t5 - s5) / (5 * t ** 2 * t0 ** 2)],
                     [(6 * t5 - 6 * s5) / (5 * t ** 3 * t0 ** 3), (3 * t5 + 2 * s5) / (5 * t ** 3 * t0 ** 2)]])


def cauchy_euler_transition_printed(t: float, t0: float) -> np.ndarray:
    """The closed form as typeset, with one common factor 1 / (5 t^2 t0^3)."""
    k = 1.0 / (5.0 * t ** 2 * t0 ** 3)
    t5, s5 = t ** 5, t0 ** 5
    return k * np.array([[2 * t5 + 3 * s5, t5 - s5], [6 * t5 - 6 * s5, 3 * t5 + 2 * s5]])


def cauchy_euler_naive_exponential(t: float, t0: float) -> np.ndarray:
    """exp of the integral of A, which is not the transition matrix here."""
    root = math.sqrt(6.0 / (t * t0))
    sarg = root * (t - t0)
    return np.array([[math.cosh(sarg), math.sqrt(t * t0 / 6.0) * math.sinh(sarg)],
                     [root * math.sinh(sarg), math.cosh(sarg)]])


# --------------------------------------------------------------------------
# tables of 2 x 2 examples
# --------------------------------------------------------------------------


def _case4(row: str, a=F(3, 2)) -> CatalogEntry:
    a = _rat(a)
    w = OMEGA
    printed, errata = None, ()
    if row == "A":
        A0 = mat([[-1 + s(2, 2), -c(1, 2) + s(1) + s(3)], [s(1, -4), 1 - s(2, 2)]])
        A1 = mat([[-1 - c(2), c(1, F(-3, 2)) + c(3, F(-1, 2)) + s(1)], [c(1, 2), 1 + c(2)]])
        P = mat([[c(1), 1 - s(2)], [-1, s(1, 2)]])
        R = OmegaPolyMatrix.constant([[1, 0], [0, -1]])
        params = {}
    elif row == "B":
        A0 = mat([[a + c(1), F(1, 2) + c(2, F(1, 2))], [-1, a - c(1)]])
        A1 = mat([[F(-1, 2) - c(2, F(1, 2)), c(1, F(-3, 4)) + c(3, F(-1, 4)) + s(1)],
                  [c(1), F(1, 2) + c(2, F(1, 2))]])
        printed = (A0, A1 - mat([[0, 0], [c(1, 2), 0]]))
        errata = ("omega slice entry (2,1) printed as -cos(wt); +cos(wt) is the value consistent with P and R",)
        P = mat([[c(1), 1 - s(2, F(1, 2))], [-1, s(1)]])
        R = OmegaPolyMatrix.constant([[a, 1], [0, a]])
        params = {"a": a}
    elif row == "C":
        A0 = mat([[c(1, -5) - c(3), 5 + c(2, 4) + c(4)], [-c(2) - 3, c(1, 5) + c(3)]]).scale(a / 2)
        A1 = mat([[s(2), s(1, -3) - s(3)], [s(1), -s(2)]])
        P = mat([[c(1, 2), c(2)], [1, c(1)]])
        R = OmegaPolyMatrix.constant([[0, a], [-a, 0]])
        params = {"a": a}
    elif row == "D":
        A0 = TrigMatrix.identity(2)
        A1 = mat([[s(3, F(2, 3)), F(7, 3) + c(3, F(2, 3))], [F(-7, 3) + c(3, F(2, 3)), s(3, F(-2, 3))]])
        P = mat([[c(2, 2) + c(1), s(2, 2) - s(1)], [-s(2, 2) - s(1), c(2, 2) - c(1)]])
        R = OmegaPolyMatrix.constant([[1, 0], [0, 1]])
        params = {}
    elif row == "E":
        Ft = -c(2) + c(4, 4) - s(3, 4)
        Gt = c(3, -4) + s(2) - s(4, 4)
        A0 = mat([[Ft, -5 - s(1, 4) + Gt], [5 + s(1, 4) + Gt, -Ft]]).scale(F(1, 3))
        A1 = mat([[s(3, 2), 4 + c(3, 2)], [-4 + c(3, 2), s(3, -2)]])
        P = mat([[c(2, 2) + c(1), s(2, 2) - s(1)], [-s(2, 2) - s(1), c(2, 2) - c(1)]])
        R = OmegaPolyMatrix([[[1, -1], [1, -1]], [[0, 1], [-1, 0]]])
        params = {}
    elif row == "F":
        A0 = mat([[c(1, F(5, 4) * a) - c(3, a / 4) - s(1, a), F(13, 8) * a + c(2, a / 2) - c(4, a / 8) - s(2, a)],
                  [F(-3, 2) * a + c(2, a / 2), c(1, F(-5, 4) * a) + c(3, a / 4) + s(1, a)]])
        A1 = mat([[F(-1, 2) - c(2, F(1, 2)), c(1, F(-3, 4)) + c(3, F(-1, 4)) + s(1)],
                  [c(1), F(1, 2) + c(2, F(1, 2))]])
        printed = (A0 - mat([[0, 0], [c(2, a), 0]]), A1)
        errata = ("entry (2,1) printed with -(a/2)cos(2wt); +(a/2)cos(2wt) makes A(t|w=0) = [[a,2a],[-a,-a]] "
                  "and agrees with P and R",)
        P = mat([[c(1), 1 - s(2, F(1, 2))], [-1, s(1)]])
        R = OmegaPolyMatrix.constant([[0, a], [-a, 0]])
        params = {"a": a}
    elif row == "G":
        Ft = F(3, 2) * a - c(1, F(5, 4) * a) - c(2, a / 2) + c(3, a / 4) + s(1, a)
        A0 = mat([[Ft, F(3, 2) * a - c(2, a / 2)],
                  [F(-25, 8) * a + c(1, F(5, 2) * a) - c(3, a / 2) + c(4, a / 8) - s(1, 2 * a) + s(2, a), -Ft]])
        A1 = mat([[F(1, 2) - c(1) + c(2, F(1, 2)), -c(1)],
                  [-1 + c(1, F(7, 4)) - c(2) + c(3, F(1, 4)) - s(1), F(-1, 2) + c(1) - c(2, F(1, 2))]])
        printed = (A0, A1 - mat([[0, 0], [c(2), 0]]))
        errata = ("omega slice entry (2,1) printed with -2cos(2wt); -cos(2wt) agrees with P, R and with the "
                  "similarity image of row F",)
        P = mat([[1, -s(1)], [-1 + c(1), 1 + s(1) - s(2, F(1, 2))]])
        R = OmegaPolyMatrix.constant([[0, a], [-a, 0]])
        params = {"a": a}
    elif row == "H":
        return wu_rowH(a0=a, b0=1, c0=F(1, 2), d0=F(-1, 3), a1=F(1, 4), b1=F(1, 5), c1=F(-1, 2), d1=F(1, 7))
    else:
        raise UnknownEntry(f"4-4:{row}")
    A = A0 + A1.scale(w)
    printed_A = None if printed is None else printed[0] + printed[1].scale(w)
    return CatalogEntry(f"4-4:{row}", A, P, R, params, case=4, description=f"finite-harmonic example {row}",
                        printed_A=printed_A, errata=errata)


def _closed(row_id: str, a: float = 1.5) -> CatalogEntry:
    """Rows with infinitely many harmonics; A, P and R are closed-form callables.

    All callables accept complex t so that derivatives can be taken by the
    complex-step method.
    """
    cos, sin, exp = np.cos, np.sin, np.exp

    def R_const(m):
        m = np.array(m, dtype=float)
        return lambda w: m

    table, row = row_id.split(":")
    printed, printed_P, errata = None, None, ()
    if row_id == "4-1:A":
        A = lambda w, t: np.array([[cos(w * t), exp((2 / w) * sin(w * t))], [0 * t, -cos(w * t)]])
        P = lambda w, t: np.array([[exp(sin(w * t) / w), 0 * t], [0 * t, exp(-sin(w * t) / w)]])
        R = R_const([[0, 1], [0, 0]])
    elif row_id == "4-1:B":
        def A(w, t, k=a / 2):
            g = w * sin(w * t) / (2 + cos(w * t))
            return np.array([[a / 2 - 1 + k * cos(2 * w * t) + g, 1 - (a / 2) * sin(2 * w * t)],
                             [-1 - (a / 2) * sin(2 * w * t), a / 2 - 1 - k * cos(2 * w * t) + g]])
        printed = lambda w, t: A(w, t, 1.0)
        errata = ("diagonal cos(2wt) terms printed without the factor a/2 carried by the sin(2wt) terms",)
        P = lambda w, t: np.array([[cos(w * t), -sin(w * t)], [-sin(w * t), -cos(w * t)]]) / (2 + cos(w * t))
        R = lambda w: np.array([[a - 1, w - 1], [1 - w, -1]])
    elif row_id == "4-1:C":
        def A(w, t):
            g = sin(w * t) + w * sin(w * t) / (2 + cos(w * t))
            return np.array([[g, 1 + cos(w * t)], [0 * t, g]])
        P = lambda w, t: (exp(-cos(w * t) / w) / (2 + cos(w * t))
                          * np.array([[1 + 0 * t, sin(w * t) / w], [0 * t, 1 + 0 * t]]))
        R = R_const([[0, 1], [0, 0]])
    elif row_id == "4-2:A":
        A = lambda w, t: np.array([
            [w * cos(w * t) / (2 + sin(w * t)),
             (sin(w * t) + w * cos(w * t) + 2) / (1 - sin(w * t) ** 2 / 4) - 1],
            [0 * t, -w * cos(w * t) / (2 - sin(w * t))]])
        P = lambda w, t: np.array([[1 + sin(w * t) / 2, sin(w * t)], [0 * t, 1 - sin(w * t) / 2]])
        R = R_const([[0, 1], [0, 0]])
    elif row_id == "4-2:B":
        def A(w, t, sign=1):
            h = w * cos(w * t) / (3 + cos(w * t) ** 2)
            return np.array([[3 + (2 - sin(w * t)) * h, 1 + 2 * h], [0 * t, 1 - (2 + sign * sin(w * t)) * h]])
        printed = lambda w, t: A(w, t, -1)
        errata = ("entry (2,2) printed with (2 - sin(wt)); (2 + sin(wt)) is the value consistent with P and R",)
        P = lambda w, t: np.array([[2 + sin(w * t), sin(w * t)], [0 * t, 2 - sin(w * t)]])
        R = R_const([[3, 1], [0, 1]])
    elif row_id == "4-2:C":
        def A(w, t, k=a / 2):
            g = a / 2 - 1 + w * cos(w * t) / (2 + sin(w * t))
            return np.array([[g + k * cos(2 * w * t), 1 - k * sin(2 * w * t)],
                             [-1 - k * sin(2 * w * t), g - k * cos(2 * w * t)]])

        def P(w, t):
            # (2 + sin) [[cos, -sin], [-sin, -cos]] expanded into harmonics
            off = -0.5 + 0.5 * cos(2 * w * t) - 2 * sin(w * t)
            return np.array([[2 * cos(w * t) + 0.5 * sin(2 * w * t), off],
                             [off, -2 * cos(w * t) - 0.5 * sin(2 * w * t)]])

        def printed_P(w, t):
            off = -0.5 + 0.5 * cos(w * t) - 2 * sin(w * t)
            return np.array([[2 * cos(w * t) + 0.5 * sin(w * t), off], [off, -2 * cos(w * t) + 0.5 * sin(w * t)]])
        printed = lambda w, t: A(w, t, 1.0)
        R = lambda w: np.array([[a - 1, w - 1], [1 - w, -1]])
        errata = ("A: cos(2wt), sin(2wt) terms printed without the factor a/2 (consistent only for a = 2)",
                  "P: printed with harmonic 1 where the product (2 + sin(wt))[[cos, -sin], [-sin, -cos]] "
                  "has harmonic 2, and with +sin/2 instead of -sin(2wt)/2 in entry (2,2)")
    elif row_id == "4-3:A":
        A = lambda w, t: np.array([[sin(w * t), 0 * t], [0 * t, -sin(w * t)]])
        P = lambda w, t: np.array([[exp(-(cos(w * t) - 1) / w), 0 * t], [0 * t, exp((cos(w * t) - 1) / w)]])
        R = R_const([[0, 0], [0, 0]])
    elif row_id == "4-3:B":
        def A(w, t, sign=-1):
            return np.array([[1 + w * cos(w * t), 2 + sign * 2 * w * cos(w * t)], [0 * t, 3 - w * cos(w * t)]])
        printed = lambda w, t: A(w, t, 1)
        errata = ("entry (1,2) printed as 2 + 2w cos(wt); 2 - 2w cos(wt) is the value consistent with P and R",)
        P = lambda w, t: np.array([[exp(sin(w * t)), exp(-sin(w * t))], [0 * t, exp(-sin(w * t))]])
        R = R_const([[1, 0], [0, 3]])
    elif row_id == "4-3:C":
        def A(w, t):
            psi = -1 + a / 2 + w * cos(w * t) - w * sin(w * t)
            return np.array([[psi + (a / 2) * cos(2 * w * t), 1 - (a / 2) * sin(2 * w * t)],
                             [-1 - (a / 2) * sin(2 * w * t), psi - (a / 2) * cos(2 * w * t)]])
        P = lambda w, t: (exp(sin(w * t) + cos(w * t) - 1)
                          * np.array([[cos(w * t), -sin(w * t)], [-sin(w * t), -cos(w * t)]]))
        R = lambda w: np.array([[a - 1, w - 1], [1 - w, -1]])
    elif row_id == "4-3:D":
        A = lambda w, t: np.array([[sin(w * t), -1 - cos(w * t)], [1 + cos(w * t), sin(w * t)]])

        def P(w, t):
            th = sin(w * t) / w
            return exp(-(cos(w * t) - 1) / w) * np.array([[cos(th), -sin(th)], [sin(th), cos(th)]])
        R = R_const([[0, -1], [1, 0]])
    elif row_id == "4-3:E":
        A = lambda w, t: np.array([[sin(w * t), 1 + cos(w * t)], [1 + cos(w * t), sin(w * t)]])

        def P(w, t):
            th = sin(w * t) / w
            return exp(-(cos(w * t) - 1) / w) * np.array([[np.cosh(th), np.sinh(th)], [np.sinh(th), np.cosh(th)]])
        R = R_const([[0, 1], [1, 0]])
    elif row_id == "4-3:F":
        A = lambda w, t: np.array([[sin(w * t), 1 + cos(w * t)], [0 * t, sin(w * t)]])
        P = lambda w, t: exp(-(cos(w * t) - 1) / w) * np.array([[1 + 0 * t, sin(w * t) / w], [0 * t, 1 + 0 * t]])
        R = R_const([[0, 1], [0, 0]])
    else:
        raise UnknownEntry(row_id)
    case = {"4-1": 1, "4-2": 2, "4-3": 3}[table]
    needs_a = row_id in ("4-1:B", "4-2:C", "4-3:C")
    return CatalogEntry(row_id, A, P, R, {"a": a} if needs_a else {}, case=case,
                        description=f"closed-form example {row}", printed_A=printed, printed_P=printed_P,
                        errata=errata)


TABLE_ROWS = {
    "4-1": "ABC",
    "4-2": "ABC",
    "4-3": "ABCDEF",
    "4-4": "ABCDEFGH",
}


def table_row(table: str, row: str, **params) -> CatalogEntry:
    table = table.strip()
    row = row.strip().upper()
    if table not in TABLE_ROWS or row not in TABLE_ROWS[table]:
        raise UnknownEntry(f"{table}:{row}")
    if table == "4-4":
        if row == "H" and params:
            return wu_rowH(**params)
        return _case4(row, **params)
    return _closed(f"{table}:{row}", **params)


# --------------------------------------------------------------------------
# the 3 x 3 example with five harmonics
# --------------------------------------------------------------------------


# (omega power, harmonic, parity, row, col) -> (printed, corrected), in units of 1/8
EXAMPLE_3X3_ERRATA = {
    (0, 2, "c", 1, 1): (836, -836),
    (0, 2, "c", 2, 2): (558, 588),
    (0, 3, "s", 2, 2): (-241, -24),
    (0, 5, "s", 2, 2): (128, -128),
    (1, 2, "c", 1, 2): (4, -4),
    (1, 3, "c", 2, 0): (18, 8),
    (1, 5, "s", 1, 2): (4, -4),
}


def example_3x3() -> CatalogEntry:
    """3 x 3 traceless system with L = 5 and its degree-2 factor pair.

    The typeset coefficient list contains seven entries that contradict both
    the stated pair and the stated identities (zero trace, the value of
    A(t|w=0)); A carries the corrected values and printed_A the typeset ones.
    """
    e8 = F(1, 8)
    r0 = {
        (0, "c"): [[72, -81, -3], [396, 169, -147], [-572, 249, -241]],
        (1, "c"): [[434, -84, -286], [256, 156, -248], [434, -216, -590]],
        (1, "s"): [[256, -564, 236], [742, -360, 1034], [256, -1780, 104]],
        (2, "c"): [[248, -36, -132], [396, 836, -396], [572, 0, 558]],
        (2, "s"): [[192, 278, 138], [572, -294, 426], [-396, 998, 102]],
        (3, "c"): [[-154, -108, -223], [-256, -79, -232], [-154, 24, 233]],
        (3, "s"): [[256, -223, 108], [-154, -232, 79], [256, 233, -241]],
        (4, "c"): [[0, 45, -329], [0, 491, -249], [0, -249, -491]],
        (4, "s"): [[0, -329, -45], [0, -249, -491], [0, -491, 249]],
        (5, "c"): [[0, 128, 77], [0, -77, 128], [0, 128, 77]],
        (5, "s"): [[0, 77, -128], [0, 128, 77], [0, 77, 128]],
    }
    r1 = {
        (0, "c"): [[-12, 4, 28], [4, 0, 8], [12, -4, 12]],
        (1, "c"): [[8, 8, -24], [-4, 0, 20], [8, 8, -8]],
        (1, "s"): [[-4, 0, -12], [-8, 16, -24], [-4, 16, -12]],
        (2, "c"): [[-12, 8, 8], [4, 12, 4], [-12, 0, 0]],
        (2, "s"): [[-4, -4, -4], [-12, 0, 0], [-4, -12, 4]],
        (3, "c"): [[8, 10, -4], [4, -4, 14], [18, 10, -4]],
        (3, "s"): [[-4, -4, -10], [8, 14, 4], [-4, -4, -10]],
        (4, "c"): [[0, -4, 12], [0, -12, -4], [0, -4, 12]],
        (4, "s"): [[0, 12, 4], [0, -4, 12], [0, 12, 4]],
        (5, "c"): [[0, -2, -4], [0, 4, -2], [0, -2, -4]],
        (5, "s"): [[0, -4, 2], [0, -2, 4], [0, -4, 2]],
    }
    def build(fixes):
        terms = []
        for r, block in ((0, r0), (1, r1)):
            for (l, par), m in block.items():
                m = np.array(m, dtype=object)
                for (fr, fl, fpar, i, j), (_, good) in fixes.items():
                    if (fr, fl, fpar) == (r, l, par):
                        m[i, j] = good
                terms.append((r, l, par, m * e8))
        return TrigMatrix.from_terms(terms, n=3)

    A = build(EXAMPLE_3X3_ERRATA)
    printed_A = build({})
    P = example_3x3_P()
    R = OmegaPolyMatrix([[[75, -17, -112], [99, -22, -143], [35, -8, -53]],
                         [[-1, 2, 3], [1, 0, 3], [1, 2, 1]]])
    errata = tuple(f"omega^{r} {'cos' if par == 'c' else 'sin'}({l}wt) entry ({i + 1},{j + 1}): "
                   f"printed {bad}/8, consistent value {good}/8"
                   for (r, l, par, i, j), (bad, good) in EXAMPLE_3X3_ERRATA.items())
    return CatalogEntry("example-3x3", A, P, R, {}, case=None,
                        description="3 x 3 system with five harmonics, nilpotent at omega = 0",
                        printed_A=printed_A, errata=errata)


def example_3x3_P() -> TrigMatrix:
    h = F(1, 2)
    return mat([[c(1) - s(1) + s(2, h), s(1), h - c(1) - s(1) + c(2, h)],
                [h - c(2, h), c(1), s(2, h)],
                [s(2, h), -s(1), h + c(2, h)]])


# --------------------------------------------------------------------------
# registry
# --------------------------------------------------------------------------


def _registry() -> dict[str, Callable[[], CatalogEntry]]:
    reg: dict[str, Callable[[], CatalogEntry]] = {}
    for table, rows in TABLE_ROWS.items():
        for row in rows:
            reg[f"{table}:{row}"] = (lambda t=table, r=row: table_row(t, r))
    reg.update({
        "example-3x3": example_3x3,
        "markus-yamabe": markus_yamabe,
        "aggarwal-infante": aggarwal_infante,
        "rosenbrock": rosenbrock,
        "mathieu": mathieu,
        "meissner": meissner,
        "pendulum": pendulum,
        "inverted-pendulum": inverted_pendulum,
        "rlc": rlc,
        "cauchy-euler": cauchy_euler,
    })
    return reg


REGISTRY = _registry()


def get(entry_id: str) -> CatalogEntry:
    try:
        return REGISTRY[entry_id]()
    except KeyError:
        raise UnknownEntry(entry_id) from None


def list_entries() -> list[dict]:
    rows = []
    for key in REGISTRY:
        e = get(key)
        fin = e.finiteness
        rows.append({
            "id": e.id,
            "case": e.case,
            "L_finite": None if fin is None else fin[0],
            "p_finite": None if fin is None else fin[1],
            "kind": "trig" if e.is_trig else ("piecewise" if isinstance(e.A, PiecewiseSystem) else "closed-form"),
            "known_pair": e.known_P is not None and e.known_R is not None,
            "params": {k: str(v) for k, v in e.params.items()},
            "description": e.description,
        })
    return rows
