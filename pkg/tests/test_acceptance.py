"""Acceptance checks, one PASS/FAIL line each (collected in the terminal summary).

Where a typeset system or closed form is internally inconsistent, the strict
line runs against the typeset data and is left to fail; a second line runs
the same check on the corrected catalog entry.
"""

import math
import random
from fractions import Fraction as F

import numpy as np
import pytest

from acceptance_log import record
from helpers import random_trig
from lptv import catalog, floquet, harmonic, monodromy, stability
from lptv.stability import StabilityClass as SC
from lptv.trigmat import OmegaPolyMatrix, TrigMatrix

OMEGAS = (0.5, 1.0, 2.0)
R2 = math.sqrt(2) / 2


def _closed_residual(A, P, R_eval, omega, samples=64):
    h = 1e-20
    worst = 0.0
    for t in np.linspace(0.0, 2 * math.pi / omega, samples, endpoint=False):
        Pt = np.asarray(P(omega, t), dtype=float)
        dP = np.asarray(P(omega, t + 1j * h)).imag / h
        At = np.asarray(A(omega, t), dtype=float)
        worst = max(worst, float(np.max(np.abs(At @ Pt - dP - Pt @ R_eval(omega)))))
    return worst


def _residual_rows(typeset: bool):
    """(row id, residual) over every table row."""
    out = []
    for table, rows in catalog.TABLE_ROWS.items():
        for row in rows:
            e = catalog.table_row(table, row)
            A = e.printed_A if typeset and e.printed_A is not None else e.A
            if table == "4-4":
                res = floquet.residual(A, e.known_P, e.known_R)
                out.append((e.id, 0.0 if res.is_zero() else res.max_coeff()))
            else:
                P = e.printed_P if typeset and e.printed_P is not None else e.known_P
                out.append((e.id, max(_closed_residual(A, P, e.R_eval, w) for w in OMEGAS)))
    return out


def _same_charpoly(R1: OmegaPolyMatrix, R2_: OmegaPolyMatrix) -> bool:
    return all((a - b).is_zero() for a, b in zip(R1.charpoly(), R2_.charpoly()))


# ---------------------------------------------------------------- 1


def test_criterion_1_forward_residual_typeset_tables():
    bad = [(rid, r) for rid, r in _residual_rows(typeset=True) if r > 1e-9]
    ok = record("1", not bad, "typeset table rows, residual <= 1e-9; failing rows: "
                + (", ".join(f"{rid} ({r:.3g})" for rid, r in bad) or "none"))
    assert ok


def test_criterion_1_forward_residual_corrected_rows():
    rows = _residual_rows(typeset=False)
    worst = max(r for _, r in rows)
    exact = all(r == 0.0 for rid, r in rows if rid.startswith("4-4"))
    ok = record("1 (corrected rows)", worst <= 1e-9 and exact,
                f"{len(rows)} rows, worst pointwise residual {worst:.3g}, Case-4 rows exactly zero: {exact}")
    assert ok


# ---------------------------------------------------------------- 2


def test_criterion_2_row_h_family():
    rng = random.Random(2)
    failures = []
    for trial in range(5):
        params = {k: F(rng.randint(-8, 8), 4) for k in ("a0", "a1", "b0", "b1", "c0", "c1", "d0", "d1")}
        e = catalog.wu_rowH(**params)
        sol = floquet.solve(e.A)
        if not (sol.R.exact and _same_charpoly(sol.R, e.known_R)):
            failures.append(params)
    ok = record("2", not failures, f"5 random rational parameter sets, exact char-poly matches: {5 - len(failures)}/5")
    assert ok


# ---------------------------------------------------------------- 3


def test_criterion_3_row_e():
    e = catalog.table_row("4-4", "E")
    sol = floquet.solve(e.A)
    residual_zero = floquet.residual(e.A, sol.P, sol.R).is_zero()
    det = sol.P.determinant()
    det_const = det.L == 0 and det.N == 0 and not det.is_zero()
    w = OmegaPolyMatrix([[[1, -1], [1, -1]], [[0, 1], [-1, 0]]])
    charpoly = _same_charpoly(sol.R, w)
    ok = record("3", residual_zero and det_const and charpoly,
                f"residual == 0: {residual_zero}, det P constant: {det_const}, char-poly match: {charpoly}")
    assert ok


# ---------------------------------------------------------------- 4


def _solve_or_none(A):
    try:
        return floquet.solve(A, p_max=2)
    except floquet.NoSolutionWithinPMax:
        return None


def _criterion_4(typeset: bool):
    f = catalog.table_row("4-4", "F")
    x = catalog.example_3x3()
    Af = f.printed_A if typeset else f.A
    Ax = x.printed_A if typeset else x.A
    sol_f, sol_x = _solve_or_none(Af), _solve_or_none(Ax)
    a = f.params["a"]
    notes = []
    ok_f = sol_f is not None and sol_f.p == 2 and \
        _same_charpoly(sol_f.R, OmegaPolyMatrix.constant([[0, a], [-a, 0]]))
    notes.append(f"row F solved with p=2 and char-poly [[0,a],[-a,0]]: {ok_f}")
    ok_x = False
    if sol_x is not None:
        residual_zero = floquet.residual(Ax, sol_x.P, sol_x.R).is_zero()
        det = sol_x.P.determinant()
        det_const = det.L == 0 and det.N == 0
        identity_at_zero = all(np.allclose(sol_x.P_eval(0.0, t), np.eye(3), atol=1e-12) for t in (0.0, 0.7, 2.1))
        right_factor = x.known_P.inverse_if_const_det() @ sol_x.P
        constant_factor = right_factor.L == 0 and right_factor.N == 0
        ok_x = (sol_x.p == 2 and _same_charpoly(sol_x.R, x.known_R) and residual_zero and det_const
                and identity_at_zero and constant_factor)
        notes.append(f"3x3: p={sol_x.p}, char-poly, residual, det, P(t|0)=I, constant right factor: {ok_x}")
    else:
        notes.append("3x3: no solution with p <= 2")
    return ok_f and ok_x, "; ".join(notes)


def test_criterion_4_typeset_systems():
    ok, detail = _criterion_4(typeset=True)
    assert record("4", ok, "typeset systems; " + detail)


def test_criterion_4_corrected_systems():
    ok, detail = _criterion_4(typeset=False)
    assert record("4 (corrected systems)", ok, detail)


# ---------------------------------------------------------------- 5


def test_criterion_5_markus_yamabe_table():
    R = catalog.markus_yamabe().known_R
    table = [(0.0, SC.STABLE), (0.25, SC.STABLE), (0.28, SC.STABLE), (1 - R2, SC.MARGINAL), (1.0, SC.UNSTABLE),
             (1 + R2, SC.MARGINAL), (1.72, SC.STABLE), (1.75, SC.STABLE), (2.0, SC.STABLE)]
    rows = stability.sweep(R, [w for w, _ in table])
    classes = all(r.cls is c for r, (_, c) in zip(rows, table))
    worst = 0.0
    for r in rows:
        delta = -(2 * r.omega - 0.5) * (2 * r.omega - 3.5)
        root = math.sqrt(delta) if delta >= 0 else 1j * math.sqrt(-delta)
        want = sorted([-0.25 + 0.5 * root, -0.25 - 0.5 * root], key=lambda z: (z.real, z.imag))
        got = sorted(r.eigenvalues, key=lambda z: (z.real, z.imag))
        worst = max(worst, float(np.max(np.abs(np.array(got) - np.array(want, dtype=complex)))))
    expm_err = float(np.max(np.abs(monodromy.matrix_exp(R.evaluate(1.0)) - np.diag([math.exp(0.5), math.exp(-1)]))))
    ok = record("5", classes and worst <= 1e-12 and expm_err <= 1e-12,
                f"classes match: {classes}, eigenvalue error {worst:.2g}, exp(R) at omega=1 error {expm_err:.2g}")
    assert ok


# ---------------------------------------------------------------- 6


def test_criterion_6_pointwise_eigenvalues_mislead():
    e = catalog.markus_yamabe()
    worst = max(float(np.max(np.linalg.eigvals(e.A_eval(1.0, t)).real))
                for t in np.linspace(0, 2 * math.pi, 64, endpoint=False))
    cls = stability.classify(e.known_R, 1.0).cls
    ok = record("6", worst <= -0.25 + 1e-12 and cls is SC.UNSTABLE,
                f"max pointwise Re(lambda) = {worst:.15g}, classified {cls.value}")
    assert ok


# ---------------------------------------------------------------- 7


def _criterion_7_errors():
    out = []
    for row, params in [("A", {}), ("B", {"a": 1}), ("C", {"a": 1}), ("D", {}), ("E", {}), ("F", {}),
                        ("G", {"a": 1}), ("H", {})]:
        e = catalog.table_row("4-4", row, **params)
        sol = floquet.solve(e.A)
        for w in OMEGAS:
            T = 2 * math.pi / w
            rk = monodromy.integrate_transition(e.A, w, 0.0, T, 4096).value
            rec = monodromy.reconstruct_phi(sol, w, T, 0.0)
            err = float(np.max(np.abs(rec - rk)))
            out.append((row, w, err, err / max(1.0, float(np.max(np.abs(rk))))))
    return out


ERRORS_7 = None


def _errors_7():
    global ERRORS_7
    if ERRORS_7 is None:
        ERRORS_7 = _criterion_7_errors()
    return ERRORS_7


def test_criterion_7_ode_oracle_absolute():
    bad = [(r, w, e) for r, w, e, _ in _errors_7() if e > 1e-6]
    ok = record("7", not bad, "max-entry |reconstructed - RK4| <= 1e-6; failing: "
                + (", ".join(f"{r}@{w} ({e:.2g})" for r, w, e in bad) or "none"))
    assert ok


def test_criterion_7_ode_oracle_relative_diagnostic():
    worst = max(rel for *_, rel in _errors_7())
    ok = record("7 (relative diagnostic)", worst <= 1e-6,
                f"worst error relative to max(1, |Phi|): {worst:.2g}")
    assert ok


# ---------------------------------------------------------------- 8


def test_criterion_8_cauchy_euler_typeset():
    rk = monodromy.integrate_transition(catalog.cauchy_euler(), 1.0, 1.0, 2.0, 4096).value
    closed = float(np.max(np.abs(rk - catalog.cauchy_euler_transition_printed(2.0, 1.0))))
    naive = float(np.max(np.abs(rk - catalog.cauchy_euler_naive_exponential(2.0, 1.0))))
    ok = record("8", closed <= 1e-8 and naive > 0.01,
                f"typeset closed form error {closed:.3g}, exp of integral differs by {naive:.3g}")
    assert ok


def test_criterion_8_cauchy_euler_corrected():
    rk = monodromy.integrate_transition(catalog.cauchy_euler(), 1.0, 1.0, 2.0, 4096).value
    closed = float(np.max(np.abs(rk - catalog.cauchy_euler_transition(2.0, 1.0))))
    naive = float(np.max(np.abs(rk - catalog.cauchy_euler_naive_exponential(2.0, 1.0))))
    ok = record("8 (corrected closed form)", closed <= 1e-8 and naive > 0.01,
                f"closed form error {closed:.3g}, exp of integral differs by {naive:.3g}")
    assert ok


# ---------------------------------------------------------------- 9


def test_criterion_9_meissner():
    e = catalog.meissner(1, F(3, 10))
    w = 2.0
    exact = monodromy.monodromy_matrix(e, w, check_powers=False).value
    composed, t = np.eye(2), 0.0
    for M, d in e.A.segments_at(w):
        composed = monodromy.integrate_transition(M, w, t, t + d, 4096).value @ composed
        t += d
    err = float(np.max(np.abs(exact - composed)))
    assert record("9", err <= 1e-9, f"piecewise vs per-segment RK4: {err:.2g}")


# ---------------------------------------------------------------- 10


def test_criterion_10_trace_and_determinant_identities():
    solved = [catalog.table_row("4-4", r) for r in "ABCDEFGH"] + [catalog.example_3x3()]
    trace_ok = True
    for e in solved:
        sol = floquet.solve(e.A)
        trace_ok &= (sol.R.trace() - e.A.average().trace()).is_zero()
    liouville_ok, product_ok = True, True
    names = ["mathieu", "markus-yamabe", "meissner", "4-4:E", "aggarwal-infante"]
    for name in names:
        e = catalog.get(name)
        phi = monodromy.integrate_transition(e, 1.0, 0.3, 2.9, 4096)
        liouville_ok &= monodromy.jacobi_liouville_check(e, 1.0, phi, tol=1e-8)
        M = monodromy.monodromy_matrix(e, 1.0, check_powers=False)
        product_ok &= monodromy.characteristic_spectrum(M, e, 1.0, tol=1e-8).product_check
    ok = record("10", trace_ok and liouville_ok and product_ok,
                f"trace R = trace A_0 exactly on {len(solved)} systems: {trace_ok}; "
                f"det Phi law: {liouville_ok}; multiplier product law on {len(names)} systems: {product_ok}")
    assert ok


# ---------------------------------------------------------------- 11


def test_criterion_11_harmonic_bounds():
    rng = random.Random(11)
    violations = 0
    for trial in range(200):
        n = rng.choice((2, 3))
        L1, L2 = rng.randint(1, 4), rng.randint(1, 4)
        P = random_trig(rng, n, L1, den=2, span=2)
        Q = random_trig(rng, n, L2, den=2, span=2)
        kind = trial % 3
        if kind == 0:
            violations += (P @ Q).L > L1 + L2
        elif kind == 1:
            violations += P.determinant().L > n * L1
        else:
            violations += P.adjugate().L > (n - 1) * L1
    assert record("11", violations == 0, f"200 exact trials (product, det, adjugate), violations: {violations}")


# ---------------------------------------------------------------- 12


def test_criterion_12_exp_cos_sin_equivalence():
    rng = random.Random(12)
    mismatches = 0
    for _ in range(50):
        L, p, N = rng.randint(0, 3), rng.randint(0, 2), rng.randint(0, 1)
        A = random_trig(rng, 2, L, N)
        omega = F(rng.randint(1, 9), rng.randint(1, 4))
        system = floquet.assemble(A, p)
        cs = system.block(0)
        for r in range(1, len(system.slices)):
            cs = cs + system.block(r) * (omega ** r)
        S = harmonic.signature_similarity(2, p)
        mismatches += not np.array_equal(harmonic.assemble_exp_block(A, omega, p).matrix, S.dot(cs).dot(S))
    assert record("12", mismatches == 0, f"50 random rational systems, exact mismatches: {mismatches}")


# ---------------------------------------------------------------- 13


def test_criterion_13_harmonic_module():
    A = np.array([[-1.0, 0.3], [-0.2, -2.0]])
    hss = harmonic.build_hss(A, [[1.0], [0.0]], [[0.0, 1.0]], [[0.0]], 1.0, trunc=8)
    lti = sorted(harmonic.poles(hss).values, key=lambda z: z.real)
    lti_err = float(np.max(np.abs(np.array(lti) - np.array(sorted(np.linalg.eigvals(A), key=lambda z: z.real)))))

    hill = catalog.mathieu()
    blocks = []
    for M in (8, 12):
        h = harmonic.build_hss(hill.A, [[0.0], [1.0]], [[1.0, 0.0]], [[0.0]], 2.0, trunc=M)
        blocks.append(harmonic.central_block(h, harmonic.htf(h, 0.1 + 0.2j)))
    hill_gap = float(np.max(np.abs(blocks[0] - blocks[1])))

    my = catalog.markus_yamabe()
    ti = harmonic.time_invariant_hss(my, np.eye(2), np.eye(2), np.zeros((2, 2)), 1.0, trunc=8)
    my_poles = sorted(harmonic.poles(ti).values, key=lambda z: z.real)
    my_err = float(np.max(np.abs(np.array(my_poles) - np.array([-1.0, 0.5])))) if len(my_poles) == 2 else math.inf

    ok = record("13", lti_err <= 1e-8 and hill_gap <= 1e-6 and my_err <= 1e-6,
                f"LTI pole error {lti_err:.2g}, Hill trunc 8 vs 12 gap {hill_gap:.2g}, "
                f"Markus-Yamabe pole error {my_err:.2g}")
    assert ok


# ---------------------------------------------------------------- 14


def test_criterion_14_small_omega_continuity():
    e = catalog.table_row("4-4", "H")
    A0 = e.A.evaluate(0.0, 0.0)
    gaps = [float(np.max(np.abs(monodromy.integrate_transition(e, 1e-4, 0.0, t, 2048).value
                                - monodromy.matrix_exp(t * A0)))) for t in (0.5, 1.0)]
    assert record("14", max(gaps) <= 1e-3, f"gaps at t = 0.5, 1: {gaps[0]:.2g}, {gaps[1]:.2g}")
