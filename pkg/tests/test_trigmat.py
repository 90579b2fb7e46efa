import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import random_trig
from lptv import catalog
from lptv.trigmat import (OMEGA, ExpTrigMatrix, NonConstantDeterminant, OmegaPoly, OmegaPolyMatrix,
                          SingularDeterminant, TrigMatrix, complex_embed, cos_term, evenodd_embed,
                          evenodd_solution, from_exponential, sin_term, split_embed)

c, s, mat = catalog.c, catalog.s, catalog.mat

ROTATION = mat([[c(1), s(1)], [-s(1), c(1)]])
FIVE_HARMONIC_P = mat([[c(2, 2) + c(1), s(2, 2) - s(1)], [-s(2, 2) - s(1), c(2, 2) - c(1)]])

seeds = st.integers(min_value=0, max_value=2 ** 31)
sample_points = [(0.3 + 0.11 * k, -2.0 + 0.37 * k) for k in range(32)]


def exact_value(M: TrigMatrix, omega: F, cos_sin):
    """Evaluate with exact omega and supplied exact (cos(l w t), sin(l w t)) tables."""
    total = np.zeros((M.n, M.n), dtype=object)
    total[:] = F(0)
    for r, l, parity, coef in M.terms():
        trig = cos_sin[l][parity]
        total = total + coef * (omega ** r) * trig
    return total


def pythagorean_table(L: int, u: F = F(3, 5), v: F = F(4, 5)):
    """cos(l x), sin(l x) for cos x = u, sin x = v, all rational."""
    table = [(F(1), F(0))]
    for _ in range(L):
        pc, ps = table[-1]
        table.append((pc * u - ps * v, ps * u + pc * v))
    return table


# ---------------------------------------------------------------- OmegaPoly


def test_omega_poly_trims_and_evaluates():
    p = OmegaPoly([1, 2, 0, 0])
    assert p.degree == 1
    assert p(F(3)) == 7
    assert OmegaPoly([0, 0]).degree == 0 and OmegaPoly([0, 0]).is_zero()


def test_omega_poly_matrix_views_agree():
    R = OmegaPolyMatrix([[[1, -1], [1, -1]], [[0, 1], [-1, 0]]])
    for i in range(2):
        for j in range(2):
            for r in range(2):
                coeffs = R.entry(i, j).coeffs
                assert (coeffs[r] if r < len(coeffs) else 0) == R.slice(r)[i, j]


# ---------------------------------------------------------------- evaluate


def test_constant_evaluates_to_itself():
    C = [[F(1, 2), 3], [-1, F(7, 3)]]
    M = TrigMatrix.constant(C)
    for w, t in sample_points[:5]:
        assert np.allclose(M.evaluate(w, t), np.array(C, dtype=float), atol=0)


def test_rotation_is_identity_at_zero_frequency():
    for t in (0.0, 0.4, 17.0):
        assert np.array_equal(ROTATION.evaluate(0.0, t), np.eye(2))


def test_five_harmonic_p_at_phase_zero():
    assert np.array_equal(FIVE_HARMONIC_P.evaluate(1.0, 0.0), np.array([[3.0, 0.0], [0.0, 1.0]]))


# ---------------------------------------------------------------- add / scale


def test_additive_identity_and_annihilator(rng):
    M = random_trig(rng, 2, 3, 1)
    assert M + TrigMatrix.zeros(2) == M
    Z = M.scale(0)
    assert Z.is_zero() and Z.L == 0 and Z.N == 0


def test_scale_by_omega_raises_degree(rng):
    M = random_trig(rng, 2, 2, 1, exact=False)
    W = M.scale(OMEGA)
    assert W.N == M.N + 1
    for w, t in sample_points:
        assert np.allclose(W.evaluate(w, t), w * M.evaluate(w, t), rtol=0, atol=1e-12)


def test_size_mismatch_raises():
    with pytest.raises(ValueError):
        TrigMatrix.identity(2) + TrigMatrix.identity(3)
    with pytest.raises(ValueError):
        TrigMatrix.identity(2) @ TrigMatrix.identity(3)


# ---------------------------------------------------------------- multiply


def test_cos_squared():
    prod = c(1) * c(1)
    assert prod == TrigMatrix(1, {(0, 0, "c"): [[F(1, 2)]], (0, 2, "c"): [[F(1, 2)]]})


def test_even_even_plus_odd_odd_is_cosine_only(rng):
    A = random_trig(rng, 2, 2)
    P = random_trig(rng, 2, 2)
    Ae, Ao = A.even_odd_split()
    Pe, Po = P.even_odd_split()
    prod = Ae @ Pe + Ao @ Po
    assert all(par == 0 for _, _, par, _ in prod.terms())
    # cosine coefficient k of the product, against the double sum over signed harmonics
    for k in range(0, 5):
        expected = np.zeros((2, 2), dtype=object)
        expected[:] = F(0)
        for l in range(-2, 3):
            m = k - l
            if abs(m) > 2:
                continue
            ae = Ae.even(0, l) * (2 if l == 0 else 1)
            pe = Pe.even(0, m) * (2 if m == 0 else 1)
            expected = expected + (ae.dot(pe) - Ao.odd(0, l).dot(Po.odd(0, m))) / 2
        if k == 0:
            expected = expected / 2
        assert np.array_equal(prod.coeff(0, k, "c"), expected)


@given(seeds)
def test_product_matches_pointwise(seed):
    r = random.Random(seed)
    A = random_trig(r, 2, r.randint(0, 3), r.randint(0, 1), exact=False)
    B = random_trig(r, 2, r.randint(0, 3), r.randint(0, 1), exact=False)
    prod = A @ B
    for w, t in sample_points:
        got = prod.evaluate(w, t)
        want = A.evaluate(w, t) @ B.evaluate(w, t)
        assert np.max(np.abs(got - want)) <= 1e-12 * (1 + np.max(np.abs(want)))


@given(seeds)
def test_exact_ops_match_rational_evaluation(seed):
    r = random.Random(seed)
    A = random_trig(r, 2, r.randint(0, 2), r.randint(0, 1))
    B = random_trig(r, 2, r.randint(0, 2), r.randint(0, 1))
    table = pythagorean_table(A.L + B.L + 1)
    trig = [{0: cc, 1: ss} for cc, ss in table]
    w = F(r.randint(1, 9), r.randint(1, 5))
    a, b = exact_value(A, w, trig), exact_value(B, w, trig)
    assert np.array_equal(exact_value(A @ B, w, trig), a.dot(b))
    assert np.array_equal(exact_value(A + B, w, trig), a + b)
    assert np.array_equal(exact_value(A - B, w, trig), a - b)


# ---------------------------------------------------------------- harmonic bounds


@given(seeds)
def test_harmonic_bounds(seed):
    r = random.Random(seed)
    n = r.choice((2, 3))
    L1, L2 = r.randint(1, 4), r.randint(1, 4)
    A = random_trig(r, n, L1)
    B = random_trig(r, n, L2)
    assert (A @ B).L <= L1 + L2
    assert A.determinant().L <= n * L1
    assert A.adjugate().L <= (n - 1) * L1


# ---------------------------------------------------------------- differentiate


def test_derivative_of_constant_is_zero():
    assert TrigMatrix.constant([[1, 2], [3, 4]]).differentiate().is_zero()


def test_derivative_of_rotation():
    expected = mat([[-s(1), c(1)], [-c(1), -s(1)]]).scale(OMEGA)
    assert ROTATION.differentiate() == expected


@given(seeds)
def test_derivative_against_central_difference(seed):
    r = random.Random(seed)
    M = random_trig(r, 2, r.randint(1, 3), r.randint(0, 1), exact=False)
    w, t, h = 0.7, 0.3, 1e-5
    fd = (M.evaluate(w, t + h) - M.evaluate(w, t - h)) / (2 * h)
    exact = M.differentiate().evaluate(w, t)
    assert np.max(np.abs(fd - exact)) <= 1e-6 * (1 + np.max(np.abs(exact)))


# ---------------------------------------------------------------- even / odd parts


def test_cosine_series_split():
    M = mat([[c(1), 1 + c(3)], [c(2, 5), 0]])
    even, odd = M.even_odd_split()
    assert even == M and odd.is_zero()


def test_markus_yamabe_split_layout():
    A = catalog.markus_yamabe().A
    even, odd = A.even_odd_split()
    assert {(r, l) for r, l, _, _ in even.terms()} == {(0, 0), (0, 2)}
    assert {(r, l) for r, l, _, _ in odd.terms()} == {(0, 2)}
    assert even + odd == A


@given(seeds)
def test_parity_at_mirrored_points(seed):
    r = random.Random(seed)
    M = random_trig(r, 2, 3, 1)
    even, odd = M.even_odd_split()
    table = pythagorean_table(3)
    fwd = [{0: cc, 1: ss} for cc, ss in table]
    back = [{0: cc, 1: -ss} for cc, ss in table]
    w = F(3, 2)
    assert np.array_equal(exact_value(even, w, fwd), exact_value(even, w, back))
    assert np.array_equal(exact_value(odd, w, fwd), -exact_value(odd, w, back))


# ---------------------------------------------------------------- average


def test_average_of_markus_yamabe():
    a = F(3, 2)
    avg = catalog.markus_yamabe(a).A.average()
    assert avg.equals(OmegaPolyMatrix.constant([[-1 + a / 2, 1], [-1, -1 + a / 2]]))


def test_average_of_zero_mean_series():
    assert mat([[c(1), s(2)], [s(1), -c(3)]]).average().equals(OmegaPolyMatrix.constant([[0, 0], [0, 0]]))


def test_average_against_trapezoid(rng):
    M = random_trig(rng, 2, 3, 1, exact=False)
    ts = np.linspace(0, 2 * np.pi, 257)[:-1]
    quad = np.mean([M.evaluate(1.0, t) for t in ts], axis=0)
    assert np.max(np.abs(quad - M.average().evaluate(1.0))) <= 1e-10


# ---------------------------------------------------------------- trace series


def test_traceless_trace_series():
    info = mat([[c(1), s(1)], [2, -c(1)]]).trace_series()
    assert info.psi.is_zero() and info.psi0.is_zero() and info.Psi1.is_zero()


def test_trace_of_constant_shift_family():
    a = F(5, 7)
    A = catalog.wu_rowH(a0=a, b0=1, c0=F(1, 2), d0=F(-1, 3)).A
    info = A.trace_series()
    assert info.psi == TrigMatrix.constant([[a]])
    assert info.psi0 == OmegaPoly([a])


def test_antiderivative_of_zero_mean_part():
    M = mat([[1 + c(1, 2) + s(3), 0], [0, c(2) - s(1, F(1, 2)) + cos_term(1, 1, r=1)]])
    info = M.trace_series()
    assert info.psi1.average().equals(OmegaPolyMatrix.constant([[0]]))
    w, h = 1.3, 1e-5
    assert info.Psi1(w, 0.0) == 0.0
    for t in (0.1, 0.9, 2.5):
        fd = (info.Psi1(w, t + h) - info.Psi1(w, t - h)) / (2 * h)
        assert abs(fd - info.psi1.evaluate(w, t)[0, 0]) <= 1e-8


# ---------------------------------------------------------------- determinant / adjugate / inverse


def test_determinant_examples():
    assert FIVE_HARMONIC_P.determinant() == TrigMatrix.constant([[3]])
    assert ROTATION.determinant() == TrigMatrix.constant([[1]])
    assert TrigMatrix.identity(3).determinant() == TrigMatrix.constant([[1]])


def test_adjugate_2x2_and_identity(rng):
    M = random_trig(rng, 2, 2, 1)
    grid = [[M.entry(i, j) for j in range(2)] for i in range(2)]
    assert M.adjugate() == TrigMatrix.from_entries([[grid[1][1], -grid[0][1]], [-grid[1][0], grid[0][0]]])
    assert TrigMatrix.identity(3).adjugate() == TrigMatrix.identity(3)


@given(seeds)
def test_adjugate_identity(seed):
    r = random.Random(seed)
    M = random_trig(r, 3, r.randint(1, 2), exact=False)
    adj, det = M.adjugate(), M.determinant()
    for w, t in sample_points[:8]:
        lhs = M.evaluate(w, t) @ adj.evaluate(w, t)
        d = det.evaluate(w, t)[0, 0]
        assert np.max(np.abs(lhs - d * np.eye(3))) <= 1e-10 * (1 + abs(d))


def test_inverse_of_rotation_is_transpose():
    assert ROTATION.inverse_if_const_det() == ROTATION.transpose()
    assert TrigMatrix.identity(2).inverse_if_const_det() == TrigMatrix.identity(2)


def test_inverse_errors():
    # numerator of a rational-function P with det -(2 + cos)^2
    Q = mat([[c(1), -s(1)], [-s(1), -c(1)]]) * (TrigMatrix.constant([[2]]) + c(1))
    with pytest.raises(NonConstantDeterminant):
        Q.inverse_if_const_det()
    with pytest.raises(SingularDeterminant):
        mat([[c(1), c(1)], [c(1), c(1)]]).inverse_if_const_det()


# ---------------------------------------------------------------- exponential form


def test_euler_formulas():
    ident = TrigMatrix.identity(2)
    E = (ident * c(1)).to_exponential(1.0)
    assert np.allclose(E.coeff(1), np.eye(2) / 2) and np.allclose(E.coeff(-1), np.eye(2) / 2)
    E = (ident * s(1)).to_exponential(1.0)
    assert np.allclose(E.coeff(1), -0.5j * np.eye(2)) and np.allclose(E.coeff(-1), 0.5j * np.eye(2))


@given(seeds)
def test_exponential_round_trip(seed):
    r = random.Random(seed)
    M = random_trig(r, 2, r.randint(0, 4), r.randint(0, 2), exact=False)
    w = 0.5 + r.random()
    E = M.to_exponential(w)
    assert E.is_real()
    back = from_exponential(E)
    cos_c, sin_c = M.coefficients_at(w)
    for l in range(cos_c.shape[0]):
        assert np.max(np.abs(back.coeff(0, l, "c") - cos_c[l])) <= 1e-14 * (1 + np.max(np.abs(cos_c[l])))
        assert np.max(np.abs(back.coeff(0, l, "s") - sin_c[l])) <= 1e-14 * (1 + np.max(np.abs(sin_c[l])))
    for t in (0.0, 0.7, 3.1):
        assert np.allclose(E.evaluate(w, t).real, M.evaluate(w, t), atol=1e-12)


def test_non_real_exponential_rejected():
    E = ExpTrigMatrix(1, {1: [[1.0]], -1: [[2.0]]})
    with pytest.raises(ValueError):
        E.from_exponential()


# ---------------------------------------------------------------- embeddings


def test_complex_embed_examples(rng):
    A = random_trig(rng, 2, 1)
    assert complex_embed(A) == TrigMatrix.block([[A, TrigMatrix.zeros(2)], [TrigMatrix.zeros(2), A]])
    unit_i = complex_embed(TrigMatrix.constant([[0]]), TrigMatrix.constant([[1]]))
    assert unit_i == TrigMatrix.constant([[0, -1], [1, 0]])


def test_split_embed_examples(rng):
    A = random_trig(rng, 2, 1)
    assert split_embed(A) == TrigMatrix.block([[A, TrigMatrix.zeros(2)], [TrigMatrix.zeros(2), A]])
    unit_j = split_embed(TrigMatrix.constant([[0]]), TrigMatrix.constant([[1]]))
    assert unit_j == TrigMatrix.constant([[0, 1], [1, 0]])


@given(seeds)
def test_embeddings_are_homomorphisms(seed):
    r = random.Random(seed)
    a, b, cc, d = (random_trig(r, 2, r.randint(0, 2), exact=False) for _ in range(4))
    for embed, sign in ((complex_embed, -1), (split_embed, 1)):
        prod = embed(a @ cc + (b @ d).scale(sign), a @ d + b @ cc)
        for w, t in sample_points[:8]:
            lhs = prod.evaluate(w, t)
            rhs = embed(a, b).evaluate(w, t) @ embed(cc, d).evaluate(w, t)
            assert np.max(np.abs(lhs - rhs)) <= 1e-11 * (1 + np.max(np.abs(rhs)))


def test_evenodd_embed_examples():
    A = mat([[1 + c(1), c(2)], [3, -c(1)]])
    Z = TrigMatrix.zeros(2)
    assert evenodd_embed(A) == TrigMatrix.block([[Z, A], [A, Z]])
    B = mat([[F(1, 2) + s(1), c(1)], [s(2), -F(1, 2)]])
    avg = evenodd_embed(B).average()
    half = np.array([[F(1, 2), 0], [0, F(-1, 2)]], dtype=object)
    zero = np.zeros((2, 2), dtype=object)
    assert avg.equals(OmegaPolyMatrix([np.block([[zero, half], [half, zero]])]))


def test_evenodd_embedding_solution():
    from lptv import floquet

    for entry in (catalog.table_row("4-4", "E"), catalog.table_row("4-4", "A")):
        P_emb, R_emb = evenodd_solution(entry.known_P, entry.known_R)
        assert floquet.residual(evenodd_embed(entry.A), P_emb, R_emb).is_zero()
        assert R_emb.trace().is_zero()


# ---------------------------------------------------------------- frequency zero


def test_at_omega_zero_examples():
    A_e = catalog.table_row("4-4", "E").A
    expected = np.array([[1, -3], [F(1, 3), -1]], dtype=object)
    assert np.array_equal(A_e.at_omega_zero(), expected)
    A3 = catalog.example_3x3().A
    expected = np.array([[75, -17, -112], [99, -22, -143], [35, -8, -53]], dtype=object)
    assert np.array_equal(A3.at_omega_zero(), expected)
    pure = TrigMatrix(2, {(1, 1, "c"): [[1, 0], [0, 1]], (2, 0, "c"): [[0, 1], [0, 0]]})
    assert not np.any(pure.at_omega_zero())


def test_three_by_three_at_omega_zero_is_nilpotent():
    A0 = catalog.example_3x3().A.at_omega_zero()
    cube = A0.dot(A0).dot(A0)
    assert not np.any(cube) and np.any(A0)


@given(seeds)
def test_at_omega_zero_matches_evaluation(seed):
    r = random.Random(seed)
    M = random_trig(r, 2, 3, 1, exact=True, den=1)
    A0 = M.at_omega_zero()
    for k in range(8):
        t = r.uniform(-10, 10)
        assert np.array_equal(M.evaluate(0.0, t), A0.astype(float))


def test_zero_frequency_of_float_series():
    M = random_trig(random.Random(3), 3, 2, 2, exact=False)
    assert np.array_equal(M.at_omega_zero(), M.evaluate(0.0, math.pi / 3))
