import pytest
from hypothesis import given, strategies as st

from openimage.errors import HypothesisFails, OddTrace, PrecisionExhausted
from openimage.matrices import (AdjointOp, EigenvalueNear, Mat2, TracelessMat,
                                VectorSmall, adjugate, approx_eigen_defect,
                                bracket, char_poly, char_poly_adjoint,
                                hensel_failure_dichotomy, theta)
from openimage.padic import PadicContext, vp

C3 = PadicContext(3, 6)


def mats(ctx):
    e = st.integers(0, ctx.modulus - 1)
    return st.builds(lambda a, b, c, d: Mat2(a, b, c, d, ctx), e, e, e, e)


def traceless(ctx):
    e = st.integers(0, ctx.modulus - 1)
    return st.builds(lambda a, b, c: TracelessMat(a, b, c, -a, ctx), e, e, e)


def test_theta_examples():
    ctx = PadicContext(3, 4)
    assert theta(Mat2.identity(ctx)).is_zero_mod(ctx.N)
    assert theta(Mat2(1, 1, 0, 1, ctx)) == Mat2(0, 1, 0, 0, ctx)
    assert theta(Mat2(2, 0, 0, 3, PadicContext(5, 2))).rows() == [[12, 0], [0, 13]]


def test_theta_dyadic_needs_level_one():
    ctx = PadicContext(2, 6)
    with pytest.raises(OddTrace):
        theta(Mat2(1, 1, 0, 2, ctx))
    t = theta(Mat2(3, 2, 4, 7, ctx))
    # meaningful mod 2^(N-1) only
    assert t.trace % 32 == 0


def test_adjugate_examples():
    ctx = PadicContext(5, 3)
    assert adjugate(Mat2.identity(ctx)) == Mat2.identity(ctx)
    assert adjugate(Mat2(1, 2, 3, 4, ctx)) == Mat2(4, -2, -3, 1, ctx)
    assert adjugate(Mat2.scalar(0, ctx)) == Mat2.scalar(0, ctx)


def test_adjoint_char_poly_examples():
    ctx = PadicContext(5, 4)
    m = ctx.modulus
    assert char_poly_adjoint(TracelessMat(1, 0, 0, -1, ctx)).coefficients == (0, -4 % m, 0, 1)
    assert char_poly_adjoint(TracelessMat(0, 1, 0, 0, ctx)).coefficients == (0, 0, 0, 1)
    g = TracelessMat(0, 1, 1, 0, ctx)
    assert AdjointOp.of(g).char_poly().coefficients == (0, -4 % m, 0, 1)


def test_traceless_rejects_trace():
    with pytest.raises(ValueError):
        TracelessMat(1, 0, 0, 1, C3)


def test_approx_eigen_defect_examples():
    ctx = PadicContext(3, 4)
    g = Mat2(1, 0, 0, -1, ctx)
    assert approx_eigen_defect(g, 1, (1, 0), 4) == 0
    assert approx_eigen_defect(g, 10, (1, 0), 2) == 0
    assert vp(char_poly(g)._eval_int(10) % 81, 3, 4) == 2
    assert approx_eigen_defect(g, 1, (3, 0), 3) == 1


def test_dichotomy_examples():
    ctx = PadicContext(3, 8)
    g = TracelessMat(1, 0, 0, -1, ctx)
    out = hensel_failure_dichotomy(g, 1, (1, 3 ** 4), 4)
    assert isinstance(out, EigenvalueNear) and out.nu == 1 and out.depth == ctx.N
    g2 = TracelessMat(2, 0, 0, -2, ctx)
    n = 5
    out = hensel_failure_dichotomy(g2, 1, (3 ** n, 3 ** (n - 1)), n)
    assert isinstance(out, VectorSmall) and out.beta >= n - 1
    zero = TracelessMat(0, 0, 0, 0, ctx)
    out = hensel_failure_dichotomy(zero, 0, (1, 0), 5)
    assert isinstance(out, EigenvalueNear) and out.nu == 0


@given(traceless(C3))
def test_adjoint_char_poly_closed_form(g):
    assert char_poly_adjoint(g).coefficients == AdjointOp.of(g).char_poly().coefficients


@given(traceless(C3), traceless(C3))
def test_adjoint_op_is_bracket(g, u):
    coords = AdjointOp.of(g).apply(u.coords())
    assert list(coords) == list(bracket(g, u).coords())


@given(mats(C3), mats(C3), mats(C3))
def test_matrix_product_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(mats(C3))
def test_adjugate_is_inverse_up_to_det(m):
    assert m * adjugate(m) == Mat2.scalar(m.det, C3)


@given(mats(C3))
def test_cayley_hamilton(m):
    p = char_poly(m).coefficients
    assert (m * m + m * p[1] + Mat2.scalar(p[0], C3)).is_zero_mod(C3.N)


@given(st.sampled_from([2, 3, 5]), st.data())
def test_eigen_defect_inequality(ell, data):
    ctx = PadicContext(ell, 6)
    mod = ctx.modulus
    n = data.draw(st.integers(1, 6))
    b = data.draw(st.integers(0, n - 1))
    w0 = data.draw(st.integers(0, mod - 1)) * ell + 1
    w1 = data.draw(st.integers(0, mod - 1))
    lam = data.draw(st.integers(0, mod - 1))
    bb, dd = data.draw(st.integers(0, mod - 1)), data.draw(st.integers(0, mod - 1))
    inv = pow(w0, -1, mod)
    a = (lam * w0 - bb * w1) * inv % mod
    c = (lam * w1 - dd * w1) * inv % mod
    q = ell ** (n - b)
    g = Mat2(a + q * data.draw(st.integers(0, 9)), bb, c, dd + q * data.draw(st.integers(0, 9)), ctx)
    w = (w0 * ell ** b % mod, w1 * ell ** b % mod)
    bw = approx_eigen_defect(g, lam, w, n)
    assert bw == b
    assert vp(char_poly(g)._eval_int(lam) % mod, ell, ctx.N) >= n - bw


def test_eigen_defect_rejects_bad_instances():
    ctx = PadicContext(3, 4)
    with pytest.raises(HypothesisFails):
        approx_eigen_defect(Mat2(1, 0, 0, 2, ctx), 5, (1, 0), 3)
    with pytest.raises(PrecisionExhausted):
        approx_eigen_defect(Mat2(1, 0, 0, 2, ctx), 1, (1, 0), 5)
