import random

import pytest
from hypothesis import given, settings, strategies as st

from openimage.errors import HypothesisFails, PreconditionError
from openimage.inner import (ApproxMorphism, alpha_of, construct_inner_matrix,
                             graph_defect, graph_defect_depth, scalar_match,
                             verify_trace_congruence)
from openimage.lattice import LieLattice
from openimage.matrices import Mat2, TracelessMat, adjugate
from openimage.padic import PadicContext


def conj(M0, s, n, noise=None):
    return ApproxMorphism.conjugation(M0, s, n, noise)


def proportional(M, M0, k):
    ctx = M.ctx
    q = ctx.ell ** k
    i = next(i for i, e in enumerate(M0.entries()) if e % ctx.ell)
    c = M.entries()[i] * pow(M0.entries()[i], -1, ctx.modulus)
    return all((m - c * m0) % q == 0 for m, m0 in zip(M.entries(), M0.entries()))


def test_alpha_examples():
    assert alpha_of(conj(Mat2.identity(PadicContext(5, 6)), 0, 6)) == 0
    assert alpha_of(conj(Mat2.identity(PadicContext(3, 6)), 2, 6)) == 2
    ctx = PadicContext(5, 8)
    phi = conj(Mat2(1, 1, 0, 1, ctx), 1, 8)
    assert alpha_of(phi) == 1
    assert phi.y.rows() == [[5, -5 % ctx.modulus], [5, -5 % ctx.modulus]]


def test_exact_conjugation_below_hypothesis_is_rejected():
    ctx = PadicContext(5, 12)
    with pytest.raises(HypothesisFails):
        construct_inner_matrix(conj(Mat2(1, 1, 0, 1, ctx), 1, 12))


def test_exact_conjugation_recovers_M0():
    ctx = PadicContext(5, 12)
    M0 = Mat2(1, 1, 0, 1, ctx)
    phi = conj(M0, 1, 17)
    cert = construct_inner_matrix(phi)
    k = cert.certified_precision
    assert k == 4
    assert proportional(cert.M, M0, k)
    rng = random.Random(7)
    adjM = adjugate(cert.M)
    for _ in range(50):
        cs = [rng.randrange(ctx.modulus) for _ in range(3)]
        g = sum((d * c for d, c in zip(phi.domain, cs)), Mat2.scalar(0, ctx))
        im = sum((d * c for d, c in zip(phi.images, cs)), Mat2.scalar(0, ctx))
        assert (cert.M * g * adjM).congruent(im * cert.M.det, k)


def test_identity_gives_scalar():
    ctx = PadicContext(5, 12)
    cert = construct_inner_matrix(conj(Mat2.identity(ctx), 0, 12))
    M = cert.M
    k = cert.certified_precision
    assert k == 6
    assert M.a % 5 and (M.a - M.d) % 5 ** k == 0
    assert M.b % 5 ** k == 0 and M.c % 5 ** k == 0


@pytest.mark.parametrize("ell, N, s", [(3, 14, 1), (5, 12, 1), (2, 18, 2)])
def test_noisy_conjugation_certified_precision(ell, N, s):
    ctx = PadicContext(ell, N)
    M0 = Mat2(2, 1, 1, 1, ctx)
    alpha = alpha_of(conj(M0, s, 0))
    n = alpha + 10 * s + 5 * ctx.v + 6
    q = ell ** n
    noise = [TracelessMat(q * 3, q, q * 2, -q * 3, ctx)] * 3
    phi = conj(M0, s, n, noise)
    cert = construct_inner_matrix(phi)
    assert cert.certified_precision == min(N, 4 * s + ctx.v)
    assert cert.det_valuation <= 4 * s + ctx.v
    assert all((cert.M * g).congruent(img * cert.M, cert.certified_precision)
               for g, img in phi.pairs())


def test_trace_congruence_detects_corruption():
    ctx = PadicContext(5, 20)
    n = 12
    phi = conj(Mat2(2, 1, 1, 1, ctx), 0, n)
    cert = construct_inner_matrix(phi)
    assert verify_trace_congruence(phi, cert, depth=ctx.N)
    bad = ApproxMorphism.from_sl2_images(ctx, 0, n, phi.x, phi.h * (1 + 5 ** (n - 1)), phi.y)
    assert verify_trace_congruence(bad, cert, depth=n - 1)
    assert not verify_trace_congruence(bad, cert, depth=n)


def _graph(ctx, f, t=None):
    gens = []
    for i in range(3):
        e = [int(i == j) for j in range(3)]
        gens.append(e + list(f(e)))
    if t is not None:
        q = ctx.ell ** t
        gens += [[0, 0, 0] + [q * (i == j) for j in range(3)] for i in range(3)]
    return LieLattice(ctx, 6, gens)


def test_graph_defect_examples():
    ctx = PadicContext(3, 6)
    ident = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    exact = _graph(ctx, lambda e: e)
    assert graph_defect(exact, ctx.N, ident)
    assert graph_defect_depth(exact) == ctx.N
    planted = _graph(ctx, lambda e: e, t=2)
    assert graph_defect(planted, 2, ident)
    assert not graph_defect(planted, 3, ident)
    assert graph_defect_depth(planted) == 2
    assert not graph_defect(exact, 1, [[2, 0, 0], [0, 1, 0], [0, 0, 1]])


def test_scalar_match_examples():
    ctx = PadicContext(5, 10)
    g = Mat2(2, 1, 1, 1, ctx)
    cert_id = construct_inner_matrix(conj(Mat2.identity(ctx), 0, 10))
    assert scalar_match(g, g, cert_id, cert_id.certified_precision)
    M0 = Mat2(1, 1, 0, 1, ctx)
    inv = Mat2(1, -1, 0, 1, ctx)
    cert = construct_inner_matrix(conj(M0, 1, 17))
    for g1 in (Mat2(2, 1, 1, 1, ctx), Mat2(1, 5, 0, 1, ctx), Mat2(3, 5, 1, 2, ctx)):
        assert scalar_match(g1, M0 * g1 * inv, cert, cert.certified_precision)
    with pytest.raises(PreconditionError):
        scalar_match(Mat2.identity(ctx), Mat2.scalar(-1, ctx), cert_id, 3)
    with pytest.raises(PreconditionError):
        scalar_match(Mat2.identity(ctx), Mat2.scalar(2, ctx), cert_id, 3)


def test_morphism_json_round_trip():
    ctx = PadicContext(3, 10)
    phi = conj(Mat2(2, 1, 1, 1, ctx), 1, 17)
    again = ApproxMorphism.from_json(phi.to_json())
    assert again.to_json() == phi.to_json()


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([(3, 14, 1), (5, 12, 1), (5, 14, 2), (2, 18, 2)]), st.data())
def test_reconstruction_intertwines(cfg, data):
    ell, N, s = cfg
    ctx = PadicContext(ell, N)
    e = st.integers(0, ctx.modulus - 1)
    a, b, c, d = (data.draw(e) for _ in range(4))
    if (a * d - b * c) % ell == 0:
        d += 1 if (a % ell) else 0
        if (a * d - b * c) % ell == 0:
            a, b, c, d = 1, b, 0, 1
    M0 = Mat2(a, b, c, d, ctx)
    alpha = alpha_of(conj(M0, s, 0))
    n = alpha + 10 * s + 5 * ctx.v + 6
    cert = construct_inner_matrix(conj(M0, s, n))
    k = cert.certified_precision
    assert k == max(0, min(N, n - alpha - 6 * s - 4 * ctx.v - 6))
    assert proportional(cert.M, M0, k)
