"""Approximate sl_2 morphisms are approximately inner.

Given the images ``x, h, y`` of ``l^s e12, l^s H, l^s e21`` under a map that
respects brackets modulo ``l^n``, :func:`construct_inner_matrix` builds an
intertwining matrix ``M`` by the highest-weight recipe:

1. the commutator operator ``C_h`` has an approximate eigenvalue ``2 l^s``,
   which Hensel's lemma lifts to an exact root ``lambda``;
2. ``mu_+ = lambda / 2`` is an eigenvalue of ``h``;
3. an eigenvector ``v_+`` comes from a column of ``adj(h - mu_+)``;
4. ``v_- = y v_+``;
5. ``M`` is the matrix with columns ``l^s v_+`` and ``v_-`` divided by the
   largest power of ``l`` dividing all of its entries.

Integer representatives of the inputs are treated as exact, and the steps
run at an enlarged precision so that intermediate divisions by powers of l
do not eat into the answer.  Every claimed congruence is then re-checked
modulo ``l^N``; a failure raises :class:`Falsified`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import (BranchAmbiguity, Degenerate, Falsified, HypothesisFails,
                     NonSquareDet, PrecisionExhausted, PreconditionError)
from .lattice import LieLattice, special_basis, solve_in_span
from .matrices import Mat2, TracelessMat, adjugate, bracket, theta
from .padic import (MonicPoly, PadicContext, hensel_lift, is_square_unit,
                    sqrt_one_plus, sqrt_unit, vp)


def _scaled_basis(ctx: PadicContext, s: int):
    q = ctx.ell ** s
    return [TracelessMat(0, q, 0, 0, ctx), TracelessMat(q, 0, 0, -q, ctx),
            TracelessMat(0, 0, q, 0, ctx)]


def _inverse_unit_det(m: Mat2) -> Mat2:
    return adjugate(m) * pow(m.det, -1, m.ctx.modulus)


@dataclass(frozen=True)
class ApproxMorphism:
    """Linear map on a lattice ``L_1 >= l^s sl_2`` given on a domain basis.

    ``x, h, y`` are the images of ``l^s e12, l^s H, l^s e21``; ``domain`` and
    ``images`` list further basis elements of ``L_1`` and their values.
    ``n`` is the claimed bracket-compatibility depth.
    """

    ctx: PadicContext
    s: int
    n: int
    x: TracelessMat
    h: TracelessMat
    y: TracelessMat
    domain: tuple = ()
    images: tuple = ()

    @classmethod
    def from_sl2_images(cls, ctx, s, n, x, h, y):
        x, h, y = (TracelessMat.of(m) for m in (x, h, y))
        return cls(ctx, s, n, x, h, y, tuple(_scaled_basis(ctx, s)), (x, h, y))

    @classmethod
    def conjugation(cls, M0: Mat2, s: int, n: int, noise=None):
        """``g -> M0 g M0^-1`` on ``l^s sl_2``, plus optional additive noise
        (three traceless matrices, added to the images of x, h, y)."""
        ctx = M0.ctx
        inv = _inverse_unit_det(M0)
        imgs = [M0 * b * inv for b in _scaled_basis(ctx, s)]
        if noise is not None:
            imgs = [m + e for m, e in zip(imgs, noise)]
        return cls.from_sl2_images(ctx, s, n, *imgs)

    def pairs(self):
        return list(zip(self.domain, self.images))

    def bracket_defect(self) -> int:
        """Least valuation of ``[phi(a), phi(b)] - phi([a, b])`` over the
        scaled sl_2 basis."""
        ctx = self.ctx
        q = ctx.ell ** self.s
        checks = [(bracket(self.x, self.y), self.h * q),
                  (bracket(self.h, self.x), self.x * (2 * q)),
                  (bracket(self.h, self.y), self.y * (-2 * q))]
        return min((a - b).min_valuation() for a, b in checks)

    def to_json(self) -> dict:
        return {"ell": self.ctx.ell, "N": self.ctx.N, "s": self.s, "n": self.n,
                "x": self.x.rows(), "h": self.h.rows(), "y": self.y.rows(),
                "domain": [d.rows() for d in self.domain],
                "images": [m.rows() for m in self.images]}

    @classmethod
    def from_json(cls, doc) -> "ApproxMorphism":
        ctx = PadicContext(int(doc["ell"]), int(doc["N"]))
        mk = lambda r: TracelessMat.of(Mat2.from_rows(r, ctx))  # noqa: E731
        phi = cls.from_sl2_images(ctx, int(doc["s"]), int(doc["n"]),
                                  mk(doc["x"]), mk(doc["h"]), mk(doc["y"]))
        if "domain" in doc and doc["domain"]:
            phi = cls(ctx, phi.s, phi.n, phi.x, phi.h, phi.y,
                      tuple(mk(r) for r in doc["domain"]),
                      tuple(mk(r) for r in doc["images"]))
        return phi


@dataclass(frozen=True)
class InnerCertificate:
    M: Mat2
    alpha: int
    certified_precision: int
    det_valuation_bound: int
    mu_plus: int
    s: int
    n: int
    trace_depth: int
    det_valuation: int = field(default=0)
    mu_plus_depth: int = field(default=0)

    def to_json(self) -> dict:
        return {"M": self.M.rows(), "alpha": self.alpha,
                "certified_precision": self.certified_precision,
                "det_valuation_bound": self.det_valuation_bound,
                "det_valuation": self.det_valuation,
                "mu_plus": self.mu_plus, "mu_plus_depth": self.mu_plus_depth,
                "trace_depth": self.trace_depth, "s": self.s, "n": self.n}


def alpha_of(phi: ApproxMorphism) -> int:
    """Least ``alpha`` with ``x`` and ``y`` both nonzero mod l^(alpha+1)."""
    N = phi.ctx.N
    vx, vy = phi.x.min_valuation(), phi.y.min_valuation()
    if vx >= N or vy >= N:
        raise Degenerate("x or y vanishes at working precision")
    return max(vx, vy)


def _depths(phi: ApproxMorphism, alpha: int):
    v, s, n = phi.ctx.v, phi.s, phi.n
    return (n - alpha - 6 * s - 4 * v - 6, n - alpha - 10 * s - 5 * v - 6,
            n - alpha - 2 * s - 4 * v)


def construct_inner_matrix(phi: ApproxMorphism, extra_precision: int | None = None
                           ) -> InnerCertificate:
    ctx = phi.ctx
    ell, N, v, s, n = ctx.ell, ctx.N, ctx.v, phi.s, phi.n
    alpha = alpha_of(phi)
    if n < alpha + 10 * s + 5 * v + 6:
        raise HypothesisFails(
            f"n={n} < alpha+10s+5v+6={alpha + 10 * s + 5 * v + 6}")
    if phi.bracket_defect() < min(n, N):
        raise HypothesisFails(
            f"brackets are respected only mod l^{phi.bracket_defect()}")
    inter_depth, trace_depth, mu_depth = _depths(phi, alpha)
    cert_prec = min(N, inter_depth)

    W = PadicContext(ell, 2 * N + 8 if extra_precision is None else N + extra_precision)
    h = Mat2(*phi.h.entries(), W)
    y = Mat2(*phi.y.entries(), W)
    q = ell ** s

    # (1)-(2): root of t^3 + 4 det(h) t near 2 l^s
    p = MonicPoly([0, 4 * h.det, 0, 1], W)
    try:
        lam = hensel_lift(p, W(2 * q)).residue
    except HypothesisFails as exc:
        raise HypothesisFails(f"no eigenvalue of C_h near 2 l^s: {exc}") from exc
    if ell == 2:
        if lam % 2:
            raise Falsified(f"lifted eigenvalue {lam} of C_h is odd")
        mu = lam // 2
    else:
        mu = lam * pow(2, -1, W.modulus) % W.modulus

    # (3): eigenvector from adj(h - mu)
    A = adjugate(h - Mat2.scalar(mu, W))
    cols = [(A.a, A.c), (A.b, A.d)]
    vals = [min(vp(e, ell, W.N) for e in col) for col in cols]
    m = min(vals)
    if m >= W.N - N:
        raise PrecisionExhausted("eigenvector of h is not resolved")
    col = cols[vals.index(m)]
    vplus = [e // ell ** m for e in col]
    unit_idx = 0 if vplus[0] % ell else 1
    u_inv = pow(vplus[unit_idx], -1, W.modulus)
    vplus = [e * u_inv % W.modulus for e in vplus]

    # (4)-(5)
    vminus = y.apply(vplus)
    Mt = [q * vplus[0], vminus[0], q * vplus[1], vminus[1]]
    delta = min(vp(e % W.modulus, ell, W.N) for e in Mt)
    M = Mat2(*(e // ell ** delta for e in Mt), ctx)

    if all(e % ell == 0 for e in M.entries()):
        raise Falsified(f"M={M.rows()} has no unit entry")
    det_val = vp(M.det, ell, N)
    if det_val > 4 * s + v:
        raise Falsified(f"val(det M)={det_val} exceeds 4s+v={4 * s + v}")
    for g, img in phi.pairs():
        if not (M * g).congruent(img * M, cert_prec):
            raise Falsified(
                f"M g != phi(g) M mod l^{cert_prec} for g={g.rows()}, M={M.rows()}")
    mu_n = mu % ctx.modulus
    return InnerCertificate(
        M=M, alpha=alpha, certified_precision=cert_prec,
        det_valuation_bound=4 * s + v, mu_plus=mu_n, s=s, n=n,
        trace_depth=min(N, trace_depth), det_valuation=det_val,
        mu_plus_depth=vp((mu_n - q) % ctx.modulus, ell, N))


def _trace_sq(m: Mat2) -> int:
    return (m * m).trace


def verify_trace_congruence(phi: ApproxMorphism, cert: InnerCertificate,
                            depth: int | None = None, samples: int = 20,
                            seed: int = 0) -> bool:
    """``tr(phi(g)^2) == tr(g^2)`` on the domain basis, their pairwise sums
    and ``samples`` random combinations."""
    ctx = phi.ctx
    d = cert.trace_depth if depth is None else min(depth, ctx.N)
    if d <= 0:
        return True
    q = ctx.ell ** d
    pairs = phi.pairs()
    tests = list(pairs)
    tests += [(a + b, c + e) for i, (a, c) in enumerate(pairs) for b, e in pairs[i + 1:]]
    rng = random.Random(seed)
    for _ in range(samples):
        cs = [rng.randrange(ctx.modulus) for _ in pairs]
        g = sum((a * c for (a, _), c in zip(pairs, cs)), Mat2.scalar(0, ctx))
        im = sum((b * c for (_, b), c in zip(pairs, cs)), Mat2.scalar(0, ctx))
        tests.append((g, im))
    return all((_trace_sq(im) - _trace_sq(g)) % q == 0 for g, im in tests)


def _graph_map(L: LieLattice, phi):
    ctx = L.ctx
    if phi is None:
        sb = special_basis(L)
        a, b = sb.a, sb.b

        def apply(l1):
            c = solve_in_span(a, l1, ctx)
            if c is None:
                raise Falsified(f"{l1} is not in the first-block projection")
            return tuple(sum(ci * bi[j] for ci, bi in zip(c, b)) % ctx.modulus
                         for j in range(3))
        return apply
    if callable(phi):
        return phi
    A = [list(r) for r in phi]
    return lambda l1: tuple(sum(A[i][j] * l1[j] for j in range(3)) % ctx.modulus
                            for i in range(3))


def graph_defect(L: LieLattice, t: int, phi=None) -> bool:
    """Whether every basis vector ``(l1, l2)`` of ``L`` has
    ``l2 == phi(l1) mod l^t``.

    ``phi`` is a callable on ``(x, h, y)`` coordinates, a 3x3 coordinate
    matrix, or ``None`` for the map ``a_i -> b_i`` of the special basis.
    """
    if L.n != 2:
        raise ValueError("graph_defect needs a two-block lattice")
    ctx = L.ctx
    q = ctx.ell ** min(t, ctx.N)
    f = _graph_map(L, phi)
    for r in L.basis:
        img = f(r[:3])
        if any((r[3 + j] - img[j]) % q for j in range(3)):
            return False
    return True


def graph_defect_depth(L: LieLattice, phi=None) -> int:
    """Largest ``t <= N`` for which :func:`graph_defect` holds."""
    ctx = L.ctx
    f = _graph_map(L, phi)
    depth = ctx.N
    for r in L.basis:
        img = f(r[:3])
        for j in range(3):
            depth = min(depth, vp((r[3 + j] - img[j]) % ctx.modulus, ctx.ell, ctx.N))
    return depth


def scalar_match(g1: Mat2, g2: Mat2, cert: InnerCertificate, T: int) -> bool:
    """Whether ``lambda_1 == lambda_2`` and ``g2 M == M g1`` mod l^(T-2v)."""
    ctx = g1.ctx
    ell, N, mod, v = ctx.ell, ctx.N, ctx.modulus, ctx.v
    if g1.det != g2.det:
        raise PreconditionError("det g1 != det g2")
    d = ctx(g1.det)
    if not is_square_unit(d):
        raise NonSquareDet(f"det={g1.det} is not a square unit")
    if ell == 2:
        ident = Mat2.identity(ctx)
        if not (g1.congruent(ident, 2) and g2.congruent(ident, 2)):
            raise PreconditionError("l = 2 needs g_i == Id mod 4")
        if g1.det % 8 != 1:
            raise PreconditionError("l = 2 needs det == 1 mod 8")
    r = sqrt_unit(d).residue
    r_inv = pow(r, -1, mod)
    lams = []
    for g in (g1, g2):
        gp = g * r_inv
        if ell == 2:
            if gp.trace % 8 != 2:
                raise BranchAmbiguity(f"tr(g')={gp.trace} is not 2 mod 8")
            l = theta(gp)
            lam = sqrt_one_plus(ctx(l.a * l.a + l.b * l.c)).residue
            if (lam - (gp.trace // 2)) % 2 ** (N - 1):
                raise Falsified(f"series root {lam} disagrees with tr(g')/2")
        else:
            lam = gp.trace * pow(2, -1, mod) % mod
            l = theta(gp)
            if l.is_zero_mod(1):
                root = sqrt_one_plus(ctx(l.a * l.a + l.b * l.c)).residue
                if lam not in (root, (-root) % mod):
                    raise Falsified(f"lambda={lam} is not +-sqrt(1 + tr(l^2)/2)")
        lams.append((lam, gp))
    if ell != 2:
        (_, gp1), (_, gp2) = lams
        scalar1 = gp1.b % ell == 0 and gp1.c % ell == 0 and (gp1.a - gp1.d) % ell == 0
        scalar2 = gp2.b % ell == 0 and gp2.c % ell == 0 and (gp2.a - gp2.d) % ell == 0
        if scalar1 and scalar2 and not g1.congruent(g2, 1):
            raise PreconditionError("g1, g2 are scalar mod l with different reductions")
    depth = min(N, T - 2 * v)
    if depth <= 0:
        return True
    q = ell ** depth
    M = cert.M
    return (lams[0][0] - lams[1][0]) % q == 0 and (g2 * M).congruent(M * g1, depth)
