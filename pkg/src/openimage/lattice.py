"""Submodules of (Z/l^N)^m in Howell form, and Lie lattices in sl_2^n.

A lattice is stored as the Howell form of its generators: rows with
strictly increasing pivot columns, each pivot a power of l, entries above a
pivot ``l^k`` reduced into ``[0, l^k)``, and the Howell property (every
member whose first ``j`` coordinates vanish is a combination of the rows
with pivot ``>= j``).  Over the chain ring Z/l^N this form is unique, so
membership is decided by plain reduction and lattices compare by basis.

Vectors in ``sl_2^n`` are flat tuples of ``3n`` ints, blockwise in the
``(x, h, y)`` basis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateProjection, Falsified, HypothesisFails,
                     OddTrace, PrecisionExhausted, SpanTooSmall)
from .matrices import Mat2, TracelessMat, adjugate
from .padic import PadicContext, vp

# numpy reduction is exact while products of two residues fit in int64
_NP_LIMIT = 3_037_000_499


def _pivot(row, mod):
    for i, e in enumerate(row):
        if e % mod:
            return i
    return None


def howell_form(rows, ell: int, N: int, width: int | None = None,
                track: int = 0):
    """Howell form of ``rows`` over Z/l^N.

    Only the first ``width`` columns are eliminated; any trailing columns
    are carried along (used to track coefficients, see :func:`solve_in_span`).
    Returns a list of rows as lists of ints.
    """
    mod = ell ** N
    work = [[e % mod for e in r] for r in rows]
    if width is None:
        width = len(work[0]) if work else 0
    work = [r for r in work if any(r[:width])]
    basis, pivots = [], []
    for col in range(width):
        cand = [r for r in work if r[col]]
        if not cand:
            continue
        piv = min(cand, key=lambda r: vp(r[col], ell, N))
        k = vp(piv[col], ell, N)
        u_inv = pow(piv[col] // ell ** k, -1, mod)
        piv_n = [e * u_inv % mod for e in piv]
        q = ell ** k
        rest = []
        skipped = False
        for r in work:
            if r is piv and not skipped:
                skipped = True
                continue
            c = r[col] // q
            nr = [(a - c * b) % mod for a, b in zip(r, piv_n)]
            if any(nr[:width]):
                rest.append(nr)
        if k:
            extra = [e * ell ** (N - k) % mod for e in piv_n]
            if any(extra[:width]):
                rest.append(extra)
        basis.append(piv_n)
        pivots.append((col, q))
        work = rest
    # reduce entries above each pivot, left to right
    for j, (col, q) in enumerate(pivots):
        for i in range(j):
            c = basis[i][col] // q
            if c:
                basis[i] = [(a - c * b) % mod for a, b in zip(basis[i], basis[j])]
    return basis


def _reduce_vec(vec, basis, pivots, mod):
    v = [e % mod for e in vec]
    for row, (col, q) in zip(basis, pivots):
        c = v[col] // q
        if c:
            v = [(a - c * b) % mod for a, b in zip(v, row)]
    return v


def _reduce_array(arr, basis, pivots, mod):
    """Vectorised :func:`_reduce_vec` on an int64 array of row vectors."""
    arr = arr % mod
    for row, (col, q) in zip(basis, pivots):
        c = arr[:, col] // q
        arr = (arr - c[:, None] * np.asarray(row, dtype=np.int64)) % mod
    return arr


class ZModule:
    """Submodule of (Z/l^N)^dim given by generators, kept in Howell form."""

    def __init__(self, ctx: PadicContext, dim: int, generators=(), basis=None):
        self.ctx = ctx
        self.dim = dim
        mod = ctx.modulus
        self.generators = tuple(tuple(int(e) % mod for e in g) for g in generators)
        for g in self.generators:
            if len(g) != dim:
                raise ValueError(f"vector of length {len(g)} in dimension {dim}")
        if basis is None:
            basis = howell_form(self.generators, ctx.ell, ctx.N, dim)
        self.basis = tuple(tuple(r) for r in basis)
        self.pivots = tuple((_pivot(r, mod), ctx.ell ** vp(r[_pivot(r, mod)], ctx.ell, ctx.N))
                            for r in self.basis)

    def _new(self, generators, basis=None):
        return type(self)(self.ctx, self.dim, generators, basis)

    @property
    def rank(self) -> int:
        """Number of Howell rows with a unit pivot (free rank)."""
        return sum(1 for _, q in self.pivots if q == 1)

    @property
    def pivot_valuations(self):
        return [(c, vp(q, self.ctx.ell, self.ctx.N)) for c, q in self.pivots]

    def reduce(self, vec):
        return tuple(_reduce_vec(vec, self.basis, self.pivots, self.ctx.modulus))

    def contains(self, vec) -> bool:
        return not any(self.reduce(vec))

    __contains__ = contains

    def contains_module(self, other: "ZModule") -> bool:
        return all(self.contains(b) for b in other.basis)

    def is_zero(self) -> bool:
        return not self.basis

    def __eq__(self, other):
        if not isinstance(other, ZModule):
            return NotImplemented
        return (self.ctx == other.ctx and self.dim == other.dim
                and self.basis == other.basis)

    def __hash__(self):
        return hash((self.ctx.ell, self.ctx.N, self.dim, self.basis))

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, basis={list(self.basis)})"

    def add(self, vectors):
        """Module generated by this one and ``vectors``."""
        gens = list(self.generators) + [tuple(v) for v in vectors]
        return self._new(gens, howell_form(list(self.basis) + [list(v) for v in vectors],
                                           self.ctx.ell, self.ctx.N, self.dim))

    def add_many(self, vectors, chunk: int = 65536):
        """Like :meth:`add` for a large batch; reduces with numpy when possible.

        The stored generators become the Howell basis of the result.
        """
        ctx = self.ctx
        mod, ell, N = ctx.modulus, ctx.ell, ctx.N
        basis = [list(r) for r in self.basis]
        pivots = list(self.pivots)

        def absorb(v):
            nonlocal basis, pivots
            basis = howell_form(basis + [list(v)], ell, N, self.dim)
            tmp = ZModule(ctx, self.dim, basis=basis)
            pivots = list(tmp.pivots)

        if mod <= _NP_LIMIT:
            arr_all = np.asarray(vectors, dtype=np.int64).reshape(-1, self.dim)
            for start in range(0, len(arr_all), chunk):
                arr = _reduce_array(arr_all[start:start + chunk], basis, pivots, mod)
                arr = arr[arr.any(axis=1)]
                while len(arr):
                    absorb([int(e) for e in arr[0]])
                    arr = _reduce_array(arr[1:], basis, pivots, mod)
                    arr = arr[arr.any(axis=1)]
        else:
            for v in vectors:
                r = _reduce_vec(v, basis, pivots, mod)
                if any(r):
                    absorb(r)
        return self._new(basis, basis)

    def to_json(self) -> dict:
        return {"ell": self.ctx.ell, "N": self.ctx.N, "dim": self.dim,
                "generators": [list(g) for g in self.generators],
                "basis": [list(b) for b in self.basis]}


class LieLattice(ZModule):
    """Z/l^N-submodule of ``sl_2^n`` (dimension ``3n``)."""

    def __init__(self, ctx, dim, generators=(), basis=None):
        if dim % 3 or dim == 0:
            raise ValueError("a Lie lattice needs dimension 3n with n >= 1")
        super().__init__(ctx, dim, generators, basis)
        self.n = dim // 3

    def to_json(self) -> dict:
        return {"ell": self.ctx.ell, "N": self.ctx.N, "n": self.n,
                "generators": [list(g) for g in self.generators]}

    @classmethod
    def from_json(cls, doc) -> "LieLattice":
        if isinstance(doc, str):
            doc = json.loads(doc)
        ctx = PadicContext(int(doc["ell"]), int(doc["N"]))
        return cls(ctx, 3 * int(doc["n"]), doc.get("generators", []))

    def block(self, vec, i):
        return tuple(vec[3 * i:3 * i + 3])

    def is_bracket_closed(self) -> bool:
        return all(self.contains(lie_bracket(u, w, self.ctx))
                   for a, u in enumerate(self.basis) for w in self.basis[a + 1:])


def span(generators, ctx: PadicContext, dim: int | None = None) -> ZModule:
    """Module spanned by ``generators``; a :class:`LieLattice` when the
    dimension is a multiple of 3."""
    generators = [tuple(g) for g in generators]
    if dim is None:
        if not generators:
            raise ValueError("dimension is required for an empty generator list")
        dim = len(generators[0])
    cls = LieLattice if dim % 3 == 0 else ZModule
    return cls(ctx, dim, generators)


def zero_lattice(ctx, n: int) -> LieLattice:
    return LieLattice(ctx, 3 * n)


def scaled_sl2(ctx, k: int, n: int = 1, block: int = 0) -> LieLattice:
    """``l^k sl_2`` placed in one block of ``sl_2^n``."""
    q = ctx.ell ** k
    gens = []
    for j in range(3):
        v = [0] * (3 * n)
        v[3 * block + j] = q
        gens.append(v)
    return LieLattice(ctx, 3 * n, gens)


def lie_bracket(u, w, ctx: PadicContext):
    """Blockwise commutator of two vectors in ``(x, h, y)`` coordinates."""
    mod = ctx.modulus
    out = []
    for i in range(0, len(u), 3):
        x1, h1, y1 = u[i:i + 3]
        x2, h2, y2 = w[i:i + 3]
        out += [2 * (h1 * x2 - x1 * h2) % mod, (x1 * y2 - y1 * x2) % mod,
                2 * (y1 * h2 - h1 * y2) % mod]
    return tuple(out)


def theta_coords(blocks, ctx: PadicContext) -> np.ndarray:
    """Theta applied blockwise to an ``(M, n, 4)`` array of entries.

    Returns an ``(M, 3n)`` object or int64 array of ``(x, h, y)`` coordinates.
    """
    ell, mod = ctx.ell, ctx.modulus
    arr = np.asarray(blocks, dtype=object if mod > _NP_LIMIT else np.int64)
    a, b, c, d = arr[..., 0], arr[..., 1], arr[..., 2], arr[..., 3]
    if ell == 2:
        if np.any(a % 2 != 1) or np.any(d % 2 != 1) or np.any(b % 2) or np.any(c % 2):
            raise OddTrace("theta at l = 2 needs every block == Id mod 2")
        t = ((a + d) % mod) // 2
    else:
        t = (a + d) * pow(2, -1, mod) % mod
    h = (a - t) % mod
    out = np.stack([b % mod, h, c % mod], axis=-1)
    return out.reshape(out.shape[0], -1)


def lie_algebra_of_group(G) -> LieLattice:
    """Span of Theta over every element of the enumerated group ``G``.

    For l = 2 the h-coordinates are canonical representatives and only
    meaningful modulo 2^(N-1).
    """
    ctx = PadicContext(G.ell, G.N)
    coords = theta_coords(G.element_array(), ctx)
    return zero_lattice(ctx, G.n).add_many(coords.tolist() if coords.dtype == object
                                           else coords)


def contains_scaled_sl2(L: LieLattice, k: int, block: int = 0) -> bool:
    """Whether ``l^k sl_2`` (in ``block``) lies in ``L``; ``k >= N`` is rejected."""
    if k >= L.ctx.N:
        raise PrecisionExhausted(f"l^{k} sl_2 is zero at precision N={L.ctx.N}")
    return L.contains_module(scaled_sl2(L.ctx, k, L.n, block))


def sl2_containment_exponent(L: LieLattice, block: int = 0) -> int | None:
    """Least ``k < N`` with ``l^k sl_2 <= L`` in ``block``, else ``None``."""
    for k in range(L.ctx.N):
        if contains_scaled_sl2(L, k, block):
            return k
    return None


def kernel_component(L: LieLattice) -> LieLattice:
    """``{v : (0, v) in L}`` on the remaining ``n - 1`` blocks."""
    if L.n < 2:
        raise ValueError("kernel_component needs at least two blocks")
    rows = [r[3:] for r, (c, _) in zip(L.basis, L.pivots) if c >= 3]
    return LieLattice(L.ctx, L.dim - 3, rows, basis=rows)


def first_projection(L: LieLattice) -> LieLattice:
    rows = [r[:3] for r, (c, _) in zip(L.basis, L.pivots) if c < 3]
    return LieLattice(L.ctx, 3, rows, basis=rows)


@dataclass(frozen=True)
class SpecialBasis:
    """Basis ``(a_i, b_i)``, ``(0, y_j)`` of a lattice in ``sl_2^2``."""

    pairs: tuple
    kernel: tuple
    n1: int
    ctx: PadicContext = field(repr=False)

    @property
    def a(self):
        return [p[0] for p in self.pairs]

    @property
    def b(self):
        return [p[1] for p in self.pairs]

    @property
    def kernel_valuation(self) -> int:
        """Least valuation among the kernel coordinates (N if all vanish)."""
        ctx = self.ctx
        return min((vp(e, ctx.ell, ctx.N) for y in self.kernel for e in y),
                   default=ctx.N)

    def to_json(self) -> dict:
        return {"a": [list(x) for x in self.a], "b": [list(x) for x in self.b],
                "y": [list(y) for y in self.kernel], "n1": self.n1,
                "kernel_valuation": self.kernel_valuation}


def special_basis(L: LieLattice) -> SpecialBasis:
    if L.n != 2:
        raise ValueError("special_basis is defined for two blocks")
    top = [r for r, (c, _) in zip(L.basis, L.pivots) if c < 3]
    if len(top) < 3:
        raise DegenerateProjection(
            f"first-block projection has rank {len(top)} < 3")
    n1 = sl2_containment_exponent(first_projection(L))
    if n1 is None:
        raise DegenerateProjection("first-block projection contains no l^k sl_2 with k < N")
    ys = [r[3:] for r, (c, _) in zip(L.basis, L.pivots) if c >= 3]
    ys += [(0, 0, 0)] * (3 - len(ys))
    return SpecialBasis(tuple((tuple(r[:3]), tuple(r[3:])) for r in top),
                        tuple(tuple(y) for y in ys), n1, L.ctx)


def ball_topological_generators(ctx: PadicContext, s: int) -> list[Mat2]:
    """``Id + l^s e12``, ``Id + l^s e21`` and ``diag(1 + l^s, (1 + l^s)^-1)``."""
    q = ctx.ell ** s
    u = 1 + q
    return [Mat2(1, q, 0, 1, ctx), Mat2(1, 0, q, 1, ctx),
            Mat2(u, 0, 0, pow(u, -1, ctx.modulus), ctx)]


def conjugate_coords(g: Mat2, v, ctx):
    """Coordinates of ``g w g^-1`` for ``w`` with coordinates ``v`` (det g = 1)."""
    w = Mat2.from_coords(v, ctx)
    return (g * w * adjugate(g)).coords()


def conjugation_closure(W: LieLattice, s: int, with_brackets: bool = False) -> LieLattice:
    """Smallest lattice containing ``W`` and stable under conjugation by the
    topological generators of the level-``s`` ball (and brackets, if asked)."""
    if W.n != 1:
        raise ValueError("conjugation_closure works on a single block")
    ctx = W.ctx
    gens = ball_topological_generators(ctx, s)
    cur = W
    while True:
        new = [conjugate_coords(g, b, ctx) for g in gens for b in cur.basis]
        if with_brackets:
            new += [lie_bracket(u, w, ctx) for u in cur.basis for w in cur.basis]
        nxt = cur.add(new)
        if nxt == cur:
            return cur
        cur = nxt


def is_conjugation_stable(W: LieLattice, s: int) -> bool:
    ctx = W.ctx
    return all(W.contains(conjugate_coords(g, b, ctx))
               for g in ball_topological_generators(ctx, s) for b in W.basis)


def conj_stable_gain(W: LieLattice, s: int, t: int) -> bool:
    """Whether ``W`` contains ``l^(t+4s+4v) sl_2``.

    ``W`` must be nonzero mod l^(t+1) and stable under the level-``s`` ball;
    the expected answer is always ``True``.
    """
    ctx = W.ctx
    v = ctx.v
    if W.n != 1:
        raise ValueError("W must be a single-block lattice")
    if s < (2 if ctx.ell == 2 else 1):
        raise HypothesisFails(f"s={s} too small for l={ctx.ell}")
    if t + 4 * s + 4 * v >= ctx.N:
        raise PrecisionExhausted(f"t+4s+4v={t + 4 * s + 4 * v} >= N={ctx.N}")
    q = ctx.ell ** (t + 1)
    if all(e % q == 0 for r in W.basis for e in r):
        raise HypothesisFails(f"W vanishes modulo l^{t + 1}")
    if not is_conjugation_stable(W, s):
        raise HypothesisFails("W is not stable under conjugation by the ball")
    return contains_scaled_sl2(W, t + 4 * s + 4 * v)


def solve_in_span(generators, target, ctx: PadicContext):
    """Coefficients ``c`` with ``sum c_j generators[j] == target`` mod l^N,
    or ``None`` when ``target`` is not in the span."""
    r = len(generators)
    if r == 0:
        return None if any(e % ctx.modulus for e in target) else []
    m = len(target)
    aug = [list(g) + [1 if i == j else 0 for j in range(r)]
           for i, g in enumerate(generators)]
    H = howell_form(aug, ctx.ell, ctx.N, width=m)
    mod = ctx.modulus
    v = [e % mod for e in target] + [0] * r
    for row in H:
        col = _pivot(row[:m], mod)
        q = ctx.ell ** vp(row[col], ctx.ell, ctx.N)
        if v[col] % q:
            return None
        c = v[col] // q
        v = [(a - c * b) % mod for a, b in zip(v, row)]
    if any(v[:m]):
        return None
    return [(-e) % mod for e in v[m:]]


def _matmul(A, B, mod):
    return [[sum(A[i][t] * B[t][j] for t in range(len(B))) % mod
             for j in range(len(B[0]))] for i in range(len(A))]


def mat_inv_mod(A, ell: int, N: int):
    """Inverse of a square matrix invertible over Z/l^N (Gauss-Jordan)."""
    mod = ell ** N
    k = len(A)
    M = [[A[i][j] % mod for j in range(k)] + [int(i == j) for j in range(k)]
         for i in range(k)]
    for col in range(k):
        piv = next((i for i in range(col, k) if M[i][col] % ell), None)
        if piv is None:
            raise ValueError("matrix is not invertible mod l")
        M[col], M[piv] = M[piv], M[col]
        inv = pow(M[col][col], -1, mod)
        M[col] = [e * inv % mod for e in M[col]]
        for i in range(k):
            if i != col and M[i][col]:
                c = M[i][col]
                M[i] = [(a - c * b) % mod for a, b in zip(M[i], M[col])]
    return [row[k:] for row in M]


def solve_T(b_vectors, y_vectors, n: int, ctx: PadicContext):
    """Endomorphism ``T`` with ``T b_i = l^n e_i``.

    Hypotheses: every ``y_i`` vanishes mod l^(n+1) and the span of the b's
    and y's contains ``l^n`` times the standard basis.  ``T`` is assembled
    as ``Bt (Id - l (Y / l^(n+1)) Yt)^-1`` from a solution of
    ``B Bt + Y Yt = l^n Id``.
    """
    ell, N, mod = ctx.ell, ctx.N, ctx.modulus
    k = len(b_vectors)
    if n >= N:
        raise PrecisionExhausted(f"n={n} >= N={N}")
    bs = [[int(e) % mod for e in b] for b in b_vectors]
    ys = [[int(e) % mod for e in y] for y in y_vectors]
    if any(len(b) != k for b in bs) or any(len(y) != k for y in ys):
        raise ValueError("expected k vectors of length k")
    ys += [[0] * k] * (k - len(ys))
    q1 = ell ** (n + 1)
    if any(e % q1 for y in ys for e in y):
        raise HypothesisFails(f"some y_i is nonzero mod l^{n + 1}")
    gens = bs + ys
    Bt = [[0] * k for _ in range(k)]
    Yt = [[0] * k for _ in range(k)]
    for i in range(k):
        target = [ell ** n if j == i else 0 for j in range(k)]
        c = solve_in_span(gens, target, ctx)
        if c is None:
            raise SpanTooSmall(f"l^{n} e_{i + 1} is not in the span")
        for j in range(k):
            Bt[j][i] = c[j]
            Yt[j][i] = c[k + j]
    # Y has the y's as columns
    Ysc = [[ys[j][i] // q1 for j in range(k)] for i in range(k)]
    YYt = _matmul(Ysc, Yt, mod)
    inner = [[(int(i == j) - ell * YYt[i][j]) % mod for j in range(k)]
             for i in range(k)]
    T = _matmul(Bt, mat_inv_mod(inner, ell, N), mod)
    qn = ell ** n
    for i, b in enumerate(bs):
        tb = [sum(T[r][j] * b[j] for j in range(k)) % mod for r in range(k)]
        if tb != [qn % mod if r == i else 0 for r in range(k)]:
            raise Falsified(f"T b_{i + 1} = {tb} differs from l^{n} e_{i + 1}")
    return T


def basis_congruence_bound(b_vectors, lambdas, n2: int, n: int,
                           ctx: PadicContext) -> bool:
    """Check that ``sum lambda_i b_i == 0 mod l^(n2+n)`` forces every
    ``lambda_i == 0 mod l^n`` (the b's must span ``l^n2`` times everything)."""
    ell, mod = ctx.ell, ctx.modulus
    if n2 + n > ctx.N:
        raise PrecisionExhausted(f"n2+n={n2 + n} > N={ctx.N}")
    k = len(b_vectors)
    lam = [int(x) % mod for x in lambdas]
    combo = [sum(lam[i] * b_vectors[i][j] for i in range(k)) % mod for j in range(k)]
    q = ell ** (n2 + n)
    if any(e % q for e in combo):
        raise HypothesisFails(f"the combination is nonzero mod l^{n2 + n}")
    T = solve_T(b_vectors, [], n2, ctx)
    image = [sum(T[r][j] * combo[j] for j in range(k)) % mod for r in range(k)]
    # T(sum lambda_i b_i) = l^n2 lambda
    if any(e % q for e in image):
        raise Falsified("T maps the combination outside l^(n2+n)")
    ok = all(vp(x, ell, ctx.N) >= n for x in lam)
    if not ok:
        raise Falsified(f"lambda={lam} not all divisible by l^{n}")
    return True
