"""Finite quotients of SL_2(Z_l)^n: congruence balls, subgroup closure and
the pairwise (Goursat-type) ball predictions.

Everything here is checked at a finite level ``l^N`` only.  The Goursat
prediction itself is imported as a statement and tested on examples; no
proof is reproduced.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

from .bounds import BigLogNumber, goursat_index_bound as _goursat_bound
from .errors import SideConditionViolated, SizeCapExceeded
from .matrices import Mat2
from .padic import PadicContext

DEFAULT_CAP = 10 ** 7


def ball_index(ell: int, s: int) -> int:
    """Index of the level-``s`` ball in SL_2(Z_l)."""
    if s < 0:
        raise ValueError("s must be >= 0")
    if s == 0:
        return 1
    return (ell * ell - 1) * ell ** (3 * s - 2)


def sl2_order(ell: int, N: int) -> int:
    return ell ** (3 * N - 2) * (ell * ell - 1)


def _as_block(m, mod):
    if isinstance(m, Mat2):
        return tuple(m.entries())
    if len(m) == 4:
        return tuple(int(e) % mod for e in m)
    (a, b), (c, d) = m
    return (a % mod, b % mod, c % mod, d % mod)


def _mul_blocks(A, B, mod):
    """Blockwise product of ``(F, n, 4)`` arrays (``B`` may broadcast)."""
    a, b, c, d = A[..., 0], A[..., 1], A[..., 2], A[..., 3]
    e, f, g, h = B[..., 0], B[..., 1], B[..., 2], B[..., 3]
    return np.stack([(a * e + b * g) % mod, (a * f + b * h) % mod,
                     (c * e + d * g) % mod, (c * f + d * h) % mod], axis=-1)


class FiniteMatrixGroup:
    """Subgroup of GL_2(Z/l^N)^n generated by ``generators``, enumerated.

    Elements are encoded as integers in base ``l^N`` (one digit per entry)
    and kept sorted, so the element list is independent of generator order.
    """

    def __init__(self, generators, ell: int, N: int, n: int, cap: int = DEFAULT_CAP):
        self.ell, self.N, self.n = ell, N, n
        self.ctx = PadicContext(ell, N)
        mod = self.ctx.modulus
        self.generators = tuple(tuple(_as_block(m, mod) for m in g) for g in generators)
        for g in self.generators:
            if len(g) != n:
                raise ValueError(f"generator with {len(g)} blocks, expected {n}")
        self.gl_type = any((a * d - b * c) % mod != 1
                           for g in self.generators for a, b, c, d in g)
        self.cap = cap
        self._use_np = mod ** (4 * n) < 2 ** 62
        self._keys = self._closure()

    # encoding -----------------------------------------------------------
    def _encode(self, arr):
        mod = self.ctx.modulus
        flat = arr.reshape(arr.shape[0], -1)
        keys = np.zeros(flat.shape[0], dtype=np.int64)
        for col in range(flat.shape[1]):
            keys = keys * mod + flat[:, col]
        return keys

    def _decode(self, keys):
        mod = self.ctx.modulus
        width = 4 * self.n
        out = np.empty((len(keys), width), dtype=np.int64)
        k = np.array(keys, dtype=np.int64)
        for col in range(width - 1, -1, -1):
            out[:, col] = k % mod
            k = k // mod
        return out.reshape(-1, self.n, 4)

    def _identity(self):
        return tuple((1, 0, 0, 1) for _ in range(self.n))

    def _closure(self):
        mod = self.ctx.modulus
        if self._use_np:
            ident = np.array([self._identity()], dtype=np.int64)
            seen = self._encode(ident)
            frontier = seen
            gens = [np.array(g, dtype=np.int64) for g in self.generators]
            while frontier.size and gens:
                A = self._decode(frontier)
                cand = np.unique(np.concatenate(
                    [self._encode(_mul_blocks(A, g[None, ...], mod)) for g in gens]))
                new = cand[~np.isin(cand, seen, assume_unique=True)]
                seen = np.union1d(seen, new)
                if seen.size > self.cap:
                    raise SizeCapExceeded(f"closure exceeds {self.cap} elements")
                frontier = new
            return seen
        seen = {self._identity()}
        frontier = [self._identity()]
        while frontier:
            nxt = []
            for x in frontier:
                for g in self.generators:
                    y = tuple(tuple(int(e) for e in _mul_blocks(
                        np.array(xb, dtype=object), np.array(gb, dtype=object), mod))
                        for xb, gb in zip(x, g))
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            if len(seen) > self.cap:
                raise SizeCapExceeded(f"closure exceeds {self.cap} elements")
            frontier = nxt
        return sorted(seen)

    # queries ------------------------------------------------------------
    @property
    def order(self) -> int:
        return len(self._keys)

    def __len__(self):
        return self.order

    def element_array(self):
        """All elements as an ``(order, n, 4)`` array of entries."""
        if self._use_np:
            return self._decode(self._keys)
        return np.array(self._keys, dtype=object)

    def elements(self):
        return [tuple(Mat2(*blk, self.ctx) for blk in el)
                for el in self.element_array().tolist()]

    def contains(self, element) -> bool:
        mod = self.ctx.modulus
        el = tuple(_as_block(m, mod) for m in element)
        if self._use_np:
            key = self._encode(np.array([el], dtype=np.int64))[0]
            i = np.searchsorted(self._keys, key)
            return bool(i < len(self._keys) and self._keys[i] == key)
        return el in set(self._keys)

    __contains__ = contains

    def projection(self, blocks) -> "FiniteMatrixGroup":
        gens = [tuple(g[i] for i in blocks) for g in self.generators]
        return FiniteMatrixGroup(gens, self.ell, self.N, len(blocks), self.cap)

    def to_json(self) -> dict:
        return {"ell": self.ell, "N": self.N, "n": self.n,
                "generators": [[[[a, b], [c, d]] for a, b, c, d in g]
                               for g in self.generators]}

    @classmethod
    def from_json(cls, doc, cap: int = DEFAULT_CAP) -> "FiniteMatrixGroup":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls(doc["generators"], int(doc["ell"]), int(doc["N"]), int(doc["n"]), cap)


def subgroup_closure(generators, ell: int, N: int, n: int,
                     cap: int = DEFAULT_CAP) -> FiniteMatrixGroup:
    return FiniteMatrixGroup(generators, ell, N, n, cap)


@dataclass(frozen=True)
class BallSpec:
    ell: int
    exponents: tuple


def ball_generators(ctx: PadicContext, s: int) -> list[Mat2]:
    """Generators of the level-``s`` ball modulo l^N.

    ``s = 0`` gives the two elementary unipotents (they generate SL_2);
    ``s >= 1`` adds the diagonal ``diag(1 + l^s, (1 + l^s)^-1)``, and
    ``-Id`` when ``l = 2, s = 1``.
    """
    mod = ctx.modulus
    q = ctx.ell ** s
    gens = [Mat2(1, q, 0, 1, ctx), Mat2(1, 0, q, 1, ctx)]
    if s >= 1:
        u = 1 + q
        gens.append(Mat2(u, 0, 0, pow(u, -1, mod), ctx))
        if ctx.ell == 2 and s == 1:
            gens.append(Mat2(-1, 0, 0, -1, ctx))
    return gens


def _placed(m: Mat2, i: int, n: int):
    ident = (1, 0, 0, 1)
    return tuple(m.entries() if j == i else ident for j in range(n))


def product_ball_generators(ctx: PadicContext, exponents):
    n = len(exponents)
    return [_placed(g, i, n) for i, k in enumerate(exponents)
            if k < ctx.N for g in ball_generators(ctx, k)]


def contains_ball(G: FiniteMatrixGroup, spec) -> bool:
    """Whether ``G`` contains the product ball with the given exponents.

    Exponents ``>= N`` describe the trivial group mod l^N and are always
    contained.
    """
    exps = spec.exponents if isinstance(spec, BallSpec) else tuple(spec)
    if len(exps) != G.n:
        raise ValueError("one exponent per block is required")
    return all(G.contains(g) for g in product_ball_generators(G.ctx, exps))


def side_minimum(ell: int) -> int:
    return 2 if ell == 2 else (1 if ell == 3 else 0)


def pair_exponent(G: FiniteMatrixGroup, i: int, j: int) -> int:
    """Least ``s`` (at or above the side condition) with the (i, j)
    projection containing the ball ``B(s, s)``; ``N`` if none below N."""
    P = G.projection((i, j))
    for s in range(side_minimum(G.ell), G.N):
        if contains_ball(P, (s, s)):
            return s
    return G.N


def pairwise_exponents(G: FiniteMatrixGroup):
    n = G.n
    S = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            S[i][j] = S[j][i] = pair_exponent(G, i, j)
    return S


def goursat_exponents(s_matrix, ell: int, n: int | None = None) -> list[int]:
    """``sum_{j != i} s_ij + (n - 2) v`` for each ``i``."""
    n = len(s_matrix) if n is None else n
    v = 1 if ell == 2 else 0
    lo = side_minimum(ell)
    for i in range(n):
        if s_matrix[i][i] != 0:
            raise ValueError("diagonal of the s-matrix must be zero")
        for j in range(n):
            if s_matrix[i][j] != s_matrix[j][i]:
                raise ValueError("s-matrix must be symmetric")
            if i != j and s_matrix[i][j] < lo:
                raise SideConditionViolated(
                    f"s_{i + 1}{j + 1}={s_matrix[i][j]} < {lo} at l={ell}")
    return [sum(s_matrix[i][j] for j in range(n) if j != i) + (n - 2) * v
            for i in range(n)]


def goursat_index_bound(c: int, n: int) -> BigLogNumber:
    return _goursat_bound(c, n)


def enumerate_sl2(ell: int, N: int) -> np.ndarray:
    """Brute force: every ``(a, b, c, d)`` mod l^N with ``ad - bc = 1``."""
    mod = ell ** N
    r = np.arange(mod, dtype=np.int64)
    a, b, c, d = np.meshgrid(r, r, r, r, indexing="ij")
    mask = (a * d - b * c) % mod == 1
    return np.stack([a[mask], b[mask], c[mask], d[mask]], axis=-1)


def enumerate_ball(ell: int, N: int, s: int) -> np.ndarray:
    """Brute force: elements of SL_2(Z/l^N) congruent to Id mod l^s."""
    els = enumerate_sl2(ell, N)
    q = ell ** s
    ident = np.array([1, 0, 0, 1])
    return els[np.all((els - ident) % q == 0, axis=1)]


def twisted_diagonal(base_gens, conjugators, ell: int, N: int):
    """Generators of ``{(M_1 g M_1^-1, M_2 g M_2^-1, ...)}``."""
    ctx = PadicContext(ell, N)
    out = []
    for g in base_gens:
        g = g if isinstance(g, Mat2) else Mat2.from_rows(g, ctx)
        row = []
        for conj in conjugators:
            inv = Mat2(conj.d, -conj.b, -conj.c, conj.a, ctx) * pow(conj.det, -1, ctx.modulus)
            row.append((conj * g * inv).entries())
        out.append(tuple(row))
    return out


def all_pairs(n):
    return [(i, j) for i, j in product(range(n), repeat=2) if i < j]
