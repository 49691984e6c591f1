"""2x2 matrix algebra over Z/l^N and the approximate-eigenvalue lemmas.

Coordinates on sl_2 are always taken in the basis ``(x, h, y)`` with
``x = e12``, ``h = diag(1, -1)``, ``y = e21``; a traceless matrix
``[[a, b], [c, -a]]`` has coordinates ``(b, a, c)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import Falsified, HypothesisFails, OddTrace, PrecisionExhausted
from .padic import MonicPoly, PadicContext, PadicInt, hensel_lift, vp


def _int(x) -> int:
    return x.residue if isinstance(x, PadicInt) else int(x)


class Mat2:
    """Row-major 2x2 matrix ``[[a, b], [c, d]]`` with residues mod l^N."""

    __slots__ = ("a", "b", "c", "d", "ctx")

    def __init__(self, a, b, c, d, ctx: PadicContext):
        m = ctx.modulus
        object.__setattr__(self, "a", _int(a) % m)
        object.__setattr__(self, "b", _int(b) % m)
        object.__setattr__(self, "c", _int(c) % m)
        object.__setattr__(self, "d", _int(d) % m)
        object.__setattr__(self, "ctx", ctx)

    def __setattr__(self, name, value):
        raise AttributeError("Mat2 is immutable")

    @classmethod
    def from_rows(cls, rows, ctx):
        (a, b), (c, d) = rows
        return cls(a, b, c, d, ctx)

    @classmethod
    def identity(cls, ctx):
        return cls(1, 0, 0, 1, ctx)

    @classmethod
    def scalar(cls, s, ctx):
        return cls(s, 0, 0, s, ctx)

    @classmethod
    def from_coords(cls, coords, ctx):
        """Traceless matrix ``x*e12 + h*H + y*e21`` from ``(x, h, y)``."""
        x, h, y = (_int(t) for t in coords)
        return TracelessMat(h, x, y, -h, ctx)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def rows(self):
        return [[self.a, self.b], [self.c, self.d]]

    def coords(self):
        """(x, h, y) coordinates; meaningful for traceless matrices."""
        return (self.b, self.a, self.c)

    def __eq__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        return self.ctx == other.ctx and self.entries() == other.entries()

    def __hash__(self):
        return hash(self.entries())

    def __repr__(self):
        return (f"Mat2([[{self.a}, {self.b}], [{self.c}, {self.d}]] "
                f"mod {self.ctx.ell}^{self.ctx.N})")

    def __add__(self, o):
        return Mat2(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d,
                    self.ctx)

    def __sub__(self, o):
        return Mat2(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d,
                    self.ctx)

    def __neg__(self):
        return Mat2(-self.a, -self.b, -self.c, -self.d, self.ctx)

    def __mul__(self, o):
        if isinstance(o, Mat2):
            return Mat2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                        self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d,
                        self.ctx)
        s = _int(o)
        return Mat2(self.a * s, self.b * s, self.c * s, self.d * s, self.ctx)

    def __rmul__(self, s):
        return self * s

    def __matmul__(self, o):
        return self * o

    def apply(self, w):
        """Matrix times the column vector ``w``."""
        w0, w1 = (_int(t) for t in w)
        m = self.ctx.modulus
        return ((self.a * w0 + self.b * w1) % m, (self.c * w0 + self.d * w1) % m)

    @property
    def det(self) -> int:
        return (self.a * self.d - self.b * self.c) % self.ctx.modulus

    @property
    def trace(self) -> int:
        return (self.a + self.d) % self.ctx.modulus

    def min_valuation(self) -> int:
        ell, N = self.ctx.ell, self.ctx.N
        return min(vp(e, ell, N) for e in self.entries())

    def is_zero_mod(self, k: int) -> bool:
        q = self.ctx.ell ** min(k, self.ctx.N)
        return all(e % q == 0 for e in self.entries())

    def congruent(self, other: "Mat2", k: int) -> bool:
        return (self - other).is_zero_mod(k)

    def is_traceless(self) -> bool:
        return self.trace == 0

    def transpose(self):
        return Mat2(self.a, self.c, self.b, self.d, self.ctx)


class TracelessMat(Mat2):
    """Element of sl_2(Z/l^N)."""

    __slots__ = ()

    def __init__(self, a, b, c, d, ctx):
        super().__init__(a, b, c, d, ctx)
        if (self.a + self.d) % ctx.modulus:
            raise ValueError("matrix is not traceless")

    @classmethod
    def of(cls, m: Mat2) -> "TracelessMat":
        return cls(m.a, m.b, m.c, m.d, m.ctx)


def bracket(u: Mat2, w: Mat2) -> TracelessMat:
    return TracelessMat.of(u * w - w * u)


def half(x: int, ctx: PadicContext) -> int:
    """x/2 mod l^N.  For l = 2 ``x`` must be even and the result is the
    canonical representative, correct only modulo 2^(N-1)."""
    if ctx.ell == 2:
        if x % 2:
            raise OddTrace(f"{x} is odd")
        return (x % ctx.modulus) // 2
    return x * pow(2, -1, ctx.modulus) % ctx.modulus


def theta(g: Mat2) -> TracelessMat:
    """``g - tr(g)/2 * Id``.

    For l = 2 the input must be congruent to Id mod 2 and the output is
    determined modulo 2^(N-1) only.
    """
    ctx = g.ctx
    if ctx.ell == 2 and not (g - Mat2.identity(ctx)).is_zero_mod(1):
        raise OddTrace("theta at l = 2 needs g == Id mod 2")
    t = half(g.a + g.d, ctx)
    return TracelessMat(g.a - t, g.b, g.c, g.d - t, ctx)


def adjugate(m: Mat2) -> Mat2:
    return Mat2(m.d, -m.b, -m.c, m.a, m.ctx)


_BASIS = ((0, 1, 0, 0), (1, 0, 0, -1), (0, 0, 1, 0))


def sl2_basis(ctx) -> list[TracelessMat]:
    """``[x, h, y]`` = ``[e12, diag(1,-1), e21]``."""
    return [TracelessMat(*e, ctx) for e in _BASIS]


@dataclass(frozen=True)
class AdjointOp:
    """Matrix of ``C_g = [g, .]`` on sl_2 in the ``(x, h, y)`` basis.

    ``matrix[i][j]`` is the i-th coordinate of ``C_g`` applied to the j-th
    basis vector.
    """

    matrix: tuple
    ctx: PadicContext

    @classmethod
    def of(cls, g: Mat2) -> "AdjointOp":
        cols = [bracket(g, e).coords() for e in sl2_basis(g.ctx)]
        return cls(tuple(tuple(cols[j][i] for j in range(3)) for i in range(3)),
                   g.ctx)

    def apply(self, coords):
        m = self.ctx.modulus
        return tuple(sum(self.matrix[i][j] * coords[j] for j in range(3)) % m
                     for i in range(3))

    def char_poly(self) -> MonicPoly:
        """Characteristic polynomial by cofactor expansion."""
        return MonicPoly(charpoly_coeffs(self.matrix, self.ctx.modulus), self.ctx)


def det_small(rows, mod: int) -> int:
    """Determinant of a 1x1, 2x2 or 3x3 integer matrix mod ``mod``."""
    n = len(rows)
    if n == 1:
        return rows[0][0] % mod
    if n == 2:
        return (rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]) % mod
    if n == 3:
        (a, b, c), (d, e, f), (g, h, i) = rows
        return (a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)) % mod
    raise ValueError("only sizes up to 3 are supported")


def charpoly_coeffs(rows, mod: int) -> list[int]:
    """Coefficients (constant first) of det(t*Id - A) for A of size 2 or 3."""
    n = len(rows)
    tr = sum(rows[i][i] for i in range(n))
    if n == 2:
        return [det_small(rows, mod), -tr % mod, 1]
    if n == 3:
        minors = sum(rows[i][i] * rows[j][j] - rows[i][j] * rows[j][i]
                     for i in range(3) for j in range(i + 1, 3))
        return [-det_small(rows, mod) % mod, minors % mod, -tr % mod, 1]
    raise ValueError("only sizes 2 and 3 are supported")


def char_poly(g: Mat2) -> MonicPoly:
    """``t^2 - tr(g) t + det(g)``."""
    return MonicPoly([g.det, -g.trace, 1], g.ctx)


def char_poly_adjoint(g: Mat2) -> MonicPoly:
    """Characteristic polynomial of ``[g, .]`` for traceless ``g``.

    Equal to ``t^3 + 4 det(g) t`` (eigenvalues 0 and +-2mu where +-mu are
    the eigenvalues of g).
    """
    if not g.is_traceless():
        raise ValueError("char_poly_adjoint needs a traceless matrix")
    return MonicPoly([0, 4 * g.det, 0, 1], g.ctx)


def _as_rows(g):
    if isinstance(g, Mat2):
        return g.rows(), g.ctx
    raise TypeError("expected Mat2; use the (rows, ctx) form for 3x3")


def approx_eigen_defect(g, lam, w, n: int, ctx: PadicContext | None = None) -> int:
    """Check ``p_g(lam) == 0 mod l^(n-b)`` for an approximate eigenpair.

    ``g`` is a :class:`Mat2` or a square list of rows (size 2 or 3, with
    ``ctx`` given).  Requires ``g w == lam w (mod l^n)`` and ``b < n`` where
    ``b`` is the least valuation among the coordinates of ``w``.  Returns
    ``b``; raises :class:`Falsified` if the conclusion fails.
    """
    if isinstance(g, Mat2):
        rows, ctx = g.rows(), g.ctx
    else:
        rows = [list(map(_int, r)) for r in g]
        if ctx is None:
            raise ValueError("ctx is required for list input")
    if n > ctx.N:
        raise PrecisionExhausted(f"n={n} exceeds N={ctx.N}")
    ell, mod = ctx.ell, ctx.modulus
    lam = _int(lam)
    w = [_int(t) % mod for t in w]
    m = len(rows)
    qn = ell ** n
    for i in range(m):
        if (sum(rows[i][j] * w[j] for j in range(m)) - lam * w[i]) % qn:
            raise HypothesisFails("g w is not congruent to lam w mod l^n")
    b = min(vp(t, ell, ctx.N) for t in w)
    if b >= n:
        raise HypothesisFails(f"b={b} must be < n={n}")
    shifted = [[(rows[i][j] - (lam if i == j else 0)) for j in range(m)]
               for i in range(m)]
    p_lam = det_small(shifted, mod)
    if vp(p_lam, ell, ctx.N) < n - b:
        raise Falsified(
            f"val(p_g({lam}))={vp(p_lam, ell, ctx.N)} < n-b={n - b} for "
            f"g={rows}, w={w}, l={ell}, N={ctx.N}")
    return b


@dataclass(frozen=True)
class EigenvalueNear:
    """``nu`` is a root of p_g mod l^N with val(nu - lam) >= ``depth``."""

    nu: int
    depth: int


@dataclass(frozen=True)
class VectorSmall:
    """Every coordinate of ``w`` has valuation >= ``bound``; ``beta`` is the
    observed minimum."""

    beta: int
    bound: int


def hensel_failure_dichotomy(g: Mat2, lam, w, n: int):
    """Either an eigenvalue of ``g`` close to ``lam`` or a small ``w``.

    Returns :class:`EigenvalueNear` when p_g has a root ``nu`` with
    ``val(nu - lam) >= val(lam) + 3`` (capped at N), otherwise
    :class:`VectorSmall` certifying ``beta >= n - 2(2 + val(lam))``.
    """
    if not g.is_traceless():
        raise ValueError("g must be traceless")
    ctx = g.ctx
    ell, N = ctx.ell, ctx.N
    lam = _int(lam) % ctx.modulus
    w = [_int(t) % ctx.modulus for t in w]
    qn = ell ** min(n, N)
    gw = g.apply(w)
    if any((gw[i] - lam * w[i]) % qn for i in range(2)):
        raise HypothesisFails("g w is not congruent to lam w mod l^n")
    p = char_poly(g)
    v_lam = vp(lam, ell, N)
    if p._eval_int(lam) % ctx.modulus == 0:
        return EigenvalueNear(lam, N)
    beta = min(vp(t, ell, N) for t in w)
    bound = n - 2 * (2 + v_lam)
    if beta >= bound:
        return VectorSmall(beta, bound)
    try:
        nu = hensel_lift(p, ctx(lam)).residue
    except HypothesisFails as exc:
        raise Falsified(f"beta={beta} < {bound} but Hensel fails: {exc}") from exc
    depth = vp((nu - lam) % ctx.modulus, ell, N)
    if depth < min(N, v_lam + 3):
        raise Falsified(
            f"lifted eigenvalue {nu} only within l^{depth} of {lam}")
    return EigenvalueNear(nu, depth)
