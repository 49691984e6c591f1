"""Fixed-precision arithmetic in Z/l^N.

Every value lives in a :class:`PadicContext` that fixes the prime ``ell`` and
the working precision ``N``.  Residues are plain Python ints reduced into
``[0, ell**N)``.  The zero residue has valuation ``N`` (capped-zero
convention): at finite precision 0 and ``ell**N * u`` are indistinguishable,
so any operation that needs an *exact* valuation rejects capped values.

Internally the heavier kernels work on integer representatives, treating
them as exact elements of Z_l; results are reduced mod ``ell**N`` on the way
out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (BadValuation, HypothesisFails, NonSquareDet, NonUnit,
                     PrecisionExhausted)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def vp(x: int, ell: int, cap: int) -> int:
    """Valuation of the integer ``x`` at ``ell``, capped at ``cap``."""
    if x == 0:
        return cap
    k = 0
    while k < cap and x % ell == 0:
        x //= ell
        k += 1
    return k


@dataclass(frozen=True)
class PadicContext:
    ell: int
    N: int
    modulus: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not _is_prime(self.ell):
            raise ValueError(f"ell={self.ell} is not prime")
        if self.N < 1:
            raise ValueError(f"precision N={self.N} must be >= 1")
        object.__setattr__(self, "modulus", self.ell ** self.N)

    @property
    def v(self) -> int:
        """1 when ell = 2, else 0."""
        return 1 if self.ell == 2 else 0

    @property
    def precision_N(self) -> int:
        return self.N

    def __call__(self, x: int) -> "PadicInt":
        return PadicInt(x, self)

    def val(self, x: int) -> int:
        return vp(x % self.modulus, self.ell, self.N)

    def extended(self, extra: int) -> "PadicContext":
        return PadicContext(self.ell, self.N + extra)


class PadicInt:
    """Residue in Z/l^N with valuation semantics."""

    __slots__ = ("residue", "ctx")

    def __init__(self, value: int, ctx: PadicContext):
        object.__setattr__(self, "residue", int(value) % ctx.modulus)
        object.__setattr__(self, "ctx", ctx)

    def __setattr__(self, name, value):
        raise AttributeError("PadicInt is immutable")

    def _coerce(self, other) -> int:
        if isinstance(other, PadicInt):
            if other.ctx != self.ctx:
                raise ValueError("mixing residues from different contexts")
            return other.residue
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicInt(self.residue + o, self.ctx)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicInt(self.residue - o, self.ctx)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicInt(o - self.residue, self.ctx)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return PadicInt(self.residue * o, self.ctx)

    __rmul__ = __mul__

    def __neg__(self):
        return PadicInt(-self.residue, self.ctx)

    def __pow__(self, k: int):
        return PadicInt(pow(self.residue, k, self.ctx.modulus), self.ctx)

    def __eq__(self, other):
        if isinstance(other, PadicInt):
            return self.ctx == other.ctx and self.residue == other.residue
        if isinstance(other, int):
            return self.residue == other % self.ctx.modulus
        return NotImplemented

    def __hash__(self):
        return hash((self.residue, self.ctx.ell, self.ctx.N))

    def __int__(self):
        return self.residue

    def __repr__(self):
        return f"PadicInt({self.residue} mod {self.ctx.ell}^{self.ctx.N})"

    @property
    def valuation(self) -> int:
        return vp(self.residue, self.ctx.ell, self.ctx.N)

    def is_unit(self) -> bool:
        return self.residue % self.ctx.ell != 0


def val(x: PadicInt) -> int:
    """Valuation in ``[0, N]``; ``N`` for the zero residue."""
    return x.valuation


def inv_unit(x: PadicInt) -> PadicInt:
    if not x.is_unit():
        raise NonUnit(f"{x!r} is not a unit")
    return PadicInt(pow(x.residue, -1, x.ctx.modulus), x.ctx)


def _sqrt_int(a: int, ell: int, prec: int) -> int:
    """Square root of ``a`` (a == 1 mod ell, or mod 8 for ell = 2) in Z_ell.

    Newton iteration on integer representatives.  Returns the root congruent
    to 1 mod ell (mod 4 for ell = 2), correct modulo ``ell**prec``.
    """
    if ell != 2:
        mod = ell ** prec
        r = 1
        while (r * r - a) % mod:
            r = (r - (r * r - a) * pow(2 * r, -1, mod)) % mod
        return r
    # dyadic case: x' = x - ((x^2 - a)/2) / x keeps x odd and doubles the
    # correct bits; one spare bit fixes the branch mod 2^prec.
    mod = 2 ** (prec + 2)
    r = 1
    while (r * r - a) % (2 ** (prec + 1)):
        r = (r - ((r * r - a) // 2) * pow(r, -1, mod)) % mod
    if r % 4 == 3:
        r = -r
    return r % (2 ** prec)


def sqrt_one_plus(t: PadicInt) -> PadicInt:
    """Square root of ``1 + t`` on the branch fixed by the binomial series.

    Requires val(t) >= 1 (odd ell) or >= 3 (ell = 2).  The residue of ``t`` is
    read as an exact element of Z_l, so the answer is the true l-adic root
    of ``1 + t`` reduced mod l^N.
    """
    ctx = t.ctx
    need = 3 if ctx.ell == 2 else 1
    if t.valuation < need:
        raise BadValuation(
            f"sqrt_one_plus needs val(t) >= {need}, got {t.valuation}")
    return PadicInt(_sqrt_int(1 + t.residue, ctx.ell, ctx.N), ctx)


def _sqrt_mod_prime(a: int, p: int) -> int:
    """Tonelli-Shanks; ``a`` must be a nonzero square mod the odd prime p."""
    a %= p
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def is_square_unit(x: PadicInt) -> bool:
    ctx = x.ctx
    if not x.is_unit():
        return False
    if ctx.ell == 2:
        return x.residue % (2 ** min(ctx.N, 3)) == 1
    return pow(x.residue % ctx.ell, (ctx.ell - 1) // 2, ctx.ell) == 1


def sqrt_unit(x: PadicInt) -> PadicInt:
    """Some square root of a square unit (branch: least residue mod ell,
    or the one congruent to 1 mod 4 when ell = 2)."""
    ctx = x.ctx
    if not is_square_unit(x):
        raise NonSquareDet(f"{x!r} is not a square unit")
    if ctx.ell == 2:
        if ctx.N < 3:
            return ctx(1)
        return sqrt_one_plus(x - 1)
    r0 = _sqrt_mod_prime(x.residue, ctx.ell)
    r0 = min(r0, ctx.ell - r0)
    return hensel_lift(MonicPoly([-x.residue, 0, 1], ctx), ctx(r0))


class MonicPoly:
    """Monic polynomial of degree <= 3 with coefficients in Z/l^N.

    ``coefficients`` are listed from the constant term up and include the
    leading 1.
    """

    __slots__ = ("coefficients", "ctx")

    def __init__(self, coefficients, ctx: PadicContext):
        cs = [int(c) % ctx.modulus for c in coefficients]
        if not cs or cs[-1] != 1 % ctx.modulus:
            raise ValueError("leading coefficient must be 1")
        if len(cs) - 1 > 3:
            raise ValueError("degree must be at most 3")
        self.coefficients = tuple(cs)
        self.ctx = ctx

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def _eval_int(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def _deriv_int(self, x: int) -> int:
        acc = 0
        cs = self.coefficients
        for k in range(len(cs) - 1, 0, -1):
            acc = acc * x + k * cs[k]
        return acc

    def __call__(self, x: PadicInt) -> PadicInt:
        return PadicInt(self._eval_int(int(x)), self.ctx)

    def derivative_at(self, x: PadicInt) -> PadicInt:
        return PadicInt(self._deriv_int(int(x)), self.ctx)

    def __repr__(self):
        return f"MonicPoly({list(self.coefficients)} mod {self.ctx.ell}^{self.ctx.N})"


def newton_root(coefficients, alpha: int, ell: int, prec: int) -> int:
    """Exact Newton iteration for an integer polynomial in Z_ell.

    The caller guarantees val(p(alpha)) > 2 val(p'(alpha)) on the integer
    representatives.  Returns the root modulo ``ell**prec``.
    """
    cs = list(coefficients)

    def ev(x):
        acc = 0
        for c in reversed(cs):
            acc = acc * x + c
        return acc

    def dv(x):
        acc = 0
        for k in range(len(cs) - 1, 0, -1):
            acc = acc * x + k * cs[k]
        return acc

    d0 = dv(alpha)
    vd = vp(d0, ell, 10 ** 9)
    work = ell ** (prec + vd + 1)
    target = ell ** (prec + vd)
    unit_mod = ell ** (prec + 1)
    x = alpha
    for _ in range(4 * (prec + 4).bit_length() + 64):
        fx = ev(x)
        if fx % target == 0:
            return x % (ell ** prec)
        d = dv(x)
        scale = ell ** vd
        x = (x - (fx // scale) * pow(d // scale, -1, unit_mod)) % work
    raise PrecisionExhausted("Newton iteration did not converge")


def hensel_lift(p: MonicPoly, alpha: PadicInt) -> PadicInt:
    """Lift ``alpha`` to a root of ``p`` mod l^N.

    The hypothesis val(p(alpha)) > 2 val(p'(alpha)) must be decidable at
    precision N: the derivative valuation must be exact, and a capped
    ``p(alpha)`` only counts when 2 val(p'(alpha)) < N.
    """
    ctx = p.ctx
    a = int(alpha)
    fv = p._eval_int(a)
    dv = p._deriv_int(a)
    v_f = vp(fv % ctx.modulus, ctx.ell, ctx.N)
    v_d = vp(dv % ctx.modulus, ctx.ell, ctx.N)
    if v_f < ctx.N and v_f <= 2 * v_d:
        raise HypothesisFails(
            f"val(p(alpha))={v_f} is not > 2*val(p'(alpha))={2 * v_d}")
    if v_d >= ctx.N or 2 * v_d >= ctx.N:
        raise PrecisionExhausted(
            f"cannot certify val(p(alpha)) > 2*val(p'(alpha)) at N={ctx.N}")
    root = newton_root(p.coefficients, a, ctx.ell, ctx.N)
    return PadicInt(root, ctx)
