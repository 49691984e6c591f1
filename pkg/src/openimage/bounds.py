"""Closed-form constants and index bounds.

Integer-valued formulas are evaluated exactly.  Real-valued bounds are
:class:`BigLogNumber` values: an exact rational while it stays small, and
otherwise an interval enclosure of ``log10`` of the number computed with
outward-rounded interval arithmetic.  Numbers such as ``exp(exp(exp(12)))``
have a ``log10`` around ``10^70683``, which an mpmath float still holds, so
``log10 log10`` is read off directly when reporting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath.ctx_iv import MPIntervalContext

from .errors import (IncomparableRepresentations, PreconditionError,
                     SideConditionViolated)

GAMMA = 10 ** 13
DELTA_TOWER = 12
ZETA2_UPPER = Fraction(1644935, 10 ** 6)
K_ELL_CAP = 2 * 48 ** 2
K2_CAP = 3 ** 2 * 2 ** 16
PAIR_INDEX_EXPONENT = 10 ** 4
ADELIC_EXPONENT_COEFF = 5000
F_ODD_CONSTANT = 800
F_ODD_COEFF = 2 ** 10
F_TWO_CONSTANT = 15421
F_TWO_COEFF = 19008
BAD_PRIME_FACTOR = 30

DEFAULT_DPS = 30
_EXACT_DIGITS_CAP = 5000
_LOG_TIER_CAP = 10 ** 6


def _ctx(dps: int) -> MPIntervalContext:
    c = MPIntervalContext()
    c.dps = dps
    return c


_IV = _ctx(DEFAULT_DPS)


def _iv_of(x, iv=None):
    iv = iv or _IV
    if isinstance(x, Fraction):
        return iv.mpf(x.numerator) / x.denominator
    if isinstance(x, float):
        # floats are user inputs such as heights; take the exact binary value
        return iv.mpf(mpmath.mpf(x))
    return iv.mpf(x)


def _imax(iv, *xs):
    lo = max(mpmath.mpf(x.a) for x in xs)
    hi = max(mpmath.mpf(x.b) for x in xs)
    return iv.mpf([lo, hi])


def _nstr(x, digits=20) -> str:
    return mpmath.nstr(mpmath.mpf(x), digits)


class BigLogNumber:
    """Positive real upper bound held exactly or as an enclosure of log10.

    ``upper`` records that the value is an upper bound (all bounds here are);
    comparisons of upper bounds use the upper end of the left operand and
    the lower end of the right one.
    """

    __slots__ = ("exact", "_log10", "upper", "iv")

    def __init__(self, exact=None, log10=None, upper: bool = True, iv=None):
        if (exact is None) == (log10 is None):
            raise ValueError("give exactly one of exact / log10")
        self.iv = iv or _IV
        self.exact = None if exact is None else Fraction(exact)
        if self.exact is not None and self.exact <= 0:
            raise ValueError("BigLogNumber values are positive")
        self._log10 = log10
        self.upper = upper

    @classmethod
    def from_exact(cls, x, iv=None):
        return cls(exact=x, iv=iv)

    @classmethod
    def from_log10(cls, interval, iv=None):
        return cls(log10=interval, iv=iv)

    @property
    def log10(self):
        if self._log10 is None:
            iv = self.iv
            self._log10 = iv.log10(_iv_of(self.exact, iv))
        return self._log10

    @property
    def loglog10(self):
        l10 = self.log10
        if not l10.a > 0:
            raise IncomparableRepresentations("log10 log10 needs a value above 10")
        return self.iv.log10(l10)

    @property
    def tier(self) -> str:
        if self.exact is not None:
            return "exact"
        return "log" if self.log10.b < _LOG_TIER_CAP else "loglog"

    def _promote(self, l10):
        return BigLogNumber(log10=l10, iv=self.iv)

    def __mul__(self, other):
        if not isinstance(other, BigLogNumber):
            other = BigLogNumber(exact=other, iv=self.iv)
        if self.exact is not None and other.exact is not None:
            prod = self.exact * other.exact
            if len(str(prod.numerator)) + len(str(prod.denominator)) < _EXACT_DIGITS_CAP:
                return BigLogNumber(exact=prod, iv=self.iv)
        return self._promote(self.log10 + other.log10)

    __rmul__ = __mul__

    def __pow__(self, k):
        """Power by a nonnegative exponent (int, Fraction or interval)."""
        if isinstance(k, (int, Fraction)) and self.exact is not None:
            k = Fraction(k)
            if k.denominator == 1 and k >= 0:
                digits = (len(str(self.exact.numerator)) + len(str(self.exact.denominator)))
                if digits * max(int(k), 1) < _EXACT_DIGITS_CAP:
                    return BigLogNumber(exact=self.exact ** int(k), iv=self.iv)
        return self._promote(self.log10 * (_iv_of(k, self.iv)
                                           if isinstance(k, (int, Fraction)) else k))

    def compare(self, other: "BigLogNumber") -> int:
        """-1 if certainly ``self < other``, 1 if certainly greater, 0 if
        equal exact values; raises when the enclosures overlap."""
        if self.exact is not None and other.exact is not None:
            return (self.exact > other.exact) - (self.exact < other.exact)
        a, b = self.log10, other.log10
        if a.b < b.a:
            return -1
        if a.a > b.b:
            return 1
        raise IncomparableRepresentations("enclosures overlap at this precision")

    def __le__(self, other):
        return self.compare(other) <= 0

    def __lt__(self, other):
        return self.compare(other) < 0

    def upper_log10(self):
        return mpmath.mpf(self.log10.b)

    def to_json(self) -> dict:
        out = {"tier": self.tier, "upper_bound": self.upper}
        if self.exact is not None:
            out["exact"] = (str(self.exact.numerator) if self.exact.denominator == 1
                            else f"{self.exact.numerator}/{self.exact.denominator}")
        l10 = self.log10
        if self.tier == "loglog":
            out["log10_log10"] = _nstr(self.iv.log10(l10).b)
        else:
            out["log10"] = _nstr(l10.b)
        return out

    def __repr__(self):
        if self.exact is not None:
            return f"BigLogNumber(exact={self.exact})"
        return f"BigLogNumber(log10<={_nstr(self.log10.b, 12)})"


@dataclass(frozen=True)
class BoundInputs:
    """Inputs to the index bounds.

    ``heights`` are stable Faltings heights of the curves; ``H`` may be
    given as an explicit upper bound but must dominate the defined value.
    """

    K_degree: int
    n_curves: int
    heights: tuple
    d: int = K_ELL_CAP
    b0_valuations: dict | None = None
    H_override: float | None = field(default=None)

    def __post_init__(self):
        if int(self.K_degree) < 1:
            raise PreconditionError("K_degree must be >= 1")
        if int(self.n_curves) < 2:
            raise PreconditionError("n_curves must be >= 2")
        if len(self.heights) != self.n_curves:
            raise PreconditionError(
                f"expected {self.n_curves} heights, got {len(self.heights)}")
        if int(self.d) < 1:
            raise PreconditionError("d must be >= 1")
        if self.H_override is not None:
            if self.H_override < 1:
                raise PreconditionError("H must be >= 1")
            if self.H_override < self.H_defined():
                raise PreconditionError("H is below max{1, log[K:Q], max h}")
        object.__setattr__(self, "heights", tuple(self.heights))

    def H_defined(self) -> float:
        return max(1.0, float(mpmath.log(self.K_degree)), *map(float, self.heights))

    @property
    def H(self) -> float:
        return self.H_override if self.H_override is not None else self.H_defined()

    @classmethod
    def from_json(cls, doc: dict) -> "BoundInputs":
        return cls(K_degree=int(doc["K_degree"]), n_curves=int(doc["n"]),
                   heights=tuple(doc["heights"]), d=int(doc.get("d", K_ELL_CAP)),
                   b0_valuations=doc.get("b0_valuations"),
                   H_override=doc.get("H"))


def alpha_g(g: int) -> int:
    if g < 1:
        raise PreconditionError("g must be >= 1")
    return 1024 * g ** 3


def b_iso(deg: int, g: int, h, iv=None) -> BigLogNumber:
    """``((14g)^(64g^2) [K:Q] max(h, log[K:Q], 1)^2)^alpha(g)``."""
    iv = iv or _IV
    if deg < 1 or g < 1:
        raise PreconditionError("deg and g must be >= 1")
    big = _imax(iv, iv.mpf(1), _iv_of(h, iv), iv.log(deg))
    inner = 64 * g * g * iv.log10(14 * g) + iv.log10(deg) + 2 * iv.log10(big)
    return BigLogNumber.from_log10(inner * alpha_g(g), iv)


def b_with_degree(deg: int, g: int, h, d: int, iv=None) -> BigLogNumber:
    """``4^(e (d(1+log d)^2)^alpha(g)) * b(deg, g, h)^(1 + alpha(g) log(d(1+log d)^2))``."""
    iv = iv or _IV
    if d < 1:
        raise PreconditionError("d must be >= 1")
    a = alpha_g(g)
    base = d * (1 + iv.log(d)) ** 2
    # log10 of the first factor is e * base^a * log10 4
    first = iv.e * iv.exp(a * iv.log(base)) * iv.log10(4)
    expo = 1 + a * iv.log(base)
    second = b_iso(deg, g, h, iv).log10 * expo
    return BigLogNumber.from_log10(first + second, iv)


def pink_exponent_odd(k: int, n1: int, n2: int) -> int:
    if min(k, n1, n2) < 0:
        raise PreconditionError("arguments must be >= 0")
    return 2 * k + max(2 * k, 8 * n1, 8 * n2)


def pink_exponent_two(k: int, n1: int, n2: int) -> tuple[int, int]:
    if n1 < 4 or n2 < 4 or k < 2:
        raise SideConditionViolated("need n1, n2 >= 4 and k >= 2")
    return (12 * (k + 11 * n2 + 5 * n1 + 12) + 1, 12 * (k + 11 * n1 + 5 * n2 + 12) + 1)


def f_pair(v_b0: int, n1: int, n2: int, v: int) -> int:
    if min(v_b0, n1, n2, v) < 0:
        raise PreconditionError("arguments must be >= 0")
    return v_b0 // 2 + 16 * max(n1, n2) + 11 * v + 7


def t_max(v_b0: int, n1: int, n2: int, v: int) -> int:
    if min(v_b0, n1, n2, v) < 0:
        raise PreconditionError("arguments must be >= 0")
    return v_b0 // 2 + 11 * n1 + n2 + 7 * v + 7


def ball_exponent_pair(ell: int, f: int, n1: int, n2: int) -> int:
    lo = 2 if ell == 2 else (1 if ell in (3, 5) else 0)
    if min(n1, n2) < lo:
        raise SideConditionViolated(f"need n1, n2 >= {lo} at l={ell}")
    if ell == 2:
        return 12 * (f + 17 * max(n1, n2) + 13) + 1
    return 4 * f


def f_of_ell(ell: int, v_b0_pair: int, v_D1: int, v_D2: int) -> int:
    if min(v_b0_pair, v_D1, v_D2) < 0:
        raise PreconditionError("valuations must be >= 0")
    m = max(v_D1, v_D2)
    if ell == 2:
        return 6 * v_b0_pair + F_TWO_COEFF * m + F_TWO_CONSTANT
    return 2 * v_b0_pair + F_ODD_COEFF * m + F_ODD_CONSTANT


def n_j_from_valuations(ell: int, v_Dj: int) -> int:
    if v_Dj < 0:
        raise PreconditionError("valuation must be >= 0")
    return 48 * v_Dj + 38 if ell == 2 else 16 * v_Dj + 12


def zeta2_upper() -> BigLogNumber:
    return BigLogNumber.from_exact(ZETA2_UPPER)


def goursat_index_bound(c: int, n: int) -> BigLogNumber:
    """``2^(3n(n-2)) zeta(2)^(n(n-1)) c^(n(n-1)/2)`` with zeta(2) rounded up."""
    if c < 1 or n < 2:
        raise PreconditionError("need c >= 1 and n >= 2")
    e = n * (n - 1)
    out = BigLogNumber.from_exact(2) ** (3 * n * (n - 2))
    out = out * (zeta2_upper() ** e)
    return out * (BigLogNumber.from_exact(c) ** Fraction(e, 2))


def _pair_height(inputs: BoundInputs, i: int, j: int):
    # heights add over products of curves
    return float(inputs.heights[i]) + float(inputs.heights[j])


def pair_b(inputs: BoundInputs, i: int, j: int, iv=None) -> BigLogNumber:
    """``b(E_i x E_j / K; d)``."""
    return b_with_degree(inputs.K_degree, 2, _pair_height(inputs, i, j), inputs.d, iv)


def bad_prime_product_bound(inputs: BoundInputs, pair=(0, 1), floor: bool = False,
                            iv=None) -> BigLogNumber:
    """``30 b0(E1;60) b0(E1^2;2) b0(E2;60) b0(E2^2;2) b0(E1xE2;2)``, each b0
    replaced by its upper bound ``b(.; d)`` (or by 1 with ``floor``)."""
    out = BigLogNumber.from_exact(BAD_PRIME_FACTOR, iv)
    if floor:
        return out
    i, j = pair
    hi, hj = float(inputs.heights[i]), float(inputs.heights[j])
    deg = inputs.K_degree
    for g, h, d in ((1, hi, 60), (2, 2 * hi, 2), (1, hj, 60), (2, 2 * hj, 2),
                    (2, hi + hj, 2)):
        out = out * b_with_degree(deg, g, h, d, iv)
    return out


def pair_index_bound(inputs: BoundInputs, pair=(0, 1), iv=None) -> BigLogNumber:
    """``b(E_i x E_j / K; 2 * 48^2)^(10^4)``."""
    return pair_b(inputs, *pair, iv=iv) ** PAIR_INDEX_EXPONENT


def adelic_index_bound(inputs: BoundInputs, iv=None) -> BigLogNumber:
    """``8^(n(n-2)) zeta(2)^(n(n-1)) [K:Q] max_{i != j} b(E_i x E_j; 2*48^2)^(5000 n(n-1))``."""
    iv = iv or _IV
    n = inputs.n_curves
    e = n * (n - 1)
    best = None
    for i in range(n):
        for j in range(i + 1, n):
            b = pair_b(inputs, i, j, iv)
            if best is None or b.log10.b > best.log10.b:
                best = b
    pre = (BigLogNumber.from_exact(8, iv) ** (n * (n - 2))) * (
        BigLogNumber.from_exact(ZETA2_UPPER, iv) ** e)
    pre = pre * BigLogNumber.from_exact(inputs.K_degree, iv)
    return pre * (best ** (ADELIC_EXPONENT_COEFF * e))


def delta_log10(iv=None):
    """Enclosure of ``log10 delta`` for ``delta = exp exp exp 12``."""
    iv = iv or _IV
    return iv.exp(iv.exp(iv.mpf(DELTA_TOWER))) / iv.log(10)


def theorem1_bound(inputs: BoundInputs, iv=None) -> BigLogNumber:
    """``delta^(n(n-1)) ([K:Q] H^2)^(gamma n(n-1))``."""
    iv = iv or _IV
    e = inputs.n_curves * (inputs.n_curves - 1)
    if inputs.H_override is not None:
        H = _iv_of(float(inputs.H_override), iv)
    else:
        H = _imax(iv, iv.mpf(1), iv.log(inputs.K_degree),
                  *(_iv_of(float(h), iv) for h in inputs.heights))
    l10 = e * delta_log10(iv) + GAMMA * e * (iv.log10(inputs.K_degree) + 2 * iv.log10(H))
    return BigLogNumber.from_log10(l10, iv)


def delta_power_landmarks(power: int = 2, iv=None) -> dict:
    """``log10 log10`` and ``log10 ln`` of ``delta^power`` as decimal strings."""
    iv = iv or _IV
    l10 = delta_log10(iv) * power
    ln = iv.exp(iv.exp(iv.mpf(DELTA_TOWER))) * power
    return {"log10_log10": _nstr(iv.log10(l10).b, 15),
            "log10_ln": _nstr(iv.log10(ln).b, 15)}


def check_implication(inputs: BoundInputs, dps: int = DEFAULT_DPS,
                      max_dps: int = 240) -> bool:
    """Whether the n-curve index bound is at most the headline bound.

    The left side is an upper bound, so its upper enclosure end is compared
    with the lower end of the right side; precision doubles on overlap.
    """
    while True:
        iv = _ctx(dps)
        lhs = adelic_index_bound(inputs, iv)
        rhs = theorem1_bound(inputs, iv)
        try:
            return lhs.compare(rhs) <= 0
        except IncomparableRepresentations:
            if dps >= max_dps:
                raise
            dps *= 2
