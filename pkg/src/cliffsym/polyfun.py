"""Exact multivariate polynomial and rational calculus over R_{0,n}.

PolyFun is a polynomial in the coordinates x_0..x_n with multivector
coefficients; RationalFun is num / base^k with a scalar-coefficient base
polynomial, which keeps quotient-rule derivatives to a single extra power
of the base instead of squaring the denominator.  Both are exact when the
underlying algebra uses the 'exact' field, which is how the identity
suites certify literal zeros.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .algebra import Algebra, Multivector, Paravector, as_multivector


class PolyFun:
    """Polynomial in x_0..x_n with multivector coefficients."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: Algebra, terms=None):
        self.alg = alg
        self.terms: dict[tuple, Multivector] = {}
        if terms:
            for expo, coeff in terms.items():
                self._acc(tuple(expo), coeff)

    def _acc(self, expo, coeff):
        if not isinstance(coeff, Multivector):
            coeff = as_multivector(coeff, self.alg)
        if expo in self.terms:
            coeff = self.terms[expo] + coeff
        if coeff.norm_inf() == 0:
            self.terms.pop(expo, None)
        else:
            self.terms[expo] = coeff

    # -- ring ---------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, PolyFun):
            other = PolyFun.constant(self.alg, other)
        out = PolyFun(self.alg)
        for e, c in self.terms.items():
            out._acc(e, c)
        for e, c in other.terms.items():
            out._acc(e, c)
        return out

    def __sub__(self, other):
        return self + other * (-1)

    def __mul__(self, other):
        if isinstance(other, PolyFun):
            out = PolyFun(self.alg)
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    out._acc(tuple(a + b for a, b in zip(e1, e2)), c1 * c2)
            return out
        # scalar or multivector constant, multiplied on the right
        other = as_multivector(other, self.alg) if isinstance(other, Multivector) else other
        out = PolyFun(self.alg)
        for e, c in self.terms.items():
            out._acc(e, c * other)
        return out

    def __rmul__(self, other):
        # constant (scalar or multivector) on the left
        out = PolyFun(self.alg)
        for e, c in self.terms.items():
            out._acc(e, other * c)
        return out

    def __neg__(self):
        return self * (-1)

    def diff(self, i: int) -> "PolyFun":
        out = PolyFun(self.alg)
        for e, c in self.terms.items():
            if e[i]:
                out._acc(e[:i] + (e[i] - 1,) + e[i + 1:], c * e[i])
        return out

    def directional(self, u) -> "PolyFun":
        """(u | grad) with paravector coefficients u_0..u_n."""
        coords = _coords(u, self.alg)
        out = PolyFun(self.alg)
        for i, ui in enumerate(coords):
            if ui != 0:
                out = out + self.diff(i) * ui
        return out

    def eval(self, point) -> Multivector:
        coords = _coords(point, self.alg)
        out = self.alg.multivector()
        for e, c in self.terms.items():
            s = self.alg.coerce_scalar(1)
            for xi, ei in zip(coords, e):
                if ei:
                    s = s * xi ** ei
            out = out + c * s
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def scalar_terms(self):
        """exponent -> scalar coefficient; requires all coeffs scalar."""
        out = {}
        for e, c in self.terms.items():
            if not c.is_paravector() or any(c.c[1 << i] != 0 for i in range(self.alg.n)):
                raise ValueError("polynomial has non-scalar coefficients")
            out[e] = c.c[0]
        return out

    @classmethod
    def constant(cls, alg, value) -> "PolyFun":
        return cls(alg, {(0,) * (alg.n + 1): as_multivector(value, alg)})

    @classmethod
    def coordinate(cls, alg, i: int) -> "PolyFun":
        e = [0] * (alg.n + 1)
        e[i] = 1
        return cls(alg, {tuple(e): alg.one()})

    def __eq__(self, other):
        return isinstance(other, PolyFun) and (self - other).is_zero()

    def __repr__(self):
        return f"PolyFun({len(self.terms)} terms, deg {self.degree()})"


def _coords(point, alg):
    if isinstance(point, Paravector):
        return [point.u0] + list(point.vec)
    if isinstance(point, (list, tuple, np.ndarray)):
        if len(point) != alg.n + 1:
            raise ValueError("point must provide n+1 coordinates")
        return list(point)
    raise TypeError("point must be a Paravector or coordinate sequence")


def x_poly(alg: Algebra) -> PolyFun:
    """The identity function x = x_0 + sum_i e_i x_i."""
    terms = {}
    for i in range(alg.n + 1):
        e = [0] * (alg.n + 1)
        e[i] = 1
        terms[tuple(e)] = alg.e(i) if i else alg.one()
    return PolyFun(alg, terms)


def conj_x_poly(alg: Algebra) -> PolyFun:
    terms = {}
    for i in range(alg.n + 1):
        e = [0] * (alg.n + 1)
        e[i] = 1
        terms[tuple(e)] = (alg.e(i) * -1) if i else alg.one()
    return PolyFun(alg, terms)


def norm_sq_poly(alg: Algebra) -> PolyFun:
    """|x|^2 = x_0^2 + ... + x_n^2 (the denominator base of x^-1)."""
    terms = {}
    for i in range(alg.n + 1):
        e = [0] * (alg.n + 1)
        e[i] = 2
        terms[tuple(e)] = alg.one()
    return PolyFun(alg, terms)


class RationalFun:
    """num / base^pow with a scalar-coefficient base polynomial."""

    __slots__ = ("num", "base", "pow")

    def __init__(self, num: PolyFun, base: PolyFun | None = None, power: int = 0):
        self.num = num
        self.base = base if base is not None else PolyFun.constant(num.alg, 1)
        self.pow = power
        if power == 0:
            self.base = PolyFun.constant(num.alg, 1)

    @property
    def alg(self):
        return self.num.alg

    @classmethod
    def from_poly(cls, p: PolyFun) -> "RationalFun":
        return cls(p, None, 0)

    def _aligned(self, other: "RationalFun"):
        if self.pow == 0:
            return RationalFun(self.num * _pow_poly(other.base, other.pow),
                               other.base, other.pow), other
        if other.pow == 0:
            o = RationalFun(other.num * _pow_poly(self.base, self.pow),
                            self.base, self.pow)
            return self, o
        if self.base == other.base:
            k = max(self.pow, other.pow)
            a = RationalFun(self.num * _pow_poly(self.base, k - self.pow), self.base, k)
            b = RationalFun(other.num * _pow_poly(other.base, k - other.pow), other.base, k)
            return a, b
        raise ValueError("rational functions have incompatible denominators")

    def __add__(self, other):
        if isinstance(other, PolyFun):
            other = RationalFun.from_poly(other)
        if not isinstance(other, RationalFun):
            other = RationalFun.from_poly(PolyFun.constant(self.alg, other))
        a, b = self._aligned(other)
        return RationalFun(a.num + b.num, a.base, a.pow)

    def __sub__(self, other):
        if isinstance(other, RationalFun):
            other = RationalFun(other.num * (-1), other.base, other.pow)
            return self + other
        return self + (-1) * other

    def __mul__(self, other):
        if isinstance(other, RationalFun):
            if self.pow == 0:
                base, power = other.base, other.pow
            elif other.pow == 0:
                base, power = self.base, self.pow
            elif self.base == other.base:
                base, power = self.base, self.pow + other.pow
            else:
                raise ValueError("rational functions have incompatible denominators")
            return RationalFun(self.num * other.num, base, power)
        return RationalFun(self.num * other, self.base, self.pow)

    def __rmul__(self, other):
        return RationalFun(other * self.num, self.base, self.pow)

    def __neg__(self):
        return self * (-1)

    def diff(self, i: int) -> "RationalFun":
        if self.pow == 0:
            return RationalFun.from_poly(self.num.diff(i))
        # d(n / D^k) = (n' D - k n D') / D^(k+1)
        n, D, k = self.num, self.base, self.pow
        return RationalFun(n.diff(i) * D - (n * D.diff(i)) * k, D, k + 1)

    def diff_multi(self, beta) -> "RationalFun":
        out = self
        for i, bi in enumerate(beta):
            for _ in range(bi):
                out = out.diff(i)
        return out

    def directional(self, u) -> "RationalFun":
        coords = _coords(u, self.alg)
        out = None
        for i, ui in enumerate(coords):
            if ui != 0:
                term = self.diff(i) * ui
                out = term if out is None else out + term
        if out is None:
            out = RationalFun.from_poly(PolyFun(self.alg))
        return out

    def eval(self, point) -> Multivector:
        nv = self.num.eval(point)
        if self.pow == 0:
            return nv
        dv = self.base.eval(point).c[0]
        if dv == 0:
            raise ZeroDivisionError("denominator vanishes at the point")
        if self.alg.field == "exact":
            return nv * (Fraction(1) / Fraction(dv) ** self.pow)
        return nv * (1.0 / dv ** self.pow)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other):
        if isinstance(other, PolyFun):
            other = RationalFun.from_poly(other)
        if not isinstance(other, RationalFun):
            return NotImplemented
        # cross-multiplied exact comparison; valid since bases never vanish
        lhs = self.num * _pow_poly(other.base, other.pow)
        rhs = other.num * _pow_poly(self.base, self.pow)
        return (lhs - rhs).is_zero()

    def __repr__(self):
        return f"RationalFun(num deg {self.num.degree()}, base^{self.pow})"


def _pow_poly(p: PolyFun, k: int) -> PolyFun:
    out = PolyFun.constant(p.alg, 1)
    for _ in range(k):
        out = out * p
    return out


def power_x(alg: Algebra, k: int) -> RationalFun:
    """x^k as an exact rational function; negative k via x^-1 = conj(x)/|x|^2."""
    if k >= 0:
        p = PolyFun.constant(alg, 1)
        xx = x_poly(alg)
        for _ in range(k):
            p = p * xx
        return RationalFun.from_poly(p)
    m = -k
    num = PolyFun.constant(alg, 1)
    cj = conj_x_poly(alg)
    for _ in range(m):
        num = num * cj
    return RationalFun(num, norm_sq_poly(alg), m)


def dirac_D(f) -> "RationalFun":
    """D f = sum_i e_i df/dx_i (left multiplication), i = 0..n."""
    f = f if isinstance(f, RationalFun) else RationalFun.from_poly(f)
    alg = f.alg
    out = None
    for i in range(alg.n + 1):
        ei = alg.one() if i == 0 else alg.e(i)
        d = f.diff(i)
        term = RationalFun(ei * d.num, d.base, d.pow)
        out = term if out is None else out + term
    return out


def laplacian(f) -> "RationalFun":
    """Delta f = sum_i d^2 f / dx_i^2, i = 0..n."""
    f = f if isinstance(f, RationalFun) else RationalFun.from_poly(f)
    out = None
    for i in range(f.alg.n + 1):
        term = f.diff(i).diff(i)
        out = term if out is None else out + term
    return out


def holo_check(f) -> RationalFun:
    """D Delta^m f for odd n = 2m+1; identically zero certifies membership
    in the kernel class."""
    f = f if isinstance(f, RationalFun) else RationalFun.from_poly(f)
    n = f.alg.n
    if n % 2 == 0:
        raise ValueError("the kernel operator D Delta^m needs odd n")
    m = (n - 1) // 2
    g = f
    for _ in range(m):
        g = laplacian(g)
    return dirac_D(g)
