"""Arithmetic in the Clifford algebra R_{0,n} with paravector support.

The algebra is generated by e_1..e_n with e_i e_j + e_j e_i = -2 delta_ij
and unit e_0 = 1.  Elements are kept as dense coefficient vectors over the
2^n blades (bitmask order).  Three scalar fields are supported: 'real'
(float64), 'complex' (complex128) and 'exact' (Fraction coefficients in an
object array), the last for identity suites that want literal zeros.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

import numpy as np

from . import _tables
from .errors import AlgebraMismatch, NotInvertible, ZeroParavector

_FIELDS = {
    "real": np.float64,
    "complex": np.complex128,
    "exact": object,
}

_SCALARS = (int, float, complex, Fraction, np.integer, np.floating, np.complexfloating)


class Algebra:
    """R_{0,n} for a fixed dimension n and scalar field."""

    def __init__(self, n: int, field: str = "real"):
        if not 1 <= n <= 8:
            raise ValueError("dimension n must be in 1..8")
        if field not in _FIELDS:
            raise ValueError(f"unknown field {field!r}")
        self.n = n
        self.field = field
        self.dim = 1 << n
        self.idx, self.sgn = _tables.tables(n)
        self._grade = np.array([m.bit_count() for m in range(self.dim)])

    @property
    def dtype(self):
        return _FIELDS[self.field]

    def zero_coeffs(self):
        if self.field == "exact":
            c = np.empty(self.dim, dtype=object)
            c[:] = Fraction(0)
            return c
        return np.zeros(self.dim, dtype=self.dtype)

    def coerce_scalar(self, x):
        if self.field == "exact":
            if isinstance(x, Fraction):
                return x
            if isinstance(x, (int, np.integer)):
                return Fraction(int(x))
            return Fraction(x)
        return self.dtype(x)

    # -- constructors ---------------------------------------------------

    def multivector(self, coeffs=None) -> "Multivector":
        c = self.zero_coeffs()
        if coeffs is not None:
            if isinstance(coeffs, dict):
                for mask, v in coeffs.items():
                    c[mask] = self.coerce_scalar(v)
            else:
                arr = np.asarray(coeffs)
                if arr.shape != (self.dim,):
                    raise ValueError("coefficient vector has wrong length")
                if self.field == "exact":
                    for m in range(self.dim):
                        c[m] = self.coerce_scalar(arr[m])
                else:
                    c = arr.astype(self.dtype)
        return Multivector(self, c)

    def scalar(self, x) -> "Multivector":
        return self.multivector({0: x})

    def one(self) -> "Multivector":
        return self.scalar(1)

    def e(self, *indices) -> "Multivector":
        """Basis blade e_{i1..ik}; index 0 (the unit) is allowed and skipped."""
        mask = 0
        for i in indices:
            if i == 0:
                continue
            if not 1 <= i <= self.n:
                raise ValueError(f"basis index {i} out of range for n={self.n}")
            if mask & (1 << (i - 1)):
                raise ValueError("repeated index in blade constructor")
            mask |= 1 << (i - 1)
        return self.multivector({mask: 1})

    def paravector(self, u0=0.0, vec=None) -> "Paravector":
        return Paravector(self, u0, vec)

    def __eq__(self, other):
        return (
            isinstance(other, Algebra)
            and self.n == other.n
            and self.field == other.field
        )

    def __hash__(self):
        return hash((self.n, self.field))

    def __repr__(self):
        return f"Algebra(n={self.n}, field={self.field!r})"

    def check_same(self, other: "Algebra"):
        if self != other:
            raise AlgebraMismatch(f"{self!r} vs {other!r}")

    def to_field(self, field: str) -> "Algebra":
        return Algebra(self.n, field) if field != self.field else self


class Multivector:
    """Immutable element of R_{0,n}: a dense blade -> coefficient vector."""

    __slots__ = ("alg", "c")

    def __init__(self, alg: Algebra, coeffs: np.ndarray):
        self.alg = alg
        self.c = coeffs
        if coeffs.dtype != object:
            coeffs.setflags(write=False)

    # -- ring operations -------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, (Multivector, Paravector, *_SCALARS)):
            return NotImplemented
        other = as_multivector(other, self.alg)
        self.alg.check_same(other.alg)
        return Multivector(self.alg, self.c + other.c)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, (Multivector, Paravector, *_SCALARS)):
            return NotImplemented
        other = as_multivector(other, self.alg)
        self.alg.check_same(other.alg)
        return Multivector(self.alg, self.c - other.c)

    def __rsub__(self, other):
        return as_multivector(other, self.alg) - self

    def __neg__(self):
        return Multivector(self.alg, -self.c)

    def __mul__(self, other):
        if isinstance(other, Paravector):
            other = other.to_multivector()
        if isinstance(other, Multivector):
            self.alg.check_same(other.alg)
            return Multivector(self.alg, _mul_coeffs(self.alg, self.c, other.c))
        if isinstance(other, _SCALARS):
            return Multivector(self.alg, self.c * self.alg.coerce_scalar(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Paravector):
            return other.to_multivector() * self
        if isinstance(other, Multivector):
            return other * self
        if isinstance(other, _SCALARS):
            return Multivector(self.alg, self.alg.coerce_scalar(other) * self.c)
        return NotImplemented

    def __truediv__(self, scalar):
        if self.alg.field == "exact":
            return self * (Fraction(1) / Fraction(scalar))
        return self * (1.0 / scalar)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.alg.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    # -- structure -------------------------------------------------------

    def grade_select(self, *grades) -> "Multivector":
        keep = np.isin(self.alg._grade, grades)
        c = self.alg.zero_coeffs()
        c[keep] = self.c[keep]
        return Multivector(self.alg, c)

    def scalar_part(self):
        return self.c[0]

    def is_paravector(self, tol: float = 0.0) -> bool:
        bad = self.alg._grade > 1
        if self.alg.field == "exact":
            return all(v == 0 for v in self.c[bad])
        return bool(np.max(np.abs(self.c[bad]), initial=0.0) <= tol)

    def conj_paravector(self) -> "Multivector":
        """u0 - vec; meaningful for elements supported on grades <= 1."""
        c = self.alg.zero_coeffs()
        c[0] = self.c[0]
        g1 = self.alg._grade == 1
        c[g1] = -self.c[g1]
        return Multivector(self.alg, c)

    def norm_inf(self):
        if self.alg.field == "exact":
            return max((abs(v) for v in self.c), default=Fraction(0))
        return float(np.max(np.abs(self.c), initial=0.0))

    def astype(self, field: str) -> "Multivector":
        alg = self.alg.to_field(field)
        if alg is self.alg:
            return self
        return alg.multivector(
            {m: (float(v) if field != "exact" else v)
             for m, v in enumerate(self.c) if v != 0})

    def __eq__(self, other):
        if not isinstance(other, Multivector) or self.alg != other.alg:
            return NotImplemented
        return bool(np.all(self.c == other.c))

    def __hash__(self):
        return hash((self.alg, tuple(self.c)))

    def inverse(self) -> "Multivector":
        """Two-sided inverse via the left-regular representation."""
        work = self.astype("real") if self.alg.field == "exact" else self
        L = left_matrix(work)
        e0 = np.zeros(work.alg.dim, dtype=L.dtype)
        e0[0] = 1.0
        try:
            x = np.linalg.solve(L, e0)
        except np.linalg.LinAlgError:
            raise NotInvertible("multivector is not invertible") from None
        if not np.all(np.isfinite(x)):
            raise NotInvertible("multivector is not invertible")
        return Multivector(work.alg, x)

    def __repr__(self):
        return f"<{format_multivector(self)}>"

    def __str__(self):
        return format_multivector(self)


def as_multivector(x, alg: Algebra) -> Multivector:
    if isinstance(x, Multivector):
        return x
    if isinstance(x, Paravector):
        return x.to_multivector()
    if isinstance(x, _SCALARS):
        return alg.scalar(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as a multivector")


def _mul_coeffs(alg: Algebra, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    idx, sgn = alg.idx, alg.sgn
    if alg.field == "exact" or a.dtype == object or b.dtype == object:
        out = alg.zero_coeffs()
        for j in range(alg.dim):
            aj = a[j]
            if aj == 0:
                continue
            row_i, row_s = idx[j], sgn[j]
            for k in range(alg.dim):
                if b[k] != 0:
                    out[row_i[k]] += int(row_s[k]) * aj * b[k]
        return out
    out = np.zeros(alg.dim, dtype=np.result_type(a, b))
    for j in range(alg.dim):
        if a[j] != 0:
            out[idx[j]] += a[j] * (sgn[j] * b)
    return out


def mul_batch(alg: Algebra, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Geometric product on (..., 2^n) coefficient stacks (float/complex)."""
    out = np.zeros(np.broadcast_shapes(A.shape, B.shape),
                   dtype=np.result_type(A, B))
    idx, sgn = alg.idx, alg.sgn
    for j in range(alg.dim):
        aj = A[..., j]
        if not np.any(aj):
            continue
        out[..., idx[j]] += aj[..., None] * (sgn[j] * B)
    return out


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    """Associative product with e_i e_j + e_j e_i = -2 delta_ij."""
    return a * b


class Paravector:
    """Element of S + V: scalar part u0 plus n vector components.

    Complex components are allowed (contours work with z - u); all formulas
    use the quadratic form u0^2 + sum u_i^2, never the Hermitian one.
    """

    __slots__ = ("alg", "u0", "vec")

    def __init__(self, alg: Algebra, u0=0.0, vec=None):
        self.alg = alg
        if vec is None:
            vec = np.zeros(alg.n)
        vec = np.asarray(vec)
        if vec.shape != (alg.n,):
            raise ValueError("vector part has wrong length")
        if alg.field == "exact":
            v = np.empty(alg.n, dtype=object)
            for i in range(alg.n):
                v[i] = alg.coerce_scalar(vec[i])
            self.u0 = alg.coerce_scalar(u0)
            self.vec = v
        else:
            cplx = np.iscomplexobj(vec) or isinstance(u0, (complex, np.complexfloating))
            dt = np.complex128 if cplx else np.float64
            self.u0 = dt(u0)
            self.vec = vec.astype(dt)
            self.vec.setflags(write=False)

    # -- conversions ------------------------------------------------------

    def to_multivector(self) -> Multivector:
        if self.alg.field != "exact" and np.iscomplexobj(self.vec):
            c = np.zeros(self.alg.dim, dtype=np.complex128)
        else:
            c = self.alg.zero_coeffs()
        c[0] = self.u0
        for i in range(self.alg.n):
            c[1 << i] = self.vec[i]
        return Multivector(self.alg, c)

    # -- algebra ----------------------------------------------------------

    def conj(self) -> "Paravector":
        return Paravector(self.alg, self.u0, -self.vec)

    def quad(self):
        """Quadratic form u0^2 + sum u_i^2 (complex-bilinear)."""
        return self.u0 * self.u0 + (self.vec * self.vec).sum()

    def norm(self) -> float:
        """Euclidean norm; for complex components the Hermitian magnitude."""
        if self.alg.field == "exact":
            return math.sqrt(float(self.quad()))
        v = np.abs(self.vec)
        return float(np.sqrt(abs(self.u0) ** 2 + v @ v))

    def inverse(self) -> "Paravector":
        return paravector_inverse(self)

    def __add__(self, other):
        if isinstance(other, Paravector):
            self.alg.check_same(other.alg)
            return Paravector(self.alg, self.u0 + other.u0, self.vec + other.vec)
        if isinstance(other, _SCALARS):
            return Paravector(self.alg, self.u0 + other, self.vec)
        return self.to_multivector() + other

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (Paravector, *_SCALARS)):
            return self + other * (-1)
        return self.to_multivector() - other

    def __rsub__(self, other):
        return self * (-1) + other

    def __mul__(self, other):
        if isinstance(other, _SCALARS):
            return Paravector(self.alg, self.u0 * other, self.vec * other)
        return self.to_multivector() * other

    def __rmul__(self, other):
        if isinstance(other, _SCALARS):
            return self * other
        return other * self.to_multivector()

    def __truediv__(self, scalar):
        if self.alg.field == "exact":
            return self * (Fraction(1) / Fraction(scalar))
        return self * (1.0 / scalar)

    def __neg__(self):
        return self * (-1)

    def __pow__(self, k: int):
        """Integer power; closed because powers stay in span{1, vec}."""
        if k < 0:
            return self.inverse() ** (-k)
        out = Paravector(self.alg, 1, self.vec * 0)
        for _ in range(k):
            dot = (out.vec * self.vec).sum()
            out = Paravector(self.alg, out.u0 * self.u0 - dot,
                             out.u0 * self.vec + self.u0 * out.vec)
        return out

    def eigenvalues(self):
        """Spectral pair u0 +/- i |vec| (real paravectors)."""
        v = np.asarray(self.vec, dtype=float)
        r = float(np.sqrt(v @ v))
        u0 = complex(self.u0)
        return (u0 + 1j * r, u0 - 1j * r)

    def __eq__(self, other):
        if not isinstance(other, Paravector) or self.alg != other.alg:
            return NotImplemented
        return self.u0 == other.u0 and bool(np.all(self.vec == other.vec))

    def __hash__(self):
        return hash((self.alg, self.u0, tuple(self.vec)))

    def __repr__(self):
        return f"<para {format_multivector(self.to_multivector())}>"


def paravector_inverse(u: Paravector) -> Paravector:
    """(u0 - vec) / (u0^2 + |vec|^2); errors on the zero paravector."""
    q = u.quad()
    if q == 0 or (u.alg.field != "exact" and abs(complex(q)) < 1e-300):
        raise ZeroParavector("cannot invert a paravector with vanishing quadratic form")
    return Paravector(u.alg, u.u0 / q, -u.vec / q)


def paravector_part(a: Multivector):
    """Project onto grades <= 1; returns (Paravector, operator norm dropped)."""
    alg = a.alg
    vec = np.array([a.c[1 << i] for i in range(alg.n)],
                   dtype=object if alg.field == "exact" else None)
    pv = Paravector(alg, a.c[0], vec)
    residual = a - pv.to_multivector()
    if residual.norm_inf() == 0:
        return pv, 0.0
    return pv, operator_norm(residual)


def left_matrix(a: Multivector) -> np.ndarray:
    """Matrix of x -> a*x in the blade basis."""
    alg = a.alg
    if alg.field == "exact":
        c = np.array([float(v) for v in a.c])
    else:
        c = a.c
    L = np.zeros((alg.dim, alg.dim), dtype=np.result_type(c, np.float64))
    cols = np.arange(alg.dim)
    for j in range(alg.dim):
        if c[j] != 0:
            L[alg.idx[j, cols], cols] += c[j] * alg.sgn[j, cols]
    return L


def operator_norm(a) -> float:
    """Spectral norm of the left-multiplication matrix.

    Submultiplicative since L(ab) = L(a)L(b); equals sqrt(u0^2 + |vec|^2)
    on paravectors, where the left representation is a similarity.
    """
    if isinstance(a, Paravector):
        a = a.to_multivector()
    return float(np.linalg.norm(left_matrix(a), 2))


def exp_paravector(u: Paravector) -> Paravector:
    """exp(u0) (cos|v| + (v/|v|) sin|v|), with the v -> 0 limit built in."""
    v = np.asarray(u.vec, dtype=float)
    r = float(np.sqrt(v @ v))
    s = math.exp(float(u.u0))
    if r == 0.0:
        return Paravector(u.alg, s, v * 0.0)
    return Paravector(u.alg, s * math.cos(r), (s * math.sin(r) / r) * v)


# -- text format --------------------------------------------------------
#
# Terms are `coeff` or `coeff eI` with I an ascending digit string, e.g.
#     2.5 + 1 e1 - 0.5 e13
# Whitespace is insignificant.  Scientific exponents need an explicit sign
# (1.5e-3) so that `e3` always reads as a blade.

_TERM = re.compile(
    r"\s*(?P<sign>[+-])?\s*"
    r"(?P<coeff>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]\d+)?)?"
    r"\s*\*?\s*(?:e(?P<blade>[1-8]+))?"
)


def parse_multivector(text: str, alg: Algebra) -> Multivector:
    coeffs: dict[int, float] = {}
    pos, found = 0, False
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse multivector term at {text[pos:]!r}")
        if m.group("coeff") is None and m.group("blade") is None:
            if text[pos:].strip() == "":
                break
            raise ValueError(f"cannot parse multivector term at {text[pos:]!r}")
        sign = -1.0 if m.group("sign") == "-" else 1.0
        coeff = float(m.group("coeff")) if m.group("coeff") is not None else 1.0
        mask = 0
        if m.group("blade"):
            prev = 0
            for ch in m.group("blade"):
                i = int(ch)
                if i <= prev:
                    raise ValueError(f"blade indices must ascend in e{m.group('blade')}")
                if i > alg.n:
                    raise ValueError(f"basis index {i} out of range for n={alg.n}")
                mask |= 1 << (i - 1)
                prev = i
        coeffs[mask] = coeffs.get(mask, 0.0) + sign * coeff
        pos = m.end()
        found = True
    if not found:
        raise ValueError("empty multivector text")
    return alg.multivector(coeffs)


def blade_name(mask: int) -> str:
    if mask == 0:
        return ""
    return "e" + "".join(str(i + 1) for i in range(8) if mask & (1 << i))


def _scalar_str(v, digits: int) -> tuple[str, bool]:
    """(absolute value as text, is_negative)"""
    if isinstance(v, Fraction):
        return str(abs(v)), v < 0
    if isinstance(v, complex) or np.iscomplexobj(v):
        v = complex(v)
        if v.imag == 0:
            return f"{abs(v.real):.{digits}g}", v.real < 0
        return f"({v.real:.{digits}g}{v.imag:+.{digits}g}j)", False
    v = float(v)
    return f"{abs(v):.{digits}g}", v < 0


def format_multivector(a: Multivector, digits: int = 12) -> str:
    parts = []
    order = sorted(range(a.alg.dim), key=lambda m: (m.bit_count(), m))
    for mask in order:
        v = a.c[mask]
        if v == 0:
            continue
        sv, neg = _scalar_str(v, digits)
        name = blade_name(mask)
        body = f"{sv} {name}".strip() if name else sv
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts) if parts else "0"
