"""Integral disentangling: Dirichlet means, Feynman parameters, contours.

The symmetrized product of inverses turns into simplex integrals of powers
of a single linear combination (one Feynman parameter per v factor), and
symmetrized powers admit contour-integral representations in the
complexified algebra.  Everything here is numerical-with-certificates:
adaptive rules against a QuadratureSpec, exact moment shortcuts where the
integrand is polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product

import numpy as np

from ._quad import gauss_jacobi_01, gauss_legendre_01, integrate_01
from .algebra import (
    Algebra,
    Multivector,
    Paravector,
    as_multivector,
    operator_norm,
    paravector_inverse,
)
from .errors import (
    EigenvalueOutsideContour,
    LimitExceeded,
    QuadratureNotConverged,
    SingularOnSimplex,
    SingularPath,
    ZeroParavector,
)
from .symprod import sym_two_paravector_powers


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive quadrature targets: Gauss points per axis, absolute
    tolerance, and dyadic/order refinement depth."""
    base_order: int = 16
    tol: float = 1e-10
    max_refine: int = 8

    def __post_init__(self):
        if self.base_order < 2:
            raise ValueError("base_order must be >= 2")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


DEFAULT_QUAD = QuadratureSpec()


# -- Dirichlet means ------------------------------------------------------

def beta_multivariate(b):
    """B(b_1..b_l) = prod Gamma(b_i) / Gamma(sum b_i); exact for integer b."""
    b = list(b)
    if not b or any(x <= 0 for x in b):
        raise ValueError("all Dirichlet weights must be positive")
    if all(float(x).is_integer() for x in b):
        num = 1
        for x in b:
            num *= math.factorial(int(x) - 1)
        return Fraction(num, math.factorial(int(sum(b)) - 1))
    return math.exp(sum(math.lgamma(float(x)) for x in b)
                    - math.lgamma(float(sum(b))))


def dirichlet_moment(b, gamma):
    """E[prod t_i^gamma_i] under the Dirichlet(b) measure = B(b+gamma)/B(b)."""
    b = list(b)
    gamma = list(gamma)
    if len(gamma) != len(b):
        raise ValueError("moment exponent must match the weight length")
    return beta_multivariate([x + g for x, g in zip(b, gamma)]) / beta_multivariate(b)


@lru_cache(maxsize=None)
def _simplex_rule(r: int, b: tuple, order: int):
    """Duffy-mapped tensor rule on the r-simplex with Dirichlet weight b.

    b has r+1 entries; returned weights integrate the weight function, so
    they sum to B(b).  Nodes are the first r barycentric coordinates.
    """
    axes = []
    for i in range(r):
        a_exp = float(sum(b[i + 1:])) - 1.0  # (1-s_i) exponent
        b_exp = float(b[i]) - 1.0            # s_i exponent
        axes.append(gauss_jacobi_01(order, a_exp, b_exp))
    nodes = np.zeros((1, r))
    weights = np.ones(1)
    for i, (s, w) in enumerate(axes):
        m = len(s)
        base = np.repeat(nodes, m, axis=0)
        scale = 1.0 - base[:, :i].sum(axis=1) if i else np.ones(len(base))
        base[:, i] = np.tile(s, len(nodes)) * scale
        weights = np.repeat(weights, m) * np.tile(w, len(nodes))
        nodes = base
    return nodes, weights


def _as_paravectors(us, alg=None):
    out = []
    for u in us:
        if isinstance(u, Paravector):
            out.append(u)
        else:
            if alg is None:
                raise TypeError("need Paravector inputs")
            mv = as_multivector(u, alg)
            vec = [mv.c[1 << i] for i in range(alg.n)]
            out.append(Paravector(alg, mv.c[0], np.array(vec, dtype=float)))
    return out


def _combination(us, t):
    """t : u = sum t_i u_i + (1 - sum t) u_l for the first l-1 coordinates."""
    last = 1.0 - float(np.sum(t))
    acc = us[-1] * last
    for ti, ui in zip(t, us[:-1]):
        acc = acc + ui * float(ti)
    return acc


def dirichlet_mean(f, b, us, quad: QuadratureSpec = DEFAULT_QUAD) -> Multivector:
    """F(f, b, u) = integral of f(t:u) against the Dirichlet(b) measure.

    ``f`` maps a Paravector to a Multivector (or Paravector).  The rule
    escalates the tensor order until the change drops under quad.tol.
    """
    us = list(us)
    if not us:
        raise ValueError("need at least one paravector")
    alg = us[0].alg
    us = _as_paravectors(us, alg)
    r = len(us) - 1
    bt = tuple(float(x) for x in b)
    if len(bt) != r + 1:
        raise ValueError("need one Dirichlet weight per paravector")
    if r == 0:
        return _eval_f(f, us[0], alg)
    norm = float(beta_multivariate(bt))
    prev = None
    order = quad.base_order
    for _ in range(quad.max_refine + 1):
        nodes, weights = _simplex_rule(r, bt, order)
        acc = np.zeros(alg.dim, dtype=np.complex128 if alg.field == "complex" else np.float64)
        for t, w in zip(nodes, weights):
            val = _eval_f(f, _combination(us, t), alg)
            acc = acc + w * np.asarray(val.c, dtype=acc.dtype)
        acc /= norm
        if prev is not None:
            err = float(np.max(np.abs(acc - prev)))
            if err <= quad.tol * max(1.0, float(np.max(np.abs(acc)))):
                return alg.multivector(acc)
        prev = acc
        order *= 2
    raise QuadratureNotConverged("Dirichlet mean did not settle under order escalation")


def _eval_f(f, w: Paravector, alg: Algebra) -> Multivector:
    try:
        val = f(w)
    except (ZeroParavector, ZeroDivisionError) as exc:
        raise SingularOnSimplex(str(exc)) from exc
    if isinstance(val, Paravector):
        val = val.to_multivector()
    return as_multivector(val, alg)


def dirichlet_mean_power(k: int, b, us) -> Multivector:
    """Exact F(t -> t^k, b, u) through Dirichlet monomial moments.

    Expands (t:u)^k into words; each word u_{i1}..u_{ik} picks up the
    moment E[t_{i1}..t_{ik}] = B(b+gamma)/B(b) of its exponent vector.
    """
    us = list(us)
    l = len(us)
    if l ** k > 300_000:
        raise LimitExceeded("word expansion too large; use the quadrature path")
    alg = us[0].alg
    out = alg.multivector()
    for word in product(range(l), repeat=k):
        gamma = [0] * l
        pr = None
        for i in word:
            gamma[i] += 1
            pr = us[i] if pr is None else pr * us[i]
        moment = dirichlet_moment(b, gamma)
        term = as_multivector(pr if pr is not None else 1, alg)
        out = out + term * (float(moment) if alg.field != "exact" else moment)
    return out


# -- Feynman-parameter formulas -------------------------------------------

def _dependent_ratio(u: Paravector, v: Paravector):
    """lambda with v = lambda u, or None if independent."""
    uu = float(u.u0 * u.u0 + (u.vec * u.vec).sum().real)
    if uu == 0:
        return None
    lam = float((u.u0 * v.u0 + (u.vec * v.vec).sum()).real) / uu
    diff = v + u * (-lam)
    if diff.norm() <= 1e-12 * (v.norm() + 1.0):
        return lam
    return None


def feynman_inverse_pair(u: Paravector, v: Paravector,
                         quad: QuadratureSpec = DEFAULT_QUAD) -> Multivector:
    """sym(u^-1 v^-1): lambda^-1 u^-2 when v = lambda u, otherwise the
    one-parameter integral of (t u + (1-t) v)^-2."""
    alg = u.alg
    if u.norm() == 0 or v.norm() == 0:
        raise ZeroParavector("inverse pair needs nonzero paravectors")
    lam = _dependent_ratio(u, v)
    if lam is not None:
        if lam < 0:
            raise SingularPath("t u + (1-t) v vanishes on the segment")
        return (paravector_inverse(u) ** 2).to_multivector() * (1.0 / lam)

    def integrand(t):
        w = u * t + v * (1.0 - t)
        wi = paravector_inverse(w)
        return np.asarray((wi ** 2).to_multivector().c, dtype=float)

    vals = integrate_01(integrand, quad.tol, quad.base_order, quad.max_refine)
    return alg.multivector(vals)


def sym_conjugated_product(w_inv: Multivector, factors) -> Multivector:
    """(1/l!) sum over orderings of prod_j (w^-1 u_sigma(j)) w^-1."""
    l = len(factors)
    alg = w_inv.alg
    if l > 6:
        raise LimitExceeded("conjugated product limited to 6 factors")
    acc = alg.multivector()
    for perm in permutations(range(l)):
        word = w_inv
        for j in perm:
            word = word * factors[j] * w_inv
        acc = acc + word
    return acc / math.factorial(l)


def sym_mixed_rational(us, vs, quad: QuadratureSpec = DEFAULT_QUAD) -> Multivector:
    """sym(u_1 .. u_l v_1^-1 .. v_{l+1}^-1) by Feynman parametrization.

    The v list must be one longer than the u list; shorter sides are padded
    with 1 (which leaves the symmetrized value unchanged).  The integral
    runs over the l-simplex against the normalized uniform Dirichlet
    measure, with the inner product symmetrized over orderings of the u's.
    """
    us = list(us)
    vs = list(vs)
    if not us and not vs:
        raise ValueError("empty input")
    alg = (us[0] if us else vs[0]).alg
    us = [as_multivector(u, alg) for u in us]
    vs = _as_paravectors(vs, alg)
    one = Paravector(alg, 1.0)
    while len(vs) < len(us) + 1:
        vs.append(one)
    while len(us) + 1 < len(vs):
        us.append(alg.one())
    l = len(us)
    if l == 0:
        return paravector_inverse(vs[0]).to_multivector()
    if l > 5:
        raise LimitExceeded("mixed rational symmetrization limited to 5 factors")
    prev = None
    order = max(4, quad.base_order // (1 << max(0, l - 2)))
    for _ in range(quad.max_refine + 1):
        nodes, weights = _simplex_rule(l, (1.0,) * (l + 1), order)
        acc = _mixed_rational_sum(alg, us, vs, nodes, weights)
        acc *= math.factorial(l)  # the uniform measure has total mass 1/l!
        if prev is not None:
            err = float(np.max(np.abs(acc - prev)))
            if err <= quad.tol * max(1.0, float(np.max(np.abs(acc)))):
                return alg.multivector(acc)
        prev = acc
        order = order + max(2, order // 2)
    raise QuadratureNotConverged("Feynman simplex integral did not settle")


def _mixed_rational_sum(alg, us, vs, nodes, weights):
    """Weighted sum over simplex nodes of the order-symmetrized product
    prod_j ((t:v)^-1 u_j) (t:v)^-1, vectorized over the nodes."""
    from .algebra import mul_batch

    N = len(nodes)
    vcoef = np.stack([np.asarray(v.to_multivector().c, dtype=float) for v in vs])
    tfull = np.concatenate([nodes, (1.0 - nodes.sum(axis=1))[:, None]], axis=1)
    w = tfull @ vcoef  # (N, dim) coefficients of t:v
    g1 = [1 << i for i in range(alg.n)]
    qf = w[:, 0] ** 2 + np.sum(w[:, g1] ** 2, axis=1)
    if np.min(qf) < 1e-24:
        raise SingularPath("t:v is not invertible on the simplex")
    w_inv = w.copy()
    w_inv[:, g1] *= -1.0
    w_inv /= qf[:, None]
    ucoef = [np.asarray(u.c, dtype=float) for u in us]
    l = len(us)
    acc = np.zeros(alg.dim)
    prefix = [None] * (l + 1)
    prev_perm = None
    for perm in permutations(range(l)):
        start = 0
        if prev_perm is not None:
            while start < l and perm[start] == prev_perm[start]:
                start += 1
        if start == 0:
            prefix[0] = w_inv
            start = 1
        else:
            start += 1  # prefix[k] already includes letters up to k-1
        for k in range(start - 1, l):
            step = mul_batch(alg, prefix[k], ucoef[perm[k]][None, :])
            prefix[k + 1] = mul_batch(alg, step, w_inv)
        acc = acc + weights @ prefix[l]
        prev_perm = perm
    return acc / math.factorial(l)


# -- spectral / contour representations -------------------------------------

def paravector_eigenvalues(u: Paravector):
    """u0 +/- i |vec|, the spectrum of left multiplication by u."""
    return u.eigenvalues()


@dataclass(frozen=True)
class Contour:
    """Positively oriented circle |z - center| = radius with trapezoid nodes."""
    center: complex
    radius: float
    nodes: int = 64

    def points(self):
        th = 2.0 * np.pi * np.arange(self.nodes) / self.nodes
        return self.center + self.radius * np.exp(1j * th)


def default_contour(u: Paravector, nodes: int = 64) -> Contour:
    """Circle centered at the scalar part with radius 2|vec| + 1: encloses
    the eigenvalues u0 +/- i|vec| with unit margin."""
    v = np.asarray(u.vec, dtype=float)
    r = float(np.sqrt(v @ v))
    return Contour(complex(u.u0), 2.0 * r + 1.0, nodes)


def _check_inside(u: Paravector, c: Contour):
    for lam in u.eigenvalues():
        if abs(lam - c.center) >= c.radius * (1.0 - 1e-12):
            raise EigenvalueOutsideContour(
                f"eigenvalue {lam:.6g} not strictly inside {c}")


def contour_power(u: Paravector, p: int, c: Contour | None = None) -> Multivector:
    """(1/2 pi i) closed-integral z^p (z - u)^-1 dz by the trapezoid rule.

    Spectrally accurate on circles; reproduces u^p once the eigenvalues
    are enclosed.
    """
    if p < 0:
        raise ValueError("only nonnegative powers here")
    alg = u.alg
    if c is None:
        c = default_contour(u)
    _check_inside(u, c)
    z = c.points()
    u0 = complex(u.u0)
    vec = np.asarray(u.vec, dtype=float)
    quad = (z - u0) ** 2 + float(vec @ vec)
    if np.min(np.abs(quad)) < 1e-14:
        raise SingularPath("contour passes through the spectrum")
    # (z-u)^-1 = ((z-u0) + vec) / quad ; extra (z - center) is dz/(i dtheta)
    w = (z - c.center) / quad / len(z)
    zp = z ** p
    scalar = np.sum(zp * (z - u0) * w)
    vec_coeff = np.sum(zp * w)
    out = np.zeros(alg.dim, dtype=complex)
    out[0] = scalar
    for i in range(alg.n):
        out[1 << i] = vec_coeff * vec[i]
    return alg.multivector(out.real)


def contour_sym_power(u1: Paravector, u2: Paravector, p: int, q: int,
                      c1: Contour | None = None, c2: Contour | None = None,
                      quad: QuadratureSpec = DEFAULT_QUAD) -> Multivector:
    """Double contour representation of sym(u1^p u2^q).

    The inner symmetrized resolvent sym((z1-u1)^-1 (z2-u2)^-1) is evaluated
    through its normally convergent geometric series around the contour
    centers (the paper's own series definition of inverses inside the
    symbol); the z integrals are plain trapezoid sums.  On circles centered
    at the scalar parts the series ratio is |vec| / (2|vec|+1) < 1/2, so
    truncation is certified against quad.tol.
    """
    alg = u1.alg
    if c1 is None:
        c1 = default_contour(u1)
    if c2 is None:
        c2 = default_contour(u2)
    _check_inside(u1, c1)
    _check_inside(u2, c2)
    calg = alg.to_field("complex")
    ut1 = Paravector(calg, complex(u1.u0) - c1.center, np.asarray(u1.vec, dtype=float))
    ut2 = Paravector(calg, complex(u2.u0) - c2.center, np.asarray(u2.vec, dtype=float))
    # series bounds need the submultiplicative operator norm (the Hermitian
    # norm can undershoot it once the scalar part is complex)
    rho1 = operator_norm(ut1.to_multivector())
    rho2 = operator_norm(ut2.to_multivector())
    th1, th2 = rho1 / c1.radius, rho2 / c2.radius
    if th1 >= 1.0 or th2 >= 1.0:
        raise EigenvalueOutsideContour("contour radius below the series radius")
    m1 = (abs(c1.center) + c1.radius) ** p
    m2 = (abs(c2.center) + c2.radius) ** q
    theta = max(th1, th2, 1e-6)
    scale = m1 * m2 / (1.0 - theta) ** 2
    K = max(p, q, int(math.ceil(math.log(max(quad.tol, 1e-15) / (10.0 * scale))
                                / math.log(theta)))) + 2
    K = min(K, 400)

    def z_sums(c: Contour, top: int, kmax: int):
        z = c.points()
        d = z - c.center
        zp = z ** top
        out = np.empty(kmax + 1, dtype=complex)
        cur = np.ones_like(z)
        for k in range(kmax + 1):
            out[k] = np.mean(zp * cur)
            cur = cur / d
        return out

    i1 = z_sums(c1, p, K)
    i2 = z_sums(c2, q, K)
    acc = np.zeros(alg.dim, dtype=complex)
    for a in range(K + 1):
        for b in range(K + 1):
            wgt = i1[a] * i2[b]
            if wgt == 0 or abs(wgt) * rho1 ** a * rho2 ** b < quad.tol * 1e-4:
                continue
            s = sym_two_paravector_powers(ut1, ut2, a, b)
            acc += np.asarray(s.c, dtype=complex) * wgt
    return alg.multivector(acc.real)
