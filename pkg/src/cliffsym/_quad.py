"""Gauss rules on [0,1] and small adaptive drivers.

Gauss-Jacobi nodes come from Golub-Welsch on the symmetric tridiagonal
recurrence matrix; numpy's eigh is plenty for the orders used here.
"""

from functools import lru_cache
from math import lgamma, exp

import numpy as np

from .errors import QuadratureNotConverged


@lru_cache(maxsize=None)
def gauss_legendre_01(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return (x + 1.0) / 2.0, w / 2.0


def _log_beta(a, b):
    return lgamma(a) + lgamma(b) - lgamma(a + b)


@lru_cache(maxsize=None)
def gauss_jacobi_01(m: int, a: float, b: float):
    """Nodes/weights for integral_0^1 s^b (1-s)^a f(s) ds.

    a, b > -1 are the weight exponents; (a, b) = (0, 0) recovers Legendre.
    """
    if a == 0 and b == 0:
        return gauss_legendre_01(m)
    alpha = np.empty(m)
    beta = np.empty(m)  # squared off-diagonal entries
    apb = a + b
    alpha[0] = (b - a) / (apb + 2.0)
    for k in range(1, m):
        den = (2.0 * k + apb) * (2.0 * k + apb + 2.0)
        alpha[k] = (b * b - a * a) / den
    if m > 1:
        beta[1] = 4.0 * (1 + a) * (1 + b) / ((apb + 2.0) ** 2 * (apb + 3.0))
        for k in range(2, m):
            beta[k] = (4.0 * k * (k + a) * (k + b) * (k + apb)
                       / ((2.0 * k + apb) ** 2 * (2.0 * k + apb + 1.0)
                          * (2.0 * k + apb - 1.0)))
    J = np.diag(alpha)
    if m > 1:
        off = np.sqrt(beta[1:m])
        J += np.diag(off, 1) + np.diag(off, -1)
    nodes, vecs = np.linalg.eigh(J)
    mu0 = exp((apb + 1.0) * np.log(2.0) + _log_beta(a + 1.0, b + 1.0))
    w = mu0 * vecs[0, :] ** 2
    s = (nodes + 1.0) / 2.0
    return s, w / 2.0 ** (apb + 1.0)


def integrate_01(f, tol: float, base_order: int = 16, max_refine: int = 8):
    """Adaptive vector-valued integral over [0,1].

    ``f`` maps a float in (0,1) to a numpy coefficient vector.  Each panel
    compares Gauss(m) with Gauss(2m) and bisects on disagreement, up to
    ``max_refine`` levels.
    """

    def panel(lo, hi, depth):
        width = hi - lo
        x1, w1 = gauss_legendre_01(base_order)
        x2, w2 = gauss_legendre_01(2 * base_order)
        v1 = sum(w * np.asarray(f(lo + width * x)) for x, w in zip(x1, w1)) * width
        v2 = sum(w * np.asarray(f(lo + width * x)) for x, w in zip(x2, w2)) * width
        err = float(np.max(np.abs(v1 - v2)))
        if err <= tol * max(1.0, float(np.max(np.abs(v2)))):
            return v2
        if depth >= max_refine:
            raise QuadratureNotConverged(
                f"panel [{lo:.4g},{hi:.4g}] error {err:.3g} above tolerance")
        mid = (lo + hi) / 2.0
        return panel(lo, mid, depth + 1) + panel(mid, hi, depth + 1)

    return panel(0.0, 1.0, 0)


def integrate_01_weighted(f, density_ab, tol: float, base_order: int = 16,
                          max_refine: int = 8):
    """integral_0^1 f(T) T^b (1-T)^a dT with the weight in the rule.

    Order-escalation only (the weight pins the panel to [0,1]); raises
    QuadratureNotConverged when doubling the order keeps moving the value.
    """
    a, b = density_ab
    m = base_order
    prev = None
    for _ in range(max_refine + 1):
        s, w = gauss_jacobi_01(m, float(a), float(b))
        val = sum(wi * np.asarray(f(si)) for si, wi in zip(s, w))
        if prev is not None:
            err = float(np.max(np.abs(val - prev)))
            if err <= tol * max(1.0, float(np.max(np.abs(val)))):
                return val
        prev = val
        m *= 2
    raise QuadratureNotConverged("order escalation did not settle")
