"""The commutative symmetrized product on R_{0,n}.

The value of sym(u_1, ..., u_l) is the average of all l! permutation
products.  Three interchangeable evaluation engines are provided:

* ``sym_bruteforce``   - literal permutation average (the defining formula),
* ``sym_multiset``     - distinct-arrangement enumeration with multinomial
                         weights, plus a coefficient-extraction shortcut for
                         two distinct factors,
* ``sym_polarization`` - inclusion-exclusion over subset sums (2^l powers
                         instead of l! products).

General multivector factors are accepted everywhere: a grade-k blade acts
as the k-letter word of its generators, so every factor is first flattened
into paravector letters (linearity does the rest).  sym blocks never nest.

``basis_sym_power`` is the exact mod-4 closed form for products of basis
vectors, and ``sym_series`` extends the product to normally convergent
series (geometric inverses in particular).
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction
from itertools import permutations

import numpy as np

from .algebra import (
    Algebra,
    Multivector,
    Paravector,
    as_multivector,
    mul_batch,
    operator_norm,
)
from .errors import Divergent, LimitExceeded

BRUTEFORCE_LIMIT = 9

_WORD_LIMIT = 2_000_000  # distinct arrangements cap for sym_multiset


# -- factor flattening (Remark-2 semantics) ------------------------------

def _find_algebra(factors):
    for f in factors:
        if isinstance(f, (Multivector, Paravector)):
            return f.alg
    raise ValueError("factor list contains no algebra element")


def _letter_options(f: Multivector):
    """Decompose one factor into [(coeff, letters)] alternatives.

    Grade<=1 content stays a single whole letter (it is a paravector);
    every grade>=2 blade becomes the ascending word of its generators.
    """
    alg = f.alg
    opts = []
    low = f.grade_select(0, 1)
    has_vector = any(low.c[1 << i] != 0 for i in range(alg.n))
    if has_vector:
        opts.append((alg.coerce_scalar(1), (low,)))
    elif low.c[0] != 0:
        opts.append((low.c[0], ()))
    for mask in range(alg.dim):
        if mask.bit_count() >= 2 and f.c[mask] != 0:
            letters = tuple(alg.e(i + 1) for i in range(alg.n) if mask & (1 << i))
            opts.append((f.c[mask], letters))
    if not opts:
        opts.append((alg.coerce_scalar(0), ()))
    return opts


def flatten_factors(factors, alg: Algebra | None = None):
    """Expand a factor list into [(coefficient, tuple-of-paravector-letters)].

    The expansion distributes every factor over its blade decomposition;
    each returned letter is a grade<=1 multivector.
    """
    if alg is None:
        alg = _find_algebra(factors)
    terms = [(alg.coerce_scalar(1), ())]
    for f in factors:
        f = as_multivector(f, alg)
        alg.check_same(f.alg)
        opts = _letter_options(f)
        terms = [
            (c0 * c1, ls0 + ls1)
            for (c0, ls0) in terms
            for (c1, ls1) in opts
            if c0 != 0 and c1 != 0
        ] or [(alg.coerce_scalar(0), ())]
    return alg, terms


# -- the three engines ----------------------------------------------------

def _perm_average(alg: Algebra, letters, limit: int) -> Multivector:
    l = len(letters)
    if l == 0:
        return alg.one()
    if l > limit:
        raise LimitExceeded(f"bruteforce symmetrization of {l} > {limit} factors")
    total = alg.multivector()
    for perm in permutations(range(l)):
        word = letters[perm[0]]
        for j in perm[1:]:
            word = word * letters[j]
        total = total + word
    denom = math.factorial(l)
    return total / denom


def sym_bruteforce(factors, limit: int = BRUTEFORCE_LIMIT) -> Multivector:
    """Defining permutation average (1/l!) sum over all orderings."""
    alg, terms = flatten_factors(factors)
    out = alg.multivector()
    for coeff, letters in terms:
        out = out + _perm_average(alg, letters, limit) * coeff
    return out


def _multiset_permutations(counts):
    """Distinct arrangements of a multiset given as a list of counts."""
    total = sum(counts)
    seq = []
    counts = list(counts)

    def rec():
        if len(seq) == total:
            yield tuple(seq)
            return
        for i, c in enumerate(counts):
            if c:
                counts[i] -= 1
                seq.append(i)
                yield from rec()
                seq.pop()
                counts[i] += 1

    yield from rec()


def _two_distinct_extract(alg: Algebra, a: Multivector, p: int,
                          b: Multivector, q: int) -> Multivector:
    """sym(a^p b^q) = [t^q] (a + t b)^(p+q) / C(p+q, q).

    Coefficient extraction in t is valid verbatim for non-commuting a, b:
    the t^q coefficient of the expanded power is the sum of all words with
    q copies of b.
    """
    m = p + q
    poly = [alg.one()]
    for _ in range(m):
        nxt = [alg.multivector() for _ in range(len(poly) + 1)]
        for d, cmv in enumerate(poly):
            nxt[d] = nxt[d] + cmv * a
            nxt[d + 1] = nxt[d + 1] + cmv * b
        poly = nxt
    return poly[q] / math.comb(m, q)


def _sym_letter_multiset(alg: Algebra, grouped) -> Multivector:
    """Symmetrize a multiset of paravector letters [(letter, count)]."""
    grouped = [(mv, c) for mv, c in grouped if c > 0]
    if not grouped:
        return alg.one()
    if len(grouped) == 1:
        return grouped[0][0] ** grouped[0][1]
    if len(grouped) == 2:
        (a, p), (b, q) = grouped
        return _two_distinct_extract(alg, a, p, b, q)
    counts = [c for _, c in grouped]
    total = sum(counts)
    n_words = math.factorial(total)
    for c in counts:
        n_words //= math.factorial(c)
    if n_words > _WORD_LIMIT:
        raise LimitExceeded(f"{n_words} distinct arrangements exceed the cap")
    letters = [mv for mv, _ in grouped]
    acc = alg.multivector()
    for word in _multiset_permutations(counts):
        prod = letters[word[0]]
        for i in word[1:]:
            prod = prod * letters[i]
        acc = acc + prod
    # each distinct word stands for prod(c_i!) equal permutations, so the
    # permutation average is the plain average over distinct words
    weight = Fraction(1, n_words)
    return acc * (weight if alg.field == "exact" else float(weight))


def _group_letters(letters):
    groups = []
    for mv in letters:
        for i, (g, c) in enumerate(groups):
            if g == mv:
                groups[i] = (g, c + 1)
                break
        else:
            groups.append((mv, 1))
    return groups


def sym_multiset(pairs) -> Multivector:
    """Symmetrized product of a multiset [(factor, multiplicity)].

    Equals sym_bruteforce of the expanded factor list; enumeration walks
    distinct arrangements only, and the two-distinct-factor case uses the
    t-coefficient extraction from (a + t b)^(p+q).
    """
    pairs = list(pairs)
    if sum(c for _, c in pairs) < 1:
        raise ValueError("total multiplicity must be >= 1")
    expanded = []
    for f, c in pairs:
        expanded.extend([f] * c)
    alg, terms = flatten_factors(expanded)
    out = alg.multivector()
    for coeff, letters in terms:
        out = out + _sym_letter_multiset(alg, _group_letters(letters)) * coeff
    return out


def _polarize_letters(alg: Algebra, letters) -> Multivector:
    l = len(letters)
    if l == 0:
        return alg.one()
    if l > 22:
        raise LimitExceeded(f"polarization over 2^{l} subsets refused")
    acc = alg.multivector()
    for mask in range(1, 1 << l):
        s = alg.multivector()
        for i in range(l):
            if mask & (1 << i):
                s = s + letters[i]
        term = s ** l
        if (l - mask.bit_count()) & 1:
            acc = acc - term
        else:
            acc = acc + term
    return acc / math.factorial(l)


def sym_polarization(factors) -> Multivector:
    """Inclusion-exclusion form (1/l!) sum_S (-1)^(l-|S|) (sum_{i in S} u_i)^l."""
    alg, terms = flatten_factors(factors)
    out = alg.multivector()
    for coeff, letters in terms:
        out = out + _polarize_letters(alg, letters) * coeff
    return out


def basis_sym_power(alg: Algebra, indices) -> Multivector:
    """Exact closed form of sym over a multiset of basis vectors.

    ``indices`` is a multiset over {0..n}; index 0 (the unit) is dropped.
    Write the multiplicity of each remaining direction as m_c and H for
    their sum.  The generating identity [t_1..t_H] (sum t_h e_{i_h})^H
    together with v^2 = -|v|^2 gives: the value vanishes unless at most
    one m_c is odd, and otherwise equals

        (-1)^(H//2) * (H//2)! * prod m_c! / (H! * prod floor(m_c/2)!)

    times e_c for the odd direction (H odd) or times 1 (H even).  The
    published case table keeps only the all-equal and single-exception
    patterns and zeroes the rest; sym(e1^3 e2^2) = e1/5 shows the missing
    all-even/one-odd patterns (see the regression tests).
    """
    idx = [int(i) for i in indices if int(i) != 0]
    for i in idx:
        if not 1 <= i <= alg.n:
            raise ValueError(f"basis index {i} out of range for n={alg.n}")
    h = len(idx)
    if h == 0:
        return alg.one()
    counts = Counter(idx)
    odd = [c for c, m in counts.items() if m % 2 == 1]
    if len(odd) >= 2:
        return alg.multivector()
    s = h // 2
    num = math.factorial(s)
    den = math.factorial(h)
    for c, m in counts.items():
        num *= math.factorial(m)
        den *= math.factorial(m // 2)
    val = Fraction(num, den)
    if s % 2 == 1:
        val = -val
    scale = val if alg.field == "exact" else float(val)
    if odd:
        return alg.e(odd[0]) * scale
    return alg.scalar(scale)


_ENGINES = {}


def sym(factors, engine: str = "auto") -> Multivector:
    """Front door: symmetrize a factor list with a selectable engine."""
    try:
        fn = _ENGINES[engine]
    except KeyError:
        raise ValueError(f"unknown engine {engine!r}") from None
    return fn(factors)


def _sym_auto(factors) -> Multivector:
    """Engine dispatch: closed form for pure-basis letters, multiset
    enumeration up to 3 distinct letters, polarization beyond."""
    alg, terms = flatten_factors(factors)
    out = alg.multivector()
    for coeff, letters in terms:
        basis_idx = _pure_basis_indices(alg, letters)
        if basis_idx is not None:
            scale, idx = basis_idx
            out = out + basis_sym_power(alg, idx) * (coeff * scale)
            continue
        groups = _group_letters(letters)
        if len(groups) <= 3:
            out = out + _sym_letter_multiset(alg, groups) * coeff
        else:
            out = out + _polarize_letters(alg, letters) * coeff
    return out


def _pure_basis_indices(alg: Algebra, letters):
    """If every letter is a scaled single generator, return (scale, indices)."""
    scale = alg.coerce_scalar(1)
    idx = []
    for mv in letters:
        nz = np.flatnonzero(np.asarray([v != 0 for v in mv.c]))
        if len(nz) != 1:
            return None
        mask = int(nz[0])
        if mask.bit_count() != 1:
            return None
        scale = scale * mv.c[mask]
        idx.append(mask.bit_length())
    return scale, idx


_ENGINES.update(
    auto=_sym_auto,
    bruteforce=sym_bruteforce,
    multiset=lambda fs: sym_multiset([(f, 1) for f in fs]),
    polarization=sym_polarization,
)


def sym_recursion_forms(factors):
    """The three factorizations of sym (left, right, and their mean).

    For factors u_1..u_l these are (1/l) sum_i u_i sym(rest), the mirror
    with u_i on the right, and the average of the two; all agree with the
    full symmetrization.
    """
    factors = [f if isinstance(f, Multivector) else as_multivector(f, _find_algebra(factors))
               for f in factors]
    l = len(factors)
    if l < 2:
        raise ValueError("need at least two factors")
    alg = factors[0].alg
    left = alg.multivector()
    right = alg.multivector()
    for i in range(l):
        rest = factors[:i] + factors[i + 1:]
        s = sym_bruteforce(rest)
        left = left + factors[i] * s
        right = right + s * factors[i]
    left = left / l
    right = right / l
    mean = (left + right) / 2
    return left, right, mean


# -- two-paravector powers in closed form ---------------------------------

def _poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a != 0:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def vec_sym_power(alg: Algebra, a, b, p: int, q: int):
    """sym(a^p b^q) for two plain vectors given as coordinate arrays.

    Uses [t^q](a + t b)^(p+q) / C(p+q, q).  Even powers of a vector are the
    scalars (-|v|^2)^k, so the power reduces to coefficients of the scalar
    polynomial (|a|^2 + 2 t a.b + t^2 |b|^2)^m.

    Returns (scalar_coeff, coeff_of_a, coeff_of_b).
    """
    s = p + q
    if s == 0:
        return 1, 0, 0
    alpha = (a * a).sum()
    beta = (a * b).sum()
    gamma = (b * b).sum()
    m, odd = divmod(s, 2)
    poly = [1]
    base = [alpha, 2 * beta, gamma]
    for _ in range(m):
        poly = _poly_mul(poly, base)
    sign = -1 if m % 2 else 1
    comb = math.comb(s, q)

    def coef(j):
        return poly[j] if 0 <= j < len(poly) else 0

    if not odd:
        return sign * _div(coef(q), comb), 0, 0
    return 0, sign * _div(coef(q), comb), sign * _div(coef(q - 1), comb)


def _div(x, c):
    if isinstance(x, Fraction) or isinstance(x, int):
        return Fraction(x) / c
    return x / c


def sym_two_paravector_powers(u: Paravector, v: Paravector, p: int, q: int) -> Multivector:
    """sym(u^p v^q) for two paravectors, in closed form.

    Binomial expansion over the commuting scalar parts reduces everything
    to vec_sym_power of the two vector parts; cost is O((p+q)^2) scalar
    polynomial work, no permutation enumeration.
    """
    alg = u.alg
    alg.check_same(v.alg)
    a0, b0 = u.u0, v.u0
    acc_scalar = 0
    acc_a = 0
    acc_b = 0
    for i in range(p + 1):
        ci = math.comb(p, i) * a0 ** (p - i)
        if ci == 0:
            continue
        for j in range(q + 1):
            cj = math.comb(q, j) * b0 ** (q - j)
            if cj == 0:
                continue
            s0, sa, sb = vec_sym_power(alg, u.vec, v.vec, i, j)
            w = ci * cj
            acc_scalar = acc_scalar + w * s0
            acc_a = acc_a + w * sa
            acc_b = acc_b + w * sb
    out = {0: acc_scalar}
    for k in range(alg.n):
        out[1 << k] = acc_a * u.vec[k] + acc_b * v.vec[k]
    if alg.field != "exact":
        cplx = any(isinstance(x, complex) or np.iscomplexobj(x) for x in out.values())
        target = alg.to_field("complex") if (cplx and alg.field == "real") else alg
        return target.multivector({k: v for k, v in out.items()})
    return alg.multivector(out)


# -- series extension ------------------------------------------------------

def sym_series(terms, tol: float, max_terms: int = 100_000,
               engine: str = "auto") -> Multivector:
    """Sum sym(a_k) for a normally convergent series of factor lists.

    ``terms`` yields (factor_list, tail_bound) pairs where tail_bound
    dominates the norm sum of everything still to come; summation stops
    once it drops below ``tol``.  A non-decreasing tail bound or running
    past ``max_terms`` raises Divergent.
    """
    total = None
    prev_tail = math.inf
    for k, (factors, tail) in enumerate(terms):
        val = sym(factors, engine)
        total = val if total is None else total + val
        if tail > prev_tail * (1 + 1e-12) + 1e-300:
            raise Divergent("tail bound is not decreasing")
        prev_tail = tail
        if tail < tol:
            return total
        if k + 1 >= max_terms:
            break
    raise Divergent(f"series tail still {prev_tail:.3g} after {max_terms} terms")


def sym_geometric_inverse(a, b, tol: float = 1e-12,
                          max_terms: int = 100_000) -> Multivector:
    """sym(a^-1 b) through the geometric series sum_k sym((1-a)^k b).

    Requires |1 - a| < 1 in the operator norm.
    """
    alg = _find_algebra([a, b])
    a = as_multivector(a, alg)
    b = as_multivector(b, alg)
    y = alg.one() - a
    r = operator_norm(y)
    if r >= 1.0 - 1e-12:
        raise Divergent(f"|1 - a| = {r:.6g} is not < 1")
    bnorm = operator_norm(b)
    if bnorm == 0.0:
        return alg.multivector()
    total = alg.multivector()
    for k in range(max_terms):
        total = total + sym_multiset([(y, k), (b, 1)])
        tail = r ** (k + 1) * bnorm / (1.0 - r)
        if tail < tol:
            return total
    raise Divergent("geometric series exceeded the term cap")


def sym_double_geometric_inverse(u: Paravector, v: Paravector,
                                 tol: float = 1e-12) -> Multivector:
    """sym(u^-1 v^-1) by the double geometric series (series oracle).

    Requires |1-u| < 1 and |1-v| < 1; terms are grouped by total degree
    with the exact tail bound of sum (m+1) rho^m.
    """
    alg = u.alg
    one = alg.paravector(1.0)
    y1 = one + u * (-1)
    y2 = one + v * (-1)
    r1, r2 = y1.norm(), y2.norm()
    rho = max(r1, r2)
    if rho >= 1.0 - 1e-12:
        raise Divergent(f"|1-u| or |1-v| = {rho:.6g} is not < 1")
    total = alg.multivector()
    m = 0
    while True:
        for j in range(m + 1):
            total = total + sym_two_paravector_powers(y1, y2, j, m - j)
        tail = rho ** (m + 1) * ((m + 2) - (m + 1) * rho) / (1.0 - rho) ** 2
        if tail < tol:
            return total
        m += 1
        if m > 5000:
            raise Divergent("double geometric series exceeded the term cap")


# -- batched brute force (acceptance-scale helper) -------------------------

def sym_bruteforce_many(alg: Algebra, stacks: np.ndarray,
                        limit: int = BRUTEFORCE_LIMIT) -> np.ndarray:
    """Permutation average over a (B, l, 2^n) stack of factor lists.

    Shares permutation prefixes (lexicographic order) and accumulates in
    chunks with pairwise summation so the closure residual stays at the
    rounding floor.  Factors must already be flattened (grade <= 1).
    """
    B, l, dim = stacks.shape
    if l > limit:
        raise LimitExceeded(f"bruteforce symmetrization of {l} > {limit} factors")
    perms = list(permutations(range(l)))
    chunk = []
    partial_sums = []
    stack_cache = [None] * l  # prefix products
    prev = None
    for perm in perms:
        start = 0
        if prev is not None:
            while start < l and perm[start] == prev[start]:
                start += 1
        if start == 0:
            stack_cache[0] = stacks[:, perm[0]]
            start = 1
        for j in range(start, l):
            stack_cache[j] = mul_batch(alg, stack_cache[j - 1], stacks[:, perm[j]])
        chunk.append(stack_cache[l - 1])
        prev = perm
        if len(chunk) == 512:
            partial_sums.append(np.sum(chunk, axis=0))
            chunk = []
    if chunk:
        partial_sums.append(np.sum(chunk, axis=0))
    return np.sum(partial_sums, axis=0) / math.factorial(l)


def sym_polarization_many(alg: Algebra, stacks: np.ndarray) -> np.ndarray:
    """Polarization engine over a (B, l, 2^n) stack of factor lists."""
    B, l, dim = stacks.shape
    acc = np.zeros((B, dim), dtype=stacks.dtype)
    for mask in range(1, 1 << l):
        pick = [i for i in range(l) if mask & (1 << i)]
        s = stacks[:, pick].sum(axis=1)
        term = s
        for _ in range(l - 1):
            term = mul_batch(alg, term, s)
        if (l - len(pick)) & 1:
            acc -= term
        else:
            acc += term
    return acc / math.factorial(l)
