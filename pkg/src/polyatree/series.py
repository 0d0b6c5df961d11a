"""Exact power series and coefficient tables for rooted-tree generating functions.

Everything here is integer or fractions.Fraction arithmetic; no floats.
Three coefficient families appear throughout:

  t_n  counts of unlabeled rooted trees on n nodes (OEIS A000081),
  d_n  total automorphism weight of forests in which every distinct tree
       occurs at least twice ("repeated forests"),
  c_n = n^(n-1)/n!, the coefficients of the Cayley tree function
       C(z) = z*exp(C(z)),

tied together by the composition identity T(z) = C(z*D(z)), where T is the
ordinary generating function of t_n and D the one of d_n.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ConsistencyError, UsageError

DEFAULT_ORDER = 128

# ---------------------------------------------------------------------------
# coefficient tables

_t_cache: list[int] = [0, 1]
_s_cache: list[int] = [0, 1]  # s[i] = sum of m*t_m over divisors m of i


def _extend_tree_counts(N: int) -> None:
    t, s = _t_cache, _s_cache
    n0 = len(t)
    if N < n0:
        return
    s.extend(0 for _ in range(len(s), N + 1))
    # seed the divisor sums with contributions of all previously known t_m
    for m in range(1, n0):
        mt = m * t[m]
        start = ((n0 + m - 1) // m) * m
        for i in range(start, N + 1, m):
            s[i] += mt
    for n in range(n0, N + 1):
        acc = 0
        for i in range(1, n):
            acc += t[n - i] * s[i]
        q, r = divmod(acc, n - 1)
        if r:
            raise ConsistencyError(f"tree-count recurrence not divisible at n={n}")
        t.append(q)
        mt = n * q
        for i in range(n, N + 1, n):
            s[i] += mt


def tree_count_table(N: int) -> list[int]:
    """[0, t_1, ..., t_N]; index 0 is a zero sentinel."""
    if N < 1:
        raise UsageError("tree counts need N >= 1")
    _extend_tree_counts(N)
    return _t_cache[: N + 1]


def polya_counts(N: int) -> list[int]:
    """The counts t_1..t_N of unlabeled rooted trees."""
    return tree_count_table(N)[1:]


def divisor_weight_sums(N: int) -> list[int]:
    """[0, s_1, ..., s_N] with s_i = sum_{m | i} m*t_m."""
    if N < 1:
        raise UsageError("divisor sums need N >= 1")
    _extend_tree_counts(N)
    return _s_cache[: N + 1]


def cayley_weights(N: int) -> list[Fraction]:
    """c_1..c_N with c_n = n^(n-1)/n! (labeled rooted trees over n!)."""
    if N < 1:
        raise UsageError("Cayley weights need N >= 1")
    out = []
    fact = 1
    for n in range(1, N + 1):
        fact *= n
        out.append(Fraction(n ** (n - 1), fact))
    return out


def dforest_weights(N: int) -> list[Fraction]:
    """d_0..d_N, computed by the convolution recurrence

        n*d_n = sum_{i=2..n} d_{n-i} * (s_i - i*t_i),    d_0 = 1, d_1 = 0,

    and cross-checked against D(z) = exp(sum_{i>=2} T(z^i)/i).
    """
    if N < 0:
        raise UsageError("forest weights need N >= 0")
    if N == 0:
        return [Fraction(1)]
    t = tree_count_table(max(N, 1))
    s = divisor_weight_sums(max(N, 1))
    d = [Fraction(1), Fraction(0)]
    for n in range(2, N + 1):
        acc = Fraction(0)
        for i in range(2, n + 1):
            acc += d[n - i] * (s[i] - i * t[i])
        d.append(acc / n)
    check = _dforest_by_exp(N)
    if check != d:
        raise ConsistencyError("forest-weight recurrence disagrees with exp route")
    return d


def _dforest_by_exp(N: int) -> list[Fraction]:
    t = tree_count_table(N) if N >= 1 else [0]
    g = [Fraction(0)] * (N + 1)
    for i in range(2, N + 1):
        for k in range(1, N // i + 1):
            g[i * k] += Fraction(t[k], i)
    return _exp_coeffs(g)


def _exp_coeffs(g: Sequence[Fraction]) -> list[Fraction]:
    # exp of a series with zero constant term: n*E_n = sum_{k=1..n} k*g_k*E_{n-k}
    if g[0] != 0:
        raise UsageError("series exp needs zero constant term")
    N = len(g) - 1
    e = [Fraction(1)] + [Fraction(0)] * N
    for n in range(1, N + 1):
        acc = Fraction(0)
        for k in range(1, n + 1):
            if g[k]:
                acc += k * g[k] * e[n - k]
        e[n] = acc / n
    return e


# ---------------------------------------------------------------------------
# truncated exact series


class ExactSeries:
    """A truncated power series with Fraction coefficients z^0..z^order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Fraction | int]):
        self.coeffs: tuple[Fraction, ...] = tuple(Fraction(c) for c in coeffs)
        if not self.coeffs:
            raise UsageError("a series needs at least the constant coefficient")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> Fraction:
        if not 0 <= n <= self.order:
            raise UsageError(f"coefficient index {n} outside 0..{self.order}")
        return self.coeffs[n]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ExactSeries) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        head = ", ".join(str(c) for c in self.coeffs[:6])
        tail = ", ..." if self.order >= 6 else ""
        return f"ExactSeries([{head}{tail}], order={self.order})"

    def truncate(self, order: int) -> "ExactSeries":
        if order < 0:
            raise UsageError("order must be >= 0")
        if order <= self.order:
            return ExactSeries(self.coeffs[: order + 1])
        return ExactSeries(self.coeffs + (Fraction(0),) * (order - self.order))

    def __add__(self, other: "ExactSeries") -> "ExactSeries":
        n = min(self.order, other.order)
        return ExactSeries(a + b for a, b in zip(self.coeffs[: n + 1], other.coeffs[: n + 1]))

    def __sub__(self, other: "ExactSeries") -> "ExactSeries":
        n = min(self.order, other.order)
        return ExactSeries(a - b for a, b in zip(self.coeffs[: n + 1], other.coeffs[: n + 1]))

    def __mul__(self, other: "ExactSeries | int | Fraction") -> "ExactSeries":
        if isinstance(other, (int, Fraction)):
            return ExactSeries(c * other for c in self.coeffs)
        N = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = [Fraction(0)] * (N + 1)
        for i in range(min(len(a), N + 1)):
            ai = a[i]
            if not ai:
                continue
            for j in range(min(len(b), N + 1 - i)):
                if b[j]:
                    out[i + j] += ai * b[j]
        return ExactSeries(out)

    __rmul__ = __mul__

    def divide(self, other: "ExactSeries") -> "ExactSeries":
        """Series quotient self/other; other must have a nonzero constant term."""
        if other.coeffs[0] == 0:
            raise UsageError("series division needs a unit denominator")
        N = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out: list[Fraction] = []
        for n in range(N + 1):
            acc = a[n]
            for j in range(n):
                if out[j] and b[n - j]:
                    acc -= out[j] * b[n - j]
            out.append(acc / b[0])
        return ExactSeries(out)

    def exp(self) -> "ExactSeries":
        return ExactSeries(_exp_coeffs(self.coeffs))

    def derivative(self) -> "ExactSeries":
        if self.order == 0:
            return ExactSeries([Fraction(0)])
        return ExactSeries(k * self.coeffs[k] for k in range(1, self.order + 1))

    def __call__(self, x):
        # Horner; works for Fraction, float, mpmath types
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x
            acc = acc + c
        return acc


def series_compose(outer: ExactSeries, inner: ExactSeries, N: int) -> ExactSeries:
    """outer(inner(z)) truncated at order N; inner must have no constant term."""
    if N < 0:
        raise UsageError("order must be >= 0")
    if inner.coeffs[0] != 0:
        raise UsageError("series composition needs inner constant term 0")
    inner = inner.truncate(N)
    acc = ExactSeries([Fraction(0)] * (N + 1))
    for k in range(min(outer.order, N), -1, -1):
        acc = acc * inner
        acc = ExactSeries((acc.coeffs[0] + outer.coeffs[k],) + acc.coeffs[1:])
    return acc


def tree_series(N: int) -> ExactSeries:
    """T(z) = sum t_n z^n to order N."""
    return ExactSeries(tree_count_table(N))


def forest_series(N: int) -> ExactSeries:
    """D(z) = sum d_n z^n to order N."""
    return ExactSeries(dforest_weights(N))


def cayley_series(N: int) -> ExactSeries:
    """C(z) = sum n^(n-1)/n! z^n to order N."""
    return ExactSeries([Fraction(0)] + cayley_weights(N) if N >= 1 else [Fraction(0)])


def pointed_series(N: int) -> list[int]:
    """Coefficients z^1..z^N of T/(1-T); these count trees with one marked
    node modulo symmetry (OEIS A000107) and are always integers."""
    if N < 1:
        raise UsageError("pointed series needs N >= 1")
    t = tree_count_table(N)
    p = [0] * (N + 1)
    for n in range(1, N + 1):
        acc = t[n]
        for k in range(1, n):
            acc += t[k] * p[n - k]
        p[n] = acc
    return p[1:]


# ---------------------------------------------------------------------------
# univariate polynomials in the marking variable u


class UPolynomial:
    """Polynomial in u with Fraction coefficients, ascending order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Fraction | int]):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, Fraction | int]]) -> "UPolynomial":
        items = dict()
        for k, v in pairs:
            items[k] = items.get(k, Fraction(0)) + Fraction(v)
        deg = max(items) if items else 0
        return cls(items.get(k, Fraction(0)) for k in range(deg + 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else 0

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def items(self) -> list[tuple[int, Fraction]]:
        return [(k, c) for k, c in enumerate(self.coeffs) if c]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, UPolynomial) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "UPolynomial(0)"
        terms = " + ".join(f"({c})u^{k}" for k, c in self.items())
        return f"UPolynomial({terms})"

    def __add__(self, other: "UPolynomial") -> "UPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return UPolynomial(self.coeff(k) + other.coeff(k) for k in range(n))

    def __mul__(self, other: "UPolynomial | int | Fraction") -> "UPolynomial":
        if isinstance(other, (int, Fraction)):
            return UPolynomial(c * other for c in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return UPolynomial([])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    out[i + j] += a * b
        return UPolynomial(out)

    __rmul__ = __mul__

    def shift(self, k: int) -> "UPolynomial":
        """Multiply by u^k."""
        if not self.coeffs:
            return self
        return UPolynomial((Fraction(0),) * k + self.coeffs)

    def derivative(self) -> "UPolynomial":
        return UPolynomial(k * c for k, c in enumerate(self.coeffs) if k >= 1)

    def __call__(self, x):
        acc = 0 * x if not isinstance(x, (int, Fraction)) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc


UPOLY_ZERO = UPolynomial([])
UPOLY_ONE = UPolynomial([1])


class BivariatePolynomialTable:
    """Rows n = 1..order of the node-marked tree polynomials t_{c,n}(u),
    where [u^k] of row n weights trees of size n whose marked fixed-point
    set has size k. Row n has u-degree exactly n."""

    __slots__ = ("order", "rows")

    def __init__(self, rows: Sequence[UPolynomial]):
        self.rows: tuple[UPolynomial, ...] = tuple(rows)
        self.order = len(self.rows) - 1

    def row(self, n: int) -> UPolynomial:
        if not 1 <= n <= self.order:
            raise UsageError(f"row {n} outside 1..{self.order}")
        return self.rows[n]


def ctree_polynomials(N: int) -> BivariatePolynomialTable:
    """Expand C(u*z*D(z)) to order N in z: row n collects the u-polynomial
    attached to z^n. The u-degree of row n is n and its top coefficient is
    the Cayley weight c_n."""
    if N < 1:
        raise UsageError("polynomial table needs N >= 1")
    d = dforest_weights(N)
    x = [Fraction(0)] * (N + 1)
    for n in range(1, N + 1):
        x[n] = d[n - 1]  # z*D(z)
    c = cayley_weights(N)
    rows: list[dict[int, Fraction]] = [dict() for _ in range(N + 1)]
    power = list(x)  # (z*D)^k, starting at k=1
    for k in range(1, N + 1):
        ck = c[k - 1]
        for n in range(k, N + 1):
            if power[n]:
                rows[n][k] = ck * power[n]
        if k < N:
            power = _mul_trunc(power, x, N)
    out = [UPOLY_ZERO]
    for n in range(1, N + 1):
        out.append(UPolynomial.from_pairs(rows[n].items()))
    return BivariatePolynomialTable(out)


def _mul_trunc(a: list[Fraction], b: list[Fraction], N: int) -> list[Fraction]:
    out = [Fraction(0)] * (N + 1)
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j in range(min(len(b), N + 1 - i)):
            if b[j]:
                out[i + j] += ai * b[j]
    return out


# ---------------------------------------------------------------------------
# exact finite-n forest-size law


def exact_forest_prob(n: int, m: int) -> Fraction:
    """P(the forest attached at a random fixed point has size m), exactly,
    for uniform trees of size n with fixed points weighted by multiplicity:

        [z^n] ( T_c(z) * d_m * z^m / D(z) )  /  [z^n] T_c(z),

    with T_c = T/(1-T). The m-sum over 0..n telescopes to 1.
    """
    if n < 1:
        raise UsageError("exact_forest_prob needs n >= 1")
    if m < 0 or m > n:
        raise UsageError("forest size m must lie in 0..n")
    t = tree_count_table(n)
    tc = [0] * (n + 1)
    for k in range(1, n + 1):
        acc = t[k]
        for i in range(1, k):
            acc += t[i] * tc[k - i]
        tc[k] = acc
    d = dforest_weights(n)
    # E = T_c / D by direct division (D has constant term 1)
    e = [Fraction(0)] * (n + 1)
    for k in range(1, n + 1):
        acc = Fraction(tc[k])
        for j in range(1, k):
            if e[j] and d[k - j]:
                acc -= e[j] * d[k - j]
        e[k] = acc
    return d[m] * e[n - m] / tc[n]


def fraction_str(q: Fraction | int) -> str:
    """Serialize a rational as "p/q" in lowest terms, positive denominator."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"
