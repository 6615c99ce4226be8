"""Exact truncated power series with the multiset (Polya) exponential.

Two series types live here:

* ``TruncSeries`` -- univariate, dense coefficient list, exact ints or
  Fractions.  Everything downstream (tree counts, height generating
  functions, the not-simply-generated witness) is built from it.
* ``LevelSeries`` -- series in x with one to three extra marking
  variables, stored sparsely as {(n, m1, ..., md): count}.  Counts are
  nonnegative integers; the marks track level occupancies.

All arithmetic is exact.  Mixing orders truncates to the smaller order.
The multiset exponential exp(sum_i f(x^i)/i) is computed through the
integer recurrence n*g_n = sum_k Q_k g_{n-k} with
Q_k = sum_{d|k} d * f_d(marks^(k/d)), which never leaves the integers
when f is integral.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache


@lru_cache(maxsize=None)
def divisors(n: int) -> tuple:
    """Sorted divisors of n >= 1."""
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i != n // i:
                large.append(n // i)
        i += 1
    return tuple(small + large[::-1])


class TruncSeries:
    """Truncated univariate power series, exact coefficients, order N.

    coeffs[k] is the coefficient of x^k; len(coeffs) == order + 1.
    Instances are immutable (coefficients held in a tuple).
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs, order=None):
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError("order must be >= 0")
        if len(coeffs) < order + 1:
            coeffs += [0] * (order + 1 - len(coeffs))
        self.coeffs = tuple(coeffs[: order + 1])
        self.order = order

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, order):
        return cls([0], order)

    @classmethod
    def one(cls, order):
        return cls([1], order)

    @classmethod
    def x(cls, order):
        return cls([0, 1], order)

    # -- basics -------------------------------------------------------

    def __getitem__(self, k):
        return self.coeffs[k] if 0 <= k <= self.order else 0

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        n = min(self.order, other.order)
        return all(self[k] == other[k] for k in range(n + 1))

    def __hash__(self):
        return hash((self.coeffs, self.order))

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[: min(8, self.order + 1)])
        return f"TruncSeries([{head}, ...], order={self.order})"

    def truncate(self, order):
        if order >= self.order:
            return self
        return TruncSeries(self.coeffs[: order + 1], order)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            c = list(self.coeffs)
            c[0] = c[0] + other
            return TruncSeries(c, self.order)
        n = min(self.order, other.order)
        return TruncSeries([self[k] + other[k] for k in range(n + 1)], n)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return TruncSeries([c * other for c in self.coeffs], self.order)
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = [0] * (n + 1)
        for i in range(min(len(a) - 1, n) + 1):
            ai = a[i]
            if not ai:
                continue
            for j in range(min(len(b) - 1, n - i) + 1):
                if b[j]:
                    out[i + j] += ai * b[j]
        return TruncSeries(out, n)

    __rmul__ = __mul__

    def shift(self, k=1):
        """Multiply by x^k."""
        return TruncSeries([0] * k + list(self.coeffs), self.order)

    def is_integral(self):
        return all(
            isinstance(c, int) or (isinstance(c, Fraction) and c.denominator == 1)
            for c in self.coeffs
        )


def substitute_power(f: TruncSeries, i: int) -> TruncSeries:
    """f(x) -> f(x^i), truncated at f's order."""
    if i < 1:
        raise ValueError("substitution power must be >= 1")
    if i == 1:
        return f
    out = [0] * (f.order + 1)
    for k in range(f.order // i + 1):
        out[k * i] = f.coeffs[k]
    return TruncSeries(out, f.order)


def series_exp(f: TruncSeries) -> TruncSeries:
    """exp(f) for f with zero constant term, via g' = f'.g.

    Coefficients come out as Fractions in general (the recurrence
    divides by n); they are exact.
    """
    if f[0] != 0:
        raise ValueError("series_exp requires zero constant term")
    n = f.order
    g = [Fraction(0)] * (n + 1)
    g[0] = Fraction(1)
    fc = f.coeffs
    for m in range(1, n + 1):
        acc = Fraction(0)
        for j in range(1, m + 1):
            if fc[j]:
                acc += j * Fraction(fc[j]) * g[m - j]
        g[m] = acc / m
    return TruncSeries([c if c.denominator != 1 else int(c) for c in g], n)


def series_log(f: TruncSeries) -> TruncSeries:
    """log(f) for f with constant term 1, via L' = f'/f."""
    if f[0] != 1:
        raise ValueError("series_log requires constant term 1")
    n = f.order
    out = [Fraction(0)] * (n + 1)
    fc = f.coeffs
    for m in range(1, n + 1):
        acc = m * Fraction(fc[m])
        for j in range(1, m):
            acc -= j * out[j] * fc[m - j]
        out[m] = acc / m
    return TruncSeries([c if c.denominator != 1 else int(c) for c in out], n)


def polya_exp(f: TruncSeries) -> TruncSeries:
    """Multiset exponential exp(sum_{i>=1} f(x^i)/i), truncated.

    Uses the integer recurrence n*g_n = sum_{k=1}^{n} Q_k g_{n-k} with
    Q_k = sum_{d|k} d*f_d, so integral input gives integral output with
    no rational intermediates.
    """
    if f[0] != 0:
        raise ValueError("polya_exp requires zero constant term")
    n = f.order
    fc = f.coeffs
    q = [0] * (n + 1)
    for k in range(1, n + 1):
        q[k] = sum(d * fc[d] for d in divisors(k))
    g = [0] * (n + 1)
    g[0] = 1
    integral = f.is_integral()
    for m in range(1, n + 1):
        acc = 0
        for k in range(1, m + 1):
            if q[k]:
                acc += q[k] * g[m - k]
        if integral:
            gm, rem = divmod(acc, m)
            if rem:
                raise ArithmeticError("multiset recurrence lost integrality")
            g[m] = gm
        else:
            gm = Fraction(acc, m)
            g[m] = int(gm) if gm.denominator == 1 else gm
    return TruncSeries(g, n)


def functional_inverse(f: TruncSeries) -> TruncSeries:
    """Compositional inverse g with f(g(x)) = x, for f = x + O(x^2).

    Term-by-term: with g known through x^(n-1), the x^n coefficient of
    f(g) is g_n plus an already-determined remainder, so g_n drops out
    linearly.  Exact; O(N^2) series multiplications.
    """
    if f[0] != 0:
        raise ValueError("functional inverse requires zero constant term")
    if f[1] != 1:
        raise ValueError("functional inverse requires unit linear coefficient")
    n = f.order
    g = [0] * (n + 1)
    g[1] = 1
    # powers[j] tracks g(x)^j mod x^(m+1), rebuilt as g extends
    for m in range(2, n + 1):
        gs = TruncSeries(g[: m + 1], m)
        comp = TruncSeries([0], m)
        p = TruncSeries([1], m)
        for j in range(1, m + 1):
            p = p * gs
            if f.coeffs[j]:
                comp = comp + p * f.coeffs[j]
        g[m] = -comp[m]
    return TruncSeries(g, n)


def compose(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    """f(g(x)) for g with zero constant term."""
    if g[0] != 0:
        raise ValueError("composition requires zero constant term in inner series")
    n = min(f.order, g.order)
    out = TruncSeries([f[0]], n)
    p = TruncSeries([1], n)
    for j in range(1, n + 1):
        p = p * g
        if f[j]:
            out = out + p * f[j]
    return out


class LevelSeries:
    """Series in x with d marking variables, sparse exact counts.

    data maps (n, m_1, ..., m_d) -> integer coefficient, n = x-degree,
    m_j = degree in the j-th mark.  All stored coefficients are nonzero;
    counting series keep them nonnegative.
    """

    __slots__ = ("data", "order", "arity")

    def __init__(self, data, order, arity):
        if arity < 1 or arity > 3:
            raise ValueError("arity must be 1, 2 or 3")
        self.data = {k: v for k, v in data.items() if v}
        self.order = order
        self.arity = arity

    @classmethod
    def zero(cls, order, arity=1):
        return cls({}, order, arity)

    def coeff(self, n, marks):
        return self.data.get((n, *marks), 0)

    def __eq__(self, other):
        if not isinstance(other, LevelSeries):
            return NotImplemented
        if self.arity != other.arity:
            return False
        n = min(self.order, other.order)
        a = {k: v for k, v in self.data.items() if k[0] <= n}
        b = {k: v for k, v in other.data.items() if k[0] <= n}
        return a == b

    def __repr__(self):
        return (
            f"LevelSeries(order={self.order}, arity={self.arity}, "
            f"terms={len(self.data)})"
        )

    def truncate(self, order):
        if order >= self.order:
            return self
        return LevelSeries(
            {k: v for k, v in self.data.items() if k[0] <= order}, order, self.arity
        )

    def __add__(self, other):
        n = min(self.order, other.order)
        out = dict(self.truncate(n).data)
        for k, v in other.data.items():
            if k[0] <= n:
                out[k] = out.get(k, 0) + v
        return LevelSeries(out, n, self.arity)

    def __mul__(self, other):
        if isinstance(other, int):
            return LevelSeries(
                {k: v * other for k, v in self.data.items()}, self.order, self.arity
            )
        n = min(self.order, other.order)
        out = {}
        items = sorted(self.data.items())
        jtems = sorted(other.data.items())
        for ka, va in items:
            na = ka[0]
            if na > n:
                break
            for kb, vb in jtems:
                nb = kb[0]
                if na + nb > n:
                    break
                key = (na + nb, *(a + b for a, b in zip(ka[1:], kb[1:])))
                out[key] = out.get(key, 0) + va * vb
        return LevelSeries(out, n, self.arity)

    __rmul__ = __mul__

    def shift_x(self):
        """Multiply by x."""
        return LevelSeries(
            {(k[0] + 1, *k[1:]): v for k, v in self.data.items() if k[0] + 1 <= self.order},
            self.order,
            self.arity,
        )

    def mark_root(self):
        """Multiply by the first mark (u * self)."""
        out = {}
        for k, v in self.data.items():
            out[(k[0], k[1] + 1, *k[2:])] = v
        return LevelSeries(out, self.order, self.arity)

    def substitute_power(self, i):
        """(x, u_1, ..., u_d) -> (x^i, u_1^i, ..., u_d^i)."""
        if i < 1:
            raise ValueError("substitution power must be >= 1")
        if i == 1:
            return self
        out = {}
        for k, v in self.data.items():
            if k[0] * i <= self.order:
                out[tuple(c * i for c in k)] = v
        return LevelSeries(out, self.order, self.arity)

    def set_mark_one(self, axis=0):
        """Set mark #axis to 1, i.e. marginalise it out (arity drops)."""
        out = {}
        for k, v in self.data.items():
            key = (k[0], *k[1 : 1 + axis], *k[2 + axis :])
            out[key] = out.get(key, 0) + v
        if self.arity == 1:
            coeffs = [0] * (self.order + 1)
            for (n,), v in out.items():
                coeffs[n] = v
            return TruncSeries(coeffs, self.order)
        return LevelSeries(out, self.order, self.arity - 1)

    def set_mark_zero(self, axis=0):
        """Set mark #axis to 0 (keep only terms of mark-degree 0)."""
        out = {}
        for k, v in self.data.items():
            if k[1 + axis] == 0:
                key = (k[0], *k[1 : 1 + axis], *k[2 + axis :])
                out[key] = v
        if self.arity == 1:
            coeffs = [0] * (self.order + 1)
            for (n,), v in out.items():
                coeffs[n] = v
            return TruncSeries(coeffs, self.order)
        return LevelSeries(out, self.order, self.arity - 1)

    def x_profile(self):
        """dict n -> {marks: coeff} grouped by x-degree."""
        prof = {}
        for k, v in self.data.items():
            prof.setdefault(k[0], {})[k[1:]] = v
        return prof

    def is_nonnegative(self):
        return all(v >= 0 for v in self.data.values())


def level_polya_exp(f: LevelSeries) -> LevelSeries:
    """Multiset exponential of a marked series, exact integers.

    Same integer recurrence as the univariate case with polynomial
    coefficients: n*g_n = sum_k Q_k g_{n-k}, where Q_k collects
    d * [x^d]f with marks raised to the (k/d)-th power.
    """
    if any(k[0] == 0 for k in f.data):
        raise ValueError("level_polya_exp requires zero constant term in x")
    order, arity = f.order, f.arity
    # per-degree polynomial views of f
    fd = [dict() for _ in range(order + 1)]
    for k, v in f.data.items():
        fd[k[0]][k[1:]] = v
    # Q_k as polynomial dicts
    q = [dict() for _ in range(order + 1)]
    for k in range(1, order + 1):
        qk = q[k]
        for d in divisors(k):
            poly = fd[d]
            if not poly:
                continue
            i = k // d
            for marks, v in poly.items():
                key = tuple(m * i for m in marks)
                qk[key] = qk.get(key, 0) + d * v
    g = [dict() for _ in range(order + 1)]
    g[0][(0,) * arity] = 1
    for m in range(1, order + 1):
        acc = {}
        for k in range(1, m + 1):
            qk = q[k]
            if not qk:
                continue
            gm = g[m - k]
            for ka, va in qk.items():
                for kb, vb in gm.items():
                    key = tuple(a + b for a, b in zip(ka, kb))
                    acc[key] = acc.get(key, 0) + va * vb
        gm = g[m]
        for key, v in acc.items():
            val, rem = divmod(v, m)
            if rem:
                raise ArithmeticError("multiset recurrence lost integrality")
            if val:
                gm[key] = val
    out = {}
    for n, poly in enumerate(g):
        for marks, v in poly.items():
            out[(n, *marks)] = v
    return LevelSeries(out, order, arity)
