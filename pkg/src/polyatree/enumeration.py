"""Exact counting and exact distributions for unlabelled rooted trees.

Provides the counting table y_1..y_N (divisor-convolution recurrence),
the not-simply-generated witness phi(x) = x / y^{-1}(x), generating
functions restricted by height, level-marked series in up to three
levels, and the derived exact distributions (height, single level,
joint levels) together with the fourth moment of a level difference.

Counts are plain Python ints (gmpy2 is used inside the table build when
available, purely as a speedup).  Probabilities are Fractions.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .series import (
    LevelSeries,
    TruncSeries,
    divisors,
    functional_inverse,
    level_polya_exp,
    polya_exp,
)

try:
    from gmpy2 import mpz as _mpz
except ImportError:  # pragma: no cover - gmpy2 is a hard dependency in practice
    _mpz = int


class TreeCountTable:
    """Exact counts y_1..y_N of unlabelled rooted trees by size.

    Also keeps sigma(s) = sum_{d|s} d*y_d, the weight appearing in the
    convolution (n-1)*y_n = sum_s sigma(s)*y_{n-s}; the sampler draws
    against exactly these weights.
    """

    def __init__(self, counts, sigma):
        self.counts = counts  # counts[n] = y_n, counts[0] = 0
        self.sigma = sigma
        self.order = len(counts) - 1

    def __getitem__(self, n):
        return self.counts[n]

    def count(self, n):
        if not 1 <= n <= self.order:
            raise ValueError(f"size {n} outside table order {self.order}")
        return self.counts[n]

    def series(self, order=None):
        order = self.order if order is None else order
        if order > self.order:
            raise ValueError("requested order exceeds table")
        return TruncSeries(self.counts[: order + 1], order)


def build_tree_counts(N: int) -> TreeCountTable:
    """Counting table via (n-1)*y_n = sum_{s<n} sigma(s) * y_{n-s}."""
    if N < 1:
        raise ValueError("order must be >= 1")
    one = _mpz(1)
    y = [_mpz(0)] * (N + 1)
    y[1] = one
    sigma = [one] * (N + 1)  # d=1 contributes 1*y_1 to every index
    sigma[0] = _mpz(0)
    for n in range(2, N + 1):
        tot = _mpz(0)
        for j in range(1, n):
            tot += sigma[j] * y[n - j]
        y[n] = tot // (n - 1)
        yn = n * y[n]
        for m in range(n, N + 1, n):
            sigma[m] += yn
    return TreeCountTable([int(v) for v in y], [int(v) for v in sigma])


def tree_series_fixed_point(N: int, rounds: int | None = None) -> TruncSeries:
    """Solve y = x * polya_exp(y) by iteration from y = 0.

    Each round is exact through one more power of x, so N rounds settle
    every retained coefficient.  Used to cross-validate the convolution
    table; quadratic cost, keep N modest.
    """
    y = TruncSeries.zero(N)
    for _ in range(rounds if rounds is not None else N):
        y = polya_exp(y).shift(1)
    return y


def simply_generated_witness(N: int):
    """phi(x) = x / y^{-1}(x) and the index of its first negative coefficient.

    A simply generated family would force phi to have nonnegative
    coefficients; the returned index exhibits the violation.
    """
    if N < 10:
        raise ValueError("need order >= 10 to exhibit the witness")
    y = build_tree_counts(N + 1).series()
    yinv = functional_inverse(y)
    # x / yinv = 1 / (yinv / x); divide out one power of x, then invert
    w = TruncSeries(yinv.coeffs[1:], N)  # yinv / x, constant term 1
    phi = _reciprocal(w)
    first_negative = next((i for i, c in enumerate(phi.coeffs) if c < 0), None)
    return phi, first_negative


def _reciprocal(f: TruncSeries) -> TruncSeries:
    if f[0] != 1:
        raise ValueError("reciprocal needs constant term 1")
    n = f.order
    out = [0] * (n + 1)
    out[0] = 1
    for m in range(1, n + 1):
        acc = 0
        for j in range(1, m + 1):
            if f.coeffs[j]:
                acc += f.coeffs[j] * out[m - j]
        out[m] = -acc
    return TruncSeries(out, n)


# ---------------------------------------------------------------------------
# height
# ---------------------------------------------------------------------------


def height_restricted_series(k: int, N: int) -> TruncSeries:
    """y_k(x): trees with n nodes and height < k.  y_0 = 0."""
    if k < 0:
        raise ValueError("level bound must be >= 0")
    y = TruncSeries.zero(N)
    for _ in range(min(k, N + 1)):
        y = polya_exp(y).shift(1)
    return y


class HeightTable:
    """Coefficients [x^n] y_k for all n <= N and k = 0..N.

    column[k][n] is the number of size-n trees of height < k; column
    k = N reproduces the full counts for every n <= N.
    """

    def __init__(self, N: int, counts: TreeCountTable | None = None):
        self.order = N
        self.counts = counts if counts is not None else build_tree_counts(N)
        cols = [[0] * (N + 1)]
        y = TruncSeries.zero(N)
        for _ in range(N):
            y = polya_exp(y).shift(1)
            cols.append(list(y.coeffs))
        self.columns = cols

    def restricted_count(self, n, k):
        """Number of size-n trees with height < k."""
        if k > self.order:
            k = self.order
        return self.columns[k][n] if n <= self.order else None

    def distribution(self, n) -> "HeightDistribution":
        if not 1 <= n <= self.order:
            raise ValueError(f"size {n} outside table order {self.order}")
        yn = self.counts[n]
        pmf = {}
        for h in range(n):
            lo = self.columns[h][n] if h <= self.order else yn
            hi = self.columns[h + 1][n] if h + 1 <= self.order else yn
            c = hi - lo
            if c:
                pmf[h] = Fraction(c, yn)
        return HeightDistribution(n=n, pmf=pmf)


@dataclass
class HeightDistribution:
    """Exact law of the height of a uniform size-n tree."""

    n: int
    pmf: dict  # h -> Fraction

    def moment(self, r: int) -> Fraction:
        return sum((Fraction(h) ** r) * p for h, p in self.pmf.items())

    def survival(self, k: int) -> Fraction:
        """P(H_n >= k)."""
        return sum(p for h, p in self.pmf.items() if h >= k)

    def to_rows(self):
        return [(h, p.numerator, p.denominator, float(p)) for h, p in sorted(self.pmf.items())]


def height_distribution(n: int, table: HeightTable | None = None) -> HeightDistribution:
    """Exact height pmf via P(H_n >= k) = ([x^n]y - [x^n]y_k) / y_n."""
    if table is None:
        table = HeightTable(n)
    return table.distribution(n)


# ---------------------------------------------------------------------------
# level-marked series and level distributions
# ---------------------------------------------------------------------------


def level_marked_series(k: int, N: int, counts: TreeCountTable | None = None) -> LevelSeries:
    """y_k(x,u): u marks the nodes at depth k.  y_0(x,u) = u*y(x)."""
    if k < 0:
        raise ValueError("depth must be >= 0")
    if counts is None:
        counts = build_tree_counts(N)
    data = {(n, 1): counts[n] for n in range(1, N + 1)}
    g = LevelSeries(data, N, 1)
    for _ in range(k):
        g = level_polya_exp(g).shift_x()
    return g


def joint_marked_series(depths, N: int, counts: TreeCountTable | None = None) -> LevelSeries:
    """y_{k_1,...,k_d}(x, u_1, ..., u_d) for strictly increasing depths, d <= 3.

    Built inside out: the deepest gap series is promoted by marking its
    root and iterating the multiset construction for the next gap.
    """
    depths = tuple(depths)
    d = len(depths)
    if d not in (1, 2, 3):
        raise ValueError("joint marking supports d in {1, 2, 3}")
    if any(b <= a for a, b in zip(depths, depths[1:])) or depths[0] < 0:
        raise ValueError("depths must be strictly increasing and nonnegative")
    if counts is None:
        counts = build_tree_counts(N)
    if d == 1:
        return level_marked_series(depths[0], N, counts)
    inner = joint_marked_series(tuple(b - depths[0] for b in depths[1:]), N, counts)
    # promote: tilde y_0(x, u_1, ...) = u_1 * inner(x, u_2, ...)
    data = {(key[0], 1, *key[1:]): v for key, v in inner.data.items()}
    g = LevelSeries(data, N, d)
    for _ in range(depths[0]):
        g = level_polya_exp(g).shift_x()
    return g


@dataclass
class LevelDistribution:
    """Exact joint law of level occupancies (L_n(k_1), ..., L_n(k_d))."""

    n: int
    depths: tuple
    pmf: dict = field(repr=False)  # marks tuple -> Fraction

    def total(self) -> Fraction:
        return sum(self.pmf.values())

    def marginal(self, axis: int) -> "LevelDistribution":
        out = {}
        for marks, p in self.pmf.items():
            key = marks[:axis] + marks[axis + 1 :]
            out[key] = out.get(key, 0) + p
        deps = self.depths[:axis] + self.depths[axis + 1 :]
        return LevelDistribution(self.n, deps, out)

    def moment(self, powers) -> Fraction:
        """E prod_j L(k_j)^powers[j], exact."""
        acc = Fraction(0)
        for marks, p in self.pmf.items():
            term = p
            for m, e in zip(marks, powers):
                term *= Fraction(m) ** e
            acc += term
        return acc

    def to_rows(self):
        rows = []
        for marks, p in sorted(self.pmf.items()):
            rows.append((*marks, p.numerator, p.denominator, float(p)))
        return rows

    def write_csv(self, fh):
        w = csv.writer(fh)
        w.writerow([f"m{i+1}" for i in range(len(self.depths))] + ["numerator", "denominator", "float"])
        for row in self.to_rows():
            w.writerow(row)

    def to_json_dict(self):
        return {
            "n": self.n,
            "depths": list(self.depths),
            "pmf": [
                {
                    "marks": list(marks),
                    "numerator": str(p.numerator),
                    "denominator": str(p.denominator),
                    "float": float(p),
                }
                for marks, p in sorted(self.pmf.items())
            ],
        }

    def dump_json(self, fh):
        json.dump(self.to_json_dict(), fh, indent=1)


def _distribution_from_series(series: LevelSeries, n: int, depths, counts) -> LevelDistribution:
    yn = counts[n]
    pmf = {}
    got = 0
    for key, v in series.data.items():
        if key[0] == n:
            pmf[key[1:]] = Fraction(v, yn)
            got += v
    if got != yn:
        raise ArithmeticError("marked series does not exhaust the trees of this size")
    return LevelDistribution(n, tuple(depths), pmf)


def level_size_distribution(n: int, k: int, counts: TreeCountTable | None = None) -> LevelDistribution:
    """Exact pmf of L_n(k), including the mass at 0 from trees of height < k."""
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    if counts is None or counts.order < n:
        counts = build_tree_counts(n)
    series = level_marked_series(k, n, counts)
    return _distribution_from_series(series, n, (k,), counts)


def joint_level_distribution(n: int, depths, counts: TreeCountTable | None = None) -> LevelDistribution:
    """Exact joint pmf of (L_n(k_1), ..., L_n(k_d)), d in {2, 3}."""
    depths = tuple(depths)
    if len(depths) not in (2, 3):
        raise ValueError("joint distributions are limited to d in {2, 3}")
    if counts is None or counts.order < n:
        counts = build_tree_counts(n)
    series = joint_marked_series(depths, n, counts)
    return _distribution_from_series(series, n, depths, counts)


def level_diff_fourth_moment(n: int, r: int, h: int, counts: TreeCountTable | None = None) -> Fraction:
    """E (L_n(r) - L_n(r+h))^4, exact, from the joint pmf at (r, r+h)."""
    if r < 0 or h < 1:
        raise ValueError("need r >= 0 and h >= 1")
    dist = joint_level_distribution(n, (r, r + h), counts)
    acc = Fraction(0)
    for (m1, m2), p in dist.pmf.items():
        acc += (m1 - m2) ** 4 * p
    return acc


# ---------------------------------------------------------------------------
# jet (truncated Taylor-in-the-mark) route to moments; this is the
# u d/du operator formulation and doubles as the fast path for scans
# ---------------------------------------------------------------------------

JET_LEN = 5  # value + four derivatives' worth of Taylor coefficients


def _binom_int(m: int, j: int) -> int:
    """binomial(m, j) for integer m of either sign, integer j >= 0."""
    num = 1
    for i in range(j):
        num *= m - i
    return num // math.factorial(j)


def _jet_mul(a, b):
    return tuple(
        sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(JET_LEN)
    )


def _jet_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _jet_scale(a, c):
    return tuple(c * x for x in a)


def _jet_upow(i: int):
    """Jet of u^i at u = 1 in powers of w = u - 1; i may be negative."""
    return tuple(_binom_int(i, j) for j in range(JET_LEN))


def _jet_compose_upow(a, i: int):
    """a(u) -> a(u^i) on jets: compose with (1+w)^i - 1."""
    if i == 1:
        return a
    delta = _jet_upow(i)[1:]  # coefficients of w^1..w^4 in u^i - 1
    out = [a[0], 0, 0, 0, 0]
    power = (1, 0, 0, 0, 0)  # delta^j, truncated
    for j in range(1, JET_LEN):
        new = [0] * JET_LEN
        for t in range(JET_LEN):
            if power[t]:
                for s, dv in enumerate(delta, start=1):
                    if t + s < JET_LEN:
                        new[t + s] += power[t] * dv
        power = tuple(new)
        if a[j]:
            for t in range(JET_LEN):
                out[t] += a[j] * power[t]
    return tuple(out)


_JET_ZERO = (0,) * JET_LEN
_JET_ONE = (1, 0, 0, 0, 0)
_JET_U = (1, 1, 0, 0, 0)


def _jet_polya_exp(f):
    """Multiset exponential of an x-series of jets (f[0] must be zero)."""
    N = len(f) - 1
    q = [_JET_ZERO] * (N + 1)
    for k in range(1, N + 1):
        acc = _JET_ZERO
        for d in divisors(k):
            fd = f[d]
            if fd != _JET_ZERO:
                acc = _jet_add(acc, _jet_scale(_jet_compose_upow(fd, k // d), d))
        q[k] = acc
    g = [_JET_ZERO] * (N + 1)
    g[0] = _JET_ONE
    for m in range(1, N + 1):
        acc = [0] * JET_LEN
        for k in range(1, m + 1):
            if q[k] != _JET_ZERO and g[m - k] != _JET_ZERO:
                prod = _jet_mul(q[k], g[m - k])
                for t in range(JET_LEN):
                    acc[t] += prod[t]
        jm = []
        for t in range(JET_LEN):
            val, rem = divmod(acc[t], m)
            if rem:
                raise ArithmeticError("jet multiset recurrence lost integrality")
            jm.append(val)
        g[m] = tuple(jm)
    return g


def _jet_shift_x(f):
    return [_JET_ZERO] + f[:-1]


def _level_jets(k: int, N: int, counts: TreeCountTable):
    """Jets of y_k(x, u) in powers of (u - 1), per x-degree."""
    f = [_JET_ZERO] + [_jet_scale(_JET_U, counts[n]) for n in range(1, N + 1)]
    for _ in range(k):
        f = _jet_shift_x(_jet_polya_exp(f))
    return f


def _diff_jets(r: int, h: int, N: int, counts: TreeCountTable):
    """Jets of tilde y_{r,h}(x, u, 1/u): u marks level r, 1/u level r+h."""
    yh = _level_jets(h, N, counts)
    # substitute the mark variable v -> 1/u, then mark the root with u
    g = [
        _jet_mul(_JET_U, _jet_compose_upow(j, -1)) if j != _JET_ZERO else _JET_ZERO
        for j in yh
    ]
    for _ in range(r):
        g = _jet_shift_x(_jet_polya_exp(g))
    return g


def _fourth_moment_from_jet(jet, yn: int) -> Fraction:
    # (u d/du)^4 = d_u + 7 d_u^2 + 6 d_u^3 + d_u^4 at u=1;
    # in Taylor coefficients g_j of (u-1)^j this is g1 + 14 g2 + 36 g3 + 24 g4
    val = jet[1] + 14 * jet[2] + 36 * jet[3] + 24 * jet[4]
    return Fraction(val, yn)


def level_diff_fourth_moment_operator(
    n: int, r: int, h: int, counts: TreeCountTable | None = None
) -> Fraction:
    """Same moment through the derivative-operator route (independent path)."""
    if r < 0 or h < 1:
        raise ValueError("need r >= 0 and h >= 1")
    if counts is None or counts.order < n:
        counts = build_tree_counts(n)
    g = _diff_jets(r, h, n, counts)
    return _fourth_moment_from_jet(g[n], counts[n])


def level_diff_fourth_moment_grid(N: int, r_max: int, h_max: int, counts=None):
    """E (L_n(r) - L_n(r+h))^4 for all n <= N, r <= r_max, h <= h_max.

    Operator-route jets share work across r for fixed h (one multiset
    step per r), which keeps the full tightness grid cheap.
    Returns {(n, r, h): Fraction}.
    """
    if counts is None or counts.order < N:
        counts = build_tree_counts(N)
    out = {}
    for h in range(1, h_max + 1):
        g = _diff_jets(0, h, N, counts)
        for r in range(0, r_max + 1):
            if r > 0:
                g = _jet_shift_x(_jet_polya_exp(g))
            for n in range(1, N + 1):
                out[(n, r, h)] = _fourth_moment_from_jet(g[n], counts[n])
    return out


def level_first_moment(n: int, k: int, counts: TreeCountTable) -> Fraction:
    """E L_n(k), exact, via first-order jets (cheap for trend scans)."""
    g = _level_jets(k, n, counts)
    return Fraction(g[n][1], counts[n])
