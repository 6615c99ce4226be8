"""Exact-uniform random generation of unlabelled rooted trees.

The generator is the classical recursive method driven by the counting
recurrence (n-1)*y_n = sum_{s} sigma(s)*y_{n-s}, sigma(s) = sum_{d|s} d*y_d:
at size m draw a rest size r with weight sigma(m-r)*y_r, then a divisor
d of s = m-r with weight d*y_d, recurse into a tree of size r and a tree
of size d, and attach j = s/d copies of the latter to the root of the
former.  Every categorical draw is made against the exact integer
weights, so the output is exactly uniform over the y_n canonical trees.

Draw mechanics: for sizes up to ``prefix_limit`` the cumulative weight
tables are precomputed and the draw is a bisect against an exact uniform
integer.  Above that the walk compares a 192-bit window of the target
against certified upper/lower bounds built from truncated leading bits
of sigma and y; any ambiguous comparison (probability ~2^-150 per draw)
falls back to the full big-integer walk, so decisions are identical to
exact arithmetic.

Randomness comes only from ``RandomStream`` (SHA-256 keyed Mersenne
streams); the library never touches ambient randomness, and each sample
index derives its own substream, making merged statistics independent
of how samples are scheduled across workers.
"""

from __future__ import annotations

import hashlib
import random
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .enumeration import TreeCountTable
from .series import divisors

TOP_BITS = 192
_WINDOW_SLACK = 64


class RandomStream:
    """Deterministic, splittable random stream (never reads OS entropy)."""

    __slots__ = ("key", "_rng")

    def __init__(self, seed, path=()):
        material = repr((int(seed), tuple(path))).encode()
        self.key = hashlib.sha256(material).digest()
        self._rng = random.Random(int.from_bytes(self.key, "big"))

    @classmethod
    def _from_key(cls, key: bytes):
        obj = cls.__new__(cls)
        obj.key = key
        obj._rng = random.Random(int.from_bytes(key, "big"))
        return obj

    def spawn(self, index: int) -> "RandomStream":
        child = hashlib.sha256(self.key + index.to_bytes(8, "big", signed=False)).digest()
        return RandomStream._from_key(child)

    def randbelow(self, n: int) -> int:
        return self._rng.randrange(n)

    def getrandbits(self, k: int) -> int:
        return self._rng.getrandbits(k)

    def random(self) -> float:
        return self._rng.random()


class CanonicalTree:
    """Rooted unlabelled tree in canonical form.

    Children are kept sorted by their level-sequence encodings, so two
    isomorphic trees build identical objects.  ``seq`` is the preorder
    depth sequence, the canonical encoding itself.
    """

    __slots__ = ("children", "n", "seq")

    def __init__(self, children=()):
        kids = sorted(children, key=lambda t: t.seq)
        self.children = tuple(kids)
        self.n = 1 + sum(c.n for c in kids)
        seq = [0]
        for c in kids:
            seq.extend(d + 1 for d in c.seq)
        self.seq = tuple(seq)

    def __eq__(self, other):
        return isinstance(other, CanonicalTree) and self.seq == other.seq

    def __hash__(self):
        return hash(self.seq)

    def __repr__(self):
        return f"CanonicalTree(n={self.n}, {self.encode()})"

    def encode(self) -> str:
        """Parenthesised canonical encoding, children in canonical order."""
        out = []
        prev = -1
        for d in self.seq:
            if d > prev:
                out.append("(")
            else:
                out.append(")" * (prev - d + 1) + "(")
            prev = d
        out.append(")" * (prev + 1))
        return "".join(out)

    def height(self) -> int:
        return max(self.seq)


@dataclass
class ProfileVector:
    """Level census L(0), ..., L(H) of one tree."""

    levels: tuple
    n: int
    height: int


def profile(tree: CanonicalTree) -> ProfileVector:
    """Level census from the depth sequence (no recursion)."""
    h = max(tree.seq)
    levels = [0] * (h + 1)
    for d in tree.seq:
        levels[d] += 1
    return ProfileVector(levels=tuple(levels), n=tree.n, height=h)


def scaled_profile(p: ProfileVector, t: float) -> float:
    """l_n(t): linearly interpolated level size at t*sqrt(n), over sqrt(n)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    sqn = p.n ** 0.5
    return interpolated_level(p.levels, t * sqn) / sqn


def interpolated_level(levels, t: float) -> float:
    """L(t) with linear interpolation between integer levels, 0 beyond."""
    k = int(t)
    frac = t - k
    lo = levels[k] if k < len(levels) else 0
    hi = levels[k + 1] if k + 1 < len(levels) else 0
    return (1.0 - frac) * lo + frac * hi


class TreeSampler:
    """Uniform sampler over trees of sizes up to the table order."""

    def __init__(self, counts: TreeCountTable, prefix_limit: int = 600):
        self.counts = counts
        N = counts.order
        self.y = counts.counts
        self.sigma = counts.sigma
        self.prefix_limit = min(prefix_limit, N)
        # cumulative weight tables: rest_prefix[m][i] = sum_{r<=i+1} sigma(m-r) y_r
        y, sigma = self.y, self.sigma
        self.rest_prefix = [None, None]
        for m in range(2, self.prefix_limit + 1):
            acc = 0
            row = []
            for r in range(1, m):
                acc += sigma[m - r] * y[r]
                row.append(acc)
            self.rest_prefix.append(row)
        # divisor tables: divisor list and cumulative d*y_d, ascending d
        self.divs = [()] * (N + 1)
        self.div_prefix = [()] * (N + 1)
        for s in range(1, min(self.prefix_limit, N) + 1):
            ds = divisors(s)
            acc = 0
            pre = []
            for d in ds:
                acc += d * y[d]
                pre.append(acc)
            self.divs[s] = ds
            self.div_prefix[s] = pre
        # leading-bit windows for the certified walk above prefix_limit
        self.y_top = [(0, 0)] * (N + 1)
        self.sigma_top = [(0, 0)] * (N + 1)
        for i in range(1, N + 1):
            self.y_top[i] = _window(y[i])
            self.sigma_top[i] = _window(sigma[i])
        self.fallbacks = 0

    # -- categorical draws ---------------------------------------------------

    def _draw_rest(self, m: int, stream: RandomStream) -> int:
        """Rest size r, P(r) = sigma(m-r) y_r / ((m-1) y_m)."""
        if m <= self.prefix_limit:
            row = self.rest_prefix[m]
            z = stream.randbelow(row[-1])
            return bisect_right(row, z) + 1
        y, sigma = self.y, self.sigma
        T = (m - 1) * y[m]
        z = stream.randbelow(T)
        shift = T.bit_length() - TOP_BITS
        z_win = z >> shift
        y_top, sigma_top = self.y_top, self.sigma_top
        lo = hi = 0
        for r in range(1, m):
            sm, se = sigma_top[m - r]
            if r <= self.prefix_limit:
                yr = y[r]
                d = se - shift
                if d >= 0:
                    lo += (sm * yr) << d
                    hi += ((sm + 1) * yr) << d
                else:
                    lo += (sm * yr) >> -d
                    hi += (((sm + 1) * yr) >> -d) + 1
            else:
                ym, ye = y_top[r]
                d = se + ye - shift
                if d >= 0:
                    lo += (sm * ym) << d
                    hi += ((sm + 1) * (ym + 1)) << d
                else:
                    lo += (sm * ym) >> -d
                    hi += (((sm + 1) * (ym + 1)) >> -d) + 1
            if lo > z_win:
                return r
            if hi <= z_win:
                continue
            # interval straddles the target window: decide exactly
            self.fallbacks += 1
            return self._draw_rest_exact(m, z)
        self.fallbacks += 1
        return self._draw_rest_exact(m, z)

    def _draw_rest_exact(self, m: int, z: int) -> int:
        y, sigma = self.y, self.sigma
        acc = 0
        for r in range(1, m):
            acc += sigma[m - r] * y[r]
            if acc > z:
                return r
        raise AssertionError("categorical walk exhausted (table inconsistent)")

    def _draw_divisor(self, s: int, stream: RandomStream) -> int:
        """Divisor d of s, P(d) = d y_d / sigma(s)."""
        if s == 1:
            return 1
        if s <= self.prefix_limit:
            pre = self.div_prefix[s]
            z = stream.randbelow(pre[-1])
            return self.divs[s][bisect_right(pre, z)]
        y = self.y
        z = stream.randbelow(self.sigma[s])
        ds = divisors(s)
        # the top divisor d = s carries all but ~rho^{s/2} of the mass
        rest = self.sigma[s] - s * y[s]
        if z >= rest:
            return s
        acc = 0
        for d in ds[:-1]:
            acc += d * y[d]
            if acc > z:
                return d
        raise AssertionError("divisor walk exhausted (table inconsistent)")

    def _split(self, m: int, stream: RandomStream):
        """One decomposition step: returns (r, d, j) with r + j*d = m."""
        r = self._draw_rest(m, stream)
        s = m - r
        d = self._draw_divisor(s, stream)
        return r, d, s // d

    # -- builders -------------------------------------------------------------

    def sample_tree(self, n: int, stream: RandomStream) -> CanonicalTree:
        """A uniformly random canonical tree of size n."""
        if not 1 <= n <= self.counts.order:
            raise ValueError(f"size {n} outside table order {self.counts.order}")
        leaf = CanonicalTree()
        two = CanonicalTree([leaf])
        # explicit post-order stack; draws happen in the same order as a
        # rest-first recursion, matching sample_profile
        ops = [(0, n)]
        vals = []
        while ops:
            op, arg = ops.pop()
            if op == 0:  # build a tree of size arg
                m = arg
                if m == 1:
                    vals.append(leaf)
                elif m == 2:
                    vals.append(two)
                else:
                    r, d, j = self._split(m, stream)
                    ops.append((1, j))
                    ops.append((0, d))
                    ops.append((0, r))
            else:  # join: attach j copies of the subtree to the rest's root
                sub = vals.pop()
                rest = vals.pop()
                vals.append(CanonicalTree(rest.children + (sub,) * arg))
        return vals[0]

    def sample_profile(self, n: int, stream: RandomStream) -> ProfileVector:
        """Profile of a uniform tree, same decision sequence as sample_tree.

        Iterative: each pending piece is (size, depth, multiplicity); a
        split turns (m, dep, mult) into (r, dep, mult) + (d, dep+1, mult*j),
        exactly mirroring 'attach j copies at the root of the rest'.
        """
        if not 1 <= n <= self.counts.order:
            raise ValueError(f"size {n} outside table order {self.counts.order}")
        levels = [0] * (n + 1)
        hmax = 0
        stack = [(n, 0, 1)]
        while stack:
            m, dep, mult = stack.pop()
            if m == 1:
                levels[dep] += mult
                if dep > hmax:
                    hmax = dep
                continue
            if m == 2:
                levels[dep] += mult
                levels[dep + 1] += mult
                if dep + 1 > hmax:
                    hmax = dep + 1
                continue
            r, d, j = self._split(m, stream)
            # rest first: its draws must precede the subtree's, matching
            # the recursive builder's stream consumption order
            stack.append((d, dep + 1, mult * j))
            stack.append((r, dep, mult))
        return ProfileVector(levels=tuple(levels[: hmax + 1]), n=n, height=hmax)


def _window(v: int):
    """(leading window, shift) with v in [w << s, (w+1) << s)."""
    s = v.bit_length() - TOP_BITS
    if s <= 0:
        return (v, 0)
    return (v >> s, s)


# ---------------------------------------------------------------------------
# symbolic uniformity: exact outcome distribution of the decision tree
# ---------------------------------------------------------------------------


def symbolic_distribution(n: int, counts: TreeCountTable) -> dict:
    """Exact law of the sampler's output at size n: {tree: Fraction}.

    Walks every branch of the decision tree with exact branch
    probabilities; feasible for small n only.
    """
    y, sigma = counts.counts, counts.sigma
    memo = {}

    def dist(m):
        if m in memo:
            return memo[m]
        if m == 1:
            out = {CanonicalTree(): Fraction(1)}
        elif m == 2:
            out = {CanonicalTree([CanonicalTree()]): Fraction(1)}
        else:
            out = {}
            total = (m - 1) * y[m]
            for r in range(1, m):
                s = m - r
                for d in divisors(s):
                    p_split = Fraction(sigma[s] * y[r], total) * Fraction(d * y[d], sigma[s])
                    j = s // d
                    for rest, pr in dist(r).items():
                        for sub, ps in dist(d).items():
                            tree = CanonicalTree(rest.children + (sub,) * j)
                            p = p_split * pr * ps
                            out[tree] = out.get(tree, 0) + p
        memo[m] = out
        return out

    return dist(n)
