"""Numeric extraction of the dominant singularity and expansion constants.

The tree series satisfies y = x*exp(y + D(x)) with
D(x) = sum_{i>=2} y(x^i)/i.  On the circle of convergence y(rho) = 1,
which turns into the fixed point rho = exp(-1 - D(rho)); D is evaluated
from the exact coefficient table, its arguments rho^i <= rho^2 ~ 0.114
sitting deep inside the disk where the truncated series is accurate to
far below any tolerance used here.

The square-root coefficient of 1 - y(x) = b*sqrt(rho-x) - c*(rho-x)+...
follows from the smooth implicit-function expansion,
b = sqrt(2/rho + 2 D'(rho)), and is cross-checked by a weighted
least-squares fit of 1 - y(x) on a mesh approaching rho (y evaluated by
Newton on the functional equation, not by truncating the series near
its singularity).  The (rho-x)^{3/2} and (rho-x)^2 fit columns are
nuisance absorbers; their coefficients are not reported as constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .enumeration import TreeCountTable, build_tree_counts


class ConstantsError(RuntimeError):
    """Raised when the singularity extraction fails to converge/agree."""

    def __init__(self, message, last=None, residual=None):
        super().__init__(message)
        self.last = last
        self.residual = residual


@dataclass
class SingularityData:
    rho: float = float("nan")
    b: float = float("nan")
    c: float = float("nan")
    series_order: int = 0
    tail_cutoff: int = 0
    residual: float = float("nan")
    fit_b: float = float("nan")
    fit_c: float = float("nan")
    fit_rms: float = float("nan")

    def as_dict(self):
        return {
            "rho": self.rho,
            "b": self.b,
            "c": self.c,
            "residual": self.residual,
            "N": self.series_order,
            "tail_cutoff": self.tail_cutoff,
            "fit_b": self.fit_b,
            "fit_c": self.fit_c,
            "fit_rms": self.fit_rms,
        }


class SeriesEvaluator:
    """Float evaluation of y, y', D, D' from the exact table."""

    def __init__(self, counts: TreeCountTable):
        self.counts = counts
        self.cf = [float(c) for c in counts.counts]

    def y_partial(self, x: float) -> float:
        """Horner sum of the truncated series; accurate for |x| <~ rho^2."""
        s = 0.0
        for c in reversed(self.cf[1:]):
            s = s * x + c
        return s * x

    def yprime_partial(self, x: float) -> float:
        s = 0.0
        for n in range(len(self.cf) - 1, 0, -1):
            s = s * x + n * self.cf[n]
        return s

    def D(self, x: float, cutoff: int) -> float:
        tot = 0.0
        xi = x
        for i in range(2, cutoff + 1):
            xi *= x
            tot += self.y_partial(xi) / i
        return tot

    def Dprime(self, x: float, cutoff: int) -> float:
        tot = 0.0
        for i in range(2, cutoff + 1):
            tot += x ** (i - 1) * self.yprime_partial(x**i)
        return tot

    def y_value(self, x: float, cutoff: int) -> float:
        """y(x) for 0 <= x < rho by Newton on v = x*exp(v + D(x)).

        The target is the smaller of the two positive roots; v - x e^{v+D}
        is concave, so Newton from v = 0 climbs monotonically into it.
        """
        if x == 0.0:
            return 0.0
        dd = self.D(x, cutoff)
        v = 0.0
        for _ in range(200):
            e = x * math.exp(v + dd)
            denom = 1.0 - e
            if denom <= 0.0:
                raise ConstantsError(f"no subcritical root at x={x} (past the singularity?)")
            step = (v - e) / denom
            v -= step
            if abs(step) < 1e-16:
                break
        return v


def _tail_cutoff(rho_guess: float, tol: float) -> int:
    i = 2
    while rho_guess**i >= tol * 1e-2:
        i += 1
    return max(i, 3)


def compute_rho(
    N: int = 120,
    tol: float = 1e-10,
    counts: TreeCountTable | None = None,
    max_iter: int = 500,
) -> SingularityData:
    """Radius of convergence via the fixed point x = exp(-1 - D(x)).

    The residual reported is the functional-equation defect
    |rho * exp(1 + D(rho)) - 1|, i.e. how far y(rho) = 1 is from being
    satisfied at the returned point.
    """
    if counts is None:
        counts = build_tree_counts(N)
    ev = SeriesEvaluator(counts)
    cutoff = _tail_cutoff(0.35, tol)
    x = 0.3
    for _ in range(max_iter):
        xn = math.exp(-1.0 - ev.D(x, cutoff))
        if abs(xn - x) < tol * 1e-3:
            x = xn
            break
        x = xn
    else:
        residual = abs(x * math.exp(1.0 + ev.D(x, cutoff)) - 1.0)
        raise ConstantsError(
            f"fixed point not converged after {max_iter} iterations",
            last=x,
            residual=residual,
        )
    residual = abs(x * math.exp(1.0 + ev.D(x, cutoff)) - 1.0)
    return SingularityData(
        rho=x, series_order=counts.order, tail_cutoff=cutoff, residual=residual
    )


def compute_b_c(
    data: SingularityData,
    counts: TreeCountTable | None = None,
    mesh=(1e-6, 1e-3, 120),
    agree_tol: float = 1e-4,
) -> SingularityData:
    """Fill b (implicit-function formula) and c = b^2/3, with fit cross-check."""
    if not data.rho > 0:
        raise ConstantsError("compute rho first")
    if counts is None:
        counts = build_tree_counts(data.series_order)
    ev = SeriesEvaluator(counts)
    rho, cutoff = data.rho, data.tail_cutoff
    b = math.sqrt(2.0 / rho + 2.0 * ev.Dprime(rho, cutoff))

    u_lo, u_hi, npts = mesh
    us = np.geomspace(u_lo, u_hi, npts)
    f = np.array([1.0 - ev.y_value(rho - u, cutoff) for u in us])
    design = np.stack([np.sqrt(us), us, us**1.5, us**2.0], axis=1)
    w = 1.0 / us  # sqrt of the 1/u^2 weight
    coef, *_ = np.linalg.lstsq(design * w[:, None], f * w, rcond=None)
    fit_b, fit_c = coef[0], -coef[1]
    resid = f - design @ coef
    fit_rms = float(np.sqrt(np.mean((resid * w) ** 2) / np.mean(w**2)))

    if abs(fit_b - b) > agree_tol:
        raise ConstantsError(
            f"formula b={b!r} and fit b={fit_b!r} disagree beyond {agree_tol}"
            " (series or rho bug)"
        )
    data.b = b
    data.c = b * b / 3.0
    data.fit_b = float(fit_b)
    data.fit_c = float(fit_c)
    data.fit_rms = fit_rms
    return data


def singularity_constants(N: int = 120, tol: float = 1e-10) -> SingularityData:
    counts = build_tree_counts(N)
    data = compute_rho(N, tol, counts=counts)
    return compute_b_c(data, counts=counts)


def log_asymptotic_count(n: int, data: SingularityData) -> float:
    """log of (b sqrt(rho) / (2 sqrt(pi))) * n^{-3/2} * rho^{-n}."""
    pref = data.b * math.sqrt(data.rho) / (2.0 * math.sqrt(math.pi))
    return math.log(pref) - 1.5 * math.log(n) - n * math.log(data.rho)

def asymptotic_count(n: int, data: SingularityData) -> float:
    """Leading-order approximation of y_n (inf if it overflows a float)."""
    try:
        return math.exp(log_asymptotic_count(n, data))
    except OverflowError:
        return float("inf")


def count_ratio(n: int, counts: TreeCountTable, data: SingularityData) -> float:
    """y_n / asymptotic_count(n), evaluated in log space (safe for large n)."""
    return math.exp(math.log(counts.count(n)) - log_asymptotic_count(n, data))
