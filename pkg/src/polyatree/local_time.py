"""Brownian-excursion local-time laws and height asymptotics.

Characteristic function of the total local time at level kappa,

    phi(t) = 1 + sqrt(2/pi) * int_{-inf}^{inf}
             f(c + i tau, t) e^{-(c + i tau)} dtau,   c < 0,

with kernel f = Psi_kappa(s, t), and jointly at up to three levels via
the nesting f = Psi_{k1}(s, t1 + Psi_{k2-k1}(s, t2 + ...)).  On the
contour Re s = c < 0 the argument -s has positive real part, so the
principal square root never crosses its cut, and the integrand decays
like exp(-2 kappa sqrt(|Im s|)); the truncation half-length is chosen
from that bound.

The density of the law is recovered by Fourier *sine* inversion: the
law lives on [0, inf) with an atom at 0 (excursions whose maximum stays
below the level), and the sine transform is blind to a point mass at
the origin, so the absolutely continuous part comes out directly and
the atom is the leftover mass.

Also here: the scaling constants mapping tree profiles onto excursion
local time, leading-order height moments, and the theta-series local
limit approximation of the height distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as _gamma, zeta as _zeta

from .constants import SingularityData


class QuadratureError(RuntimeError):
    pass


@dataclass
class LocalTimeQuery:
    """Contour and quadrature parameters for the local-time integrals."""

    contour_abscissa: float = -1.0
    truncation: float | None = None  # half-length T; None = adaptive
    quad_tol: float = 1e-9
    points_per_panel: int = 48

    def __post_init__(self):
        if self.contour_abscissa >= 0:
            raise ValueError("contour abscissa must be negative")
        if self.quad_tol <= 0:
            raise ValueError("quad_tol must be positive")


@dataclass
class ScalingConstants:
    """Profile and height scalings derived from the singularity data."""

    amp_scale: float
    time_scale: float
    height_scale: float
    b_sqrt_rho: float = field(repr=False, default=0.0)

    @classmethod
    def from_singularity(cls, data: SingularityData) -> "ScalingConstants":
        bsr = data.b * math.sqrt(data.rho)
        a = bsr / (2.0 * math.sqrt(2.0))
        return cls(
            amp_scale=a,
            time_scale=a,
            height_scale=2.0 * math.sqrt(math.pi) / bsr,
            b_sqrt_rho=bsr,
        )


def psi(kappa: float, s, t):
    """Local-time kernel Psi_kappa(s, t); s, t may be complex arrays.

    Psi = i t sqrt(-s) e^{-kappa sqrt(-2s)}
          / (sqrt(-s) e^{kappa sqrt(-2s)} - i t sqrt(2) sinh(kappa sqrt(-2s))).
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    ms = -np.asarray(s, dtype=complex)
    root = np.sqrt(ms)
    root2 = np.sqrt(2.0 * ms)
    num = 1j * t * root * np.exp(-kappa * root2)
    den = root * np.exp(kappa * root2) - 1j * t * math.sqrt(2.0) * np.sinh(kappa * root2)
    if np.any(np.abs(den) < 1e-280):
        raise QuadratureError("vanishing Psi denominator on the contour")
    return num / den


def _tail_bound(kappa: float, amp: float, T: float) -> float:
    # int_T^inf A e^{-2 kappa sqrt(tau)} dtau, substituting sigma = sqrt(tau)
    rt = math.sqrt(T)
    return 2.0 * amp * math.exp(-2.0 * kappa * rt) * (rt / (2.0 * kappa) + 1.0 / (4.0 * kappa**2))


def _contour_nodes(kappa_min: float, amp: float, q: LocalTimeQuery):
    """Gauss-Legendre panels covering tau in [0, T] on Re s = c."""
    c = q.contour_abscissa
    amp = max(amp, 1.0) * math.exp(-c) * math.sqrt(2.0 / math.pi)
    if q.truncation is not None:
        T = q.truncation
    else:
        T = 4.0
        while _tail_bound(kappa_min, amp, T) > 0.25 * q.quad_tol and T < 1e9:
            T *= 2.0
    tail = _tail_bound(kappa_min, amp, T)
    if tail > q.quad_tol:
        raise QuadratureError(
            f"truncation error ~{tail:.2e} above quad_tol={q.quad_tol:.2e};"
            f" increase truncation (T={T:.3g})"
        )
    # e^{-s} oscillates with period 2pi along the contour; cap the panel
    # length so the Gauss rule keeps several nodes per wavelength
    max_len = max(4.0, q.points_per_panel / 3.0)
    edges = [0.0, 1.0]
    while edges[-1] < T:
        edges.append(min(2.0 * edges[-1], edges[-1] + max_len, T))
    xs, ws = np.polynomial.legendre.leggauss(q.points_per_panel)
    nodes, weights = [], []
    for a, b_ in zip(edges, edges[1:]):
        half = 0.5 * (b_ - a)
        nodes.append(a + half * (xs + 1.0))
        weights.append(half * ws)
    tau = np.concatenate(nodes)
    w = np.concatenate(weights)
    return c + 1j * tau, w, tail


def _nested_kernel(kappas, ts, s):
    """f(s, t) = Psi_{k1}(s, t1 + Psi_{k2-k1}(s, t2 + ...)) on the nodes."""
    arg = complex(ts[-1])
    prev = kappas[-2] if len(kappas) > 1 else 0.0
    f = psi(kappas[-1] - prev, s, arg)
    for j in range(len(kappas) - 2, -1, -1):
        gap = kappas[j] - (kappas[j - 1] if j > 0 else 0.0)
        f = psi(gap, s, ts[j] + f)
    return f


def joint_local_time_cf(kappas, ts, q: LocalTimeQuery | None = None) -> complex:
    """CF of (l(kappa_1), ..., l(kappa_d)) at (t_1, ..., t_d), d <= 3."""
    kappas = tuple(float(k) for k in kappas)
    ts = tuple(float(t) for t in ts)
    if not 1 <= len(kappas) <= 3 or len(kappas) != len(ts):
        raise ValueError("need matching kappas and ts, d in {1, 2, 3}")
    if any(b <= a for a, b in zip(kappas, kappas[1:])) or kappas[0] <= 0:
        raise ValueError("levels must be positive and strictly increasing")
    q = q if q is not None else LocalTimeQuery()
    if all(t == 0 for t in ts):
        return 1.0 + 0.0j
    amp = max(abs(t) for t in ts)
    s_up, w, _ = _contour_nodes(kappas[0], amp, q)
    total = 0.0j
    for s in (s_up, np.conj(s_up)):
        total += np.sum(w * _nested_kernel(kappas, ts, s) * np.exp(-s))
    return complex(1.0 + math.sqrt(2.0 / math.pi) * total)


def local_time_cf(kappa: float, t: float, q: LocalTimeQuery | None = None) -> complex:
    """CF of the total local time of the standard excursion at one level."""
    return joint_local_time_cf((kappa,), (t,), q)


def limit_profile_cf(
    kappa: float, t: float, sc: ScalingConstants, q: LocalTimeQuery | None = None
) -> complex:
    """Limit CF of the scaled profile l_n(kappa): phi_{a*kappa}(a*t), a = amp_scale."""
    return local_time_cf(sc.time_scale * kappa, sc.amp_scale * t, q)


def local_time_mean(kappa: float, q: LocalTimeQuery | None = None, h: float = 1e-4) -> float:
    """E l(kappa) by a central difference of the CF at 0."""
    lo = local_time_cf(kappa, -h, q)
    hi = local_time_cf(kappa, h, q)
    return float(((hi - lo) / (2j * h)).real)


def local_time_density(
    kappa: float,
    grid,
    q: LocalTimeQuery | None = None,
    t_max: float = 400.0,
    t_points: int = 4000,
):
    """(atom at 0, density values on grid) for the one-level law.

    density(x) = (2/pi) int_0^inf Im phi(t) sin(t x) dt, tapered with a
    raised cosine over the top half of the t-range to suppress
    truncation ringing; atom = 1 - integrated density.
    """
    q = q if q is not None else LocalTimeQuery()
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0):
        raise ValueError("density grid must be nonnegative")
    ts = np.linspace(0.0, t_max, t_points)
    dt = ts[1] - ts[0]
    s_up, w, _ = _contour_nodes(kappa, max(1.0, t_max), q)
    ims = np.empty_like(ts)
    ims[0] = 0.0
    for half in (s_up, np.conj(s_up)):
        ms = -half
        root = np.sqrt(ms)
        root2 = np.sqrt(2.0 * ms)
        e_neg = np.exp(-kappa * root2)
        e_pos = np.exp(kappa * root2)
        sh = np.sinh(kappa * root2)
        es = np.exp(-half)
        base = 1j * root * e_neg * es * w
        den0 = root * e_pos
        for i in range(1, len(ts)):
            t = ts[i]
            contrib = np.sum(t * base / (den0 - 1j * t * math.sqrt(2.0) * sh))
            ims[i] += math.sqrt(2.0 / math.pi) * contrib.imag
    taper = np.ones_like(ts)
    hi = ts > 0.5 * t_max
    taper[hi] = 0.5 * (1.0 + np.cos(math.pi * (ts[hi] - 0.5 * t_max) / (0.5 * t_max)))
    kernel = ims * taper
    dens = (2.0 / math.pi) * np.trapezoid(
        kernel[None, :] * np.sin(np.outer(grid, ts)), dx=dt, axis=1
    )
    mass = float(np.trapezoid(dens, grid)) if len(grid) > 1 else 0.0
    atom = 1.0 - mass
    tol = max(1e-3, 1000.0 * q.quad_tol)
    if atom < -tol or atom > 1.0 + tol:
        raise QuadratureError(f"inversion mass {mass:.6f} leaves an invalid atom {atom:.6f}")
    return atom, dens


def height_moment_asym(r: int, n: int, sc: ScalingConstants) -> float:
    """Leading-order E H_n^r.

    r = 1: (2 sqrt(pi) / (b sqrt(rho))) sqrt(n);
    r >= 2: (2/(b sqrt(rho)))^r r (r-1) Gamma(r/2) zeta(r) n^{r/2}.
    """
    if r < 1:
        raise ValueError("moment order must be >= 1")
    if r == 1:
        return sc.height_scale * math.sqrt(n)
    coef = (2.0 / sc.b_sqrt_rho) ** r * r * (r - 1) * _gamma(r / 2.0) * _zeta(r)
    return float(coef * n ** (r / 2.0))


def height_llt(n: int, h: int, sc: ScalingConstants, term_tol: float = 1e-16) -> float:
    """Theta-series local limit approximation of P(H_n = h).

    P(H_n = h) ~ 4 b sqrt(rho pi^5 / n) beta^4
                 sum_{m>=1} m^2 (2 m^2 pi^2 beta^2 - 3) e^{-m^2 pi^2 beta^2},
    beta = 2 sqrt(n) / (h b sqrt(rho)).  The sum is truncated once terms
    drop below term_tol.
    """
    if h < 1:
        raise ValueError("h must be >= 1")
    bsr = sc.b_sqrt_rho
    beta = 2.0 * math.sqrt(n) / (h * bsr)
    x = math.pi**2 * beta**2
    total = 0.0
    m = 1
    while m < 10000:
        mx = m * m * x
        e = math.exp(-mx) if mx < 700.0 else 0.0
        term = m * m * (2.0 * mx - 3.0) * e
        total += term
        if abs(term) < term_tol and m >= 3:
            break
        m += 1
    return 4.0 * bsr * math.sqrt(math.pi**5 / n) * beta**4 * total
