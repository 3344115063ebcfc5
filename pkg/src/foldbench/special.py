"""Special functions backing the p-values and critical differences.

Everything here is plain double-precision Python: regularized incomplete
gamma/beta via the classic series/continued-fraction split, the standard
normal CDF from ``math.erfc``, Gauss-Legendre nodes by Newton iteration,
and the quantile of the range of k standard normals by quadrature plus
bisection.
"""

from __future__ import annotations

import math
from functools import lru_cache

from .errors import ValidationError

_MACHEP = 1.11022302462515654042e-16  # 2**-53
_MAX_ITER = 500

SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def norm_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / SQRT2)


def _igam_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by power series; x <= a + 1."""
    if x <= 0.0:
        return 0.0
    ax = a * math.log(x) - x - math.lgamma(a)
    if ax < -700.0:
        return 0.0
    ax = math.exp(ax)
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _MACHEP:
            break
    return total * ax


def _igamc_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by continued fraction; x > a + 1."""
    ax = a * math.log(x) - x - math.lgamma(a)
    if ax < -700.0:
        return 0.0
    ax = math.exp(ax)
    # Lentz-style evaluation of the Legendre continued fraction.
    big = 4.503599627370496e15
    biginv = 2.22044604925031308085e-16
    y = 1.0 - a
    z = x + y + 1.0
    c = 0.0
    pkm2, qkm2 = 1.0, x
    pkm1, qkm1 = x + 1.0, z * x
    ans = pkm1 / qkm1
    for _ in range(_MAX_ITER):
        c += 1.0
        y += 1.0
        z += 2.0
        yc = y * c
        pk = pkm1 * z - pkm2 * yc
        qk = qkm1 * z - qkm2 * yc
        if qk != 0.0:
            r = pk / qk
            t = abs((ans - r) / r)
            ans = r
        else:
            t = 1.0
        pkm2, pkm1 = pkm1, pk
        qkm2, qkm1 = qkm1, qk
        if abs(pk) > big:
            pkm2 *= biginv
            pkm1 *= biginv
            qkm2 *= biginv
            qkm1 *= biginv
        if t <= _MACHEP:
            break
    return ans * ax


def reg_gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if a <= 0.0:
        raise ValidationError(f"gamma shape must be positive, got {a}")
    if x < 0.0:
        raise ValidationError(f"gamma argument must be non-negative, got {x}")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _igam_series(a, x)
    return _igamc_cf(a, x)


def chi2_sf(x: float, df: int) -> float:
    """Survival function of the chi-squared distribution with df degrees."""
    if df <= 0:
        raise ValidationError(f"chi-squared df must be positive, got {df}")
    if x < 0.0:
        raise ValidationError(f"chi-squared statistic must be non-negative, got {x}")
    return min(1.0, max(0.0, reg_gamma_q(df / 2.0, x / 2.0)))


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta; modified Lentz."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0.0 or b <= 0.0:
        raise ValidationError(f"beta shapes must be positive, got a={a}, b={b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    if x == 0.5 and a == b:
        # Exact by symmetry; keeps f_sf(1, d, d) == 0.5 without roundoff.
        return 0.5
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front) if ln_front > -700.0 else 0.0
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(x: float, d1: int, d2: int) -> float:
    """Survival function of the F distribution with (d1, d2) degrees."""
    if d1 <= 0 or d2 <= 0:
        raise ValidationError(f"F df must be positive, got d1={d1}, d2={d2}")
    if x < 0.0:
        raise ValidationError(f"F statistic must be non-negative, got {x}")
    if x == 0.0:
        return 1.0
    t = d2 / (d2 + d1 * x)
    return min(1.0, max(0.0, reg_inc_beta(d2 / 2.0, d1 / 2.0, t)))


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Nodes and weights of n-point Gauss-Legendre quadrature on [-1, 1].

    Newton iteration on the Legendre polynomial with the usual cosine
    initial guesses; converges to full double precision.
    """
    nodes = [0.0] * n
    weights = [0.0] * n
    m = (n + 1) // 2
    for i in range(m):
        z = math.cos(math.pi * (i + 0.75) / (n + 0.5))
        for _ in range(100):
            p1, p2 = 1.0, 0.0
            for j in range(n):
                p1, p2 = ((2 * j + 1) * z * p1 - j * p2) / (j + 1), p1
            dp = n * (z * p1 - p2) / (z * z - 1.0)
            z_old = z
            z = z_old - p1 / dp
            if abs(z - z_old) < 1e-15:
                break
        nodes[i] = -z
        nodes[n - 1 - i] = z
        w = 2.0 / ((1.0 - z * z) * dp * dp)
        weights[i] = w
        weights[n - 1 - i] = w
    return tuple(nodes), tuple(weights)


_GL_POINTS = 20
_PANEL_WIDTH = 0.5
_DOMAIN_PAD = 8.0  # integrand is below 1e-15 outside [-8, 8+w]


def normal_range_cdf(w: float, k: int) -> float:
    """CDF at w of the range of k independent standard normals.

    Composite Gauss-Legendre over u in [-8, 8+w]; integrand
    k * phi(u) * (Phi(u) - Phi(u-w))**(k-1).
    """
    if k < 2:
        raise ValidationError(f"range CDF needs k >= 2, got {k}")
    if w <= 0.0:
        return 0.0
    lo = -_DOMAIN_PAD
    hi = _DOMAIN_PAD + w
    panels = max(1, math.ceil((hi - lo) / _PANEL_WIDTH))
    nodes, weights = gauss_legendre(_GL_POINTS)
    step = (hi - lo) / panels
    km1 = k - 1
    total = 0.0
    for p in range(panels):
        a = lo + p * step
        mid = a + 0.5 * step
        half = 0.5 * step
        for t, wt in zip(nodes, weights):
            u = mid + half * t
            inner = norm_cdf(u) - norm_cdf(u - w)
            if inner <= 0.0:
                continue
            total += wt * norm_pdf(u) * inner**km1
    # equal-width panels: one Jacobian factor for the whole sum
    return k * total * (step / 2.0)


@lru_cache(maxsize=None)
def studentized_range_quantile(k: int, alpha: float) -> float:
    """q_alpha = w_alpha / sqrt(2), where P(range of k normals <= w_alpha) = 1 - alpha.

    Bisection on w to an interval width of 1e-6.
    """
    if k < 2:
        raise ValidationError(f"quantile needs k >= 2, got {k}")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    target = 1.0 - alpha
    lo, hi = 0.0, 10.0
    while normal_range_cdf(hi, k) < target:
        hi *= 2.0
        if hi > 1e4:
            raise ValidationError(f"quantile search diverged for k={k}, alpha={alpha}")
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if normal_range_cdf(mid, k) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) / SQRT2
