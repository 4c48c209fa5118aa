"""Bivariate standard normal CDF.

Scalar implementation of the Drezner-Wesolowsky / Genz algorithm: Gauss-
Legendre quadrature of the correlation integral with 6, 12 or 20 nodes
depending on |rho|, switching to the transformed near-singular expansion for
|rho| >= 0.925. Absolute error is far below the 1e-7 this package requires.
"""

from __future__ import annotations

import math

from scipy.special import ndtr

_TWOPI = 2.0 * math.pi

# Gauss-Legendre (weight, node) pairs for n = 6, 12, 20; nodes enter as +-x.
_GL6 = (
    (0.1713244923791705, 0.9324695142031522),
    (0.3607615730481384, 0.6612093864662647),
    (0.4679139345726904, 0.2386191860831970),
)
_GL12 = (
    (0.04717533638651177, 0.9815606342467191),
    (0.1069393259953183, 0.9041172563704750),
    (0.1600783285433464, 0.7699026741943050),
    (0.2031674267230659, 0.5873179542866171),
    (0.2334925365383547, 0.3678314989981802),
    (0.2491470458134029, 0.1252334085114692),
)
_GL20 = (
    (0.01761400713915212, 0.9931285991850949),
    (0.04060142980038694, 0.9639719272779138),
    (0.06267204833410906, 0.9122344282513259),
    (0.08327674157670475, 0.8391169718222188),
    (0.1019301198172404, 0.7463319064601508),
    (0.1181945319615184, 0.6360536807265150),
    (0.1316886384491766, 0.5108670019508271),
    (0.1420961093183821, 0.3737060887154196),
    (0.1491729864726037, 0.2277858511416451),
    (0.1527533871307259, 0.07652652113349733),
)


def _phi(x: float) -> float:
    return float(ndtr(x))


def bvn_upper(dh: float, dk: float, r: float) -> float:
    """P(X > dh, Y > dk) for standard bivariate normal with correlation r."""
    if not -1.0 <= r <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {r}")
    if math.isinf(dh) or math.isinf(dk):
        if dh == math.inf or dk == math.inf:
            return 0.0
        if dh == -math.inf and dk == -math.inf:
            return 1.0
        return _phi(-dk) if dh == -math.inf else _phi(-dh)
    if r == 0.0:
        return _phi(-dh) * _phi(-dk)

    h, k = dh, dk
    hk = h * k
    bvn = 0.0
    ar = abs(r)
    rule = _GL6 if ar < 0.3 else (_GL12 if ar < 0.75 else _GL20)

    if ar < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r)
        for w, x in rule:
            for sgn in (-1.0, 1.0):
                sn = math.sin(asr * (sgn * x + 1.0) / 2.0)
                bvn += w * math.exp((sn * hk - hs) / (1.0 - sn * sn))
        bvn = bvn * asr / (2.0 * _TWOPI) + _phi(-h) * _phi(-k)
        return min(1.0, max(0.0, bvn))

    if r < 0.0:
        k = -k
        hk = -hk
    if ar < 1.0:
        a_sq = (1.0 - r) * (1.0 + r)
        a = math.sqrt(a_sq)
        b_sq = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 16.0
        asr = -(b_sq / a_sq + hk) / 2.0
        if asr > -100.0:
            bvn = a * math.exp(asr) * (
                1.0
                - c * (b_sq - a_sq) * (1.0 - d * b_sq / 5.0) / 3.0
                + c * d * a_sq * a_sq / 5.0
            )
        if -hk < 100.0:
            b = math.sqrt(b_sq)
            bvn -= (
                math.exp(-hk / 2.0)
                * math.sqrt(_TWOPI)
                * _phi(-b / a)
                * b
                * (1.0 - c * b_sq * (1.0 - d * b_sq / 5.0) / 3.0)
            )
        a /= 2.0
        for w, x in rule:
            for sgn in (-1.0, 1.0):
                xs = (a * (sgn * x + 1.0)) ** 2
                asr = -(b_sq / xs + hk) / 2.0
                if asr > -100.0:
                    rs = math.sqrt(1.0 - xs)
                    sp = 1.0 + c * xs * (1.0 + d * xs)
                    ep = math.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
                    bvn += a * w * math.exp(asr) * (ep - sp)
        bvn = -bvn / _TWOPI

    if r > 0.0:
        bvn += _phi(-max(h, k))
    else:
        bvn = -bvn
        if k > h:
            if h < 0.0:
                bvn += _phi(k) - _phi(h)
            else:
                bvn += _phi(-h) - _phi(-k)
    return min(1.0, max(0.0, bvn))


def bvn_cdf(x: float, y: float, rho: float) -> float:
    """P(X <= x, Y <= y) for standard bivariate normal with correlation rho."""
    return bvn_upper(-x, -y, rho)
