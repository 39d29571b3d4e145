"""Myring hull profile: hull radius as a function of axial position.

The profile has three sections: an elliptic-power nose (truncated by
a_offset), a cylindrical mid-body of diameter d, and a cubic tail.  The tail
cubic is expressed in (xi - l_f), which makes the radius continuous (= d/2)
at the mid/tail junction; the hull is cut at xi = l before the cubic reaches
zero, so the tail tip has a small finite radius.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .params import HullGeometry


def myring_radius(xi, hull: HullGeometry):
    """Hull radius (m) at axial position xi (m from the nose tip).

    Raises DomainError outside 0 <= xi <= l.
    """
    if not np.isfinite(xi):
        raise DomainError("xi must be finite")
    if xi < 0.0 or xi > hull.l:
        raise DomainError(f"xi={xi} outside hull [0, {hull.l}]")

    nose_end = hull.a - hull.a_offset
    if xi <= nose_end:
        frac = (xi + hull.a_offset - hull.a) / hull.a
        return 0.5 * hull.d * (1.0 - frac * frac) ** (1.0 / hull.n_exp)
    if xi <= hull.l_f:
        return 0.5 * hull.d

    c, d, t = hull.c, hull.d, math.tan(hull.theta_tail)
    s = xi - hull.l_f
    return (0.5 * d
            - (3.0 * d / (2.0 * c * c) - t / c) * s * s
            + (d / c ** 3 - t / (c * c)) * s ** 3)


def hull_profile(hull: HullGeometry, samples):
    """Sample the hull radius on a uniform grid over [0, l].

    Returns (xi, r) arrays of length ``samples`` (>= 2, endpoints included).
    """
    if samples < 2:
        raise DomainError("samples must be >= 2")
    xi = np.linspace(0.0, hull.l, int(samples))
    r = np.array([myring_radius(x, hull) for x in xi])
    return xi, r
