"""Independent reference solutions used as test oracles.

Everything here is derived directly from the method of characteristics
for the scalar conservation law rho_t + (v*rho*(1-rho/r))_x = 0 and never
touches the solver under test.
"""

import numpy as np


def rarefaction_cell_averages(edges, t, v_max=1.0, rho_max=1.0):
    """Exact cell averages of the dam-break solution rho_L=rho_max -> rho_R=0.

    The entropy solution is a rarefaction fan centered at x=0:
    rho = rho_max for x < -v_max*t, 0 for x > v_max*t and the linear
    profile rho_max*(1 - x/(v_max*t))/2 in between. Cell averages are the
    exact integrals of this piecewise-linear profile.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    w = v_max * t
    res = np.zeros(len(a))
    # constant region x < -w
    res += np.clip(np.minimum(b, -w) - a, 0.0, None) * rho_max
    # fan region -w..w: antiderivative of rho_max*(1 - x/w)/2
    lo = np.clip(a, -w, w)
    hi = np.clip(b, -w, w)

    def anti(x):
        return rho_max * (x / 2.0 - x**2 / (4.0 * w))

    res += np.where(hi > lo, anti(hi) - anti(lo), 0.0)
    return res / (b - a)


def stationary_shock_profile(edges, rho_left=0.2, rho_right=0.8):
    """Exact cell averages of the standing-shock solution with the jump at x=0.

    For Greenshields flux with v_max=rho_max=1 the states 0.2/0.8 carry the
    same flux, so the Rankine-Hugoniot speed is zero and the initial data
    is the solution for all time.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    left_frac = np.clip(np.minimum(b, 0.0) - a, 0.0, None) / (b - a)
    return rho_left * left_frac + rho_right * (1.0 - left_frac)


def shock_front_index(rho, level=0.5):
    """Index of the first cell whose density exceeds ``level``."""
    above = np.flatnonzero(np.asarray(rho) > level)
    return int(above[0]) if len(above) else len(rho)
