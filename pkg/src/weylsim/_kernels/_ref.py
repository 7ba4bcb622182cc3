"""Pure-numpy reference implementations of the hot kernels.

These define the semantics; the compiled extension must match them to
round-off. Both backends take flat float64 / complex128 arrays.
"""

import numpy as np

SMALL_PHASE = 1e-8


def weyl_propagate(c0, c1, px, py, t):
    """Apply the node-wise free-Weyl unitary exp(i t (sigma . p)) in
    dimensionless units (H = -(sigma_x px + sigma_y py), hbar = c = 1).

    Returns the propagated component pair (d0, d1).
    """
    r = np.hypot(px, py)
    rt = r * t
    ct = np.cos(rt)
    # sin(rt)/r with a series branch: t (1 - (rt)^2 / 6) as rt -> 0
    small = np.abs(rt) < SMALL_PHASE
    safe_r = np.where(r > 0, r, 1.0)
    s = np.where(small, t * (1.0 - rt * rt / 6.0), np.sin(rt) / safe_r)
    d0 = ct * c0 + 1j * s * (px - 1j * py) * c1
    d1 = 1j * s * (px + 1j * py) * c0 + ct * c1
    return d0, d1


def trajectory_sums(px, py, wts, n, m, width, times):
    """Weighted sums of the two mean-position integrands over quadrature nodes.

    Integrand (dimensionless, hbar = c = Delta = 1, packet width ``width``):

        rho = (2 w^2/pi) exp(-2 w^2 ((px+n)^2 + (py+m)^2))
        gx  = -(2 px^2 t + py^2 sin(2|p|t)/|p|) / (2 p^2)
        gy  = -(px py (2 t - sin(2|p|t)/|p|)) / (2 p^2)

    Returns arrays (sum_x, sum_y) of length len(times).
    """
    times = np.asarray(times, dtype=float)
    g = wts * (2.0 * width * width / np.pi) * np.exp(
        -2.0 * width * width * ((px + n) ** 2 + (py + m) ** 2))
    p2 = px * px + py * py
    origin = p2 == 0.0
    safe_p2 = np.where(origin, 1.0, p2)
    p = np.sqrt(safe_p2)
    out_x = np.empty(times.shape)
    out_y = np.empty(times.shape)
    for j, t in enumerate(times):
        arg = 2.0 * p * t
        small = np.abs(arg) < SMALL_PHASE
        sin_over_p = np.where(small, 2.0 * t * (1.0 - arg * arg / 6.0), np.sin(arg) / p)
        fx = -(2.0 * px * px * t + py * py * sin_over_p) / (2.0 * safe_p2)
        fy = -(px * py * (2.0 * t - sin_over_p)) / (2.0 * safe_p2)
        # both integrands extend analytically to p = 0: gx -> -t, gy -> 0
        fx = np.where(origin, -t, fx)
        fy = np.where(origin, 0.0, fy)
        out_x[j] = np.dot(g, fx)
        out_y[j] = np.dot(g, fy)
    return out_x, out_y
