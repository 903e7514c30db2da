"""Deterministic counterexample demonstrations.

Three small studies showing where comparison/wellposedness assumptions are
sharp: an entropic generator whose difference quotients escape every linear
bound as the truncation level grows, a jump integrand of super-quadratic
growth, and a constrained-utility generator that is not convex in u.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from .reports import CsvTable


def _u_pm(x, n, sign):
    return 0.5 * (sign * x ** (-1.5) + n * x)


def demo_counterexample_royer(n_list) -> CsvTable:
    """Integrals I1(n), I2(n) for the layered pair u± = (±x^{-3/2} + n x)/2
    supported on (1/n, 1].

    I2(n) stays below 2 for every n while I1(n) >= n(2 - 2/sqrt(n)) blows up:
    exponential moments of the difference u+ - u- diverge even though the
    linear ones stay bounded.
    """
    n_list = [int(n) for n in n_list]
    if any(n < 2 for n in n_list):
        raise ValueError("need integers n >= 2")
    table = CsvTable(["n", "I1", "I2", "lower_bound"])
    for n in n_list:
        a = 1.0 / n

        def integrand1(x):
            up = _u_pm(x, n, +1.0)
            um = _u_pm(x, n, -1.0)
            return math.exp(up) - math.exp(um) - up + um

        def integrand2(x):
            return (x ** (-1.5)) * min(1.0, x)

        I1, err1 = quad(integrand1, a, 1.0, epsabs=1e-8, epsrel=1e-10,
                        limit=500)
        I2, err2 = quad(integrand2, a, 1.0, epsabs=1e-12, epsrel=1e-12,
                        limit=500)
        if not (math.isfinite(I1) and math.isfinite(I2)):
            raise RuntimeError(f"quadrature failed at n={n}")
        if err1 > max(1e-6, 1e-8 * abs(I1)) or err2 > 1e-8:
            raise RuntimeError(f"quadrature did not converge at n={n}")
        lower = n * (2.0 - 2.0 / math.sqrt(n))
        table.add(n, I1, I2, lower)
    return table


def demo_counterexample_quadratic_growth(psi_grid=(0.0, 0.5, 1.0, 2.0),
                                         u_max: float = 10.0,
                                         n_grid: int = 4001) -> CsvTable:
    """sup |g(u) - psi u| / u^2 over a symmetric u-grid for g(u) = e^u - u - 1.

    No linear recentering psi makes the ratio bounded: the sup grows with the
    range endpoint for every psi.
    """
    if u_max <= 0:
        raise ValueError("u_max must be positive")
    us = np.linspace(-u_max, u_max, n_grid)
    us = us[us != 0.0]
    g = np.exp(us) - us - 1.0
    table = CsvTable(["psi", "u_max", "sup_ratio", "argmax_u"])
    for psi in psi_grid:
        ratio = np.abs(g - psi * us) / (us * us)
        j = int(np.argmax(ratio))
        table.add(float(psi), float(u_max), float(ratio[j]), float(us[j]))
    return table


def demo_nonconvex_generator(C=(0.0, 1.0), psi: float = 1.0, beta: float = 0.0,
                             alpha: float = 1.0, u_grid=None):
    """Midpoint-convexity scan of f(u) = min_{theta in C} (-theta beta
    + g_alpha(u - theta psi)) on a grid.

    Returns (table, certificate) where certificate is (u0, u1, violation) for
    the first midpoint violation found, or None.
    """
    if u_grid is None:
        u_grid = np.linspace(-2.0, 2.0, 401)
    u_grid = np.asarray(u_grid, dtype=float)
    thetas = np.asarray(C, dtype=float)

    def f(u):
        au = alpha * (u - thetas * psi)
        return float(np.min((np.exp(au) - au - 1.0) / alpha - thetas * beta))

    vals = np.array([f(u) for u in u_grid])
    table = CsvTable(["u", "f"])
    for u, v in zip(u_grid, vals):
        table.add(float(u), float(v))
    cert = None
    n = len(u_grid)
    for i in range(n):
        for j in range(i + 2, n, 2):
            mid = (i + j) // 2
            viol = vals[mid] - 0.5 * (vals[i] + vals[j])
            if viol > 1e-10:
                cert = (float(u_grid[i]), float(u_grid[j]), float(viol))
                break
        if cert:
            break
    return table, cert
