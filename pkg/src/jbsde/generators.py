"""Generator functions f(t,y,z,u) = fhat(t,y,z) + sum_i g(t,y,z,u_i,e_i) zeta w_i.

Includes structural condition checks, truncation, approximating sequences with
shrinking jump sets, slope fields, drift adjustments, closed-form a-priori
bounds and named builders for the standard model generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .measures import MarkMeasure, ZetaDensity


class GeneratorError(ValueError):
    pass


FD_STEP = 1e-6


def _zdot(b, z):
    """b . z for z either a single vector or a batch of rows (n, d)."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    z = np.asarray(z, dtype=float)
    if z.ndim >= 2:
        k = min(z.shape[-1], len(b))
        return z[..., :k] @ b[:k]
    k = min(len(np.atleast_1d(z)), len(b))
    return float(b[:k] @ np.atleast_1d(z)[:k])


@dataclass(frozen=True)
class GeneratorSpec:
    """The split-form generator (fhat, g) with jump-set selector A.

    g acts entrywise on scalar u values per mark; full_eval, when present,
    overrides eval_generator for generators whose jump part couples the marks
    (e.g. an inner optimization over a trading strategy).
    """

    fhat: Callable  # fhat(t, y, z) -> float
    g: Callable  # g(t, y, z, u, e) -> float, vectorized in u/e
    jump_selector: Callable[[float], bool] | None = None
    K_yz: float = 0.0
    slope: Callable | None = None  # g'(t, y, z, u, e) w.r.t. u
    depends_on_y: bool = False
    depends_on_z: bool = False
    full_eval: Callable | None = None  # full_eval(t, y, z, u_vec, mm, zeta)
    batch_eval: Callable | None = None  # vectorized over states/paths
    kind: str = "custom"
    params: dict | None = None

    def slope_at(self, t, y, z, u, e):
        if self.slope is not None:
            return np.asarray(self.slope(t, y, z, u, e), dtype=float)
        up = self.g(t, y, z, np.asarray(u) + FD_STEP, e)
        dn = self.g(t, y, z, np.asarray(u) - FD_STEP, e)
        return (np.asarray(up, dtype=float) - np.asarray(dn, dtype=float)) / (2 * FD_STEP)


def eval_generator(gs: GeneratorSpec, t, y, z, u, mm: MarkMeasure,
                   zeta: ZetaDensity) -> float:
    u = np.asarray(u, dtype=float)
    if u.shape != (mm.m,):
        raise GeneratorError(f"u must have {mm.m} entries")
    if gs.full_eval is not None:
        val = float(gs.full_eval(t, y, z, u, mm, zeta))
    else:
        val = float(gs.fhat(t, y, z))
        if mm.m:
            mask = mm.selector_mask(gs.jump_selector)
            if mask.any():
                marks = mm.marks[mask]
                gv = np.asarray(gs.g(t, y, z, u[mask], marks), dtype=float)
                val += float(np.sum(gv * zeta(t, marks) * mm.weights[mask]))
    if not math.isfinite(val):
        raise GeneratorError(f"generator nonfinite at t={t}, y={y}")
    return val


@dataclass
class ConditionReport:
    name: str
    passed: bool
    witness: dict


def _u_probe_grid(lo: float, hi: float, n: int = 2001) -> np.ndarray:
    return np.linspace(lo, hi, n)


def check_afin(gs: GeneratorSpec, u_box=(-2.0, 2.0), y_box=(-2.0, 2.0),
               z_box=(-10.0, 10.0), marks=(1.0,), margin: float = 1e-9,
               n_probe: int = 201) -> ConditionReport:
    """Sample g' over a probe box; pass iff g' > -1 + margin and bounded above."""
    us = _u_probe_grid(*u_box, n_probe)
    worst = None
    lo = np.inf
    hi = -np.inf
    for y in np.linspace(*y_box, 5):
        for z in np.linspace(*z_box, 5):
            for e in marks:
                sl = np.asarray(gs.slope_at(0.0, y, np.atleast_1d(z), us, e))
                j = int(np.argmin(sl))
                if sl[j] < lo:
                    lo = float(sl[j])
                    worst = {"y": float(y), "z": float(z), "u": float(us[j]),
                             "e": float(e), "slope": float(sl[j])}
                hi = max(hi, float(sl.max()))
    passed = lo > -1.0 + margin and np.isfinite(hi)
    return ConditionReport("A_fin", passed,
                           {"inf_slope": lo, "sup_slope": hi, "worst": worst})


def check_ainfi(gs: GeneratorSpec, c: float, marks=(1.0,),
                n_probe: int = 10001) -> ConditionReport:
    """Estimate K(c) = sup_{0<|u|<=c} |g'(u)|/|u| and delta(c) = 1 + inf g'."""
    if c <= 0:
        raise GeneratorError("c must be positive")
    us = _u_probe_grid(-c, c, n_probe)
    us = us[us != 0.0]
    K = 0.0
    inf_slope = np.inf
    for e in marks:
        sl = np.asarray(gs.slope_at(0.0, 0.0, np.zeros(1), us, e))
        K = max(K, float(np.max(np.abs(sl) / np.abs(us))))
        inf_slope = min(inf_slope, float(sl.min()))
    delta = 1.0 + inf_slope
    passed = math.isfinite(K) and delta > 0.0
    return ConditionReport("A_infi", passed, {"K": K, "delta": delta, "c": c})


@dataclass(frozen=True)
class TruncationBand:
    a: Callable[[float], float]
    b: Callable[[float], float]

    def validate(self, nodes) -> None:
        for t in nodes:
            if self.a(t) > self.b(t):
                raise GeneratorError(f"band inverted at t={t}")

    def kappa(self, t, y):
        return np.minimum(np.maximum(self.a(t), y), self.b(t))


def truncate_generator(gs: GeneratorSpec, band: TruncationBand) -> GeneratorSpec:
    """f~(t,y,z,u) = f(t, kappa(t,y), z, kappa(t,y+u) - kappa(t,y)).

    kappa is a contraction, so the Lipschitz constant is not increased.
    """
    def fhat(t, y, z):
        return gs.fhat(t, band.kappa(t, y), z)

    def g(t, y, z, u, e):
        ky = band.kappa(t, y)
        return gs.g(t, ky, z, band.kappa(t, np.asarray(y) + np.asarray(u)) - ky, e)

    if gs.full_eval is not None:
        def full_eval(t, y, z, u, mm, zeta):
            ky = band.kappa(t, y)
            return gs.full_eval(t, ky, z, band.kappa(t, y + u) - ky, mm, zeta)
    else:
        full_eval = None
    if gs.batch_eval is not None:
        def batch_eval(t, y, z, u, mm, zeta):
            ky = band.kappa(t, np.asarray(y, dtype=float))
            ku = band.kappa(t, np.asarray(y, dtype=float)[:, None]
                            + np.asarray(u, dtype=float)) - ky[:, None]
            return gs.batch_eval(t, ky, z, ku, mm, zeta)
    else:
        batch_eval = None
    return replace(gs, fhat=fhat, g=g, slope=None, full_eval=full_eval,
                   batch_eval=batch_eval, kind=gs.kind + "_truncated")


def approx_sequence(gs: GeneratorSpec, selector_family: Callable[[int], Callable],
                    n: int) -> GeneratorSpec:
    """Same generator with jump set restricted to A_n of a nested family."""
    return replace(gs, jump_selector=selector_family(n))


def gamma_slope(gs: GeneratorSpec, t, y, z, u, u_prime, e) -> float:
    """Difference quotient (g(u)-g(u'))/(u-u') on the jump set, 0 if u = u'."""
    if gs.jump_selector is not None and not gs.jump_selector(e):
        return 0.0
    if u == u_prime:
        return 0.0
    gu = float(np.asarray(gs.g(t, y, z, np.asarray(u, dtype=float), e)))
    gup = float(np.asarray(gs.g(t, y, z, np.asarray(u_prime, dtype=float), e)))
    return (gu - gup) / (u - u_prime)


def drift_adjust(gs: GeneratorSpec, b: Callable[[float], np.ndarray]) -> GeneratorSpec:
    """Add b(t) . z to fhat (generator form under a Girsanov drift change)."""
    def fhat(t, y, z):
        return gs.fhat(t, y, z) + _zdot(b(t), z)

    if gs.full_eval is not None:
        def full_eval(t, y, z, u, mm, zeta):
            return gs.full_eval(t, y, z, u, mm, zeta) + _zdot(b(t), z)
    else:
        full_eval = None
    if gs.batch_eval is not None:
        def batch_eval(t, y, z, u, mm, zeta):
            return gs.batch_eval(t, y, z, u, mm, zeta) + _zdot(b(t), z)
    else:
        batch_eval = None
    sup_b = max(float(np.linalg.norm(np.atleast_1d(b(t))))
                for t in np.linspace(0, 1, 11))
    return replace(gs, fhat=fhat, full_eval=full_eval, batch_eval=batch_eval,
                   K_yz=gs.K_yz + sup_b, depends_on_z=True)


def apriori_bound(K_yz: float, xi_sup: float, f0_sup: float, T: float,
                  t: float) -> float:
    """|Y_t| <= exp(K_yz (T-t)) (|xi|_inf + (T-t) |f(0,0,0)|_inf)."""
    if min(K_yz, xi_sup, f0_sup, T, t) < 0:
        raise GeneratorError("arguments must be nonnegative")
    if t > T:
        raise GeneratorError("t > T")
    return math.exp(K_yz * (T - t)) * (xi_sup + (T - t) * f0_sup)


def ode_bounds(kind: str, params: dict) -> TruncationBand:
    """Closed-form comparison ODE bounds packaged as a truncation band.

    two-sided-K1K2: b(t) = (|xi|+K1/K2) e^{K2(T-t)} - K1/K2 (linear branch
    |xi| + K1(T-t) when K2=0), a = -b.
    positive-K: a(t) = C e^{-K(T-t)}, b(t) = |xi| e^{K(T-t)}.
    """
    T = params["T"]
    if kind == "two-sided-K1K2":
        K1, K2, xi = params["K1"], params["K2"], params["xi_sup"]
        if min(K1, abs(K2), xi) < 0:
            raise GeneratorError("nonnegative parameters required")
        if K2 == 0.0:
            b = lambda t: xi + K1 * (T - t)
        else:
            b = lambda t: (xi + K1 / K2) * math.exp(K2 * (T - t)) - K1 / K2
        return TruncationBand(a=lambda t: -b(t), b=b)
    if kind == "positive-K":
        C, K, xi = params["C"], params["K"], params["xi_sup"]
        if C <= 0:
            raise GeneratorError("C must be positive")
        return TruncationBand(a=lambda t: C * math.exp(-K * (T - t)),
                              b=lambda t: xi * math.exp(K * (T - t)))
    raise GeneratorError(f"unknown ode_bounds kind {kind!r}")


# ---------------------------------------------------------------------------
# named builders


def entropic_g(alpha: float):
    def g(t, y, z, u, e):
        au = alpha * np.asarray(u, dtype=float)
        return (np.exp(au) - au - 1.0) / alpha

    def slope(t, y, z, u, e):
        return np.exp(alpha * np.asarray(u, dtype=float)) - 1.0

    return g, slope


def build_named_generator(kind: str, params: dict, market=None) -> GeneratorSpec:
    """Construct one of the standard generators by name.

    kinds: entropic, exp_utility, exp_utility_purejump, power_transformed,
    linear, gooddeal.
    """
    params = dict(params)
    if kind == "entropic":
        alpha = params["alpha"]
        g, slope = entropic_g(alpha)
        return GeneratorSpec(fhat=lambda t, y, z: 0.0, g=g, slope=slope,
                             K_yz=0.0, kind=kind, params=params)

    if kind == "exp_utility":
        alpha = params["alpha"]
        phi = params["phi"]  # callable t -> vector, or constant vector
        phi_f = phi if callable(phi) else (lambda t, v=np.atleast_1d(phi): v)
        g, slope = entropic_g(alpha)
        def fhat(t, y, z):
            p = np.asarray(phi_f(t), dtype=float)
            return -float(p @ p) / (2.0 * alpha)
        return GeneratorSpec(fhat=fhat, g=g, slope=slope, K_yz=0.0,
                             depends_on_z=False, kind=kind, params=params)

    if kind == "exp_utility_purejump":
        alpha = params["alpha"]
        beta = params["beta"]  # callable t -> float
        psi = params["psi"]  # callable (t, marks) -> vector
        thetas = np.asarray(params["theta_grid"], dtype=float)  # candidate strategies
        beta_f = beta if callable(beta) else (lambda t, v=float(beta): v)
        ge, slope = entropic_g(alpha)

        def full_eval(t, y, z, u, mm, zeta):
            zw = zeta(t, mm.marks) * mm.weights
            pv = np.asarray(psi(t, mm.marks), dtype=float)
            vals = np.empty(len(thetas))
            for j, th in enumerate(thetas):
                au = alpha * (u - th * pv)
                vals[j] = -th * beta_f(t) + float(
                    np.sum((np.exp(au) - au - 1.0) / alpha * zw))
            return float(vals.min())

        return GeneratorSpec(fhat=lambda t, y, z: 0.0, g=ge, slope=slope,
                             full_eval=full_eval, K_yz=0.0, kind=kind,
                             params=params)

    if kind == "power_transformed":
        gamma = params["gamma"]
        phi = params.get("phi", 0.0)
        phi_f = phi if callable(phi) else (lambda t, v=np.atleast_1d(phi): v)
        c1 = gamma / (2.0 * (1.0 - gamma) ** 2)
        c2 = gamma / (1.0 - gamma)

        def fhat(t, y, z):
            p = np.asarray(phi_f(t), dtype=float)
            return c1 * float(p @ p) * np.asarray(y, dtype=float) + c2 * _zdot(p, z)

        def g(t, y, z, u, e):
            u = np.asarray(u, dtype=float)
            y = np.asarray(y, dtype=float)
            return ((u + y) ** (1.0 - gamma) * y ** gamma - y) / (1.0 - gamma) - u

        def slope(t, y, z, u, e):
            u = np.asarray(u, dtype=float)
            return (np.asarray(y) / (u + np.asarray(y))) ** gamma - 1.0

        K = c1 * max(float(np.asarray(phi_f(t)) @ np.asarray(phi_f(t)))
                     for t in np.linspace(0, 1, 11))
        K += c2 * max(float(np.linalg.norm(np.atleast_1d(phi_f(t))))
                      for t in np.linspace(0, 1, 11))
        return GeneratorSpec(fhat=fhat, g=g, slope=slope, K_yz=K,
                             depends_on_y=True, depends_on_z=True, kind=kind,
                             params=params)

    if kind == "linear":
        a0 = params.get("alpha0", 0.0)
        a = params.get("alpha", 0.0)
        b = np.atleast_1d(params.get("beta", 0.0)).astype(float)
        gam = params.get("gamma")  # callable e -> float or mark-vector

        def gamma_at(e):
            if gam is None:
                return np.zeros_like(np.asarray(e, dtype=float))
            if callable(gam):
                return np.asarray(gam(e), dtype=float)
            return np.asarray(gam, dtype=float) * np.ones_like(
                np.asarray(e, dtype=float))

        def fhat(t, y, z):
            return a0 + a * np.asarray(y, dtype=float) + _zdot(b, z)

        def g(t, y, z, u, e):
            return gamma_at(e) * np.asarray(u, dtype=float)

        def slope(t, y, z, u, e):
            return gamma_at(e) * np.ones_like(np.asarray(u, dtype=float))

        return GeneratorSpec(fhat=fhat, g=g, slope=slope,
                             K_yz=abs(a) + float(np.linalg.norm(b)),
                             depends_on_y=(a != 0.0), depends_on_z=bool(b.any()),
                             kind=kind, params=params)

    if kind == "gooddeal":
        # pointwise supremum over no-good-deal kernels; the inner maximization
        # lives in the finance module to keep the KKT code in one place
        from . import finance

        K_f = params["K"]
        K_func = K_f if callable(K_f) else (lambda t, v=float(K_f): v)
        phi = params["phi"]
        phi_f = phi if callable(phi) else (lambda t, v=np.atleast_1d(phi): v)
        sigma = params["sigma"]
        sigma_f = sigma if callable(sigma) else (lambda t, v=np.atleast_2d(sigma): v)
        eps = params.get("eps", 1e-9)
        for t in np.linspace(0, params.get("T", 1.0), 11):
            if K_func(t) <= float(np.linalg.norm(np.atleast_1d(phi_f(t)))) + eps:
                raise GeneratorError("infeasible: need K_t > |phi_t| + eps")

        def full_eval(t, y, z, u, mm, zeta):
            z = np.atleast_1d(np.asarray(z, dtype=float))
            p = np.asarray(phi_f(t), dtype=float)
            _, _, value = finance.gooddeal_inner_max(
                z, u, K_func(t), p, sigma_f(t), mm, zeta, t)
            return -_zdot(p, z) + value

        def batch_eval(t, y, z, u, mm, zeta):
            p = np.asarray(phi_f(t), dtype=float)
            vals = finance.gooddeal_inner_max_batch(
                z, u, K_func(t), p, sigma_f(t), mm, zeta, t)
            return -_zdot(p, z) + vals

        Ksup = max(K_func(t) for t in np.linspace(0, params.get("T", 1.0), 11))
        return GeneratorSpec(fhat=lambda t, y, z: 0.0, g=lambda t, y, z, u, e: 0.0,
                             full_eval=full_eval, batch_eval=batch_eval,
                             K_yz=2.0 * Ksup, depends_on_z=True, kind=kind,
                             params=params)

    raise GeneratorError(f"unknown generator kind {kind!r}")
