"""Backward solvers: exact jump-count lattice recursion and least-squares
Monte Carlo, plus the monotone approximation driver, comparison checker,
adjoint representation for linear generators, and martingale diagnostics.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .generators import GeneratorSpec, GeneratorError, eval_generator
from .measures import (MarkMeasure, MeasureError, PathBundle, TimeGrid,
                       ZetaDensity, simulate_paths, step_jump_probs, ut_norm)
from .reports import PropertyReport

STATE_CAP = 5_000_000


class SolverError(RuntimeError):
    pass


@dataclass
class SolveConfig:
    picard_tol: float = 1e-12
    picard_max: int = 50
    scheme: str = "picard-implicit"  # or "explicit"
    basis_degree: int = 3
    n_paths: int = 10_000
    state_cap: int = STATE_CAP

    def __post_init__(self):
        if self.picard_tol <= 0 or self.picard_max < 1:
            raise SolverError("need picard_tol > 0 and picard_max >= 1")
        if self.scheme not in ("picard-implicit", "explicit"):
            raise SolverError(f"unknown scheme {self.scheme!r}")


class Lattice:
    """All jump-count multi-indices (n_1..n_m) with sum <= M, ordered so that
    the states reachable by step k (sum <= k) form a prefix of the array.
    """

    _cache: dict = {}

    def __init__(self, m: int, M: int, cap: int = STATE_CAP):
        n_total = math.comb(M + m, m)
        if n_total > cap:
            raise SolverError(
                f"lattice would need {n_total} states (cap {cap}); "
                "reduce steps or marks")
        states = []
        for total in range(M + 1):
            states.extend(_compositions(total, m))
        self.m = m
        self.M = M
        self.states = np.array(states, dtype=np.int64).reshape(len(states), m)
        self._sums = self.states.sum(axis=1)
        # count of states with sum <= k, cumulative
        counts = np.bincount(self._sums, minlength=M + 1)
        self._prefix = np.concatenate(([0], np.cumsum(counts)))
        self.neighbor = np.empty((len(states), m), dtype=np.int64)
        interior = self._sums < M
        if (m + 1) * math.log(M + 2) < 61 * math.log(2.0):
            # encode states so the encoding is strictly increasing in array
            # order ((total, lex)); neighbor lookup is then a searchsorted
            base = np.int64(M + 2)
            powers = base ** np.arange(m - 1, -1, -1, dtype=np.int64)
            codes = self._sums * base ** np.int64(m) + self.states @ powers
            for j in range(m):
                target = codes + base ** np.int64(m) + powers[j]
                idx = np.searchsorted(codes, target)
                self.neighbor[:, j] = np.where(interior,
                                               np.minimum(idx, len(states) - 1),
                                               np.arange(len(states)))
            assert np.all(codes[self.neighbor[interior, 0]]
                          == codes[interior] + base ** np.int64(m) + powers[0])
        else:
            index = {tuple(s): i for i, s in enumerate(states)}
            for i, s in enumerate(states):
                if interior[i]:
                    for j in range(m):
                        self.neighbor[i, j] = index[s[:j] + (s[j] + 1,)
                                                    + s[j + 1:]]
                else:
                    self.neighbor[i, :] = i

    def n_states_at(self, k: int) -> int:
        return int(self._prefix[min(k, self.M) + 1])

    @classmethod
    def get(cls, m: int, M: int, cap: int = STATE_CAP) -> "Lattice":
        key = (m, M)
        if key not in cls._cache:
            cls._cache[key] = cls(m, M, cap)
        return cls._cache[key]


def _compositions(total: int, m: int):
    """All m-tuples of nonnegative ints summing to exactly total, lex order."""
    if m == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, m - 1):
            yield (first,) + rest


@dataclass
class BsdeSolution:
    backend: str  # lattice | lsmc
    grid: TimeGrid
    mm: MarkMeasure
    Y: list  # per step: state-array (lattice) or path-array (lsmc)
    Z: list | None  # per step: (n, d) arrays, or None
    U: list  # per step: (n, m) arrays
    Y0: float
    se_Y0: float = 0.0
    lattice: Lattice | None = None
    picard_iters_max: int = 0
    se_Y: list | None = None
    meta: dict = field(default_factory=dict)

    def max_abs_Y(self) -> float:
        return max(float(np.max(np.abs(y))) for y in self.Y)

    def max_abs_U(self) -> float:
        if not self.U or self.mm.m == 0:
            return 0.0
        return max(float(np.max(np.abs(u))) for u in self.U)

    def summary_table(self):
        from .reports import CsvTable
        d = 0 if self.Z is None else (self.Z[0].shape[1] if self.Z else 0)
        cols = (["t", "Y_mean", "Y_min", "Y_max"]
                + [f"Z_{j+1}" for j in range(d)]
                + [f"U_{i+1}" for i in range(self.mm.m)] + ["se_Y"])
        table = CsvTable(cols)
        for k, t in enumerate(self.grid.nodes):
            y = np.asarray(self.Y[k], dtype=float)
            zrow = []
            if d:
                zk = self.Z[min(k, len(self.Z) - 1)]
                zrow = [float(v) for v in np.mean(zk, axis=0)]
            urow = []
            if self.mm.m:
                uk = self.U[min(k, len(self.U) - 1)] if self.U else None
                urow = ([float(v) for v in np.mean(uk, axis=0)]
                        if uk is not None else [0.0] * self.mm.m)
            se = 0.0
            if self.se_Y is not None:
                se = float(self.se_Y[k])
            elif self.backend == "lsmc":
                se = float(np.std(y) / max(1, math.sqrt(len(y))))
            table.add(float(t), float(y.mean()), float(y.min()), float(y.max()),
                      *zrow, *urow, se)
        return table


def _eval_gen_batch(gs: GeneratorSpec, t, y, z, u, mm, zeta) -> np.ndarray:
    """Generator values for a batch of states: y (n,), z (n,d), u (n,m)."""
    n = len(y)
    if gs.batch_eval is not None:
        out = np.asarray(gs.batch_eval(t, y, z, u, mm, zeta), dtype=float)
        if not np.all(np.isfinite(out)):
            raise GeneratorError(f"generator nonfinite at t={t}")
        return out
    if gs.full_eval is not None:
        out = np.array([gs.full_eval(t, float(y[i]), z[i], u[i], mm, zeta)
                        for i in range(n)], dtype=float)
    else:
        try:
            fh = np.asarray(gs.fhat(t, y, z), dtype=float) * np.ones(n)
        except Exception:
            fh = np.array([gs.fhat(t, float(y[i]), z[i]) for i in range(n)],
                          dtype=float)
        out = fh
        if mm.m:
            mask = mm.selector_mask(gs.jump_selector)
            if mask.any():
                marks = mm.marks[mask]
                zw = zeta(t, marks) * mm.weights[mask]
                try:
                    gv = np.asarray(gs.g(t, y[:, None], z[:, None, :],
                                         u[:, mask], marks[None, :]),
                                    dtype=float)
                    if gv.shape != (n, mask.sum()):
                        raise ValueError
                except Exception:
                    gv = np.array([[float(np.asarray(
                        gs.g(t, float(y[i]), z[i], u[i, j], mm.marks[j])))
                        for j in np.flatnonzero(mask)] for i in range(n)])
                out = out + gv @ zw
    if not np.all(np.isfinite(out)):
        raise GeneratorError(f"generator nonfinite at t={t}")
    return out


def solve_lattice(gs: GeneratorSpec, xi, grid: TimeGrid, mm: MarkMeasure,
                  zeta: ZetaDensity, cfg: SolveConfig | None = None) -> BsdeSolution:
    """Exact backward recursion on the jump-count lattice (pure-jump, Z = 0).

    xi is called with the (n_states, m) terminal jump-count array and must
    return one value per state. At each step Y_k solves the implicit equation
    y = E[Y_{k+1}] + f(t_k, y, 0, U_k) dt by Picard iteration.
    """
    cfg = cfg or SolveConfig()
    m, M = mm.m, grid.steps
    dt = grid.dt
    if gs.K_yz * dt >= 1.0 and cfg.scheme == "picard-implicit":
        raise SolverError(f"Picard non-contraction: K_yz*dt = {gs.K_yz * dt:.3g} >= 1")
    probs = step_jump_probs(grid, mm, zeta)
    if m and np.any(probs.sum(axis=1) >= 1.0):
        raise MeasureError("grid too coarse: per-step jump probability >= 1")
    lat = Lattice.get(max(m, 1), M, cfg.state_cap) if m else Lattice.get(1, M, cfg.state_cap)

    n_T = lat.n_states_at(M)
    states_T = lat.states[:n_T, :m] if m else np.zeros((n_T, 0), dtype=np.int64)
    Y_next = np.asarray(xi(states_T), dtype=float)
    if Y_next.shape != (n_T,):
        raise SolverError("xi must return one value per terminal state")

    Ys = [None] * (M + 1)
    Us = [None] * M
    Ys[M] = Y_next
    iters_max = 0
    zeros_d = np.zeros((1, 1))
    for k in range(M - 1, -1, -1):
        t = grid.nodes[k]
        n_here = lat.n_states_at(k)
        Yk1 = Ys[k + 1]
        if m:
            nb = lat.neighbor[:n_here, :m]
            U = Yk1[nb] - Yk1[:n_here, None]
            cont = Yk1[:n_here] + (probs[k][None, :] * U).sum(axis=1)
        else:
            U = np.zeros((n_here, 0))
            cont = Yk1[:n_here].copy()
        z = np.zeros((n_here, 1))
        y = cont.copy()
        if cfg.scheme == "explicit":
            fval = _eval_gen_batch(gs, t, cont, z, U, mm, zeta)
            y = cont + fval * dt
            iters = 1
        else:
            iters = 0
            for it in range(cfg.picard_max):
                iters = it + 1
                fval = _eval_gen_batch(gs, t, y, z, U, mm, zeta)
                y_new = cont + fval * dt
                delta = float(np.max(np.abs(y_new - y)))
                y = y_new
                if delta < cfg.picard_tol:
                    break
            else:
                raise SolverError(f"Picard did not converge at step {k}")
        iters_max = max(iters_max, iters)
        Ys[k] = y
        Us[k] = U
    return BsdeSolution(backend="lattice", grid=grid, mm=mm, Y=Ys,
                        Z=None, U=Us, Y0=float(Ys[0][0]), lattice=lat,
                        picard_iters_max=iters_max,
                        meta={"dt": dt, "scheme": cfg.scheme})


# ---------------------------------------------------------------------------
# least-squares Monte Carlo


def _poly_basis(x: np.ndarray, degree: int) -> np.ndarray:
    """Monomials of total degree <= degree in the columns of x, (n, nb)."""
    n, p = x.shape
    cols = [np.ones(n)]
    if p:
        for deg in range(1, degree + 1):
            for combo in itertools.combinations_with_replacement(range(p), deg):
                col = np.ones(n)
                for j in combo:
                    col = col * x[:, j]
                cols.append(col)
    return np.column_stack(cols)


def _regress(A: np.ndarray, b: np.ndarray):
    """Least-squares projection of b on the columns of A.

    Discrete state spaces routinely make polynomial features collinear (counts
    in {0,1} satisfy n^2 = n), so rank deficiency is resolved by a truncated
    SVD rather than treated as fatal; the condition number of the retained
    subspace is reported alongside the fit.
    """
    coef, _, rank, sv = np.linalg.lstsq(A, b, rcond=1e-10)
    sv_kept = sv[:max(rank, 1)]
    cond = float(sv_kept[0] / sv_kept[-1]) if sv_kept[-1] > 0 else np.inf
    return A @ coef, cond


def solve_lsmc(gs: GeneratorSpec, xi, grid: TimeGrid, mm: MarkMeasure,
               zeta: ZetaDensity, d: int, cfg: SolveConfig, seed: int,
               pb: PathBundle | None = None) -> BsdeSolution:
    """Least-squares Monte Carlo backward solve on simulated paths.

    xi is called with the PathBundle and must return one terminal value per
    path. Conditional expectations are projected on polynomial functions of
    the state (jump counts, Brownian level) by ordinary least squares.
    """
    if cfg.basis_degree < 1:
        raise SolverError("basis degree must be >= 1")
    if pb is None:
        pb = simulate_paths(grid, mm, zeta, d, cfg.n_paths, seed)
    n, M, m = pb.n_paths, grid.steps, mm.m
    dt = grid.dt
    counts = pb.jump_counts().astype(float)
    blevels = pb.brownian_levels()
    state = np.concatenate([counts, blevels], axis=2)  # (n, M+1, m+d)
    nb_probe = _poly_basis(state[:2, 0, :], cfg.basis_degree).shape[1]
    if n < 10 * nb_probe:
        raise SolverError(f"need n_paths >= {10 * nb_probe} for this basis")

    Y_next = np.asarray(xi(pb), dtype=float)
    if Y_next.shape != (n,):
        raise SolverError("xi must return one value per path")
    Ys = [None] * (M + 1)
    Zs = [None] * M
    Us = [None] * M
    Zse = [None] * M
    seY = np.zeros(M + 1)
    Ys[M] = Y_next
    f_acc = np.zeros(n)
    probs = pb.step_probs
    cond_worst = 0.0
    for k in range(M - 1, -1, -1):
        t = grid.nodes[k]
        A = _poly_basis(state[:, k, :], cfg.basis_degree)
        Yk1 = Ys[k + 1]
        # Z from the Brownian-increment projection of Y_{k+1}; the standard
        # error of the mean estimate is the sampling noise of the raw target
        # (the basis contains a constant, so mean(fitted) = mean(target))
        Z = np.zeros((n, d))
        zse = np.zeros(d)
        for j in range(d):
            target = Yk1 * pb.dB[:, k, j] / dt
            Z[:, j], c = _regress(A, target)
            zse[j] = float(np.std(target) / math.sqrt(n))
            cond_worst = max(cond_worst, c)
        Zse[k] = zse
        # U from compensated jump-indicator weights
        U = np.zeros((n, m))
        for i in range(m):
            p = probs[k, i]
            w = ((pb.jump_mark[:, k] == i).astype(float) - p) / p
            U[:, i], c = _regress(A, Yk1 * w)
            cond_worst = max(cond_worst, c)
        cont, c = _regress(A, Yk1)
        cond_worst = max(cond_worst, c)
        y = cont.copy()
        if cfg.scheme == "explicit":
            y = cont + _eval_gen_batch(gs, t, cont, Z, U, mm, zeta) * dt
        else:
            for it in range(cfg.picard_max):
                y_new = cont + _eval_gen_batch(gs, t, y, Z, U, mm, zeta) * dt
                delta = float(np.max(np.abs(y_new - y)))
                y = y_new
                if delta < cfg.picard_tol:
                    break
            else:
                raise SolverError(f"Picard did not converge at step {k}")
        Ys[k] = y
        Zs[k] = Z
        Us[k] = U
        f_acc += y - cont  # = f(t_k, ., ., .) dt pathwise
        seY[k] = float(np.std(Yk1) / math.sqrt(n))
    Y0 = float(np.mean(Ys[0]))
    # Monte Carlo error scale of Y0 from the raw pathwise representation
    # xi + int f dt (the regression only reduces, never adds, variance)
    se0 = float(np.std(Y_next + f_acc) / math.sqrt(n))
    return BsdeSolution(backend="lsmc", grid=grid, mm=mm, Y=Ys, Z=Zs, U=Us,
                        Y0=Y0, se_Y0=se0, se_Y=seY,
                        meta={"dt": dt, "cond_worst": cond_worst,
                              "seed": seed, "n_paths": n, "Z_se": Zse})


# ---------------------------------------------------------------------------
# drivers and diagnostics


def monotone_driver(gs_full: GeneratorSpec, selector_family, n_list, xi,
                    grid: TimeGrid, mm: MarkMeasure, zeta: ZetaDensity,
                    cfg: SolveConfig | None = None):
    """Solve the same data with jump set restricted to a nested family A_n.

    Returns (solutions, table rows (n, Y0, delta_Y, delta_U), report).
    delta_* compare against the largest n in n_list; Y0^n must be monotone in
    the direction of the sign of g.
    """
    from .generators import approx_sequence

    n_list = sorted(n_list)
    sols = {n: solve_lattice(approx_sequence(gs_full, selector_family, n),
                             xi, grid, mm, zeta, cfg) for n in n_list}
    n_max = n_list[-1]
    ref = sols[n_max]
    rows = []
    for n in n_list:
        s = sols[n]
        dY = max(float(np.max(np.abs(s.Y[k] - ref.Y[k][:len(s.Y[k])])))
                 for k in range(grid.steps + 1))
        dU = 0.0
        for k in range(grid.steps):
            diff = s.U[k] - ref.U[k][:len(s.U[k])]
            if mm.m:
                zw = zeta(grid.nodes[k], mm.marks) * mm.weights
                dU = max(dU, float(np.sqrt(np.max((diff * diff) @ zw))))
        rows.append((n, s.Y0, dY, dU))
    # direction of monotonicity from the sign of g on probes
    probe = np.linspace(-1, 1, 21)
    gv = np.asarray(gs_full.g(0.0, 0.0, np.zeros(1), probe, mm.marks[0]))
    sign = 1.0 if np.all(gv >= -1e-15) else -1.0
    y0s = np.array([r[1] for r in rows])
    mono = bool(np.all(sign * np.diff(y0s) >= -1e-12))
    report = PropertyReport(
        property_id="monotone_stability",
        theorem_tag="monotone-approximation",
        status="pass" if mono else "fail",
        statistic=float(np.min(sign * np.diff(y0s))) if len(y0s) > 1 else 0.0,
        tolerance=-1e-12,
        note=f"Y0 sequence {y0s.tolist()} (expected monotone, sign {sign:+.0f})")
    return sols, rows, report


def compare_solutions(sol1: BsdeSolution, sol2: BsdeSolution) -> PropertyReport:
    """Pass iff Y1 <= Y2 + 1e-10 at every state and step."""
    if sol1.grid != sol2.grid or sol1.mm.m != sol2.mm.m or sol1.backend != sol2.backend:
        raise SolverError("solutions live on different discretizations")
    gap = max(float(np.max(sol1.Y[k] - sol2.Y[k]))
              for k in range(sol1.grid.steps + 1))
    return PropertyReport(property_id="comparison", theorem_tag="comparison-theorem",
                          status="pass" if gap <= 1e-10 else "fail",
                          statistic=gap, tolerance=1e-10)


def adjoint_representation(gs: GeneratorSpec, xi, pb: PathBundle,
                           zeta: ZetaDensity):
    """Monte Carlo value of a linear-generator BSDE via the adjoint process.

    For f = alpha0 + alpha y + beta z + int gamma(e) u(e) zeta lambda(de), the
    adjoint is Gamma = exp(int alpha ds) * E(int beta dB + gamma * mu~), and
    Y_0 = E[Gamma_T xi + int_0^T Gamma_s alpha0 ds].  The stochastic
    exponential is evaluated in its time-discrete form (per-step change of
    jump probabilities and exact Gaussian density factors), which makes the
    estimator unbiased for the lattice recursion on the same grid.  Returns
    (estimate, se).
    """
    if gs.kind != "linear":
        raise SolverError("adjoint representation needs a linear generator")
    p = gs.params or {}
    a0 = float(p.get("alpha0", 0.0))
    a = float(p.get("alpha", 0.0))
    beta = np.atleast_1d(np.asarray(p.get("beta", 0.0), dtype=float))
    gam = p.get("gamma")
    mm = pb.mm
    if gam is None:
        gvec = np.zeros(mm.m)
    elif callable(gam):
        gvec = np.asarray(gam(mm.marks), dtype=float)
    else:
        gvec = np.asarray(gam, dtype=float) * np.ones(mm.m)
    if mm.m and np.any(gvec < -1.0):
        raise SolverError("adjoint needs gamma >= -1 at every mark")
    grid, n, M = pb.grid, pb.n_paths, pb.grid.steps
    dt = grid.dt
    d = pb.d
    b = beta[:d] if d else beta[:0]
    if a * dt >= 1.0:
        raise SolverError("alpha * dt must be below 1")
    G = np.ones(n)
    int_term = np.zeros(n)
    jm = pb.jump_mark
    for k in range(M):
        t = grid.nodes[k]
        W = np.ones(n)
        if d:
            W *= np.exp(pb.dB[:, k, :] @ b - 0.5 * float(b @ b) * dt)
        if mm.m:
            pk = zeta(t, mm.marks) * mm.weights * dt
            no_jump = (1.0 - float(np.sum(pk * (1.0 + gvec)))) / (1.0 - float(np.sum(pk)))
            factor = np.where(jm[:, k] >= 0,
                              1.0 + gvec[np.maximum(jm[:, k], 0)], no_jump)
            W *= factor
        G = G * W / (1.0 - a * dt)
        int_term += a0 * G * dt
    vals = G * np.asarray(xi(pb), dtype=float) + int_term
    return float(vals.mean()), float(vals.std() / math.sqrt(n))


def martingale_diagnostic(beta_field, gamma_field, mm: MarkMeasure,
                          zeta: ZetaDensity, grid: TimeGrid,
                          margin: float = 1e-9) -> PropertyReport:
    """Check the sufficient conditions under which the stochastic exponential
    of int beta dB + gamma * mu~ is a true martingale.

    gamma_field: callable (t, marks) -> vector or constant array.  Conditions
    checked in order: (1) gamma > -1 with margin and bounded; (2) bounded
    predictable bracket int |gamma|^2 zeta dlambda; (3) jumps >= -1 + delta.
    """
    worst_gamma = np.inf
    bracket_sup = 0.0
    sup_abs = 0.0
    for t in grid.nodes[:-1]:
        gv = (np.asarray(gamma_field(t, mm.marks), dtype=float)
              if callable(gamma_field)
              else np.asarray(gamma_field, dtype=float) * np.ones(mm.m))
        worst_gamma = min(worst_gamma, float(gv.min(initial=np.inf)))
        sup_abs = max(sup_abs, float(np.max(np.abs(gv), initial=0.0)))
        if mm.m:
            bracket_sup = max(bracket_sup, float(
                np.sum(gv * gv * zeta(t, mm.marks) * mm.weights)))
    conds = []
    if worst_gamma > -1.0 + margin and math.isfinite(sup_abs):
        conds.append("bounded jumps above -1")
    if math.isfinite(bracket_sup):
        conds.append("bounded predictable bracket")
    delta = 1.0 + worst_gamma
    if delta > margin and math.isfinite(bracket_sup):
        conds.append("jumps >= -1 + delta with finite bracket")
    certified = worst_gamma > -1.0 + margin and math.isfinite(bracket_sup)
    return PropertyReport(
        property_id="martingale_exponential",
        theorem_tag="stochastic-exponential-martingale",
        status="pass" if certified else "fail",
        statistic=worst_gamma, tolerance=-1.0 + margin,
        note=("certified via: " + "; ".join(conds)) if conds else
             "no sufficient condition holds (min jump at or below -1)")


def zero_z_check(gs: GeneratorSpec, xi, grid: TimeGrid, mm: MarkMeasure,
                 zeta: ZetaDensity, d_extra: int, cfg: SolveConfig,
                 seed: int) -> PropertyReport:
    """Solve a pure-jump instance with extra Brownian drivers appended; the
    estimated Z must vanish within Monte Carlo noise.
    """
    if d_extra == 0:
        return PropertyReport(property_id="zero_z", theorem_tag="trivial-z",
                              status="pass", statistic=0.0, tolerance=0.0,
                              note="no Brownian driver; Z absent")
    sol = solve_lsmc(gs, xi, grid, mm, zeta, d_extra, cfg, seed)
    worst = 0.0
    worst_tol = np.inf
    for k in range(grid.steps):
        zmean = np.abs(sol.Z[k].mean(axis=0))
        zse = np.asarray(sol.meta["Z_se"][k]) + 1e-300
        j = int(np.argmax(zmean - 3 * zse))
        if zmean[j] - 3 * zse[j] > worst - worst_tol:
            worst, worst_tol = float(zmean[j]), float(3 * zse[j])
    ok = worst <= worst_tol
    return PropertyReport(property_id="zero_z", theorem_tag="trivial-z",
                          status="pass" if ok else "fail",
                          statistic=worst, tolerance=worst_tol,
                          note=f"max |Z| estimate vs 3 SE over {grid.steps} steps")
