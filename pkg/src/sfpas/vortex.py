"""Desk-scale solver for the abelian rank-1 vortex equation on a flat
torus, after the standard scalar reduction.

The gauge system is reduced to the Kazdan-Warner-type equation

    Lap(u) = (1/2) B0 e^{2u} - tau0,      tau0 = t + 2 pi d / Vol,

where B0 >= 0 is a regularized squared-section with prescribed zeros at
the vortex centers (Gaussian wells of width sigma), and the Laplacian is
spectral (FFT) on the periodic grid.  Integrating the equation over the
torus gives the obstruction tau0 > 0: the solver refuses immediately
otherwise, which reproduces the existence threshold t > -2 pi d / Vol.

The normalization is fixed by the Chern-Weil convention
int i Lambda F = 2 pi deg; flipping that convention flips d -> -d
throughout.  Solutions are demonstrators, not gauge-exact fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, LimitError


class VortexInfeasibleError(LimitError):
    """tau0 <= 0: the integral obstruction rules out solutions."""


class VortexNotConvergedError(LimitError):
    pass


def bradlow_threshold(d: int, vol: float) -> float:
    """Critical parameter t* = -2 pi d / Vol; solvable side is t > t*."""
    if vol <= 0:
        raise InputError("volume must be positive")
    return -2.0 * np.pi * d / vol


class TorusGrid:
    """Periodic N x N grid on a square torus of side L (N a power of two)."""

    __slots__ = ("n", "length", "vol")

    def __init__(self, n: int, length: float):
        n = int(n)
        if n < 16 or n & (n - 1):
            raise InputError("grid size must be a power of two, at least 16")
        if length <= 0:
            raise InputError("torus side must be positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", float(length))
        object.__setattr__(self, "vol", float(length) ** 2)

    def __setattr__(self, name, value):
        raise AttributeError("TorusGrid is immutable")

    def coordinates(self):
        xs = np.arange(self.n) * (self.length / self.n)
        return np.meshgrid(xs, xs, indexing="ij")

    def laplacian_symbol(self):
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.length / self.n)
        kx, ky = np.meshgrid(k, k, indexing="ij")
        return -(kx ** 2 + ky ** 2)


@dataclass(frozen=True)
class VortexProblem:
    """Grid, degree d <= 0 (n = -d vortex points), centers with
    multiplicities, parameter t, and the regularization width."""

    grid: TorusGrid
    d: int
    centers: tuple  # ((x, y, multiplicity), ...)
    t: float
    sigma: float = None
    b0_scale: float = 1.0

    def __post_init__(self):
        if self.d > 0:
            raise InputError("solver convention needs degree d <= 0")
        centers = []
        for c in self.centers:
            if len(c) == 2:
                x, y = c
                mult = 1
            else:
                x, y, mult = c
            if mult < 1:
                raise InputError("center multiplicities must be positive")
            centers.append((float(x), float(y), int(mult)))
        object.__setattr__(self, "centers", tuple(centers))
        total = sum(c[2] for c in self.centers)
        if total != -self.d:
            raise InputError(f"multiplicities sum to {total}, expected {-self.d}")
        sigma = self.sigma if self.sigma is not None else self.grid.length / 16.0
        if not 0 < sigma < self.grid.length / 4.0:
            raise InputError("sigma must lie in (0, L/4)")
        object.__setattr__(self, "sigma", float(sigma))

    def tau0(self) -> float:
        return self.t + 2.0 * np.pi * self.d / self.grid.vol

    def squared_section(self) -> np.ndarray:
        """B0: product of Gaussian wells, one per center (with
        multiplicity), scaled by b0_scale.  Vanishes exactly at the
        centers and stays positive away from them."""
        xx, yy = self.grid.coordinates()
        b0 = np.full_like(xx, self.b0_scale)
        for cx, cy, mult in self.centers:
            dx = np.abs(xx - cx)
            dx = np.minimum(dx, self.grid.length - dx)
            dy = np.abs(yy - cy)
            dy = np.minimum(dy, self.grid.length - dy)
            dist2 = dx ** 2 + dy ** 2
            well = 1.0 - np.exp(-dist2 / (2.0 * self.sigma ** 2))
            b0 = b0 * well ** mult
        return b0


@dataclass
class VortexField:
    """A solver result: conformal factor, residual, and diagnostics."""

    u: np.ndarray
    residual_sup: float
    converged: bool
    tau0: float
    newton_iterations: int = 0
    problem: VortexProblem = field(default=None, repr=False)


@dataclass
class SolverConfig:
    tol: float = 1e-8
    max_newton: int = 60
    damping: float = 0.8
    cg_rtol: float = 1e-12
    cg_max_iter: int = 2000


def _solve_linearized(lap_sym, weight, rhs, rtol, max_iter):
    """PCG for (-Lap + weight) delta = rhs with an FFT preconditioner.

    The operator is symmetric positive definite for weight >= 0 not
    identically zero; the preconditioner is (-Lap + mean(weight))^{-1}.
    """
    wbar = float(np.mean(weight))
    if wbar <= 0:
        wbar = 1e-12
    pre_sym = -lap_sym + wbar

    def apply_op(x):
        return -np.fft.ifft2(lap_sym * np.fft.fft2(x)).real + weight * x

    def apply_pre(x):
        return np.fft.ifft2(np.fft.fft2(x) / pre_sym).real

    x = np.zeros_like(rhs)
    r = rhs - apply_op(x)
    z = apply_pre(r)
    p = z.copy()
    rz = float(np.sum(r * z))
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0:
        return x
    for _ in range(max_iter):
        ap = apply_op(p)
        alpha = rz / float(np.sum(p * ap))
        x += alpha * p
        r -= alpha * ap
        if float(np.linalg.norm(r)) <= rtol * rhs_norm:
            break
        z = apply_pre(r)
        rz_new = float(np.sum(r * z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x


def solve_vortex(problem: VortexProblem, cfg: SolverConfig = None) -> VortexField:
    """Damped Newton iteration for the reduced vortex equation.

    Raises VortexInfeasibleError immediately when tau0 <= 0 and
    VortexNotConvergedError after max_newton steps above tolerance.
    Converged means sup-norm residual < cfg.tol.
    """
    cfg = cfg or SolverConfig()
    tau0 = problem.tau0()
    if tau0 <= 0:
        raise VortexInfeasibleError(
            f"tau0 = {tau0:.6g} <= 0: no solutions below the threshold"
        )
    b0 = problem.squared_section()
    lap_sym = problem.grid.laplacian_symbol()
    mean_b0 = float(np.mean(b0))
    if mean_b0 <= 0:
        raise InputError("squared section vanishes identically")

    u = np.full(b0.shape, 0.5 * np.log(2.0 * tau0 / mean_b0))
    best_resid = np.inf
    for it in range(1, cfg.max_newton + 1):
        w = 0.5 * b0 * np.exp(2.0 * u)
        residual = np.fft.ifft2(lap_sym * np.fft.fft2(u)).real - w + tau0
        resid_sup = float(np.max(np.abs(residual)))
        best_resid = min(best_resid, resid_sup)
        if resid_sup < cfg.tol:
            return VortexField(
                u=u,
                residual_sup=resid_sup,
                converged=True,
                tau0=tau0,
                newton_iterations=it - 1,
                problem=problem,
            )
        # Newton: (Lap - 2 w) delta = -residual; solve the SPD negative
        delta = _solve_linearized(lap_sym, 2.0 * w, residual, cfg.cg_rtol, cfg.cg_max_iter)
        u = u + cfg.damping * delta
    raise VortexNotConvergedError(
        f"no convergence after {cfg.max_newton} Newton steps "
        f"(best sup-residual {best_resid:.3g})"
    )


def newton_refine(problem: VortexProblem, u0: np.ndarray, cfg: SolverConfig = None, steps: int = 3):
    """Run a fixed number of damped Newton steps from a given field.

    Returns (u, residual_history) with the sup-norm residual before each
    step and after the last; used for grid-transfer consistency checks.
    """
    cfg = cfg or SolverConfig()
    tau0 = problem.tau0()
    if tau0 <= 0:
        raise VortexInfeasibleError(f"tau0 = {tau0:.6g} <= 0")
    b0 = problem.squared_section()
    lap_sym = problem.grid.laplacian_symbol()
    u = np.array(u0, dtype=float, copy=True)
    if u.shape != b0.shape:
        raise InputError(f"initial field shape {u.shape} != grid shape {b0.shape}")
    residuals = []
    for _ in range(steps):
        w = 0.5 * b0 * np.exp(2.0 * u)
        residual = np.fft.ifft2(lap_sym * np.fft.fft2(u)).real - w + tau0
        residuals.append(float(np.max(np.abs(residual))))
        delta = _solve_linearized(lap_sym, 2.0 * w, residual, cfg.cg_rtol, cfg.cg_max_iter)
        u = u + cfg.damping * delta
    w = 0.5 * b0 * np.exp(2.0 * u)
    residual = np.fft.ifft2(lap_sym * np.fft.fft2(u)).real - w + tau0
    residuals.append(float(np.max(np.abs(residual))))
    return u, residuals


def quantization_check(field_: VortexField, problem: VortexProblem = None) -> float:
    """|mean((1/2) B0 e^{2u}) - tau0|: the discrete integral of the
    equation, which a genuine solution satisfies to solver accuracy."""
    if not field_.converged:
        raise VortexNotConvergedError("quantization check needs a converged field")
    problem = problem or field_.problem
    if problem is None:
        raise InputError("quantization check needs the originating problem")
    b0 = problem.squared_section()
    return float(abs(np.mean(0.5 * b0 * np.exp(2.0 * field_.u)) - field_.tau0))


def threshold_scan(grid: TorusGrid, d: int, centers, t_values, cfg: SolverConfig = None, workers: int = 1):
    """Solve a family of problems; returns rows (t, converged, residual, iters).

    Instances are independent, so workers > 1 runs them on a thread pool
    (the FFT work releases the GIL); the output order is by parameter
    index either way, and each solve is deterministic, so results do not
    depend on the worker count.  Infeasible parameters report
    converged=False with residual nan.
    """
    cfg = cfg or SolverConfig()

    def one(t):
        problem = VortexProblem(grid=grid, d=d, centers=tuple(centers), t=float(t))
        try:
            fld = solve_vortex(problem, cfg)
            return (float(t), True, fld.residual_sup, fld.newton_iterations)
        except VortexInfeasibleError:
            return (float(t), False, float("nan"), 0)
        except VortexNotConvergedError:
            return (float(t), False, float("inf"), cfg.max_newton)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, t_values))
    return [one(t) for t in t_values]
