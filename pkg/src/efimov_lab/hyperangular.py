"""Hyperangular eigenvalue branches of three particles with zero-range pairs.

For total angular momentum zero the hyperangular problem reduces to one
transcendental equation per hyperradius rho,

    [-nu cos(nu pi/2) + (8/sqrt(3)) sin(nu pi/6)] / sin(nu pi/2) = x,

where x = rho / (sqrt(mu) a) and nu^2 is the eigenvalue.  The physically
relevant unknown is s = nu^2, which is negative on the lowest branch for
small x; there nu = i b and the equation continues analytically to

    [-b (1 + e^{-pi b}) + (8/sqrt(3)) e^{-pi b/3} (1 - e^{-pi b/3})]
        / (1 - e^{-pi b}) = x,

an exponentially scaled form that stays finite for every b > 0.  This
module evaluates both forms stably, locates roots on any branch, tabulates
branches over log grids, and assembles the resulting effective radial
potential (nu^2(rho) - 1/4) / (2 rho^2) with optional short-range
regularization (hard wall or cap below a radius R).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import (
    BracketError,
    ConfigError,
    GridError,
    LogGrid,
    PoleError,
    SolverError,
    SystemConfig,
    resolve_threads,
)

_EIGHT_OVER_SQRT3 = 8.0 / math.sqrt(3.0)

# value of the left-hand side at s = 0, the branch-0 anchor
LHS_AT_ZERO = (4.0 * math.pi * math.sqrt(3.0) / 9.0 - 1.0) / (math.pi * 0.5)

# radius (in nu) of the Taylor patch across the removable point nu = 4
_NEAR_FOUR_RADIUS = 1e-4

# Taylor data at nu = 4: numerator N and denominator D = sin(nu pi/2)
# both vanish there; N'(4) != 0 so the ratio is finite.
_N1 = -1.0 - 2.0 * math.pi / (3.0 * math.sqrt(3.0))
_N2 = 8.0 * math.pi ** 2 / 9.0
_N3 = 3.0 * math.pi ** 2 / 4.0 + math.pi ** 3 / (54.0 * math.sqrt(3.0))
_D1 = math.pi / 2.0
_D3 = -math.pi ** 3 / 8.0

_MAX_EXPANSIONS = 60
_BRENTQ_RTOL = 4.0 * float(np.finfo(float).eps)

# poles sit at even integer nu >= 2 except nu = 4 where the numerator
# also vanishes; branch k >= 2 lives between consecutive genuine poles
_POLE_FLAG_DISTANCE = 1e-8

# stay this far below nu^2 = 4 when bracketing branch-0 roots; the pole
# guard in _lhs_positive trips about 2.6e-12 from the pole itself
_BRANCH0_GAP_FLOOR = 1e-11


def _lhs_negative(b: float) -> float:
    """Left-hand side at s = -b^2, b > 0, safe for arbitrarily large b."""
    pb = math.pi * b
    em_full = -math.expm1(-pb)          # 1 - e^{-pi b}
    em_third = -math.expm1(-pb / 3.0)   # 1 - e^{-pi b/3}
    e_third = math.exp(-pb / 3.0)
    num = -b * (2.0 - em_full) + _EIGHT_OVER_SQRT3 * e_third * em_third
    if em_full == 0.0:
        # only reachable when b underflows to ~0
        return LHS_AT_ZERO
    return num / em_full


def _lhs_near_four(h: float) -> float:
    """Series for the removable point, h = nu - 4, |h| small."""
    num = _N1 + h * (0.5 * _N2 + h * (_N3 / 6.0))
    den = _D1 + h * h * (_D3 / 6.0)
    return num / den


def _lhs_positive(nu: float, pole_tol: float) -> float:
    """Left-hand side at s = nu^2 > 0 with argument reduction.

    sin and cos of nu pi/2 are computed from the residue of nu modulo 4
    so that cancellation near large even nu does not degrade accuracy.
    """
    if abs(nu - 4.0) <= _NEAR_FOUR_RADIUS:
        return _lhs_near_four(nu - 4.0)
    k = round(nu / 2.0)
    r = nu - 2.0 * k
    sign = -1.0 if (k % 2) else 1.0
    sin_half = sign * math.sin(0.5 * math.pi * r)
    cos_half = sign * math.cos(0.5 * math.pi * r)
    m = round(nu / 12.0)
    r6 = nu - 12.0 * m
    sin_sixth = math.sin(math.pi / 6.0 * r6)
    num = -nu * cos_half + _EIGHT_OVER_SQRT3 * sin_sixth
    if abs(sin_half) < pole_tol:
        raise PoleError(
            f"eigenvalue function has a pole at nu = {2 * k} "
            f"(nu^2 = {(2 * k) ** 2}); requested nu^2 = {nu * nu:.17g}")
    return num / sin_half


def eigen_lhs(nu_squared: float, pole_tol: float = 1e-12) -> float:
    """Evaluate the hyperangular eigenvalue function at s = nu^2.

    Stable on both sides of s = 0 and continuous through it; raises
    :class:`PoleError` when s sits on a genuine pole (even integer nu
    with nonvanishing numerator).  The removable point nu = 4 is bridged
    by a local series.
    """
    s = float(nu_squared)
    if not math.isfinite(s):
        raise ConfigError(f"nu^2 must be finite, got {s!r}")
    if s < 0.0:
        return _lhs_negative(math.sqrt(-s))
    if s == 0.0:
        return LHS_AT_ZERO
    return _lhs_positive(math.sqrt(s), pole_tol)


@dataclass(frozen=True)
class EfimovConstants:
    """Root of the resonant (x = 0) equation on the lowest branch.

    `b` is the positive solution of nu = i b, `C = b^2 + 1/4` is the
    strength of the induced -C/rho^2 hyperradial attraction and
    `residual` is |lhs(-b^2)| at the returned root.
    """

    b: float
    C: float
    residual: float


def efimov_constants(tol: float = 1e-10) -> EfimovConstants:
    """Solve the resonant limit of the lowest branch for b and C."""
    if not (0.0 < tol < 1.0):
        raise ValueError(f"tol must be in (0, 1), got {tol!r}")

    def f(b):
        return _lhs_negative(b)

    b = brentq(f, 0.25, 4.0, xtol=1e-15, rtol=_BRENTQ_RTOL, maxiter=256)
    residual = abs(f(b))
    if residual > tol:
        raise SolverError(f"resonant root residual {residual:.3e} exceeds tol {tol:.3e}")
    return EfimovConstants(b=b, C=b * b + 0.25, residual=residual)


@dataclass(frozen=True)
class NuSquared:
    """A single eigenvalue root nu^2 at fixed x.

    `residual` is |F(value) - x| / max(1, |x|), the solver's relative
    closing error; `near_pole` marks roots within 1e-8 of a genuine
    pole of F, where the equation loses conditioning.
    """

    value: float
    branch_index: int
    residual: float
    near_pole: bool = False

    @property
    def lam(self) -> float:
        """Angular eigenvalue lambda = nu^2 - 4."""
        return self.value - 4.0


def _flag_near_pole(s: float) -> bool:
    if s < 0.0:
        return False
    nu = math.sqrt(s)
    k = round(nu / 2.0)
    if k < 1 or k == 2:
        # nu = 4 is removable, nothing to misclassify there
        return False
    return abs(nu - 2.0 * k) <= _POLE_FLAG_DISTANCE


def _polish_residual(f, root: float, x: float, tol: float, what: str) -> tuple[float, float]:
    """Check convergence at root, reporting |f(root)| / max(1, |x|).

    Near the nu = 2 pole the curve's slope grows like x^2, so one ulp of
    root can move f by more than any fixed tolerance and no double meets
    a plain residual test.  The root is therefore also accepted when the
    sign change is straddled within one ulp of root, or when |f| sits
    below the slope times a few ulps (the evaluation noise floor); the
    honest residual is returned either way.
    """
    scale = max(1.0, abs(x))
    cands = (root, float(np.nextafter(root, -np.inf)),
             float(np.nextafter(root, np.inf)))
    vals = tuple(f(c) for c in cands)
    best = min(range(3), key=lambda i: abs(vals[i]))
    best_root, best_res = cands[best], abs(vals[best]) / scale
    if best_res > tol:
        straddles = min(vals) <= 0.0 <= max(vals)
        two_ulps = cands[2] - cands[1]
        noise_floor = 32.0 * abs(vals[2] - vals[1])
        if not straddles and abs(vals[best]) > noise_floor:
            raise SolverError(
                f"{what}: residual {best_res:.3e} exceeds tol {tol:.3e} "
                f"at x = {x:.17g} (slope {abs(vals[2] - vals[1]) / two_ulps:.3e})")
    return best_root, best_res


def solve_branch0(x: float, tol: float = 1e-10) -> NuSquared:
    """Root of the eigenvalue equation on the lowest branch, s = nu^2 < 4.

    The left-hand side is monotone increasing on (-inf, 4), diverging to
    +inf at the nu = 2 pole, so a bracket always exists; its sign at
    s = 0 decides which side to expand.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ConfigError(f"x must be finite, got {x!r}")
    if not (0.0 < tol < 1.0):
        raise ConfigError(f"tol must be in (0, 1), got {tol!r}")

    def f(s):
        return eigen_lhs(s) - x

    if x >= LHS_AT_ZERO:
        lo = 0.0
        gap = 2.0
        hi = 4.0 - gap
        for _ in range(_MAX_EXPANSIONS):
            if f(hi) >= 0.0:
                break
            gap *= 0.5
            if gap < _BRANCH0_GAP_FLOOR:
                raise SolverError(
                    f"branch 0 root at x = {x:.17g} lies within "
                    f"{_BRANCH0_GAP_FLOOR:g} of the pole at nu^2 = 4; double "
                    "precision cannot separate them")
            hi = 4.0 - gap
        else:
            raise BracketError(f"no bracket found on branch 0 for x = {x:.17g}")
    else:
        hi = 0.0
        lo = -1.0
        for _ in range(_MAX_EXPANSIONS):
            if f(lo) <= 0.0:
                break
            lo *= 2.0
        else:
            raise BracketError(f"no bracket found on branch 0 for x = {x:.17g}")

    root = brentq(f, lo, hi, xtol=1e-15, rtol=_BRENTQ_RTOL, maxiter=256)
    root, residual = _polish_residual(f, root, x, tol, "branch 0")
    return NuSquared(value=root, branch_index=0, residual=residual,
                     near_pole=_flag_near_pole(root))


def branch_interval(branch_index: int) -> tuple[float, float]:
    """Open interval of nu containing the roots of the given branch.

    Branch 0 lives at nu^2 < 4 (returned as (0, 2) on the real-nu side;
    the branch itself extends to negative nu^2).  Branch 1 spans the two
    subintervals joined at the removable point nu = 4; higher branches
    sit between consecutive genuine poles.
    """
    if branch_index < 0:
        raise ValueError(f"branch index must be >= 0, got {branch_index}")
    if branch_index == 0:
        return (0.0, 2.0)
    if branch_index == 1:
        return (2.0, 6.0)
    return (2.0 * branch_index + 2.0, 2.0 * branch_index + 4.0)


_SCAN_POINTS = 2000


def _solve_in_interval(x: float, nu_lo: float, nu_hi: float,
                       tol: float) -> list[NuSquared]:
    """All roots with nu in (nu_lo, nu_hi), endpoints being genuine poles."""

    def f(nu):
        return _lhs_positive(nu, 1e-300) - x

    width = nu_hi - nu_lo
    eps = 1e-6 * width
    a = nu_lo + eps
    for _ in range(_MAX_EXPANSIONS):
        if f(a) <= 0.0:
            break
        eps *= 0.125
        a = nu_lo + eps
    else:
        raise BracketError(
            f"no approach to -inf near nu = {nu_lo} for x = {x:.17g}")
    eps = 1e-6 * width
    b = nu_hi - eps
    for _ in range(_MAX_EXPANSIONS):
        if f(b) >= 0.0:
            break
        eps *= 0.125
        b = nu_hi - eps
    else:
        raise BracketError(
            f"no approach to +inf near nu = {nu_hi} for x = {x:.17g}")

    nus = np.linspace(a, b, _SCAN_POINTS)
    vals = np.array([f(nu) for nu in nus])
    roots: list[NuSquared] = []
    for i in range(len(nus) - 1):
        if vals[i] == 0.0:
            root_nu = float(nus[i])
        elif vals[i] * vals[i + 1] < 0.0:
            root_nu = brentq(f, nus[i], nus[i + 1],
                             xtol=1e-15, rtol=_BRENTQ_RTOL, maxiter=256)
        else:
            continue
        if roots and abs(root_nu * root_nu - roots[-1].value) < 1e-12:
            continue
        s = root_nu * root_nu

        def fs(sv):
            return eigen_lhs(sv) - x

        s, residual = _polish_residual(fs, s, x, tol, f"branch interval ({nu_lo}, {nu_hi})")
        near = _flag_near_pole(s)
        if near:
            warnings.warn(
                f"root nu^2 = {s:.12g} lies within {_POLE_FLAG_DISTANCE} of a pole; "
                "pole classification may be unreliable", RuntimeWarning)
        roots.append(NuSquared(value=s, branch_index=-1, residual=residual,
                               near_pole=near))
    if vals[-1] == 0.0:
        s = float(nus[-1]) ** 2
        if not (roots and abs(s - roots[-1].value) < 1e-12):
            roots.append(NuSquared(value=s, branch_index=-1, residual=abs(vals[-1]),
                                   near_pole=_flag_near_pole(s)))
    return roots


def solve_branches(x: float, count: int, tol: float = 1e-10) -> list[NuSquared]:
    """The `count` lowest eigenvalue roots at fixed x, ascending in nu^2.

    Every interval between consecutive genuine poles sweeps the full real
    line, so each contributes at least one root and the list never skips
    a branch.
    """
    count = int(count)
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    roots = [solve_branch0(x, tol)]
    k = 1
    while len(roots) < count:
        lo, hi = branch_interval(k)
        for r in _solve_in_interval(x, lo, hi, tol):
            roots.append(NuSquared(value=r.value, branch_index=len(roots) - 1,
                                   residual=r.residual, near_pole=r.near_pole))
        k += 1
        if k > count + 64:
            raise SolverError(f"branch search ran away at x = {x:.17g}")
    roots = sorted(roots[:count], key=lambda r: r.value)
    return [NuSquared(value=r.value, branch_index=i, residual=r.residual,
                      near_pole=r.near_pole) for i, r in enumerate(roots)]


def _seeded_root(x: float, seed: float, branch_index: int, tol: float) -> NuSquared:
    """Root at x on the given branch, bracketing outward from a nearby seed.

    Falls back to the global interval search whenever local bracketing
    fails, so seeding is an accelerator and never a correctness risk.
    """

    def fs(s):
        return eigen_lhs(s) - x

    if branch_index == 0:
        # monotone increasing on (-inf, 4)
        fseed = fs(seed)
        if fseed == 0.0:
            return NuSquared(value=seed, branch_index=0, residual=0.0,
                             near_pole=_flag_near_pole(seed))
        step = max(1e-9, 1e-9 * abs(seed))
        lo, hi = None, None
        if fseed < 0.0:
            prev = seed
            ceiling = 4.0 - _BRANCH0_GAP_FLOOR
            for _ in range(_MAX_EXPANSIONS):
                cand = min(seed + step, ceiling)
                if fs(cand) >= 0.0:
                    lo, hi = prev, cand
                    break
                if cand >= ceiling:
                    break
                prev = cand
                step *= 8.0
        else:
            prev = seed
            for _ in range(_MAX_EXPANSIONS):
                cand = seed - step
                if fs(cand) <= 0.0:
                    lo, hi = cand, prev
                    break
                prev = cand
                step *= 8.0
        if lo is None:
            return solve_branch0(x, tol)
        root = brentq(fs, lo, hi, xtol=1e-15, rtol=_BRENTQ_RTOL, maxiter=256)
        root, residual = _polish_residual(fs, root, x, tol, "branch 0")
        return NuSquared(value=root, branch_index=0, residual=residual,
                         near_pole=_flag_near_pole(root))

    nu_lo, nu_hi = branch_interval(branch_index)
    nu_seed = math.sqrt(max(seed, 0.0))
    if not (nu_lo < nu_seed < nu_hi):
        return _fallback_interval_root(x, branch_index, tol)

    def fn(nu):
        return _lhs_positive(nu, 1e-300) - x

    fseed = fn(nu_seed)
    if fseed == 0.0:
        s = nu_seed * nu_seed
        return NuSquared(value=s, branch_index=branch_index, residual=0.0,
                         near_pole=_flag_near_pole(s))
    step = 1e-9 * (nu_hi - nu_lo)
    lo = hi = None
    if fseed < 0.0:
        prev = nu_seed
        for _ in range(_MAX_EXPANSIONS):
            cand = nu_seed + step
            if cand >= nu_hi:
                break
            if fn(cand) >= 0.0:
                lo, hi = prev, cand
                break
            prev = cand
            step *= 8.0
    else:
        prev = nu_seed
        for _ in range(_MAX_EXPANSIONS):
            cand = nu_seed - step
            if cand <= nu_lo:
                break
            if fn(cand) <= 0.0:
                lo, hi = cand, prev
                break
            prev = cand
            step *= 8.0
    if lo is None:
        return _fallback_interval_root(x, branch_index, tol)
    root_nu = brentq(fn, lo, hi, xtol=1e-15, rtol=_BRENTQ_RTOL, maxiter=256)
    s, residual = _polish_residual(fs, root_nu * root_nu, x, tol,
                                   f"branch {branch_index}")
    return NuSquared(value=s, branch_index=branch_index, residual=residual,
                     near_pole=_flag_near_pole(s))


def _fallback_interval_root(x: float, branch_index: int, tol: float) -> NuSquared:
    lo, hi = branch_interval(branch_index)
    roots = _solve_in_interval(x, lo, hi, tol)
    if not roots:
        raise SolverError(f"no root found on branch {branch_index} at x = {x:.17g}")
    r = roots[0]
    return NuSquared(value=r.value, branch_index=branch_index,
                     residual=r.residual, near_pole=r.near_pole)


def _branch_root(x: float, branch_index: int, tol: float) -> NuSquared:
    """Unseeded root on a single branch."""
    if branch_index == 0:
        return solve_branch0(x, tol)
    return _fallback_interval_root(x, branch_index, tol)


@dataclass(frozen=True)
class AdiabaticBranch:
    """nu^2 tabulated over a log grid for one branch.

    When `config` is present, :meth:`nu_squared_at` re-solves the
    eigenvalue equation exactly at the requested radius (the table seeds
    the search); without it the table is interpolated linearly in
    ln(rho), clamped at the grid ends.
    """

    grid: LogGrid
    nu_squared: np.ndarray
    branch_index: int
    config: SystemConfig | None = None
    tol: float = 1e-10

    def __post_init__(self):
        if self.nu_squared.shape != (self.grid.points,):
            raise GridError("branch table shape does not match its grid")
        self.nu_squared.setflags(write=False)

    @property
    def max_step_change(self) -> float:
        """Largest |nu^2(rho_{i+1}) - nu^2(rho_i)| over the table."""
        return float(np.max(np.abs(np.diff(self.nu_squared))))

    def _exact_at(self, rho: float) -> float:
        x = self.config.x_of_rho(rho)
        i = int(np.clip(np.searchsorted(self.grid.values, rho),
                        0, self.grid.points - 1))
        seed = float(self.nu_squared[i])
        return _seeded_root(float(x), seed, self.branch_index, self.tol).value

    def nu_squared_at(self, rho):
        """nu^2 at arbitrary rho > 0 (scalar or array)."""
        rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
        if np.any(rho_arr <= 0.0) or not np.all(np.isfinite(rho_arr)):
            raise ConfigError("rho must be positive and finite")
        if self.config is not None:
            if self.config.at_unitarity:
                out = np.full(rho_arr.shape, float(self.nu_squared[0]))
            else:
                out = np.array([self._exact_at(r) for r in rho_arr])
        else:
            out = np.interp(np.log(rho_arr), np.log(self.grid.values),
                            self.nu_squared)
        return float(out[0]) if np.ndim(rho) == 0 else out


def constant_branch(value: float, grid: LogGrid, branch_index: int = 0) -> AdiabaticBranch:
    """Branch with a fixed nu^2 everywhere, handy for controlled tests."""
    return AdiabaticBranch(grid=grid,
                           nu_squared=np.full(grid.points, float(value)),
                           branch_index=branch_index, config=None)


_CHUNK = 64


def tabulate_branch(config: SystemConfig, grid: LogGrid, branch_index: int = 0,
                    *, threads: int | None = None, tol: float = 1e-10) -> AdiabaticBranch:
    """Tabulate nu^2(rho) over the grid by continuation along the branch.

    Points are grouped into fixed chunks of 64 grid points.  Chunk
    anchors are solved independently of any neighbour; interior points
    are then seeded from their left neighbour within the chunk only.
    Chunks may run on a thread pool, and because the chunk boundaries do
    not depend on the pool size the tabulated values are identical for
    every thread count.
    """
    threads = resolve_threads(threads)
    if branch_index < 0:
        raise ValueError(f"branch index must be >= 0, got {branch_index}")
    xs = np.atleast_1d(config.x_of_rho(grid.values))

    if config.at_unitarity:
        root = _branch_root(0.0, branch_index, tol)
        values = np.full(grid.points, root.value)
        return AdiabaticBranch(grid=grid, nu_squared=values,
                               branch_index=branch_index, config=config, tol=tol)

    n = grid.points
    values = np.empty(n)
    starts = list(range(0, n, _CHUNK))

    def solve_chunk(i0: int):
        try:
            prev = _branch_root(float(xs[i0]), branch_index, tol)
        except (BracketError, SolverError) as exc:
            raise SolverError(
                f"branch {branch_index} tracking failed at rho = "
                f"{grid.values[i0]:.12g}: {exc}") from exc
        out = [prev.value]
        for i in range(i0 + 1, min(i0 + _CHUNK, n)):
            try:
                prev = _seeded_root(float(xs[i]), prev.value, branch_index, tol)
            except (BracketError, SolverError) as exc:
                raise SolverError(
                    f"branch {branch_index} tracking failed at rho = "
                    f"{grid.values[i]:.12g}: {exc}") from exc
            out.append(prev.value)
        return i0, out

    if threads == 1:
        results = [solve_chunk(i0) for i0 in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve_chunk, starts))
    for i0, chunk in results:
        values[i0:i0 + len(chunk)] = chunk

    return AdiabaticBranch(grid=grid, nu_squared=values,
                           branch_index=branch_index, config=config, tol=tol)


@dataclass(frozen=True)
class HardWall:
    """Wavefunction forced to zero at rho = R; potential unchanged above."""

    R: float

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0.0):
            raise ConfigError(f"wall radius must be finite and positive, got {self.R!r}")


@dataclass(frozen=True)
class Cap:
    """Potential frozen at its rho = R value for all rho < R."""

    R: float

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0.0):
            raise ConfigError(f"cap radius must be finite and positive, got {self.R!r}")


Scheme = HardWall | Cap | None


@dataclass(frozen=True)
class EffectivePotential:
    """Hyperradial potential (nu^2(rho) - 1/4) / (2 rho^2) with regularization.

    `scheme = None` keeps the bare inverse-square attraction; bound-state
    search refuses it because the spectrum is then unbounded from below.
    """

    branch: AdiabaticBranch
    scheme: Scheme = None

    @property
    def R(self) -> float | None:
        return None if self.scheme is None else self.scheme.R

    def _bare_v(self, rho: np.ndarray) -> np.ndarray:
        nu2 = np.atleast_1d(np.asarray(self.branch.nu_squared_at(rho)))
        return (nu2 - 0.25) / (2.0 * rho * rho)

    def v_eff(self, rho):
        """Effective potential at rho (scalar or array), internal units."""
        rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
        if np.any(rho_arr <= 0.0) or not np.all(np.isfinite(rho_arr)):
            raise ConfigError("rho must be positive and finite")
        if isinstance(self.scheme, HardWall):
            out = np.full(rho_arr.shape, np.inf)
            outside = rho_arr >= self.scheme.R
            if np.any(outside):
                out[outside] = self._bare_v(rho_arr[outside])
        elif isinstance(self.scheme, Cap):
            out = self._bare_v(np.maximum(rho_arr, self.scheme.R))
        else:
            out = self._bare_v(rho_arr)
        return float(out[0]) if np.ndim(rho) == 0 else out

    def nu_squared_at(self, rho):
        return self.branch.nu_squared_at(rho)

    def table(self) -> dict[str, np.ndarray]:
        """Columns over the branch grid, ready for serialization."""
        rho = self.branch.grid.values
        if self.branch.config is not None:
            x = np.atleast_1d(self.branch.config.x_of_rho(rho))
        else:
            x = np.full(rho.shape, np.nan)
        nu2 = self.branch.nu_squared
        return {
            "rho": rho.copy(),
            "x": np.asarray(x, dtype=float),
            "nu_squared": nu2.copy(),
            "lambda": nu2 - 4.0,
            "v_eff": self.v_eff(rho),
        }


def effective_potential(branch: AdiabaticBranch, scheme: Scheme = None) -> EffectivePotential:
    """Wrap a tabulated branch as a radial potential with a regularization scheme.

    The regularization radius must not exceed the top of the branch grid;
    radii below the grid are allowed (config-backed branches re-solve
    exactly there).
    """
    if scheme is not None:
        if scheme.R > branch.grid.rho_max:
            raise ConfigError(
                f"regularization radius {scheme.R} lies above the grid top "
                f"{branch.grid.rho_max}")
    return EffectivePotential(branch=branch, scheme=scheme)
