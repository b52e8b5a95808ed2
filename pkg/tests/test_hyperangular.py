"""Eigenvalue layer checked against a raw complex-arithmetic oracle.

The library evaluates the transcendental function

    F(nu^2) = [-nu cos(nu pi/2) + (8/sqrt 3) sin(nu pi/6)] / sin(nu pi/2)

through rewritten forms (exp/expm1 on the nu^2 < 0 side, argument
reduction and a Taylor patch on the nu^2 > 0 side).  The oracle below
evaluates the formula literally with complex square roots, which is
accurate wherever sin(nu pi/2) is not small, and the root oracle
bisects on it with no shared code.  Expected constants are frozen from
40-digit evaluations of the same formulas.
"""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from efimov_lab import (
    BracketError,
    Cap,
    ConfigError,
    EffectivePotential,
    GridError,
    HardWall,
    LogGrid,
    PoleError,
    branch_interval,
    constant_branch,
    effective_potential,
    efimov_constants,
    eigen_lhs,
    make_config,
    solve_branch0,
    solve_branches,
    tabulate_branch,
)
from efimov_lab.hyperangular import LHS_AT_ZERO, _flag_near_pole

_EIGHT = 8.0 / math.sqrt(3.0)

# frozen references (40-digit precision, rounded to double)
B_REF = 1.0062378251027815
C_REF = 1.2625145606675758
LHS_ZERO_REF = 0.9029809454714206
LHS_SIXTEEN_REF = -1.40642013128708
ROOTS_AT_X0 = (-1.012514560667576, 19.938856034048226,
               46.49004553340669, 86.94975630411273)


def lhs_oracle(s: float) -> float:
    nu = cmath.sqrt(complex(s, 0.0))
    half = nu * (math.pi / 2.0)
    val = (-nu * cmath.cos(half) + _EIGHT * cmath.sin(nu * math.pi / 6.0)) \
        / cmath.sin(half)
    return val.real


def branch0_oracle(x: float, scan_points: int = 8001) -> float:
    """Root of F(s) = x for s < 4 by dense scan plus bisection."""
    lo = -max(36.0, 1.5 * x * x + 10.0)
    hi = 4.0 - 1e-9
    grid = np.linspace(lo, hi, scan_points)
    vals = np.array([lhs_oracle(s) - x for s in grid])
    sign_flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    assert len(sign_flips) >= 1, f"oracle found no bracket for x = {x}"
    a, b = float(grid[sign_flips[0]]), float(grid[sign_flips[0] + 1])
    fa = lhs_oracle(a) - x
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = lhs_oracle(m) - x
        if fa * fm <= 0.0:
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def _away_from_poles(s: float) -> bool:
    # the raw-formula oracle loses accuracy wherever sin(nu pi/2) is
    # tiny, including the removable point nu = 4 that the library
    # handles by series; keep the comparison where the oracle is sound
    if abs(s) < 1e-6:
        return False
    if s < 3.5:
        return True
    nu = math.sqrt(s)
    return abs(nu - 2 * round(nu / 2.0)) > 0.05


def test_lhs_matches_oracle_on_grid():
    ss = np.concatenate([np.linspace(-450.0, -0.5, 301),
                         np.linspace(-0.49, 3.9, 201),
                         np.linspace(4.2, 140.0, 401)])
    worst = 0.0
    for s in ss:
        if not _away_from_poles(float(s)):
            continue
        got = eigen_lhs(float(s))
        want = lhs_oracle(float(s))
        worst = max(worst, abs(got - want) / max(1.0, abs(want)))
    assert worst < 5e-9, f"worst relative deviation {worst:.3e}"


@given(st.floats(min_value=-400.0, max_value=120.0))
@settings(max_examples=300, deadline=None)
def test_lhs_matches_oracle_property(s):
    if not _away_from_poles(s):
        return
    got = eigen_lhs(s)
    want = lhs_oracle(s)
    assert abs(got - want) <= 1e-8 * max(1.0, abs(want))


def test_lhs_frozen_values():
    assert eigen_lhs(0.0) == pytest.approx(LHS_ZERO_REF, abs=1e-12)
    assert LHS_AT_ZERO == pytest.approx(LHS_ZERO_REF, abs=1e-15)
    assert eigen_lhs(16.0) == pytest.approx(LHS_SIXTEEN_REF, abs=1e-10)


def test_lhs_deep_negative_asymptote():
    # F(-b^2) -> -b as b grows; exercised far beyond exp underflow
    for b in (50.0, 300.0, 5000.0):
        assert eigen_lhs(-b * b) == pytest.approx(-b, rel=1e-12)


def test_removable_point_is_smooth():
    # the Taylor patch and the direct evaluation must agree across the
    # patch boundary at |nu - 4| = 1e-4 (in s: |s - 16| ~ 8e-4)
    for ds in (2e-4, 8.1e-4, 7.9e-4, -2e-4, -8.1e-4):
        s = 16.0 + ds
        assert eigen_lhs(s) == pytest.approx(lhs_oracle(s), rel=1e-9)
    inside = eigen_lhs(16.0 + 7.99e-4)
    outside = eigen_lhs(16.0 + 8.01e-4)
    assert abs(inside - outside) < 1e-5


@pytest.mark.parametrize("s", [4.0, 36.0, 64.0, 100.0])
def test_true_poles_raise(s):
    with pytest.raises(PoleError):
        eigen_lhs(s)


def test_pole_vicinity_raises_but_sixteen_does_not():
    with pytest.raises(PoleError):
        eigen_lhs(36.0 + 1e-26)
    assert math.isfinite(eigen_lhs(16.0))


def test_constants_frozen_and_consistent():
    c = efimov_constants(tol=1e-12)
    assert c.b == pytest.approx(B_REF, abs=1e-12)
    assert c.C == pytest.approx(C_REF, abs=1e-12)
    assert abs(c.C - (c.b * c.b + 0.25)) < 1e-12
    assert c.residual <= 1e-12
    # defining equation: F(-b^2) = 0
    assert lhs_oracle(-c.b * c.b) == pytest.approx(0.0, abs=1e-12)


def test_branch0_frozen_at_x0():
    root = solve_branch0(0.0)
    assert root.value == pytest.approx(ROOTS_AT_X0[0], abs=1e-10)
    assert root.branch_index == 0
    assert root.lam == pytest.approx(root.value - 4.0)
    assert not root.near_pole
    # consistency with the strength constant: nu^2(x=0) = -(C - 1/4)
    c = efimov_constants()
    assert root.value == pytest.approx(-(c.C - 0.25), abs=1e-10)


@pytest.mark.parametrize("x", [-30.0, -3.0, -0.2, 0.5, 7.0, 120.0])
def test_branch0_matches_root_oracle(x):
    got = solve_branch0(x).value
    want = branch0_oracle(x)
    assert abs(got - want) <= 1e-9


def test_branch0_dimer_asymptote():
    x = -200.0
    s = solve_branch0(x).value
    assert abs(s + x * x) < 1e-6 * x * x


def test_branch0_three_atom_threshold():
    s = solve_branch0(1e6).value
    assert 0.0 < 4.0 - s < 1e-4


@given(st.floats(min_value=-100.0, max_value=100.0),
       st.floats(min_value=-100.0, max_value=100.0))
@settings(max_examples=80, deadline=None)
def test_branch0_monotone_in_x(x1, x2):
    lo, hi = sorted((x1, x2))
    if hi - lo < 1e-6:
        return  # below root resolution, ordering is not meaningful
    assert solve_branch0(lo).value < solve_branch0(hi).value


def test_branch0_residual_within_tol():
    for x in (-17.0, 0.0, 9.5):
        root = solve_branch0(x, tol=1e-11)
        assert root.residual <= 1e-11


def test_branches_frozen_at_x0():
    roots = solve_branches(0.0, 4)
    got = [r.value for r in roots]
    assert got == pytest.approx(list(ROOTS_AT_X0), abs=1e-9)
    assert [r.branch_index for r in roots] == [0, 1, 2, 3]


@pytest.mark.parametrize("x", [-7.3, 0.0, 12.5])
def test_branches_live_in_their_intervals(x):
    roots = solve_branches(x, 5)
    assert len(roots) == 5
    for r in roots[1:]:
        nu_lo, nu_hi = branch_interval(r.branch_index)
        nu = math.sqrt(r.value)
        assert nu_lo < nu < nu_hi
        assert r.residual <= 1e-10
    assert roots[0].value < 4.0


def test_branch_interval_layout():
    assert branch_interval(0) == (0.0, 2.0)
    assert branch_interval(1) == (2.0, 6.0)
    assert branch_interval(2) == (6.0, 8.0)
    assert branch_interval(5) == (12.0, 14.0)
    with pytest.raises(ValueError):
        branch_interval(-1)


def test_near_pole_flag_logic():
    assert _flag_near_pole(36.0 + 1e-9)          # nu just above 6
    assert _flag_near_pole((2.0 + 1e-9) ** 2)    # nu just above 2
    assert not _flag_near_pole(16.0 + 1e-9)      # removable point
    assert not _flag_near_pole(-1.0)
    assert not _flag_near_pole(25.0)


def test_solve_branches_count_validation():
    with pytest.raises(ConfigError):
        solve_branches(0.0, 0)


def test_bracket_expansion_failure_is_reported():
    with pytest.raises((BracketError, ConfigError)):
        solve_branch0(float("nan"))


def test_tabulate_matches_pointwise_solutions():
    cfg = make_config(-2.0)
    grid = LogGrid.make(0.05, 40.0, 50)
    branch = tabulate_branch(cfg, grid)
    for rho, s in zip(grid.values, branch.nu_squared):
        expected = solve_branch0(cfg.x_of_rho(float(rho))).value
        assert s == pytest.approx(expected, abs=1e-10)


def test_tabulate_thread_count_invisible():
    cfg = make_config(3.3)
    grid = LogGrid.make(0.01, 1e4, 230)
    one = tabulate_branch(cfg, grid, threads=1)
    four = tabulate_branch(cfg, grid, threads=4)
    assert np.array_equal(one.nu_squared, four.nu_squared)


def test_tabulate_unitarity_is_constant():
    cfg = make_config(float("inf"))
    grid = LogGrid.make(1.0, 1e8, 64)
    branch = tabulate_branch(cfg, grid)
    assert np.all(branch.nu_squared == branch.nu_squared[0])
    assert branch.nu_squared[0] == pytest.approx(-(B_REF ** 2), abs=1e-10)
    assert branch.nu_squared_at(123.456) == pytest.approx(-(B_REF ** 2), abs=1e-10)


def test_branch_evaluation_between_grid_points():
    cfg = make_config(-5.0)
    grid = LogGrid.make(0.1, 100.0, 40)
    branch = tabulate_branch(cfg, grid)
    rho = 2.34567  # not a grid point
    expected = solve_branch0(cfg.x_of_rho(rho)).value
    assert branch.nu_squared_at(rho) == pytest.approx(expected, abs=1e-10)


def test_constant_branch_interpolates_without_config():
    grid = LogGrid.make(1.0, 100.0, 11)
    branch = constant_branch(-4.2, grid)
    assert branch.nu_squared_at(7.7) == pytest.approx(-4.2)
    arr = branch.nu_squared_at(np.array([2.0, 50.0]))
    assert np.allclose(arr, -4.2)


def test_effective_potential_formula_and_table():
    cfg = make_config(float("inf"))
    grid = LogGrid.make(1.0, 1e3, 30)
    branch = tabulate_branch(cfg, grid)
    pot = effective_potential(branch, None)
    tbl = pot.table()
    assert list(tbl) == ["rho", "x", "nu_squared", "lambda", "v_eff"]
    v_expected = (tbl["nu_squared"] - 0.25) / (2.0 * tbl["rho"] ** 2)
    assert np.allclose(tbl["v_eff"], v_expected, rtol=1e-14)
    assert np.allclose(tbl["lambda"], tbl["nu_squared"] - 4.0, rtol=0, atol=0)
    assert np.allclose(2.0 * tbl["v_eff"] * tbl["rho"] ** 2, -C_REF, rtol=1e-9)


def test_hardwall_and_cap_masks():
    cfg = make_config(float("inf"))
    grid = LogGrid.make(0.25, 100.0, 40)
    branch = tabulate_branch(cfg, grid)
    wall = effective_potential(branch, HardWall(1.0))
    capped = effective_potential(branch, Cap(1.0))
    inside, outside = 0.5, 2.0
    assert wall.v_eff(inside) == math.inf
    assert math.isfinite(wall.v_eff(outside))
    assert capped.v_eff(inside) == pytest.approx(capped.v_eff(1.0))
    assert capped.v_eff(outside) == pytest.approx(wall.v_eff(outside))
    assert isinstance(wall, EffectivePotential)


def test_scheme_validation():
    with pytest.raises(ConfigError):
        HardWall(0.0)
    with pytest.raises(ConfigError):
        Cap(-1.0)
    cfg = make_config(float("inf"))
    grid = LogGrid.make(1.0, 10.0, 5)
    branch = tabulate_branch(cfg, grid)
    with pytest.raises((ConfigError, GridError)):
        effective_potential(branch, HardWall(50.0))


def test_max_step_change_reports_table_increments():
    cfg = make_config(-1.0)
    grid = LogGrid.make(0.01, 100.0, 400)
    branch = tabulate_branch(cfg, grid)
    expected = float(np.max(np.abs(np.diff(branch.nu_squared))))
    assert branch.max_step_change == expected
    # at unitarity the branch is flat, so the diagnostic vanishes
    flat = tabulate_branch(make_config(float("inf")), LogGrid.make(1.0, 10.0, 20))
    assert flat.max_step_change == 0.0


def test_tabulate_through_steep_positive_a_region():
    # continuation on a > 0 drives the root toward the nu^2 = 4 pole;
    # bracket expansion must stay clear of the pole guard while doing so
    cfg = make_config(3.3)
    grid = LogGrid.make(0.01, 100.0, 60)
    branch = tabulate_branch(cfg, grid)
    assert np.all(branch.nu_squared < 4.0)
    assert np.all(np.diff(branch.nu_squared) > 0.0)
    tail = solve_branch0(cfg.x_of_rho(grid.values[-1]))
    assert branch.nu_squared[-1] == pytest.approx(tail.value, abs=5e-15)


def test_branch0_threshold_asymptote_at_huge_x():
    # 4 - nu^2 -> 48 / (pi x); the plain residual is unattainable there
    # (the slope grows like x^2) but the root stays machine-accurate
    for x in (1e6, 1e9, 1e11):
        r = solve_branch0(x)
        assert r.value < 4.0
        assert (4.0 - r.value) * math.pi * x / 48.0 == pytest.approx(
            1.0, rel=1e-5)
    assert solve_branch0(1e9).near_pole


def test_branch0_unresolvable_against_pole():
    from efimov_lab import SolverError
    with pytest.raises(SolverError):
        solve_branch0(1e13)
