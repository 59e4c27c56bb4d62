import numpy as np
import pytest
from scipy.integrate import quad

from janglab.barrier import (BarrierProfile, barrier_audit_passes,
                             barrier_csv, barrier_inequality_audit,
                             default_r0_candidates, eval_barrier, find_r0,
                             graph_operator_at_barrier, ode_residual,
                             ode_residual_audit)
from janglab.errors import DomainError, NoAdmissibleR0
from janglab.geometry import make_dataset
from janglab.grids import build_grid


def test_bprime_closed_form_matches_direct_quadrature_derivative():
    # b(s) = r0 Int_{s/r0}^inf (t^{2n-4}-1)^{-1/2} dt, so b'(s) is minus the
    # integrand at the lower limit; cross-check b against raw quadrature too
    bp = BarrierProfile(r0=1.5, n=4)
    for s in (2.0, 3.0, 10.0):
        rho = s / 1.5
        direct, _ = quad(lambda t: (t ** 4 - 1.0) ** -0.5, rho, np.inf,
                         limit=400)
        assert abs(bp.b(s) - 1.5 * direct) < 1e-8
        assert abs(bp.bprime(s) + (rho ** 4 - 1.0) ** -0.5) < 1e-14


def test_bprime_is_derivative_of_b():
    bp = BarrierProfile(r0=1.0, n=5)
    h = 1e-5
    for s in (1.5, 2.0, 4.0):
        fd = (bp.b(s + h) - bp.b(s - h)) / (2.0 * h)
        assert abs(fd - bp.bprime(s)) < 1e-8


def test_bsecond_is_derivative_of_bprime():
    bp = BarrierProfile(r0=1.0, n=4)
    s = np.array([1.3, 2.0, 5.0])
    h = 1e-6
    fd = (bp.bprime(s + h) - bp.bprime(s - h)) / (2.0 * h)
    assert np.max(np.abs(fd - bp.bsecond(s))) < 1e-6


def test_barrier_slope_is_minus_one_at_matching_radius():
    # b' = -1 exactly where (s/r0)^{2n-4} = 2, i.e. s = r0 2^{1/(2n-4)}
    for n in (4, 5, 6):
        bp = BarrierProfile(r0=2.0, n=n)
        s_star = 2.0 * 2.0 ** (1.0 / (2 * n - 4))
        assert abs(float(bp.bprime(s_star)) + 1.0) < 1e-12


@pytest.mark.parametrize("n", [4, 5, 6])
def test_ode_residual_vanishes(n):
    bp = BarrierProfile(r0=1.0, n=n)
    s = np.geomspace(1.5, 64.0, 200)
    assert ode_residual_audit(bp, s) < 1e-9


def test_ode_audit_rejects_samples_at_r0():
    bp = BarrierProfile(r0=1.0, n=4)
    with pytest.raises(DomainError):
        ode_residual_audit(bp, np.array([1.0, 2.0]))


def test_eval_barrier_domain():
    bp = BarrierProfile(r0=1.0, n=4)
    with pytest.raises(DomainError):
        eval_barrier(bp, 0.5)
    b, b1, b2 = eval_barrier(bp, 2.0)
    assert b > 0.0 and b1 < 0.0 and b2 > 0.0


def test_barrier_decreasing_and_vanishing_at_infinity():
    bp = BarrierProfile(r0=1.0, n=4)
    s = np.array([1.5, 2.0, 4.0, 16.0, 128.0, 1024.0])
    b = np.array([bp.b(float(x)) for x in s])
    assert np.all(np.diff(b) < 0.0)
    # b ~ r0^2 / s for n = 4 at large s
    assert abs(b[-1] - 1.0 / 1024.0) < 1e-5


def test_flat_graph_operator_closed_form():
    # On flat data with q = 0 the operator at the barrier graph reduces to
    # the exact ODE combination -r0^{n-2} r^{1-n}
    data = make_dataset("flat", 4, {})
    bp = BarrierProfile(r0=1.0, n=4)
    r = np.geomspace(1.5, 100.0, 50)
    got = graph_operator_at_barrier(data, bp, r, q_sign=-1.0)
    want = -(1.0 / r) ** 3
    assert np.max(np.abs(got - want)) < 1e-13


def test_barrier_inequality_strict_on_vacuum_data():
    grid = build_grid(512.0, 1024, "uniform")
    data = make_dataset("schwarzschild", 4, {"m": 1.0})
    bp = BarrierProfile(r0=2.0, n=4)
    sub = build_grid(512.0, 1024, "uniform")

    class _View:
        nodes = sub.nodes[sub.nodes > 2.0 * (1 + 1e-9)]
    minus, plus = barrier_inequality_audit(data, bp, _View())
    assert np.max(minus) < 0.0
    assert np.max(plus) < 0.0
    assert barrier_audit_passes(data, bp, _View())


def test_barrier_inequality_rejects_interior_nodes(flat_data, base_grid):
    bp = BarrierProfile(r0=1.0, n=4)
    with pytest.raises(DomainError):
        barrier_inequality_audit(flat_data, bp, base_grid)


def test_find_r0_returns_smallest_admissible(dec_data, base_grid, r0):
    assert r0 == min(c for c in [1.0, 2.0, 4.0, 8.0])
    # a larger-only candidate list returns that larger radius
    assert find_r0(dec_data, base_grid, [4.0]) == 4.0


def test_find_r0_failure_modes(dec_data, base_grid):
    with pytest.raises(NoAdmissibleR0):
        find_r0(dec_data, base_grid, [])
    with pytest.raises(NoAdmissibleR0):
        find_r0(dec_data, base_grid, [1e6])    # outside the grid


def test_find_r0_rejects_non_decaying_momentum():
    # a q-tensor that does not decay dominates the barrier terms far out, so
    # the +q inequality fails for every candidate radius
    from janglab.profiles import constant_profile
    grid = build_grid(64.0, 256, "uniform")
    big = make_dataset("flat", 4, {})
    big.q_rad = constant_profile(-0.1)
    big.q_tan = constant_profile(-0.1)
    with pytest.raises(NoAdmissibleR0):
        find_r0(big, grid, [1.0, 2.0, 4.0])


def test_default_r0_candidates_inside_grid(base_grid):
    cands = default_r0_candidates(base_grid)
    assert cands[0] == 1.0
    assert max(cands) < base_grid.r_max / 8.0
    assert np.allclose(np.diff(np.log2(cands)), 1.0)


def test_barrier_csv_schema():
    bp = BarrierProfile(r0=1.0, n=4)
    text = barrier_csv(bp, np.array([2.0, 3.0]))
    lines = text.strip().split("\n")
    assert lines[0] == "s,b,bprime,bsecond,ode_residual"
    assert len(lines) == 3
    row = [float(v) for v in lines[1].split(",")]
    assert row[0] == 2.0 and abs(row[4]) < 1e-9


def test_barrier_profile_rejects_bad_parameters():
    with pytest.raises(DomainError):
        BarrierProfile(r0=-1.0, n=4)
    with pytest.raises(DomainError):
        BarrierProfile(r0=1.0, n=3)
