import math

import numpy as np
import pytest

from concentra import (
    DiscreteMeasure,
    FiniteMetricSpace,
    InputError,
    best_constant,
    check_bg_duality,
    check_gc,
    check_lsi_grid,
    check_transport,
    replay,
)
from concentra.certify import (
    Certificate,
    gc_slack,
    lipschitz_family,
    lipschitz_polytope_vertices,
)

TWO_POINT = DiscreteMeasure((0.0, 1.0), np.array([0.5, 0.5]))


def scalar_gc_slack_oracle(kappa, t):
    """Two-point uniform measure, f = indicator: log cosh(t/2) - kappa t^2/2."""
    return math.log(math.cosh(t / 2.0)) - kappa * t * t / 2.0


def test_gc_slack_matches_scalar_oracle():
    f = np.array([0.0, 1.0])
    for t in (-3.0, -0.5, 0.7, 2.0):
        got = gc_slack(TWO_POINT, 0.2, f, t)
        assert got == pytest.approx(scalar_gc_slack_oracle(0.2, t), abs=1e-12)


def test_check_gc_two_point_boundary():
    # kappa = 1/4 is the exact constant of the uniform two-point measure
    assert check_gc(TWO_POINT, 0.25).passed
    cert = check_gc(TWO_POINT, 0.2)
    assert not cert.passed
    assert cert.worst_slack > 0
    # point masses concentrate perfectly at any constant
    delta = DiscreteMeasure((0.0,), np.array([1.0]))
    assert check_gc(delta, 1e-6).passed


def test_gc_monotone_in_kappa():
    verdicts = [check_gc(TWO_POINT, k).passed for k in (0.1, 0.2, 0.25, 0.5, 1.0)]
    assert verdicts == [False, False, True, True, True]


def test_replay_reproduces_worst_slack():
    cert = check_gc(TWO_POINT, 0.2)
    assert replay(cert, mu=TWO_POINT) == pytest.approx(cert.worst_slack, abs=1e-12)
    tampered = Certificate(
        inequality=cert.inequality,
        constant=cert.constant,
        order_s=cert.order_s,
        worst_slack=cert.worst_slack + 1.0,
        witness=cert.witness,
        verdict="fail",
        search_size=cert.search_size,
    )
    with pytest.raises(InputError):
        replay(tampered, mu=TWO_POINT)


def test_certificate_rejects_inconsistent_verdict():
    with pytest.raises(InputError):
        Certificate(
            inequality="GC",
            constant=1.0,
            order_s=None,
            worst_slack=1.0,
            witness={},
            verdict="pass",
            search_size=1,
        )


def test_lipschitz_polytope_vertices_two_points():
    verts = lipschitz_polytope_vertices(np.array([[0.0, 1.0], [1.0, 0.0]]))
    got = sorted(tuple(v) for v in verts)
    assert got == [(0.0, -1.0), (0.0, 1.0)]


def test_lipschitz_polytope_vertices_are_lipschitz():
    rng = np.random.default_rng(0)
    w = rng.uniform(0.5, 1.5, size=(4, 4))
    w = (w + w.T) / 2
    np.fill_diagonal(w, 0.0)
    for k in range(4):
        w = np.minimum(w, w[:, k, None] + w[None, k, :])
    verts = lipschitz_polytope_vertices(w)
    assert verts
    for f in verts:
        gaps = np.abs(f[:, None] - f[None, :])
        assert np.max(gaps - w) <= 1e-9


def test_lipschitz_family_members_are_lipschitz():
    sp = FiniteMetricSpace((0, 1, 2), np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], float))
    mu = DiscreteMeasure((0, 1, 2), np.array([0.2, 0.3, 0.5]), space=sp)
    for f in lipschitz_family(mu, family_size=32, seed=1):
        gaps = np.abs(f[:, None] - f[None, :])
        assert np.max(gaps - sp.dist) <= 1e-9


def test_check_transport_and_bg_duality():
    assert check_transport(TWO_POINT, 4.0, 1.0).passed
    cert = check_transport(TWO_POINT, 40.0, 1.0)
    assert not cert.passed
    assert replay(cert, mu=TWO_POINT) == pytest.approx(cert.worst_slack, abs=1e-9)
    out = check_bg_duality(TWO_POINT, 0.25)
    assert out["agree"]
    assert out["gc_verdict"] == "pass" and out["t1_verdict"] == "pass"


def test_transport_monotone_in_alpha():
    verdicts = [check_transport(TWO_POINT, a, 1.0).passed for a in (1.0, 4.0, 10.0, 40.0)]
    assert verdicts == [True, True, False, False]


def test_check_lsi_gaussian_grid():
    grid = np.linspace(-6.0, 6.0, 601)
    dens = np.exp(-(grid**2) / 2.0)
    cert = check_lsi_grid(grid, dens, 1.0)
    assert cert.passed
    assert cert.grid_h == pytest.approx(0.02, abs=1e-12)
    bad = check_lsi_grid(grid, dens, 1.5)
    assert not bad.passed
    slack = replay(bad, grid=grid, density=dens)
    assert slack == pytest.approx(bad.worst_slack, abs=1e-9)


def test_check_lsi_input_validation():
    grid = np.linspace(-1.0, 1.0, 11)
    with pytest.raises(InputError):
        check_lsi_grid(grid, np.zeros_like(grid), 1.0)
    with pytest.raises(InputError):
        check_lsi_grid(np.array([0.0, 0.1, 0.3]), np.ones(3), 1.0)
    with pytest.raises(InputError):
        check_lsi_grid(grid, np.ones_like(grid), -1.0)


def test_lsi_slack_oracle_exponential_function():
    """For f = e^{tx/2} under N(0,1): slack = (t^2/2) e^{t^2/2} (1 - 1/alpha)."""
    grid = np.linspace(-8.0, 8.0, 3201)
    dens = np.exp(-(grid**2) / 2.0)
    from concentra.certify import lsi_slack

    w = dens / dens.sum()
    t = 1.0
    f = np.exp(t * grid / 2.0)
    for alpha in (0.5, 2.0):
        want = (t * t / 2.0) * math.exp(t * t / 2.0) * (1.0 - 1.0 / alpha)
        got = lsi_slack(w, f, grid[1] - grid[0], alpha)
        assert got == pytest.approx(want, abs=5e-3)


def test_best_constant_bisection():
    best = best_constant(lambda k: check_gc(TWO_POINT, k), (0.1, 1.0))
    assert best == pytest.approx(0.25, abs=1e-3)
    # degenerate bracket: both ends pass -> strongest end
    delta = DiscreteMeasure((0.0,), np.array([1.0]))
    assert best_constant(lambda k: check_gc(delta, k), (0.5, 1.0)) == 0.5
    with pytest.raises(InputError):
        best_constant(lambda k: check_gc(TWO_POINT, k), (0.01, 0.05))
    with pytest.raises(InputError):
        best_constant(lambda k: check_gc(TWO_POINT, k), (1.0, 0.1))


def test_certificates_record_search_metadata():
    cert = check_gc(TWO_POINT, 0.25, family_size=16, seed=3)
    assert cert.search_size > 0
    assert "mcshane" in cert.family
    assert cert.witness["t"] is not None
