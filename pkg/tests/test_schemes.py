import math

import numpy as np
import pytest

from eglab.directions import affine, current_gradient, past_gradient
from eglab.operators import NumericalFailure, ProblemInstance, UsageError, linear_operator
from eglab.schedules import (
    GAEG,
    GAEG_PLUS,
    GEAG,
    GFEG,
    GFEG_PLUS,
    SCHEMES,
    gaeg_schedule,
    geag_schedule,
    gfeg_plus_schedule,
    gfeg_schedule,
    make_schedule,
)
from eglab.schemes import init_state, run, step


def scalar_problem():
    return ProblemInstance(dim=1, F=lambda x: x.copy(), lipschitz_L=1.0, x_star=np.zeros(1))


def test_geag_first_step_hand_values():
    p = scalar_problem()
    s = geag_schedule(1.0)
    st = init_state(p, GEAG, s, np.ones(1))
    nxt = step(st, GEAG, s, current_gradient(), p)
    assert nxt.y_prev[0] == pytest.approx(0.5) and nxt.x[0] == pytest.approx(0.5)


def test_gfeg_first_step_hand_values():
    p = scalar_problem()
    s = gfeg_schedule(1.0, beta=0.0, validate=False)
    nxt = step(init_state(p, GFEG, s, np.ones(1)), GFEG, s, current_gradient(), p)
    assert nxt.y_prev[0] == pytest.approx(1 / 3) and nxt.x[0] == pytest.approx(2 / 3)


def test_gaeg_first_step_hand_values():
    p = scalar_problem()
    s = gaeg_schedule(1.0, lam=0.5)
    assert s.eta == 0.5
    nxt = step(init_state(p, GAEG, s, np.ones(1)), GAEG, s, current_gradient(), p)
    assert nxt.x[0] == pytest.approx(5 / 6)
    assert nxt.anchor[0] == pytest.approx(5 / 12)
    assert nxt.y[0] == pytest.approx(9 / 16)


def test_max_iter_zero_and_full_budget(small_spd):
    s = make_schedule(GEAG, small_spd.lipschitz_L)
    x0 = np.ones(small_spd.dim)
    assert len(run(small_spd, GEAG, s, max_iter=0, x0=x0)) == 1
    assert len(run(small_spd, GEAG, s, max_iter=25, stop_tol=math.inf, x0=x0)) == 26
    assert len(run(small_spd, GEAG, s, max_iter=25, stop_tol=0.0, x0=x0)) == 26


def test_stop_tol_stops_early(small_spd):
    s = make_schedule(GAEG_PLUS, small_spd.lipschitz_L)
    tr = run(small_spd, GAEG_PLUS, s, max_iter=5000, stop_tol=1e-2, x0=np.ones(small_spd.dim))
    assert len(tr) < 5001
    assert tr.records[-1].fb_residual <= 1e-2 < tr.records[-2].fb_residual


@pytest.mark.parametrize("scheme", SCHEMES)
def test_determinism(spd50, scheme):
    s = make_schedule(scheme, spd50.lipschitz_L)
    x0 = np.ones(spd50.dim)
    a = run(spd50, scheme, s, max_iter=100, x0=x0)
    b = run(spd50, scheme, s, max_iter=100, x0=x0)
    assert a.column("residual").tolist() == b.column("residual").tolist()


def test_numerical_failure_carries_iteration():
    p = ProblemInstance(dim=1, F=lambda x: 1e150 * x, lipschitz_L=1e150)
    s = geag_schedule(1.0, eta=1.0, validate=False)
    with pytest.raises(NumericalFailure) as info:
        with np.errstate(over="ignore", invalid="ignore"):
            run(p, GEAG, s, max_iter=50, x0=np.ones(1))
    exc = info.value
    assert exc.iteration is not None and exc.iteration >= 1
    assert len(exc.trace) == exc.iteration


def test_incompatible_inputs(small_spd):
    s = make_schedule(GEAG, small_spd.lipschitz_L)
    with pytest.raises(UsageError):
        run(small_spd, GFEG, s)
    with pytest.raises(UsageError):
        run(small_spd, GEAG, s, affine(GFEG, 0.1, 0.1))
    with pytest.raises(UsageError):
        run(small_spd, "nope", s)


@pytest.mark.parametrize("nu", [2.5, 3.0, 5.0])
def test_gfeg_without_beta_matches_geag(spd50, nu):
    L = spd50.lipschitz_L
    x0 = np.linspace(-1, 1, spd50.dim)
    a = run(spd50, GEAG, geag_schedule(L, nu=nu), max_iter=10, x0=x0, keep_states=True)
    b = run(spd50, GFEG, gfeg_schedule(L, eta=1 / L, beta=0.0, nu=nu, validate=False), max_iter=10, x0=x0,
            keep_states=True)
    for sa, sb in zip(a.states, b.states):
        np.testing.assert_allclose(sa.x, sb.x, rtol=0, atol=1e-10)


def test_gfeg_plus_without_anchor_motion_matches_gfeg(spd50):
    L = spd50.lipschitz_L
    x0 = np.linspace(-1, 1, spd50.dim)
    plus = gfeg_plus_schedule(L, regime="exact", eta=1 / L, gamma=0.0, mu=1.0, r=3.0, validate=False)
    base = gfeg_schedule(L, eta=1 / L, beta=0.0, nu=3.0, validate=False)
    a = run(spd50, GFEG_PLUS, plus, max_iter=10, x0=x0, keep_states=True)
    b = run(spd50, GFEG, base, max_iter=10, x0=x0, keep_states=True)
    for k, (sa, sb) in enumerate(zip(a.states, b.states)):
        assert plus.beta_k(k) == base.beta_k(k) == 0.0
        np.testing.assert_allclose(sa.anchor, x0)
        np.testing.assert_allclose(sa.x, sb.x, rtol=0, atol=1e-10)


@pytest.mark.parametrize("scheme", SCHEMES)
def test_stationary_start_stays_put(scheme):
    M = np.array([[2.0, 1.0], [-1.0, 1.5]])
    c = np.array([0.25, -0.5])
    p = ProblemInstance(dim=2, F=lambda x: M @ (x - c), lipschitz_L=float(np.linalg.norm(M, 2)))
    tr = run(p, scheme, make_schedule(scheme, p.lipschitz_L), max_iter=20, x0=c, keep_states=True)
    for st in tr.states:
        np.testing.assert_array_equal(st.x, c)


@pytest.mark.parametrize("scheme", SCHEMES)
def test_translation_invariance(spd50, scheme):
    M, f = spd50.matrix, spd50.offset
    shift = np.full(spd50.dim, 0.75)
    moved = ProblemInstance(dim=spd50.dim, F=linear_operator(M, f - M @ shift), lipschitz_L=spd50.lipschitz_L)
    s = make_schedule(scheme, spd50.lipschitz_L)
    x0 = np.linspace(0, 1, spd50.dim)
    a = run(spd50, scheme, s, max_iter=200, x0=x0).column("residual")
    b = run(moved, scheme, s, max_iter=200, x0=x0 + shift).column("residual")
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


@pytest.mark.parametrize("scheme", SCHEMES)
def test_fb_residual_below_residual_norm(small_minimax, scheme):
    s = make_schedule(scheme, small_minimax.lipschitz_L)
    tr = run(small_minimax, scheme, s, max_iter=300, x0=np.full(small_minimax.dim, 0.01),
             report_eta=1 / small_minimax.lipschitz_L)
    for rec in tr.records:
        assert rec.fb_residual <= rec.residual + 1e-10


@pytest.mark.parametrize("scheme", SCHEMES)
def test_past_gradient_runs_converge(spd50, scheme):
    kappa = 1.0
    s = make_schedule(scheme, spd50.lipschitz_L, kappa=kappa)
    tr = run(spd50, scheme, s, past_gradient(), max_iter=500, x0=np.ones(spd50.dim))
    r = tr.column("residual")
    assert r[-1] < 0.1 * r[0]
