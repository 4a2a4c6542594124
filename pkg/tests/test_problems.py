import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from eglab.operators import UsageError, fb_residual
from eglab.problems import (
    LinearNESpec,
    MinimaxSpec,
    cohypomonotone_modulus,
    gen_linear_ne,
    gen_quadratic_minimax,
    kkt_blocks,
    linear_ne_from_matrix,
    power_iteration,
    project_simplex,
    solve_reference,
)


def bisection_projection(v, iters=200):
    """Independent oracle: solve sum(max(v - t, 0)) = 1 for t by bisection."""
    lo, hi = v.min() - 1.0, v.max()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.maximum(v - mid, 0).sum() > 1:
            lo = mid
        else:
            hi = mid
    return np.maximum(v - 0.5 * (lo + hi), 0)


vectors = arrays(np.float64, st.integers(1, 30), elements=st.floats(-1e3, 1e3))


@settings(max_examples=200, deadline=None)
@given(vectors)
def test_simplex_projection_feasible_and_optimal(v):
    p = project_simplex(v)
    assert np.all(p >= 0)
    assert p.sum() == pytest.approx(1.0, abs=1e-9)
    # variational inequality against every vertex of the simplex
    g = v - p
    assert np.all(g <= g @ p + 1e-7 * (1 + np.abs(v).max()))
    np.testing.assert_allclose(p, bisection_projection(v), atol=1e-8 * (1 + np.abs(v).max()))


def test_simplex_projection_examples():
    np.testing.assert_allclose(project_simplex(np.array([0.2, 0.3, 0.5])), [0.2, 0.3, 0.5])
    np.testing.assert_allclose(project_simplex(np.array([1.0, 1.0])), [0.5, 0.5])
    np.testing.assert_allclose(project_simplex(np.array([5.0, 0.0, -1.0])), [1.0, 0.0, 0.0])
    with pytest.raises(UsageError):
        project_simplex(np.array([]))


def test_power_iteration_matches_dense_norm():
    rng = np.random.default_rng(5)
    for n in (3, 20, 60):
        M = rng.standard_normal((n, n))
        est = power_iteration(M)
        assert est.converged
        assert est.value == pytest.approx(np.linalg.norm(M, 2), rel=1e-6)


def test_power_iteration_nonconvergence_inflates():
    M = np.random.default_rng(2).standard_normal((30, 30))
    one = power_iteration(M, max_iter=1)
    two = power_iteration(M, max_iter=2)
    assert not one.converged and not two.converged
    # the estimate after two steps, inflated by one percent
    v = np.random.default_rng(0).standard_normal(30)
    v /= np.linalg.norm(v)
    w = M.T @ (M @ v)
    w /= np.linalg.norm(w)
    raw = np.sqrt(np.linalg.norm(M.T @ (M @ w)))
    assert two.value == pytest.approx(1.01 * raw, rel=1e-12)


def test_minimax_generator_deterministic_and_structured():
    spec = MinimaxSpec(6, 4, 0.1, 42)
    a, b = gen_quadratic_minimax(spec), gen_quadratic_minimax(spec)
    np.testing.assert_array_equal(a.matrix, b.matrix)
    np.testing.assert_array_equal(a.offset, b.offset)
    blk = kkt_blocks(spec)
    np.testing.assert_allclose(a.matrix[:6, 6:], blk["L"])
    np.testing.assert_allclose(a.matrix[6:, :6], -blk["L"].T)
    # clipped spectrum of the diagonal blocks
    assert np.linalg.eigvalsh(blk["A"]).min() >= 0.1 - 1e-12
    assert a.rho == 0.0 and a.meta["seed"] == 42 and "PCG64" in a.meta["prng"]
    assert gen_quadratic_minimax(MinimaxSpec(6, 4, -1e-3, 42)).rho == pytest.approx(1e-3)
    assert a.lipschitz_L == pytest.approx(np.linalg.norm(a.matrix, 2), rel=1e-6)


def test_minimax_different_seeds_differ():
    a = gen_quadratic_minimax(MinimaxSpec(5, 5, 0.1, 1))
    b = gen_quadratic_minimax(MinimaxSpec(5, 5, 0.1, 2))
    assert not np.allclose(a.matrix, b.matrix)


@pytest.mark.parametrize("kind", ["spd", "skew-plus-spd", "indefinite-symmetric"])
def test_linear_generator_root_and_constants(kind):
    p = gen_linear_ne(LinearNESpec(12, 3, kind))
    np.testing.assert_allclose(p.matrix @ p.x_star + p.offset, 0, atol=1e-10)
    assert p.lipschitz_L == pytest.approx(np.linalg.norm(p.matrix, 2), rel=1e-12)
    if kind == "indefinite-symmetric":
        assert p.rho > 0
    else:
        assert p.rho == 0.0
        sym = 0.5 * (p.matrix + p.matrix.T)
        assert np.linalg.eigvalsh(sym).min() > 0


def test_linear_kind_alias_and_errors():
    assert LinearNESpec(3, 0, "symmetric-positive-definite").kind == "spd"
    with pytest.raises(UsageError):
        LinearNESpec(3, 0, "banana")
    with pytest.raises(UsageError):
        LinearNESpec(0, 0)


def test_cohypomonotone_modulus_oracle():
    # M = diag(2, -4): M^{-1} = diag(1/2, -1/4) so rho = 1/4
    assert cohypomonotone_modulus(np.diag([2.0, -4.0])) == pytest.approx(0.25)
    assert cohypomonotone_modulus(np.diag([1.0, 3.0])) == 0.0
    # the defining inequality <Mx - My, x - y> >= -rho |Mx - My|^2 holds
    M = np.diag([2.0, -4.0])
    rho = cohypomonotone_modulus(M)
    rng = np.random.default_rng(0)
    for _ in range(100):
        d = rng.standard_normal(2)
        assert (M @ d) @ d >= -rho * (M @ d) @ (M @ d) - 1e-12


def test_linear_ne_from_matrix():
    p = linear_ne_from_matrix(np.array([[2.0, 1.0], [-1.0, 2.0]]), [1.0, 0.0])
    np.testing.assert_allclose(p.F(p.x_star), 0, atol=1e-14)


def test_reference_solution_on_minimax(small_minimax):
    ref = solve_reference(small_minimax)
    assert ref.confident
    assert ref.fb_residual <= 1e-10
    assert fb_residual(small_minimax, 1 / small_minimax.lipschitz_L, ref.x) == pytest.approx(ref.fb_residual)


def test_reference_solution_uses_known_root(small_spd):
    ref = solve_reference(small_spd)
    assert ref.iterations == 0 and ref.confident


def test_reference_low_budget_not_confident(small_minimax):
    ref = solve_reference(small_minimax, budget=3)
    assert not ref.confident
