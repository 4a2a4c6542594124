"""Benchmark instances: constrained quadratic minimax games and linear equations.

All randomness comes from ``numpy.random.default_rng`` (PCG64) seeded with the
integer carried by each instance description; the generator name is stored in ``meta`` so traces
can state how an instance was produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .operators import (
    ProblemInstance,
    UsageError,
    Vector,
    eval_F,
    eval_resolvent,
    fb_residual,
    linear_operator,
)

PRNG_NAME = "numpy.random.Generator(PCG64)"

LINEAR_KINDS = ("spd", "skew-plus-spd", "indefinite-symmetric")


# ---------------------------------------------------------------------------
# simplex projection


def project_simplex(v: Vector) -> Vector:
    """Euclidean projection of ``v`` onto ``{x >= 0, sum(x) = 1}``.

    Sort-based method: find the largest ``j`` with
    ``u_j - (sum_{i<=j} u_i - 1)/j > 0`` for ``u`` sorted decreasingly, then
    shift and clip.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise UsageError("project_simplex expects a nonempty 1-d vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    support = u - css / idx > 0
    j = idx[support][-1]
    theta = css[j - 1] / j
    return np.maximum(v - theta, 0.0)


def simplex_product_resolvent(sizes: tuple[int, ...]):
    """Resolvent of the normal cone of a product of simplices.

    The resolvent of a normal cone does not depend on the step, so ``eta`` is
    ignored.
    """
    bounds = np.cumsum((0,) + tuple(sizes))

    def resolvent(eta: float, v: Vector) -> Vector:
        out = np.empty_like(v)
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            out[lo:hi] = project_simplex(v[lo:hi])
        return out

    return resolvent


# ---------------------------------------------------------------------------
# spectral norm


class SpectralNormEstimate(NamedTuple):
    value: float
    converged: bool
    iterations: int


def power_iteration(M: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000,
                    seed: int = 0) -> SpectralNormEstimate:
    """Estimate ``||M||_2`` by power iteration on ``M^T M``.

    The start vector is drawn from a fixed seed so the result is
    reproducible.  If the relative change of the estimate never drops below
    ``tol`` the best estimate is inflated by 1% and ``converged`` is False.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise UsageError("power_iteration expects a square matrix")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for it in range(1, max_iter + 1):
        w = M.T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return SpectralNormEstimate(0.0, True, it)
        new = float(np.sqrt(nw))
        v = w / nw
        if abs(new - est) <= tol * new:
            return SpectralNormEstimate(new, True, it)
        est = new
    return SpectralNormEstimate(1.01 * est, False, max_iter)


def estimate_lipschitz(M: np.ndarray) -> float:
    return power_iteration(M).value


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class MinimaxSpec:
    p1: int
    p2: int
    d_low: float
    seed: int
    noise: float = 1.0
    rho: Optional[float] = None

    @property
    def dim(self) -> int:
        return self.p1 + self.p2


def _orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def _clipped_symmetric(rng: np.random.Generator, n: int, d_low: float) -> np.ndarray:
    Q = _orthogonal(rng, n)
    d = np.maximum(rng.standard_normal(n), d_low)
    A = (Q * d) @ Q.T
    return 0.5 * (A + A.T)


def kkt_blocks(desc: MinimaxSpec) -> dict:
    """Draw the raw blocks ``A, B, L, b, c`` for a minimax description."""
    if desc.p1 < 1 or desc.p2 < 1:
        raise UsageError("p1 and p2 must be positive")
    rng = np.random.default_rng(desc.seed)
    A = _clipped_symmetric(rng, desc.p1, desc.d_low)
    B = _clipped_symmetric(rng, desc.p2, desc.d_low)
    Lmat = desc.noise * rng.standard_normal((desc.p1, desc.p2))
    b = desc.noise * rng.standard_normal(desc.p1)
    c = desc.noise * rng.standard_normal(desc.p2)
    return {"A": A, "B": B, "L": Lmat, "b": b, "c": c}


def gen_quadratic_minimax(desc: MinimaxSpec) -> ProblemInstance:
    """KKT operator of ``min_u max_v 1/2 u'Au + b'u + u'Lv - 1/2 v'Bv - c'v``
    over a product of simplices."""
    blk = kkt_blocks(desc)
    M = np.block([[blk["A"], blk["L"]], [-blk["L"].T, blk["B"]]])
    f = np.concatenate([blk["b"], blk["c"]])
    est = power_iteration(M)
    if desc.rho is not None:
        rho = float(desc.rho)
    else:
        rho = 0.0 if desc.d_low > 0 else abs(desc.d_low)
    return ProblemInstance(
        dim=desc.dim,
        F=linear_operator(M, f),
        resolvent=simplex_product_resolvent((desc.p1, desc.p2)),
        lipschitz_L=est.value,
        rho=rho,
        label=f"minimax(p1={desc.p1},p2={desc.p2},d_low={desc.d_low:g},seed={desc.seed})",
        matrix=M,
        offset=f,
        meta={"seed": desc.seed, "prng": PRNG_NAME, "lipschitz_converged": est.converged,
              "kind": "minimax", "blocks": (desc.p1, desc.p2)},
    )


@dataclass(frozen=True)
class LinearNESpec:
    """Linear equation ``M x + f = 0``.

    ``mu`` is the smallest eigenvalue of the symmetric positive definite part
    (for the first two kinds).  For ``skew-plus-spd`` the skew part has unit
    spectral norm, so a small ``mu`` gives a nearly bilinear problem.
    """

    dim: int
    seed: int
    kind: str = "spd"
    mu: float = 0.1

    def __post_init__(self):
        if self.kind == "symmetric-positive-definite":
            object.__setattr__(self, "kind", "spd")
        if self.kind not in LINEAR_KINDS:
            raise UsageError(f"unknown linear kind {self.kind!r}; choose from {LINEAR_KINDS}")
        if self.dim < 1:
            raise UsageError("dim must be positive")


def _linear_matrix(rng: np.random.Generator, desc: LinearNESpec) -> np.ndarray:
    n = desc.dim
    Q = _orthogonal(rng, n)
    if desc.kind == "spd":
        eig = desc.mu + (1.0 - desc.mu) * rng.uniform(size=n)
        eig[0], eig[-1] = desc.mu, 1.0
        return 0.5 * ((Q * eig) @ Q.T + ((Q * eig) @ Q.T).T)
    if desc.kind == "skew-plus-spd":
        eig = desc.mu * (1.0 + rng.uniform(size=n))
        P = (Q * eig) @ Q.T
        P = 0.5 * (P + P.T)
        G = rng.standard_normal((n, n))
        K = G - G.T
        nk = np.linalg.norm(K, 2)
        if nk > 0:
            K /= nk
        return K + P
    # indefinite symmetric: magnitudes in [0.5, 1], random signs, at least one negative
    mags = 0.5 + 0.5 * rng.uniform(size=n)
    signs = np.where(rng.uniform(size=n) < 0.5, -1.0, 1.0)
    signs[0] = -1.0
    eig = mags * signs
    S = (Q * eig) @ Q.T
    return 0.5 * (S + S.T)


def cohypomonotone_modulus(M: np.ndarray) -> float:
    """``max(0, -lambda_min(M^{-1}))`` for a symmetric invertible ``M``."""
    lam = np.linalg.eigvalsh(0.5 * (M + M.T))
    return float(max(0.0, -np.min(1.0 / lam)))


def linear_ne_from_matrix(M, f, rho: Optional[float] = None, label: str = "linear-ne",
                          meta: Optional[dict] = None) -> ProblemInstance:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    f = np.atleast_1d(np.asarray(f, dtype=float))
    x_star = np.linalg.solve(M, -f)
    if rho is None:
        rho = cohypomonotone_modulus(M) if np.allclose(M, M.T) else 0.0
    return ProblemInstance(
        dim=M.shape[0],
        F=linear_operator(M, f),
        lipschitz_L=float(np.linalg.norm(M, 2)),
        rho=float(rho),
        x_star=x_star,
        label=label,
        matrix=M,
        offset=f,
        meta=dict(meta or {}),
    )


MAX_RETRIES = 8


def gen_linear_ne(desc: LinearNESpec) -> ProblemInstance:
    """Seeded linear equation with an exactly computed root."""
    for attempt in range(MAX_RETRIES + 1):
        seq = np.random.SeedSequence(desc.seed if attempt == 0 else [desc.seed, attempt])
        rng = np.random.default_rng(seq)
        M = _linear_matrix(rng, desc)
        f = rng.standard_normal(desc.dim)
        if np.linalg.cond(M) > 1e12:
            continue
        try:
            x_star = np.linalg.solve(M, -f)
        except np.linalg.LinAlgError:
            continue
        rho = cohypomonotone_modulus(M) if desc.kind == "indefinite-symmetric" else 0.0
        return ProblemInstance(
            dim=desc.dim,
            F=linear_operator(M, f),
            lipschitz_L=float(np.linalg.norm(M, 2)),
            rho=rho,
            x_star=x_star,
            label=f"linear-ne({desc.kind},dim={desc.dim},seed={desc.seed})",
            matrix=M,
            offset=f,
            meta={"seed": desc.seed, "prng": PRNG_NAME, "kind": desc.kind, "attempt": attempt},
        )
    raise UsageError(f"could not draw an invertible matrix after {MAX_RETRIES} retries")


# ---------------------------------------------------------------------------
# reference solutions


class ReferenceSolution(NamedTuple):
    x: Vector
    fb_residual: float
    confident: bool
    iterations: int


REFERENCE_TOL = 1e-10
REFERENCE_CHECK_EVERY = 25


def solve_reference(problem: ProblemInstance, budget: int = 200_000,
                    tol: float = REFERENCE_TOL) -> ReferenceSolution:
    """High-accuracy solution for instances without a closed form.

    Known roots are returned directly.  Otherwise plain (unanchored)
    projected extragradient with step ``1/(2L)`` is iterated until the FB
    residual at step ``1/L`` falls to ``tol / 100`` or the budget runs out.
    On polyhedral instances like the simplex games it converges linearly,
    unlike the anchored schemes.  A result above ``tol`` is flagged as not
    confident.
    """
    eta_report = 1.0 / problem.lipschitz_L
    if problem.x_star is not None:
        x = np.array(problem.x_star, dtype=float)
        r = fb_residual(problem, eta_report, x)
        return ReferenceSolution(x, r, r <= tol, 0)
    eta = 0.5 / problem.lipschitz_L
    x = eval_resolvent(problem, eta, np.zeros(problem.dim)).point
    target = tol / 100
    r, k = math.inf, 0
    for k in range(budget + 1):
        Fx = eval_F(problem, x)
        if k % REFERENCE_CHECK_EVERY == 0 or k == budget:
            r = fb_residual(problem, eta_report, x, Fx)
            if r <= target or k == budget:
                break
        y = eval_resolvent(problem, eta, x - eta * Fx).point
        x = eval_resolvent(problem, eta, x - eta * eval_F(problem, y)).point
    return ReferenceSolution(x, r, r <= tol, k)
