"""Problem abstraction for inclusions ``0 in F(x) + T(x)`` and residual metrics.

``F`` is a single-valued map and ``T`` is accessed only through its resolvent
``J_{eta T} = (I + eta T)^{-1}``.  Every resolvent call also hands back the
element ``xi = (v - point) / eta`` of ``T(point)`` so that solvers can carry it
along instead of recomputing it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Vector = np.ndarray


class UsageError(ValueError):
    """Raised when an operation is called with inputs that violate its contract."""


class NumericalFailure(ArithmeticError):
    """Raised when an evaluation produces NaN or Inf.

    ``iteration`` is filled in by the solver driver when the failure happens
    inside a run.
    """

    def __init__(self, message: str, iteration: Optional[int] = None):
        super().__init__(message)
        self.iteration = iteration


class ConfigError(ValueError):
    """Raised when parameters violate the feasibility window of a regime."""


@dataclass(frozen=True)
class ResolventResult:
    point: Vector
    xi: Vector


def _identity_resolvent(eta: float, v: Vector) -> Vector:
    return v.copy()


@dataclass(frozen=True)
class ProblemInstance:
    """An instance of ``0 in F(x) + T(x)``.

    Parameters
    ----------
    dim : int
        Ambient dimension.
    F : callable
        The single-valued operator.
    resolvent : callable
        ``resolvent(eta, v)`` returns ``J_{eta T}(v)``.
    lipschitz_L : float
        Lipschitz constant of ``F``.
    rho : float
        Co-hypomonotonicity modulus of ``F + T`` (zero when monotone).
    x_star : array, optional
        A known solution.
    label : str
        Free-form description recorded in outputs.
    matrix, offset : optional
        When ``F(x) = matrix @ x + offset`` these hold the affine data.
    meta : dict
        Extra generator metadata (seed, PRNG name, flags).
    """

    dim: int
    F: Callable[[Vector], Vector]
    resolvent: Callable[[float, Vector], Vector] = _identity_resolvent
    lipschitz_L: float = 1.0
    rho: float = 0.0
    x_star: Optional[Vector] = None
    label: str = ""
    matrix: Optional[np.ndarray] = None
    offset: Optional[Vector] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise UsageError("dim must be a positive integer")
        if not self.lipschitz_L > 0:
            raise UsageError("lipschitz_L must be positive")
        if self.rho < 0:
            raise UsageError("rho must be nonnegative")

    @property
    def has_T(self) -> bool:
        return self.resolvent is not _identity_resolvent


def linear_operator(M: np.ndarray, f: Vector) -> Callable[[Vector], Vector]:
    M = np.array(M, dtype=float)
    f = np.array(f, dtype=float)

    def F(x: Vector) -> Vector:
        return M @ x + f

    return F


def _check_vector(problem: ProblemInstance, x: Vector, name: str = "x") -> Vector:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != problem.dim:
        raise UsageError(
            f"{name} has shape {x.shape}, expected ({problem.dim},)"
        )
    return x


def eval_F(problem: ProblemInstance, x: Vector) -> Vector:
    x = _check_vector(problem, x)
    out = np.asarray(problem.F(x), dtype=float)
    if not np.all(np.isfinite(out)):
        raise NumericalFailure(f"operator F of '{problem.label}' returned a non-finite value")
    return out


def eval_resolvent(problem: ProblemInstance, eta: float, v: Vector) -> ResolventResult:
    if not eta > 0:
        raise UsageError(f"resolvent step must be positive, got {eta!r}")
    v = _check_vector(problem, v, "v")
    point = np.asarray(problem.resolvent(eta, v), dtype=float)
    if not np.all(np.isfinite(point)):
        raise NumericalFailure(f"resolvent of '{problem.label}' returned a non-finite value")
    xi = (v - point) / eta
    return ResolventResult(point=point, xi=xi)


def residual_norm(problem: ProblemInstance, x: Vector, xi: Vector) -> float:
    """Return ``||F(x) + xi||`` for a supplied element ``xi`` of ``T(x)``."""
    x = _check_vector(problem, x)
    xi = _check_vector(problem, xi, "xi")
    return float(np.linalg.norm(eval_F(problem, x) + xi))


def fb_residual(problem: ProblemInstance, eta: float, x: Vector, Fx: Optional[Vector] = None) -> float:
    """Forward-backward residual ``||x - J_{eta T}(x - eta F x)|| / eta``."""
    if not eta > 0:
        raise UsageError(f"eta must be positive, got {eta!r}")
    x = _check_vector(problem, x)
    if Fx is None:
        Fx = eval_F(problem, x)
    if not problem.has_T:
        return float(np.linalg.norm(Fx))
    res = eval_resolvent(problem, eta, x - eta * Fx)
    return float(np.linalg.norm(x - res.point)) / eta


def prepare_start(problem: ProblemInstance, x0: Vector, eta: float) -> ResolventResult:
    """Map a raw starting point into ``dom T``.

    Returns ``x0 := J_{eta T}(raw)`` together with ``xi0 = (raw - x0)/eta``,
    which is a valid element of ``T(x0)``.  With ``T = 0`` this is the raw
    point itself and ``xi0 = 0``.
    """
    x0 = _check_vector(problem, x0, "x0")
    if not problem.has_T:
        return ResolventResult(point=x0.copy(), xi=np.zeros_like(x0))
    return eval_resolvent(problem, eta, x0)
