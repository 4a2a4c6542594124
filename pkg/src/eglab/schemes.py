"""The five extragradient-type schemes as single-step transitions, plus a driver.

Every step takes ``(state, schedule, rule, problem)`` and returns a fresh
:class:`SolverState`; nothing is mutated in place, so a state can be kept as a
snapshot for Lyapunov monitoring.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .diagnostics import Trace, TraceRecord
from .directions import DirectionRule, History, build_direction, condition_terms, current_gradient
from .operators import (
    NumericalFailure,
    ProblemInstance,
    UsageError,
    Vector,
    eval_F,
    eval_resolvent,
    fb_residual,
    prepare_start,
)
from .schedules import (
    GAEG,
    GAEG_PLUS,
    GEAG,
    GFEG,
    GFEG_PLUS,
    GAEGPlusSchedule,
    GAEGSchedule,
    GEAGSchedule,
    GFEGPlusSchedule,
    GFEGSchedule,
    Schedule,
)


@dataclass(frozen=True)
class SolverState:
    """Iterate bundle at iteration ``k``.

    ``y_prev``/``Fy_prev`` hold ``y^{k-1}`` and its image.  ``y`` is the
    current extrapolation point of the Nesterov-type schemes and ``anchor`` is
    the moving anchor (GFEGplus) or the auxiliary point ``x_hat`` (GAEG).
    The ``*_prev`` iterate fields refer to index ``k - 1``.
    """

    k: int
    x0: Vector
    x: Vector
    xi: Vector
    Fx: Vector
    u: Vector
    y_prev: Vector
    Fy_prev: Vector
    x_prev: Vector
    Fx_prev: Vector
    xi_prev: Vector
    u_prev: Vector
    y: Optional[Vector] = None
    anchor: Optional[Vector] = None
    eta_hat_prev: Optional[float] = None
    tau_prev: Optional[float] = None
    d_prev: Optional[Vector] = None

    @property
    def w(self) -> Vector:
        return self.Fx + self.xi

    @property
    def z(self) -> Vector:
        return self.u + self.xi


def init_state(problem: ProblemInstance, scheme: str, schedule: Schedule, x0: Vector) -> SolverState:
    """Initial state from a raw start point.

    The raw point is mapped into ``dom T`` by one resolvent call with the
    scheme's step ``eta``; ``u^0 = F x^0`` and all "previous" slots equal their
    ``k = 0`` values.
    """
    start = prepare_start(problem, np.asarray(x0, dtype=float), schedule.eta)
    x, xi = start.point, start.xi
    Fx = eval_F(problem, x)
    y = x.copy() if scheme in (GAEG, GAEG_PLUS) else None
    anchor = x.copy() if scheme in (GFEG_PLUS, GAEG) else None
    d_prev = np.zeros_like(x) if scheme == GAEG_PLUS else None
    return SolverState(k=0, x0=x, x=x, xi=xi, Fx=Fx, u=Fx, y_prev=x, Fy_prev=Fx,
                       x_prev=x, Fx_prev=Fx, xi_prev=xi, u_prev=Fx,
                       y=y, anchor=anchor, d_prev=d_prev)


def _finite(vec: Vector, what: str, k: int) -> Vector:
    if not np.all(np.isfinite(vec)):
        raise NumericalFailure(f"non-finite {what} at iteration {k}", iteration=k)
    return vec


def _advance(state: SolverState, rule: DirectionRule, scheme: str, problem: ProblemInstance,
             eta: float, x1, xi1, y, Fy, **extra):
    Fx1 = eval_F(problem, x1)
    hist = History(x=x1, Fx=Fx1, xi=xi1, y_prev=y, Fy_prev=Fy, Fx_prev=state.Fx,
                   xi_prev=state.xi, u_prev=state.u, eta=eta,
                   eta_hat_prev=extra.get("eta_hat_prev"), tau_prev=extra.get("tau_prev"),
                   d_prev=extra.get("d_prev"))
    u1 = _finite(build_direction(rule, scheme, hist), "direction", state.k + 1)
    new = replace(state, k=state.k + 1, x=x1, xi=xi1, Fx=Fx1, u=u1, y_prev=y, Fy_prev=Fy,
                  x_prev=state.x, Fx_prev=state.Fx, xi_prev=state.xi, u_prev=state.u, **extra)
    return new, hist


def geag_step(state: SolverState, schedule: GEAGSchedule, rule: DirectionRule,
              problem: ProblemInstance, _hist: Optional[list] = None) -> SolverState:
    k, eta = state.k, schedule.eta
    tau, eh = schedule.tau(k), schedule.eta_hat(k)
    m = tau * state.x0 + (1 - tau) * state.x
    y = _finite(eval_resolvent(problem, eh, m - eh * state.u).point, "y", k)
    Fy = eval_F(problem, y)
    res = eval_resolvent(problem, eta, m - eta * Fy)
    new, hist = _advance(state, rule, GEAG, problem, eta, _finite(res.point, "x", k), res.xi, y, Fy,
                         eta_hat_prev=eh, tau_prev=tau)
    if _hist is not None:
        _hist.append(hist)
    return new


def _fbfs_core(state, schedule, rule, problem, scheme, anchor, _hist):
    k, eta = state.k, schedule.eta
    tau, eh, bk = schedule.tau(k), schedule.eta_hat(k), schedule.beta_k(k)
    z = state.u + state.xi
    y = _finite(state.x + tau * (anchor - state.x) - (eh - bk) * z, "y", k)
    Fy = eval_F(problem, y)
    res = eval_resolvent(problem, eta, y - eta * Fy + eh * z)
    extra = {"tau_prev": tau, "eta_hat_prev": eh}
    if scheme == GFEG_PLUS:
        extra["anchor"] = anchor - schedule.gamma * z
    new, hist = _advance(state, rule, scheme, problem, eta, _finite(res.point, "x", k), res.xi, y, Fy, **extra)
    if _hist is not None:
        _hist.append(hist)
    return new


def gfeg_step(state: SolverState, schedule: GFEGSchedule, rule: DirectionRule,
              problem: ProblemInstance, _hist: Optional[list] = None) -> SolverState:
    return _fbfs_core(state, schedule, rule, problem, GFEG, state.x0, _hist)


def gfeg_plus_step(state: SolverState, schedule: GFEGPlusSchedule, rule: DirectionRule,
                   problem: ProblemInstance, _hist: Optional[list] = None) -> SolverState:
    return _fbfs_core(state, schedule, rule, problem, GFEG_PLUS, state.anchor, _hist)


def gaeg_step(state: SolverState, schedule: GAEGSchedule, rule: DirectionRule,
              problem: ProblemInstance, _hist: Optional[list] = None) -> SolverState:
    k, eta = state.k, schedule.eta
    y = state.y
    z = state.u + state.xi
    Fy = eval_F(problem, y)
    res = eval_resolvent(problem, eta, y - eta * (Fy - schedule.gamma_k(k) * z))
    x1 = _finite(res.point, "x", k)
    new, hist = _advance(state, rule, GAEG, problem, eta, x1, res.xi, y, Fy)
    x_hat1 = x1 - schedule.lam * (new.u + new.xi)
    y1 = x_hat1 + schedule.theta_k(k) * (x_hat1 - state.anchor) + schedule.nu_k(k) * (y - x_hat1)
    if _hist is not None:
        _hist.append(hist)
    return replace(new, anchor=x_hat1, y=_finite(y1, "y", k + 1))


def gaeg_plus_step(state: SolverState, schedule: GAEGPlusSchedule, rule: DirectionRule,
                   problem: ProblemInstance, _hist: Optional[list] = None) -> SolverState:
    k, eta = state.k, schedule.eta
    y = state.y
    z = state.u + state.xi
    gk = schedule.gamma_k(k)
    Fy = eval_F(problem, y)
    res = eval_resolvent(problem, eta, y - eta * Fy + eta * gk * z)
    x1, xi1 = _finite(res.point, "x", k), res.xi
    d = Fy + xi1 - gk * z
    new, hist = _advance(state, rule, GAEG_PLUS, problem, eta, x1, xi1, y, Fy, d_prev=d)
    z1 = new.u + xi1
    y1 = (x1 + schedule.theta_k(k) * (x1 - state.x) - schedule.eta_k(k) * z1
          + schedule.lambda_k(k) * (Fy + xi1) - schedule.nu_k(k) * z)
    if _hist is not None:
        _hist.append(hist)
    return replace(new, y=_finite(y1, "y", k + 1))


STEPS = {
    GEAG: geag_step,
    GFEG: gfeg_step,
    GFEG_PLUS: gfeg_plus_step,
    GAEG: gaeg_step,
    GAEG_PLUS: gaeg_plus_step,
}

SCHEDULE_TYPES = {
    GEAG: GEAGSchedule,
    GFEG: GFEGSchedule,
    GFEG_PLUS: GFEGPlusSchedule,
    GAEG: GAEGSchedule,
    GAEG_PLUS: GAEGPlusSchedule,
}


def step(state: SolverState, scheme: str, schedule: Schedule, rule: DirectionRule,
         problem: ProblemInstance) -> SolverState:
    return STEPS[scheme](state, schedule, rule, problem)


# ---------------------------------------------------------------------------
# driver


Monitor = Callable[[SolverState], Optional[float]]


def run(problem: ProblemInstance, scheme: str, schedule: Schedule, rule: Optional[DirectionRule] = None,
        max_iter: int = 1000, stop_tol: float = 0.0, x0: Optional[Vector] = None,
        monitor: Optional[Monitor] = None, keep_states: bool = False,
        check_conditions: bool = False, report_eta: Optional[float] = None) -> Trace:
    """Iterate ``scheme`` and record one :class:`TraceRecord` per iterate.

    Stopping on ``fb_residual <= stop_tol`` is active only for a finite
    positive ``stop_tol``; ``0`` and ``inf`` both run the full budget.  With
    ``check_conditions`` the direction error condition is evaluated after
    every step and stored on the record as ``(lhs, rhs)``.

    A non-finite value raises :class:`NumericalFailure` whose ``iteration``
    names the failing step and whose ``trace`` holds the records so far.
    """
    if scheme not in STEPS:
        raise UsageError(f"unknown scheme {scheme!r}")
    if not isinstance(schedule, SCHEDULE_TYPES[scheme]):
        raise UsageError(f"schedule {type(schedule).__name__} does not belong to {scheme}")
    if max_iter < 0:
        raise UsageError("max_iter must be nonnegative")
    rule = rule or current_gradient()
    if rule.kind == "affine" and rule.scheme != scheme:
        raise UsageError(f"rule built for {rule.scheme} used with {scheme}")
    eta_rep = schedule.eta if report_eta is None else report_eta
    stepper = STEPS[scheme]
    x0 = np.full(problem.dim, 0.0) if x0 is None else x0
    stopping = 0.0 < stop_tol < math.inf

    header = {"scheme": scheme, "regime": schedule.regime, "rule": rule.describe(),
              "report_eta": eta_rep, "problem": problem.label}
    header.update({f"const.{k}": v for k, v in schedule.constants().items() if k not in ("scheme", "regime")})
    for key in ("seed", "prng"):
        if key in problem.meta:
            header[key] = problem.meta[key]
    trace = Trace(header=header)
    start_ns = time.perf_counter_ns()

    def record(state: SolverState, cond=None) -> float:
        fb = fb_residual(problem, eta_rep, state.x, state.Fx)
        res = float(np.linalg.norm(state.w))
        dist = None if problem.x_star is None else float(np.linalg.norm(state.x - problem.x_star))
        lyap = monitor(state) if monitor is not None else None
        trace.records.append(TraceRecord(k=state.k, residual=res, fb_residual=fb, dist_to_star=dist,
                                         lyapunov=lyap, wall_nanos=time.perf_counter_ns() - start_ns,
                                         condition=cond))
        if keep_states:
            trace.states.append(state)
        return fb

    try:
        # overflow on a diverging run surfaces as NumericalFailure, not as a warning
        with np.errstate(over="ignore", invalid="ignore"):
            state = init_state(problem, scheme, schedule, x0)
            trace.x0 = state.x0
            fb = record(state)
            hist_buf: Optional[list] = [] if check_conditions else None
            while state.k < max_iter and not (stopping and fb <= stop_tol):
                state = stepper(state, schedule, rule, problem, hist_buf)
                cond = None
                if check_conditions:
                    cond = condition_terms(rule, scheme, hist_buf.pop(), state.u)
                fb = record(state, cond)
    except NumericalFailure as exc:
        if exc.iteration is None:
            exc.iteration = (trace.records[-1].k + 1) if trace.records else 0
        exc.trace = trace
        trace.failure = (exc.iteration, str(exc))
        raise
    trace.final_state = state
    return trace
