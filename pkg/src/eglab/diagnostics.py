"""Potential-function monitors, closed-form bound checks and empirical rate fits.

Monitors take a solver state and return the scheme's potential value; they
are only meaningful for the current-gradient rule, where the direction error
terms of the potentials vanish.  They read iterate attributes by name, so any
object with the fields of ``eglab.schemes.SolverState`` works.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .operators import UsageError, Vector
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

BOUND_SLACK = 1e-7
DESCENT_SLACK = 1e-8


@dataclass(frozen=True)
class TraceRecord:
    k: int
    residual: float
    fb_residual: float
    dist_to_star: Optional[float] = None
    lyapunov: Optional[float] = None
    wall_nanos: int = 0
    condition: Optional[tuple[float, float]] = None


@dataclass
class Trace:
    header: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    states: list = field(default_factory=list)
    x0: Optional[Vector] = None
    final_state: object = None
    failure: Optional[tuple[int, str]] = None

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


def _sq(v: Vector) -> float:
    return float(np.dot(v, v))


# ---------------------------------------------------------------------------
# potentials


def lyapunov_geag(state, schedule: GEAGSchedule, x_star: Vector) -> float:
    a, b = schedule.lyapunov_coefficients(state.k)
    w = state.w
    return 0.5 * a * _sq(w) + b * float(w @ (state.x - state.x0)) + _sq(state.x0 - x_star) / schedule.eta


def lyapunov_gfeg(state, schedule: GFEGSchedule, x_star: Optional[Vector] = None) -> float:
    a, b = schedule.lyapunov_coefficients(state.k)
    w = state.w
    return 0.5 * a * _sq(w) + b * float(w @ (state.x - state.x0))


def lyapunov_gfeg_plus(state, schedule: GFEGPlusSchedule, x_star: Vector) -> float:
    w = state.w
    tp = schedule.t(state.k) - schedule.mu
    return (0.5 * schedule.a_coefficient(state.k) * _sq(w) + tp * float(w @ (state.x - state.anchor))
            + (1 - schedule.mu) / (2 * schedule.gamma) * _sq(state.anchor - x_star))


def lyapunov_gaeg(state, schedule: GAEGSchedule, x_star: Vector) -> float:
    a, b = schedule.lyapunov_coefficients(state.k)
    w, xh, y = state.w, state.anchor, state.y
    t = schedule.t(state.k)
    return 0.5 * a * _sq(w) + b * float(w @ (xh - y)) + _sq(xh - x_star + t * (y - xh))


def _gaeg_plus_core(state, s: GAEGPlusSchedule, x_star: Vector, g: Vector) -> float:
    k, r, mu = state.k, s.r, s.mu
    t = s.t(k)
    x, y = state.x, state.y
    return (_sq(r * (x - x_star) + t * (y - x)) + r * mu * _sq(x - x_star)
            + 2 * s.c_k(k) * float(g @ (y - x)) + s.Lambda_k(k) * _sq(g)
            + 2 * r * ((s.eta - s.beta) * t - s.eta * (r - 1)) * float(g @ (x - x_star)))


def lyapunov_gaeg_plus_v1(state, schedule: GAEGPlusSchedule, x_star: Vector) -> float:
    return _gaeg_plus_core(state, schedule, x_star, state.w)


def lyapunov_gaeg_plus_v2(state, schedule: GAEGPlusSchedule, x_star: Vector) -> float:
    z, w = state.z, state.w
    k = state.k
    return (_gaeg_plus_core(state, schedule, x_star, z) + 2 * schedule.a_k(k) * float((z - w) @ (state.y - state.x))
            + schedule.alpha_k(k) * _sq(z - w))


class MonitorSpec(NamedTuple):
    fn: Optional[Callable]
    reason: str
    kind: str  # "descent", "quasi-descent" or "bounded"


def monitor_for(scheme: str, schedule: Schedule, x_star: Optional[Vector], rule_kind: str = "current-gradient"):
    """Pick the potential for ``(scheme, regime)``.

    Returns a :class:`MonitorSpec`; ``fn`` is None when the monitor does not
    apply, and ``reason`` then says why.
    """
    if rule_kind != "current-gradient":
        return MonitorSpec(None, "potentials are only monitored for the current-gradient rule", "")
    needs_star = scheme != GFEG
    if needs_star and x_star is None:
        return MonitorSpec(None, "no reference solution available", "")
    xs = None if x_star is None else np.asarray(x_star, dtype=float)
    if scheme == GEAG:
        return MonitorSpec(lambda st: lyapunov_geag(st, schedule, xs), "", "descent")
    if scheme == GFEG:
        if schedule.regime != "exact":
            return MonitorSpec(None, "GFEG potential needs the exact-direction regime", "")
        return MonitorSpec(lambda st: lyapunov_gfeg(st, schedule), "", "descent")
    if scheme == GFEG_PLUS:
        kind = "descent" if schedule.regime == "exact" else "quasi-descent"
        return MonitorSpec(lambda st: lyapunov_gfeg_plus(st, schedule, xs), "", kind)
    if scheme == GAEG:
        if schedule.regime != "exact":
            return MonitorSpec(None, "GAEG potential needs the exact-direction regime", "")
        return MonitorSpec(lambda st: lyapunov_gaeg(st, schedule, xs), "", "descent")
    if scheme == GAEG_PLUS:
        if schedule.regime == "aeg":
            return MonitorSpec(lambda st: lyapunov_gaeg_plus_v1(st, schedule, xs), "", "descent")
        return MonitorSpec(lambda st: lyapunov_gaeg_plus_v2(st, schedule, xs), "", "bounded")
    raise UsageError(f"unknown scheme {scheme!r}")


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class BoundReport:
    scheme: str
    regime: str
    max_ratio: float
    worst_k: int
    n_points: int
    passed: bool

    def text(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} bound {self.scheme}/{self.regime}: max residual^2/bound = "
                f"{self.max_ratio:.6g} at k={self.worst_k} over {self.n_points} points")

    def csv_row(self) -> list:
        return [self.scheme, self.regime, repr(self.max_ratio), self.worst_k, self.n_points, int(self.passed)]


def verify_bound(trace: Trace, scheme: str, schedule: Schedule, x_star: Vector,
                 slack: float = BOUND_SLACK) -> BoundReport:
    """Compare ``||F x^k + xi^k||^2`` against the regime's closed-form bound at every record."""
    if schedule.scheme != scheme or trace.header.get("scheme", scheme) != scheme:
        raise UsageError(f"trace/schedule mismatch: {trace.header.get('scheme')} vs {schedule.scheme} vs {scheme}")
    if trace.header.get("regime", schedule.regime) != schedule.regime:
        raise UsageError("trace was produced under a different regime")
    if trace.x0 is None or not trace.records:
        raise UsageError("trace has no starting point")
    dist0_sq = _sq(trace.x0 - np.asarray(x_star, dtype=float))
    w0_sq = trace.records[0].residual ** 2
    worst, worst_k = 0.0, 0
    for rec in trace.records:
        bound = schedule.bound_sq(rec.k, dist0_sq, w0_sq)
        res_sq = rec.residual**2
        ratio = 0.0 if res_sq == 0 else (res_sq / bound if bound > 0 else math.inf)
        if ratio > worst:
            worst, worst_k = ratio, rec.k
    return BoundReport(scheme, schedule.regime, worst, worst_k, len(trace.records), worst <= 1 + slack)


@dataclass(frozen=True)
class DescentReport:
    kind: str
    max_excess: float
    worst_k: int
    passed: bool


def check_descent(values: Sequence[float], factors: Optional[Sequence[float]] = None,
                  slack: float = DESCENT_SLACK) -> DescentReport:
    """Check ``V_{k+1} <= f_k V_k + slack (1 + |V_k|)``; ``factors`` default to 1.

    ``max_excess`` is the largest violation normalised by ``1 + |V_k|``.
    """
    v = np.asarray(values, dtype=float)
    kind = "descent" if factors is None else "quasi-descent"
    f = np.ones(max(len(v) - 1, 0)) if factors is None else np.asarray(factors, dtype=float)[: len(v) - 1]
    if len(v) < 2:
        return DescentReport(kind, -math.inf, 0, True)
    excess = (v[1:] - f * v[:-1]) / (1 + np.abs(v[:-1]))
    i = int(np.argmax(excess))
    return DescentReport(kind, float(excess[i]), i, bool(excess[i] <= slack))


def check_bounded(values: Sequence[float], omega: float, slack: float = DESCENT_SLACK) -> DescentReport:
    """Check ``V_k <= omega V_0 + slack (1 + |V_0|)`` for every ``k``."""
    v = np.asarray(values, dtype=float)
    excess = (v - omega * v[0]) / (1 + abs(v[0]))
    i = int(np.argmax(excess))
    return DescentReport("bounded", float(excess[i]), i, bool(excess[i] <= slack))


# ---------------------------------------------------------------------------
# rate fits


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    k_window: tuple[int, int]
    r_squared: float
    truncated: bool = False
    n_points: int = 0


def fit_rate(trace, k_window: tuple[int, int]) -> RateFit:
    """Least-squares fit of ``log10 residual`` against ``log10 k`` inside ``k_window``.

    ``trace`` is a :class:`Trace` or a pair ``(ks, residuals)``.  If a zero
    residual occurs in the window, only the points before it are used and the
    fit is flagged ``truncated``.
    """
    if isinstance(trace, Trace):
        ks, res = trace.column("k"), trace.column("residual")
    else:
        ks, res = (np.asarray(a, dtype=float) for a in trace)
    lo, hi = k_window
    if not (0 < lo < hi):
        raise UsageError("k_window must satisfy 0 < k_min < k_max")
    mask = (ks >= lo) & (ks <= hi)
    ks, res = ks[mask], res[mask]
    truncated = False
    zeros = np.flatnonzero(res <= 0)
    if zeros.size:
        ks, res = ks[: zeros[0]], res[: zeros[0]]
        truncated = True
    if ks.size < 2:
        raise UsageError(f"fewer than two usable points in window {k_window}")
    lx, ly = np.log10(ks), np.log10(res)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return RateFit(float(slope), float(intercept), (int(ks[0]), int(ks[-1])), r2, truncated, int(ks.size))
