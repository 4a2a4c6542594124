"""Search-direction rules ``u^k`` and their error conditions.

Every scheme accepts a direction ``u^k`` that approximates ``F x^k`` up to an
error controlled by two constants ``(kappa, kappa_hat)``:

    ||F x^k - u^k||^2 <= kappa ||F x^k - F y^{k-1}||^2 + kappa_hat * E_k

where the second error term ``E_k`` depends on the scheme.  The affine rules
below are combinations for which the constants follow from Young's inequality
with parameter ``m > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .operators import UsageError, Vector
from .schedules import GAEG, GAEG_PLUS, GEAG, GFEG, GFEG_PLUS, SCHEMES

CURRENT = "current-gradient"
PAST = "past-gradient"
AFFINE = "affine"
RULE_KINDS = (CURRENT, PAST, AFFINE)


class History(NamedTuple):
    """Quantities available when building ``u^n`` (``n = k + 1``).

    Fields suffixed ``_prev`` refer to index ``k``; ``Fy_prev`` and
    ``y_prev`` are the extrapolation point used during step ``k``.
    """

    x: Vector
    Fx: Vector
    xi: Vector
    y_prev: Vector
    Fy_prev: Vector
    Fx_prev: Vector
    xi_prev: Vector
    u_prev: Vector
    eta: float
    eta_hat_prev: Optional[float] = None
    tau_prev: Optional[float] = None
    d_prev: Optional[Vector] = None


@dataclass(frozen=True)
class DirectionRule:
    """A direction strategy.

    ``scheme`` is only needed by affine rules, whose formula and certified
    constants differ between schemes.
    """

    kind: str = CURRENT
    alpha: float = 0.0
    alpha_hat: float = 0.0
    m: float = 1.0
    scheme: Optional[str] = None

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise UsageError(f"unknown direction kind {self.kind!r}; choose from {RULE_KINDS}")
        if self.kind == AFFINE:
            if self.scheme not in SCHEMES:
                raise UsageError("affine rules must name their scheme")
            if not self.m > 0:
                raise UsageError("Young parameter m must be positive")

    @property
    def constants(self) -> tuple[float, float]:
        if self.kind == CURRENT:
            return 0.0, 0.0
        if self.kind == PAST:
            return 1.0, 0.0
        a, ah, m = self.alpha, self.alpha_hat, self.m
        p, q = 1.0 + m, 1.0 + 1.0 / m
        if self.scheme == GEAG:
            return p * a**2, q * ah**2
        if self.scheme in (GFEG, GAEG):
            return p * ah**2, q * (1 - a - ah) ** 2
        if self.scheme == GFEG_PLUS:
            return p * (1 - a) ** 2, q * ah**2
        return p * a**2, q * ah**2

    @property
    def kappa(self) -> float:
        return self.constants[0]

    @property
    def kappa_hat(self) -> float:
        return self.constants[1]

    def describe(self) -> str:
        if self.kind != AFFINE:
            return self.kind
        return f"affine(alpha={self.alpha:g},alpha_hat={self.alpha_hat:g},m={self.m:g})"


def current_gradient() -> DirectionRule:
    return DirectionRule(CURRENT)


def past_gradient() -> DirectionRule:
    return DirectionRule(PAST)


def affine(scheme: str, alpha: float, alpha_hat: float, m: float = 1.0) -> DirectionRule:
    return DirectionRule(AFFINE, alpha, alpha_hat, m, scheme)


def _check_scheme(rule: DirectionRule, scheme: str) -> None:
    if rule.kind == AFFINE and rule.scheme != scheme:
        raise UsageError(f"rule built for {rule.scheme} used with {scheme}")


def build_direction(rule: DirectionRule, scheme: str, h: History) -> Vector:
    """Return ``u^{k+1}`` from the history of step ``k``."""
    _check_scheme(rule, scheme)
    if rule.kind == CURRENT:
        return h.Fx
    if rule.kind == PAST:
        return h.Fy_prev
    a, ah = rule.alpha, rule.alpha_hat
    if scheme == GEAG:
        corr = h.x - h.y_prev + h.eta_hat_prev * (h.Fx_prev - h.u_prev)
        return (1 - a) * h.Fx + a * h.Fy_prev + ah * corr
    if scheme == GFEG:
        return a * h.Fx + ah * h.Fy_prev + (1 - a - ah) * (h.Fx_prev + h.xi_prev - h.xi)
    if scheme == GFEG_PLUS:
        s = 1 - h.tau_prev
        return (a * h.Fx + (1 - a + h.eta * ah) * h.Fy_prev - h.eta * ah * s * h.Fx_prev
                + h.eta * ah * (h.xi - s * h.xi_prev))
    if scheme == GAEG:
        v = h.Fx_prev + h.xi_prev - h.xi
        return a * h.Fx + ah * h.Fy_prev + (1 - a - ah) * v
    return ah * h.d_prev + (1 - a) * h.Fx + a * h.Fy_prev


def condition_terms(rule: DirectionRule, scheme: str, h: History, u: Vector,
                    kappa: Optional[float] = None, kappa_hat: Optional[float] = None) -> tuple[float, float]:
    """Both sides of the scheme's error condition for ``u = u^{k+1}``.

    The constants default to the rule's certified values; passing others
    lets callers test alternative constants on the same history.
    """
    k0, k1 = rule.constants
    kappa = k0 if kappa is None else kappa
    kappa_hat = k1 if kappa_hat is None else kappa_hat
    lhs = float(np.sum((h.Fx - u) ** 2))
    first = float(np.sum((h.Fx - h.Fy_prev) ** 2))
    if scheme == GEAG:
        e = h.x - h.y_prev + h.eta_hat_prev * (h.Fx_prev - h.u_prev)
    elif scheme in (GFEG, GAEG):
        e = (h.Fx + h.xi) - (h.Fx_prev + h.xi_prev)
    elif scheme == GFEG_PLUS:
        e = h.eta * ((h.Fy_prev + h.xi) - (1 - h.tau_prev) * (h.Fx_prev + h.xi_prev))
    else:
        e = h.d_prev
    return lhs, kappa * first + kappa_hat * float(np.sum(e**2))
