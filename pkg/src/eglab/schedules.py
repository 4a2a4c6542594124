"""Parameter schedules for the five schemes.

A schedule freezes the scalar constants of one scheme/regime at construction
and exposes the per-iteration coefficients as pure functions of ``k``.  With
``validate=True`` (the default) every precondition of the regime is checked
and a :class:`ConfigError` naming the violated inequality is raised.

Each schedule also carries its closed-form last-iterate bound through
``bound_sq(k, dist0_sq, w0_sq)``, the admissible value of ``||F x^k + xi^k||^2``
given ``||x^0 - x*||^2`` and ``||F x^0 + xi^0||^2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import ClassVar, Optional

from .operators import ConfigError, UsageError

GEAG = "GEAG"
GFEG = "GFEG"
GFEG_PLUS = "GFEGplus"
GAEG = "GAEG"
GAEG_PLUS = "GAEGplus"
SCHEMES = (GEAG, GFEG, GFEG_PLUS, GAEG, GAEG_PLUS)

SIGMA_GAEG = 5.0 / 24.0


def _require(ok: bool, message: str) -> None:
    if not ok:
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# closed-form step-size caps


def eta_bar_geag(kappa: float, kappa_hat: float, r: float, L: float) -> float:
    """Largest admissible GEAG step for a given trade-off parameter ``r``.

    When both constants vanish the ``r -> 0+`` limit ``1/L`` is returned.
    """
    if L <= 0:
        raise UsageError("L must be positive")
    if kappa < 0 or kappa_hat < 0:
        raise UsageError("kappa and kappa_hat must be nonnegative")
    if kappa == 0 and kappa_hat == 0:
        return 1.0 / L
    if not 0 < r <= 1:
        raise UsageError("r must lie in (0, 1]")
    return math.sqrt(r) / math.sqrt((1 + r) * (r + 2 * kappa) * L**2 + 2 * kappa * kappa_hat)


def geag_best_r(kappa: float, kappa_hat: float, L: float) -> float:
    """Maximiser of ``eta_bar_geag`` over ``r`` in (0, 1].

    For ``kappa > 0`` the derivative vanishes at ``r^2 = 2 kappa + 2 kappa kappa_hat / L^2``.
    With ``kappa = 0`` the formula degenerates and ``r = 1`` is used.
    """
    if kappa == 0:
        return 1.0
    return min(1.0, math.sqrt(2 * kappa + 2 * kappa * kappa_hat / L**2))


def lambda_bar_gaeg(kappa: float, rho: float, L: float) -> float:
    """Largest admissible ``lambda`` for the general accelerated regime."""
    s = SIGMA_GAEG
    _require(4 * (1 + s) * math.sqrt(2 * (5 * kappa + 1)) * L * rho < 1,
             "L·ρ too large for GAEG general regime: need 4(1+σ)·sqrt(2(5κ+1))·L·ρ < 1")
    b = (1 + s) * (49 * kappa + 8) * rho / (29 * kappa + 4)
    c = (1 - 32 * (1 + s) ** 2 * (5 * kappa + 1) * L**2 * rho**2) / (8 * L**2 * (29 * kappa + 4))
    return 2 * c / (b + math.sqrt(b * b + 4 * c))


def lambda_bar_gaeg_past(rho: float, L: float) -> float:
    """Largest admissible ``lambda`` when ``u^k = F y^{k-1}``."""
    _require(8 * math.sqrt(3) * L * rho < 1, "L·ρ too large for past-gradient GAEG: need 8·sqrt(3)·L·ρ < 1")
    b = 272 * rho / 123
    c = (1 - 129 * L**2 * rho**2) / (164 * L**2)
    return 2 * c / (b + math.sqrt(b * b + 4 * c))


def psi_gaeg_plus(kappa: float, kappa_hat: float, r: float, eps_hat: float = 0.0) -> float:
    """Step-size scale of the general GAEG+ regime (``eta <= Psi/L``)."""
    cap = (3 * r - 1) / (3 * r * (12 + 3 * r + eps_hat))
    _require(0 <= kappa_hat < cap, f"κ̂ must satisfy 0 <= κ̂ < (3r-1)/(3r(12+3r+ε̂)) = {cap:.6g}")
    return (1 - 1 / (3 * r) - kappa_hat * (12 + 3 * r + eps_hat)) / math.sqrt(
        4 + 12 * kappa + 3 * kappa * r + kappa * eps_hat
    )


# ---------------------------------------------------------------------------
# schedule base


@dataclass(frozen=True)
class Schedule:
    scheme: ClassVar[str] = ""
    regime: str
    eta: float
    L: float
    rho: float
    kappa: float
    kappa_hat: float

    def constants(self) -> dict:
        out = {"scheme": self.scheme}
        out.update(asdict(self))
        return out

    def bound_sq(self, k: int, dist0_sq: float, w0_sq: float) -> float:  # pragma: no cover
        raise NotImplementedError


# ---------------------------------------------------------------------------
# GEAG


@dataclass(frozen=True)
class GEAGSchedule(Schedule):
    scheme: ClassVar[str] = GEAG
    nu: float = 2.0

    def tau(self, k: int) -> float:
        return 1.0 / (k + self.nu)

    def eta_hat(self, k: int) -> float:
        return self.eta * (1.0 - self.tau(k))

    def bound_sq(self, k, dist0_sq, w0_sq):
        return (4 * dist0_sq + self.eta**2 * w0_sq) / (self.eta**2 * (k + self.nu - 1) ** 2)

    def lyapunov_coefficients(self, k: int) -> tuple[float, float]:
        """``(a_k, b_k)`` with ``b_0 = 1``."""
        b = (k + self.nu - 1) / (self.nu - 1)
        a = self.eta * (k + self.nu - 1) ** 2 / (self.nu - 1)
        return a, b


def geag_schedule(L, rho=0.0, kappa=0.0, kappa_hat=0.0, eta=None, nu=2.0, validate=True):
    cap = eta_bar_geag(kappa, kappa_hat, geag_best_r(kappa, kappa_hat, L), L)
    if eta is None:
        eta = cap
    if validate:
        _require(nu > 1, "ν > 1 required")
        _require(rho == 0, "GEAG requires a monotone problem (ρ = 0)")
        _require(0 < eta <= cap * (1 + 1e-12), f"η > η̄ = {cap:.6g}")
    return GEAGSchedule(regime="default", eta=eta, L=L, rho=rho, kappa=kappa,
                        kappa_hat=kappa_hat, nu=nu)


# ---------------------------------------------------------------------------
# GFEG


GFEG_REGIMES = ("exact", "kappa-hat", "kappa", "mixed")


def gfeg_regime_for(kappa: float, kappa_hat: float) -> str:
    if kappa == 0:
        return "exact" if kappa_hat == 0 else "kappa-hat"
    return "kappa" if kappa_hat == 0 else "mixed"


@dataclass(frozen=True)
class GFEGSchedule(Schedule):
    scheme: ClassVar[str] = GFEG
    beta: float = 0.0
    nu: float = 3.0

    def tau(self, k):
        return 1.0 / (k + self.nu)

    def eta_hat(self, k):
        return self.eta * (1.0 - self.tau(k))

    def beta_k(self, k):
        return self.beta * (1.0 - self.tau(k))

    @property
    def psi(self) -> float:
        if self.regime == "exact":
            return 0.0
        return 8 * (self.L**2 * self.eta**3 + self.beta) / (2 * self.eta - 3 * self.beta)

    def r0_sq(self, dist0_sq, w0_sq):
        eta, beta, nu = self.eta, self.beta, self.nu
        if self.regime == "exact":
            return (4 * (nu - 1) / (eta - beta) ** 2 * dist0_sq
                    + 4 * (nu - 1) * (eta * (nu - 1) - beta * (nu - 2)) / (eta - beta) * w0_sq)
        return (8 * (nu - 1) / (2 * eta - 3 * beta) ** 2 * dist0_sq
                + 4 * (2 * eta * (nu - 1) ** 2 - beta * (nu - 2) * (2 * nu - 1)) / (2 * eta - 3 * beta) * w0_sq)

    def bound_sq(self, k, dist0_sq, w0_sq):
        return self.r0_sq(dist0_sq, w0_sq) / (k + self.nu - 1) ** 2

    def lyapunov_coefficients(self, k: int) -> tuple[float, float]:
        """``(a_k, b_k)`` for the exact-direction regime, ``b_0 = 1``."""
        nu, eta, beta = self.nu, self.eta, self.beta
        b = (k + nu - 1) / (nu - 1)
        if k == 0:
            a = (eta * (nu - 1) ** 2 - beta * (nu - 2) * (nu - 1)) / (nu - 1)
        else:
            a = (k + nu - 1) ** 2 / (nu - 1) * (eta - beta * (k + nu - 2) / (k + nu - 1))
        return a, b


def _gfeg_window(L, rho, kappa, kappa_hat, nu, eta):
    """Return ``(regime, eta_cap, beta_lo, beta_hi, beta_hi_open)``; checks ρ conditions."""
    regime = gfeg_regime_for(kappa, kappa_hat)
    if regime == "exact":
        _require(2 * L * rho <= 1, "2·L·ρ <= 1 required")
        cap = 1.0 / L
        eta = cap if eta is None else eta
        return regime, cap, eta, 2 * rho, eta, True
    _require(nu > 2, "ν > 2 required")
    if regime == "kappa-hat":
        _require(kappa_hat < (nu - 2) / (4 * nu), "κ̂ < (ν-2)/(4ν) required")
        gap = nu - 2 - 4 * nu * kappa_hat
        s1 = math.sqrt(min(0.5, gap / (12 * (nu - 1) * kappa_hat)))
        _require(L * rho < gap * s1 / (12 * (nu - 2)), "L·ρ < (ν-2-4νκ̂)σ₁/(12(ν-2)) required")
        cap = s1 / L
        eta = cap if eta is None else eta
        lo = 2 * (nu - 2) / gap * (2 * (nu - 1) * kappa_hat * eta * s1**2 / (nu - 2) + 2 * rho)
        return regime, cap, eta, lo, 2 * eta / 3, True
    if regime == "kappa":
        _require(L * rho <= (nu - 1) / (32 * nu * math.sqrt(kappa + 1)),
                 "L·ρ <= (ν-1)/(32ν·sqrt(κ+1)) required")
        cap = 1.0 / (2 * L * math.sqrt(kappa + 1))
        eta = cap if eta is None else eta
        return regime, cap, eta, 4 * rho, (nu - 1) * eta / (4 * nu), False
    _require(kappa_hat < (nu - 2) / (4 * nu), "κ̂ < (ν-2)/(4ν) required")
    gap = nu - 2 - 4 * nu * kappa_hat
    s2 = math.sqrt(min(0.5, gap / (32 * nu * kappa_hat)) / (kappa + 1))
    _require(L * rho <= (nu - 1) * gap * s2 / (32 * nu * (nu - 2)),
             "L·ρ <= (ν-1)(ν-2-4νκ̂)σ₂/(32ν(ν-2)) required")
    cap = min(1.0 / (2 * L * math.sqrt(kappa + 1)), s2 / L)
    eta = cap if eta is None else eta
    lo = 2 * (nu - 2) / gap * (2 * (nu - 1) * (kappa + 1) * kappa_hat * eta * s2**2 / (nu - 2) + 2 * rho)
    return regime, cap, eta, lo, (nu - 1) * eta / (4 * nu), False


def gfeg_schedule(L, rho=0.0, kappa=0.0, kappa_hat=0.0, eta=None, beta=None, nu=3.0, validate=True):
    if validate:
        regime, cap, eta, lo, hi, hi_open = _gfeg_window(L, rho, kappa, kappa_hat, nu, eta)
        _require(0 < eta <= cap * (1 + 1e-12), f"η > η̄ = {cap:.6g}")
        if beta is None:
            beta = 0.5 * (lo + hi)
        _require(beta >= lo, f"β < lower window end {lo:.6g}")
        _require(beta < hi if hi_open else beta <= hi, f"β beyond upper window end {hi:.6g}")
    else:
        regime = gfeg_regime_for(kappa, kappa_hat)
        eta = 1.0 / L if eta is None else eta
        beta = 0.0 if beta is None else beta
    return GFEGSchedule(regime=regime, eta=eta, L=L, rho=rho, kappa=kappa,
                        kappa_hat=kappa_hat, beta=beta, nu=nu)


# ---------------------------------------------------------------------------
# GFEG+


GFEG_PLUS_REGIMES = ("general", "exact")
DEFAULT_MU_GFEG_PLUS = 0.45


@dataclass(frozen=True)
class GFEGPlusSchedule(Schedule):
    scheme: ClassVar[str] = GFEG_PLUS
    gamma: float = 0.0
    mu: float = DEFAULT_MU_GFEG_PLUS
    r: float = 6.0

    @property
    def rho_factor(self) -> float:
        return 4.0 if self.regime == "general" else 2.0

    def t(self, k):
        return self.mu * (k + self.r)

    def tau(self, k):
        return 1.0 / self.t(k)

    def eta_hat(self, k):
        return self.eta * (1.0 - self.tau(k))

    def beta_k(self, k):
        tau = self.tau(k)
        return -self.gamma * tau + self.rho_factor * self.rho * (1.0 - tau)

    @property
    def theta(self) -> float:
        mu = self.mu
        return (1 - 2 * mu) * (1 - mu) ** 2 / (2 * (2 - mu) * mu**2)

    def r0_sq(self, dist0_sq, w0_sq):
        eta, mu, r, rho, g = self.eta, self.mu, self.r, self.rho, self.gamma
        if self.regime == "general":
            return eta * mu**2 * (r - 1) ** 2 / 2 * w0_sq + 3 * (1 - mu) / ((1 - 2 * mu) * eta) * dist0_sq
        return (mu * (r - 1) * (mu * (r - 1) * (eta - 2 * rho) + 2 * rho) / 2 * w0_sq
                + (1 - mu) / (2 * g) * dist0_sq)

    def bound_sq(self, k, dist0_sq, w0_sq):
        eta, mu, r, rho, g = self.eta, self.mu, self.r, self.rho, self.gamma
        R = self.r0_sq(dist0_sq, w0_sq)
        if self.regime == "general":
            return 6 * math.exp(self.theta / r) * R / (eta * mu**2 * (k + r - 1) ** 2)
        return 2 * (1 - mu) * R / (((1 - mu) * (eta - 2 * rho) - g) * mu**2 * (k + r - 1) ** 2)

    def a_coefficient(self, k: int) -> float:
        """Weight of ``||w^k||^2`` (times two) in the potential, using ``t_{k-1}``."""
        tp = self.t(k) - self.mu
        if self.regime == "general":
            return self.eta * tp**2 - 4 * self.rho * tp * (tp - 1)
        return tp * (self.eta * tp - 2 * self.rho * (tp - 1))

    def descent_factor(self, k: int) -> float:
        """Allowed growth ``L_{k+1} <= factor * L_k`` (1 for the exact regime)."""
        if self.regime == "exact":
            return 1.0
        mu = self.mu
        return 1.0 + (1 - 2 * mu) * (1 - mu) ** 2 / (2 * (2 - mu) * self.t(k) ** 2)


def gfeg_plus_schedule(L, rho=0.0, kappa=0.0, kappa_hat=0.0, regime=None, eta=None, gamma=None,
                       mu=DEFAULT_MU_GFEG_PLUS, r=None, validate=True):
    if regime is None:
        regime = "exact" if kappa == 0 and kappa_hat == 0 else "general"
    if regime not in GFEG_PLUS_REGIMES:
        raise UsageError(f"unknown GFEGplus regime {regime!r}")
    if r is None:
        r = float(math.ceil(1 + 2 / mu))
    if regime == "general":
        cap = 1.0 / math.sqrt(2 * (1 + 4 * kappa) * L**2 + 4 * kappa_hat)
        eta = cap if eta is None else eta
        if gamma is None:
            gamma = (1 - 2 * mu) * eta / 6
        if validate:
            _require(0 < mu < 0.5, "μ ∈ (0, 1/2) required")
            _require(r >= 1 + 2 / mu - 1e-12, "r >= 1 + 2/μ required")
            _require(128 * ((1 + 4 * kappa) * L**2 + 2 * kappa_hat) * rho**2 < 1,
                     "128[(1+4κ)L² + 2κ̂]ρ² < 1 required")
            _require(8 * rho < eta, "η > 8ρ required")
            _require(eta <= cap * (1 + 1e-12), f"η > η̄ = {cap:.6g}")
            _require(abs(gamma - (1 - 2 * mu) * eta / 6) <= 1e-12 * eta, "γ = (1-2μ)η/6 required")
    else:
        eta = 1.0 / L if eta is None else eta
        if gamma is None:
            gamma = 0.5 * (1 - mu) * (eta - 2 * rho)
        if validate:
            _require(kappa == 0 and kappa_hat == 0, "exact regime needs u^k = F x^k (κ = κ̂ = 0)")
            _require(2 * L * rho < 1, "2·L·ρ < 1 required")
            _require(0 < mu < 1, "μ ∈ (0, 1) required")
            _require(r >= 1 / mu - 1e-12, "r >= 1/μ required")
            _require(2 * rho < eta <= (1 + 1e-12) / L, "2ρ < η <= 1/L required")
            _require(0 < gamma < (1 - mu) * (eta - 2 * rho), "0 < γ < (1-μ)(η-2ρ) required")
    return GFEGPlusSchedule(regime=regime, eta=eta, L=L, rho=rho, kappa=kappa, kappa_hat=kappa_hat,
                            gamma=gamma, mu=mu, r=r)


# ---------------------------------------------------------------------------
# GAEG


GAEG_REGIMES = ("exact", "past-gradient", "general")


@dataclass(frozen=True)
class GAEGSchedule(Schedule):
    scheme: ClassVar[str] = GAEG
    lam: float = 0.0
    r: float = 3.0

    def t(self, k):
        return k + self.r

    def gamma_k(self, k):
        t = self.t(k)
        return (t - 1) / t

    def theta_k(self, k):
        t = self.t(k)
        return (t - 1) / (t + 1)

    def nu_k(self, k):
        t = self.t(k)
        return t / (t + 1)

    def r0_sq(self, dist0_sq, w0_sq):
        lam, r, rho = self.lam, self.r, self.rho
        if self.regime == "exact":
            return 4 * lam * (r - 1) * ((r + 1) * lam + 2 * rho) * w0_sq + 16 / 3 * dist0_sq
        if self.regime == "past-gradient":
            return 2 * lam * (r - 1) * ((2 * r + 3) * lam + 4 * rho) * w0_sq + 16 / 3 * dist0_sq
        return lam * (r - 1) * (12 * (r + 2) * lam + 29 * rho) * w0_sq + 16 * dist0_sq

    def bound_sq(self, k, dist0_sq, w0_sq):
        lam, r = self.lam, self.r
        R = self.r0_sq(dist0_sq, w0_sq)
        if self.regime == "exact":
            return R / (lam**2 * (k + r - 2) * (k + r - 1))
        if self.regime == "past-gradient":
            return R / (lam**2 * (k + r - 1) * (k + r))
        return R / (3 * lam**2 * (k + r - 1) * (k + r + 2))

    def lyapunov_coefficients(self, k: int) -> tuple[float, float]:
        """``(a_k, b_k)`` for the exact regime, ``b_0 = 3 λ r (r-1) / 2``."""
        t = self.t(k)
        b = 1.5 * self.lam * t * (t - 1)
        a = b / t * (self.lam * t + self.lam + 2 * self.rho)
        return a, b


def gaeg_schedule(L, rho=0.0, kappa=0.0, kappa_hat=0.0, regime=None, lam=None, r=3.0, validate=True):
    if regime is None:
        if kappa == 0 and kappa_hat == 0:
            regime = "exact"
        elif kappa == 1 and kappa_hat == 0:
            regime = "past-gradient"
        else:
            regime = "general"
    if regime not in GAEG_REGIMES:
        raise UsageError(f"unknown GAEG regime {regime!r}")
    if regime == "exact":
        if validate:
            _require(2 * L * rho < 1, "2·L·ρ < 1 required")
            _require(r > 2, "r > 2 required")
        cap = 1.0 / L - 2 * rho
        lam = cap if lam is None else lam
        eta = lam + 2 * rho
    elif regime == "past-gradient":
        if validate:
            _require(r > 1, "r > 1 required")
        cap = lambda_bar_gaeg_past(rho, L) if validate or lam is None else float("inf")
        lam = cap if lam is None else lam
        eta = 3 * lam + 4 * rho
    else:
        if validate:
            _require(r > 1, "r > 1 required")
            _require(kappa_hat <= (r - 1) / (58 * r), "κ̂ <= (r-1)/(58r) required")
            _require(L * rho < 6 / (29 * math.sqrt(2 * (5 * kappa + 1))), "Lρ < 6/(29√(2(5κ+1))) required")
        cap = lambda_bar_gaeg(kappa, rho, L) if validate or lam is None else float("inf")
        lam = cap if lam is None else lam
        eta = 4 * lam + 29 * rho / 6
    if validate:
        _require(0 < lam <= cap * (1 + 1e-12), f"λ > λ̄ = {cap:.6g}")
    return GAEGSchedule(regime=regime, eta=eta, L=L, rho=rho, kappa=kappa, kappa_hat=kappa_hat,
                        lam=lam, r=r)


# ---------------------------------------------------------------------------
# GAEG+


GAEG_PLUS_REGIMES = ("aeg", "general")


@dataclass(frozen=True)
class GAEGPlusSchedule(Schedule):
    scheme: ClassVar[str] = GAEG_PLUS
    beta: float = 0.0
    mu: float = 1.0
    r: float = 3.0
    t0: float = 4.0
    eps: float = 0.0
    eps_hat: float = 0.0
    Delta: float = 3.0
    t0_raw: float = 0.0

    @property
    def delta(self) -> float:
        return (self.r - 1) * self.beta + (self.r - 2) * (self.eta - self.beta) / (self.mu + 1)

    @property
    def psi(self) -> float:
        return (self.eta - self.beta) / (self.mu + 1)

    @property
    def omega(self) -> float:
        return self.mu * (self.eta - self.beta) / (self.mu + 1)

    def t(self, k):
        return k + self.t0

    def theta_k(self, k):
        t = self.t(k)
        return (t - self.r - self.mu) / (t + 1)

    def gamma_k(self, k):
        t = self.t(k)
        return (t - self.r + 1) / t

    def eta_k(self, k):
        t = self.t(k)
        return ((self.eta - self.beta) * t - self.delta) / (t + 1)

    def lambda_k(self, k):
        t = self.t(k)
        return self.eta * t / (t + 1)

    def nu_k(self, k):
        t = self.t(k)
        return self.beta * t / (t + 1)

    def c_k(self, k):
        t = self.t(k)
        return (self.psi * (t - self.r + 1) - (self.r - 1) * self.beta) * t

    def Lambda_k(self, k):
        t, r, mu, eta, beta = self.t(k), self.r, self.mu, self.eta, self.beta
        return (((eta - beta) * (t - r + 1) - (r - 1) * beta) ** 2 + mu * (r - 1) ** 2 * eta * beta) / (mu + 1)

    @property
    def Gamma(self) -> float:
        return gaeg_plus_gamma(self.eta, self.beta, self.mu, self.r)

    def a_k(self, k):
        t = self.t(k)
        return t * (self.omega * (t - self.r - self.mu) + self.mu * self.eta)

    def alpha_k(self, k):
        return (self.Delta * self.r * self.eta + 8 * self.rho) * self.omega * self.t(k) ** 2

    @property
    def C0(self) -> float:
        return self.r * ((self.eta - self.beta) * self.t0 - self.eta * (self.r - 1))

    def r0_sq(self, dist0_sq, w0_sq):
        C0, r = self.C0, self.r
        return (C0 + r**2 + r * self.mu) * dist0_sq + (C0 + self.Lambda_k(0)) * w0_sq

    @property
    def Omega(self) -> float:
        if self.mu <= 1:
            return 1.0
        c = math.sqrt(self.omega * self.r * (self.r - 2) ** 2 / (self.eta * (self.mu - 1)))
        s = 1 + self.t0
        return ((s + c) / (s - c)) ** (c / 2) * math.exp(c * c / (s * s - c * c))

    def bound_sq(self, k, dist0_sq, w0_sq):
        R = self.r0_sq(dist0_sq, w0_sq)
        if self.regime == "aeg":
            return 4 * R / ((self.eta - self.beta) ** 2 * (k + self.t0 - self.r + 1) ** 2)
        return 4 * self.Omega * (self.mu + 1) ** 2 * R / ((self.eta - 8 * self.rho) ** 2 * (k + self.t0) ** 2)


def gaeg_plus_gamma(eta, beta, mu, r):
    return (mu * (r - 2) ** 2 * eta**2
            + mu * ((mu - 1) * r**2 - 2 * (mu - 3) * r + mu - 7) * eta * beta
            - mu * (mu * r**2 - 2 * (mu - 1) * r + mu - 3) * beta**2) / (mu + 1) ** 2


def gaeg_plus_t0_aeg(L, rho, eta, beta, r) -> float:
    """Unrounded lower bound on ``t_0`` for the exact-direction regime (``mu = 1``)."""
    omega = (eta - beta) / 2
    phi_hat = (1 - L**2 * eta**2) / (2 * L**2 * eta**2)
    gamma_hat = 2 * gaeg_plus_gamma(eta, beta, 1.0, r) / (r - 2) + 4 * rho * omega * r
    return max(
        (r + 1) / 2 + eta / (2 * phi_hat * omega),
        gamma_hat / (eta - beta) ** 2,
        4 * rho * (eta - omega * (r + 1)) / (omega * (beta - 2 * rho)),
        eta * (r - 1) / (eta - beta),
    )


def gaeg_plus_t0_general(rho, eta, beta, mu, r, eps_hat=0.0, Delta=3.0) -> float:
    """Unrounded lower bound on ``t_0`` for the general regime."""
    omega = mu * (eta - beta) / (mu + 1)
    delta = (r - 1) * beta + (r - 2) * (eta - beta) / (mu + 1)
    D = 2 * delta + omega * (r + mu - 1) ** 2 + 2 * Delta * r * eta + 2 * beta + 2 * eps_hat * eta
    E = 4 * rho * r * (r - 2) + Delta * r * eta + 8 * rho + eps_hat * eta
    t_bar = (D + math.sqrt(D * D + 4 * eta * E)) / (2 * eta)
    m1 = (mu + 1) ** 2
    A = (eta - beta) ** 2 / m1 * (mu - 1 / (2 * r) - 0.5)
    B = (eta - beta) / m1 * ((r - 1) * (2 * r * mu * (eta - beta) - (eta + mu * beta)) / (2 * r)
                             + rho * (mu + 1) * (2 * r * mu - 1))
    C = (r - 1) * ((r - 1) * (eta + mu * beta) / m1 * ((mu - 1 / (2 * r)) * eta - (2 * r + 1) * mu * beta / (2 * r))
                   - 2 * rho * (eta - (2 * r + 1) * omega))
    t_hat = (B + math.sqrt(B * B - A * C)) / A if B * B >= A * C else 0.0
    return max(
        t_bar,
        t_hat,
        r,
        eta * (r - 1) / (eta - beta),
        mu / omega * (r - 1) * (eta - (2 * r + 1) * omega),
        (r - 2) * math.sqrt(omega * r) / math.sqrt(eta * (mu - 1)),
    )


def _round_t0(raw: float, r: float, mu: float) -> float:
    return float(max(math.ceil(raw - 1e-12), math.ceil(r + mu - 1e-12)))


AEG_STEP_FRACTION = 0.05
GENERAL_ETA_FRACTION = 0.95


def gaeg_plus_schedule(L, rho=0.0, kappa=0.0, kappa_hat=0.0, regime=None, eta=None, beta=None,
                       r=3.0, mu=None, eps=0.0, eps_hat=0.0, Delta=3.0, t0=None, validate=True):
    if regime is None:
        regime = "aeg" if kappa == 0 and kappa_hat == 0 else "general"
    if regime not in GAEG_PLUS_REGIMES:
        raise UsageError(f"unknown GAEGplus regime {regime!r}")
    if regime == "aeg":
        mu = 1.0 if mu is None else mu
        if beta is None:
            beta = 2 * rho + AEG_STEP_FRACTION * (1 / L - 2 * rho)
        if eta is None:
            eta = 1 / L - AEG_STEP_FRACTION * (1 / L - beta)
        if validate:
            _require(kappa == 0 and kappa_hat == 0, "AEG regime needs u^k = F x^k (κ = κ̂ = 0)")
            _require(mu == 1, "μ = 1 required in the AEG regime")
            _require(r > 2, "r > 2 required")
            _require(2 * L * rho < 1, "2·L·ρ < 1 required")
            _require(2 * rho < beta, "β > 2ρ required")
            _require(beta < eta, "η > β required")
            _require(eta < 1 / L, "η < 1/L required")
        raw = gaeg_plus_t0_aeg(L, rho, eta, beta, r) if t0 is None else t0
    else:
        mu = 2.0 if mu is None else mu
        if beta is None:
            beta = 8 * rho + 2 * eps
        if validate:
            Psi = psi_gaeg_plus(kappa, kappa_hat, r, eps_hat)
        else:
            # unchecked runs still need a step; fall back to the kappa_hat = 0 scale
            try:
                Psi = psi_gaeg_plus(kappa, kappa_hat, r, eps_hat)
            except ConfigError:
                Psi = psi_gaeg_plus(kappa, 0.0, r, eps_hat)
        if eta is None:
            eta = GENERAL_ETA_FRACTION * Psi / L
        if validate:
            _require(r > 2, "r > 2 required")
            _require(mu > 1, "μ > 1 required")
            _require(L * rho < (r - 2) * Psi / (8 * (r + mu - 1)), "Lρ < (r-2)Ψ/(8(r+μ-1)) required")
            _require(abs(beta - (8 * rho + 2 * eps)) <= 1e-12 * max(1.0, beta), "β = 8ρ + 2ε required")
            _require((r + mu - 1) * beta / (r - 2) <= eta, "η >= (r+μ-1)β/(r-2) required")
            _require(eta <= Psi / L * (1 + 1e-12), "η > Ψ/L")
        raw = gaeg_plus_t0_general(rho, eta, beta, mu, r, eps_hat, Delta) if t0 is None else t0
    t0_val = _round_t0(raw, r, mu) if t0 is None else float(t0)
    return GAEGPlusSchedule(regime=regime, eta=eta, L=L, rho=rho, kappa=kappa, kappa_hat=kappa_hat,
                            beta=beta, mu=mu, r=r, t0=t0_val, eps=eps, eps_hat=eps_hat, Delta=Delta,
                            t0_raw=float(raw))


# ---------------------------------------------------------------------------
# dispatch


BUILDERS = {
    GEAG: geag_schedule,
    GFEG: gfeg_schedule,
    GFEG_PLUS: gfeg_plus_schedule,
    GAEG: gaeg_schedule,
    GAEG_PLUS: gaeg_plus_schedule,
}


def make_schedule(scheme: str, L: float, rho: float = 0.0, kappa: float = 0.0, kappa_hat: float = 0.0,
                  validate: bool = True, **overrides) -> Schedule:
    """Build the schedule of ``scheme`` from problem constants and optional overrides."""
    try:
        builder = BUILDERS[scheme]
    except KeyError:
        raise UsageError(f"unknown scheme {scheme!r}; choose from {SCHEMES}") from None
    return builder(L, rho=rho, kappa=kappa, kappa_hat=kappa_hat, validate=validate, **overrides)
