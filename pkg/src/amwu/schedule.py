"""Acceleration schedule: the root ``s_t``, the ``gamma`` recursion and step bounds."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

RESIDUAL_TOL = 1e-12


class NoRootInUnitInterval(ArithmeticError):
    """The positive root of ``s^2 = alpha((1-s) gamma + s mu)`` is not below 1."""


class ScheduleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ScheduleParams:
    alpha: float
    beta: float
    mu: float
    lipschitz_L: float = math.inf

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.lipschitz_L > 0:
            raise ValueError("lipschitz_L must be positive")

    @property
    def admissible(self):
        """Whether ``alpha`` lies below :func:`admissible_step_bound`."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ScheduleWarning)
            bound = admissible_step_bound(self.beta, self.mu, self.lipschitz_L)
        return self.alpha < bound


@dataclass(frozen=True)
class DerivedCoefficients:
    """Mixing coefficients of one accelerated step.

    ``theta`` weights ``Log_x(v)`` in the extrapolation point, ``zeta`` weights
    ``Log_y(v)`` in the momentum update and ``grad_coef = s / gamma_bar``
    scales the gradient there.
    """

    alpha: float
    s: float
    gamma: float
    gamma_bar: float
    mu: float
    theta: float
    zeta: float

    @property
    def grad_coef(self):
        return self.s / self.gamma_bar

    @classmethod
    def from_values(cls, alpha, s, gamma, gamma_bar, mu):
        theta = s * gamma / (gamma + s * mu)
        zeta = (1.0 - s) * gamma / gamma_bar
        return cls(alpha=alpha, s=s, gamma=gamma, gamma_bar=gamma_bar, mu=mu,
                   theta=theta, zeta=zeta)

    @classmethod
    def from_stationary(cls, params, s, gamma):
        """Coefficients when ``(s, gamma)`` is treated as stationary.

        Uses ``gamma_bar = (1 + beta) gamma`` and hence
        ``zeta = (1 - s) / (1 + beta)``, which is what the recursion gives at
        its fixed point.
        """
        gamma_bar = (1.0 + params.beta) * gamma
        return cls.from_values(params.alpha, s, gamma, gamma_bar, params.mu)


@dataclass(frozen=True)
class ScheduleState:
    """Schedule at step ``t``: ``s`` is solved against ``gamma`` and
    ``gamma_bar = (1 - s) gamma + s mu`` is the value used by this step."""

    s: float
    gamma: float
    gamma_bar: float
    t: int = 0
    params: ScheduleParams = field(default=None, repr=False, compare=False)

    @property
    def residual(self):
        p = self.params
        return abs(self.s ** 2 - p.alpha * ((1.0 - self.s) * self.gamma + self.s * p.mu))

    def coefficients(self):
        return DerivedCoefficients.from_values(
            self.params.alpha, self.s, self.gamma, self.gamma_bar, self.params.mu)


def solve_s(params, gamma):
    """Root in (0, 1) of ``s^2 + alpha (gamma - mu) s - alpha gamma = 0``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    a = params.alpha
    b = a * (gamma - params.mu)
    c = -a * gamma
    disc = b * b - 4.0 * c
    # c < 0, so the roots have opposite signs; pick the positive one without cancellation.
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    s = c / q if b >= 0 else q
    if not 0.0 < s < 1.0:
        raise NoRootInUnitInterval(
            f"positive root s={s!r} for alpha={a}, gamma={gamma}, mu={params.mu}")
    return s


def initial_state(params, gamma0=None):
    """Schedule at ``t = 0``; ``gamma0`` defaults to ``mu``."""
    gamma = params.mu if gamma0 is None else float(gamma0)
    s = solve_s(params, gamma)
    return ScheduleState(s=s, gamma=gamma, gamma_bar=(1.0 - s) * gamma + s * params.mu,
                         t=0, params=params)


def advance(params, state):
    """Apply ``gamma_{t+1} = gamma_bar / (1 + beta)`` and re-solve ``s``."""
    gamma = state.gamma_bar / (1.0 + params.beta)
    s = solve_s(params, gamma)
    return ScheduleState(s=s, gamma=gamma, gamma_bar=(1.0 - s) * gamma + s * params.mu,
                         t=state.t + 1, params=params)


def _root_term(params):
    a, b, m = params.alpha, params.beta, params.mu
    return math.sqrt(b * b + 4.0 * (1.0 + b) * m * a)


def stationary_values(params):
    """Fixed point ``(s*, gamma*)`` of :func:`advance`.

    ``s* = (R - beta) / 2`` and ``gamma* = mu (R - beta) / (R + beta)`` with
    ``R = sqrt(beta^2 + 4 (1 + beta) mu alpha)``.
    """
    r = _root_term(params)
    s = 0.5 * (r - params.beta)
    return s, params.mu * (r - params.beta) / (r + params.beta)


def appendix_closed_form(params):
    """``(s, gamma)`` with ``gamma = (R - beta) / (R + beta)`` (no ``mu`` factor).

    Coincides with :func:`stationary_values` only when ``mu == 1``; kept because
    published parameter discussions quote this form.
    """
    r = _root_term(params)
    return 0.5 * (r - params.beta), (r - params.beta) / (r + params.beta)


def stationary_state(params):
    s, gamma = stationary_values(params)
    return ScheduleState(s=s, gamma=gamma, gamma_bar=(1.0 - s) * gamma + s * params.mu,
                         t=0, params=params)


def admissible_step_bound(beta, mu, lipschitz_L=math.inf):
    """``min(1/L, (1 + (mu+1) beta) / ((1+beta) mu))``; warns when ``mu >= 1``.

    An infinite ``L`` (the default, unknown smoothness) drops the first term.
    """
    if mu >= 1:
        warnings.warn(f"step bound assumes mu < 1, got mu={mu}", ScheduleWarning, stacklevel=2)
    second = (1.0 + (mu + 1.0) * beta) / ((1.0 + beta) * mu)
    return second if math.isinf(lipschitz_L) else min(1.0 / lipschitz_L, second)


def recommended_beta(mu, lipschitz_L):
    return 0.2 * math.sqrt(mu / lipschitz_L)
