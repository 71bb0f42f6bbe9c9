"""Model definition: parameters, state types, vector fields and Jacobians.

The system couples logistic prey growth, a ratio-dependent functional
response, and a harvesting effort that adjusts to realized profit.  The
predator harvest saturates in both effort and stock (Michaelis-Menten
form), so the per-capita harvest rate is bounded by ``q*m/m1`` when effort
dominates and the effort growth rate by ``rho*p*q*m/m2`` when stock
dominates.

Three coordinate systems are provided:

* the original ``(x, y, E)`` field, undefined where ``x + y = 0`` or
  ``m1*E + m2*y = 0``;
* the full ratio transform ``(u, y, v) = (x/y, y, y/E)``, which
  desingularizes the origin;
* the partial transform ``(x, y, w)`` with ``w = y/E``, regular at the
  predator-free state ``(1, 0, 0)``.

All fields and Jacobians here were re-derived symbolically from the
original equations; they are pure functions and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

__all__ = [
    "ModelParams",
    "SysState",
    "BlowupState",
    "PartialBlowupState",
    "SingularInputError",
    "SINGULAR_TOL",
    "near_singular",
    "vector_field",
    "blowup_field",
    "partial_blowup_field",
    "jacobian",
    "dissipation_weight",
    "dissipation_bound",
]

#: Denominator magnitude below which the original field is treated as
#: singular and integrators should stop or switch coordinates.
SINGULAR_TOL = 1e-12


class SingularInputError(ValueError):
    """Raised when a field or Jacobian is evaluated on a singular set."""


@dataclass(frozen=True)
class ModelParams:
    """Model constants.

    Parameters
    ----------
    a : float
        Predation-rate coefficient (> 0).
    e : float
        Conversion efficiency of prey into predators (> 0).
    d : float
        Predator death rate (> 0).
    q : float
        Catchability coefficient (> 0).
    m : float
        Fraction of predators available for harvesting, in [0, 1].
    m1, m2 : float
        Effort- and stock-saturation constants of the harvest term (> 0).
    p : float
        Unit selling price (> 0).
    c : float
        Harvesting cost per unit effort (> 0).
    rho : float
        Stiffness of the effort response to profit (> 0).
    delta : float
        Annual discount rate (>= 0); used only by the optimal-harvesting
        computations.

    The derived constants ``A = a - d - 1`` and ``B = e - d - 1`` are
    exposed as properties so they can never go stale.
    """

    a: float
    e: float
    d: float
    q: float
    m: float
    m1: float
    m2: float
    p: float
    c: float
    rho: float
    delta: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a", "e", "d", "q", "m1", "m2", "p", "c", "rho"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if not (math.isfinite(self.m) and 0.0 <= self.m <= 1.0):
            raise ValueError(f"m must lie in [0, 1], got {self.m!r}")
        if not (math.isfinite(self.delta) and self.delta >= 0.0):
            raise ValueError(f"delta must be >= 0, got {self.delta!r}")

    @property
    def A(self) -> float:
        """Prey-side ratio constant ``a - d - 1``."""
        return self.a - self.d - 1.0

    @property
    def B(self) -> float:
        """Predator-side ratio constant ``e - d - 1``."""
        return self.e - self.d - 1.0

    @property
    def max_harvest_rate(self) -> float:
        """Per-capita harvest rate ceiling ``m*q/m1`` (effort-saturated)."""
        return self.m * self.q / self.m1

    @property
    def max_effort_growth(self) -> float:
        """Specific effort growth ceiling ``rho*p*m*q/m2`` (stock-saturated)."""
        return self.rho * self.p * self.m * self.q / self.m2

    def replace(self, **changes: float) -> "ModelParams":
        """Return a copy with the given fields replaced (re-validated)."""
        return replace(self, **changes)


class SysState(NamedTuple):
    """A point ``(x, y, E)``: prey and predator densities plus effort."""

    x: float
    y: float
    E: float


class BlowupState(NamedTuple):
    """Ratio coordinates ``(u, y, v) = (x/y, y, y/E)`` near the origin."""

    u: float
    y: float
    v: float


class PartialBlowupState(NamedTuple):
    """Mixed coordinates ``(x, y, w)`` with the predator/effort ratio ``w = y/E``."""

    x: float
    y: float
    w: float


def near_singular(params: ModelParams, s: SysState, tol: float = SINGULAR_TOL) -> bool:
    """Return True when ``s`` is too close to a singular set of the original field.

    The field is singular where ``x + y = 0`` and where ``m1*E + m2*y = 0``
    with both ``y`` and ``E`` positive (the harvest term is then a genuine
    0/0).  States lying exactly on the ``y = E = 0`` axis are regular: the
    harvest terms vanish identically there, so the prey axis can be
    integrated directly.
    """
    x, y, E = s
    if x + y < tol:
        return True
    denom = params.m1 * E + params.m2 * y
    return y > 0.0 and E > 0.0 and denom < tol


def vector_field(params: ModelParams, s: SysState) -> tuple[float, float, float]:
    """Time derivatives ``(dx/dt, dy/dt, dE/dt)`` of the original system.

    The harvest terms are defined as 0 on the ``y = E = 0`` axis (their
    limit along the axis), so the predator-free state ``(1, 0, 0)`` is
    evaluable directly.

    Raises
    ------
    SingularInputError
        If ``x + y`` vanishes, or ``m1*E + m2*y`` vanishes away from the
        ``y = E = 0`` axis; callers should switch to a transformed system
        near those sets.
    """
    x, y, E = s
    pop = x + y
    if pop == 0.0:
        raise SingularInputError("vector field undefined at x + y = 0")
    denom = params.m1 * E + params.m2 * y
    if denom == 0.0:
        if y == 0.0 and E == 0.0:
            harvest = 0.0
            revenue = 0.0
        else:
            raise SingularInputError("vector field undefined at m1*E + m2*y = 0")
    else:
        harvest = params.q * params.m * E * y / denom
        revenue = params.p * params.q * params.m * y * E / denom
    dx = x * (1.0 - x) - params.a * x * y / pop
    dy = params.e * x * y / pop - params.d * y - harvest
    dE = params.rho * (revenue - params.c * E)
    return dx, dy, dE


def blowup_field(params: ModelParams, s: BlowupState) -> tuple[float, float, float]:
    """Time derivatives ``(du/dt, dy/dt, dv/dt)`` of the ratio-transformed system.

    Regular for all nonnegative inputs: the denominators ``1 + u`` and
    ``m1 + m2*v`` are bounded below by 1 and ``m1``.
    """
    u, y, v = s
    A, B = params.A, params.B
    mq = params.m * params.q
    sat = params.m1 + params.m2 * v
    du = u * (-A - B * u) / (1.0 + u) - u * u * y + mq * u / sat
    dy = -params.d * y + params.e * u * y / (1.0 + u) - mq * y / sat
    dv = (
        -params.d * v
        + params.e * u * v / (1.0 + u)
        - mq * v / sat
        - params.rho * v * (params.p * mq * v / sat - params.c)
    )
    return du, dy, dv


def partial_blowup_field(params: ModelParams, s: PartialBlowupState) -> tuple[float, float, float]:
    """Time derivatives ``(dx/dt, dy/dt, dw/dt)`` of the mixed-coordinate system.

    Raises
    ------
    SingularInputError
        If ``x + y`` vanishes.
    """
    x, y, w = s
    pop = x + y
    if pop == 0.0:
        raise SingularInputError("partial blow-up field undefined at x + y = 0")
    mq = params.m * params.q
    sat = params.m1 + params.m2 * w
    dx = x * (1.0 - x) - params.a * x * y / pop
    dy = -params.d * y + params.e * x * y / pop - mq * y / sat
    dw = (
        -params.d * w
        + params.e * x * w / pop
        - mq * w / sat
        - params.rho * w * (params.p * mq * w / sat - params.c)
    )
    return dx, dy, dw


def _jacobian_original(params: ModelParams, s: SysState) -> np.ndarray:
    x, y, E = s
    pop = x + y
    if pop == 0.0:
        raise SingularInputError("Jacobian undefined at x + y = 0")
    denom = params.m1 * E + params.m2 * y
    if denom == 0.0:
        raise SingularInputError("Jacobian undefined at m1*E + m2*y = 0")
    a, e, d, q, m, m1, m2, p, c, rho = (
        params.a, params.e, params.d, params.q, params.m,
        params.m1, params.m2, params.p, params.c, params.rho,
    )
    pop2 = pop * pop
    den2 = denom * denom
    j = np.empty((3, 3))
    j[0, 0] = 1.0 - 2.0 * x - a * y * y / pop2
    j[0, 1] = -a * x * x / pop2
    j[0, 2] = 0.0
    j[1, 0] = e * y * y / pop2
    j[1, 1] = -d + e * x * x / pop2 - q * m * m1 * E * E / den2
    j[1, 2] = -q * m * m2 * y * y / den2
    j[2, 0] = 0.0
    j[2, 1] = rho * p * q * m * m1 * E * E / den2
    j[2, 2] = rho * (p * q * m * m2 * y * y / den2 - c)
    return j


def _jacobian_blowup(params: ModelParams, s: BlowupState) -> np.ndarray:
    u, y, v = s
    a, e, d, q, m, m1, m2, p, c, rho = (
        params.a, params.e, params.d, params.q, params.m,
        params.m1, params.m2, params.p, params.c, params.rho,
    )
    A, B = params.A, params.B
    mq = m * q
    one_u = 1.0 + u
    one_u2 = one_u * one_u
    sat = m1 + m2 * v
    sat2 = sat * sat
    j = np.empty((3, 3))
    j[0, 0] = -(A + 2.0 * B * u + B * u * u) / one_u2 - 2.0 * u * y + mq / sat
    j[0, 1] = -u * u
    j[0, 2] = -mq * u * m2 / sat2
    j[1, 0] = e * y / one_u2
    j[1, 1] = -d + e * u / one_u - mq / sat
    j[1, 2] = mq * y * m2 / sat2
    j[2, 0] = e * v / one_u2
    j[2, 1] = 0.0
    j[2, 2] = (
        -d
        + e * u / one_u
        - mq * m1 / sat2
        - rho * p * mq * (2.0 * v * m1 + v * v * m2) / sat2
        + rho * c
    )
    return j


def _jacobian_partial(params: ModelParams, s: PartialBlowupState) -> np.ndarray:
    x, y, w = s
    pop = x + y
    if pop == 0.0:
        raise SingularInputError("Jacobian undefined at x + y = 0")
    a, e, d, q, m, m1, m2, p, c, rho = (
        params.a, params.e, params.d, params.q, params.m,
        params.m1, params.m2, params.p, params.c, params.rho,
    )
    mq = m * q
    pop2 = pop * pop
    sat = m1 + m2 * w
    sat2 = sat * sat
    j = np.empty((3, 3))
    j[0, 0] = 1.0 - 2.0 * x - a * y * y / pop2
    j[0, 1] = -a * x * x / pop2
    j[0, 2] = 0.0
    j[1, 0] = e * y * y / pop2
    j[1, 1] = -d + e * x * x / pop2 - mq / sat
    j[1, 2] = mq * m2 * y / sat2
    j[2, 0] = e * w * y / pop2
    j[2, 1] = -e * x * w / pop2
    j[2, 2] = (
        -d
        + e * x / pop
        - mq * m1 / sat2
        - rho * p * mq * (2.0 * w * m1 + w * w * m2) / sat2
        + rho * c
    )
    return j


def jacobian(params: ModelParams, s, system: str = "original") -> np.ndarray:
    """Analytic 3x3 Jacobian of the selected vector field at ``s``.

    Parameters
    ----------
    s : SysState or BlowupState or PartialBlowupState or 3-sequence
        Point of evaluation, in the coordinates of ``system``.
    system : {"original", "blowup", "partial"}
        Which vector field to differentiate.
    """
    if system == "original":
        return _jacobian_original(params, SysState(*s))
    if system == "blowup":
        return _jacobian_blowup(params, BlowupState(*s))
    if system == "partial":
        return _jacobian_partial(params, PartialBlowupState(*s))
    raise ValueError(f"unknown system {system!r}; expected 'original', 'blowup' or 'partial'")


def dissipation_weight(params: ModelParams, s: SysState) -> float:
    """Weighted population total ``x + (a/e)*y + a*E/(rho*e*p)``.

    Along any solution this satisfies ``dW/dt + mu*W <= (1+mu)^2/4`` for
    every ``0 < mu < min(d, c*rho)``, which confines trajectories to a
    bounded region.
    """
    x, y, E = s
    return x + params.a * y / params.e + params.a * E / (params.rho * params.e * params.p)


def dissipation_bound(params: ModelParams, mu: float | None = None) -> tuple[float, float]:
    """Return ``(mu, M)`` with ``M = (1+mu)^2/4`` for the confinement inequality.

    When ``mu`` is omitted, ``0.5 * min(d, c*rho)`` is used.
    """
    if mu is None:
        mu = 0.5 * min(params.d, params.c * params.rho)
    if not 0.0 < mu < min(params.d, params.c * params.rho):
        raise ValueError("mu must lie in (0, min(d, c*rho))")
    return mu, (1.0 + mu) ** 2 / 4.0
