"""Steady-state costate analysis and the optimal harvest fraction.

The harvest fraction ``m`` is treated as a control with an infinite-horizon
discounted profit objective.  On a singular arc the Hamiltonian is
stationary in the control, which at an interior steady state reduces to
``p - lambda2 + rho*p*lambda3 = 0`` after dividing out the positive common
factor ``q*y*E/(m1*E + m2*y)``.

A structural caveat applies at zero discount: effort adjusts until profit
vanishes, so the steady-state profit is identically zero for every
admissible ``m`` and the stationarity condition is satisfied identically.
With ``delta = 0`` the residual below is zero to rounding for all ``m``
and carries no information; :func:`optimal_m` detects this and raises
instead of returning an arbitrary noise crossing.  Any positive discount
breaks the degeneracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .equilibria import interior_equilibrium, interior_existence_range
from .model import ModelParams, SysState, SingularInputError, vector_field
from .stability import MissingEquilibriumError

__all__ = [
    "AdjointCoefficients",
    "AdjointSolution",
    "SingularAdjointError",
    "BracketError",
    "DegenerateControlError",
    "OptimalHarvest",
    "adjoint_coefficients",
    "steady_adjoints",
    "hamiltonian",
    "singular_control_residual",
    "optimal_m",
]


class SingularAdjointError(RuntimeError):
    """The steady costate system is numerically singular."""

    def __init__(self, message: str, condition_number: float):
        super().__init__(message)
        self.condition_number = condition_number


class BracketError(ValueError):
    """The residual does not have a usable sign change in the bracket."""

    def __init__(self, message: str, endpoints: tuple[tuple[float, float], tuple[float, float]]):
        super().__init__(message)
        self.endpoints = endpoints


class DegenerateControlError(RuntimeError):
    """The stationarity residual is identically zero over the bracket.

    This is the zero-discount open-access degeneracy: steady profit is
    zero for every harvest fraction, so no interior optimum is defined.
    """


@dataclass
class AdjointCoefficients:
    """Constants of the linearized steady costate equations.

    The costate rates are ``a1*L1 + a2*L2``, ``b1 + b2*L1 + b3*L2 + b4*L3``
    and ``c1 + c2*L2 + c3*L3``.  The compact forms used here apply at an
    interior equilibrium (they simplify with the equilibrium relations)
    and match finite differences of the Hamiltonian there.
    """

    a1: float
    a2: float
    b1: float
    b2: float
    b3: float
    b4: float
    c1: float
    c2: float
    c3: float


@dataclass
class AdjointSolution:
    """Steady costates with consistency diagnostics.

    ``residuals`` is the max-norm of the three steady equations at the
    solution; ``closed_form`` re-derives the costates by eliminating the
    triangular structure by hand and should agree with the linear solve
    (``closed_form_max_diff`` reports how well it does).
    """

    lambda1: float
    lambda2: float
    lambda3: float
    coefficients: AdjointCoefficients
    residuals: float
    condition_number: float
    closed_form: tuple[float, float, float]
    closed_form_max_diff: float


def adjoint_coefficients(params: ModelParams, s: SysState) -> AdjointCoefficients:
    """Coefficients of the steady costate system at the positive state ``s``.

    Uses ``params.delta`` as the discount rate.  Intended to be evaluated
    at the interior equilibrium; the compact forms rely on the equilibrium
    relations.
    """
    x, y, E = s
    if x <= 0.0 or (x + y) <= 0.0:
        raise SingularInputError("adjoint coefficients need x > 0 and x + y > 0")
    D = params.m1 * E + params.m2 * y
    if D <= 0.0:
        raise SingularInputError("adjoint coefficients need m1*E + m2*y > 0")
    a, e, q, m, m1, m2, p, rho, delta = (
        params.a, params.e, params.q, params.m,
        params.m1, params.m2, params.p, params.rho, params.delta,
    )
    tot2 = (x + y) ** 2
    D2 = D * D
    return AdjointCoefficients(
        a1=delta + x - a * x * y / tot2,
        a2=-e * y * y / tot2,
        b1=-p * q * m * m1 * E * E / D2,
        b2=a * x * x / tot2,
        b3=delta + e * x * y / tot2 - q * m * m2 * y * E / D2,
        b4=-rho * p * q * m * m1 * E * E / D2,
        c1=params.c - p * q * m * m2 * y * y / D2,
        c2=q * m * m2 * y * y / D2,
        c3=delta + rho * p * q * m * m1 * E * y / D2,
    )


def steady_adjoints(params: ModelParams, s: SysState) -> AdjointSolution:
    """Solve the 3x3 steady costate system at ``s``.

    Raises
    ------
    SingularAdjointError
        When the linear system is numerically singular; the estimated
        condition number travels with the error.
    """
    co = adjoint_coefficients(params, s)
    A = np.array([
        [co.a1, co.a2, 0.0],
        [co.b2, co.b3, co.b4],
        [0.0, co.c2, co.c3],
    ])
    rhs = np.array([0.0, -co.b1, -co.c1])
    cond = float(np.linalg.cond(A))
    try:
        lam = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularAdjointError(
            f"steady costate system is singular (cond={cond:.3e})", cond
        ) from exc
    residuals = float(np.abs(A @ lam - rhs).max())

    # Hand elimination of the same system, kept as an independent route.
    denom = co.a1 * co.b3 * co.c3 - co.b2 * co.a2 * co.c3 - co.b4 * co.c2 * co.a1
    if denom != 0.0 and co.a1 != 0.0 and co.c3 != 0.0:
        lam2 = co.a1 * (-co.b1 * co.c3 + co.b4 * co.c1) / denom
        lam1 = -co.a2 / co.a1 * lam2
        lam3 = -(co.c1 + co.c2 * lam2) / co.c3
        closed = (lam1, lam2, lam3)
        diff = max(abs(closed[i] - lam[i]) for i in range(3))
    else:
        closed = (float("nan"),) * 3
        diff = float("nan")
    return AdjointSolution(
        lambda1=float(lam[0]),
        lambda2=float(lam[1]),
        lambda3=float(lam[2]),
        coefficients=co,
        residuals=residuals,
        condition_number=cond,
        closed_form=closed,
        closed_form_max_diff=diff,
    )


def hamiltonian(
    params: ModelParams,
    s: SysState,
    lambdas: tuple[float, float, float],
    m: float | None = None,
) -> float:
    """Current-value Hamiltonian: instantaneous profit plus costate-weighted rates.

    ``m`` overrides the harvest fraction of ``params`` (the state and
    costates are held fixed), which is what the control derivative needs.
    """
    local = params if m is None else params.replace(m=m)
    x, y, E = s
    D = local.m1 * E + local.m2 * y
    profit = (local.p * local.q * local.m * y / D - local.c) * E
    f = vector_field(local, SysState(x, y, E))
    return profit + lambdas[0] * f[0] + lambdas[1] * f[1] + lambdas[2] * f[2]


def _interior_or_raise(params: ModelParams, m: float) -> SysState:
    report = interior_equilibrium(params.replace(m=m))
    if not report.exists:
        failed = ", ".join(c.condition_id for c in report.failed_conditions())
        raise MissingEquilibriumError(
            f"interior equilibrium does not exist at m={m:.6g} (failed: {failed})"
        )
    return SysState(*report.coords)


def singular_control_residual(params: ModelParams, m: float) -> float:
    """Stationarity residual ``p - lambda2 + rho*p*lambda3`` at the interior
    equilibrium for harvest fraction ``m``.

    This is the control derivative of the Hamiltonian divided by the
    positive factor ``q*y*E/(m1*E + m2*y)``.  Errors from the equilibrium
    or costate computations propagate.
    """
    return _residual_and_scale(params, m)[0]


def _residual_and_scale(params: ModelParams, m: float) -> tuple[float, float]:
    """Residual plus the magnitude of its constituent terms.

    The scale makes degeneracy detectable: when the residual is a rounding
    remainder of much larger cancelling terms, residual/scale sits at the
    machine-epsilon level regardless of conditioning.
    """
    s = _interior_or_raise(params, m)
    sol = steady_adjoints(params.replace(m=m), s)
    residual = params.p - sol.lambda2 + params.rho * params.p * sol.lambda3
    scale = abs(params.p) + abs(sol.lambda2) + abs(params.rho * params.p * sol.lambda3)
    return residual, scale


@dataclass
class OptimalHarvest:
    """Root of the stationarity residual with its supporting data."""

    m_opt: float
    equilibrium: SysState
    adjoints: AdjointSolution
    residual: float
    bracket_used: tuple[float, float]
    scan: list[tuple[float, float]]


def optimal_m(
    params: ModelParams,
    bracket: tuple[float, float],
    scan_points: int = 65,
    residual_tol: float = 1e-10,
    degeneracy_tol: float | None = None,
) -> OptimalHarvest:
    """Find the harvest fraction where the stationarity residual crosses zero.

    The bracket is first intersected with the range where the interior
    equilibrium exists (its edges are located by bisection) and trimmed by
    1% of its width at each end: on the existence boundary the equilibrium
    collapses (populations or effort reach zero), the costates blow up and
    the stationarity residual develops spurious crossings.  The residual
    is then scanned on the trimmed sub-bracket and the unique sign change
    is refined to machine precision.

    Raises
    ------
    DegenerateControlError
        If the residual is at rounding level relative to its constituent
        terms over the whole bracket, as happens for ``delta = 0``; no
        interior optimum is defined then.
    BracketError
        If there is no sign change (endpoint residuals attached) or more
        than one (ambiguous optimum).
    """
    m_lo, m_hi = bracket
    if not (0.0 < m_lo < m_hi <= 1.0):
        raise ValueError("bracket must satisfy 0 < m_lo < m_hi <= 1")
    if degeneracy_tol is None:
        degeneracy_tol = 1e-9

    try:
        lo, hi = interior_existence_range(params, m_lo, m_hi, probes=scan_points)
    except ValueError as exc:
        raise MissingEquilibriumError(str(exc)) from None
    # Stay strictly inside: the equilibrium degenerates on the edges.
    trim = 1e-2 * (hi - lo)
    lo += trim
    hi -= trim

    ms = np.linspace(lo, hi, scan_points)
    pairs = [_residual_and_scale(params, float(m)) for m in ms]
    scan = [(float(m), r) for m, (r, _) in zip(ms, pairs)]
    if max(abs(r) / s for r, s in pairs) < degeneracy_tol:
        raise DegenerateControlError(
            "stationarity residual is zero to rounding over the whole bracket; "
            "with delta = 0 steady profit vanishes identically and no interior "
            "optimum exists -- rerun with a positive discount rate"
        )

    crossings = [
        i for i in range(len(scan) - 1)
        if scan[i][1] == 0.0 or (scan[i][1] * scan[i + 1][1] < 0.0)
    ]
    if not crossings:
        raise BracketError(
            f"no sign change of the stationarity residual on [{lo:.6g}, {hi:.6g}]",
            endpoints=(scan[0], scan[-1]),
        )
    if len(crossings) > 1:
        locs = ", ".join(f"{scan[i][0]:.4f}" for i in crossings)
        raise BracketError(
            f"multiple sign changes of the stationarity residual (near m = {locs}); "
            "the optimum is ambiguous on this bracket",
            endpoints=(scan[0], scan[-1]),
        )
    i = crossings[0]
    root = brentq(
        lambda m: singular_control_residual(params, m),
        scan[i][0], scan[i + 1][0], xtol=1e-13, rtol=8.9e-16,
    )
    residual = singular_control_residual(params, root)
    if abs(residual) > residual_tol:
        raise BracketError(
            f"refined root has residual {residual:.3e}, above tolerance {residual_tol:.1e}",
            endpoints=(scan[i], scan[i + 1]),
        )
    equilibrium = _interior_or_raise(params, root)
    adjoints = steady_adjoints(params.replace(m=root), equilibrium)
    return OptimalHarvest(
        m_opt=float(root),
        equilibrium=equilibrium,
        adjoints=adjoints,
        residual=float(residual),
        bracket_used=(lo, hi),
        scan=scan,
    )
