"""Local stability classification, Routh-Hurwitz tests and the Lyapunov region.

The original field is undefined at the origin and degenerate along the
``y = E = 0`` axis, so the extinction state E0 and the prey-only state E1
are classified through the transformed systems: E0 attracts exactly when
one of the ratio-system boundary states {E00, E10, E100} is attracting,
and E1 exactly when one of {E01, E001} is.  At most one state of each
family can be stable for a given parameter set; the verdict records which
route applies, since the routes correspond to different relative decay
rates of prey, predators and effort.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .equilibria import (
    EquilibriumReport,
    blowup_equilibria,
    boundary_equilibria,
    interior_equilibrium,
    partial_blowup_equilibria,
)
from .model import ModelParams, SysState, jacobian, vector_field

__all__ = [
    "MARGINAL_TOL",
    "MissingEquilibriumError",
    "StabilityVerdict",
    "LyapunovRegionCheck",
    "PersistenceReport",
    "eigenvalues_3x3",
    "routh_hurwitz_cubic",
    "classify_blowup_boundary",
    "classify_partial_boundary",
    "classify_origin",
    "classify_E1",
    "classify_E2",
    "classify_E3",
    "lyapunov_region_check",
    "persistence_check",
    "persistence_threshold_m",
]

#: Eigenvalue real parts within this of zero are treated as marginal.
MARGINAL_TOL = 1e-9


class MissingEquilibriumError(ValueError):
    """Raised when a classification is requested for a non-existent state."""


@dataclass
class StabilityVerdict:
    """Outcome of a local stability test.

    ``verdict`` is "stable" when every eigenvalue real part is below
    ``-MARGINAL_TOL``, "marginal" when some real part sits within the
    tolerance band around zero, and "unstable" otherwise.
    ``governing_conditions`` lists (condition-id, passed) pairs for the
    analytic inequalities behind the verdict; ``route`` names the
    transformed-system state that carries the conclusion for E0/E1.
    """

    kind: str
    eigenvalues: tuple[complex, ...]
    rh_terms: tuple[float, ...] | None
    verdict: str
    governing_conditions: list[tuple[str, bool]] = field(default_factory=list)
    route: str | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"


def eigenvalues_3x3(matrix) -> tuple[complex, complex, complex]:
    """Eigenvalues of a real 3x3 matrix, sorted by (real, imag) for determinism."""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    eigs = sorted(np.linalg.eigvals(m), key=lambda z: (z.real, z.imag))
    return tuple(complex(z) for z in eigs)


def _verdict_from_eigenvalues(eigs, tol: float = MARGINAL_TOL) -> str:
    reals = [z.real for z in eigs]
    if max(reals) < -tol:
        return "stable"
    if any(abs(r) <= tol for r in reals):
        return "marginal"
    return "unstable"


def routh_hurwitz_cubic(s11: float, s12: float, s13: float) -> str:
    """Stability verdict for ``mu^3 + s11*mu^2 + s12*mu + s13 = 0``.

    All roots have negative real parts iff ``s11 > 0``, ``s12 > 0``,
    ``s13 > 0`` and ``s11*s12 - s13 > 0``.
    """
    for v in (s11, s12, s13):
        if not math.isfinite(v):
            raise ValueError("Routh-Hurwitz terms must be finite")
    ok = s11 > 0.0 and s12 > 0.0 and s13 > 0.0 and s11 * s12 - s13 > 0.0
    return "stable" if ok else "unstable"


def _report_by_kind(reports: list[EquilibriumReport], kind: str) -> EquilibriumReport:
    return next(r for r in reports if r.kind == kind)


def classify_blowup_boundary(params: ModelParams) -> dict[str, StabilityVerdict]:
    """Verdicts for the ratio-system states E00, E10 and E100.

    Non-existent states get verdict "unstable" with an explanatory note;
    they cannot attract anything.
    """
    h = params.max_harvest_rate
    A = params.A
    theta = params.rho * params.c - params.d
    out: dict[str, StabilityVerdict] = {}
    reports = blowup_equilibria(params)

    e00 = _report_by_kind(reports, "E00")
    eigs = eigenvalues_3x3(jacobian(params, e00.coords, "blowup"))
    out["E00"] = StabilityVerdict(
        kind="E00",
        eigenvalues=eigs,
        rh_terms=None,
        verdict=_verdict_from_eigenvalues(eigs),
        governing_conditions=[
            ("cost_margin_lt_harvest_rate", theta < h),
            ("harvest_rate_lt_A", h < A),
        ],
    )

    e10 = _report_by_kind(reports, "E10")
    if e10.exists:
        x_bar = e10.coords[0]
        eigs = eigenvalues_3x3(jacobian(params, e10.coords, "blowup"))
        cap = (1.0 + x_bar) / x_bar * (params.d + h - params.rho * params.c)
        branch_a = A < h < params.B
        out["E10"] = StabilityVerdict(
            kind="E10",
            eigenvalues=eigs,
            rh_terms=None,
            verdict=_verdict_from_eigenvalues(eigs),
            governing_conditions=[
                ("exists_with_A_below_B", branch_a),
                ("conversion_lt_ratio_cap", params.e < cap),
            ],
        )
    else:
        out["E10"] = StabilityVerdict(
            kind="E10", eigenvalues=(), rh_terms=None, verdict="unstable",
            notes=["state does not exist"],
        )

    e100 = _report_by_kind(reports, "E100")
    if e100.exists:
        E_bar = e100.coords[2]
        eigs = eigenvalues_3x3(jacobian(params, e100.coords, "blowup"))
        g = params.max_effort_growth
        out["E100"] = StabilityVerdict(
            kind="E100",
            eigenvalues=eigs,
            rh_terms=None,
            verdict=_verdict_from_eigenvalues(eigs),
            governing_conditions=[
                ("exists_with_harvest_below_effort_cap", h < theta < g),
                ("saturated_harvest_rate_lt_A", params.m * params.q / (params.m1 + params.m2 * E_bar) < A),
            ],
        )
    else:
        out["E100"] = StabilityVerdict(
            kind="E100", eigenvalues=(), rh_terms=None, verdict="unstable",
            notes=["state does not exist"],
        )
    return out


def classify_partial_boundary(params: ModelParams) -> dict[str, StabilityVerdict]:
    """Verdicts for the mixed-coordinate states E01 and E001."""
    h = params.max_harvest_rate
    g = params.max_effort_growth
    k = params.e + params.rho * params.c - params.d
    out: dict[str, StabilityVerdict] = {}
    reports = partial_blowup_equilibria(params)

    e01 = _report_by_kind(reports, "E01")
    eigs = eigenvalues_3x3(jacobian(params, e01.coords, "partial"))
    out["E01"] = StabilityVerdict(
        kind="E01",
        eigenvalues=eigs,
        rh_terms=None,
        verdict=_verdict_from_eigenvalues(eigs),
        governing_conditions=[("growth_margin_lt_harvest_rate", k < h)],
    )

    e001 = _report_by_kind(reports, "E001")
    if e001.exists:
        w_star = e001.coords[2]
        eigs = eigenvalues_3x3(jacobian(params, e001.coords, "partial"))
        sat_rate = params.m * params.q / (params.m1 + params.m2 * w_star)
        out["E001"] = StabilityVerdict(
            kind="E001",
            eigenvalues=eigs,
            rh_terms=None,
            verdict=_verdict_from_eigenvalues(eigs),
            governing_conditions=[
                ("exists_with_harvest_below_effort_cap", h < k < g),
                ("conversion_lt_death_plus_saturated_rate", params.e < params.d + sat_rate),
            ],
        )
    else:
        out["E001"] = StabilityVerdict(
            kind="E001", eigenvalues=(), rh_terms=None, verdict="unstable",
            notes=["state does not exist"],
        )
    return out


def classify_origin(params: ModelParams) -> StabilityVerdict:
    """Stability of the extinction state E0 via the ratio-transformed system.

    E0 is declared stable when one of E00, E10, E100 attracts; the verdict
    records that state as the route.  The three routes correspond to
    different orders in which prey, predators and effort decay, and at
    most one of them can be attracting for a given parameter set.
    """
    verdicts = classify_blowup_boundary(params)
    conditions: list[tuple[str, bool]] = []
    route = None
    for kind in ("E00", "E10", "E100"):
        stable = verdicts[kind].stable
        conditions.append((f"route_{kind}_attracting", stable))
        if stable and route is None:
            route = kind
    if route is not None:
        chosen = verdicts[route]
        return StabilityVerdict(
            kind="E0",
            eigenvalues=chosen.eigenvalues,
            rh_terms=None,
            verdict="stable",
            governing_conditions=conditions,
            route=route,
        )
    marginal = [k for k, v in verdicts.items() if v.verdict == "marginal"]
    verdict = "marginal" if marginal else "unstable"
    fallback = verdicts[marginal[0]] if marginal else verdicts["E00"]
    return StabilityVerdict(
        kind="E0",
        eigenvalues=fallback.eigenvalues,
        rh_terms=None,
        verdict=verdict,
        governing_conditions=conditions,
        route=marginal[0] if marginal else None,
    )


def classify_E1(params: ModelParams) -> StabilityVerdict:
    """Stability of the prey-only state E1 via the mixed-coordinate system."""
    verdicts = classify_partial_boundary(params)
    conditions: list[tuple[str, bool]] = []
    route = None
    for kind in ("E01", "E001"):
        stable = verdicts[kind].stable
        conditions.append((f"route_{kind}_attracting", stable))
        if stable and route is None:
            route = kind
    if route is not None:
        chosen = verdicts[route]
        return StabilityVerdict(
            kind="E1",
            eigenvalues=chosen.eigenvalues,
            rh_terms=None,
            verdict="stable",
            governing_conditions=conditions,
            route=route,
        )
    marginal = [k for k, v in verdicts.items() if v.verdict == "marginal"]
    verdict = "marginal" if marginal else "unstable"
    fallback = verdicts[marginal[0]] if marginal else verdicts["E01"]
    return StabilityVerdict(
        kind="E1",
        eigenvalues=fallback.eigenvalues,
        rh_terms=None,
        verdict=verdict,
        governing_conditions=conditions,
        route=marginal[0] if marginal else None,
    )


def classify_E2(params: ModelParams) -> StabilityVerdict:
    """Stability of the effort-free state E2 = (x1, y1, 0).

    The Jacobian block-decouples: one eigenvalue is
    ``lambda1 = rho*(p*q*m/m2 - c)`` (the profitability of entering the
    fishery at this state), the other two solve ``mu^2 + s1*mu + s2 = 0``
    with ``s1 = x1 - (a-e)*x1*y1/(x1+y1)^2`` and
    ``s2 = e*x1^2*y1/(x1+y1)^2``.  The direct sign test on
    (lambda1, s1, s2) decides the verdict.  A closed-form version of the
    ``s1 > 0`` condition, ``a < e/(e+d) * (e/(e-d) - d)``, is evaluated as
    a cross-check only; at some parameter sets it disagrees with the
    direct test, in which case a warning is attached and emitted.
    """
    e2 = _report_by_kind(boundary_equilibria(params), "E2")
    if not e2.exists:
        raise MissingEquilibriumError("E2 does not exist for these parameters")
    x1, y1, _ = e2.coords
    lam1 = params.rho * (params.p * params.q * params.m / params.m2 - params.c)
    tot2 = (x1 + y1) ** 2
    s1 = x1 - (params.a - params.e) * x1 * y1 / tot2
    s2 = params.e * x1 * x1 * y1 / tot2
    disc = s1 * s1 - 4.0 * s2
    if disc >= 0.0:
        r = math.sqrt(disc)
        quad = (complex((-s1 - r) / 2.0), complex((-s1 + r) / 2.0))
    else:
        r = math.sqrt(-disc)
        quad = (complex(-s1 / 2.0, -r / 2.0), complex(-s1 / 2.0, r / 2.0))
    eigs = tuple(sorted(quad + (complex(lam1),), key=lambda z: (z.real, z.imag)))
    verdict = _verdict_from_eigenvalues(eigs)

    closed_form = params.a < params.e / (params.e + params.d) * (
        params.e / (params.e - params.d) - params.d
    )
    direct_stable = lam1 < 0.0 and s1 > 0.0 and s2 > 0.0
    closed_stable = lam1 < 0.0 and closed_form
    notes = []
    if closed_stable != direct_stable:
        notes.append(
            "closed-form trace condition disagrees with the direct sign test; "
            "the direct test decides the verdict"
        )
        warnings.warn(notes[0], stacklevel=2)
    return StabilityVerdict(
        kind="E2",
        eigenvalues=eigs,
        rh_terms=(s1, s2),
        verdict=verdict,
        governing_conditions=[
            ("effort_entry_unprofitable", lam1 < 0.0),
            ("planar_trace_term_positive", s1 > 0.0),
            ("planar_determinant_term_positive", s2 > 0.0),
            ("closed_form_trace_condition", closed_form),
            ("closed_form_agrees_with_direct", closed_stable == direct_stable),
        ],
        notes=notes,
    )


def cubic_terms_from_jacobian(j: np.ndarray) -> tuple[float, float, float]:
    """Characteristic-cubic coefficients ``(s11, s12, s13)`` of a 3x3 matrix.

    These are the negated trace, the sum of principal 2x2 minors and the
    negated determinant, so the characteristic polynomial reads
    ``mu^3 + s11*mu^2 + s12*mu + s13``.
    """
    s11 = -float(np.trace(j))
    s12 = float(
        j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]
        + j[0, 0] * j[2, 2] - j[0, 2] * j[2, 0]
        + j[1, 1] * j[2, 2] - j[1, 2] * j[2, 1]
    )
    s13 = -float(np.linalg.det(j))
    return s11, s12, s13


def classify_E3(params: ModelParams) -> StabilityVerdict:
    """Stability of the coexistence state E3 via Routh-Hurwitz on its cubic.

    The sufficient side conditions ``a < e`` and ``m2 < rho*p*m1`` are
    recorded in ``governing_conditions`` together with the Hurwitz product
    ``s11*s12 - s13 > 0``; the verdict itself comes from the eigenvalues.
    """
    e3 = interior_equilibrium(params)
    if not e3.exists:
        raise MissingEquilibriumError("E3 does not exist for these parameters")
    j = jacobian(params, e3.coords, "original")
    s11, s12, s13 = cubic_terms_from_jacobian(j)
    eigs = eigenvalues_3x3(j)
    return StabilityVerdict(
        kind="E3",
        eigenvalues=eigs,
        rh_terms=(s11, s12, s13),
        verdict=_verdict_from_eigenvalues(eigs),
        governing_conditions=[
            ("predation_lt_conversion", params.a < params.e),
            ("stock_sat_lt_scaled_effort_sat", params.m2 < params.rho * params.p * params.m1),
            ("hurwitz_product_positive", s11 * s12 - s13 > 0.0),
            ("routh_hurwitz_stable", routh_hurwitz_cubic(s11, s12, s13) == "stable"),
        ],
    )


@dataclass
class LyapunovRegionCheck:
    """Pointwise domain-of-attraction test around E3.

    ``in_region`` is True when both inequalities hold; within that region
    the time derivative of the logarithmic Lyapunov function is
    nonpositive by construction.  ``dV_dt`` is returned for any strictly
    positive state, inside the region or not.
    """

    in_region: bool
    dV_dt: float
    population_floor_ok: bool
    population_total: float
    population_floor: float
    pressure_ratio_ok: bool
    pressure_ratio: float
    pressure_floor: float
    weights: tuple[float, float, float]


def lyapunov_region_check(params: ModelParams, s: SysState) -> LyapunovRegionCheck:
    """Evaluate the sign-definite region and dV/dt for the weighted
    logarithmic Lyapunov function centred at E3.

    The two inequalities are ``a*y{*}/(x{*}+y{*}) < x + y`` and
    ``(m1*E + m2*y)/(x + y) > q*m*m2*E{*}*(x{*}+y{*}) /
    (e*x{*}*(m1*E{*}+m2*y{*}))``.  The orientation of the second follows
    from the derivative expansion: it makes the predator-deviation
    coefficient nonnegative, so both inequalities together force
    dV/dt <= 0.  Weights: ``l1 = 1``, ``l2 = a*x{*}/(e*y{*})``,
    ``l3 = a*m2*x{*}/(rho*e*p*m1*E{*})`` (these cancel the cross terms).
    """
    e3 = interior_equilibrium(params)
    if not e3.exists:
        raise MissingEquilibriumError("E3 does not exist; no region to check")
    x, y, E = s
    if not (x > 0.0 and y > 0.0 and E > 0.0):
        raise ValueError("Lyapunov check requires a strictly positive state")
    xs, ys, Es = e3.coords
    l1 = 1.0
    l2 = params.a * xs / (params.e * ys)
    l3 = params.a * params.m2 * xs / (params.rho * params.e * params.p * params.m1 * Es)

    floor1 = params.a * ys / (xs + ys)
    total = x + y
    ok1 = floor1 < total

    ratio = (params.m1 * E + params.m2 * y) / total
    floor2 = (
        params.q * params.m * params.m2 * Es * (xs + ys)
        / (params.e * xs * (params.m1 * Es + params.m2 * ys))
    )
    ok2 = ratio > floor2

    f = vector_field(params, s)
    dv = (
        l1 * (x - xs) / x * f[0]
        + l2 * (y - ys) / y * f[1]
        + l3 * (E - Es) / E * f[2]
    )
    return LyapunovRegionCheck(
        in_region=ok1 and ok2,
        dV_dt=dv,
        population_floor_ok=ok1,
        population_total=total,
        population_floor=floor1,
        pressure_ratio_ok=ok2,
        pressure_ratio=ratio,
        pressure_floor=floor2,
        weights=(l1, l2, l3),
    )


@dataclass
class PersistenceReport:
    """Long-run survival test: neither population approaches extinction.

    Requires the predator to be viable (``e > d``) and harvesting to be
    profitable enough (``p/c > m2/(q*m)``).  ``y_bar = e/d - 1`` bounds the
    predator density and ``effort_bound = (p*q*m - c*m2)*y_bar/(c*m1)``
    bounds the effort.
    """

    conversion_exceeds_death: bool
    price_cost_ratio_ok: bool
    persistent: bool
    y_bar: float
    effort_bound: float


def persistence_check(params: ModelParams) -> PersistenceReport:
    conv = params.e > params.d
    price = params.p / params.c > params.m2 / (params.q * params.m) if params.m > 0 else False
    y_bar = params.e / params.d - 1.0
    effort_bound = (
        (params.p * params.q * params.m - params.c * params.m2) * y_bar / (params.c * params.m1)
    )
    return PersistenceReport(
        conversion_exceeds_death=conv,
        price_cost_ratio_ok=price,
        persistent=conv and price,
        y_bar=y_bar,
        effort_bound=effort_bound,
    )


def persistence_threshold_m(params: ModelParams) -> Fraction:
    """Exact harvest-fraction threshold ``c*m2/(p*q)`` above which the
    price/cost clause of the persistence test holds.

    Computed with rational arithmetic on the decimal representations of
    the parameters, so decimal inputs give an exact threshold.
    """
    return (
        Fraction(str(params.c)) * Fraction(str(params.m2))
        / (Fraction(str(params.p)) * Fraction(str(params.q)))
    )
