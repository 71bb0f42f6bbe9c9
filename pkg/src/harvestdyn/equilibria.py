"""Closed-form equilibria and machine-checkable existence predicates.

Every equilibrium of the original and transformed systems has a closed
form; no root-finding is performed.  Each report carries a trace of the
inequalities that were checked, with their numeric values, so a caller
can always answer "why does this state (not) exist here".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .model import (
    ModelParams,
    SysState,
    BlowupState,
    PartialBlowupState,
    blowup_field,
    partial_blowup_field,
    vector_field,
)

__all__ = [
    "ConditionCheck",
    "EquilibriumReport",
    "boundary_equilibria",
    "interior_equilibrium",
    "interior_closed_form",
    "blowup_equilibria",
    "partial_blowup_equilibria",
    "all_original_equilibria",
    "interior_existence_range",
    "verify_equilibrium",
]

#: Kinds expressed in original (x, y, E) coordinates.
ORIGINAL_KINDS = ("E0", "E1", "E2", "E3")
#: Kinds expressed in ratio coordinates (u, y, v).
BLOWUP_KINDS = ("E00", "E10", "E100")
#: Kinds expressed in mixed coordinates (x, y, w).
PARTIAL_KINDS = ("E01", "E001")


class ConditionCheck(NamedTuple):
    """One inequality of an existence predicate.

    Unless the id says otherwise, the condition reads ``left < right``;
    ``passed`` is authoritative either way.
    """

    condition_id: str
    left: float
    right: float
    passed: bool


@dataclass
class EquilibriumReport:
    """An equilibrium candidate with its existence verdict.

    ``coords`` are in the coordinate system of ``kind`` (``system`` names
    it).  When ``exists`` is true the corresponding field residual at
    ``coords`` is below 1e-10; :func:`verify_equilibrium` rechecks that.
    """

    kind: str
    coords: tuple[float, float, float]
    exists: bool
    condition_trace: list[ConditionCheck] = field(default_factory=list)

    @property
    def system(self) -> str:
        if self.kind in BLOWUP_KINDS:
            return "blowup"
        if self.kind in PARTIAL_KINDS:
            return "partial"
        return "original"

    def failed_conditions(self) -> list[ConditionCheck]:
        return [c for c in self.condition_trace if not c.passed]


def boundary_equilibria(params: ModelParams) -> list[EquilibriumReport]:
    """Reports for the extinction state E0, the prey-only state E1 and the
    effort-free state E2 of the original system.

    E0 and E1 exist unconditionally.  E2 = (x1, y1, 0) with
    ``x1 = 1 - a*(e-d)/e`` and ``y1 = (e-d)*x1/d`` requires the predator to
    be viable without harvesting (``e > d``) and, for ``a > 1``, the
    conversion efficiency to stay below the ratio-driven collapse cap
    ``a*d/(a-1)``.
    """
    a, e, d = params.a, params.e, params.d
    reports = [
        EquilibriumReport("E0", (0.0, 0.0, 0.0), True),
        EquilibriumReport("E1", (1.0, 0.0, 0.0), True),
    ]

    x1 = 1.0 - a * (e - d) / e
    y1 = (e - d) * x1 / d
    trace = [ConditionCheck("death_lt_conversion", d, e, d < e)]
    if a <= 1.0:
        trace.append(ConditionCheck("predation_rate_le_one", a, 1.0, True))
        exists = d < e
    else:
        cap = a * d / (a - 1.0)
        trace.append(ConditionCheck("predation_rate_le_one", a, 1.0, False))
        trace.append(ConditionCheck("conversion_lt_collapse_cap", e, cap, e < cap))
        exists = d < e < cap
    reports.append(EquilibriumReport("E2", (x1, y1, 0.0), exists, trace))
    return reports


def interior_closed_form(params: ModelParams) -> tuple[float, float, float]:
    """Raw closed-form coexistence point, without existence checks.

    ``x* = 1 - a + a*d/e + a*(p*q*m - c*m2)/(e*p*m1)``;
    ``y* = x*(1-x*)/(a+x*-1)``; ``E* = (p*q*m - c*m2)*y*/(c*m1)``.
    Outside the existence region the returned values may be negative or
    infinite; use :func:`interior_equilibrium` for a vetted report.
    """
    a, e, d = params.a, params.e, params.d
    margin = params.p * params.q * params.m - params.c * params.m2
    xs = 1.0 - a + a * d / e + a * margin / (e * params.p * params.m1)
    slope_den = a + xs - 1.0
    ys = xs * (1.0 - xs) / slope_den if slope_den != 0.0 else float("inf")
    Es = margin * ys / (params.c * params.m1)
    return xs, ys, Es


def interior_equilibrium(params: ModelParams) -> EquilibriumReport:
    """Report for the coexistence (bionomic) equilibrium E3.

    Existence requires the net revenue margin ``p*q*m - c*m2`` to be
    positive but below ``p*m1*(e-d)``, and additionally the biological
    admissibility clauses ``0 < x* < 1`` and ``a + x* - 1 > 0`` (the margin
    bounds alone do not force ``y* > 0`` in every parameter corner).
    """
    margin = params.p * params.q * params.m - params.c * params.m2
    cap = params.p * params.m1 * (params.e - params.d)
    xs, ys, Es = interior_closed_form(params)
    slope_den = params.a + xs - 1.0
    trace = [
        ConditionCheck("net_revenue_positive", 0.0, margin, 0.0 < margin),
        ConditionCheck("net_revenue_below_cap", margin, cap, margin < cap),
        ConditionCheck("prey_level_positive", 0.0, xs, 0.0 < xs),
        ConditionCheck("prey_level_below_capacity", xs, 1.0, xs < 1.0),
        ConditionCheck("slope_denominator_positive", 0.0, slope_den, 0.0 < slope_den),
    ]
    exists = all(c.passed for c in trace)
    return EquilibriumReport("E3", (xs, ys, Es), exists, trace)


def _same_sign_ratio(
    num: float, den: float, num_id: str, den_id: str
) -> tuple[float, bool, list[ConditionCheck]]:
    """Existence bookkeeping for ratios that must be positive.

    The ratio exists positively when numerator and denominator share a
    strict sign; an exactly-zero denominator is reported as non-existent
    under a dedicated condition id instead of raising.
    """
    if den == 0.0:
        return float("inf"), False, [ConditionCheck("degenerate_denominator", den, 0.0, False)]
    value = num / den
    branch_pos = num > 0.0 and den > 0.0
    branch_neg = num < 0.0 and den < 0.0
    trace = [
        ConditionCheck(num_id, 0.0, num, num > 0.0),
        ConditionCheck(den_id, 0.0, den, den > 0.0),
    ]
    return value, branch_pos or branch_neg, trace


def blowup_equilibria(params: ModelParams) -> list[EquilibriumReport]:
    """Reports for the boundary states of the ratio-transformed system.

    * E00 = (0, 0, 0) exists always.
    * E10 = (x_bar, 0, 0) with ``x_bar = (A - h)/(h - B)`` where
      ``h = m*q/m1``: exists when h lies strictly between A and B (either
      ordering).
    * E100 = (0, 0, E_bar) with
      ``E_bar = (m1*(rho*c - d) - m*q)/(rho*p*m*q - m2*(rho*c - d))``:
      exists when the net cost margin ``rho*c - d`` lies strictly between
      the harvest-rate ceiling ``m*q/m1`` and the effort-growth ceiling
      ``rho*p*m*q/m2`` (either ordering).
    """
    A, B = params.A, params.B
    h = params.max_harvest_rate
    g = params.max_effort_growth
    theta = params.rho * params.c - params.d

    reports = [EquilibriumReport("E00", (0.0, 0.0, 0.0), True)]

    x_bar, exists_10, _ = _same_sign_ratio(A - h, h - B, "", "")
    trace_10 = [
        ConditionCheck("harvest_rate_gt_A", A, h, A < h),
        ConditionCheck("harvest_rate_lt_B", h, B, h < B),
        ConditionCheck("harvest_rate_gt_B", B, h, B < h),
        ConditionCheck("harvest_rate_lt_A", h, A, h < A),
    ]
    if h - B == 0.0:
        trace_10 = [ConditionCheck("degenerate_denominator", h - B, 0.0, False)]
        exists_10 = False
    reports.append(
        EquilibriumReport("E10", (x_bar if exists_10 else float("nan"), 0.0, 0.0), exists_10, trace_10)
    )

    num = params.m1 * theta - params.m * params.q
    den = params.rho * params.p * params.m * params.q - params.m2 * theta
    if den == 0.0:
        trace_100: list[ConditionCheck] = [ConditionCheck("degenerate_denominator", den, 0.0, False)]
        exists_100 = False
        E_bar = float("nan")
    else:
        E_bar = num / den
        low_branch = 0.0 < g < theta < h
        high_branch = 0.0 < h < theta < g
        trace_100 = [
            ConditionCheck("effort_cap_lt_cost_margin", g, theta, g < theta),
            ConditionCheck("cost_margin_lt_harvest_rate", theta, h, theta < h),
            ConditionCheck("harvest_rate_lt_cost_margin", h, theta, h < theta),
            ConditionCheck("cost_margin_lt_effort_cap", theta, g, theta < g),
        ]
        exists_100 = low_branch or high_branch
        if not exists_100:
            E_bar = float("nan")
    reports.append(EquilibriumReport("E100", (0.0, 0.0, E_bar), exists_100, trace_100))
    return reports


def partial_blowup_equilibria(params: ModelParams) -> list[EquilibriumReport]:
    """Reports for the boundary states of the mixed-coordinate system.

    * E01 = (1, 0, 0) exists always.
    * E001 = (1, 0, w*) with
      ``w* = (m1*(e + rho*c - d) - m*q)/(rho*p*m*q - m2*(e + rho*c - d))``:
      exists when the predator-free growth margin ``e + rho*c - d`` lies
      strictly between ``m*q/m1`` and ``rho*p*m*q/m2`` (either ordering).
    """
    h = params.max_harvest_rate
    g = params.max_effort_growth
    k = params.e + params.rho * params.c - params.d

    reports = [EquilibriumReport("E01", (1.0, 0.0, 0.0), True)]

    num = params.m1 * k - params.m * params.q
    den = params.rho * params.p * params.m * params.q - params.m2 * k
    if den == 0.0:
        trace: list[ConditionCheck] = [ConditionCheck("degenerate_denominator", den, 0.0, False)]
        exists = False
        w_star = float("nan")
    else:
        w_star = num / den
        low_branch = 0.0 < h < k < g
        high_branch = 0.0 < g < k < h
        trace = [
            ConditionCheck("harvest_rate_lt_growth_margin", h, k, h < k),
            ConditionCheck("growth_margin_lt_effort_cap", k, g, k < g),
            ConditionCheck("effort_cap_lt_growth_margin", g, k, g < k),
            ConditionCheck("growth_margin_lt_harvest_rate", k, h, k < h),
        ]
        exists = low_branch or high_branch
        if not exists:
            w_star = float("nan")
    reports.append(EquilibriumReport("E001", (1.0, 0.0, w_star), exists, trace))
    return reports


def all_original_equilibria(params: ModelParams) -> list[EquilibriumReport]:
    """E0, E1, E2 and E3 reports in one list."""
    return boundary_equilibria(params) + [interior_equilibrium(params)]


def interior_existence_range(
    params: ModelParams, m_lo: float, m_hi: float, probes: int = 129
) -> tuple[float, float]:
    """Largest contiguous harvest-fraction range in ``[m_lo, m_hi]`` on which
    the coexistence state exists.

    The edges are located by bisection on the existence predicate.  Raises
    ``ValueError`` when the state exists nowhere in the bracket.
    """
    if not (m_lo < m_hi):
        raise ValueError("need m_lo < m_hi")
    step = (m_hi - m_lo) / (probes - 1)
    ms = [m_lo + i * step for i in range(probes)]
    alive = [interior_equilibrium(params.replace(m=m)).exists for m in ms]
    runs: list[tuple[int, int]] = []
    start = None
    for i, ok in enumerate(alive):
        if ok and start is None:
            start = i
        if not ok and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(ms) - 1))
    if not runs:
        raise ValueError(
            f"coexistence equilibrium exists nowhere on [{m_lo:.6g}, {m_hi:.6g}]"
        )
    s, t = max(runs, key=lambda r: r[1] - r[0])

    lo = ms[s]
    if s > 0:
        a, b = ms[s - 1], ms[s]
        for _ in range(60):
            mid = 0.5 * (a + b)
            if interior_equilibrium(params.replace(m=mid)).exists:
                b = mid
            else:
                a = mid
        lo = b
    hi = ms[t]
    if t < len(ms) - 1:
        a, b = ms[t], ms[t + 1]
        for _ in range(60):
            mid = 0.5 * (a + b)
            if interior_equilibrium(params.replace(m=mid)).exists:
                a = mid
            else:
                b = mid
        hi = a
    return lo, hi


def verify_equilibrium(params: ModelParams, report: EquilibriumReport) -> float:
    """Max-norm of the appropriate vector field at ``report.coords``.

    Serves as a universal oracle for the closed forms.  E0 is checked in
    ratio coordinates (the original field is undefined at the origin; the
    transform is the canonical representation there).  Singular-input
    errors from the field evaluation propagate.
    """
    if not report.exists:
        raise ValueError(f"equilibrium {report.kind} is flagged non-existent; nothing to verify")
    if report.kind == "E0":
        f = blowup_field(params, BlowupState(0.0, 0.0, 0.0))
    elif report.system == "blowup":
        f = blowup_field(params, BlowupState(*report.coords))
    elif report.system == "partial":
        f = partial_blowup_field(params, PartialBlowupState(*report.coords))
    else:
        f = vector_field(params, SysState(*report.coords))
    return max(abs(f[0]), abs(f[1]), abs(f[2]))
