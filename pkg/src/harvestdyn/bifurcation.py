"""Hopf detection in the harvest fraction and the (c, d) region map.

The coexistence state loses stability through a pair of complex
eigenvalues when the Hurwitz product ``Delta(m) = s11*s12 - s13`` of its
characteristic cubic crosses zero with ``s11, s12 > 0``.  The numeric
scan recomputes the equilibrium and the exact cubic at every grid point
and is the default detector.  The frozen-coefficient quadratic treats
``a1``, ``b1`` and ``x*`` as constants of the reference fraction, so it is
only locally valid and is exposed for comparison.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .equilibria import interior_equilibrium, interior_existence_range
from .model import ModelParams, jacobian
from .stability import (
    MissingEquilibriumError,
    classify_E2,
    classify_E3,
    classify_origin,
    classify_E1,
    cubic_terms_from_jacobian,
)

__all__ = [
    "HopfResult",
    "RegionLabel",
    "RegionGrid",
    "BoundaryLine",
    "cubic_terms_at_interior",
    "cubic_terms_closed_form",
    "hopf_m_star_analytic",
    "hopf_scan",
    "region_classify",
    "region_grid",
    "overlay_lines",
]


@dataclass
class HopfResult:
    """Outcome of a Hopf search over the harvest fraction.

    ``m_star`` is absent when no admissible crossing was found; ``reason``
    says why.  ``delta_values`` holds the sampled ``(m, Delta(m))`` pairs
    and ``transversality`` the slope of Delta at the crossing (nonzero at
    a genuine Hopf point).
    """

    m_star: float | None
    method: str
    delta_values: list[tuple[float, float]] = field(default_factory=list)
    transversality: float | None = None
    reason: str | None = None
    conditions: dict[str, bool] = field(default_factory=dict)
    quadratic: tuple[float, float, float] | None = None


def cubic_terms_at_interior(params: ModelParams) -> tuple[float, float, float]:
    """(s11, s12, s13) of the characteristic cubic at E3, from the Jacobian."""
    e3 = interior_equilibrium(params)
    if not e3.exists:
        raise MissingEquilibriumError("E3 does not exist for these parameters")
    return cubic_terms_from_jacobian(jacobian(params, e3.coords, "original"))


def cubic_terms_closed_form(params: ModelParams) -> tuple[float, float, float]:
    """(s11, s12, s13) from the closed-form expressions in ``a1``, ``b1``.

    ``a1 = a*e*x*y/(x+y)^2`` and ``b1 = rho*p*q*m1*m2*y*E/(m1*E+m2*y)^2``
    evaluated at E3.  Used as an independent route for cross-checking the
    matrix computation.
    """
    e3 = interior_equilibrium(params)
    if not e3.exists:
        raise MissingEquilibriumError("E3 does not exist for these parameters")
    xs, ys, Es = e3.coords
    a, e, m, m1, m2, p, rho = (
        params.a, params.e, params.m, params.m1, params.m2, params.p, params.rho,
    )
    a1 = a * e * xs * ys / (xs + ys) ** 2
    b1 = rho * p * params.q * m1 * m2 * ys * Es / (m1 * Es + m2 * ys) ** 2
    s11 = xs + a1 * (e - a) / (a * e) + m * b1 * (rho * p * m1 - m2) / (rho * p * m1 * m2)
    s12 = (
        a1 * xs / a
        + m * a1 * b1 * (e - a) / (e * a * m2)
        + m * b1 * xs * (rho * p * m1 - m2) / (rho * p * m1 * m2)
        + m * a1 * b1 / (rho * p * m1 * e)
    )
    s13 = m * a1 * b1 * xs / (a * m2)
    return s11, s12, s13


def hopf_m_star_analytic(params: ModelParams, m_ref: float) -> HopfResult:
    """Frozen-coefficient quadratic root for the Hopf fraction.

    With ``a1``, ``b1`` and ``x*`` frozen at ``m_ref``, the Hurwitz product
    is the quadratic ``Delta(m) = C1*m^2 + C2*m + C3``.  When ``C1 < 0``
    and the discriminant is nonnegative the negative-branch root
    ``(-C2 - sqrt(C2^2 - 4*C1*C3))/(2*C1)`` is returned; otherwise the
    result is absent with the failing condition recorded.  The side
    conditions ``a < e`` and ``m2 < rho*p*m1`` (under which C2, C3 > 0 and
    the branch selection is justified) are recorded but not enforced.
    """
    e3 = interior_equilibrium(params.replace(m=m_ref))
    if not e3.exists:
        raise MissingEquilibriumError(f"E3 does not exist at m_ref={m_ref}")
    xs, ys, Es = e3.coords
    a, e, m1, m2, p, rho = params.a, params.e, params.m1, params.m2, params.p, params.rho
    a1 = a * e * xs * ys / (xs + ys) ** 2
    b1 = rho * p * params.q * m1 * m2 * ys * Es / (m1 * Es + m2 * ys) ** 2
    pm = rho * p * m1 - m2
    C1 = (
        -a1 * b1 * b1 * pm * pm / (rho * rho * m1 * m1 * m2 * m2 * p * p * e)
        + b1 * b1 * xs * pm * pm / (rho * rho * m1 * m1 * m2 * m2 * p * p)
        + a1 * b1 * b1 * pm / (rho * p * m1 * m2 * m2 * a)
    )
    C2 = (
        2.0 * a1 * b1 * xs * (e - a) * pm / (rho * p * m1 * m2 * a * e)
        + b1 * xs * xs * pm / (rho * p * m1 * m2)
        + a1 * a1 * b1 * (e - a) / (rho * p * m1 * a * e * e)
        + a1 * a1 * b1 * (e - a) ** 2 / (e * e * a * a * m2)
    )
    C3 = a1 * xs * xs / a + a1 * a1 * xs * (e - a) / (e * a * a)
    conditions = {
        "predation_lt_conversion": a < e,
        "stock_sat_lt_scaled_effort_sat": m2 < rho * p * m1,
        "leading_coefficient_negative": C1 < 0.0,
    }
    disc = C2 * C2 - 4.0 * C1 * C3
    conditions["discriminant_nonnegative"] = disc >= 0.0
    result = HopfResult(
        m_star=None,
        method="analytic_quadratic",
        conditions=conditions,
        quadratic=(C1, C2, C3),
    )
    if C1 >= 0.0:
        result.reason = "leading coefficient C1 is nonnegative; negative-branch root undefined"
        return result
    if disc < 0.0:
        result.reason = "discriminant negative; quadratic has no real root"
        return result
    root = (-C2 - math.sqrt(disc)) / (2.0 * C1)
    result.m_star = root
    result.transversality = 2.0 * C1 * root + C2
    return result


def hopf_scan(
    params: ModelParams,
    m_lo: float,
    m_hi: float,
    steps: int = 200,
    refine_tol: float = 1e-10,
) -> HopfResult:
    """Locate a Hopf crossing of ``Delta(m) = s11*s12 - s13`` by grid scan
    plus bisection.

    The interior equilibrium and the exact cubic terms are recomputed at
    every grid fraction.  The bracket is first intersected with the range
    where the coexistence state exists: a non-existence sliver at either
    end is clipped off (the clipped bracket is recorded), while a
    disappearance strictly between existing fractions is an error carrying
    the failing fraction.  A crossing qualifies only where ``s11 > 0`` and
    ``s12 > 0`` on both sides (so the cubic has a complex pair on the
    imaginary axis, not a real root through zero).  Bisection refines
    until ``|Delta| < refine_tol``; the transversality slope is estimated
    by a central difference.

    Raises
    ------
    MissingEquilibriumError
        If E3 exists nowhere in the bracket, or ceases to exist strictly
        inside it.
    """
    if not (0.0 < m_lo < m_hi <= 1.0):
        raise ValueError("bracket must satisfy 0 < m_lo < m_hi <= 1")
    try:
        lo_ex, hi_ex = interior_existence_range(params, m_lo, m_hi, probes=steps + 1)
    except ValueError as exc:
        raise MissingEquilibriumError(str(exc)) from None
    # keep strictly inside: the equilibrium (and its Jacobian) degenerate
    # on the existence boundary itself
    margin = 1e-9 * max(1.0, hi_ex - lo_ex)
    lo_ex += margin
    hi_ex -= margin

    def terms(m: float) -> tuple[float, float, float]:
        try:
            return cubic_terms_at_interior(params.replace(m=float(m)))
        except MissingEquilibriumError as exc:
            raise MissingEquilibriumError(
                f"E3 ceases to exist inside the bracket at m={float(m):.6g}"
            ) from exc

    ms = np.linspace(lo_ex, hi_ex, steps + 1)
    samples = [terms(m) for m in ms]
    deltas = [s11 * s12 - s13 for s11, s12, s13 in samples]
    result = HopfResult(
        m_star=None,
        method="numeric_scan",
        delta_values=list(zip((float(m) for m in ms), deltas)),
    )
    result.conditions["bracket_clipped"] = (lo_ex > m_lo + margin) or (hi_ex < m_hi - margin)

    bracket = None
    for i in range(len(ms) - 1):
        d0, d1 = deltas[i], deltas[i + 1]
        if d0 == 0.0 or d0 * d1 < 0.0:
            ok_left = samples[i][0] > 0.0 and samples[i][1] > 0.0
            ok_right = samples[i + 1][0] > 0.0 and samples[i + 1][1] > 0.0
            if ok_left and ok_right:
                bracket = (float(ms[i]), float(ms[i + 1]), d0, d1)
                break
    if bracket is None:
        result.reason = "no sign change of the Hurwitz product with s11, s12 > 0"
        return result

    lo, hi, f_lo, _ = bracket
    m_star = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        s11, s12, s13 = terms(mid)
        f_mid = s11 * s12 - s13
        m_star = mid
        if abs(f_mid) < refine_tol:
            break
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid

    h = max(1e-7, 1e-7 * m_star)
    s_lo = terms(m_star - h)
    s_hi = terms(m_star + h)
    slope = ((s_hi[0] * s_hi[1] - s_hi[2]) - (s_lo[0] * s_lo[1] - s_lo[2])) / (2.0 * h)
    s11, s12, _ = terms(m_star)
    result.m_star = m_star
    result.transversality = slope
    result.conditions.update({"s11_positive": s11 > 0.0, "s12_positive": s12 > 0.0})
    return result


@dataclass
class RegionLabel:
    """Label of one point of the existence/stability map.

    The label is decided by a fixed-order decision list over the
    predicates: E1 stable -> I; E0 stable alone -> II; E0 stable with E3
    existing -> III; E3 existing -> IV; E0 and E2 stable -> V; E2 stable
    -> VI; otherwise "none".
    """

    label: str
    predicates: dict[str, bool] = field(default_factory=dict)


def region_classify(params: ModelParams, c: float, d: float) -> RegionLabel:
    """Classify the point ``(c, d)`` of the cost/death-rate plane.

    The base parameters are overridden with the given ``c`` and ``d`` and
    the label follows from direct evaluation of the stability and
    existence predicates, not from any line geometry.
    """
    if not (c > 0.0 and d > 0.0):
        raise ValueError("c and d must be positive")
    local = params.replace(c=c, d=d)
    e0_stable = classify_origin(local).stable
    e1_stable = classify_E1(local).stable
    e3_exists = interior_equilibrium(local).exists
    try:
        with warnings.catch_warnings():
            # the cross-check disagreement note is per-point noise in a sweep;
            # the verdict object still records it
            warnings.simplefilter("ignore", UserWarning)
            e2_stable = classify_E2(local).stable
    except MissingEquilibriumError:
        e2_stable = False
    predicates = {
        "E0_stable": e0_stable,
        "E1_stable": e1_stable,
        "E2_stable": e2_stable,
        "E3_exists": e3_exists,
    }
    if e1_stable:
        label = "I"
    elif e0_stable and not e3_exists and not e2_stable:
        label = "II"
    elif e0_stable and e3_exists:
        label = "III"
    elif e3_exists:
        label = "IV"
    elif e0_stable and e2_stable:
        label = "V"
    elif e2_stable:
        label = "VI"
    else:
        label = "none"
    return RegionLabel(label=label, predicates=predicates)


@dataclass
class RegionGrid:
    """Row-major grid of region labels over the (c, d) plane.

    ``labels[i][j]`` corresponds to ``(c_values[j], d_values[i])``.
    Every cell is an independent pure evaluation, so grids may be computed
    in any order or split across workers and reassembled by index.
    """

    c_values: list[float]
    d_values: list[float]
    labels: list[list[RegionLabel]]

    def rows(self):
        """Yield flat (c, d, label) triples in row-major order."""
        for i, d in enumerate(self.d_values):
            for j, c in enumerate(self.c_values):
                yield c, d, self.labels[i][j].label


def region_grid(
    params: ModelParams,
    c_range: tuple[float, float],
    d_range: tuple[float, float],
    nx: int,
    ny: int,
) -> RegionGrid:
    """Evaluate :func:`region_classify` on an ``nx`` x ``ny`` grid."""
    if nx < 1 or ny < 1:
        raise ValueError("grid resolutions must be at least 1")
    if not (0.0 < c_range[0] <= c_range[1] and 0.0 < d_range[0] <= d_range[1]):
        raise ValueError("ranges must be positive and ordered")
    cs = [float(v) for v in np.linspace(c_range[0], c_range[1], nx)]
    ds = [float(v) for v in np.linspace(d_range[0], d_range[1], ny)]
    labels = [[region_classify(params, c, d) for c in cs] for d in ds]
    return RegionGrid(c_values=cs, d_values=ds, labels=labels)


@dataclass
class BoundaryLine:
    """A straight line of the (c, d) map, for plot overlay only.

    ``kind`` is "affine" (d = slope*c + intercept), "horizontal"
    (d = value) or "vertical" (c = value).  The coefficients reproduce the
    published overlay exactly and carry no classification weight.
    """

    name: str
    kind: str
    slope: float = 0.0
    intercept: float = 0.0
    value: float = 0.0
    description: str = ""


def overlay_lines(params: ModelParams) -> list[BoundaryLine]:
    """Boundary lines of the (c, d) region map, as published.

    Four lines of slope ``rho`` mark where the cost margin ``rho*c - d``
    or the growth margin ``e + rho*c - d`` meets the harvest-rate and
    effort-growth ceilings; two shallow lines have slope ``m2/(p*m1)``;
    three horizontals and one vertical complete the set.  Two of the
    intercepts (``shallow2`` and ``horizontal2``) could not be re-derived
    from the stability conditions and are reproduced verbatim.
    """
    a, e, m, m1, m2, p, q, rho = (
        params.a, params.e, params.m, params.m1, params.m2, params.p, params.q, params.rho,
    )
    h = m * q / m1
    g = rho * p * m * q / m2
    shallow = m2 / (p * m1)
    r2_disc = e * e - 4.0 * e * e * (e + a) * (1.0 - a)
    r2 = (e * e + math.sqrt(r2_disc)) / (2.0 * (e + a)) if r2_disc >= 0.0 else float("nan")
    return [
        BoundaryLine("diag1", "affine", slope=rho, intercept=e - h,
                     description="growth margin equals harvest-rate ceiling"),
        BoundaryLine("diag2", "affine", slope=rho, intercept=-h,
                     description="cost margin equals harvest-rate ceiling"),
        BoundaryLine("diag3", "affine", slope=rho, intercept=e - g,
                     description="growth margin equals effort-growth ceiling"),
        BoundaryLine("diag4", "affine", slope=rho, intercept=-g,
                     description="cost margin equals effort-growth ceiling"),
        BoundaryLine("shallow1", "affine", slope=shallow, intercept=(m1 * e - m * q) / (p * m1)),
        BoundaryLine(
            "shallow2", "affine", slope=shallow,
            intercept=((a - 1.0) * (rho * p * m * q - m2) - p * m * q) / (p * m1),
            description="reproduced verbatim; not re-derivable from the stability conditions",
        ),
        BoundaryLine("horizontal1", "horizontal", value=e,
                     description="death rate equals conversion efficiency"),
        BoundaryLine("horizontal2", "horizontal", value=r2,
                     description="reproduced verbatim; not re-derivable from the stability conditions"),
        BoundaryLine("horizontal3", "horizontal", value=e * (a - 1.0) / a,
                     description="effort-free shortfall boundary"),
        BoundaryLine("vertical1", "vertical", value=p * m * q / m2,
                     description="effort entry profitability boundary"),
    ]
