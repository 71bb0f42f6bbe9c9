"""Trajectory integration, attractor classification and basin sampling.

The integrator is an explicit embedded Cash-Karp 4(5) pair with
proportional-integral step-size control.  Two behaviors are specific to
this model and preserve its invariant structure:

* components that undershoot zero by less than ``abs_tol`` are clamped
  back to 0 (the axes are invariant manifolds of the exact flow); a worse
  undershoot aborts, since it indicates an integrator fault rather than
  roundoff;
* integration terminates with a flag, instead of producing non-finite
  values, when the state enters the near-singular guard band of the
  original field (approach to the origin or to the ``y = E = 0`` axis
  with both components positive).

A fixed-step classic Runge-Kutta mode is available for strict
reproducibility studies.  All entry points are pure per call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .equilibria import all_original_equilibria
from .model import (
    ModelParams,
    SysState,
    dissipation_bound,
    dissipation_weight,
    near_singular,
    vector_field,
)
from .stability import persistence_check

__all__ = [
    "IntegrationError",
    "IntegrationMeta",
    "Trajectory",
    "integrate",
    "AttractorVerdict",
    "CycleStats",
    "classify_attractor",
    "BasinSampleResult",
    "basin_sample",
    "BoundednessReport",
    "boundedness_monitor",
    "PersistenceWitness",
    "persistence_witness",
]


class IntegrationError(RuntimeError):
    """Raised on non-finite derivatives, step underflow or a positivity fault."""


# Cash-Karp tableau; the fifth-order solution is propagated and the
# embedded fourth-order difference provides the local error estimate.
_C = (0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
_B5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_B4 = (2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


@dataclass
class IntegrationMeta:
    """Bookkeeping attached to a trajectory."""

    abs_tol: float
    rel_tol: float
    max_step: float
    n_accepted: int = 0
    n_rejected: int = 0
    n_clamped: int = 0
    terminated_early: bool = False
    termination_reason: str | None = None
    positivity_violation: bool = False
    bound_violation: bool = False


@dataclass
class Trajectory:
    """Time-stamped solution samples at the accepted steps."""

    times: np.ndarray
    states: np.ndarray
    meta: IntegrationMeta

    @property
    def final_state(self) -> SysState:
        return SysState(*self.states[-1])

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def tail(self, fraction: float = 0.2) -> tuple[np.ndarray, np.ndarray]:
        """The samples in the last ``fraction`` of the covered time span."""
        t0, t1 = self.times[0], self.times[-1]
        cut = t1 - fraction * (t1 - t0)
        mask = self.times >= cut
        return self.times[mask], self.states[mask]


def _try_field(params: ModelParams, s: tuple[float, float, float]):
    """Field evaluation that reports trouble instead of raising mid-stage."""
    try:
        f = vector_field(params, SysState(*s))
    except ValueError:
        return None
    if not (math.isfinite(f[0]) and math.isfinite(f[1]) and math.isfinite(f[2])):
        return None
    return f


def _clamp(state: list[float], abs_tol: float, meta: IntegrationMeta) -> None:
    for i in range(3):
        v = state[i]
        if v < 0.0:
            if v <= -abs_tol:
                meta.positivity_violation = True
                raise IntegrationError(
                    f"component {i} reached {v:.3e}, below the -abs_tol clamp band"
                )
            state[i] = 0.0
            meta.n_clamped += 1


def _initial_step(params, s0, f0, t_end, rel_tol, abs_tol, max_step):
    scale = max(abs(s0[0]), abs(s0[1]), abs(s0[2]), 1e-3)
    rate = max(abs(f0[0]), abs(f0[1]), abs(f0[2]), 1e-8)
    h = min(0.01 * scale / rate, 0.1 * t_end, max_step)
    return max(h, 1e-8)


def integrate(
    params: ModelParams,
    s0: SysState,
    t_end: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-11,
    max_step: float = math.inf,
    fixed_step: float | None = None,
) -> Trajectory:
    """Integrate the original system from ``s0`` over ``[0, t_end]``.

    Parameters
    ----------
    rel_tol, abs_tol : float
        Per-component mixed error tolerances of the embedded pair.
    max_step : float
        Upper bound on the step size.
    fixed_step : float, optional
        When given, a classic fourth-order fixed-step scheme is used with
        exactly this step (final step shortened), bypassing adaptivity.

    Raises
    ------
    IntegrationError
        On non-finite derivatives at the initial state, step-size
        underflow, or a component dropping below ``-abs_tol``.
    ValueError
        If ``s0`` is negative or already inside the singular guard band.
    """
    s0 = SysState(*(float(v) for v in s0))
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    if min(s0) < 0.0:
        raise ValueError(f"initial state must be nonnegative, got {s0}")
    if near_singular(params, s0):
        raise ValueError(f"initial state {s0} lies in the singular guard band")

    meta = IntegrationMeta(abs_tol=abs_tol, rel_tol=rel_tol, max_step=max_step)
    times = [0.0]
    states = [list(s0)]

    if fixed_step is not None:
        _run_fixed(params, t_end, fixed_step, times, states, meta)
    else:
        _run_adaptive(params, t_end, rel_tol, abs_tol, max_step, times, states, meta)

    traj = Trajectory(np.asarray(times), np.asarray(states), meta)
    mu, M = dissipation_bound(params)
    w = traj.states @ np.array([1.0, params.a / params.e, params.a / (params.rho * params.e * params.p)])
    envelope = max(float(w[0]), M / mu) + 1e-6
    meta.bound_violation = bool(np.any(w > envelope))
    return traj


def _run_adaptive(params, t_end, rel_tol, abs_tol, max_step, times, states, meta):
    t = 0.0
    y = list(states[0])
    f = _try_field(params, tuple(y))
    if f is None:
        raise IntegrationError(f"non-finite derivative at the initial state {tuple(y)}")
    h = _initial_step(params, y, f, t_end, rel_tol, abs_tol, max_step)
    err_prev = 1.0
    k = [f, None, None, None, None, None]

    while t < t_end:
        h = min(h, t_end - t, max_step)
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t:.6g}")

        failed_stage = False
        for i in range(1, 6):
            ai = _A[i]
            yi = [
                y[j] + h * sum(ai[l] * k[l][j] for l in range(i))
                for j in range(3)
            ]
            ki = _try_field(params, tuple(yi))
            if ki is None:
                failed_stage = True
                break
            k[i] = ki
        if failed_stage:
            h *= 0.5
            meta.n_rejected += 1
            continue

        y_new = [
            y[j] + h * (_B5[0] * k[0][j] + _B5[2] * k[2][j] + _B5[3] * k[3][j] + _B5[5] * k[5][j])
            for j in range(3)
        ]
        err2 = 0.0
        for j in range(3):
            e_j = h * sum(_E[l] * k[l][j] for l in range(6))
            sc = abs_tol + rel_tol * max(abs(y[j]), abs(y_new[j]))
            err2 += (e_j / sc) ** 2
        err = math.sqrt(err2 / 3.0)

        if err <= 1.0:
            t += h
            y = y_new
            _clamp(y, abs_tol, meta)
            times.append(t)
            states.append(list(y))
            meta.n_accepted += 1
            if near_singular(params, SysState(*y)):
                meta.terminated_early = True
                meta.termination_reason = "entered near-singular guard band"
                return
            f = _try_field(params, tuple(y))
            if f is None:
                meta.terminated_early = True
                meta.termination_reason = "derivative unavailable after clamping"
                return
            k[0] = f
            factor = 0.9 * (err + 1e-16) ** -0.14 * (err_prev + 1e-16) ** 0.08
            err_prev = err
            h *= min(5.0, max(0.2, factor))
        else:
            meta.n_rejected += 1
            h *= min(1.0, max(0.1, 0.9 * err ** -0.2))


def _run_fixed(params, t_end, dt, times, states, meta):
    if dt <= 0.0:
        raise ValueError("fixed_step must be positive")
    n_full = int(math.floor(t_end / dt + 1e-12))
    remainder = t_end - n_full * dt
    plan = [dt] * n_full + ([remainder] if remainder > 1e-12 * dt else [])
    y = list(states[0])
    t = 0.0
    for i, h in enumerate(plan):
        k1 = _try_field(params, tuple(y))
        if k1 is None:
            raise IntegrationError(f"non-finite derivative at t={t:.6g}")
        y2 = [y[j] + 0.5 * h * k1[j] for j in range(3)]
        k2 = _try_field(params, tuple(y2))
        y3 = [y[j] + 0.5 * h * k2[j] for j in range(3)] if k2 else None
        k3 = _try_field(params, tuple(y3)) if y3 else None
        y4 = [y[j] + h * k3[j] for j in range(3)] if k3 else None
        k4 = _try_field(params, tuple(y4)) if y4 else None
        if k4 is None:
            raise IntegrationError(f"non-finite stage derivative at t={t:.6g}")
        y = [
            y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            for j in range(3)
        ]
        t = (i + 1) * dt if i < n_full else t_end
        _clamp(y, meta.abs_tol, meta)
        times.append(t)
        states.append(list(y))
        meta.n_accepted += 1
        if near_singular(params, SysState(*y)):
            meta.terminated_early = True
            meta.termination_reason = "entered near-singular guard band"
            return


@dataclass
class CycleStats:
    """Period and per-component peak-to-peak amplitude of an oscillation."""

    period: float
    amplitudes: tuple[float, float, float]


@dataclass
class AttractorVerdict:
    """Where a trajectory ends up.

    ``kind`` is an equilibrium identifier when the whole tail window stays
    within ``match_radius`` of that state, "limit_cycle" for a sustained
    oscillation, "undecided" otherwise.  ``distance`` is the final
    distance to the matched equilibrium (NaN when there is none).
    """

    kind: str
    distance: float
    cycle_stats: CycleStats | None = None


def classify_attractor(
    params: ModelParams,
    traj: Trajectory,
    match_radius: float = 1e-3,
    tail_fraction: float = 0.2,
) -> AttractorVerdict:
    """Match the trajectory tail against the existing equilibria.

    The tail is the last ``tail_fraction`` of the covered time span.  A
    state matches when every tail sample lies within ``match_radius`` of
    it (interior state checked first).  With no match, a sustained
    oscillation (peak-to-peak above ``10 * match_radius`` in some
    component) is reported as a limit cycle, with the period estimated
    from successive prey maxima; otherwise the verdict is undecided.
    """
    tail_t, tail_s = traj.tail(tail_fraction)
    if len(tail_t) == 0:
        return AttractorVerdict(kind="undecided", distance=float("nan"))

    candidates = [r for r in all_original_equilibria(params) if r.exists]
    order = {"E3": 0, "E2": 1, "E1": 2, "E0": 3}
    for report in sorted(candidates, key=lambda r: order[r.kind]):
        target = np.asarray(report.coords)
        dists = np.linalg.norm(tail_s - target, axis=1)
        if float(dists.max()) < match_radius:
            return AttractorVerdict(kind=report.kind, distance=float(dists[-1]))

    spans = tail_s.max(axis=0) - tail_s.min(axis=0)
    if float(spans.max()) > 10.0 * match_radius:
        x = tail_s[:, 0]
        peaks = [
            i for i in range(1, len(x) - 1)
            if x[i - 1] < x[i] and x[i] > x[i + 1]
        ]
        if len(peaks) >= 2:
            period = float(np.diff(tail_t[peaks]).mean())
            stats = CycleStats(period=period, amplitudes=tuple(float(v) for v in spans))
            return AttractorVerdict(kind="limit_cycle", distance=float("nan"), cycle_stats=stats)
    return AttractorVerdict(kind="undecided", distance=float("nan"))


@dataclass
class BasinSampleResult:
    """Initial conditions with their attractor verdicts, plus tallies."""

    samples: list[tuple[SysState, AttractorVerdict]]
    counts: dict[str, int] = field(default_factory=dict)


def basin_sample(
    params: ModelParams,
    box: tuple[tuple[float, float], tuple[float, float], tuple[float, float]],
    n: int,
    t_end: float,
    seed: int = 0,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-11,
    match_radius: float = 1e-3,
) -> BasinSampleResult:
    """Classify the fate of ``n`` low-discrepancy initial conditions in ``box``.

    Sampling uses a Halton sequence: seed 0 selects the canonical
    unscrambled sequence (a fixed, evenly covering point set), any other
    seed applies Owen scrambling with that seed.  Either way the same
    (seed, box, n) is bit-reproducible.  Per-point integration failures
    are recorded as "undecided" rather than aborting the sweep.  Points
    may be distributed across workers; results are keyed by sample index,
    so assembly order never affects the outcome.
    """
    lows = np.array([b[0] for b in box], dtype=float)
    highs = np.array([b[1] for b in box], dtype=float)
    if np.any(lows <= 0.0) or np.any(highs < lows):
        raise ValueError("box must lie in the strictly positive orthant and be ordered")
    if seed == 0:
        engine = qmc.Halton(d=3, scramble=False)
    else:
        engine = qmc.Halton(d=3, scramble=True, seed=seed)
    points = lows + engine.random(n) * (highs - lows)

    samples: list[tuple[SysState, AttractorVerdict]] = []
    counts: dict[str, int] = {}
    for row in points:
        s0 = SysState(*(float(v) for v in row))
        try:
            traj = integrate(params, s0, t_end, rel_tol=rel_tol, abs_tol=abs_tol)
            verdict = classify_attractor(params, traj, match_radius=match_radius)
        except (IntegrationError, ValueError):
            verdict = AttractorVerdict(kind="undecided", distance=float("nan"))
        samples.append((s0, verdict))
        counts[verdict.kind] = counts.get(verdict.kind, 0) + 1
    return BasinSampleResult(samples=samples, counts=counts)


@dataclass
class BoundednessReport:
    """Check of the dissipation envelope along a trajectory.

    The weighted total ``W = x + (a/e)y + a*E/(rho*e*p)`` must stay below
    ``max(W(0), M/mu) + 1e-6`` with ``mu = 0.5*min(d, c*rho)`` and
    ``M = (1+mu)^2/4``.
    """

    mu: float
    M: float
    w_initial: float
    w_max: float
    envelope: float
    satisfied: bool


def boundedness_monitor(params: ModelParams, traj: Trajectory) -> BoundednessReport:
    mu, M = dissipation_bound(params)
    w = np.array([
        dissipation_weight(params, SysState(*s)) for s in traj.states
    ])
    w0 = float(w[0])
    envelope = max(w0, M / mu) + 1e-6
    w_max = float(w.max())
    return BoundednessReport(
        mu=mu,
        M=M,
        w_initial=w0,
        w_max=w_max,
        envelope=envelope,
        satisfied=w_max <= envelope,
    )


@dataclass
class PersistenceWitness:
    """Numerical witness that no component approaches extinction.

    ``applicable`` is False when the analytic persistence test fails; the
    trajectory fields are then absent.  An initial state with a component
    exactly on an invariant axis keeps that component at zero, so the
    witness fails trivially there.
    """

    applicable: bool
    reason: str | None
    tail_minima: tuple[float, float, float] | None
    witnessed: bool


def persistence_witness(
    params: ModelParams,
    s0: SysState,
    t_end: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-11,
    tail_fraction: float = 0.2,
) -> PersistenceWitness:
    report = persistence_check(params)
    if not report.persistent:
        return PersistenceWitness(
            applicable=False,
            reason="analytic persistence conditions fail",
            tail_minima=None,
            witnessed=False,
        )
    traj = integrate(params, s0, t_end, rel_tol=rel_tol, abs_tol=abs_tol)
    _, tail_s = traj.tail(tail_fraction)
    minima = tuple(float(v) for v in tail_s.min(axis=0))
    return PersistenceWitness(
        applicable=True,
        reason=None,
        tail_minima=minima,
        witnessed=all(v > 0.0 for v in minima),
    )
