"""Mean-field theory of guided sampling from a mixture of M Gaussians.

Target: a homogeneous mixture of M = exp(beta * d) isotropic Gaussians with
per-mode variance sigma^2 and standard-normal centroids, conditioned on one
mode c1.  In the large-d limit the guided backward process is driven by a
piecewise quadratic effective potential with two phases:

* guided phase -- the drift feels the whole sea of modes through the
  log-partition of exponentially many overlap terms; the well centre sits
  beyond c1 and its width is narrowed by positive guidance;
* conditional phase -- mode c1 dominates the marginal, the drift reduces to
  the plain conditional score and the process relaxes to the true target.

The phase switch happens when beta + zeta_t changes sign, where zeta_t is the
per-coordinate cumulant generating function of the mode overlaps evaluated
along the mean trajectory.  The switch time t_s ("speciation time") seeds the
conditional phase; distortion at sampling time t=0 is summarised by

    delta_mu      = c1 . (mean(0) - c1) / d        (mean shift along c1)
    delta_sigma2  = (var(0) - sigma^2) / sigma^2   (relative variance change)

By isotropy the d-dimensional moments reduce to a scalar pair
(mean_coeff a(t), variance s^2(t)) with mean(t) = a(t) * c1.

Conventions fixed by exactly solvable limits (see the test suite):
* zeta_t is evaluated on the mean path, q1 = (a-1)^2, q2 = a^2 with
  |c1|^2/d = 1.  This reproduces the closed-form switch time of the
  linear-ramp sanity schedule and the large-t asymptote
  zeta_t ~ -(1+w)/t exactly; including the per-coordinate variance in
  q1/q2 would break both.
* the guided-branch variance estimator subtracts (sigma^2 + t), forced by
  the w = 0 identity (unguided conditional diffusion has variance exactly
  sigma^2 + t, so delta_sigma2 must vanish at every t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .joint_gaussian import Lambda_coeff_linear, lambda_coeff_linear
from .schedule import Constant, GuidanceSchedule, Linear
from .special_math import QuadratureSettings, bisection_root

__all__ = [
    "GUIDED",
    "CONDITIONAL",
    "MixtureTheoryParams",
    "GuidedMoments",
    "DistortionReport",
    "zeta",
    "zeta_prime",
    "zeta_typical",
    "typical_overlaps",
    "speciation_time",
    "condensation_lambda",
    "guided_phase_moments",
    "conditional_phase_moments",
    "assemble_trajectory",
    "delta_estimators_constant",
    "guided_moments_linear_schedule",
    "delta_estimators_linear",
    "sanity_schedule_speciation",
    "potential_minimum_and_width",
]

GUIDED = "guided"
CONDITIONAL = "conditional"

# Root scans bracket sign changes on a log grid before bisecting.
_SCAN_LO = 1e-6
_SCAN_HI = 1e8
_SCAN_POINTS = 400


@dataclass(frozen=True)
class MixtureTheoryParams:
    """Mean-field control parameters of the mixture target."""

    sigma2: float  # per-mode variance
    beta: float  # class-density exponent log(M)/d
    schedule: GuidanceSchedule

    def __post_init__(self) -> None:
        if not (self.sigma2 > 0):
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")
        if self.beta < 0:
            raise DomainError(f"beta must be >= 0, got {self.beta}")


@dataclass(frozen=True)
class GuidedMoments:
    """Reduced trajectory state: mean = mean_coeff * c1, isotropic variance."""

    t: float
    mean_coeff: float
    variance: float
    phase: str

    def __post_init__(self) -> None:
        if self.variance < 0:
            raise DomainError(f"variance must be >= 0, got {self.variance}")
        if self.phase not in (GUIDED, CONDITIONAL):
            raise DomainError(f"unknown phase label {self.phase!r}")


@dataclass(frozen=True)
class DistortionReport:
    """Distortion of the sampled law at t = 0, plus the phase bookkeeping.

    ``t_speciation`` is None when the process never leaves the guided phase
    (no transition: distortion persists) and math.inf when the transition
    happens beyond any finite time (always conditional: zero distortion).
    """

    delta_mu: float
    delta_sigma2: float
    t_speciation: Optional[float]
    phase_at_zero: str


# ---------------------------------------------------------------------------
# Overlap cumulant generating function and its derivative
# ---------------------------------------------------------------------------


def zeta(t: float, lam: float, sigma2: float, q1: float, q2: float) -> float:
    """Per-coordinate log-MGF of the mode-overlap energies at position x.

    q1 = lim |x - c1|^2 / d and q2 = lim |x|^2 / d locate x;
    zeta = lam*q1/(2g) - log(1 + lam/g)/2 - lam*q2/(2(g+lam)), g = sigma2 + t.
    """
    g = sigma2 + t
    if g <= 0 or g + lam <= 0:
        raise DomainError(f"need sigma2+t > 0 and sigma2+t+lam > 0, got g={g}, lam={lam}")
    return (
        lam * q1 / (2.0 * g)
        - 0.5 * math.log1p(lam / g)
        - lam * q2 / (2.0 * (g + lam))
    )


def zeta_prime(t: float, lam: float, sigma2: float, q1: float, q2: float) -> float:
    """d zeta / d lam at fixed (q1, q2)."""
    g = sigma2 + t
    if g <= 0 or g + lam <= 0:
        raise DomainError(f"need sigma2+t > 0 and sigma2+t+lam > 0, got g={g}, lam={lam}")
    return q1 / (2.0 * g) - 0.5 / (g + lam) - g * q2 / (2.0 * (g + lam) ** 2)


def typical_overlaps(t: float, sigma2: float, w: float) -> tuple[float, float]:
    """(q1, q2) on the mean guided path: q1 = (a-1)^2, q2 = a^2, |c1|^2/d = 1."""
    a = _guided_mean_coeff(t, sigma2, w)
    return (a - 1.0) ** 2, a * a


def zeta_typical(t: float, sigma2: float, w: float) -> float:
    """zeta at unit tilt along the typical guided trajectory.

    Tends to -(1+w)/t at large t, so the switch time diverges like (1+w)/beta
    when the class density beta vanishes.
    """
    q1, q2 = typical_overlaps(t, sigma2, w)
    return zeta(t, 1.0, sigma2, q1, q2)


# ---------------------------------------------------------------------------
# Phase boundaries
# ---------------------------------------------------------------------------


def speciation_time(params: MixtureTheoryParams) -> Optional[float]:
    """Backward time where the guided phase hands over to the conditional one.

    Solves beta + zeta_typical(t) = 0 by a descending sign scan over a log
    grid on (1e-6, 1e8) followed by bisection in log t.  Returns None when
    beta + zeta stays positive on the whole grid (no transition), and
    math.inf when it is negative even at the largest grid time (the process
    is conditional before any finite time; zero distortion).
    """
    if not isinstance(params.schedule, Constant):
        raise DomainError("speciation_time is defined for constant schedules")
    w = params.schedule.w
    beta = params.beta

    def f(t: float) -> float:
        return beta + zeta_typical(t, params.sigma2, w)

    grid = np.geomspace(_SCAN_LO, _SCAN_HI, _SCAN_POINTS)
    values = [f(t) for t in grid]
    if values[-1] <= 0.0:
        return math.inf
    for k in range(len(grid) - 2, -1, -1):
        if values[k] <= 0.0:
            if values[k] == 0.0:
                return float(grid[k])
            x = bisection_root(
                lambda y: f(math.exp(y)),
                math.log(grid[k]),
                math.log(grid[k + 1]),
                1e-13,
            )
            return math.exp(x)
    return None


def condensation_lambda(
    t: float, sigma2: float, beta: float, q2: float
) -> Optional[float]:
    """Tilt threshold above which a single mode would dominate the overlap sum.

    Root of beta - log(1+lam/g)/2 + lam/(2(g+lam)) * (1 - lam*q2/(g+lam));
    diagnostic only: trajectories with i.i.d. centroids must keep the root
    above 1 whenever the guided branch is active (the single-mode-dominated
    regime is never entered).  Returns None when no bracket exists on
    (1e-6, 1e8), 0.0 for beta = 0 (the condition vanishes at lam = 0).
    """
    if beta < 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    if beta == 0.0:
        return 0.0
    g = sigma2 + t

    def f(lam: float) -> float:
        return (
            beta
            - 0.5 * math.log1p(lam / g)
            + lam / (2.0 * (g + lam)) * (1.0 - lam * q2 / (g + lam))
        )

    grid = np.geomspace(_SCAN_LO, _SCAN_HI, _SCAN_POINTS)
    prev_t, prev_v = grid[0], f(grid[0])
    if prev_v <= 0.0:
        return float(prev_t) if prev_v == 0.0 else None
    for lam in grid[1:]:
        v = f(lam)
        if v <= 0.0:
            if v == 0.0:
                return float(lam)
            x = bisection_root(
                lambda y: f(math.exp(y)), math.log(prev_t), math.log(lam), 1e-13
            )
            return math.exp(x)
        prev_t, prev_v = lam, v
    return None


# ---------------------------------------------------------------------------
# Piecewise closed-form moments (constant guidance)
# ---------------------------------------------------------------------------


def _guided_mean_coeff(t: float, sigma2: float, w: float) -> float:
    # a(t) = g^(1+w) h^-w [ (1 + 1/g)^(1+w) - 1 ],  g = sigma2+t, h = g+1
    g = sigma2 + t
    ell = math.log1p(1.0 / g)
    return g * math.exp(-w * ell) * math.expm1((1.0 + w) * ell)


def _guided_variance(t: float, sigma2: float, w: float) -> float:
    # s^2(t) = g^(2w+2) h^-2w [ (1 + 1/g)^(2w+1) - 1 ] / (2w+1)
    g = sigma2 + t
    ell = math.log1p(1.0 / g)
    return g * g * math.exp(-2.0 * w * ell) * math.expm1((2.0 * w + 1.0) * ell) / (2.0 * w + 1.0)


def guided_phase_moments(
    t: float,
    T: float,
    sigma2: float,
    w: float,
    init: Optional[GuidedMoments] = None,
) -> GuidedMoments:
    """Closed-form moments in the guided phase for constant guidance w.

    With T = math.inf the horizon terms drop and ``init`` is ignored (the
    noise prior is forgotten); with a finite horizon the trajectory is seeded
    by ``init`` at time T.
    """
    if t < 0 or t > T:
        raise DomainError(f"need 0 <= t <= T, got t={t}, T={T}")
    if math.isinf(T):
        if w <= -0.5:
            raise DomainError(f"horizon -> inf requires w > -1/2, got {w}")
        return GuidedMoments(
            t=t,
            mean_coeff=_guided_mean_coeff(t, sigma2, w),
            variance=_guided_variance(t, sigma2, w),
            phase=GUIDED,
        )
    if init is None:
        raise DomainError("finite horizon integration requires an init state")
    g_t, g_T = sigma2 + t, sigma2 + T
    ell_t, ell_T = math.log1p(1.0 / g_t), math.log1p(1.0 / g_T)
    decay = (g_t / g_T) ** (1.0 + w) * math.exp(w * (ell_T - ell_t))
    drive = (
        g_t
        * math.exp(-w * ell_t + (1.0 + w) * ell_T)
        * math.expm1((1.0 + w) * (ell_t - ell_T))
    )
    noise = (
        g_t
        * g_t
        * math.exp(-2.0 * w * ell_t + (2.0 * w + 1.0) * ell_T)
        * math.expm1((2.0 * w + 1.0) * (ell_t - ell_T))
        / (2.0 * w + 1.0)
        if w != -0.5
        else g_t * g_t * math.exp(-2.0 * w * ell_t) * (ell_t - ell_T)
    )
    return GuidedMoments(
        t=t,
        mean_coeff=decay * init.mean_coeff + drive,
        variance=decay * decay * init.variance + noise,
        phase=GUIDED,
    )


def conditional_phase_moments(
    t: float, t_start: float, sigma2: float, init: GuidedMoments
) -> GuidedMoments:
    """Closed-form moments in the conditional phase, seeded at t_start.

    a(t) = (g_t/g_s) a(t_start) + (t_start - t)/g_s ;
    s^2(t) = (g_t/g_s)^2 s^2(t_start) + (t_start - t) g_t/g_s.
    The exact conditional marginal (a = 1, s^2 = sigma2 + t) is a fixed point.
    """
    if t > t_start:
        raise DomainError(f"need t <= t_start, got t={t}, t_start={t_start}")
    g_t, g_s = sigma2 + t, sigma2 + t_start
    ratio = g_t / g_s
    return GuidedMoments(
        t=t,
        mean_coeff=ratio * init.mean_coeff + (t_start - t) / g_s,
        variance=ratio * ratio * init.variance + (t_start - t) * ratio,
        phase=CONDITIONAL,
    )


def assemble_trajectory(
    params: MixtureTheoryParams, t_grid: list[float]
) -> tuple[list[GuidedMoments], DistortionReport]:
    """Piecewise trajectory: guided from the infinite horizon down to
    max(0, t_s), then conditional to 0; distortion measured at t = 0."""
    if not isinstance(params.schedule, Constant):
        raise DomainError("assemble_trajectory takes a constant schedule")
    if any(t < 0 for t in t_grid):
        raise DomainError("t_grid times must be >= 0")
    if any(b < a for a, b in zip(t_grid, t_grid[1:])):
        raise DomainError("t_grid must be sorted ascending")
    w = params.schedule.w
    sigma2 = params.sigma2
    t_s = speciation_time(params)
    seed = None
    if t_s is not None and math.isfinite(t_s):
        seed = guided_phase_moments(t_s, math.inf, sigma2, w)

    def at(t: float) -> GuidedMoments:
        if t_s is None or (math.isfinite(t_s) and t >= t_s):
            return guided_phase_moments(t, math.inf, sigma2, w)
        if math.isinf(t_s):
            # Conditional from the start: the exact marginal at every time.
            return GuidedMoments(t=t, mean_coeff=1.0, variance=sigma2 + t, phase=CONDITIONAL)
        return conditional_phase_moments(t, t_s, sigma2, seed)

    trajectory = [at(t) for t in t_grid]
    zero = at(0.0)
    report = DistortionReport(
        delta_mu=zero.mean_coeff - 1.0,
        delta_sigma2=(zero.variance - sigma2) / sigma2,
        t_speciation=t_s,
        phase_at_zero=zero.phase,
    )
    return trajectory, report


def delta_estimators_constant(
    t: float, sigma2: float, w: float, t_s: Optional[float]
) -> tuple[float, float]:
    """Distortion pair (delta_mu, delta_sigma2) at time t for constant w.

    Guided branch for t above the switch time (or when there is none),
    conditional branch seeded at t_s below it; delta_sigma2 is relative to
    the conditional variance sigma^2 + t.
    """
    if t_s is None or (math.isfinite(t_s) and t >= t_s):
        m = guided_phase_moments(t, math.inf, sigma2, w)
    elif math.isinf(t_s):
        return 0.0, 0.0
    else:
        seed = guided_phase_moments(t_s, math.inf, sigma2, w)
        m = conditional_phase_moments(t, t_s, sigma2, seed)
    return m.mean_coeff - 1.0, (m.variance - (sigma2 + t)) / (sigma2 + t)


# ---------------------------------------------------------------------------
# Linear (ramped) schedules, guided-only regime
# ---------------------------------------------------------------------------


def guided_moments_linear_schedule(
    t: float,
    sigma2: float,
    sched: Linear,
    settings: QuadratureSettings = QuadratureSettings(),
) -> GuidedMoments:
    """Horizon -> inf guided moments under w(t) = w0 + omega*t.

    The guided-phase drift coincides with the jointly-Gaussian case at
    eigenvalue pair (s, r) = (sigma2, sigma2 + 1), so the incomplete-Beta
    machinery is reused with that pair; valid in the guided-only regime
    (class density large enough that no phase switch occurs).
    """
    if sched.omega == 0.0:
        return guided_phase_moments(t, math.inf, sigma2, sched.w0)
    a = lambda_coeff_linear(sigma2, sigma2 + 1.0, sched, t, settings)
    big = Lambda_coeff_linear(sigma2, sigma2 + 1.0, sched, t, settings)
    return GuidedMoments(t=t, mean_coeff=a, variance=(sigma2 + t) * big, phase=GUIDED)


def delta_estimators_linear(
    t: float,
    sigma2: float,
    sched: Linear,
    settings: QuadratureSettings = QuadratureSettings(),
) -> tuple[float, float]:
    """Distortion pair at time t under a linear schedule (guided-only regime).

    Here delta_sigma2 is the absolute variance deviation s^2(t) - (sigma2+t),
    not the relative one used on the constant-guidance path: the solvable
    linear-ramp benchmark pins the pair (delta_mu, delta_sigma2)(0) to
    (sigma2, (1-2*sigma2)/3), which fixes this normalisation.
    """
    m = guided_moments_linear_schedule(t, sigma2, sched, settings)
    return m.mean_coeff - 1.0, m.variance - (sigma2 + t)


def sanity_schedule_speciation(sigma2: float, beta: float) -> Optional[float]:
    """Closed-form switch time for the solvable ramp w0 = sigma2-1, omega = 1.

    t_s = 1/(exp(2*beta - 1) - 1) - sigma2 for beta > 1/2; None otherwise
    (for beta <= 1/2 the process stays conditional: zero distortion), and
    None as well when the closed form lands at or below zero.
    """
    if beta < 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    if beta <= 0.5:
        return None
    t_s = 1.0 / math.expm1(2.0 * beta - 1.0) - sigma2
    return t_s if t_s > 0.0 else None


def potential_minimum_and_width(
    t: float, sigma2: float, w: float
) -> tuple[float, float]:
    """Centre coefficient and squared width of the guided-phase well.

    centre = (1+w)(g+1)/(w+g+1) (times c1), width^2 = g(g+1)/(g+1+w) with
    g = sigma2 + t: positive w pushes the centre beyond c1 and narrows the
    well below the conditional variance g.
    """
    g = sigma2 + t
    denom = w + g + 1.0
    if denom <= 0:
        raise DomainError("w + sigma2 + t + 1 must be positive")
    return (1.0 + w) * (g + 1.0) / denom, g * (g + 1.0) / denom
