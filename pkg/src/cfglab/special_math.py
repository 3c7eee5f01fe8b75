"""Shared numerical kernels.

Self-contained implementations (no external special-function dependency) of

* adaptive Gauss-Kronrod (G7/K15) quadrature with local error control,
* definite incomplete Beta integrals  int_{f1}^{f2} r^(a-1) (1-r)^(b-1) dr,
  including exponents a <= 0 (only with f1 > 0) and endpoint regularisation
  by change of variable when 0 < a < 1 or 0 < b < 1,
* improper integrals on [lo, inf) via tail-bound truncation,
* bracketed bisection root finding,
* overflow-safe log-sum-exp.

All functions are pure; the module holds no mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Callable, Sequence

from .errors import BracketError, ConvergenceError, DomainError

__all__ = [
    "QuadratureSettings",
    "BetaArgs",
    "adaptive_quad",
    "improper_quad",
    "incomplete_beta_definite",
    "bisection_root",
    "log_sum_exp",
]


@dataclass(frozen=True)
class QuadratureSettings:
    """Error-control knobs for the adaptive integrators."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class BetaArgs:
    """Arguments of a definite incomplete Beta integral on [f1, f2]."""

    a: float
    b: float
    f1: float
    f2: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.f1 <= self.f2 <= 1.0):
            raise DomainError(f"need 0 <= f1 <= f2 <= 1, got f1={self.f1}, f2={self.f2}")
        if self.f1 == 0.0 and self.a <= 0.0:
            raise DomainError("a <= 0 requires a strictly positive lower limit f1")
        if self.f2 == 1.0 and self.b <= 0.0:
            raise DomainError("b <= 0 requires an upper limit f2 < 1")
        for name in ("a", "b", "f1", "f2"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")


# 15-point Kronrod extension of 7-point Gauss on [-1, 1].
# Columns: node, Gauss-7 weight (zero on Kronrod-only nodes), Kronrod-15 weight.
_G7K15 = (
    (+0.991455371120813, 0.000000000000000, 0.022935322010529),
    (-0.991455371120813, 0.000000000000000, 0.022935322010529),
    (+0.949107912342759, 0.129484966168870, 0.063092092629979),
    (-0.949107912342759, 0.129484966168870, 0.063092092629979),
    (+0.864864423359769, 0.000000000000000, 0.104790010322250),
    (-0.864864423359769, 0.000000000000000, 0.104790010322250),
    (+0.741531185599394, 0.279705391489277, 0.140653259715525),
    (-0.741531185599394, 0.279705391489277, 0.140653259715525),
    (+0.586087235467691, 0.000000000000000, 0.169004726639267),
    (-0.586087235467691, 0.000000000000000, 0.169004726639267),
    (+0.405845151377397, 0.381830050505119, 0.190350578064785),
    (-0.405845151377397, 0.381830050505119, 0.190350578064785),
    (+0.207784955007898, 0.000000000000000, 0.204432940075298),
    (-0.207784955007898, 0.000000000000000, 0.204432940075298),
    (0.000000000000000, 0.417959183673469, 0.209482141084728),
)


def _gk15(f: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
    """One G7/K15 panel on [lo, hi]; returns (K15 estimate, error estimate)."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    g7 = 0.0
    k15 = 0.0
    for node, wg, wk in _G7K15:
        fx = f(mid + half * node)
        g7 += wg * fx
        k15 += wk * fx
    diff = abs(k15 - g7)
    # QUADPACK-style sharpened estimate, never reported below the raw gap scale.
    err = half * min(diff, (200.0 * diff) ** 1.5 if diff < 1.0 else diff)
    return half * k15, max(err, half * abs(k15) * 1e-16)


def adaptive_quad(
    integrand: Callable[[float], float],
    lo: float,
    hi: float,
    settings: QuadratureSettings = QuadratureSettings(),
) -> float:
    """Globally adaptive G7/K15 integration of ``integrand`` on [lo, hi].

    The interval with the largest error estimate is bisected until the summed
    error drops below max(abs_tol, rel_tol * |integral|).
    """
    if not (lo <= hi):
        raise DomainError(f"need lo <= hi, got [{lo}, {hi}]")
    if lo == hi:
        return 0.0
    val, err = _gk15(integrand, lo, hi)
    # Heap of (-error, lo, hi, value); counter breaks ties deterministically.
    heap: list[tuple[float, int, float, float, float]] = [(-err, 0, lo, hi, val)]
    total_val, total_err = val, err
    n_panels = 1
    tick = 1
    while total_err > max(settings.abs_tol, settings.rel_tol * abs(total_val)):
        if n_panels >= settings.max_subdivisions:
            raise ConvergenceError(
                f"quadrature needs more than {settings.max_subdivisions} panels "
                f"(error estimate {total_err:.3e} on [{lo}, {hi}])"
            )
        neg_err, _, a, b, v = heappop(heap)
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            # Interval saturated at float resolution; keep its estimate as is.
            heappush(heap, (0.0, tick, a, b, v))
            total_err += neg_err  # drop this panel's error from the budget
            tick += 1
            continue
        v1, e1 = _gk15(integrand, a, m)
        v2, e2 = _gk15(integrand, m, b)
        total_val += v1 + v2 - v
        total_err += e1 + e2 + neg_err
        heappush(heap, (-e1, tick, a, m, v1))
        heappush(heap, (-e2, tick + 1, m, b, v2))
        tick += 2
        n_panels += 1
    return total_val


def improper_quad(
    integrand: Callable[[float], float],
    lo: float,
    settings: QuadratureSettings = QuadratureSettings(),
    tail_bound: Callable[[float], float] | None = None,
) -> float:
    """Integrate ``integrand`` on [lo, inf) by truncating where the tail is small.

    ``tail_bound(T)`` must bound |int_T^inf integrand|; the cut T is doubled from
    max(1, 2*lo) until the bound drops below abs_tol.  The finite part is then
    integrated on a log-transformed axis so wide ranges stay cheap.
    """
    if tail_bound is None:
        raise DomainError("improper_quad requires an analytic tail bound")
    t_max = max(1.0, 2.0 * abs(lo), 2.0 * lo)
    for _ in range(200):
        if tail_bound(t_max) < settings.abs_tol:
            break
        t_max *= 2.0
    else:
        raise ConvergenceError("tail bound never fell below abs_tol")
    if lo >= t_max:
        return 0.0
    # Log substitution needs a positive start; integrate [lo, start] directly.
    start = max(lo, 1e-8)
    head = adaptive_quad(integrand, lo, start, settings) if start > lo else 0.0
    body = adaptive_quad(
        lambda y: integrand(math.exp(y)) * math.exp(y),
        math.log(start),
        math.log(t_max),
        settings,
    )
    return head + body


def incomplete_beta_definite(
    args: BetaArgs, settings: QuadratureSettings = QuadratureSettings()
) -> float:
    """Definite incomplete Beta integral int_{f1}^{f2} r^(a-1) (1-r)^(b-1) dr.

    Integrable endpoint singularities (0 < a < 1 at r=0, 0 < b < 1 at r=1) are
    removed exactly by the substitutions r = v^(1/a) and 1-r = v^(1/b); the
    remaining integrands are bounded and handled by ``adaptive_quad``.
    """
    a, b, f1, f2 = args.a, args.b, args.f1, args.f2
    if f1 == f2:
        return 0.0

    def integrand(r: float) -> float:
        return r ** (a - 1.0) * (1.0 - r) ** (b - 1.0)

    # Split at 1/2 so each endpoint is treated by the piece that owns it.
    mid = 0.5
    pieces: list[float] = []
    left_hi = min(f2, mid)
    if f1 < left_hi:
        if f1 == 0.0 and a < 1.0:
            # r = v**(1/a):  dr r^(a-1) = dv / a
            inv_a = 1.0 / a
            pieces.append(
                adaptive_quad(
                    lambda v: (1.0 - v**inv_a) ** (b - 1.0) / a,
                    0.0,
                    left_hi**a,
                    settings,
                )
            )
        else:
            pieces.append(adaptive_quad(integrand, f1, left_hi, settings))
    right_lo = max(f1, mid)
    if right_lo < f2:
        u_hi = 1.0 - right_lo
        u_lo = 1.0 - f2
        if u_lo == 0.0 and b < 1.0:
            # 1-r = v**(1/b):  dr (1-r)^(b-1) = dv / b
            inv_b = 1.0 / b
            pieces.append(
                adaptive_quad(
                    lambda v: (1.0 - v**inv_b) ** (a - 1.0) / b,
                    0.0,
                    u_hi**b,
                    settings,
                )
            )
        else:
            pieces.append(
                adaptive_quad(
                    lambda u: (1.0 - u) ** (a - 1.0) * u ** (b - 1.0),
                    u_lo,
                    u_hi,
                    settings,
                )
            )
    return math.fsum(pieces)


def bisection_root(
    g: Callable[[float], float], lo: float, hi: float, tol: float
) -> float:
    """Bisection on a sign-changing bracket; stops when the bracket is <= tol."""
    if not (lo < hi):
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    if tol <= 0:
        raise DomainError("tol must be positive")
    g_lo = g(lo)
    g_hi = g(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: g={g_lo:.3e}, {g_hi:.3e}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # float resolution reached
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def log_sum_exp(values: Sequence[float]) -> float:
    """log(sum(exp(v_i))), shifted by the maximum so it never overflows.

    -inf entries are allowed and ignored; an all--inf input returns -inf.
    """
    vals = list(values)
    if not vals:
        raise DomainError("log_sum_exp of an empty sequence")
    m = max(vals)
    if m == -math.inf:
        return -math.inf
    return m + math.log(math.fsum(math.exp(v - m) for v in vals))
