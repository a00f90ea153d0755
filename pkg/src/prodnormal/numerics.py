"""Adaptive quadrature, bracketed root finding, and finite differences.

The quadrature is a global-adaptive Gauss-Kronrod 7/15 scheme: the worst
panel (by embedded-rule error estimate) is bisected until the summed error
estimate meets the tolerance.  Known singular points can be declared so the
initial panels break there; the Kronrod nodes are strictly interior, so
endpoint-integrable singularities (log, |x|^-s with s < 1) are never
evaluated directly.

Integrands are called with a numpy array of nodes and must return an array
of the same shape.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

# 15-point Kronrod nodes on [-1, 1] (positive half) with Kronrod weights,
# and the embedded 7-point Gauss weights (QUADPACK dqk15 constants).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 ascending nodes
_WEIGHTS_K = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss points sit at the odd-indexed Kronrod nodes.
_WEIGHTS_G = np.zeros(15)
_WEIGHTS_G[1:14:2] = [_WG[0], _WG[1], _WG[2], _WG[3], _WG[2], _WG[1], _WG[0]]

_MAX_DEPTH = 60
_MAX_EVALS = 10**6


class QuadratureError(RuntimeError):
    """Raised when the adaptive scheme exhausts its budget above tolerance."""


class BracketError(ValueError):
    """Raised when a root bracket does not actually straddle a sign change."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def _panel(f, a: float, b: float):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    y = np.asarray(f(center + half * _NODES), dtype=float)
    i_k = half * float(np.dot(_WEIGHTS_K, y))
    i_g = half * float(np.dot(_WEIGHTS_G, y))
    return i_k, abs(i_k - i_g)


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float,
    singular_points: Iterable[float] = (),
) -> QuadratureResult:
    """Integrate f over [a, b] to absolute tolerance tol.

    ``singular_points`` lists interior locations where the integrand has an
    integrable singularity or a kink; initial panels are cut there.
    """
    a = float(a)
    b = float(b)
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    if tol <= 0.0:
        raise ValueError("tol must be positive")

    cuts = sorted({a, b, *(float(p) for p in singular_points if a < float(p) < b)})
    heap = []
    counter = 0
    evaluations = 0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        value, err = _panel(f, lo, hi)
        evaluations += 15
        heapq.heappush(heap, (-err, counter, lo, hi, value, err, 0))
        counter += 1

    frozen_value = 0.0
    frozen_error = 0.0
    while True:
        live_error = sum(item[5] for item in heap)
        if frozen_error + live_error <= tol or not heap:
            value = frozen_value + sum(item[4] for item in heap)
            return QuadratureResult(value, frozen_error + live_error, evaluations)
        _, _, lo, hi, value, err, depth = heapq.heappop(heap)
        if depth >= _MAX_DEPTH:
            # Cannot subdivide further; bank this panel and keep going.
            frozen_value += value
            frozen_error += err
            if frozen_error > tol and not heap:
                raise QuadratureError(
                    f"quadrature stalled at depth {_MAX_DEPTH} with error "
                    f"{frozen_error:.3e} > tol {tol:.3e}"
                )
            continue
        if evaluations + 30 > _MAX_EVALS:
            raise QuadratureError(
                f"quadrature exceeded {_MAX_EVALS} evaluations with error above "
                f"tol {tol:.3e}"
            )
        mid = 0.5 * (lo + hi)
        v1, e1 = _panel(f, lo, mid)
        v2, e2 = _panel(f, mid, hi)
        evaluations += 30
        heapq.heappush(heap, (-e1, counter, lo, mid, v1, e1, depth + 1))
        counter += 1
        heapq.heappush(heap, (-e2, counter, mid, hi, v2, e2, depth + 1))
        counter += 1


def real_line_halfwidth(decay_rate: float, tol: float) -> float:
    """Truncation half-width used by integrate_real_line."""
    if decay_rate <= 0.0:
        raise ValueError("decay_rate must be positive")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    return (-math.log(tol * 1e-2) + 40.0) / decay_rate


def integrate_real_line(
    f: Callable[[np.ndarray], np.ndarray],
    center: float,
    decay_rate: float,
    tol: float,
) -> QuadratureResult:
    """Integrate f over the whole line, truncated using a decay bound.

    The caller certifies |f(x)| <= C exp(-decay_rate |x - center|) far from
    ``center``; the integral is truncated to ``center +- L`` with
    ``L = (-ln(tol * 1e-2) + 40) / decay_rate`` and split at 0 and at
    ``center`` (the usual kink locations for the densities handled here).
    """
    center = float(center)
    half = real_line_halfwidth(decay_rate, tol)
    lo = center - half
    hi = center + half
    return integrate_adaptive(f, lo, hi, tol, singular_points=(0.0, center))


def find_root_bracketed(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float,
) -> float:
    """Root of g on [lo, hi] by bisection with secant acceleration.

    Requires g(lo) and g(hi) of opposite (or zero) sign.  Terminates when the
    bracket width falls below xtol; at most 200 iterations.
    """
    lo = float(lo)
    hi = float(hi)
    if xtol <= 0.0:
        raise ValueError("xtol must be positive")
    if lo >= hi:
        raise ValueError("need lo < hi")
    g_lo = float(g(lo))
    g_hi = float(g(hi))
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if g_lo * g_hi > 0.0:
        raise BracketError(
            f"g({lo}) = {g_lo:.6g} and g({hi}) = {g_hi:.6g} have the same sign"
        )

    for iteration in range(200):
        if hi - lo <= xtol:
            break
        # Try a secant step on every other iteration; it must land strictly
        # inside the bracket, otherwise bisect (which guarantees progress).
        x = None
        if iteration % 2 == 0 and g_hi != g_lo:
            candidate = hi - g_hi * (hi - lo) / (g_hi - g_lo)
            margin = 0.01 * (hi - lo)
            if lo + margin < candidate < hi - margin:
                x = candidate
        if x is None:
            x = 0.5 * (lo + hi)
        g_x = float(g(x))
        if g_x == 0.0:
            return x
        if g_lo * g_x < 0.0:
            hi, g_hi = x, g_x
        else:
            lo, g_lo = x, g_x
    return 0.5 * (lo + hi)


def finite_diff_derivatives(
    f: Callable[[float], float], x: float, h: float
) -> tuple[float, float]:
    """Central-difference first and second derivatives, O(h^2) accurate."""
    if h <= 0.0:
        raise ValueError("h must be positive")
    f_plus = float(f(x + h))
    f_minus = float(f(x - h))
    f_mid = float(f(x))
    f1 = (f_plus - f_minus) / (2.0 * h)
    f2 = (f_plus - 2.0 * f_mid + f_minus) / (h * h)
    return f1, f2
