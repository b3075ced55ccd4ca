"""Dormand-Prince 5(4) with PI step-size control and positivity-aware rejection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

# Continuous extension: y(t0 + s*h) = y0 + h * K^T (P @ [s, s^2, s^3, s^4]).
P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

SAFE = 0.9
FAC_MIN = 0.2  # largest shrink per step
FAC_MAX = 10.0  # largest growth per step
BETA = 0.04
EXPO1 = 0.2 - 0.75 * BETA
# Bound on h*rho, rho being the local stiffness estimate; the stability
# function has |R(-2)| ~ 0.17, so errors keep decaying near a stable point.
STIFF_CAP = 2.0


class InvalidState(Exception):
    """Raised by the right-hand side or validity check outside the domain."""


def _stages(f, t, y, h, k1):
    K = np.empty((7, y.size))
    K[0] = k1
    for s in range(1, 7):
        ys = y + h * (np.asarray(A[s]) @ K[:s])
        K[s] = f(t + C[s] * h, ys)
    return K


@dataclass
class DenseSegment:
    t0: float
    h: float
    y0: np.ndarray
    K: np.ndarray  # 7 x n stage derivatives

    def __call__(self, t: float) -> np.ndarray:
        s = (t - self.t0) / self.h
        return self.y0 + self.h * (self.K.T @ (P @ np.array([s, s * s, s**3, s**4])))


@dataclass
class Solution:
    t: np.ndarray
    y: np.ndarray
    status: str  # "t_end", "converged", "step_underflow", "max_steps"
    message: str
    nfev: int
    n_accepted: int
    n_rejected: int
    segments: Optional[List[DenseSegment]] = field(default=None, repr=False)

    def sol(self, t: float) -> np.ndarray:
        """Dense-output interpolant (needs ``dense=True``)."""
        if self.segments is None:
            raise ValueError("integration was run without dense output")
        starts = np.array([s.t0 for s in self.segments])
        i = int(np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(self.segments) - 1))
        return self.segments[i](t)


def _initial_step(f, t0, y0, f0, rtol, atol, max_step):
    sc = atol + np.abs(y0) * rtol
    d0 = np.linalg.norm(y0 / sc) / np.sqrt(y0.size)
    d1 = np.linalg.norm(f0 / sc) / np.sqrt(y0.size)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    return min(h0, max_step)


def dopri5(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0,
    t_end: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_step: float = np.inf,
    h0: Optional[float] = None,
    valid: Optional[Callable[[np.ndarray], bool]] = None,
    converge_atol: Optional[float] = None,
    converge_count: int = 5,
    dense: bool = False,
    max_steps: int = 1_000_000,
) -> Solution:
    """Adaptive integration from ``t0`` to ``t_end``.

    ``f`` may raise :class:`InvalidState` (or any ``ValueError``) at a stage
    outside the domain, and ``valid`` may veto a completed step; either
    rejects the step and halves ``h``. With ``converge_atol`` set the run
    stops once ``max|f| < converge_atol`` on ``converge_count`` consecutive
    accepted steps.
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    nfev = 0

    def call(tt, yy):
        nonlocal nfev
        nfev += 1
        out = f(tt, yy)
        if not np.all(np.isfinite(out)):
            raise InvalidState("non-finite derivative")
        return out

    k1 = call(t, y)
    h = _initial_step(f, t, y, k1, rtol, atol, max_step) if h0 is None else h0
    ts, ys = [t], [y.copy()]
    segments: Optional[List[DenseSegment]] = [] if dense else None
    facold = 1e-4
    calm = 0
    n_acc = n_rej = 0
    status, message = "t_end", ""
    while t < t_end:
        if n_acc + n_rej >= max_steps:
            status, message = "max_steps", f"step budget {max_steps} exhausted at t={t}"
            break
        h = min(h, max_step, t_end - t)
        if h <= 16 * np.finfo(float).eps * max(abs(t), 1.0):
            status, message = "step_underflow", f"step size underflow at t={t}"
            break
        try:
            K = _stages(call, t, y, h, k1)
            y_new = y + h * (B5 @ K)
            y_six = y + h * (np.asarray(A[5]) @ K[:5])
            if valid is not None and not valid(y_new):
                raise InvalidState("step leaves the domain")
        except (InvalidState, ValueError, FloatingPointError):
            h *= 0.5
            n_rej += 1
            continue
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((h * (E @ K) / sc) ** 2)))
        fac11 = err**EXPO1 if err > 0 else 0.0
        if err <= 1.0:
            fac = fac11 / facold**BETA
            fac = max(1 / FAC_MAX, min(1 / FAC_MIN, fac / SAFE))
            facold = max(err, 1e-4)
            if dense:
                segments.append(DenseSegment(t, h, y.copy(), K.copy()))
            t = t + h
            y = y_new
            k1 = K[6]
            ts.append(t)
            ys.append(y.copy())
            n_acc += 1
            h = h / fac
            den = np.linalg.norm(y_new - y_six)
            if den > 0:
                rho = np.linalg.norm(K[6] - K[5]) / den
                if rho > 0:
                    h = min(h, STIFF_CAP / rho)
            if converge_atol is not None:
                calm = calm + 1 if np.max(np.abs(k1)) < converge_atol else 0
                if calm >= converge_count:
                    status, message = "converged", f"vector field below {converge_atol} at t={t}"
                    break
        else:
            h = h / min(1 / FAC_MIN, fac11 / SAFE)
            n_rej += 1
    return Solution(np.array(ts), np.array(ys), status, message, nfev, n_acc, n_rej, segments)


def dopri5_fixed(f, t0: float, y0, t_end: float, n_steps: int) -> np.ndarray:
    """Fixed-step fifth-order solution at ``t_end`` (for convergence-order checks)."""
    y = np.array(y0, dtype=float)
    h = (t_end - t0) / n_steps
    t = float(t0)
    for _ in range(n_steps):
        K = _stages(f, t, y, h, f(t, y))
        y = y + h * (B5 @ K)
        t += h
    return y
