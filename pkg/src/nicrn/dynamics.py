"""Trajectories of the (U, N) dynamics, invariant monitoring and Lyapunov traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .equilibrium import ReferenceEquilibrium, availability, availability_gradient
from .integrator import InvalidState, Solution, dopri5
from .kinetics import energy_changes, rates_at, rhs
from .network.matrices import Matrices
from .network.model import EnergyMode, NetworkSpec
from .thermo import State, ThermoDomainError, temperature_of


class DynamicsError(ValueError):
    pass


@dataclass(frozen=True)
class IntegratorOptions:
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = np.inf
    t_end: float = 100.0
    dense: bool = False
    stop_on_convergence: bool = True

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise DynamicsError("tolerances must be positive")
        if not self.t_end > 0:
            raise DynamicsError("t_end must be positive")


@dataclass
class Trajectory:
    times: np.ndarray
    y: np.ndarray  # samples x (1 + n): columns U, N_1..N_n
    status: str
    message: str = ""
    T: Optional[np.ndarray] = None
    S_A: Optional[np.ndarray] = None
    solution: Optional[Solution] = field(default=None, repr=False)

    @property
    def states(self) -> List[State]:
        return [State.from_vector(row) for row in self.y]

    @property
    def final(self) -> State:
        return State.from_vector(self.y[-1])

    def __len__(self) -> int:
        return len(self.times)


def _temperatures(spec: NetworkSpec, y: np.ndarray) -> np.ndarray:
    th = spec.thermo
    N = y[:, 1:]
    return (y[:, 0] - N @ th.e) / (spec.kappa * (N @ th.p))


def integrate(
    spec: NetworkSpec,
    M: Matrices,
    state0: State,
    opts: IntegratorOptions = IntegratorOptions(),
    ref: Optional[ReferenceEquilibrium] = None,
) -> Trajectory:
    """Integrate from ``state0``; attaches ``(T, S_A)`` per sample when ``ref`` is given."""
    temperature_of(state0, spec.thermo)
    if spec.energy_mode is EnergyMode.ISOTHERMAL:
        surf = spec.thermo.energy(spec.T_env, state0.N)
        if abs(state0.U - surf) > 1e-9 * max(1.0, abs(surf)):
            raise DynamicsError("isothermal initial state must satisfy U = N.u(T_env)")
    th = spec.thermo

    def f(_t, y):
        try:
            return rhs(spec, M, y)
        except ThermoDomainError as exc:
            raise InvalidState(str(exc)) from None

    def valid(y):
        N = y[1:]
        return bool(np.all(N > 0) and y[0] - N @ th.e > 0)

    sol = dopri5(
        f,
        0.0,
        state0.vector(),
        opts.t_end,
        rtol=opts.rtol,
        atol=opts.atol,
        max_step=opts.max_step,
        valid=valid,
        converge_atol=opts.atol if opts.stop_on_convergence else None,
        dense=opts.dense,
    )
    traj = Trajectory(sol.t, sol.y, sol.status, sol.message, solution=sol)
    traj.T = _temperatures(spec, sol.y)
    if ref is not None:
        traj.S_A = np.array([availability(ref, State.from_vector(row)) for row in sol.y])
    return traj


def class_drift(M: Matrices, traj: Trajectory) -> float:
    """``max |c.(x(t) - x(0))| / (1 + |x(0)|)`` over the basis of ``ker(GammaTilde^T)``."""
    K = M.ker_basis()
    if K.shape[1] == 0:
        return 0.0
    delta = traj.y - traj.y[0]
    return float(np.max(np.abs(delta @ K))) / (1.0 + np.linalg.norm(traj.y[0]))


@dataclass(frozen=True)
class LyapunovReport:
    S_A: np.ndarray
    dS_A: np.ndarray  # analytic time derivative at each sample
    scale: np.ndarray  # magnitude of the terms summed into dS_A
    max_increase: float  # largest forward difference of S_A
    max_rate: float  # largest dS_A / scale
    monotone: bool
    dissipative: bool


def dissipation_rate(spec: NetworkSpec, M: Matrices, ref: ReferenceEquilibrium, state: State):
    """``(dS_A/dt, scale)`` with ``dS_A/dt = grad S_A . f``.

    ``scale`` sums ``|grad_k| * (|Gamma~| v)_k`` so that roundoff in the
    cancelling forward/backward fluxes is measured against the flux magnitude.
    """
    grad = availability_gradient(ref, state)
    T = temperature_of(state, spec.thermo)
    N = np.asarray(state.N)
    v = rates_at(spec, M, T, N)
    dU = energy_changes(spec, T)
    f = np.concatenate(([dU @ v], M.Gamma @ v))
    mag = np.concatenate(([np.abs(dU) @ v], np.abs(M.Gamma) @ v))
    return float(grad @ f), float(np.abs(grad) @ mag)


def lyapunov_trace(
    ref: ReferenceEquilibrium,
    spec: NetworkSpec,
    M: Matrices,
    traj: Trajectory,
    increase_tol: float = 1e-8,
    rate_tol: float = 1e-12,
) -> LyapunovReport:
    states = traj.states
    S = traj.S_A if traj.S_A is not None else np.array([availability(ref, s) for s in states])
    pairs = [dissipation_rate(spec, M, ref, s) for s in states]
    dS = np.array([p[0] for p in pairs])
    scale = np.array([p[1] for p in pairs])
    inc = float(np.max(np.diff(S), initial=-np.inf)) if len(S) > 1 else 0.0
    ratio = np.where(scale > 0, dS / np.where(scale > 0, scale, 1.0), np.where(dS > 0, np.inf, 0.0))
    max_rate = float(np.max(ratio))
    return LyapunovReport(
        S_A=S,
        dS_A=dS,
        scale=scale,
        max_increase=inc,
        max_rate=max_rate,
        monotone=inc <= increase_tol * (1 + S[0]),
        dissipative=max_rate <= rate_tol,
    )


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    terminal_distance: float
    first_time: Optional[float]
    monotone_tail: bool


def converged_state(traj: Trajectory, target: State, tol: float) -> ConvergenceReport:
    """Distance (max-norm over ``(U, N)``) to ``target`` along the trajectory."""
    d = np.max(np.abs(traj.y - target.vector()), axis=1)
    hit = np.nonzero(d < tol)[0]
    first = float(traj.times[hit[0]]) if hit.size else None
    tail = d[hit[0] :] if hit.size else d[len(d) // 2 :]
    mono = bool(np.all(np.diff(tail) <= 1e-12 * (1 + tail[:-1]))) if tail.size > 1 else True
    return ConvergenceReport(bool(d[-1] < tol), float(d[-1]), first, mono)


def fit_relaxation_rate(times: np.ndarray, values: np.ndarray, target: float) -> float:
    """Least-squares slope of ``-ln|value - target|`` versus time."""
    gap = np.abs(np.asarray(values) - target)
    keep = gap > 1e-9 * max(gap[0], 1e-300)
    slope, _ = np.polyfit(np.asarray(times)[keep], np.log(gap[keep]), 1)
    return float(-slope)
