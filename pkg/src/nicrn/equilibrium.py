"""Detailed balance, reference equilibria, availability and the in-class equilibrium solver."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import exact
from .kinetics import BalanceResiduals, detailed_balance_residual, pair_lists
from .network.matrices import Matrices
from .network.model import EnergyMode, NetworkSpec, ReactionKind
from .thermo import State, ThermoDomainError, ThermoModel, free_energy, system_potentials, temperature_of

__all__ = [
    "BalanceResiduals",
    "DualPoint",
    "EquilibriumError",
    "EquilibriumResult",
    "ReferenceEquilibrium",
    "WegscheiderResult",
    "availability",
    "availability_gradient",
    "detailed_balance_residual",
    "dual_of_state",
    "equilibrium_in_class",
    "legendre_L_A",
    "pseudo_helmholtz",
    "reference_equilibrium",
    "state_of_dual",
    "wegscheider_check",
]

WEGSCHEIDER_TOL = 1e-10


class EquilibriumError(ValueError):
    """No detailed-balanced equilibrium, or the solver failed."""

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


# --- Wegscheider -----------------------------------------------------------


@dataclass(frozen=True)
class WegscheiderResult:
    holds: bool
    worst_residual: float
    cycles: Tuple[Tuple[int, ...], ...]  # integer cycle vectors over chemical pairs
    residuals: Tuple[float, ...]
    ker_gamma: Tuple[Tuple[int, ...], ...]  # integer basis of ker(Gamma), all reactions

    def __iter__(self):
        return iter((self.holds, self.worst_residual))


def _require_reversible_cr(spec: NetworkSpec) -> None:
    bad = [j for j, rx in enumerate(spec.reactions) if rx.kind is ReactionKind.CR and rx.pair is None]
    if bad:
        raise EquilibriumError(f"irreversible chemical reaction(s) {bad}: detailed balance is undefined")


def wegscheider_check(spec: NetworkSpec, M: Matrices) -> WegscheiderResult:
    """Cycle condition ``sum_p lambda_p ln(kf_p/kb_p) = 0`` over the integer cycle space."""
    _require_reversible_cr(spec)
    cr_pairs, _ = pair_lists(spec)
    cols = [f for f, _ in cr_pairs]
    sub = [[int(M.Gamma[i, j]) for j in cols] for i in range(spec.n)]
    cycles = exact.integer_nullspace(sub, n_cols=len(cols)) if cols else []
    log_ratio = np.array([np.log(spec.reactions[f].k) - np.log(spec.reactions[b].k) for f, b in cr_pairs])
    residuals = tuple(float(abs(np.dot(lam, log_ratio))) for lam in cycles)
    worst = max(residuals, default=0.0)
    return WegscheiderResult(
        holds=worst < WEGSCHEIDER_TOL,
        worst_residual=worst,
        cycles=tuple(tuple(c) for c in cycles),
        residuals=residuals,
        ker_gamma=M.kernels.ker_gamma,
    )


# --- reference equilibrium -------------------------------------------------


@dataclass(frozen=True)
class ReferenceEquilibrium:
    state: State
    T_star: float
    mu_star: np.ndarray
    S_star: float
    model: ThermoModel = field(repr=False, compare=False)

    @property
    def N_star(self) -> np.ndarray:
        return np.asarray(self.state.N)

    @property
    def U_star(self) -> float:
        return self.state.U


def default_T_star(spec: NetworkSpec) -> float:
    if spec.is_open or spec.energy_mode is EnergyMode.ISOTHERMAL:
        if spec.T_env is None:
            raise EquilibriumError("T_env required")
        return float(spec.T_env)
    return 1.0


def reference_equilibrium(spec: NetworkSpec, M: Matrices, T_star: Optional[float] = None) -> ReferenceEquilibrium:
    """A detailed-balanced equilibrium built in the coordinates ``x = mu/(kappa*T)``.

    Pair balance becomes the linear system ``(y_pi - y_sigma).x = ln(kf/kb)``
    for chemical pairs and ``x_i = ln(k_in/k_out) + g_i(T*)/(kappa*T*)`` for
    fed species. The integer coefficient matrix is reduced exactly with pivots
    taken from the last species backwards, and free coordinates are set to
    zero, i.e. free species sit at ``N_i* = Z_i(T*)``.
    """
    _require_reversible_cr(spec)
    io_unpaired = [j for j, rx in enumerate(spec.reactions) if rx.kind.block == "IO" and rx.pair is None]
    if io_unpaired:
        raise EquilibriumError(f"no detailed balanced equilibrium: boundary flux(es) {io_unpaired} lack a reverse")
    if T_star is None:
        T_star = default_T_star(spec)
    elif spec.is_open and T_star != spec.T_env:
        raise EquilibriumError("open networks balance only at T* = T_env")
    th = spec.thermo
    kappa = spec.kappa
    g_star = th.g(T_star)

    rows: List[List[int]] = []
    rhs: List[float] = []
    cr_pairs, io_pairs = pair_lists(spec)
    for f, b in cr_pairs:
        rf, rb = spec.reactions[f], spec.reactions[b]
        rows.append([int(a) for a in rf.product.vector(spec.n) - rf.substrate.vector(spec.n)])
        barrier_gap = (rf.gas(T_star) - rb.gas(T_star)) / (kappa * T_star)
        rhs.append(np.log(rf.k) - np.log(rb.k) - barrier_gap)
    for f, b in io_pairs:
        i = spec.reactions[f].io_species()
        row = [0] * spec.n
        row[i] = 1
        rows.append(row)
        rhs.append(np.log(spec.reactions[f].k) - np.log(spec.reactions[b].k) + g_star[i] / (kappa * T_star))

    x = np.zeros(spec.n)
    if rows:
        m = len(rows)
        aug = [r + [int(a == i) for a in range(m)] for i, r in enumerate(rows)]
        R, pivots = exact.rref(aug, reverse_pivots=True, n_pivot_cols=spec.n)
        E = np.array([[float(v) for v in r[spec.n :]] for r in R])
        b = E @ np.array(rhs)
        scale = 1.0 + max(abs(v) for v in rhs)
        for k in range(len(pivots), m):
            if abs(b[k]) > WEGSCHEIDER_TOL * scale:
                raise EquilibriumError(
                    f"no detailed balanced equilibrium: rate constants violate the cycle condition (residual {abs(b[k]):.3g})"
                )
        for k, c in enumerate(pivots):
            x[c] = b[k]
    N_star = np.exp(x - g_star / (kappa * T_star))
    state = State(float(N_star @ th.u(T_star)), N_star)
    mu_star = g_star + kappa * T_star * np.log(N_star)
    S_star = (state.U - free_energy(T_star, N_star, th)) / T_star
    ref = ReferenceEquilibrium(state, float(T_star), mu_star, float(S_star), th)
    check = detailed_balance_residual(spec, M, state) if spec.is_reversible else None
    if check is not None and check.worst_rate > 1e-10:
        raise EquilibriumError(f"reference construction failed: rate residual {check.worst_rate:.3g}")
    return ref


# --- availability ----------------------------------------------------------


def availability(ref: ReferenceEquilibrium, state: State) -> float:
    """``S_A = -S + (U-U*)/T* - (mu*/T*).(N-N*) + S*`` (nonnegative, zero at the reference)."""
    res = system_potentials(state, ref.model)
    Ts = ref.T_star
    dN = np.asarray(state.N) - ref.N_star
    return float(-res.S + (state.U - ref.U_star) / Ts - (ref.mu_star / Ts) @ dN + ref.S_star)


def availability_gradient(ref: ReferenceEquilibrium, state: State) -> np.ndarray:
    """``(1/T* - 1/T, mu/T - mu*/T*)``."""
    res = system_potentials(state, ref.model)
    return np.concatenate(([1.0 / ref.T_star - 1.0 / res.T], res.mu / res.T - ref.mu_star / ref.T_star))


def pseudo_helmholtz(N, N_star) -> float:
    """``G_A(N) = N.(ln N - ln N*) - 1.(N - N*)``."""
    N = np.asarray(N, dtype=float)
    N_star = np.asarray(N_star, dtype=float)
    if np.any(N <= 0) or np.any(N_star <= 0):
        raise ThermoDomainError("nonpositive amount")
    return float(N @ (np.log(N) - np.log(N_star)) - np.sum(N - N_star))


# --- Legendre transform ----------------------------------------------------


@dataclass(frozen=True)
class DualPoint:
    beta: float
    gamma: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate(([self.beta], self.gamma))

    @classmethod
    def from_vector(cls, y) -> "DualPoint":
        y = np.asarray(y, dtype=float)
        return cls(float(y[0]), y[1:].copy())


def dual_of_state(ref: ReferenceEquilibrium, state: State) -> DualPoint:
    return DualPoint.from_vector(availability_gradient(ref, state))


def _primal(ref: ReferenceEquilibrium, beta: float, gamma: np.ndarray) -> Tuple[float, np.ndarray]:
    """``(T, N)`` at a dual point; ``ln N = ln Z(T) - ln Z(T*) + ln N* + gamma/kappa``."""
    if not beta < 1.0 / ref.T_star:
        raise ThermoDomainError(f"dual point outside the domain: beta={beta} >= 1/T*={1.0 / ref.T_star}")
    T = 1.0 / (1.0 / ref.T_star - beta)
    m = ref.model
    lnN = m.ln_Z(T) - m.ln_Z(ref.T_star) + np.log(ref.N_star) + gamma / m.kappa
    return T, np.exp(lnN)


def state_of_dual(ref: ReferenceEquilibrium, dual: DualPoint) -> State:
    T, N = _primal(ref, dual.beta, np.asarray(dual.gamma))
    return State(ref.model.energy(T, N), N)


@dataclass(frozen=True)
class LegendreValue:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    T: float
    N: np.ndarray
    U: float


class _Legendre:
    """Shifted Legendre transform of the availability about an origin state."""

    def __init__(self, ref: ReferenceEquilibrium, origin: State):
        self.ref = ref
        self.U_o = origin.U
        self.N_o = np.asarray(origin.N)
        self.y_o = availability_gradient(ref, origin)
        self.const = 0.0
        self.const = -self.evaluate(self.y_o, hessian=False).value

    def evaluate(self, y: np.ndarray, hessian: bool = True) -> LegendreValue:
        m = self.ref.model
        kappa = m.kappa
        beta, gamma = float(y[0]), y[1:]
        T, N = _primal(self.ref, beta, gamma)
        u = m.u(T)
        U = float(N @ u)
        val = kappa * N.sum() - beta * self.U_o - gamma @ self.N_o + self.const
        grad = np.concatenate(([U - self.U_o], N - self.N_o))
        H = None
        if hessian:
            n = len(N)
            H = np.empty((n + 1, n + 1))
            Nu = N * u
            H[0, 0] = (Nu @ u) / kappa + T * T * float(N @ m.c(T))
            H[0, 1:] = H[1:, 0] = Nu / kappa
            H[1:, 1:] = np.diag(N / kappa)
        return LegendreValue(float(val), grad, H, T, N, U)


def legendre_L_A(ref: ReferenceEquilibrium, origin: State, dual: DualPoint) -> LegendreValue:
    """Value, gradient ``(U - U^o, N - N^o)`` and Hessian of the shifted transform.

    The additive constant makes the value vanish at the origin's own dual point.
    """
    return _Legendre(ref, origin).evaluate(dual.vector())


# --- equilibrium in a compatibility class ----------------------------------


@dataclass(frozen=True)
class EquilibriumResult:
    state: State
    dual: DualPoint
    T: float
    iterations: int
    gradient_norm: float
    value: float
    rate_residuals: np.ndarray
    energy_residuals: np.ndarray
    class_residual: float


def equilibrium_in_class(
    spec: NetworkSpec,
    M: Matrices,
    ref: ReferenceEquilibrium,
    origin: State,
    max_iter: int = 200,
    tol: float = 1e-9,
    start: Optional[DualPoint] = None,
) -> EquilibriumResult:
    """Minimize the Legendre transform over ``ker(GammaTilde^T)`` by damped Newton.

    Starts at the reference (``theta = 0``) unless ``start`` is given, in which
    case its projection onto the kernel is used. Backtracking halves the step
    until the point is inside ``beta < 1/T*`` and satisfies the Armijo condition.
    """
    if not spec.is_reversible:
        raise EquilibriumError("equilibrium_in_class needs a reversible network")
    temperature_of(origin, spec.thermo)  # domain check
    if spec.energy_mode is EnergyMode.ISOTHERMAL:
        on_surface = spec.thermo.energy(spec.T_env, origin.N)
        if abs(origin.U - on_surface) > 1e-9 * max(1.0, abs(on_surface)):
            raise EquilibriumError("isothermal origin must satisfy U = N.u(T_env)")

    Q = M.orthonormal_ker()
    L = _Legendre(ref, origin)
    theta = np.zeros(Q.shape[1]) if start is None else Q.T @ start.vector()
    try:
        cur = L.evaluate(Q @ theta)
    except ThermoDomainError as exc:
        raise EquilibriumError(f"start point outside the dual domain: {exc}") from None
    g = Q.T @ cur.gradient
    it = 0
    while np.linalg.norm(g) >= tol * (1 + abs(cur.value)):
        if it >= max_iter:
            raise EquilibriumError(
                f"Newton did not converge in {max_iter} iterations (|grad|={np.linalg.norm(g):.3g})",
                last_iterate=State(cur.U, cur.N),
            )
        H = Q.T @ cur.hessian @ Q
        try:
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = -g
        slope = float(g @ step)
        t = 1.0
        while True:
            trial_y = Q @ (theta + t * step)
            try:
                with np.errstate(over="raise", invalid="raise"):
                    trial = L.evaluate(trial_y)
                ok = np.isfinite(trial.value) and trial.value <= cur.value + 1e-4 * t * slope
                if not ok and np.isfinite(trial.value):
                    # Near the minimum the decrease is below roundoff; a shrinking gradient decides.
                    flat = trial.value <= cur.value + 64 * np.finfo(float).eps * (1 + abs(cur.value))
                    ok = flat and np.linalg.norm(Q.T @ trial.gradient) < np.linalg.norm(g)
            except (ThermoDomainError, FloatingPointError):
                ok = False
            if ok:
                break
            t *= 0.5
            if t < 1e-30:
                # No decrease representable in floating point; accept the current point.
                trial = None
                break
        it += 1
        if trial is None:
            break
        theta = theta + t * step
        cur = trial
        g = Q.T @ cur.gradient

    state = State(cur.U, cur.N)
    bal = detailed_balance_residual(spec, M, state)
    delta = np.concatenate(([cur.U - origin.U], cur.N - np.asarray(origin.N)))
    class_res = float(np.max(np.abs(M.ker_basis().T @ delta), initial=0.0)) / (1 + np.linalg.norm(origin.vector()))
    return EquilibriumResult(
        state=state,
        dual=DualPoint.from_vector(Q @ theta),
        T=cur.T,
        iterations=it,
        gradient_norm=float(np.linalg.norm(g)),
        value=cur.value,
        rate_residuals=bal.rate,
        energy_residuals=bal.energy,
        class_residual=class_res,
    )
