"""Transition-state-theory rates, the (U, N) vector field and its compact form.

Rates follow the Eyring form::

    v_j = k_j * T * exp(-(gAS_j(T) - sigma_j.g(T)) / (kappa*T)) * prod(N ** sigma_j)

Inflow and heat exchange reduce to ``v = k`` and outflow to ``v = k*N_i``;
those closed forms are used directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple, Union

import numpy as np

from .network.matrices import Matrices
from .network.model import EnergyMode, NetworkSpec, ReactionKind
from .thermo import State, ThermoDomainError, temperature_of


class KineticsError(ValueError):
    """The network or reference does not support the requested construction."""


@dataclass(frozen=True)
class _Tables:
    """Index tables per reaction kind, derived once per spec."""

    cr: np.ndarray
    io_in: np.ndarray
    io_out: np.ndarray
    he: np.ndarray
    in_species: np.ndarray
    out_species: np.ndarray
    cr_pairs: Tuple[Tuple[int, int], ...]
    io_pairs: Tuple[Tuple[int, int], ...]  # (inflow, outflow)
    io_pair_species: np.ndarray
    dU_cr: np.ndarray  # constant CR energy changes


@lru_cache(maxsize=64)
def _tables(spec: NetworkSpec) -> _Tables:
    kinds = [rx.kind for rx in spec.reactions]

    def idx(kind):
        return np.array([j for j, k in enumerate(kinds) if k is kind], dtype=int)

    io_in, io_out = idx(ReactionKind.IO_IN), idx(ReactionKind.IO_OUT)
    cr_pairs, io_pairs = [], []
    for f, b in spec.forward_pairs():
        (cr_pairs if kinds[f] is ReactionKind.CR else io_pairs).append((f, b))
    cr = idx(ReactionKind.CR)
    dU_cr = np.zeros(len(cr))
    if spec.energy_mode is EnergyMode.ISOTHERMAL and len(cr):
        u_env = spec.thermo.u(spec.T_env)
        for a, j in enumerate(cr):
            rx = spec.reactions[j]
            dU_cr[a] = (rx.product.vector(spec.n) - rx.substrate.vector(spec.n)) @ u_env
    return _Tables(
        cr=cr,
        io_in=io_in,
        io_out=io_out,
        he=idx(ReactionKind.HE),
        in_species=np.array([spec.reactions[j].io_species() for j in io_in], dtype=int),
        out_species=np.array([spec.reactions[j].io_species() for j in io_out], dtype=int),
        cr_pairs=tuple(cr_pairs),
        io_pairs=tuple(io_pairs),
        io_pair_species=np.array([spec.reactions[f].io_species() for f, _ in io_pairs], dtype=int),
        dU_cr=dU_cr,
    )


def rates_at(spec: NetworkSpec, M: Matrices, T: float, N: np.ndarray) -> np.ndarray:
    """Rates at temperature ``T`` and amounts ``N`` (no domain checks)."""
    N = np.asarray(N, dtype=float)
    kappa = spec.kappa
    lnT = np.log(T)
    x = spec.thermo.g(T) / (kappa * T) + np.log(N)
    gas = M.gas
    barrier = (gas[:, 0] + gas[:, 1] * T + gas[:, 2] * T * lnT) / (kappa * T)
    v = M.k * T * np.exp(-barrier + M.sigma @ x)
    t = _tables(spec)
    v[t.io_in] = M.k[t.io_in]
    v[t.io_out] = M.k[t.io_out] * N[t.out_species]
    v[t.he] = M.k[t.he]
    return v


def general_rates_at(spec: NetworkSpec, M: Matrices, T: float, N: np.ndarray) -> np.ndarray:
    """The Eyring expression for every reaction, without the boundary shortcuts."""
    N = np.asarray(N, dtype=float)
    kappa = spec.kappa
    x = spec.thermo.g(T) / (kappa * T) + np.log(N)
    gas = M.gas
    barrier = (gas[:, 0] + gas[:, 1] * T + gas[:, 2] * T * np.log(T)) / (kappa * T)
    return M.k * T * np.exp(-barrier + M.sigma @ x)


def energy_changes(spec: NetworkSpec, T: float) -> np.ndarray:
    """Per-reaction energy change ``dU_j`` at system temperature ``T``."""
    t = _tables(spec)
    dU = np.zeros(spec.r)
    dU[t.cr] = t.dU_cr
    if len(t.io_in) or len(t.io_out) or len(t.he):
        T_env = spec.T_env
        dU[t.io_in] = spec.thermo.u(T_env)[t.in_species]
        dU[t.io_out] = -spec.thermo.u(T)[t.out_species]
        dU[t.he] = T_env - T
    return dU


@dataclass(frozen=True)
class RateVector:
    v: np.ndarray
    T: float
    cr: slice
    io: slice
    he: slice

    @property
    def v_CR(self) -> np.ndarray:
        return self.v[self.cr]

    @property
    def v_IO(self) -> np.ndarray:
        return self.v[self.io]

    @property
    def v_HE(self) -> np.ndarray:
        return self.v[self.he]


def _resolve(spec: NetworkSpec, state: Union[State, np.ndarray]) -> Tuple[float, float, np.ndarray]:
    if not isinstance(state, State):
        state = State.from_vector(state)
    T = temperature_of(state, spec.thermo)
    return state.U, T, np.asarray(state.N)


def reaction_rates(spec: NetworkSpec, M: Matrices, state: State) -> RateVector:
    _, T, N = _resolve(spec, state)
    return RateVector(
        rates_at(spec, M, T, N), T, spec.block_slice("CR"), spec.block_slice("IO"), spec.block_slice("HE")
    )


def vector_field(spec: NetworkSpec, M: Matrices, state: State) -> Tuple[float, np.ndarray]:
    """``(dU/dt, dN/dt) = (dU . v, Gamma v)``."""
    _, T, N = _resolve(spec, state)
    v = rates_at(spec, M, T, N)
    return float(energy_changes(spec, T) @ v), M.Gamma @ v


def rhs(spec: NetworkSpec, M: Matrices, y: np.ndarray) -> np.ndarray:
    """Vector field on the flat state ``y = (U, N)``; raises outside the domain."""
    N = y[1:]
    if np.any(N <= 0):
        raise ThermoDomainError("nonpositive amount")
    th = spec.thermo
    excess = y[0] - N @ th.e
    if not excess > 0:
        raise ThermoDomainError("nonpositive temperature")
    T = excess / (spec.kappa * (N @ th.p))
    v = rates_at(spec, M, T, N)
    out = np.empty_like(y)
    out[0] = energy_changes(spec, T) @ v
    out[1:] = M.Gamma @ v
    return out


def flux_scale(spec: NetworkSpec, M: Matrices, state: State) -> np.ndarray:
    """Magnitude ``(|dU|.v, |Gamma| v)`` against which cancellation is measured."""
    _, T, N = _resolve(spec, state)
    v = rates_at(spec, M, T, N)
    return np.concatenate(([np.abs(energy_changes(spec, T)) @ v], np.abs(M.Gamma) @ v))


# --- detailed balance ------------------------------------------------------


@dataclass(frozen=True)
class BalanceResiduals:
    """Per pair: relative rate mismatch and absolute energy-change mismatch."""

    pairs: Tuple[Tuple[int, int], ...]
    rate: np.ndarray
    energy: np.ndarray

    @property
    def worst_rate(self) -> float:
        return float(np.max(self.rate, initial=0.0))

    @property
    def worst_energy(self) -> float:
        return float(np.max(self.energy, initial=0.0))


def detailed_balance_residual(spec: NetworkSpec, M: Matrices, state: State) -> BalanceResiduals:
    if not spec.is_reversible:
        raise KineticsError("detailed balance needs every reaction paired with a reverse")
    _, T, N = _resolve(spec, state)
    v = rates_at(spec, M, T, N)
    dU = energy_changes(spec, T)
    pairs = tuple(spec.pairs())
    rate = np.empty(len(pairs))
    energy = np.empty(len(pairs))
    for a, (f, b) in enumerate(pairs):
        rate[a] = abs(v[f] - v[b]) / max(v[f], v[b])
        energy[a] = abs(dU[f]) if f == b else abs(dU[f] + dU[b])
    return BalanceResiduals(pairs, rate, energy)


# --- conductances and the compact form -------------------------------------


@dataclass(frozen=True)
class Conductances:
    """Diagonal conductances relative to a detailed-balanced reference."""

    T_star: float
    N_star: np.ndarray
    x_star: np.ndarray  # mu*/(kappa*T*)
    cr_pairs: Tuple[Tuple[int, int], ...]
    io_pairs: Tuple[Tuple[int, int], ...]
    K_IO_diag: np.ndarray
    _kf: np.ndarray
    _gas: np.ndarray
    _sigma: np.ndarray
    _kappa: float

    def K_CR_diag(self, T: float) -> np.ndarray:
        """``k_f * T * exp(-gAS(T)/(kappa*T)) * exp(sigma.x*)`` per chemical pair."""
        a, b, c = self._gas.T
        barrier = (a + b * T + c * T * np.log(T)) / (self._kappa * T)
        return self._kf * T * np.exp(-barrier + self._sigma @ self.x_star)


def _reference_state(ref) -> State:
    return ref.state if hasattr(ref, "state") else ref


def conductance_matrices(spec: NetworkSpec, M: Matrices, ref, tol: float = 1e-10) -> Conductances:
    """Conductances at a reference state, refusing references that are not detailed balanced."""
    ref_state = _reference_state(ref)
    if not spec.is_reversible:
        raise KineticsError("conductances need a reversible network")
    t = _tables(spec)
    for f, b in t.cr_pairs:
        if spec.reactions[f].gas != spec.reactions[b].gas:
            raise KineticsError(f"reactions {f} and {b} are a pair with different activation models")
    res = detailed_balance_residual(spec, M, ref_state)
    if res.worst_rate > tol:
        bad = [res.pairs[i] for i in np.nonzero(res.rate > tol)[0]]
        raise KineticsError(f"reference is not detailed balanced: rate residual {res.worst_rate:.3g} at pairs {bad}")
    T_star = temperature_of(ref_state, spec.thermo)
    if spec.is_open and abs(T_star - spec.T_env) > 1e-12 * spec.T_env:
        raise KineticsError(f"open network reference must sit at T_env={spec.T_env}, got T*={T_star}")
    N_star = np.asarray(ref_state.N)
    x_star = spec.thermo.g(T_star) / (spec.kappa * T_star) + np.log(N_star)
    fwd = [f for f, _ in t.cr_pairs]
    cond = Conductances(
        T_star=T_star,
        N_star=N_star,
        x_star=x_star,
        cr_pairs=t.cr_pairs,
        io_pairs=t.io_pairs,
        K_IO_diag=np.array([spec.reactions[f].k for f, _ in t.io_pairs]),
        _kf=M.k[fwd],
        _gas=M.gas[fwd].reshape(len(fwd), 3),
        _sigma=M.sigma[fwd].reshape(len(fwd), spec.n),
        _kappa=spec.kappa,
    )
    # Forward and backward conductances must agree at the reference.
    v = rates_at(spec, M, T_star, N_star)
    K = cond.K_CR_diag(T_star)
    for a, (f, b) in enumerate(t.cr_pairs):
        if abs(K[a] - v[b]) > tol * max(K[a], v[b]):
            raise KineticsError(f"forward/backward conductances of pair ({f}, {b}) disagree")
    return cond


def compact_vector_field(spec: NetworkSpec, M: Matrices, cond: Conductances, state: State) -> Tuple[float, np.ndarray]:
    """The vector field assembled from conductances and balanced Laplacian factors."""
    _, T, N = _resolve(spec, state)
    lnN = np.log(N)
    x = spec.thermo.g(T) / (spec.kappa * T) + lnN
    Y = M.Y
    B_cr, B_io = M.B_CR, M.B_IO
    K_cr = cond.K_CR_diag(T)
    e_cr = np.exp(Y.T @ (x - cond.x_star))
    e_io = np.exp(Y.T @ (lnN - np.log(cond.N_star)))
    N_dot = -Y @ (B_cr @ (K_cr * (B_cr.T @ e_cr))) - Y @ (B_io @ (cond.K_IO_diag * (B_io.T @ e_io)))

    # Per-reaction rates recovered from the same factors, for the energy balance.
    v = np.zeros(spec.r)
    d = x - cond.x_star
    for a, (f, b) in enumerate(cond.cr_pairs):
        v[f] = K_cr[a] * np.exp(M.sigma[f] @ d)
        v[b] = K_cr[a] * np.exp(M.pi[f] @ d)
    t = _tables(spec)
    for a, (f, b) in enumerate(cond.io_pairs):
        i = t.io_pair_species[a]
        v[f] = cond.K_IO_diag[a]
        v[b] = cond.K_IO_diag[a] * N[i] / cond.N_star[i]
    v[t.he] = M.k[t.he]
    dU = energy_changes(spec, T)
    dU[t.he] = cond.T_star - T
    return float(dU @ v), N_dot


def isothermal_compact_field(spec: NetworkSpec, M: Matrices, cond: Conductances, N: np.ndarray) -> Tuple[float, np.ndarray]:
    """Single-conductance form valid on the surface ``U = N.u(T_env)`` of an isothermal network."""
    if spec.energy_mode is not EnergyMode.ISOTHERMAL:
        raise KineticsError("single-conductance form applies to isothermal networks only")
    N = np.asarray(N, dtype=float)
    K = cond.K_CR_diag(spec.T_env)
    B = M.B
    N_dot = -M.Y @ (B @ (K * (B.T @ np.exp(M.Y.T @ (np.log(N) - np.log(cond.N_star))))))
    return float(spec.thermo.u(spec.T_env) @ N_dot), N_dot


def laplacian(B: np.ndarray, K_diag: np.ndarray) -> np.ndarray:
    """Balanced Laplacian ``B diag(K) B^T``."""
    K_diag = np.asarray(K_diag, dtype=float)
    if np.any(K_diag <= 0):
        raise KineticsError("conductances must be positive")
    B = np.asarray(B, dtype=float)
    return (B * K_diag) @ B.T


def io_dissipation_terms(spec: NetworkSpec, M: Matrices, T: float, T_star: float | None = None) -> np.ndarray:
    """Per boundary-flux reaction: ``(1/T* - 1/T) dU_j + (g(T)/T - g(T*)/T*) . Gamma_j``.

    Zero at ``T = T*`` and negative otherwise.
    """
    T_star = spec.T_env if T_star is None else T_star
    t = _tables(spec)
    io = np.concatenate((t.io_in, t.io_out))
    io.sort()
    dU = energy_changes(spec, T)[io]
    dg = spec.thermo.g(T) / T - spec.thermo.g(T_star) / T_star
    return (1.0 / T_star - 1.0 / T) * dU + dg @ M.Gamma[:, io]


def pair_lists(spec: NetworkSpec) -> Tuple[List[Tuple[int, int]], List[Tuple[int, int]]]:
    t = _tables(spec)
    return list(t.cr_pairs), list(t.io_pairs)
