"""Closed-form statistical thermodynamics of ideal mixtures at unit volume.

Each species carries a single-molecule partition function of the form
``Z(T) = z * T**p * exp(-e / (kappa*T))``. Every molar quantity then has a
closed form::

    u(T) = e + kappa*p*T                      (molar energy)
    g(T) = -kappa*T*ln Z(T)                   (molar free energy)
         = e - kappa*T*ln z - kappa*p*T*ln T
    s(T) = (u - g) / T                        (molar entropy)
    c(T) = kappa*p                            (molar heat capacity)

``kappa`` is the product of Avogadro's number and Boltzmann's constant; the
two never appear separately once quantities are molar.

Whole-system quantities for amounts ``N``::

    U = N.u(T)
    G = sum((g_i - kappa*T) N_i + kappa*T N_i ln N_i)
    S = (U - G) / T
    mu_i = g_i(T) + kappa*T ln N_i
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Tuple

import numpy as np


class ThermoDomainError(ValueError):
    """A state or temperature outside the physical domain."""


@dataclass(frozen=True)
class ThermoConstants:
    kappa: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ThermoDomainError(f"kappa must be positive, got {self.kappa}")


@dataclass(frozen=True)
class SpeciesThermo:
    """Parameters ``(z, p, e)`` of one species' partition function."""

    name: str
    z: float = 1.0
    p: float = 1.5
    e: float = 0.0

    def __post_init__(self):
        if not self.z > 0:
            raise ThermoDomainError(f"species {self.name}: z must be positive, got {self.z}")
        if not self.p > 0:
            raise ThermoDomainError(f"species {self.name}: p must be positive, got {self.p}")
        if not self.e >= 0:
            raise ThermoDomainError(f"species {self.name}: e must be nonnegative, got {self.e}")


class MolarQuantities(NamedTuple):
    Z: float
    u: float
    g: float
    s: float
    c: float


def _check_T(T: float) -> None:
    if not T > 0:
        raise ThermoDomainError(f"nonpositive temperature: T={T}")


def molar_quantities(
    species: SpeciesThermo, T: float, constants: ThermoConstants = ThermoConstants()
) -> MolarQuantities:
    """Partition function and molar u, g, s, c of one species at ``T``."""
    _check_T(T)
    k = constants.kappa
    lnT = np.log(T)
    Z = species.z * T**species.p * np.exp(-species.e / (k * T))
    u = species.e + k * species.p * T
    g = species.e - k * T * np.log(species.z) - k * species.p * T * lnT
    s = (u - g) / T
    c = k * species.p
    return MolarQuantities(float(Z), float(u), float(g), float(s), float(c))


@dataclass(frozen=True)
class State:
    """Thermodynamic state ``(U, N)``: internal energy and mole amounts."""

    U: float
    N: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "U", float(self.U))
        object.__setattr__(self, "N", tuple(float(x) for x in np.ravel(self.N)))

    @property
    def n(self) -> np.ndarray:
        return np.array(self.N)

    def vector(self) -> np.ndarray:
        """Concatenated ``(U, N_1, ..., N_n)``."""
        return np.concatenate(([self.U], self.N))

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "State":
        x = np.asarray(x, dtype=float)
        return cls(x[0], x[1:])


@dataclass(frozen=True)
class ResolvedState:
    T: float
    mu: np.ndarray
    S: float
    G: float
    C: float


@dataclass(frozen=True)
class ThermoModel:
    """Vectorised thermodynamics of a mixture of species."""

    species: Tuple[SpeciesThermo, ...]
    constants: ThermoConstants = ThermoConstants()
    z: np.ndarray = field(init=False, repr=False, compare=False)
    p: np.ndarray = field(init=False, repr=False, compare=False)
    e: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "z", np.array([s.z for s in self.species], dtype=float))
        object.__setattr__(self, "p", np.array([s.p for s in self.species], dtype=float))
        object.__setattr__(self, "e", np.array([s.e for s in self.species], dtype=float))

    @property
    def kappa(self) -> float:
        return self.constants.kappa

    @property
    def n_species(self) -> int:
        return len(self.species)

    def ln_Z(self, T: float) -> np.ndarray:
        return np.log(self.z) + self.p * np.log(T) - self.e / (self.kappa * T)

    def u(self, T: float) -> np.ndarray:
        return self.e + self.kappa * self.p * T

    def g(self, T: float) -> np.ndarray:
        return self.e - self.kappa * T * (np.log(self.z) + self.p * np.log(T))

    def c(self, T: float) -> np.ndarray:
        return self.kappa * self.p * np.ones_like(self.z)

    def energy(self, T: float, N: Sequence[float]) -> float:
        """``U(T, N) = N.u(T)``."""
        return float(np.dot(N, self.u(T)))

    def ground_energy(self, N: Sequence[float]) -> float:
        """``N.u(0)``: the internal energy at zero temperature."""
        return float(np.dot(N, self.e))


def _as_model(model, constants=None) -> ThermoModel:
    if isinstance(model, ThermoModel):
        return model
    return ThermoModel(tuple(model), constants or ThermoConstants())


def _check_state(state: State, model: ThermoModel) -> np.ndarray:
    N = np.asarray(state.N, dtype=float)
    if N.shape != (model.n_species,):
        raise ThermoDomainError(f"state has {N.size} amounts, model has {model.n_species} species")
    if np.any(~(N > 0)):
        bad = [i for i, x in enumerate(N) if not x > 0]
        raise ThermoDomainError(f"nonpositive amount at species index {bad}")
    return N


def temperature_of(state: State, model, constants: ThermoConstants | None = None) -> float:
    """Invert ``U = N.u(T)``; closed form for the power-law family."""
    model = _as_model(model, constants)
    N = _check_state(state, model)
    excess = state.U - float(np.dot(N, model.e))
    if not excess > 0:
        raise ThermoDomainError(f"nonpositive temperature: U={state.U} <= N.u(0)")
    return excess / (model.kappa * float(np.dot(N, model.p)))


def free_energy(T: float, N: np.ndarray, model: ThermoModel) -> float:
    k = model.kappa
    return float(np.sum((model.g(T) - k * T) * N + k * T * N * np.log(N)))


def system_potentials(state: State, model, constants: ThermoConstants | None = None) -> ResolvedState:
    model = _as_model(model, constants)
    T = temperature_of(state, model)
    N = np.asarray(state.N)
    G = free_energy(T, N, model)
    S = (state.U - G) / T
    mu = model.g(T) + model.kappa * T * np.log(N)
    C = float(np.dot(N, model.c(T)))
    return ResolvedState(T=T, mu=mu, S=S, G=G, C=C)


def entropy_of_state(U: float, N: Sequence[float], model) -> float:
    """``S(U, N)``; raises outside the positive domain."""
    return system_potentials(State(U, N), _as_model(model)).S


def entropy_gradient(state: State, model, constants: ThermoConstants | None = None) -> Tuple[float, np.ndarray]:
    """``(dS/dU, dS/dN) = (1/T, -mu/T)``."""
    res = system_potentials(state, _as_model(model, constants))
    return 1.0 / res.T, -res.mu / res.T
