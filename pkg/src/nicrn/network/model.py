"""Data model of a non-isothermal reaction network."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..thermo import SpeciesThermo, ThermoConstants, ThermoModel


class NetworkError(ValueError):
    """Semantically invalid network description."""


class ReactionKind(str, enum.Enum):
    CR = "CR"  # chemical reaction
    IO_IN = "IO_IN"  # inflow of one species
    IO_OUT = "IO_OUT"  # outflow of one species
    HE = "HE"  # heat exchange with the environment

    @property
    def block(self) -> str:
        return "IO" if self in (ReactionKind.IO_IN, ReactionKind.IO_OUT) else self.value


class EnergyMode(str, enum.Enum):
    ISOLATED = "isolated"
    ISOTHERMAL = "isothermal"


@dataclass(frozen=True)
class Complex:
    """Sparse nonnegative integer combination of species, sorted by index."""

    terms: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        merged: Dict[int, int] = {}
        for i, c in self.terms:
            if c < 0:
                raise NetworkError("stoichiometric coefficients must be nonnegative")
            merged[i] = merged.get(i, 0) + int(c)
        object.__setattr__(self, "terms", tuple(sorted((i, c) for i, c in merged.items() if c)))

    @classmethod
    def zero(cls) -> "Complex":
        return cls(())

    @classmethod
    def single(cls, i: int) -> "Complex":
        return cls(((i, 1),))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def vector(self, n: int) -> np.ndarray:
        v = np.zeros(n, dtype=int)
        for i, c in self.terms:
            v[i] = c
        return v

    def format(self, names: Sequence[str]) -> str:
        if self.is_zero:
            return "0"
        return " + ".join(names[i] if c == 1 else f"{c} {names[i]}" for i, c in self.terms)


@dataclass(frozen=True)
class ActivationModel:
    """Activated-state free energy ``g_AS(T) = a + b*T + c*T*ln T``."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0

    def __call__(self, T):
        return self.a + self.b * T + self.c * T * np.log(T)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class Reaction:
    kind: ReactionKind
    substrate: Complex
    product: Complex
    k: float
    gas: ActivationModel
    pair: Optional[int] = None  # index of the reverse reaction; self for HE
    line: Optional[int] = field(default=None, compare=False)  # source line, for diagnostics

    @property
    def reversible(self) -> bool:
        return self.pair is not None

    def io_species(self) -> Optional[int]:
        if self.kind is ReactionKind.IO_IN:
            return self.product.terms[0][0]
        if self.kind is ReactionKind.IO_OUT:
            return self.substrate.terms[0][0]
        return None


def io_in_gas(kappa: float) -> ActivationModel:
    """``kappa*T*ln T``, the activation model that makes inflow rates constant."""
    return ActivationModel(0.0, 0.0, kappa)


def io_out_gas(kappa: float, sp: SpeciesThermo) -> ActivationModel:
    """``kappa*T*ln T + g_i(T)``, making outflow rates ``k*N_i``."""
    return ActivationModel(sp.e, -kappa * np.log(sp.z), kappa - kappa * sp.p)


def he_gas(kappa: float) -> ActivationModel:
    return ActivationModel(0.0, 0.0, kappa)


@dataclass(frozen=True)
class NetworkSpec:
    """Species, constants and the ordered reaction list (CR, then IO, then HE)."""

    constants: ThermoConstants
    species: Tuple[SpeciesThermo, ...]
    reactions: Tuple[Reaction, ...]
    T_env: Optional[float] = None
    energy_mode: EnergyMode = EnergyMode.ISOLATED
    thermo: ThermoModel = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        object.__setattr__(self, "energy_mode", EnergyMode(self.energy_mode))
        object.__setattr__(self, "thermo", ThermoModel(self.species, self.constants))

    @property
    def kappa(self) -> float:
        return self.constants.kappa

    @property
    def n(self) -> int:
        return len(self.species)

    @property
    def r(self) -> int:
        return len(self.reactions)

    @property
    def names(self) -> List[str]:
        return [s.name for s in self.species]

    def count(self, block: str) -> int:
        return sum(1 for rx in self.reactions if rx.kind.block == block)

    @property
    def r_CR(self) -> int:
        return self.count("CR")

    @property
    def r_IO(self) -> int:
        return self.count("IO")

    @property
    def r_HE(self) -> int:
        return self.count("HE")

    def block_slice(self, block: str) -> slice:
        idx = [j for j, rx in enumerate(self.reactions) if rx.kind.block == block]
        if not idx:
            start = {"CR": 0, "IO": self.r_CR, "HE": self.r_CR + self.r_IO}[block]
            return slice(start, start)
        return slice(idx[0], idx[-1] + 1)

    @property
    def is_open(self) -> bool:
        return self.r_IO + self.r_HE > 0

    @property
    def is_reversible(self) -> bool:
        return all(rx.reversible for rx in self.reactions)

    def pairs(self) -> List[Tuple[int, int]]:
        """Forward/backward index pairs; HE reactions appear as ``(j, j)``."""
        out = []
        for j, rx in enumerate(self.reactions):
            if rx.pair is not None and rx.pair >= j:
                out.append((j, rx.pair))
        return out

    def forward_pairs(self) -> List[Tuple[int, int]]:
        """CR and IO pairs only (the columns of the pairing matrix B)."""
        return [(f, b) for f, b in self.pairs() if f != b]

    def complexes(self) -> List[Complex]:
        """Distinct complexes in order of first appearance."""
        seen: Dict[Complex, int] = {}
        for rx in self.reactions:
            for c in (rx.substrate, rx.product):
                if c not in seen:
                    seen[c] = len(seen)
        return list(seen)

    def species_index(self, name: str) -> int:
        for i, s in enumerate(self.species):
            if s.name == name:
                return i
        raise KeyError(name)
