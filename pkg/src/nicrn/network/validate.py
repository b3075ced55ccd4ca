"""Checks of the five structural/thermodynamic conditions on a parsed network."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .model import EnergyMode, NetworkSpec, ReactionKind, he_gas, io_in_gas, io_out_gas

CONDITION_NAMES = {
    1: "partition functions grow without bound (p_i > 0)",
    2: "reaction classes ordered CR, IO, HE with the right complex shapes",
    3: "energy mode compatible with boundary reactions",
    4: "boundary activation free energies have the standard form",
    5: "paired chemical reactions share one activation model",
}


@dataclass(frozen=True)
class ConditionResult:
    number: int
    passed: bool
    offending: Tuple[int, ...] = ()  # species or reaction indices
    detail: str = ""

    @property
    def name(self) -> str:
        return CONDITION_NAMES[self.number]


@dataclass(frozen=True)
class ValidationReport:
    conditions: Tuple[ConditionResult, ...]
    reversible: bool
    unpaired: Tuple[int, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, number: int) -> ConditionResult:
        return self.conditions[number - 1]

    def lines(self) -> List[str]:
        out = []
        for c in self.conditions:
            status = "pass" if c.passed else "FAIL"
            extra = f" offending={list(c.offending)}" if c.offending else ""
            detail = f" ({c.detail})" if c.detail else ""
            out.append(f"Condition {c.number}: {status}  {c.name}{extra}{detail}")
        rev = "yes" if self.reversible else f"no (unpaired reactions {list(self.unpaired)})"
        out.append(f"reversible: {rev}")
        return out


def _shape_ok(rx) -> bool:
    if rx.kind is ReactionKind.CR:
        return not rx.substrate.is_zero and not rx.product.is_zero
    if rx.kind is ReactionKind.IO_IN:
        return rx.substrate.is_zero and len(rx.product.terms) == 1 and rx.product.terms[0][1] == 1
    if rx.kind is ReactionKind.IO_OUT:
        return rx.product.is_zero and len(rx.substrate.terms) == 1 and rx.substrate.terms[0][1] == 1
    return rx.substrate.is_zero and rx.product.is_zero


def validate_conditions(spec: NetworkSpec) -> ValidationReport:
    results = []

    bad = tuple(i for i, s in enumerate(spec.species) if not s.p > 0)
    results.append(ConditionResult(1, not bad, bad))

    rank = {"CR": 0, "IO": 1, "HE": 2}
    bad = []
    last = 0
    for j, rx in enumerate(spec.reactions):
        r = rank[rx.kind.block]
        if r < last or not _shape_ok(rx):
            bad.append(j)
        last = max(last, r)
    results.append(ConditionResult(2, not bad, tuple(bad)))

    bad = []
    detail = ""
    if spec.energy_mode is EnergyMode.ISOTHERMAL:
        bad = [j for j, rx in enumerate(spec.reactions) if rx.kind is not ReactionKind.CR]
        if bad:
            detail = "isothermal mode with inflow/outflow/heat exchange"
    if (spec.is_open or spec.energy_mode is EnergyMode.ISOTHERMAL) and spec.T_env is None:
        detail = "T_env missing"
        bad = bad or [0]
    results.append(ConditionResult(3, not bad, tuple(bad), detail))

    bad = []
    k = spec.kappa
    for j, rx in enumerate(spec.reactions):
        if rx.kind is ReactionKind.IO_IN:
            want = io_in_gas(k)
        elif rx.kind is ReactionKind.IO_OUT:
            want = io_out_gas(k, spec.species[rx.io_species()])
        elif rx.kind is ReactionKind.HE:
            want = he_gas(k)
        else:
            continue
        if not np.allclose(rx.gas.as_tuple(), want.as_tuple(), rtol=1e-12, atol=1e-12):
            bad.append(j)
    results.append(ConditionResult(4, not bad, tuple(bad)))

    bad = []
    for f, b in spec.forward_pairs():
        if spec.reactions[f].kind is ReactionKind.CR and spec.reactions[f].gas != spec.reactions[b].gas:
            bad.extend([f, b])
    detail = f"pairs {[(bad[i], bad[i + 1]) for i in range(0, len(bad), 2)]}" if bad else ""
    results.append(ConditionResult(5, not bad, tuple(bad), detail))

    unpaired = tuple(j for j, rx in enumerate(spec.reactions) if rx.pair is None)
    return ValidationReport(tuple(results), not unpaired, unpaired)
