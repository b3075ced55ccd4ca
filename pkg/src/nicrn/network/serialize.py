"""Text and JSON serialization of networks and their matrices."""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np

from .matrices import Matrices
from .model import Complex, NetworkSpec, ReactionKind


def _num(x: float) -> str:
    return repr(float(x))


def _complex(c: Complex, names) -> str:
    return c.format(names)


def serialize_network(spec: NetworkSpec) -> str:
    """Render a spec in the input language; parsing the result gives an equal spec."""
    names = spec.names
    out = ["[constants]", f"kappa = {_num(spec.kappa)}"]
    if spec.T_env is not None:
        out.append(f"T_env = {_num(spec.T_env)}")
    out.append(f"energy_mode = {spec.energy_mode.value}")
    out += ["", "[species]"]
    for s in spec.species:
        out.append(f"{s.name} {{ z = {_num(s.z)}, p = {_num(s.p)}, e = {_num(s.e)} }}")
    out += ["", "[reactions]"]
    done = set()
    for j, rx in enumerate(spec.reactions):
        if j in done:
            continue
        done.add(j)
        gas = "(" + ", ".join(_num(x) for x in rx.gas.as_tuple()) + ")"
        if rx.kind is ReactionKind.CR:
            lhs, rhs = _complex(rx.substrate, names), _complex(rx.product, names)
            back = spec.reactions[rx.pair] if rx.pair is not None else None
            if back is not None and back.gas == rx.gas:
                done.add(rx.pair)
                out.append(f"{lhs} <-> {rhs} {{ kf = {_num(rx.k)}, kb = {_num(back.k)}, gas = {gas} }}")
            else:
                out.append(f"{lhs} -> {rhs} {{ k = {_num(rx.k)}, gas = {gas} }}")
        elif rx.kind is ReactionKind.HE:
            out.append(f"@heat {{ k = {_num(rx.k)} }}")
        else:
            direction = "in" if rx.kind is ReactionKind.IO_IN else "out"
            out.append(f"@{direction} {names[rx.io_species()]} {{ k = {_num(rx.k)} }}")
    return "\n".join(out) + "\n"


def _columns(a: np.ndarray) -> Dict[str, Any]:
    """Column-major dense matrix: a list of columns plus the shape."""
    a = np.asarray(a)
    conv = int if a.dtype.kind in "iu" else float
    return {"shape": list(a.shape), "columns": [[conv(x) for x in a[:, j]] for j in range(a.shape[1])]}


def _vec(v) -> List[Any]:
    return [str(x) if isinstance(x, Fraction) and x.denominator != 1 else (int(x) if isinstance(x, Fraction) else float(x)) for x in v]


def network_to_dict(spec: NetworkSpec) -> Dict[str, Any]:
    names = spec.names

    def cplx(c: Complex):
        return {names[i]: k for i, k in c.terms}

    return {
        "constants": {"kappa": spec.kappa, "T_env": spec.T_env, "energy_mode": spec.energy_mode.value},
        "species": [{"name": s.name, "z": s.z, "p": s.p, "e": s.e} for s in spec.species],
        "reactions": [
            {
                "index": j,
                "kind": rx.kind.value,
                "substrate": cplx(rx.substrate),
                "product": cplx(rx.product),
                "k": rx.k,
                "gas": list(rx.gas.as_tuple()),
                "pair": rx.pair,
            }
            for j, rx in enumerate(spec.reactions)
        ],
    }


def matrices_to_dict(m: Matrices, names: Optional[List[str]] = None) -> Dict[str, Any]:
    """Matrices and kernel bases; rationals that are not integers become strings ``"p/q"``."""
    out = {
        "complexes": [c.format(names) if names else [list(t) for t in c.terms] for c in m.complexes],
        "Y": _columns(m.Y),
        "D": _columns(m.D),
        "B": _columns(m.B),
        "Gamma": _columns(m.Gamma),
        "GammaTilde": _columns(m.GammaTilde),
        "GammaTilde_form": "stacked" if m.constant_dU else "block",
        "ker_GammaTilde_T": [_vec(v) for v in m.kernels.ker_tilde],
        "im_GammaTilde": [_vec(v) for v in m.kernels.im_tilde],
        "ker_Gamma": [list(v) for v in m.kernels.ker_gamma],
        "exact": m.kernels.exact,
    }
    return out


def to_json_dict(spec: NetworkSpec, m: Matrices) -> Dict[str, Any]:
    return {"network": network_to_dict(spec), "matrices": matrices_to_dict(m, spec.names)}
