"""Parser for the line-oriented network description language.

Example::

    [constants]
    kappa = 1.0
    T_env = 1.5
    energy_mode = isolated

    [species]
    A { z = 1, p = 1.5, e = 0 }
    B { p = 2.5 }

    [reactions]
    A + B <-> 2 B { kf = 2, kb = 1, gas = (0, 0, 0) }
    A -> B        { k = 0.1, gas = (0.5, 0, 0) }
    @in A   { k = 0.5 }
    @out A  { k = 0.5 }
    @heat   { k = 1 }

``#`` starts a comment. Species defaults are ``z = 1`` and ``e = 0``; ``p`` is
required. Two ``->`` lines that are exact reverses of each other are paired.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..thermo import SpeciesThermo, ThermoConstants, ThermoDomainError
from .model import (
    ActivationModel,
    Complex,
    EnergyMode,
    NetworkError,
    NetworkSpec,
    Reaction,
    ReactionKind,
    he_gas,
    io_in_gas,
    io_out_gas,
)


class NetworkSyntaxError(NetworkError):
    def __init__(self, message: str, line: int, column: int, source: str = ""):
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"line {line}, column {column}: {message}")


_TOKEN = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<ARROW2><->)
  | (?P<ARROW>->)
  | (?P<NUMBER>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<PLUS>\+) | (?P<MINUS>-)
  | (?P<LBRACE>\{) | (?P<RBRACE>\})
  | (?P<LPAREN>\() | (?P<RPAREN>\))
  | (?P<COMMA>,) | (?P<EQ>=) | (?P<AT>@)
  | (?P<LBRACKET>\[) | (?P<RBRACKET>\])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int  # 1-based


def _tokenize(text: str, lineno: int) -> List[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise NetworkSyntaxError(f"unexpected character {text[pos]!r}", lineno, pos + 1, text)
        if m.lastgroup != "WS":
            toks.append(_Tok(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    return toks


class _Line:
    """Cursor over the tokens of one source line."""

    def __init__(self, text: str, lineno: int):
        self.text = text
        self.lineno = lineno
        self.toks = _tokenize(text, lineno)
        self.i = 0

    def error(self, msg: str, tok: Optional[_Tok] = None) -> NetworkSyntaxError:
        if tok is None:
            tok = self.peek()
        col = tok.col if tok is not None else len(self.text.rstrip()) + 1
        return NetworkSyntaxError(msg, self.lineno, col, self.text)

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, kind: str, what: str = "") -> _Tok:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            found = "end of line" if tok is None else repr(tok.text)
            raise self.error(f"expected {what or kind}, found {found}", tok)
        self.i += 1
        return tok

    def accept(self, kind: str) -> Optional[_Tok]:
        tok = self.peek()
        if tok is not None and tok.kind == kind:
            self.i += 1
            return tok
        return None

    def at_end(self) -> bool:
        return self.i >= len(self.toks)

    def expect_end(self):
        if not self.at_end():
            raise self.error(f"unexpected {self.peek().text!r}")


def _signed_number(line: _Line) -> Tuple[float, _Tok]:
    sign = -1.0 if line.accept("MINUS") else 1.0
    if sign > 0:
        line.accept("PLUS")
    tok = line.next("NUMBER", "number")
    return sign * float(tok.text), tok


def _parse_params(line: _Line) -> Dict[str, Tuple[object, _Tok]]:
    """``{ key = value, ... }`` where value is a number or a 3-tuple."""
    params: Dict[str, Tuple[object, _Tok]] = {}
    line.next("LBRACE", "'{'")
    if line.accept("RBRACE"):
        return params
    while True:
        key = line.next("IDENT", "parameter name")
        line.next("EQ", "'='")
        if line.accept("LPAREN"):
            vals = [_signed_number(line)[0]]
            while line.accept("COMMA"):
                vals.append(_signed_number(line)[0])
            line.next("RPAREN", "')'")
            value: object = tuple(vals)
        else:
            value = _signed_number(line)[0]
        if key.text in params:
            raise line.error(f"duplicate parameter {key.text!r}", key)
        params[key.text] = (value, key)
        if line.accept("RBRACE"):
            return params
        line.next("COMMA", "',' or '}'")


def _take(params, key, line, *, default=None, positive=False, nonneg=False, required=False):
    if key not in params:
        if required:
            raise line.error(f"missing parameter {key!r}")
        return default
    value, tok = params.pop(key)
    if isinstance(value, tuple):
        raise line.error(f"parameter {key!r} must be a number", tok)
    if positive and not value > 0:
        raise line.error(f"nonpositive parameter {key} = {value}", tok)
    if nonneg and not value >= 0:
        raise line.error(f"negative parameter {key} = {value}", tok)
    return value


def _take_gas(params, line) -> ActivationModel:
    if "gas" not in params:
        return ActivationModel()
    value, tok = params.pop("gas")
    if not isinstance(value, tuple) or len(value) != 3:
        raise line.error("gas must be a tuple (a, b, c)", tok)
    return ActivationModel(*value)


def _no_extra(params, line):
    if params:
        key, (_, tok) = next(iter(params.items()))
        raise line.error(f"unknown parameter {key!r}", tok)


@dataclass
class _RawReaction:
    kind: ReactionKind
    substrate: Complex
    product: Complex
    k: float
    gas: ActivationModel
    line: int
    k_back: Optional[float] = None  # set for '<->' lines


def _parse_complex(line: _Line, species: Dict[str, int]) -> Complex:
    tok = line.peek()
    if tok is not None and tok.kind == "NUMBER" and tok.text == "0":
        nxt = line.toks[line.i + 1] if line.i + 1 < len(line.toks) else None
        if nxt is None or nxt.kind != "IDENT":
            line.i += 1
            return Complex.zero()
    terms = []
    while True:
        coef = 1
        tok = line.peek()
        if tok is not None and tok.kind == "NUMBER":
            if not re.fullmatch(r"\d+", tok.text) or int(tok.text) < 1:
                raise line.error(f"stoichiometric coefficient must be a positive integer, got {tok.text!r}", tok)
            coef = int(tok.text)
            line.i += 1
        name = line.next("IDENT", "species name")
        if name.text not in species:
            raise line.error(f"unknown species {name.text!r}", name)
        terms.append((species[name.text], coef))
        if not line.accept("PLUS"):
            return Complex(tuple(terms))


def _parse_constants(line: _Line, out: dict):
    while not line.at_end():
        key = line.next("IDENT", "constant name")
        line.next("EQ", "'='")
        if key.text == "energy_mode":
            val = line.next("IDENT", "isolated or isothermal")
            if val.text not in ("isolated", "isothermal"):
                raise line.error(f"energy_mode must be isolated or isothermal, got {val.text!r}", val)
            out["energy_mode"] = val.text
        elif key.text == "reversible":
            val = line.next("IDENT", "true or false")
            if val.text not in ("true", "false"):
                raise line.error("reversible must be true or false", val)
            out["reversible"] = val.text == "true"
        elif key.text in ("kappa", "T_env"):
            value, tok = _signed_number(line)
            if not value > 0:
                raise line.error(f"nonpositive parameter {key.text} = {value}", tok)
            out[key.text] = value
        else:
            raise line.error(f"unknown constant {key.text!r}", key)
        if key.text in out.get("_seen", set()):
            raise line.error(f"duplicate constant {key.text!r}", key)
        out.setdefault("_seen", set()).add(key.text)
        line.accept("COMMA")


def parse_network(text: str, strict: bool = True) -> NetworkSpec:
    """Parse a network description into a :class:`NetworkSpec`.

    With ``strict=False`` violations of the thermodynamic conditions
    (isothermal mode with boundary fluxes, mismatched pair activation models,
    unpaired reactions under ``reversible = true``) are kept so that
    :func:`validate_conditions` can report them; syntax errors, unknown
    species, nonpositive parameters and a missing ``T_env`` always raise.
    """
    consts: dict = {}
    species_list: List[SpeciesThermo] = []
    species_idx: Dict[str, int] = {}
    raw: List[_RawReaction] = []
    section = None
    pending_species: List[Tuple[str, dict, _Line]] = []

    for lineno, full in enumerate(text.splitlines(), start=1):
        body = full.split("#", 1)[0]
        if not body.strip():
            continue
        line = _Line(body, lineno)
        if line.accept("LBRACKET"):
            name = line.next("IDENT", "section name")
            if name.text not in ("constants", "species", "reactions"):
                raise line.error(f"unknown section {name.text!r}", name)
            line.next("RBRACKET", "']'")
            line.expect_end()
            section = name.text
            continue
        if section is None:
            raise line.error("content before the first [section]")
        if section == "constants":
            _parse_constants(line, consts)
        elif section == "species":
            name = line.next("IDENT", "species name")
            if name.text in species_idx:
                raise line.error(f"duplicate species {name.text!r}", name)
            params = _parse_params(line) if not line.at_end() else {}
            line.expect_end()
            species_idx[name.text] = len(species_idx)
            pending_species.append((name.text, params, line))
        else:
            raw.append(_parse_reaction(line, species_idx, consts))
            line.expect_end()

    kappa = consts.get("kappa", 1.0)
    constants = ThermoConstants(kappa)
    for name, params, line in pending_species:
        z = _take(params, "z", line, default=1.0, positive=True)
        p = _take(params, "p", line, required=True, positive=True)
        e = _take(params, "e", line, default=0.0, nonneg=True)
        _no_extra(params, line)
        try:
            species_list.append(SpeciesThermo(name, z, p, e))
        except ThermoDomainError as exc:  # pragma: no cover - checked above
            raise line.error(str(exc))
    if not species_list:
        raise NetworkError("network declares no species")

    # Boundary-flux activation models depend on species thermodynamics.
    for rx in raw:
        if rx.kind is ReactionKind.IO_IN:
            rx.gas = io_in_gas(kappa)
        elif rx.kind is ReactionKind.IO_OUT:
            rx.gas = io_out_gas(kappa, species_list[rx.substrate.terms[0][0]])
        elif rx.kind is ReactionKind.HE:
            rx.gas = he_gas(kappa)

    mode = EnergyMode(consts.get("energy_mode", "isolated"))
    T_env = consts.get("T_env")
    has_boundary = any(rx.kind is not ReactionKind.CR for rx in raw)
    if T_env is None and (has_boundary or mode is EnergyMode.ISOTHERMAL):
        raise NetworkError("T_env required when boundary fluxes, heat exchange or isothermal mode are present")
    if strict and mode is EnergyMode.ISOTHERMAL and has_boundary:
        raise NetworkError("Condition 3 violated: isothermal mode admits no inflow/outflow/heat-exchange reactions")

    reactions = _normalize(raw)
    if strict:
        for j, rx in enumerate(reactions):
            if rx.kind is ReactionKind.CR and rx.pair is not None and rx.pair > j:
                if rx.gas != reactions[rx.pair].gas:
                    raise NetworkError(
                        f"Condition 5 violated: reactions on lines {rx.line} and "
                        f"{reactions[rx.pair].line} are a reverse pair with different gas"
                    )
        if consts.get("reversible"):
            unpaired = [rx.line for rx in reactions if rx.pair is None]
            if unpaired:
                raise NetworkError(f"unpaired reaction(s) on line(s) {unpaired} in a network declared reversible")

    return NetworkSpec(constants, tuple(species_list), tuple(reactions), T_env, mode)


def _parse_reaction(line: _Line, species: Dict[str, int], consts) -> _RawReaction:
    if line.accept("AT"):
        kw = line.next("IDENT", "in, out or heat")
        if kw.text in ("in", "out"):
            name = line.next("IDENT", "species name")
            if name.text not in species:
                raise line.error(f"unknown species {name.text!r}", name)
            params = _parse_params(line)
            k = _take(params, "k", line, required=True, positive=True)
            _no_extra(params, line)
            one = Complex.single(species[name.text])
            if kw.text == "in":
                return _RawReaction(ReactionKind.IO_IN, Complex.zero(), one, k, ActivationModel(), line.lineno)
            return _RawReaction(ReactionKind.IO_OUT, one, Complex.zero(), k, ActivationModel(), line.lineno)
        if kw.text == "heat":
            params = _parse_params(line)
            k = _take(params, "k", line, required=True, positive=True)
            _no_extra(params, line)
            return _RawReaction(ReactionKind.HE, Complex.zero(), Complex.zero(), k, ActivationModel(), line.lineno)
        raise line.error(f"unknown directive @{kw.text}", kw)

    start = line.peek()
    lhs = _parse_complex(line, species)
    arrow = line.peek()
    if arrow is None or arrow.kind not in ("ARROW", "ARROW2"):
        raise line.error("expected '->' or '<->'", arrow)
    line.i += 1
    rhs = _parse_complex(line, species)
    if lhs.is_zero or rhs.is_zero:
        raise line.error("chemical reactions need nonzero complexes on both sides; use @in/@out for boundary fluxes", start)
    if lhs == rhs:
        raise line.error("substrate and product complexes coincide", start)
    params = _parse_params(line)
    gas = _take_gas(params, line)
    if arrow.kind == "ARROW2":
        kf = _take(params, "kf", line, required=True, positive=True)
        kb = _take(params, "kb", line, required=True, positive=True)
        _no_extra(params, line)
        return _RawReaction(ReactionKind.CR, lhs, rhs, kf, gas, line.lineno, k_back=kb)
    k = _take(params, "k", line, required=True, positive=True)
    _no_extra(params, line)
    return _RawReaction(ReactionKind.CR, lhs, rhs, k, gas, line.lineno)


def _normalize(raw: List[_RawReaction]) -> List[Reaction]:
    """Order reactions CR, IO, HE with reverse pairs adjacent (forward first)."""
    cr_pairs: List[Tuple[_RawReaction, _RawReaction]] = []
    cr_single: List[_RawReaction] = []
    for rx in raw:
        if rx.kind is not ReactionKind.CR:
            continue
        if rx.k_back is not None:
            back = _RawReaction(ReactionKind.CR, rx.product, rx.substrate, rx.k_back, rx.gas, rx.line)
            cr_pairs.append((rx, back))
            continue
        match = next(
            (i for i, s in enumerate(cr_single) if s.substrate == rx.product and s.product == rx.substrate), None
        )
        if match is None:
            cr_single.append(rx)
        else:
            cr_pairs.append((cr_single.pop(match), rx))

    io_in: Dict[int, _RawReaction] = {}
    io_out: Dict[int, _RawReaction] = {}
    order: List[int] = []
    for rx in raw:
        if rx.kind in (ReactionKind.IO_IN, ReactionKind.IO_OUT):
            i = (rx.product if rx.kind is ReactionKind.IO_IN else rx.substrate).terms[0][0]
            table = io_in if rx.kind is ReactionKind.IO_IN else io_out
            if i in table:
                direction = "@in" if rx.kind is ReactionKind.IO_IN else "@out"
                raise NetworkError(f"line {rx.line}: duplicate {direction} for the same species")
            table[i] = rx
            if i not in order:
                order.append(i)
    io_pairs = [(io_in[i], io_out[i]) for i in order if i in io_in and i in io_out]
    io_single = [t[i] for i in order for t in (io_in, io_out) if i in t and not (i in io_in and i in io_out)]
    he = [rx for rx in raw if rx.kind is ReactionKind.HE]

    out: List[Reaction] = []

    def emit_pair(f: _RawReaction, b: _RawReaction):
        j = len(out)
        out.append(Reaction(f.kind, f.substrate, f.product, f.k, f.gas, j + 1, f.line))
        out.append(Reaction(b.kind, b.substrate, b.product, b.k, b.gas, j, b.line))

    def emit_single(s: _RawReaction, self_paired: bool = False):
        j = len(out)
        out.append(Reaction(s.kind, s.substrate, s.product, s.k, s.gas, j if self_paired else None, s.line))

    for f, b in cr_pairs:
        emit_pair(f, b)
    for s in cr_single:
        emit_single(s)
    for f, b in io_pairs:
        emit_pair(f, b)
    for s in io_single:
        emit_single(s)
    for s in he:
        emit_single(s, self_paired=True)
    return out


def load_network(path, strict: bool = True) -> NetworkSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read(), strict=strict)
