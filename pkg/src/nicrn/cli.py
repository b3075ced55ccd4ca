"""Command-line front end.

Exit status: 0 success, 1 semantic failure (a condition or balance check
fails), 2 parse or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .data import bundled_names, bundled_text
from .dynamics import IntegratorOptions, class_drift, integrate, lyapunov_trace
from .equilibrium import EquilibriumError, equilibrium_in_class, reference_equilibrium, wegscheider_check
from .network import NetworkError, build_matrices, parse_network, to_json_dict, validate_conditions
from .network.model import EnergyMode, NetworkSpec
from .thermo import State, ThermoDomainError, temperature_of

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def fmt(x: float) -> str:
    return "%.17g" % x


def _vec(xs) -> str:
    return "(" + ", ".join(fmt(float(x)) for x in xs) + ")"


def read_source(path: str) -> str:
    """File contents; ``bundled:NAME`` reads a network shipped with the package."""
    if path.startswith("bundled:"):
        name = path.split(":", 1)[1]
        if name not in bundled_names():
            raise ConfigError(f"unknown bundled network {name!r}; available: {', '.join(bundled_names())}")
        return bundled_text(name)
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None


def load(path: str, strict: bool = True) -> NetworkSpec:
    try:
        return parse_network(read_source(path), strict=strict)
    except (NetworkError, ThermoDomainError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    U0: float
    N0: tuple

    @classmethod
    def from_args(cls, spec: NetworkSpec, U0: Optional[float], T0: Optional[float], N0: Optional[Sequence[float]]):
        if N0 is None:
            raise ConfigError("--N0 is required")
        if len(N0) != spec.n:
            raise ConfigError(f"--N0 has {len(N0)} entries, the network has {spec.n} species")
        if U0 is None:
            if T0 is None and spec.energy_mode is EnergyMode.ISOTHERMAL:
                T0 = spec.T_env
            if T0 is None:
                raise ConfigError("give --U0 or --T0")
            if not T0 > 0:
                raise ConfigError("--T0 must be positive")
            U0 = spec.thermo.energy(T0, N0)
        state = State(U0, N0)
        try:
            temperature_of(state, spec.thermo)
        except ThermoDomainError as exc:
            raise ConfigError(f"initial state: {exc}") from None
        return cls(state.U, state.N)

    @property
    def state(self) -> State:
        return State(self.U0, self.N0)


# --- subcommands -----------------------------------------------------------


def cmd_validate(args) -> int:
    spec = load(args.file, strict=False)
    report = validate_conditions(spec)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_FAIL


def _matrix_text(name: str, a: np.ndarray) -> List[str]:
    lines = [f"{name} ({a.shape[0]}x{a.shape[1]}):"]
    for row in np.atleast_2d(a):
        lines.append("  " + " ".join(f"{x:>8g}" for x in row))
    return lines


def cmd_matrices(args) -> int:
    spec = load(args.file)
    M = build_matrices(spec)
    if args.json:
        print(json.dumps(to_json_dict(spec, M), indent=2))
        return EXIT_OK
    out = ["complexes: " + ", ".join(c.format(spec.names) for c in M.complexes)]
    for name in ("Y", "D", "B", "Gamma", "GammaTilde"):
        out += _matrix_text(name, getattr(M, name))
    out.append("GammaTilde form: " + ("stacked" if M.constant_dU else "block"))
    out.append("ker(GammaTilde^T): " + "; ".join(_vec(v) for v in M.kernels.ker_tilde))
    out.append("Im(GammaTilde): " + "; ".join(_vec(v) for v in M.kernels.im_tilde))
    out.append("ker(Gamma): " + "; ".join(str(list(v)) for v in M.kernels.ker_gamma))
    print("\n".join(out))
    return EXIT_OK


def cmd_balance(args) -> int:
    spec = load(args.file)
    M = build_matrices(spec)
    try:
        weg = wegscheider_check(spec, M)
    except EquilibriumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"wegscheider: {'holds' if weg.holds else 'fails'} (worst residual {fmt(weg.worst_residual)})")
    try:
        ref = reference_equilibrium(spec, M, T_star=args.T_star)
    except EquilibriumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"T* = {fmt(ref.T_star)}")
    print(f"U* = {fmt(ref.U_star)}")
    print(f"N* = {_vec(ref.N_star)}")
    print(f"mu* = {_vec(ref.mu_star)}")
    return EXIT_OK if weg.holds else EXIT_FAIL


def cmd_equilibrium(args) -> int:
    spec = load(args.file)
    cfg = RunConfig.from_args(spec, args.U0, args.T0, args.N0)
    M = build_matrices(spec)
    try:
        ref = reference_equilibrium(spec, M)
        res = equilibrium_in_class(spec, M, ref, cfg.state)
    except EquilibriumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    report = {
        "U": res.state.U,
        "N": list(res.state.N),
        "T": res.T,
        "beta": res.dual.beta,
        "gamma": list(res.dual.gamma),
        "iterations": res.iterations,
        "gradient_norm": res.gradient_norm,
        "max_rate_residual": float(np.max(res.rate_residuals, initial=0.0)),
        "max_energy_residual": float(np.max(res.energy_residuals, initial=0.0)),
        "class_residual": res.class_residual,
    }
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for k, v in report.items():
            print(f"{k} = {_vec(v) if isinstance(v, list) else (v if isinstance(v, int) else fmt(v))}")
    return EXIT_OK


def write_csv(path: str, spec: NetworkSpec, traj) -> None:
    S_A = traj.S_A if traj.S_A is not None else np.full(len(traj), np.nan)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "U"] + [f"N_{n}" for n in spec.names] + ["T", "S_A"])
        for t, row, T, s in zip(traj.times, traj.y, traj.T, S_A):
            w.writerow([fmt(t)] + [fmt(x) for x in row] + [fmt(T), fmt(s)])


def _simulate_one(text: str, U0: float, N0: tuple, opts: IntegratorOptions, csv_path: Optional[str]) -> dict:
    spec = parse_network(text)
    M = build_matrices(spec)
    try:
        ref = reference_equilibrium(spec, M)
    except EquilibriumError:
        ref = None
    traj = integrate(spec, M, State(U0, N0), opts, ref=ref)
    if csv_path:
        write_csv(csv_path, spec, traj)
    summary = {
        "status": traj.status,
        "t_final": float(traj.times[-1]),
        "steps": len(traj) - 1,
        "U_final": float(traj.y[-1, 0]),
        "N_final": [float(x) for x in traj.y[-1, 1:]],
        "T_final": float(traj.T[-1]),
        "drift": class_drift(M, traj),
    }
    if ref is not None and spec.is_reversible:
        lyap = lyapunov_trace(ref, spec, M, traj)
        summary.update(
            S_A_final=float(lyap.S_A[-1]),
            monotone=bool(lyap.monotone),
            max_S_A_increase=lyap.max_increase,
            dissipative=bool(lyap.dissipative),
        )
    else:
        summary.update(monotone=None)
    return summary


def cmd_simulate(args) -> int:
    text = read_source(args.file)
    try:
        spec = parse_network(text)
    except (NetworkError, ThermoDomainError) as exc:
        raise ConfigError(f"{args.file}: {exc}") from None
    cfg = RunConfig.from_args(spec, args.U0, args.T0, args.N0)
    try:
        opts = IntegratorOptions(rtol=args.rtol, atol=args.atol, t_end=args.t_end, stop_on_convergence=not args.full)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.sweep:
        starts = _sweep_starts(spec, cfg, args.sweep, args.seed)
        paths = [f"{args.out[:-4] if args.out.endswith('.csv') else args.out}_{i}.csv" if args.out else None for i in range(len(starts))]
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [pool.submit(_simulate_one, text, s.U, s.N, opts, p) for s, p in zip(starts, paths)]
            summary = {"runs": [f.result() for f in futures]}
        ok = all(r["monotone"] is not False for r in summary["runs"])
    else:
        summary = _simulate_one(text, cfg.U0, cfg.N0, opts, args.out)
        ok = summary["monotone"] is not False
    body = json.dumps(summary, indent=2)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            fh.write(body + "\n")
    else:
        print(body)
    return EXIT_OK if ok else EXIT_FAIL


def _sweep_starts(spec: NetworkSpec, cfg: RunConfig, k: int, seed: int) -> List[State]:
    """``k`` random initial states around the given one (log-normal amounts, jittered temperature)."""
    rng = np.random.default_rng(seed)
    T0 = temperature_of(cfg.state, spec.thermo)
    out = []
    for _ in range(k):
        N = np.asarray(cfg.N0) * np.exp(rng.normal(0.0, 0.5, spec.n))
        T = spec.T_env if spec.energy_mode is EnergyMode.ISOTHERMAL else T0 * np.exp(rng.normal(0.0, 0.3))
        out.append(State(spec.thermo.energy(T, N), N))
    return out


def cmd_example(args) -> int:
    if args.name is None:
        print("\n".join(bundled_names()))
        return EXIT_OK
    if args.name not in bundled_names():
        raise ConfigError(f"unknown bundled network {args.name!r}")
    sys.stdout.write(bundled_text(args.name))
    return EXIT_OK


# --- argument parsing ------------------------------------------------------


def _state_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--U0", type=float, help="initial internal energy")
    g.add_argument("--T0", type=float, help="initial temperature (sets U0 = N0.u(T0))")
    p.add_argument("--N0", type=float, nargs="+", help="initial amounts, one per species")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nicrn", description="Non-isothermal reaction network toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)
    file_help = "network file, or bundled:NAME"

    p = sub.add_parser("validate", help="check the thermodynamic conditions")
    p.add_argument("file", help=file_help)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("matrices", help="print Y, D, B, Gamma, GammaTilde and kernel bases")
    p.add_argument("file", help=file_help)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_matrices)

    p = sub.add_parser("balance", help="cycle condition and reference equilibrium")
    p.add_argument("file", help=file_help)
    p.add_argument("--T-star", dest="T_star", type=float, default=None, help="reference temperature (isolated networks)")
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("equilibrium", help="detailed-balanced equilibrium in the class of an initial state")
    p.add_argument("file", help=file_help)
    _state_args(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("simulate", help="integrate the dynamics")
    p.add_argument("file", help=file_help)
    _state_args(p)
    p.add_argument("--t-end", dest="t_end", type=float, default=100.0)
    p.add_argument("--rtol", type=float, default=1e-8)
    p.add_argument("--atol", type=float, default=1e-10)
    p.add_argument("--out", help="trajectory CSV path")
    p.add_argument("--summary", help="summary JSON path (default: stdout)")
    p.add_argument("--full", action="store_true", help="integrate to t_end even after convergence")
    p.add_argument("--sweep", type=int, default=0, help="run K random initial states concurrently")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("example", help="list bundled networks or print one")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_example)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
