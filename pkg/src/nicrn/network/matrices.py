"""Graph matrices of a network and bases of the invariant subspaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

import numpy as np

from .. import exact
from .model import Complex, EnergyMode, NetworkSpec, ReactionKind

Number = Union[Fraction, float]


@dataclass(frozen=True)
class KernelImage:
    """Bases of ``ker(GammaTilde^T)``, ``Im(GammaTilde)`` and the integer ``ker(Gamma)``."""

    ker_tilde: Tuple[Tuple[Number, ...], ...]
    im_tilde: Tuple[Tuple[Number, ...], ...]
    ker_gamma: Tuple[Tuple[int, ...], ...]
    exact: bool

    def ker_tilde_array(self, dim: int) -> np.ndarray:
        """Kernel vectors as the columns of a ``dim x k`` float array."""
        if not self.ker_tilde:
            return np.zeros((dim, 0))
        return np.array([[float(x) for x in v] for v in self.ker_tilde]).T

    def orthonormal_ker(self, dim: int) -> np.ndarray:
        basis = self.ker_tilde_array(dim)
        if basis.shape[1] == 0:
            return basis
        q, _ = np.linalg.qr(basis)
        return q


@dataclass(frozen=True)
class Matrices:
    """Complex matrix Y, incidence D, pairing B, Gamma = Y D and GammaTilde.

    ``GammaTilde`` is ``(dU; Gamma)`` when every energy change is constant
    (isolated networks without boundary reactions, and isothermal mode);
    otherwise it is the block form ``[[0^T, 1], [Gamma, 0]]``.
    """

    complexes: Tuple[Complex, ...]
    Y: np.ndarray
    D: np.ndarray
    B: np.ndarray
    Gamma: np.ndarray
    GammaTilde: np.ndarray
    constant_dU: bool
    dU_row: Tuple[Number, ...]  # constant energy-change row; empty in block form
    kernels: KernelImage
    # Per-reaction tables used by the rate evaluation.
    sigma: np.ndarray = field(repr=False)  # r x n substrate stoichiometries
    pi: np.ndarray = field(repr=False)  # r x n product stoichiometries
    k: np.ndarray = field(repr=False)
    gas: np.ndarray = field(repr=False)  # r x 3 activation coefficients
    B_cr_cols: int = 0

    @property
    def B_CR(self) -> np.ndarray:
        return self.B[:, : self.B_cr_cols]

    @property
    def B_IO(self) -> np.ndarray:
        return self.B[:, self.B_cr_cols :]

    @property
    def dim(self) -> int:
        return self.Gamma.shape[0] + 1

    def ker_basis(self) -> np.ndarray:
        """Columns span ``ker(GammaTilde^T)``."""
        return self.kernels.ker_tilde_array(self.dim)

    def orthonormal_ker(self) -> np.ndarray:
        return self.kernels.orthonormal_ker(self.dim)


def _dU_row(spec: NetworkSpec, Y: np.ndarray, D: np.ndarray) -> Tuple[bool, List[Number]]:
    """Constant energy-change row, or ``(False, [])`` when some change depends on the state."""
    if spec.is_open:
        return False, []
    Gamma = Y @ D
    if spec.energy_mode is EnergyMode.ISOLATED:
        return True, [Fraction(0)] * spec.r
    u_env = spec.thermo.u(spec.T_env)
    row = [float(x) for x in u_env @ Gamma]
    # Exact arithmetic needs rational entries; fall back to floats otherwise.
    if all(exact.is_rational_float(float(x)) for x in u_env):
        u_q = [Fraction(float(x)).limit_denominator(10**6) for x in u_env]
        row = [sum((u_q[i] * int(Gamma[i, j]) for i in range(spec.n)), Fraction(0)) for j in range(spec.r)]
    return True, row


def build_matrices(spec: NetworkSpec) -> Matrices:
    complexes = spec.complexes()
    index = {c: i for i, c in enumerate(complexes)}
    n, m, r = spec.n, len(complexes), spec.r
    Y = np.zeros((n, m), dtype=int)
    for j, c in enumerate(complexes):
        Y[:, j] = c.vector(n)
    D = np.zeros((m, r), dtype=int)
    for j, rx in enumerate(spec.reactions):
        D[index[rx.product], j] += 1
        D[index[rx.substrate], j] -= 1
    fwd = spec.forward_pairs()
    B = np.zeros((m, len(fwd)), dtype=int)
    for col, (f, _) in enumerate(fwd):
        B[:, col] = D[:, f]
    Gamma = Y @ D

    constant, row = _dU_row(spec, Y, D)
    if constant:
        tilde_q = [list(row)] + [[int(x) for x in Gamma[i]] for i in range(n)]
    else:
        tilde_q = [[0] * r + [1]] + [[int(x) for x in Gamma[i]] + [0] for i in range(n)]
    GammaTilde = np.array([[float(x) for x in rw] for rw in tilde_q], dtype=float).reshape(n + 1, -1)
    kernels = kernel_image(tilde_q, Gamma, n)

    sigma = np.array([rx.substrate.vector(n) for rx in spec.reactions], dtype=float).reshape(r, n)
    pi = np.array([rx.product.vector(n) for rx in spec.reactions], dtype=float).reshape(r, n)
    return Matrices(
        complexes=tuple(complexes),
        Y=Y,
        D=D,
        B=B,
        Gamma=Gamma,
        GammaTilde=GammaTilde,
        constant_dU=constant,
        dU_row=tuple(row),
        kernels=kernels,
        sigma=sigma,
        pi=pi,
        k=np.array([rx.k for rx in spec.reactions], dtype=float),
        gas=np.array([rx.gas.as_tuple() for rx in spec.reactions], dtype=float).reshape(r, 3),
        B_cr_cols=sum(1 for f, _ in fwd if spec.reactions[f].kind is ReactionKind.CR),
    )


def kernel_image(gamma_tilde: Sequence[Sequence], Gamma: np.ndarray, n: int) -> KernelImage:
    """Bases of ``ker(GammaTilde^T)``, ``Im(GammaTilde)`` and an integer basis of ``ker(Gamma)``.

    Rational input is eliminated exactly. Anything else goes through an SVD
    with rank threshold ``1e-10 * ||GammaTilde||``.
    """
    r = Gamma.shape[1]
    ker_gamma = tuple(tuple(v) for v in exact.integer_nullspace([[int(x) for x in row] for row in Gamma], n_cols=r)) if r else ()
    is_exact = all(isinstance(x, (int, Fraction)) or exact.is_rational_float(float(x)) for row in gamma_tilde for x in row)
    if is_exact:
        q = [[x if isinstance(x, (int, Fraction)) else Fraction(float(x)).limit_denominator(10**6) for x in row] for row in gamma_tilde]
        ker = exact.left_nullspace(q)
        im = exact.column_basis(q)
        return KernelImage(tuple(map(tuple, ker)), tuple(map(tuple, im)), ker_gamma, True)
    a = np.array([[float(x) for x in row] for row in gamma_tilde])
    u, s, _ = np.linalg.svd(a)
    tol = 1e-10 * max(np.linalg.norm(a), 1.0)
    rank = int(np.sum(s > tol))
    im = tuple(tuple(col) for col in u[:, :rank].T)
    ker = tuple(tuple(col) for col in u[:, rank:].T)
    return KernelImage(ker, im, ker_gamma, False)


def kernel_residual(matrices: Matrices) -> float:
    """``max |c^T GammaTilde|`` over the kernel basis (exactly 0 on the exact path)."""
    if not matrices.kernels.ker_tilde:
        return 0.0
    if matrices.kernels.exact:
        rows = _tilde_rows(matrices)
        worst = Fraction(0)
        for c in matrices.kernels.ker_tilde:
            for j in range(len(rows[0])):
                val = sum((c[i] * rows[i][j] for i in range(len(c))), Fraction(0))
                worst = max(worst, abs(val))
        return float(worst)
    K = matrices.ker_basis()
    return float(np.max(np.abs(K.T @ matrices.GammaTilde)))


def _tilde_rows(matrices: Matrices) -> List[List[Fraction]]:
    n, r = matrices.Gamma.shape
    if matrices.constant_dU:
        top = [Fraction(x) for x in matrices.dU_row]
        return [top] + [[Fraction(int(x)) for x in matrices.Gamma[i]] for i in range(n)]
    return [[Fraction(0)] * r + [Fraction(1)]] + [[Fraction(int(x)) for x in matrices.Gamma[i]] + [Fraction(0)] for i in range(n)]
