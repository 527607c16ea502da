"""Desk-scale semidefinite feasibility, and the numeric-to-exact bridge.

The systems solved here are tiny after symmetry reduction, so the solver
favors simplicity and determinism over raw speed: projected alternating
minimization (exact affine projection onto the linear constraints, spectral
clipping of the PSD combination pulled back to coefficient space by least
squares), with a log-det barrier damped Newton polish when the alternation
stalls, and seeded jittered restarts.  Floats live only in this file;
rationalize() rounds a numeric solution back to exact rationals and
re-certifies everything exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, ResourceLimit
from .poly import MonomialBasis
from .symmetry import GramMatrix

MAX_VARIABLES = 512


@dataclass
class SolverConfig:
    tolerance: float = 1e-9
    max_iters: int = 20000
    denominator_bound: int = 2 ** 32
    seed: int = 0
    restarts: int = 3


@dataclass
class FeasibilitySystem:
    """Find (a, b) with sum a_i * psd_matrices[i] PSD and A (a, b) = rhs.

    a has one entry per PSD matrix (k2 of them); b holds k3 free scalars.
    linear_map is a dense rational k1 x (k2 + k3) matrix.
    """

    psd_matrices: list[GramMatrix]
    linear_map: list[list[Fraction]]
    rhs: list[Fraction]
    a_names: list[str] = field(default_factory=list)
    b_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.psd_matrices:
            raise ValueError("need at least one PSD coefficient matrix")
        basis = self.psd_matrices[0].basis
        for q in self.psd_matrices:
            if q.basis != basis:
                raise DimensionMismatch("PSD coefficient matrices over different bases")
        width = self.k2 + self.k3
        for row in self.linear_map:
            if len(row) != width:
                raise DimensionMismatch("linear map row width != k2 + k3")
        if len(self.rhs) != self.k1:
            raise DimensionMismatch("rhs length != number of linear rows")
        if not self.a_names:
            self.a_names = [f"a{i}" for i in range(self.k2)]
        if not self.b_names:
            self.b_names = [f"b{i}" for i in range(self.k3)]

    @property
    def k1(self) -> int:
        return len(self.linear_map)

    @property
    def k2(self) -> int:
        return len(self.psd_matrices)

    @property
    def k3(self) -> int:
        return len(self.b_names) if self.b_names else (
            len(self.linear_map[0]) - self.k2 if self.linear_map else 0)

    @property
    def gram_dim(self) -> int:
        return self.psd_matrices[0].dim

    @property
    def variables(self) -> int:
        return self.k2 + self.k3


@dataclass
class BlockEncoding:
    """One-matrix form: F(y) = constant + sum y_i coefficient[i] is PSD iff
    y solves the system.  Size is gram_dim + 2 * k1; each linear constraint
    occupies a 2x2 zero-diagonal tail block."""

    size: int
    constant: list[list[Fraction]]
    coefficient: list[list[list[Fraction]]]


def block_diagonal_encode(system: FeasibilitySystem) -> BlockEncoding:
    n_top = system.gram_dim
    size = n_top + 2 * system.k1

    def empty():
        return [[Fraction(0)] * size for _ in range(size)]

    constant = empty()
    for t in range(system.k1):
        base = n_top + 2 * t
        constant[base][base + 1] = -system.rhs[t]
        constant[base + 1][base] = -system.rhs[t]
    coeffs = []
    for i in range(system.variables):
        mat = empty()
        if i < system.k2:
            q = system.psd_matrices[i]
            for r in range(n_top):
                row = q.entries[r]
                for c in range(n_top):
                    mat[r][c] = row[c]
        for t in range(system.k1):
            base = n_top + 2 * t
            mat[base][base + 1] = system.linear_map[t][i]
            mat[base + 1][base] = system.linear_map[t][i]
        coeffs.append(mat)
    return BlockEncoding(size=size, constant=constant, coefficient=coeffs)


@dataclass
class NumericSolution:
    values: list[float]
    psd_min_eigenvalue_estimate: float
    linear_residual_norm: float
    iterations: int


@dataclass
class SolveOutcome:
    feasible: bool
    solution: Optional[NumericSolution]
    best_linear_residual: float
    best_psd_deficit: float
    iterations: int


def _float_matrix(q: GramMatrix) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in q.entries], dtype=float)


def solve_feasibility(system: FeasibilitySystem,
                      config: Optional[SolverConfig] = None) -> SolveOutcome:
    """Search for a numeric solution; never raises on infeasibility, just
    reports the best residuals seen."""
    cfg = config or SolverConfig()
    if system.variables > MAX_VARIABLES:
        raise ResourceLimit(
            f"{system.variables} variables exceed solver cap {MAX_VARIABLES}")
    k1, k2, k3 = system.k1, system.k2, system.k3
    nvar = k2 + k3
    dim = system.gram_dim
    stack = np.stack([_float_matrix(q) for q in system.psd_matrices])
    gmat = stack.reshape(k2, dim * dim).T  # (dim^2, k2)
    gpinv = np.linalg.pinv(gmat)
    if k1:
        amat = np.array([[float(x) for x in row] for row in system.linear_map])
        rhs = np.array([float(x) for x in system.rhs])
        apinv = np.linalg.pinv(amat)
    else:
        amat = np.zeros((0, nvar))
        rhs = np.zeros(0)
        apinv = np.zeros((nvar, 0))

    def project_affine(y: np.ndarray) -> np.ndarray:
        if not k1:
            return y
        return y - apinv @ (amat @ y - rhs)

    def matrix_of(y: np.ndarray) -> np.ndarray:
        s = (gmat @ y[:k2]).reshape(dim, dim)
        return (s + s.T) / 2.0

    def residuals(y: np.ndarray) -> tuple[float, float]:
        lin = float(np.max(np.abs(amat @ y - rhs))) if k1 else 0.0
        eigs = np.linalg.eigvalsh(matrix_of(y))
        return lin, float(eigs[0])

    def within(y: np.ndarray, lin: float, min_eig: float) -> bool:
        # Scale-relative: float projection error grows with the iterate.
        scale = max(1.0, float(np.max(np.abs(y))))
        return lin <= cfg.tolerance * scale and min_eig >= -cfg.tolerance * scale

    rng = np.random.default_rng(cfg.seed)
    total_iters = 0
    best_lin = math.inf
    best_deficit = math.inf
    budget = max(cfg.max_iters, 1)

    for attempt in range(cfg.restarts + 1):
        if attempt == 0:
            y = project_affine(np.zeros(nvar))
        else:
            y = project_affine(rng.standard_normal(nvar))
        push = 1e-2
        stall = 0
        prev_err = math.inf
        per_attempt = min(budget // (cfg.restarts + 1), 400)
        for _ in range(max(per_attempt, 50)):
            total_iters += 1
            lin, min_eig = residuals(y)
            deficit = max(0.0, -min_eig)
            best_lin = min(best_lin, lin)
            best_deficit = min(best_deficit, deficit)
            if within(y, lin, min_eig):
                sol = NumericSolution(
                    values=[float(v) for v in y],
                    psd_min_eigenvalue_estimate=min_eig,
                    linear_residual_norm=lin,
                    iterations=total_iters)
                return SolveOutcome(True, sol, lin, deficit, total_iters)
            err = lin + deficit
            if err >= prev_err - 1e-15:
                stall += 1
            else:
                stall = 0
            prev_err = err
            if stall >= 40:
                if push > cfg.tolerance:
                    push *= 0.25
                    stall = 0
                else:
                    break
            s = matrix_of(y)
            w, v = np.linalg.eigh(s)
            clipped = np.maximum(w, push)
            target = (v * clipped) @ v.T
            a_new = gpinv @ target.reshape(-1)
            y = np.concatenate([a_new, y[k2:]])
            y = project_affine(y)
        # Alternation did not land inside: barrier polish from the best
        # affine-feasible point of this attempt.
        y = _logdet_newton(gmat, amat, rhs, y, k2, cfg)
        y = project_affine(y)
        lin, min_eig = residuals(y)
        deficit = max(0.0, -min_eig)
        best_lin = min(best_lin, lin)
        best_deficit = min(best_deficit, deficit)
        if within(y, lin, min_eig):
            sol = NumericSolution(
                values=[float(v) for v in y],
                psd_min_eigenvalue_estimate=min_eig,
                linear_residual_norm=lin,
                iterations=total_iters)
            return SolveOutcome(True, sol, lin, deficit, total_iters)
    return SolveOutcome(False, None, best_lin, best_deficit, total_iters)


def _logdet_newton(gmat: np.ndarray, amat: np.ndarray, rhs: np.ndarray,
                   y0: np.ndarray, k2: int, cfg: SolverConfig) -> np.ndarray:
    """Damped Newton ascent of log det(S(y) + shift I) - mu |y|^2 over the
    affine set, with the shift driven toward zero.  The mu term bounds the
    objective when the cone is unbounded, keeping iterates at a moderate
    scale (small coordinates rationalize to small fractions later).
    Returns the best iterate found."""
    mu = 1e-6
    nvar = y0.shape[0]
    dim = int(round(math.sqrt(gmat.shape[0])))
    if amat.shape[0]:
        u, sv, vt = np.linalg.svd(amat)
        rank = int(np.sum(sv > sv[0] * 1e-12)) if sv.size else 0
        null = vt[rank:].T  # (nvar, m)
        # Restore exact-ish affine feasibility of the base point.
        y0 = y0 - np.linalg.pinv(amat) @ (amat @ y0 - rhs)
    else:
        null = np.eye(nvar)
    m = null.shape[1]
    if m == 0:
        return y0

    def s_of(y: np.ndarray) -> np.ndarray:
        s = (gmat @ y[:k2]).reshape(dim, dim)
        return (s + s.T) / 2.0

    directions = [ (gmat @ null[:k2, j]).reshape(dim, dim) for j in range(m) ]
    directions = [ (d + d.T) / 2.0 for d in directions ]

    def min_eig(y: np.ndarray) -> float:
        return float(np.linalg.eigvalsh(s_of(y))[0])

    best = y0.copy()
    best_eig = min_eig(best)
    y = y0.copy()
    shift = max(0.0, -best_eig) + 1.0
    for _ in range(40):
        for _ in range(25):
            s = s_of(y) + shift * np.eye(dim)
            if _logdet(s) is None:
                shift *= 4.0
                continue
            sinv = np.linalg.inv(s)
            grad = np.array([np.trace(sinv @ d) for d in directions])
            grad -= 2.0 * mu * (null.T @ y)
            hess = np.empty((m, m))
            for i in range(m):
                sd = sinv @ directions[i]
                for j in range(i, m):
                    hess[i, j] = hess[j, i] = np.trace(sd @ sinv @ directions[j])
            hess += 2.0 * mu * np.eye(m)
            try:
                step = np.linalg.solve(hess + 1e-12 * np.eye(m), grad)
            except np.linalg.LinAlgError:
                break
            # Damped line search on the true objective.
            scale = 1.0
            cur = _logdet(s) - mu * float(y @ y)
            improved = False
            for _ in range(30):
                cand = y + scale * (null @ step)
                s_cand = s_of(cand) + shift * np.eye(dim)
                val = _logdet(s_cand)
                if val is not None and val - mu * float(cand @ cand) > cur + 1e-14:
                    y = cand
                    improved = True
                    break
                scale /= 2.0
            if not improved:
                break
            eig = min_eig(y)
            if eig > best_eig:
                best_eig = eig
                best = y.copy()
        if best_eig > cfg.tolerance:
            break
        shift /= 4.0
        if shift < cfg.tolerance / 4:
            break
    return best


def _logdet(s: np.ndarray) -> Optional[float]:
    try:
        chol = np.linalg.cholesky(s)
    except np.linalg.LinAlgError:
        return None
    return float(2.0 * np.sum(np.log(np.diag(chol))))


# -- exact rounding ----------------------------------------------------------


def simplest_in_interval(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with smallest denominator (then numerator) in [lo, hi]."""
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_in_interval(-hi, -lo)
    floor_lo = lo.numerator // lo.denominator
    if lo == floor_lo:
        return Fraction(floor_lo)
    if floor_lo + 1 <= hi:
        return Fraction(floor_lo + 1)
    return floor_lo + 1 / simplest_in_interval(1 / (hi - floor_lo), 1 / (lo - floor_lo))


@dataclass
class RationalizeOutcome:
    ok: bool
    values: Optional[list[Fraction]] = None
    failure: Optional[str] = None
    psd_witness: Optional[list[Fraction]] = None


def rationalize(solution: NumericSolution | Sequence[float],
                system: FeasibilitySystem,
                denominator_bound: int = 2 ** 32,
                window: Fraction = Fraction(1, 10 ** 6)) -> RationalizeOutcome:
    """Round a numeric solution to exact rationals and re-certify.

    Each entry is replaced by the simplest rational within +-window (capped
    at the denominator bound); the linear system is then re-closed exactly,
    correcting the b-variables first and falling back to a minimum-norm
    correction over all variables; finally the PSD combination is checked
    by exact LDL^T.  Failures report which check broke.
    """
    values = solution.values if isinstance(solution, NumericSolution) else list(solution)
    if len(values) != system.variables:
        raise DimensionMismatch("solution length != system variables")
    window = Fraction(window)
    if window <= 0:
        raise ValueError("window must be positive")
    y: list[Fraction] = []
    for v in values:
        exact = Fraction(v)
        cand = simplest_in_interval(exact - window, exact + window)
        if cand.denominator > denominator_bound:
            cand = exact.limit_denominator(denominator_bound)
        y.append(cand)

    k1, k2 = system.k1, system.k2
    if k1:
        residual = [system.rhs[t] - sum(
            (system.linear_map[t][i] * y[i] for i in range(system.variables)),
            Fraction(0)) for t in range(k1)]
        if any(residual):
            b_cols = [[row[i] for i in range(k2, system.variables)]
                      for row in system.linear_map]
            delta_b = linalg.min_norm_correction(b_cols, residual) \
                if system.k3 else None
            if delta_b is not None:
                for i, dv in enumerate(delta_b):
                    y[k2 + i] += dv
            else:
                delta = linalg.min_norm_correction(system.linear_map, residual)
                if delta is None:
                    return RationalizeOutcome(
                        ok=False, failure="linear system has no exact solution "
                                          "near the rounded point")
                for i, dv in enumerate(delta):
                    y[i] += dv
        check = [sum((system.linear_map[t][i] * y[i]
                      for i in range(system.variables)), Fraction(0))
                 for t in range(k1)]
        if check != list(system.rhs):
            return RationalizeOutcome(ok=False, failure="exact linear re-check failed")

    dim = system.gram_dim
    combined = [[Fraction(0)] * dim for _ in range(dim)]
    for i in range(k2):
        coeff = y[i]
        if coeff == 0:
            continue
        q = system.psd_matrices[i]
        for r in range(dim):
            row = q.entries[r]
            for c in range(dim):
                if row[c]:
                    combined[r][c] += coeff * row[c]
    psd = linalg.psd_certificate(combined)
    if not psd.is_psd:
        return RationalizeOutcome(ok=False, failure="rounded combination is not PSD",
                                  psd_witness=psd.witness)
    return RationalizeOutcome(ok=True, values=y)


def combination(system: FeasibilitySystem, a_values: Sequence[Fraction]) -> GramMatrix:
    """sum a_i * psd_matrices[i] as an exact GramMatrix."""
    basis = system.psd_matrices[0].basis
    out = GramMatrix(basis)
    for i, coeff in enumerate(a_values):
        if coeff == 0:
            continue
        q = system.psd_matrices[i]
        for r in range(out.dim):
            rowq = q.entries[r]
            rowo = out.entries[r]
            for c in range(out.dim):
                if rowq[c]:
                    rowo[c] += Fraction(coeff) * rowq[c]
    return out


def dump_system(system: FeasibilitySystem) -> str:
    """Sparse text form for cross-checking against other tools."""
    lines = ["feasibility-system/1",
             f"k1 {system.k1} k2 {system.k2} k3 {system.k3} N {system.gram_dim}"]

    def frac(x: Fraction) -> str:
        return f"{x.numerator}/{x.denominator}"

    for i, q in enumerate(system.psd_matrices):
        for r in range(q.dim):
            for c in range(r, q.dim):
                if q.entries[r][c]:
                    lines.append(f"Q {i} {r} {c} {frac(q.entries[r][c])}")
    for t, row in enumerate(system.linear_map):
        for i, x in enumerate(row):
            if x:
                lines.append(f"A {t} {i} {frac(x)}")
    for t, x in enumerate(system.rhs):
        if x:
            lines.append(f"c {t} {frac(x)}")
    return "\n".join(lines) + "\n"
