"""Finite-dimensional Tikhonov problems in the real trigonometric basis,
solved through dense normal equations, plus the refinement sweep that
compares their minimizers against the closed-form spectral solution.

Basis and projections (d = 1)
-----------------------------
The unknown space X_n with odd n = 2M+1 is spanned by the orthonormal real
basis ordered like the frequency lattice -M..M:

    position of -l  (l > 0):  sqrt(2) sin(2 pi l x)
    position of  0:           1
    position of +l  (l > 0):  sqrt(2) cos(2 pi l x)

so the coordinate map is literal Fourier truncation, and the data projection
onto k = 2K+1 coordinates is truncation to bandlimit K. Coordinates relate
to spectral coefficients by x_const = c(0), x_cos = sqrt(2) Re c(l),
x_sin = -sqrt(2) Im c(l).
"""

from __future__ import annotations

import dataclasses
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    NotRealValuedError,
    NumericalError,
    ParameterError,
)
from .noise import NoiseRealization
from .spectral import (
    FrequencyLattice,
    MultiplierOperator,
    SpectralField,
    sobolev_norm,
    symbol_is_hermitian,
    truncate,
)
from .tikhonov import (
    RegularizationSchedule,
    data_shifted_functional,
    forward,
    solve,
)

DENSE_SIZE_CAP = 4096  # beyond this only the diagonal per-mode route is allowed

IDENTITY = "identity"
IDENTITY_PLUS_DIFFERENCE = "identity_plus_difference"
SOBOLEV_SPECTRAL = "sobolev_spectral"

__all__ = [
    "PenaltyChoice",
    "identity_penalty",
    "difference_penalty",
    "spectral_penalty",
    "DiscreteProblem",
    "assemble",
    "solve_discrete",
    "field_to_coords",
    "coords_to_field",
    "low_frequency_test_functions",
    "GammaRow",
    "GammaSizeSummary",
    "GammaResult",
    "gamma_sweep",
    "DENSE_SIZE_CAP",
]


@dataclasses.dataclass(frozen=True)
class PenaltyChoice:
    """Which penalty matrix L enters ||L u||_2^2.

    identity:                  L = I
    identity_plus_difference:  L = I + D, D the periodic forward-difference
                               matrix scaled by the grid size 1/n
    sobolev_spectral(r):       L diagonal with entries (1+l^2)^(r/2), so
                               L^T L realizes the H^r weight exactly
    """

    kind: str
    r: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in (IDENTITY, IDENTITY_PLUS_DIFFERENCE, SOBOLEV_SPECTRAL):
            raise ParameterError(f"unknown penalty kind {self.kind!r}")
        if self.kind == SOBOLEV_SPECTRAL:
            if self.r is None or self.r < 0:
                raise ParameterError("sobolev_spectral penalty needs r >= 0")
        elif self.r is not None:
            raise ParameterError(f"penalty {self.kind!r} takes no r parameter")


def identity_penalty() -> PenaltyChoice:
    return PenaltyChoice(IDENTITY)


def difference_penalty() -> PenaltyChoice:
    return PenaltyChoice(IDENTITY_PLUS_DIFFERENCE)


def spectral_penalty(r: float) -> PenaltyChoice:
    return PenaltyChoice(SOBOLEV_SPECTRAL, r=float(r))


def _mode_axis(size: int) -> np.ndarray:
    """Signed mode per coordinate: -M..M for size 2M+1."""
    half = (size - 1) // 2
    return np.arange(-half, half + 1, dtype=np.int64)


def _penalty_matrix(penalty: PenaltyChoice, size: int) -> np.ndarray:
    if penalty.kind == IDENTITY:
        return np.eye(size)
    if penalty.kind == IDENTITY_PLUS_DIFFERENCE:
        diff = -float(size) * np.eye(size)
        diff += float(size) * np.eye(size, k=1)
        diff[-1, 0] += float(size)  # periodic wrap of the forward difference
        return np.eye(size) + diff
    weights = (1.0 + _mode_axis(size).astype(np.float64) ** 2) ** (penalty.r / 2.0)
    return np.diag(weights)


@dataclasses.dataclass(frozen=True, eq=False)
class DiscreteProblem:
    """Matrix Tikhonov problem min ||A u - m||_2^2 + alpha ||L u||_2^2 with
    A the k x n section of the multiplier between trigonometric bases."""

    n: int
    k: int
    A_matrix: np.ndarray
    L_matrix: np.ndarray
    alpha: float
    penalty: PenaltyChoice


def assemble(
    A: MultiplierOperator, n: int, k: int, penalty: PenaltyChoice, alpha: float
) -> DiscreteProblem:
    """Build the k x n matrix section of the multiplier plus the penalty.

    Requires odd n and k (full conjugate pairs). A Hermitian symbol
    a = p + i q contributes the rotation block [[p, q], [-q, p]] on each
    (cos, sin) pair; real even symbols make the matrix diagonal.
    """
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if n < 1 or k < 1:
        raise ParameterError(f"need n, k >= 1, got n={n}, k={k}")
    if n % 2 == 0 or k % 2 == 0:
        raise ParameterError(f"n and k must be odd (2M+1 basis sizes), got n={n}, k={k}")
    if n > DENSE_SIZE_CAP or k > DENSE_SIZE_CAP:
        raise ParameterError(
            f"dense assembly capped at {DENSE_SIZE_CAP}; use the spectral solver instead"
        )

    half_n = (n - 1) // 2
    half_k = (k - 1) // 2
    lattice_n = FrequencyLattice(1, half_n)
    values = A.symbol_values(lattice_n)
    if not symbol_is_hermitian(values):
        raise ParameterError(
            "real-basis assembly needs a Hermitian-symmetric symbol "
            "(the operator must map real functions to real functions)"
        )

    matrix = np.zeros((k, n))
    shared = min(half_n, half_k)
    center_n, center_k = half_n, half_k
    matrix[center_k, center_n] = values[center_n].real
    for l in range(1, shared + 1):
        a = values[center_n + l]
        p, q = a.real, a.imag
        cos_n, sin_n = center_n + l, center_n - l
        cos_k, sin_k = center_k + l, center_k - l
        matrix[cos_k, cos_n] = p
        matrix[cos_k, sin_n] = q
        matrix[sin_k, cos_n] = -q
        matrix[sin_k, sin_n] = p

    return DiscreteProblem(
        n=n,
        k=k,
        A_matrix=matrix,
        L_matrix=_penalty_matrix(penalty, n),
        alpha=float(alpha),
        penalty=penalty,
    )


def solve_discrete(problem: DiscreteProblem, data: np.ndarray) -> np.ndarray:
    """Normal-equations solve (A^T A + alpha L^T L)^(-1) A^T m via a dense
    Cholesky factorization, with a residual check that guards the
    positive-definiteness invariant."""
    data = np.asarray(data, dtype=np.float64)
    if data.shape != (problem.k,):
        raise DimensionError(f"data must have length k = {problem.k}, got {data.shape}")
    gram = problem.A_matrix.T @ problem.A_matrix + problem.alpha * (
        problem.L_matrix.T @ problem.L_matrix
    )
    rhs = problem.A_matrix.T @ data
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"normal matrix is not positive definite: {exc}") from exc
    solution = scipy.linalg.cho_solve(factor, rhs)
    residual = float(np.linalg.norm(gram @ solution - rhs))
    scale = float(np.linalg.norm(rhs))
    if residual > 1e-10 * max(scale, 1e-300):
        raise NumericalError(
            f"normal-equation residual {residual:.3e} exceeds 1e-10 * ||A^T m|| = {1e-10 * scale:.3e}"
        )
    return solution


def field_to_coords(field: SpectralField) -> np.ndarray:
    """Coordinates of a real field in the orthonormal trigonometric basis."""
    if field.lattice.dimension != 1:
        raise DimensionError("trigonometric coordinates are implemented for d = 1")
    if not field.hermitian:
        raise NotRealValuedError("field_to_coords needs a Hermitian field")
    half = field.lattice.bandlimit
    center = field.lattice.zero_index
    coeffs = field.coefficients
    coords = np.empty(field.lattice.mode_count)
    coords[center] = coeffs[center].real
    positive = coeffs[center + 1 :]
    coords[center + 1 :] = np.sqrt(2.0) * positive.real
    coords[:center] = -np.sqrt(2.0) * positive.imag[::-1]
    return coords


def coords_to_field(lattice: FrequencyLattice, coords: np.ndarray) -> SpectralField:
    """Inverse of field_to_coords; output always carries the Hermitian flag."""
    if lattice.dimension != 1:
        raise DimensionError("trigonometric coordinates are implemented for d = 1")
    coords = np.asarray(coords, dtype=np.float64)
    if coords.shape != (lattice.mode_count,):
        raise DimensionError(f"expected {lattice.mode_count} coordinates, got {coords.shape}")
    center = lattice.zero_index
    coeffs = np.zeros(lattice.mode_count, dtype=np.complex128)
    coeffs[center] = coords[center]
    cos_part = coords[center + 1 :]
    sin_part = coords[:center][::-1]
    positive = (cos_part - 1j * sin_part) / np.sqrt(2.0)
    coeffs[center + 1 :] = positive
    coeffs[:center] = positive[::-1].conj()
    return SpectralField(lattice, coeffs, hermitian=True)


def low_frequency_test_functions(lattice: FrequencyLattice, count: int = 5) -> list:
    """Unit-norm probes for weak-topology gaps: the constant, then
    sqrt(2) cos / sqrt(2) sin at frequencies 1, 2, ... Labeled fields in the
    order const, cos1, sin1, cos2, sin2, ..."""
    if lattice.dimension != 1:
        raise DimensionError("test functions are implemented for d = 1")
    functions: list[tuple[str, SpectralField]] = []
    coeffs = np.zeros(lattice.mode_count, dtype=np.complex128)
    coeffs[lattice.zero_index] = 1.0
    functions.append(("const", SpectralField(lattice, coeffs, hermitian=True)))
    frequency = 1
    while len(functions) < count:
        for flavor in ("cos", "sin"):
            if len(functions) >= count:
                break
            coeffs = np.zeros(lattice.mode_count, dtype=np.complex128)
            plus = lattice.index_of([frequency])
            minus = lattice.index_of([-frequency])
            if flavor == "cos":
                coeffs[plus] = 1.0 / np.sqrt(2.0)
                coeffs[minus] = 1.0 / np.sqrt(2.0)
            else:
                coeffs[plus] = -1j / np.sqrt(2.0)
                coeffs[minus] = 1j / np.sqrt(2.0)
            functions.append(
                (f"{flavor}{frequency}", SpectralField(lattice, coeffs, hermitian=True))
            )
        frequency += 1
    return functions


def _l2_pairing(f: SpectralField, g: SpectralField) -> float:
    if f.lattice != g.lattice:
        raise DimensionError("pairing needs a shared lattice")
    return float(np.sum((f.coefficients * g.coefficients.conj()).real))


def _embed(field: SpectralField, big: FrequencyLattice) -> SpectralField:
    """Zero-extend a field onto a larger lattice."""
    coeffs = np.zeros(big.mode_count, dtype=np.complex128)
    keep = big.shells() <= field.lattice.bandlimit
    coeffs[keep] = field.coefficients
    return SpectralField(big, coeffs, hermitian=field.hermitian)


def _coordinate_sobolev_norm(size: int, coords: np.ndarray, s: float) -> float:
    weights = (1.0 + _mode_axis(size).astype(np.float64) ** 2) ** s
    return float(np.sqrt(np.sum(weights * coords**2)))


@dataclasses.dataclass(frozen=True)
class GammaRow:
    n: int
    k: int
    alpha: float
    test_function_id: str
    pairing_gap: float
    functional_gap: float
    c_k: float


@dataclasses.dataclass(frozen=True)
class GammaSizeSummary:
    n: int
    k: int
    c_k: float
    functional_value: float   # F_{n,k}(minimizer) - c_k
    functional_gap: float     # above minus the continuum objective value
    ball_radius: float        # 2 alpha^{-1} ||(P_k A)* m||_{H^-r}
    minimizer_hr_norm: float


@dataclasses.dataclass(frozen=True, eq=False)
class GammaResult:
    rows: list
    summaries: list
    continuum_objective: float
    reference_bandlimit: int


def gamma_sweep(
    A: MultiplierOperator,
    truth: SpectralField,
    noise: NoiseRealization,
    delta: float,
    schedule: RegularizationSchedule,
    sizes: Sequence[tuple],
    test_functions: Sequence[tuple],
) -> GammaResult:
    """Discretization-refinement sweep against the closed-form minimizer.

    For each (n, k) the matrix minimizer is compared with the reference
    spectral minimizer on the truth lattice through (i) pairings with fixed
    smooth test functions and (ii) shifted objective values; under the
    spectral penalty both gaps shrink to zero along nested sizes because the
    two solvers agree mode by mode on shared frequencies.

    Sizes above the dense cap take the diagonal per-mode route instead of a
    factorization; that route exists precisely because the spectral penalty
    keeps the normal matrix diagonal.
    """
    if schedule.r <= 0:
        raise ParameterError("gamma sweep needs a spectral penalty with r > 0")
    pairs = [(int(n), int(k)) for n, k in sizes]
    if any(b < a for (a, _), (b, _) in zip(pairs, pairs[1:])):
        raise ParameterError("sizes must be nondecreasing in n")
    lattice = truth.lattice
    if lattice.dimension != 1:
        raise DimensionError("gamma sweep is implemented for d = 1")

    measurement = forward(A, truth, delta, noise)
    m_field = measurement.data
    alpha = schedule.alpha(delta)
    u_cont = solve(A, m_field, alpha, schedule.r)
    continuum_objective = data_shifted_functional(A, m_field, alpha, schedule.r, u_cont)
    penalty = spectral_penalty(schedule.r)

    rows: list[GammaRow] = []
    summaries: list[GammaSizeSummary] = []
    for n, k in pairs:
        half_n, half_k = (n - 1) // 2, (k - 1) // 2
        if max(half_n, half_k) > lattice.bandlimit:
            raise ParameterError(
                f"size ({n}, {k}) exceeds the reference bandlimit {lattice.bandlimit}"
            )
        data = field_to_coords(truncate(m_field, half_k))
        if max(n, k) <= DENSE_SIZE_CAP:
            problem = assemble(A, n, k, penalty, alpha)
            coords = solve_discrete(problem, data)
            misfit = problem.A_matrix @ coords - data
            objective = float(misfit @ misfit) + alpha * float(
                (problem.L_matrix @ coords) @ (problem.L_matrix @ coords)
            )
            rhs = problem.A_matrix.T @ data
        else:
            # diagonal fast path: a real Hermitian symbol is even, so the
            # real-basis matrix is diagonal and the solve is per coordinate
            small = FrequencyLattice(1, half_n)
            values = A.symbol_values(small)
            if not symbol_is_hermitian(values) or np.any(values.imag != 0.0):
                raise ParameterError("diagonal fast path needs a real Hermitian symbol")
            axis = np.abs(_mode_axis(n))
            observed = axis <= min(half_n, half_k)
            diag_a = np.where(observed, values.real, 0.0)
            weights_r = (1.0 + axis.astype(np.float64) ** 2) ** schedule.r
            padded = np.zeros(n)
            offset = (n - k) // 2
            if offset >= 0:
                padded[offset : offset + k] = data
            else:
                padded = data[-offset : -offset + n]
            rhs = diag_a * padded
            coords = rhs / (diag_a**2 + alpha * weights_r)
            misfit_sq = float(np.sum((diag_a * coords - padded) ** 2))
            if k > n:
                outside = data.copy()
                outside[(k - n) // 2 : (k - n) // 2 + n] = 0.0
                misfit_sq += float(np.sum(outside**2))
            objective = misfit_sq + alpha * float(np.sum(weights_r * coords**2))

        c_k = float(data @ data)
        minimizer = coords_to_field(FrequencyLattice(1, half_n), coords)
        embedded = _embed(minimizer, lattice)
        gap_value = objective - c_k - continuum_objective
        ball_radius = 2.0 / alpha * _coordinate_sobolev_norm(n, rhs, -schedule.r)
        summaries.append(
            GammaSizeSummary(
                n=n,
                k=k,
                c_k=c_k,
                functional_value=objective - c_k,
                functional_gap=gap_value,
                ball_radius=ball_radius,
                minimizer_hr_norm=sobolev_norm(minimizer, schedule.r),
            )
        )
        for label, phi in test_functions:
            rows.append(
                GammaRow(
                    n=n,
                    k=k,
                    alpha=alpha,
                    test_function_id=label,
                    pairing_gap=_l2_pairing(embedded - u_cont, phi),
                    functional_gap=gap_value,
                    c_k=c_k,
                )
            )
    return GammaResult(
        rows=rows,
        summaries=summaries,
        continuum_objective=continuum_objective,
        reference_bandlimit=lattice.bandlimit,
    )
