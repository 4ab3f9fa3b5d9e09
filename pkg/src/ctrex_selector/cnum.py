"""Dense complex linear algebra and seeded sampling shared by the selector."""

from typing import Callable, Dict, Union

import numpy as np
import numpy.typing as npt
from scipy import linalg

ComplexMatrix = npt.NDArray[np.complex128]
ComplexVector = npt.NDArray[np.complex128]

# Relative pivot floor for the Hermitian factorization.
PIVOT_EPS = 1e-12


# Custom exceptions
class ConstantColumnError(Exception):
    """Raised when a column has no spread left after centering."""
    pass


class DimensionMismatchError(Exception):
    """Raised when the shapes of a design and a response do not agree."""
    pass


class NotPositiveDefiniteError(Exception):
    """Raised when a Hermitian system cannot be factored stably."""
    pass


def make_rng(seed: int, *index: int) -> np.random.Generator:
    """
    Build the generator for a (seed, index...) stream.

    Child streams derived from the same master seed with different indices
    are independent; the same arguments always reproduce the same stream.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, index)]))


def derive_seed(seed: int, *index: int) -> int:
    """Derive a 64-bit child seed from a master seed and an index path."""
    sequence = np.random.SeedSequence([int(seed), *map(int, index)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def sample_complex_gaussian(rng: np.random.Generator, n: int) -> ComplexVector:
    """
    Draw n i.i.d. circularly symmetric standard complex normals.

    Each draw is (g1 + i*g2)/sqrt(2) with g1, g2 independent standard real
    normals, so E[z] = 0, E[|z|^2] = 1 and E[z^2] = 0.
    """
    if n < 1:
        raise ValueError(f"Sample size must be at least 1, got {n}")
    draws = rng.standard_normal((2, n))
    return (draws[0] + 1j * draws[1]) / np.sqrt(2.0)


def sample_unit_phase(rng: np.random.Generator, n: int) -> ComplexVector:
    """Draw n unit-modulus complex numbers with uniform phase."""
    if n < 1:
        raise ValueError(f"Sample size must be at least 1, got {n}")
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))


Sampler = Callable[[np.random.Generator, int], ComplexVector]

DUMMY_SAMPLERS: Dict[str, Sampler] = {
    "gaussian": sample_complex_gaussian,
    "phase": sample_unit_phase,
}


def sample_complex_matrix(rng: np.random.Generator, n: int, cols: int,
                          distribution: str = "gaussian") -> ComplexMatrix:
    """Fill an n x cols matrix column by column from a registered sampler."""
    try:
        sampler = DUMMY_SAMPLERS[distribution]
    except KeyError:
        raise ValueError(
            f"Unknown dummy distribution '{distribution}'. "
            f"Available: {', '.join(sorted(DUMMY_SAMPLERS))}"
        ) from None
    return np.asfortranarray(sampler(rng, n * cols).reshape((n, cols), order="F"))


def _require_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{what} contains NaN or infinite entries")


def standardize_columns(M: ComplexMatrix, center: bool = True) -> ComplexMatrix:
    """
    Center every column and scale it to unit Euclidean norm.

    With ``center=False`` the columns are only scaled; this is the
    normalization used for array-processing designs that carry no intercept.

    Raises:
        ConstantColumnError: if a column has zero norm after centering
    """
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise ValueError(f"Expected a 2-D matrix, got {M.ndim} dimension(s)")
    _require_finite(M, "Matrix")

    shifted = M - M.mean(axis=0) if center else M.copy()
    norms = np.linalg.norm(shifted, axis=0)
    floor = 1e-12 * np.maximum(1.0, np.linalg.norm(M, axis=0))
    constant = np.flatnonzero(norms <= floor)
    if constant.size:
        raise ConstantColumnError(
            f"Column {int(constant[0])} is constant and cannot be standardized"
        )
    return np.asfortranarray(shifted / norms)


def center(y: ComplexVector) -> ComplexVector:
    """Subtract the complex mean from a vector."""
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 1 or y.size < 1:
        raise ValueError("Expected a non-empty 1-D vector")
    _require_finite(y, "Vector")
    return y - y.mean()


def hermitian_solve(G: ComplexMatrix, B: Union[ComplexMatrix, ComplexVector]) -> np.ndarray:
    """
    Solve G X = B for Hermitian positive definite G by Cholesky factorization.

    Raises:
        NotPositiveDefiniteError: if a pivot falls below
            PIVOT_EPS * trace(G) / dim, i.e. the system is numerically singular
    """
    G = np.asarray(G, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DimensionMismatchError(f"Gram matrix must be square, got shape {G.shape}")
    if B.shape[0] != G.shape[0]:
        raise DimensionMismatchError(
            f"Right-hand side has {B.shape[0]} rows, system has {G.shape[0]}"
        )
    scale = max(1.0, float(np.max(np.abs(G)))) if G.size else 1.0
    if np.max(np.abs(G - G.conj().T), initial=0.0) > 1e-10 * scale:
        raise ValueError("Matrix is not Hermitian")

    try:
        factor = linalg.cholesky(G, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        raise NotPositiveDefiniteError(f"Cholesky factorization failed: {e}") from e

    dim = G.shape[0]
    pivots = np.abs(np.diag(factor)) ** 2
    threshold = PIVOT_EPS * float(np.real(np.trace(G))) / dim
    if pivots.min() <= threshold:
        raise NotPositiveDefiniteError(
            f"Pivot {pivots.min():.3e} at or below {threshold:.3e}; system is numerically singular"
        )
    return linalg.cho_solve((factor, True), B, check_finite=False)


def csign(c):
    """
    Complex signum c/|c|, with csign(0) = 0.

    Accepts a scalar or an array; a scalar input returns a Python complex.
    """
    values = np.asarray(c, dtype=np.complex128)
    magnitude = np.abs(values)
    out = np.divide(values, magnitude, out=np.zeros_like(values), where=magnitude > 0)
    if out.ndim == 0:
        return complex(out)
    return out
