"""Complex terminating least angle regression (CT-LARS)."""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from .cnum import (
    ComplexMatrix,
    ComplexVector,
    DimensionMismatchError,
    NotPositiveDefiniteError,
    center,
    csign,
    hermitian_solve,
    standardize_columns,
)

# Leading coefficients below this are treated as a linear step equation.
QUADRATIC_EPS = 1e-14

# Correlations below this fraction of ||y|| mean the response is fully fitted.
EXHAUSTED_EPS = 1e-12


class SingularActiveSetError(NotPositiveDefiniteError):
    """Raised when the active columns are numerically collinear."""
    pass


@dataclass
class LarsState:
    """
    Resumable state of one forward-selection path.

    The state is owned by a single caller and mutated in place by
    ctlars_step; ``active`` keeps the selection order.
    """
    X: ComplexMatrix
    y: ComplexVector
    dummy_mask: npt.NDArray[np.bool_]
    beta: ComplexVector
    residual: ComplexVector
    active: List[int] = field(default_factory=list)
    t: int = 0
    tau: int = 0
    exhausted: bool = False
    cmax_path: List[float] = field(default_factory=list)
    centered: bool = False

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_cols(self) -> int:
        return self.X.shape[1]

    @property
    def max_active(self) -> int:
        """Largest active set the design can support; centering costs one rank."""
        return min(self.n_rows - int(self.centered), self.n_cols)

    @property
    def dummy_indices(self) -> Tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.dummy_mask))

    @property
    def saturated(self) -> bool:
        """True once no further step is possible on this path."""
        return self.exhausted or len(self.active) >= self.max_active


@dataclass(frozen=True)
class CandidateSet:
    """Variables that entered a path before its T-th dummy, dummies removed."""
    original_indices: Tuple[int, ...]
    entrance_order: Tuple[Tuple[int, bool], ...]
    terminal_t: int


def ctlars_init(Xtilde: ComplexMatrix, y: ComplexVector,
                dummy_indices: Iterable[int], centered: bool = False) -> LarsState:
    """
    Start a path with zero coefficients, an empty active set and r = y.

    Xtilde must already be standardized and y centered. Pass ``centered``
    when the columns were mean-centered: they then span at most n - 1
    dimensions and the path stops one variable earlier.
    """
    X = np.asfortranarray(np.asarray(Xtilde, dtype=np.complex128))
    y = np.asarray(y, dtype=np.complex128)
    if X.ndim != 2 or y.ndim != 1:
        raise DimensionMismatchError("Expected a 2-D design and a 1-D response")
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"Design has {X.shape[0]} rows but the response has {y.shape[0]} entries"
        )

    mask = np.zeros(X.shape[1], dtype=bool)
    for j in dummy_indices:
        if not 0 <= j < X.shape[1]:
            raise ValueError(f"Dummy index {j} is outside 0..{X.shape[1] - 1}")
        mask[j] = True

    return LarsState(
        X=X,
        y=y,
        dummy_mask=mask,
        beta=np.zeros(X.shape[1], dtype=np.complex128),
        residual=y.copy(),
        centered=centered,
    )


def compute_step_size(c: ComplexVector, g: ComplexVector, Cmax: float, L_A: float,
                      inactive: Iterable[int]) -> float:
    """
    Step length at which the next inactive correlation catches up.

    For every inactive j this is the smallest positive root of
    (|g_j|^2 - L_A^2) γ^2 - 2 (Re(conj(c_j) g_j) - Cmax L_A) γ + |c_j|^2 - Cmax^2 = 0,
    the point where |c_j - γ g_j| equals Cmax - γ L_A. The result is capped
    at the full-fit step Cmax / L_A.
    """
    if Cmax <= 0 or L_A <= 0:
        raise ValueError("Cmax and L_A must be positive")
    full_step = Cmax / L_A
    idx = np.fromiter(inactive, dtype=np.intp)
    if idx.size == 0:
        return full_step

    cj = np.asarray(c)[idx]
    gj = np.asarray(g)[idx]
    a = np.abs(gj) ** 2 - L_A ** 2
    b = -2.0 * (np.real(np.conj(cj) * gj) - Cmax * L_A)
    k = np.abs(cj) ** 2 - Cmax ** 2

    with np.errstate(divide="ignore", invalid="ignore"):
        linear = np.abs(a) < QUADRATIC_EPS
        disc = b * b - 4.0 * a * k
        root = np.sqrt(np.where(disc >= 0, disc, np.nan))
        q = -0.5 * (b + np.copysign(root, b))
        first = np.where(linear, -k / b, q / a)
        second = np.where(linear, np.nan, k / q)

    roots = np.concatenate([first, second])
    positive = roots[np.isfinite(roots) & (roots > 0)]
    if positive.size == 0:
        return full_step
    return float(min(positive.min(), full_step))


def ctlars_step(state: LarsState) -> LarsState:
    """
    Advance the path by one variable.

    The most correlated inactive column joins the active set, the path moves
    along the equiangular direction of the sign-aligned active columns, and
    coefficients are stored for the original (unaligned) columns.

    Raises:
        SingularActiveSetError: if the active columns are numerically collinear
    """
    if state.saturated:
        raise ValueError("Active set is saturated; no further step is possible")

    X = state.X
    c = X.conj().T @ state.residual
    magnitude = np.abs(c)
    if magnitude.max() <= EXHAUSTED_EPS * max(1.0, float(np.linalg.norm(state.y))):
        state.exhausted = True
        return state

    inactive = np.ones(state.n_cols, dtype=bool)
    inactive[state.active] = False
    j_star = int(np.argmax(np.where(inactive, magnitude, -1.0)))
    state.active.append(j_star)
    inactive[j_star] = False
    if state.dummy_mask[j_star]:
        state.t += 1

    A = np.asarray(state.active, dtype=np.intp)
    cmax = float(magnitude[A].max())
    signs = csign(c[A])
    XA = X[:, A] * signs
    gram = XA.conj().T @ XA
    gram = 0.5 * (gram + gram.conj().T)

    try:
        z = hermitian_solve(gram, np.ones(A.size, dtype=np.complex128))
    except NotPositiveDefiniteError as e:
        raise SingularActiveSetError(
            f"Active set of size {A.size} is numerically collinear after adding column {j_star}"
        ) from e

    L_A = float(np.real(z.sum())) ** -0.5
    w = L_A * z
    u = XA @ w
    g = X.conj().T @ u

    # The last admissible entrant takes the full least-squares step
    if A.size >= state.max_active:
        gamma = compute_step_size(c, g, cmax, L_A, ())
    else:
        gamma = compute_step_size(c, g, cmax, L_A, np.flatnonzero(inactive))

    state.beta[A] += gamma * signs * w
    state.residual = state.residual - gamma * u
    state.tau += 1
    state.cmax_path.append(cmax)
    return state


def candidate_set(state: LarsState) -> CandidateSet:
    """Snapshot the current active set with dummies stripped."""
    order = tuple((j, bool(state.dummy_mask[j])) for j in state.active)
    originals = tuple(sorted(j for j, is_dummy in order if not is_dummy))
    return CandidateSet(original_indices=originals, entrance_order=order, terminal_t=state.t)


def ctlars_run(state: LarsState, T: int) -> Tuple[LarsState, CandidateSet]:
    """
    Step until T dummies have entered or the path saturates.

    Calling again with a larger T continues the same path, so a run at T
    followed by a resume at T + 1 matches a fresh run at T + 1.
    """
    if T < 1:
        raise ValueError(f"Dummy budget T must be at least 1, got {T}")
    while not state.saturated and state.t < T:
        ctlars_step(state)
    return state, candidate_set(state)


def forward_select(X: ComplexMatrix, y: ComplexVector, n_steps: Optional[int] = None,
                   intercept: bool = True) -> LarsState:
    """
    Run CT-LARS as a plain forward selector without dummies.

    Standardizes X and centers y (or only normalizes columns when
    ``intercept`` is False) and takes up to n_steps steps.
    """
    Xs = standardize_columns(X, center=intercept)
    ys = center(y) if intercept else np.asarray(y, dtype=np.complex128)
    state = ctlars_init(Xs, ys, (), centered=intercept)
    limit = state.max_active if n_steps is None else min(n_steps, state.max_active)
    while not state.saturated and len(state.active) < limit:
        ctlars_step(state)
    return state
