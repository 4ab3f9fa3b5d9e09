"""CT-Rex selector: dummy experiments, occurrence fusion and FDP calibration."""

import dataclasses
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from joblib import Parallel, delayed

from .cnum import (
    DUMMY_SAMPLERS,
    ComplexMatrix,
    ComplexVector,
    DimensionMismatchError,
    center,
    make_rng,
    sample_complex_matrix,
    standardize_columns,
)
from .ctlars import CandidateSet, LarsState, ctlars_init, ctlars_run

DEFAULT_EXPERIMENTS = 20

# Automatic dummy calibration grows L in steps of p up to this multiple of p.
MAX_DUMMY_FACTOR = 10


def default_v_grid(K: int) -> Tuple[float, ...]:
    """Voting levels 0.5, 0.55, ..., 0.95 plus 1 - 1/(2K)."""
    levels = {round(0.5 + 0.05 * i, 10) for i in range(10)}
    levels.add(round(1.0 - 1.0 / (2 * K), 10))
    return tuple(sorted(v for v in levels if v < 1.0))


@dataclass(frozen=True)
class TRexConfig:
    """
    Resolved parameters of one CT-Rex run.

    When L_max exceeds L the dummy count is calibrated: L grows in steps of
    its initial value, at most up to L_max, until the T = 1 estimate at the
    largest voting level is feasible. L_max = L fixes the dummy count.
    """
    K: int
    L: int
    alpha: float
    T_max: int
    v_grid: Tuple[float, ...]
    master_seed: int = 0
    dummy_distribution: str = "gaussian"
    intercept: bool = True
    n_jobs: int = 1
    L_max: Optional[int] = None

    def __post_init__(self):
        if self.K <= 1:
            raise ValueError(f"K must exceed 1, got {self.K}")
        if self.L < 1:
            raise ValueError(f"L must be at least 1, got {self.L}")
        if self.L_max is None:
            object.__setattr__(self, "L_max", self.L)
        if self.L_max < self.L:
            raise ValueError(f"L_max must be at least L={self.L}, got {self.L_max}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 1 <= self.T_max <= self.L:
            raise ValueError(f"T_max must lie in [1, L={self.L}], got {self.T_max}")
        grid = tuple(float(v) for v in self.v_grid)
        if not grid:
            raise ValueError("v_grid must not be empty")
        if any(not 0.5 <= v < 1.0 for v in grid):
            raise ValueError("Voting levels must lie in [0.5, 1)")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("v_grid must be strictly increasing")
        if self.dummy_distribution not in DUMMY_SAMPLERS:
            raise ValueError(f"Unknown dummy distribution '{self.dummy_distribution}'")
        object.__setattr__(self, "v_grid", grid)

    @classmethod
    def defaults(cls, n: int, p: int, alpha: float, *, K: Optional[int] = None,
                 L: Optional[int] = None, T_max: Optional[int] = None,
                 v_grid: Optional[Sequence[float]] = None, master_seed: int = 0,
                 dummy_distribution: str = "gaussian", intercept: bool = True,
                 n_jobs: int = 1, L_max: Optional[int] = None) -> "TRexConfig":
        """
        Fill every parameter left as None with its default for an n x p problem.

        Without an explicit L the run starts at L = p and may calibrate up to
        MAX_DUMMY_FACTOR * p; an explicit L is used as given.
        """
        K = DEFAULT_EXPERIMENTS if K is None else K
        if L is None:
            L = p
            if L_max is None:
                L_max = MAX_DUMMY_FACTOR * p
        if T_max is None:
            T_max = max(1, min(L, math.ceil(n / 2)))
        return cls(
            K=K,
            L=L,
            alpha=alpha,
            T_max=T_max,
            v_grid=tuple(v_grid) if v_grid is not None else default_v_grid(K),
            master_seed=master_seed,
            dummy_distribution=dummy_distribution,
            intercept=intercept,
            n_jobs=n_jobs,
            L_max=L_max,
        )

    def to_dict(self) -> Dict:
        """Effective configuration without the worker count."""
        values = asdict(self)
        values.pop("n_jobs")
        values["v_grid"] = list(self.v_grid)
        return values


@dataclass
class OccurrenceTable:
    """Relative occurrences Φ_{T,L}(j) for T = 0, 1, ..., max_T."""
    K: int
    p: int
    phi: Dict[int, npt.NDArray[np.float64]] = field(default_factory=dict)
    _deflated: Dict[Tuple[int, int], npt.NDArray[np.float64]] = field(
        default_factory=dict, repr=False, compare=False)
    _raw_sup: Dict[Tuple[float, int, int], float] = field(
        default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.phi.setdefault(0, np.zeros(self.p))

    @property
    def max_T(self) -> int:
        return max(self.phi)

    def selected(self, v: float, T: int) -> npt.NDArray[np.intp]:
        """Indices with Φ_{T,L}(j) > v."""
        return np.flatnonzero(self.phi[T] > v)

    def deflated(self, T: int, L: int) -> npt.NDArray[np.float64]:
        """
        Deflated relative occurrences Φ'_{T,L}.

        Each increment Φ_t - Φ_{t-1} is discounted by the share of the
        variables entering at dummy count t that are expected to be nulls.
        """
        if T == 0:
            return np.zeros(self.p)
        key = (T, L)
        if key not in self._deflated:
            delta = self.phi[T] - self.phi[T - 1]
            delta_total = float(delta.sum())
            result = self.deflated(T - 1, L).copy()
            if delta_total > 0:
                expected_nulls = (self.p - float(self.phi[T].sum())) / (L - T + 1)
                result += (1.0 - expected_nulls / delta_total) * delta
            self._deflated[key] = result
        return self._deflated[key]

    def raw_fdp_sup(self, v: float, t: int, L: int) -> float:
        """Largest raw FDP estimate at dummy count t over all thresholds v' >= v."""
        key = (float(v), t, L)
        if key not in self._raw_sup:
            phi = self.phi[t]
            phi_prime = self.deflated(t, L)
            # the selected set only changes at observed occurrence values
            thresholds = {float(v)} | {float(x) for x in np.unique(phi) if v <= x < 1.0}
            self._raw_sup[key] = max(_raw_fdp(phi_prime[phi > s]) for s in thresholds)
        return self._raw_sup[key]


@dataclass
class SelectionResult:
    """
    Final active set with the calibrated voting level and dummy count.

    ``v_star`` is a level of ``config.v_grid`` whenever some grid point meets
    the FDR target. Otherwise the result is the empty selection with
    ``v_star = 1.0`` (above every grid level), ``T_star = 1`` and
    ``fdp_hat = 0.0``, and the log carries a ``no_feasible_point`` entry.
    Both cases satisfy ``recompute_active_set() == active_set``.
    """
    active_set: Tuple[int, ...]
    v_star: float
    T_star: int
    fdp_hat: float
    occurrences: OccurrenceTable
    config: TRexConfig
    fdp_table: Dict[int, List[float]] = field(default_factory=dict)
    total_steps: int = 0
    log: List[Dict] = field(default_factory=list)

    def recompute_active_set(self) -> Tuple[int, ...]:
        """Active set rebuilt from the stored occurrences at (v*, T*)."""
        return tuple(int(j) for j in self.occurrences.selected(self.v_star, self.T_star))


def generate_dummy_matrix(master_seed: int, k: int, n: int, L: int,
                          distribution: str = "gaussian") -> ComplexMatrix:
    """n x L dummies for experiment k, drawn from the (master_seed, k) stream."""
    if L < 1:
        raise ValueError(f"L must be at least 1, got {L}")
    return sample_complex_matrix(make_rng(master_seed, k), n, L, distribution)


def run_experiment(X: ComplexMatrix, y: ComplexVector, k: int, T: int,
                   config: TRexConfig,
                   cache: Optional[LarsState] = None) -> Tuple[CandidateSet, LarsState]:
    """
    Run (or extend) random experiment k up to T dummies.

    X must be standardized and y centered. Without a cache the k-th dummy
    matrix is drawn, standardized and appended; with a cache the stored
    path is continued.
    """
    if cache is None:
        n, p = X.shape
        dummies = standardize_columns(
            generate_dummy_matrix(config.master_seed, k, n, config.L, config.dummy_distribution),
            center=config.intercept,
        )
        Xtilde = np.asfortranarray(np.hstack([X, dummies]))
        cache = ctlars_init(Xtilde, y, range(p, p + config.L), centered=config.intercept)
    state, candidates = ctlars_run(cache, T)
    return candidates, state


def relative_occurrences(candidates: Sequence[CandidateSet], T: int,
                         p: int) -> npt.NDArray[np.float64]:
    """Fraction of experiments whose candidate set contains each variable."""
    if T == 0 or not candidates:
        return np.zeros(p)
    counts = np.zeros(p)
    for candidate in candidates:
        counts[list(candidate.original_indices)] += 1.0
    return counts / len(candidates)


def _raw_fdp(selected_phi_prime: npt.NDArray[np.float64]) -> float:
    if selected_phi_prime.size == 0:
        return 0.0
    return min(1.0, float(np.sum(1.0 - selected_phi_prime)) / selected_phi_prime.size)


def estimate_fdp(occurrences: OccurrenceTable, v: float, T: int, L: int) -> float:
    """
    Conservative FDP estimate at voting level v and dummy count T.

    The raw estimate averages 1 - Φ'_{t,L}(j) over the variables with
    Φ_{t,L}(j) > v. The returned value is the largest raw estimate over all
    t <= T and all thresholds v' >= v, so it never decreases in T and never
    increases in v.
    """
    if not 1 <= T <= L:
        raise ValueError(f"T must lie in [1, L={L}], got {T}")
    return max(occurrences.raw_fdp_sup(v, t, L) for t in range(1, T + 1))


def _validate_inputs(X: ComplexMatrix, y: ComplexVector) -> Tuple[ComplexMatrix, ComplexVector]:
    X = np.asarray(X, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if X.ndim != 2:
        raise DimensionMismatchError(f"Expected a 2-D design, got {X.ndim} dimension(s)")
    if y.ndim != 1:
        raise DimensionMismatchError(f"Expected a 1-D response, got {y.ndim} dimension(s)")
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"Design has {X.shape[0]} rows but the response has {y.shape[0]} entries"
        )
    if X.shape[0] < 2:
        raise DimensionMismatchError("At least two observations are required")
    if X.shape[1] < 1:
        raise DimensionMismatchError("At least one predictor is required")
    return X, y


def calibrate_and_select(X: ComplexMatrix, y: ComplexVector, config: TRexConfig) -> SelectionResult:
    """
    Grow the dummy budget, fuse the experiments and pick (v*, T*).

    If the config allows it, L is first raised in steps of its initial value
    while the T = 1 estimate at the largest voting level exceeds alpha; the
    returned config carries the final L with L_max = L.

    For T = 1, 2, ... every experiment is extended to T dummies, Φ_{T,L} and
    the FDP estimates over the voting grid are computed, and the loop stops
    once even the largest voting level is infeasible or T_max is reached.
    (v*, T*) maximize the number of selected variables among feasible
    points, ties going to the larger v and then the smaller T.
    """
    X, y = _validate_inputs(X, y)
    n, p = X.shape
    log: List[Dict] = []
    log.append({
        'step': 'configuration',
        'n': n,
        'p': p,
        **config.to_dict(),
    })

    fdp_table: Dict[int, List[float]] = {}
    stop_reason = 't_max'

    def advance(parallel, T, run_config, caches, occurrences):
        outcomes = parallel(
            delayed(run_experiment)(X, y, k, T, run_config, caches[k])
            for k in range(run_config.K)
        )
        occurrences.phi[T] = relative_occurrences([c for c, _ in outcomes], T, p)
        return [state for _, state in outcomes]

    with Parallel(n_jobs=config.n_jobs, prefer="threads") as parallel:
        step = config.L
        while True:
            occurrences = OccurrenceTable(K=config.K, p=p)
            caches = advance(parallel, 1, config, [None] * config.K, occurrences)
            top = estimate_fdp(occurrences, config.v_grid[-1], 1, config.L)
            if top <= config.alpha or config.L + step > config.L_max:
                break
            log.append({'step': 'dummy_calibration', 'L': config.L, 'fdp_hat': top})
            config = dataclasses.replace(config, L=config.L + step)
        # dummy count is final
        config = dataclasses.replace(config, L_max=config.L)

        for T in range(1, config.T_max + 1):
            if T > 1:
                caches = advance(parallel, T, config, caches, occurrences)
            row = [estimate_fdp(occurrences, v, T, config.L) for v in config.v_grid]
            fdp_table[T] = row

            log.append({
                'step': 'dummy_budget',
                'T': T,
                'fdp_hat': row,
                'saturated_experiments': sum(1 for state in caches if state.t < T),
                'total_steps': sum(state.tau for state in caches),
            })

            if min(row) > config.alpha:
                stop_reason = 'fdp_exceeded'
                break

    log.append({'step': 'calibration_stop', 'reason': stop_reason, 'T': max(fdp_table), 'L': config.L})

    best = None
    for T, row in fdp_table.items():
        for v, fdp in zip(config.v_grid, row):
            if fdp > config.alpha:
                continue
            size = occurrences.selected(v, T).size
            key = (size, v, -T)
            if best is None or key > best[0]:
                best = (key, v, T, fdp)

    if best is None:
        # Φ never exceeds 1, so this threshold always yields the empty set
        v_star, T_star, fdp_hat = 1.0, 1, 0.0
        log.append({'step': 'no_feasible_point'})
    else:
        _, v_star, T_star, fdp_hat = best

    active_set = tuple(int(j) for j in occurrences.selected(v_star, T_star))
    total_steps = sum(state.tau for state in caches if state is not None)
    log.append({
        'step': 'selection',
        'v_star': v_star,
        'T_star': T_star,
        'fdp_hat': fdp_hat,
        'size': len(active_set),
    })

    return SelectionResult(
        active_set=active_set,
        v_star=v_star,
        T_star=T_star,
        fdp_hat=fdp_hat,
        occurrences=occurrences,
        config=config,
        fdp_table=fdp_table,
        total_steps=total_steps,
        log=log,
    )


def select(X_raw: ComplexMatrix, y_raw: ComplexVector, alpha: float, *,
           K: Optional[int] = None, L: Optional[int] = None, T_max: Optional[int] = None,
           v_grid: Optional[Sequence[float]] = None, master_seed: int = 0,
           dummy_distribution: str = "gaussian", intercept: bool = True,
           n_jobs: int = 1, L_max: Optional[int] = None) -> SelectionResult:
    """
    Select variables of y ≈ X β at target FDR alpha.

    Args:
        X_raw: n x p complex design
        y_raw: length-n complex response
        alpha: target FDR in [0, 1]
        K, L, T_max, v_grid: overrides; defaults are K = 20, L = p,
            T_max = min(L, ceil(n/2)) and the 0.05-spaced voting grid
        L_max: largest dummy count for calibration (default 10p when L
            is not given, otherwise L)
        master_seed: seed of the dummy streams
        dummy_distribution: registered dummy sampler name
        intercept: center columns and response (False only normalizes columns)
        n_jobs: worker threads for the random experiments

    Returns:
        SelectionResult with the active set, v*, T*, FDP estimate and log
    """
    X_raw, y_raw = _validate_inputs(X_raw, y_raw)
    n, p = X_raw.shape
    config = TRexConfig.defaults(
        n, p, alpha,
        K=K, L=L, T_max=T_max, v_grid=v_grid,
        master_seed=master_seed,
        dummy_distribution=dummy_distribution,
        intercept=intercept,
        n_jobs=n_jobs,
        L_max=L_max,
    )
    X = standardize_columns(X_raw, center=intercept)
    y = center(y_raw) if intercept else y_raw
    return calibrate_and_select(X, y, config)
