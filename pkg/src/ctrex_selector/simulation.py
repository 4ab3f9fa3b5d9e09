"""Scenario generators, trial metrics and the Monte-Carlo benchmark harness."""

import dataclasses
import time
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt
from joblib import Parallel, delayed

from .cnum import (
    ComplexMatrix,
    ComplexVector,
    derive_seed,
    make_rng,
    sample_complex_gaussian,
    sample_complex_matrix,
)
from .selector import select


# Custom exceptions
class InvalidGridError(Exception):
    """Raised when a grid resolution does not divide the 180 degree field of view."""
    pass


class OffGridSourceError(Exception):
    """Raised when a source angle does not sit on the angular grid."""
    pass


@dataclass(frozen=True)
class RegressionScenario:
    """Sparse complex regression y = X β + ε with unit-modulus nonzeros."""
    p: int
    n: int
    s: int
    snr: float
    seed: int = 0
    sigma2: Optional[float] = None

    def __post_init__(self):
        if self.n < 2 or self.p < 1:
            raise ValueError(f"Need n >= 2 and p >= 1, got n={self.n}, p={self.p}")
        if not 0 <= self.s < self.p:
            raise ValueError(f"Sparsity s must satisfy 0 <= s < p, got s={self.s}, p={self.p}")
        if not self.snr > 0:
            raise ValueError(f"SNR must be positive, got {self.snr}")
        if self.sigma2 is not None and self.sigma2 < 0:
            raise ValueError(f"Noise variance must be non-negative, got {self.sigma2}")

    @property
    def noise_variance(self) -> float:
        """σ² = s / snr unless overridden."""
        if self.sigma2 is not None:
            return self.sigma2
        return self.s / self.snr


@dataclass(frozen=True)
class DoaScenario:
    """Single-snapshot uniform linear array with on-grid far-field sources."""
    M: int
    grid_resolution: float
    source_angles: Tuple[float, ...]
    source_powers: Tuple[float, ...]
    snr_db: float
    seed: int = 0

    def __post_init__(self):
        angles = tuple(float(a) for a in self.source_angles)
        powers = tuple(float(e) for e in self.source_powers)
        if len(angles) != len(powers):
            raise ValueError(
                f"Got {len(angles)} source angles but {len(powers)} source powers"
            )
        if not 1 <= len(angles) < self.M:
            raise ValueError(f"Need 1 <= Q < M sources, got Q={len(angles)}, M={self.M}")
        if len(set(angles)) != len(angles):
            raise ValueError("Source angles must be distinct")
        if any(not -90.0 <= a < 90.0 for a in angles):
            raise ValueError("Source angles must lie in [-90, 90)")
        if any(e <= 0 for e in powers):
            raise ValueError("Source powers must be positive")
        object.__setattr__(self, "source_angles", angles)
        object.__setattr__(self, "source_powers", powers)

    @property
    def noise_variance(self) -> float:
        """σ² = (Σ η_q / M) / 10^(snr_db / 10)."""
        return (sum(self.source_powers) / self.M) / 10.0 ** (self.snr_db / 10.0)


Scenario = Union[RegressionScenario, DoaScenario]


class SparseRegressionData(NamedTuple):
    X: ComplexMatrix
    y: ComplexVector
    true_support: npt.NDArray[np.intp]
    beta: ComplexVector


class DoaSnapshot(NamedTuple):
    Phi: ComplexMatrix
    y: ComplexVector
    true_support: npt.NDArray[np.intp]
    grid_angles: npt.NDArray[np.float64]
    amplitudes: ComplexVector


@dataclass(frozen=True)
class TrialMetrics:
    fdp: float
    tpr: float
    exact: bool


@dataclass
class AggregateReport:
    """Means and counts over the trials of one scenario."""
    trials: int
    fdr: float
    tpr: float
    exact: int
    runtime_ms: float
    per_trial: List[TrialMetrics]

    def to_row(self, snr: float, timing: bool = True) -> dict:
        return {
            'snr': snr,
            'trials': self.trials,
            'fdr': self.fdr,
            'tpr': self.tpr,
            'exact': self.exact,
            'runtime_ms': self.runtime_ms if timing else 0.0,
        }


def gen_sparse_regression(sc: RegressionScenario) -> SparseRegressionData:
    """
    Draw X ~ CN(0, I), an s-sparse unit-modulus β and y = X β + ε.

    Support positions are uniform without replacement and the nonzero phases
    uniform on [0, 2π); ε ~ CN(0, σ² I) with σ² from the scenario.
    """
    rng = make_rng(sc.seed)
    X = sample_complex_matrix(rng, sc.n, sc.p)
    support = np.sort(rng.choice(sc.p, size=sc.s, replace=False)).astype(np.intp)
    beta = np.zeros(sc.p, dtype=np.complex128)
    beta[support] = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, sc.s))
    noise = np.sqrt(sc.noise_variance) * sample_complex_gaussian(rng, sc.n)
    return SparseRegressionData(X=X, y=X @ beta + noise, true_support=support, beta=beta)


def steering_vector(theta: float, M: int) -> ComplexVector:
    """Half-wavelength ULA response a(θ)_m = exp(iπ m sin θ) / sqrt(M)."""
    if not -90.0 <= theta < 90.0:
        raise ValueError(f"Angle must lie in [-90, 90), got {theta}")
    m = np.arange(M)
    return np.exp(1j * np.pi * m * np.sin(np.deg2rad(theta))) / np.sqrt(M)


def grid_size(grid_resolution: float) -> int:
    """Number of grid points on [-90, 90) at the given resolution."""
    if grid_resolution <= 0:
        raise InvalidGridError(f"Grid resolution must be positive, got {grid_resolution}")
    ratio = 180.0 / grid_resolution
    G = int(round(ratio))
    if G < 1 or abs(ratio - G) > 1e-9:
        raise InvalidGridError(f"Grid resolution {grid_resolution} does not divide 180 degrees")
    return G


def build_cbf_matrix(M: int, grid_resolution: float) -> Tuple[ComplexMatrix, npt.NDArray[np.float64]]:
    """Measurement matrix with one steering vector per grid angle, from -90 degrees up."""
    G = grid_size(grid_resolution)
    angles = -90.0 + grid_resolution * np.arange(G)
    Phi = np.column_stack([steering_vector(float(a), M) for a in angles])
    return np.asfortranarray(Phi), angles


def mutual_coherence(Phi: ComplexMatrix) -> float:
    """Largest normalized inner product between two distinct columns."""
    norms = np.linalg.norm(Phi, axis=0)
    gram = np.abs(Phi.conj().T @ Phi) / np.outer(norms, norms)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


def grid_index(angle: float, grid_resolution: float) -> int:
    """Grid position of an angle; off-grid angles are rejected, never snapped."""
    G = grid_size(grid_resolution)
    position = (angle + 90.0) / grid_resolution
    index = int(round(position))
    if abs(position - index) > 1e-9 or not 0 <= index < G:
        raise OffGridSourceError(
            f"Source at {angle} degrees is not on the {grid_resolution} degree grid"
        )
    return index


def gen_doa_snapshot(sc: DoaScenario) -> DoaSnapshot:
    """
    One array snapshot y = Φ β + ε for sources at grid angles.

    Source q has amplitude sqrt(η_q) exp(iφ_q) with φ_q uniform on [0, 2π).
    """
    support = np.array([grid_index(a, sc.grid_resolution) for a in sc.source_angles], dtype=np.intp)
    Phi, angles = build_cbf_matrix(sc.M, sc.grid_resolution)
    rng = make_rng(sc.seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, len(sc.source_powers))
    amplitudes = np.sqrt(np.asarray(sc.source_powers)) * np.exp(1j * phases)
    noise = np.sqrt(sc.noise_variance) * sample_complex_gaussian(rng, sc.M)
    y = Phi[:, support] @ amplitudes + noise
    return DoaSnapshot(Phi=Phi, y=y, true_support=support, grid_angles=angles, amplitudes=amplitudes)


def trial_metrics(selected: Iterable[int], truth: Iterable[int]) -> TrialMetrics:
    """False discovery proportion, true positive rate and exact-recovery flag."""
    selected = {int(j) for j in selected}
    truth = {int(j) for j in truth}
    return TrialMetrics(
        fdp=len(selected - truth) / max(1, len(selected)),
        tpr=len(selected & truth) / max(1, len(truth)),
        exact=selected == truth,
    )


def _run_trial(scenario: Scenario, trial: int, alpha: float, seed: int,
               selector_options: dict) -> Tuple[TrialMetrics, float]:
    trial_scenario = dataclasses.replace(scenario, seed=derive_seed(seed, trial, 0))
    if isinstance(trial_scenario, DoaScenario):
        X, y, truth = gen_doa_snapshot(trial_scenario)[:3]
        intercept = False
    else:
        X, y, truth = gen_sparse_regression(trial_scenario)[:3]
        intercept = True

    start = time.perf_counter()
    result = select(
        X, y, alpha,
        master_seed=derive_seed(seed, trial, 1),
        intercept=intercept,
        n_jobs=1,
        **selector_options,
    )
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return trial_metrics(result.active_set, truth), elapsed_ms


def run_monte_carlo(scenario: Scenario, trials: int, alpha: float, seed: int,
                    selector_options: Optional[dict] = None, n_jobs: int = 1) -> AggregateReport:
    """
    Repeat data generation and selection over independent seeded trials.

    Trial i draws its data from the child seed (seed, i, 0) and its dummies
    from (seed, i, 1); results are gathered in trial order, so the report
    depends on the seed only.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    options = dict(selector_options or {})
    outcomes = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_run_trial)(scenario, i, alpha, seed, options) for i in range(trials)
    )
    per_trial = [metrics for metrics, _ in outcomes]
    return AggregateReport(
        trials=trials,
        fdr=float(np.mean([m.fdp for m in per_trial])),
        tpr=float(np.mean([m.tpr for m in per_trial])),
        exact=sum(1 for m in per_trial if m.exact),
        runtime_ms=float(np.mean([elapsed for _, elapsed in outcomes])),
        per_trial=per_trial,
    )
