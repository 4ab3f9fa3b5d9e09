"""Step definitions for the complex LARS path scenarios."""

import numpy as np
import pytest
from pytest_bdd import scenarios, given, when, then, parsers
from sklearn.linear_model import lars_path

from ctrex_selector.cnum import (
    center,
    csign,
    hermitian_solve,
    make_rng,
    sample_complex_gaussian,
    sample_complex_matrix,
    standardize_columns,
)
from ctrex_selector.ctlars import (
    compute_step_size,
    ctlars_init,
    ctlars_run,
    ctlars_step,
    forward_select,
)

# Load all scenarios from the feature file
scenarios('../features/ct_lars.feature')


def _random_path(seed, n, p, L=0):
    rng = make_rng(seed)
    X = standardize_columns(sample_complex_matrix(rng, n, p + L))
    y = center(sample_complex_gaussian(rng, n))
    return ctlars_init(X, y, range(p, p + L))


def _equiangular(state):
    """c, g, Cmax and L_A of the next step, after its entrant has joined."""
    X = state.X
    c = X.conj().T @ state.residual
    free = np.setdiff1d(np.arange(state.n_cols), state.active)
    entrant = int(free[np.argmax(np.abs(c[free]))])
    A = np.asarray(state.active + [entrant], dtype=np.intp)
    signs = csign(c[A])
    XA = X[:, A] * signs
    gram = XA.conj().T @ XA
    z = hermitian_solve(0.5 * (gram + gram.conj().T), np.ones(A.size, dtype=np.complex128))
    L_A = float(np.real(z.sum())) ** -0.5
    g = X.conj().T @ (XA @ (L_A * z))
    inactive = np.setdiff1d(np.arange(state.n_cols), A)
    return c, g, float(np.abs(c[A]).max()), L_A, inactive


@given(parsers.parse('a standardized {n:d} by {p:d} design with {L:d} dummies'))
def standardized_design(context, n, p, L):
    rng = make_rng(3)
    context['X'] = standardize_columns(sample_complex_matrix(rng, n, p + L))
    context['y'] = center(sample_complex_gaussian(rng, n))
    context['dummies'] = range(p, p + L)


@given(parsers.parse('a single standardized predictor with {n:d} rows'))
def single_predictor(context, n):
    rng = make_rng(4)
    context['X'] = standardize_columns(sample_complex_matrix(rng, n, 1))
    context['y'] = center(sample_complex_gaussian(rng, n))
    context['dummies'] = ()


@given('a response equal to the first dummy column')
def response_is_dummy(context):
    rng = make_rng(5)
    context['X'] = standardize_columns(sample_complex_matrix(rng, 20, 10))
    context['dummies'] = range(6, 10)
    context['y'] = context['X'][:, 6].copy()
    context['state'] = ctlars_init(context['X'], context['y'], context['dummies'])


@given(parsers.parse(
    'an orthonormal design with {p:d} originals and {L:d} dummies and y equal to column {j:d}'))
def orthonormal_design(context, p, L, j):
    size = p + L + 1
    m = np.arange(size)
    dft = np.exp(-2j * np.pi * np.outer(m, m) / size) / np.sqrt(size)
    # every non-constant Fourier column is zero-mean with unit norm
    X = np.asfortranarray(dft[:, 1:])
    context['X'] = X
    context['y'] = X[:, j].copy()
    context['state'] = ctlars_init(X, context['y'], range(p, p + L))


@given(parsers.parse(
    'a centered design with {n:d} rows, {p:d} originals and {L:d} dummies'))
def centered_design(context, n, p, L):
    rng = make_rng(31 + n)
    context['X'] = standardize_columns(sample_complex_matrix(rng, n, p + L))
    context['y'] = center(sample_complex_gaussian(rng, n))
    context['state'] = ctlars_init(context['X'], context['y'], range(p, p + L), centered=True)


@given(parsers.parse(
    'an uncentered design with {n:d} rows, {p:d} originals and {L:d} dummies'))
def uncentered_design(context, n, p, L):
    rng = make_rng(37 + n)
    context['X'] = standardize_columns(sample_complex_matrix(rng, n, p + L), center=False)
    context['y'] = sample_complex_gaussian(rng, n)
    context['state'] = ctlars_init(context['X'], context['y'], range(p, p + L))


@given('a noiseless planted problem')
def noiseless_planted(context, planted_problem):
    context['X'], context['y'], context['support'] = planted_problem


@when('the path is initialized')
def init_path(context):
    context['state'] = ctlars_init(context['X'], context['y'], context['dummies'])


@when(parsers.parse(
    'a path is initialized with {rows:d} design rows and {entries:d} response entries'))
def init_mismatched(context, rng, rows, entries):
    try:
        ctlars_init(sample_complex_matrix(rng, rows, 3), sample_complex_gaussian(rng, entries), ())
        context['error'] = None
    except Exception as e:
        context['error'] = e


@when('one step is taken')
def take_step(context):
    state = context['state']
    context['first_correlations'] = np.abs(state.X.conj().T @ state.residual)
    ctlars_step(state)


@when(parsers.parse('the path is run to T={T:d}'))
def run_path(context, T):
    try:
        context['state'], context['candidates'] = ctlars_run(context['state'], T)
        context['error'] = None
    except Exception as e:
        context['error'] = e


@when(parsers.parse(
    '{count:d} random complex paths of size {n:d} by {p:d} are run to one step before saturation'))
def run_random_paths(context, count, n, p):
    deviations, cmax_paths, residual_norms = [], [], []
    for seed in range(count):
        state = _random_path(seed, n, p)
        norms = [np.linalg.norm(state.residual)]
        for _ in range(min(n, p) - 1):
            ctlars_step(state)
            c = np.abs(state.X.conj().T @ state.residual)[state.active]
            deviations.append(float(np.max(np.abs(c - c.max())) / c.max()))
            norms.append(np.linalg.norm(state.residual))
        cmax_paths.append(state.cmax_path)
        residual_norms.append(norms)
    context['deviations'] = deviations
    context['cmax_paths'] = cmax_paths
    context['residual_norms'] = residual_norms


@when(parsers.parse(
    'the step size is computed with Cmax {cmax:g}, L_A {L_A:g} and no inactive columns'))
def step_without_inactive(context, cmax, L_A):
    c = np.array([cmax, -cmax], dtype=np.complex128)
    g = np.array([L_A, -L_A], dtype=np.complex128)
    context['gamma'] = compute_step_size(c, g, cmax, L_A, [])


@when('the step size is computed for real-valued correlations')
def step_real(context):
    rng = make_rng(8)
    C, A = 1.0, 0.6
    c = rng.uniform(-0.9, 0.9, 12)
    a = rng.uniform(-0.5, 0.5, 12)
    context['gamma'] = compute_step_size(c.astype(np.complex128), a.astype(np.complex128),
                                         C, A, range(12))
    steps = np.concatenate([(C - c) / (A - a), (C + c) / (A + a)])
    context['expected_gamma'] = min(steps[steps > 0].min(), C / A)


@when('the step size is computed for a random complex instance')
def step_complex(context):
    state = _random_path(21, 20, 10)
    ctlars_step(state)
    ctlars_step(state)
    c, g, cmax, L_A, inactive = _equiangular(state)
    gamma = compute_step_size(c, g, cmax, L_A, inactive)
    context.update(c=c, g=g, cmax=cmax, L_A=L_A, inactive=inactive, gamma=gamma)


@when(parsers.parse(
    '{count:d} real-valued instances of size {n:d} by {p:d} are run to saturation'))
def run_real_instances(context, count, n, p):
    pairs = []
    for seed in range(count):
        rng = make_rng(100 + seed)
        X = rng.standard_normal((n, p))
        y = X[:, :3] @ np.array([2.0, -1.5, 1.0]) + rng.standard_normal(n)
        Xs = standardize_columns(X)
        ys = center(y)
        state = ctlars_init(Xs, ys, ())
        while not state.saturated:
            ctlars_step(state)
        _, reference, _ = lars_path(
            np.ascontiguousarray(Xs.real), np.ascontiguousarray(ys.real), method="lar")
        pairs.append((list(state.active), [int(j) for j in reference]))
    context['orders'] = pairs


@when(parsers.parse(
    '{count:d} seeded experiments are run to T=1 and resumed to T=2 and T=3'))
def resume_experiments(context, count):
    pairs = []
    for seed in range(count):
        resumed = _random_path(seed, 40, 15, L=15)
        for T in (1, 2, 3):
            resumed, resumed_candidates = ctlars_run(resumed, T)
        fresh, fresh_candidates = ctlars_run(_random_path(seed, 40, 15, L=15), 3)
        pairs.append((resumed, resumed_candidates, fresh, fresh_candidates))
    context['resumed'] = pairs


@when(parsers.parse('forward selection takes {steps:d} steps'))
def forward_selection(context, steps):
    context['state'] = forward_select(context['X'], context['y'], n_steps=steps)


@then('all coefficients should be zero')
def check_zero_beta(context):
    assert not np.any(context['state'].beta)


@then('the residual should equal the response')
def check_residual_is_y(context):
    assert np.array_equal(context['state'].residual, context['y'])


@then(parsers.parse('the dummy count should be {t:d}'))
def check_dummy_count(context, t):
    assert context['state'].t == t


@then('the active set should hold the column with the largest correlation modulus')
def check_first_entrant(context):
    assert context['state'].active == [int(np.argmax(context['first_correlations']))]


@then(parsers.parse(
    'after every step the active correlation moduli should agree within {tol:g} relative'))
def check_equal_correlation(context, tol):
    assert max(context['deviations']) <= tol


@then('the largest correlation should strictly decrease')
def check_cmax_decreasing(context):
    for path in context['cmax_paths']:
        assert all(b < a for a, b in zip(path, path[1:]))


@then('the residual norm should never increase')
def check_residual_monotone(context):
    for norms in context['residual_norms']:
        assert all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


@then(parsers.parse('the predictor correlation should be below {tol:g}'))
def check_full_fit(context, tol):
    state = context['state']
    assert abs(state.X[:, 0].conj() @ state.residual) < tol


@then(parsers.parse('the step size should be {expected:g}'))
def check_step(context, expected):
    assert context['gamma'] == pytest.approx(expected)


@then('it should equal the smallest positive classical LARS step')
def check_classical_step(context):
    assert context['gamma'] == pytest.approx(context['expected_gamma'], rel=1e-12)


@then(parsers.parse(
    'some inactive correlation modulus should equal Cmax minus gamma L_A within {tol:g}'))
def check_catch_up(context, tol):
    gamma = context['gamma']
    assert gamma < context['cmax'] / context['L_A']
    idx = context['inactive']
    moving = np.abs(context['c'][idx] - gamma * context['g'][idx])
    target = context['cmax'] - gamma * context['L_A']
    assert np.min(np.abs(moving - target)) <= tol


@then('every selection order should match the reference real LARS')
def check_real_order(context):
    for ours, reference in context['orders']:
        assert ours[:len(reference)] == reference


@then('every entrance order should be identical to a fresh run at T=3')
def check_resume_order(context):
    for _, resumed, _, fresh in context['resumed']:
        assert resumed.entrance_order == fresh.entrance_order
        assert resumed.terminal_t == fresh.terminal_t


@then('every coefficient vector should be bit-identical')
def check_resume_beta(context):
    for resumed, _, fresh, _ in context['resumed']:
        assert np.array_equal(resumed.beta, fresh.beta)
        assert np.array_equal(resumed.residual, fresh.residual)


@then('the candidate set should be empty')
def check_empty_candidates(context):
    assert context['candidates'].original_indices == ()


@then(parsers.parse('the terminal dummy count should be {t:d}'))
def check_terminal_t(context, t):
    assert context['candidates'].terminal_t == t


@then(parsers.parse('the candidate set should be exactly column {j:d}'))
def check_single_candidate(context, j):
    assert context['candidates'].original_indices == (j,)


@then('the path should be exhausted without any dummy entering')
def check_exhausted(context):
    assert context['state'].exhausted
    assert context['state'].t == 0


@then(parsers.parse('the active set should hold {count:d} original columns'))
def check_forward_active(context, count):
    state = context['state']
    assert len(state.active) == count
    assert not state.dummy_mask.any()


@then('the coefficient support should lie in the active set')
def check_support(context):
    state = context['state']
    assert set(np.flatnonzero(state.beta)) <= set(state.active)


@then('no error should have been raised')
def check_no_error(context):
    assert context['error'] is None


@then(parsers.parse('the path should be saturated with {count:d} active columns'))
def check_saturated(context, count):
    state = context['state']
    assert state.saturated
    assert len(state.active) == count
    assert len(set(state.active)) == count


@then(parsers.parse(
    'every active correlation should vanish within {tol:g} of the response norm'))
def check_least_squares_fit(context, tol):
    state = context['state']
    c = state.X[:, state.active].conj().T @ state.residual
    assert np.abs(c).max() <= tol * np.linalg.norm(state.y)


@then(parsers.parse('the residual norm should be below {tol:g} of the response norm'))
def check_interpolated(context, tol):
    state = context['state']
    assert np.linalg.norm(state.residual) <= tol * np.linalg.norm(state.y)
