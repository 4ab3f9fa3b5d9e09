#!/usr/bin/env python3
"""
Demonstration of all CT-Rex selector features.
"""

import numpy as np

from ctrex_selector import (
    DoaScenario,
    RegressionScenario,
    gen_doa_snapshot,
    gen_sparse_regression,
    run_monte_carlo,
    select,
    trial_metrics,
)

def print_section(title):
    print("\n" + "="*70)
    print(f"  {title}")
    print("="*70 + "\n")

def demo_basic_selection():
    print_section("1. Basic Selection (Sparse Complex Regression)")

    data = gen_sparse_regression(RegressionScenario(p=100, n=60, s=4, snr=5.0, seed=1))
    print(f"Input: n={data.X.shape[0]}, p={data.X.shape[1]}, true support {data.true_support.tolist()}")

    result = select(data.X, data.y, alpha=0.1)

    print("\nOutput:")
    print(f"Selected: {list(result.active_set)}")
    print(f"v* = {result.v_star}, T* = {result.T_star}, FDP estimate = {result.fdp_hat:.3f}")
    metrics = trial_metrics(result.active_set, data.true_support)
    print(f"FDP = {metrics.fdp:.3f}, TPR = {metrics.tpr:.3f}")

def demo_unit_phase_dummies():
    print_section("2. Unit-Phase Dummies")

    data = gen_sparse_regression(RegressionScenario(p=100, n=60, s=4, snr=5.0, seed=1))
    result = select(data.X, data.y, alpha=0.1, dummy_distribution="phase")

    print(f"Selected: {list(result.active_set)}")
    print(f"Dummies per experiment after calibration: {result.config.L}")

def demo_doa_snapshot():
    print_section("3. Direction-of-Arrival Snapshot")

    scenario = DoaScenario(M=80, grid_resolution=1.0, source_angles=(35.0, 40.0, 45.0),
                           source_powers=(1.0, 1.0, 1.0), snr_db=20.0, seed=3)
    snapshot = gen_doa_snapshot(scenario)
    print(f"Grid points: {snapshot.Phi.shape[1]}, sensors: {snapshot.Phi.shape[0]}")

    result = select(snapshot.Phi, snapshot.y, alpha=0.1, intercept=False)

    angles = snapshot.grid_angles[list(result.active_set)]
    print(f"Sources at {list(scenario.source_angles)} degrees")
    print(f"Estimated {angles.tolist()} degrees")

def demo_fdp_table():
    print_section("4. FDP Estimates Over the Calibration Grid")

    data = gen_sparse_regression(RegressionScenario(p=60, n=40, s=3, snr=2.0, seed=9))
    result = select(data.X, data.y, alpha=0.2, K=10)

    levels = "  ".join(f"{v:5.3f}" for v in result.config.v_grid)
    print(f"  T   {levels}")
    for T, row in result.fdp_table.items():
        print(f"  {T:<3} " + "  ".join(f"{fdp:5.3f}" for fdp in row))

def demo_monte_carlo():
    print_section("5. Monte-Carlo Benchmark")

    scenario = RegressionScenario(p=40, n=30, s=3, snr=5.0)
    report = run_monte_carlo(scenario, trials=10, alpha=0.1, seed=0, selector_options={'K': 10})
    print(f"Trials: {report.trials}")
    print(f"Empirical FDR: {report.fdr:.3f}")
    print(f"Mean TPR: {report.tpr:.3f}")
    print(f"Exact recoveries: {report.exact}")

def demo_structured_logging():
    print_section("6. Structured Logging")

    data = gen_sparse_regression(RegressionScenario(p=50, n=40, s=3, snr=10.0, seed=4))
    result = select(data.X, data.y, alpha=0.1, K=10)

    print("Log structure:")
    for entry in result.log:
        step = entry.get('step')
        print(f"\n  {step}:")
        if step == 'configuration':
            print(f"    - K: {entry.get('K')}, L: {entry.get('L')}, T_max: {entry.get('T_max')}")
        elif step == 'dummy_calibration':
            print(f"    - L: {entry.get('L')}, fdp_hat: {entry.get('fdp_hat'):.3f}")
        elif step == 'dummy_budget':
            print(f"    - T: {entry.get('T')}, min fdp_hat: {np.min(entry.get('fdp_hat')):.3f}")
        elif step == 'selection':
            print(f"    - size: {entry.get('size')}")

def main():
    print("\n" + "="*70)
    print("  CT-REX SELECTOR - FEATURE DEMONSTRATION")
    print("="*70)

    try:
        demo_basic_selection()
        demo_unit_phase_dummies()
        demo_doa_snapshot()
        demo_fdp_table()
        demo_monte_carlo()
        demo_structured_logging()

        print("\n" + "="*70)
        print("  All demonstrations completed successfully!")
        print("="*70 + "\n")

    except Exception as e:
        print(f"\n❌ Error: {e}")
        import traceback
        traceback.print_exc()

if __name__ == '__main__':
    main()
