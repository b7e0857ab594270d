"""
Baseline timing tests: desk-scale runs of the main estimators.
All tests print [BASELINE] <name>: X.XXXs and assert upper-bound thresholds.
"""
import math
import time

import numpy as np
import pytest


def test_ms_on_random_matrices(rng):
    from transversality_core import LinearMapR, ms
    t0 = time.perf_counter()
    for _ in range(1000):
        t, s = rng.integers(1, 9, size=2)
        M = rng.standard_normal((t, s))
        value = ms(LinearMapR(M))
        expected = np.linalg.svd(M, compute_uv=False)[-1] if s >= t else 0.0
        assert value == pytest.approx(expected, abs=1e-10)
    elapsed = time.perf_counter() - t0
    print(f"\n[BASELINE] ms_random_matrices: {elapsed:.3f}s")
    assert elapsed < 10, f"1000 MS evaluations took {elapsed:.3f}s (limit 10s)"


def test_crofton_circle(unit_circle):
    from integral_geometry import crofton_volume, crofton_constant
    t0 = time.perf_counter()
    estimate = crofton_volume(unit_circle, 1, 2, 100_000, seed=7, R=1.25)
    constant = crofton_constant(1, 2, 100_000, seed=8)
    elapsed = time.perf_counter() - t0
    print(f"\n[BASELINE] crofton_circle: {elapsed:.3f}s")
    assert abs(estimate.extras["raw_integral"] - 4.0) < 0.05
    assert abs(constant.mean - 2.0 / math.pi) < 0.01
    assert elapsed < 60, f"Crofton at N=1e5 took {elapsed:.3f}s (limit 60s)"


def test_separated_subset_scaling(unit_circle):
    from integral_geometry import maximal_separated_subset
    t0 = time.perf_counter()
    scaled = []
    for i, eps in enumerate((0.1, 0.05, 0.02, 0.01)):
        net = maximal_separated_subset(unit_circle, eps, 1.5, np.random.default_rng(500 + i))
        scaled.append(len(net) * eps)
    elapsed = time.perf_counter() - t0
    print(f"\n[BASELINE] separated_subset_scaling: {elapsed:.3f}s")
    assert max(scaled) <= 4 * min(scaled)
    assert elapsed < 120, f"separated subsets took {elapsed:.3f}s (limit 120s)"


def test_good_value_on_squaring():
    from experiments import run_goodvalue
    t0 = time.perf_counter()
    result = run_goodvalue({}, 17)
    elapsed = time.perf_counter() - t0
    print(f"\n[BASELINE] good_value_squaring: {elapsed:.3f}s")
    assert result.contract_ok, result.violation
    assert elapsed < 60, f"good value search took {elapsed:.3f}s (limit 60s)"


def test_equator_degrees():
    from donaldson_procedure import equator_degree
    t0 = time.perf_counter()
    gaps = [abs(a - b) for a, b, _ in (equator_degree(k) for k in range(1, 13))]
    elapsed = time.perf_counter() - t0
    print(f"\n[BASELINE] equator_degrees: {elapsed:.3f}s")
    assert gaps == [1] * 12
    assert elapsed < 60, f"equator degrees took {elapsed:.3f}s (limit 60s)"


def test_globalize_line():
    from donaldson_procedure import Calibration, crosstalk_constant, globalize
    from model_geometry import PrequantumModel, CoherentSection, SubmanifoldY
    model = PrequantumModel(n=1, k=256)
    calibration = Calibration(40.0, crosstalk_constant(), (8.0, 4.0))
    t0 = time.perf_counter()
    report = globalize(CoherentSection(model), SubmanifoldY.coordinate(1, 1, 1.0), 0.5, calibration,
                       budget=64, seed=1)
    elapsed = time.perf_counter() - t0
    print(f"\n[BASELINE] globalize_line: {elapsed:.3f}s")
    assert report.final_min >= report.final_eta > 0
    assert elapsed < 600, f"globalize took {elapsed:.3f}s (limit 600s)"
